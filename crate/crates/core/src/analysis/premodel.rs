use crate::analysis::{CheckLine, Report};
use crate::catalog::{estimate_dilation, koranyi_probes, SelfMap};
use crate::error::{check_dim, Error, Result};
use crate::geometry::metric::kob_dist_raw;
use crate::geometry::sampling::{mixed_cloud, seeded, uniform_in_radius};
use crate::geometry::{Automorphism, BallPoint, BoundaryPoint};
use crate::numeric::{self, Cx, CX_ZERO};

/// Samples used for the intertwining residual.
pub const PREMODEL_SAMPLES: usize = 1000;
const INTERTWINING_TOL: f64 = 1e-8;
const DILATION_TOL: f64 = 1e-4;
const LIMIT_TOL: f64 = 1e-6;
const BACKWARD_SAMPLES: usize = 8;

/// `ℓ = post ∘ embed ∘ pre : B^k → B^q`, where `embed(w) = (w, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Intertwiner {
    pre: SelfMap,
    post: Automorphism,
}

impl Intertwiner {
    pub fn new(pre: SelfMap, post: Automorphism) -> Result<Self> {
        if pre.dim() > post.dim() {
            return Err(Error::DimensionMismatch {
                expected: post.dim(),
                got: pre.dim(),
            });
        }
        Ok(Self { pre, post })
    }

    /// The coordinate embedding `w ↦ (w, 0)`.
    pub fn embedding(base_dim: usize, target_dim: usize) -> Result<Self> {
        Self::new(
            SelfMap::identity(base_dim)?,
            Automorphism::identity(target_dim),
        )
    }

    pub fn base_dim(&self) -> usize {
        self.pre.dim()
    }

    pub fn target_dim(&self) -> usize {
        self.post.dim()
    }

    /// `g ∘ ℓ`.
    pub fn followed_by(&self, g: &Automorphism) -> Result<Self> {
        Self::new(self.pre.clone(), g.compose(&self.post)?)
    }

    pub(crate) fn eval_raw(&self, w: &[Cx]) -> Vec<Cx> {
        let mut z = self.pre.eval_raw(w);
        z.resize(self.post.dim(), CX_ZERO);
        self.post.apply_raw(&z)
    }

    pub fn apply(&self, w: &BallPoint) -> Result<BallPoint> {
        check_dim(self.base_dim(), w.dim())?;
        BallPoint::new(self.eval_raw(w.coords()))
    }
}

/// `(B^k, ℓ, τ)` with `τ` hyperbolic, repelling at `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreModel {
    pub intertwiner: Intertwiner,
    pub tau: Automorphism,
    pub repelling: BoundaryPoint,
    lambda_tau: f64,
}

impl PreModel {
    pub fn new(
        intertwiner: Intertwiner,
        tau: Automorphism,
        repelling: BoundaryPoint,
    ) -> Result<Self> {
        check_dim(intertwiner.base_dim(), tau.dim())?;
        check_dim(tau.dim(), repelling.dim())?;
        let image = tau.apply_boundary(&repelling)?;
        let drift = numeric::dist_euclid(image.coords(), repelling.coords());
        if drift > 1e-10 {
            return Err(Error::Domain(format!("τ moves R by {drift:.3e}")));
        }
        isometry_check(&tau)?;
        let lambda_tau = tau.dilation_at(&repelling)?;
        if !(lambda_tau > 1.0) {
            return Err(Error::Domain(format!(
                "τ has dilation {lambda_tau} at R; a pre-model needs a repelling point"
            )));
        }
        Ok(Self {
            intertwiner,
            tau,
            repelling,
            lambda_tau,
        })
    }

    pub fn base_dim(&self) -> usize {
        self.tau.dim()
    }

    pub fn lambda_tau(&self) -> f64 {
        self.lambda_tau
    }
}

fn isometry_check(g: &Automorphism) -> Result<()> {
    let mut rng = seeded(0x150);
    for _ in 0..16 {
        let a = uniform_in_radius(&mut rng, g.dim(), 0.95);
        let b = uniform_in_radius(&mut rng, g.dim(), 0.95);
        let before = kob_dist_raw(a.coords(), b.coords());
        let after = kob_dist_raw(&g.apply_raw(a.coords()), &g.apply_raw(b.coords()));
        if (before - after).abs() > 1e-10 * (1.0 + before) {
            return Err(Error::Domain(format!(
                "τ is not an isometry: {before} became {after}"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PremodelReport {
    pub report: Report,
    /// `sup |f(ℓ(w)) - ℓ(τ(w))|` over the samples.
    pub residual: f64,
    pub lambda_tau: f64,
    pub lambda_f: f64,
    /// `max |ℓ(τ^{-n}(x)) - ζ|` over the sample points at the deepest `n`.
    pub backward_dist: f64,
    pub backward_steps: usize,
    /// `max |ℓ(z) - ζ|` at the deepest Korányi probe toward `R`.
    pub probe_dist: f64,
}

impl PremodelReport {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

/// Runs the four pre-model checks: intertwining, equal dilation, backward images
/// tending to `ζ`, and the K-limit of `ℓ` at `R`.
pub fn premodel_validate(
    f: &SelfMap,
    model: &PreModel,
    zeta: &BoundaryPoint,
    seed: u64,
) -> Result<PremodelReport> {
    check_dim(f.dim(), model.intertwiner.target_dim())?;
    check_dim(f.dim(), zeta.dim())?;
    let ell = &model.intertwiner;
    let k = model.base_dim();

    let mut rng = seeded(seed);
    let residual = mixed_cloud(&mut rng, k, PREMODEL_SAMPLES)
        .iter()
        .map(|w| {
            let lhs = f.eval_raw(&ell.eval_raw(w.coords()));
            let rhs = ell.eval_raw(&model.tau.apply_raw(w.coords()));
            numeric::dist_euclid(&lhs, &rhs)
        })
        .fold(0.0, f64::max);

    let lambda_f = match f.known_dilation(zeta) {
        Some(l) => l,
        None => estimate_dilation(f, zeta)?.lambda,
    };
    let lambda_tau = model.lambda_tau;

    // enough backward steps to bring 1 - |τ^{-n}(x)| near λ_τ^{-n} ≈ 1e-20
    let backward_steps =
        ((20.0 * std::f64::consts::LN_10 / lambda_tau.ln()).ceil() as usize).min(2000);
    let tau_inv = model.tau.inverse();
    let mut backward_dist: f64 = 0.0;
    for _ in 0..BACKWARD_SAMPLES {
        let mut x = uniform_in_radius(&mut rng, k, 0.9).into_coords();
        for _ in 0..backward_steps {
            x = tau_inv.apply_raw(&x);
        }
        let img = ell.eval_raw(&x);
        backward_dist = backward_dist.max(numeric::dist_euclid(&img, zeta.coords()));
    }

    let probes = koranyi_probes(&model.repelling, &crate::catalog::PROBE_DEPTHS)?;
    let probe_dist = probes
        .iter()
        .map(|seq| {
            let z = seq.last().expect("non-empty probe");
            numeric::dist_euclid(&ell.eval_raw(z.coords()), zeta.coords())
        })
        .fold(0.0, f64::max);

    let mut report = Report::new();
    report.push(CheckLine::from_margin(
        "premodel.intertwining",
        INTERTWINING_TOL - residual,
    ));
    report.push(CheckLine::from_margin(
        "premodel.dilation",
        DILATION_TOL - (lambda_tau - lambda_f).abs(),
    ));
    report.push(CheckLine::from_margin(
        "premodel.backward_limit",
        LIMIT_TOL - backward_dist,
    ));
    report.push(CheckLine::from_margin(
        "premodel.k_limit",
        LIMIT_TOL - probe_dist,
    ));
    Ok(PremodelReport {
        report,
        residual,
        lambda_tau,
        lambda_f,
        backward_dist,
        backward_steps,
        probe_dist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{cx, CMatrix, CX_ONE};

    /// `f = (φ(z1), z2/2)` with `φ` hyperbolic at 1, and the pre-model
    /// `τ` hyperbolic at `i`, `ℓ(w) = (-i w, 0)`.
    fn warped() -> (SelfMap, PreModel, BoundaryPoint) {
        let phi = SelfMap::disc_hyperbolic(CX_ONE, 3.0).unwrap();
        let f = SelfMap::warped_product(phi, cx(0.5, 0.0), 2).unwrap();
        let r = BoundaryPoint::from_c64(&[num_complex::Complex64::new(0.0, 1.0)]).unwrap();
        let tau = Automorphism::hyperbolic(&r, 3.0).unwrap();
        let mut u = CMatrix::identity(1);
        u.set(0, 0, cx(0.0, -1.0));
        let rot = SelfMap::automorphism(Automorphism::from_unitary(u).unwrap());
        let ell = Intertwiner::new(rot, Automorphism::identity(2)).unwrap();
        let model = PreModel::new(ell, tau, r).unwrap();
        (f, model, BoundaryPoint::e1(2))
    }

    #[test]
    fn automorphism_is_its_own_premodel() {
        let zeta = BoundaryPoint::from_real(&[0.0, 1.0]).unwrap();
        let g = Automorphism::hyperbolic(&zeta, 2.0).unwrap();
        let model = PreModel::new(
            Intertwiner::embedding(2, 2).unwrap(),
            g.clone(),
            zeta.clone(),
        )
        .unwrap();
        let r = premodel_validate(&SelfMap::automorphism(g), &model, &zeta, 7).unwrap();
        assert!(r.passed(), "{}", r.report);
    }

    #[test]
    fn warped_product_premodel_passes() {
        let (f, model, zeta) = warped();
        let r = premodel_validate(&f, &model, &zeta, 1).unwrap();
        assert!(r.passed(), "{}", r.report);
        assert!(r.residual < 1e-14);
    }

    #[test]
    fn wrong_dilation_fails_check_two() {
        let (f, model, zeta) = warped();
        let tau = Automorphism::hyperbolic(&model.repelling, 3.3).unwrap();
        let bad = PreModel::new(model.intertwiner.clone(), tau, model.repelling.clone()).unwrap();
        let r = premodel_validate(&f, &bad, &zeta, 1).unwrap();
        assert!(!r.report.get("premodel.dilation").unwrap().passed);
        assert!(!r.passed());
    }

    #[test]
    fn residual_is_conjugation_equivariant() {
        let (f, model, zeta) = warped();
        let g = Automorphism::normalizing(&BallPoint::from_real(&[0.1, 0.2]).unwrap(), &zeta)
            .unwrap()
            .0;
        let gf = SelfMap::conjugate(f.clone(), g.clone()).unwrap();
        let moved = PreModel::new(
            model.intertwiner.followed_by(&g).unwrap(),
            model.tau.clone(),
            model.repelling.clone(),
        )
        .unwrap();
        let a = premodel_validate(&f, &model, &zeta, 3).unwrap();
        let b = premodel_validate(&gf, &moved, &g.apply_boundary(&zeta).unwrap(), 3).unwrap();
        assert!((a.residual - b.residual).abs() < 1e-10);
    }

    #[test]
    fn non_repelling_tau_is_rejected() {
        let r = BoundaryPoint::e1(1);
        let tau = Automorphism::hyperbolic(&r.neg(), 3.0).unwrap();
        assert!(PreModel::new(Intertwiner::embedding(1, 1).unwrap(), tau, r).is_err());
    }
}
