//! Automorphisms of the ball in the normal form `z ↦ U φ_a(z)`.

use crate::error::{check_dim, Error, Result};
use crate::geometry::metric::{horofunction_raw, moebius_raw};
use crate::geometry::point::{BallPoint, BoundaryPoint};
use crate::numeric::{
    self, cx_real, dd, inner, norm_sqr, scale, to_f64, unitary_to_e1, CMatrix, Cx, CX_I, CX_ONE,
    CX_ZERO, ONE,
};

/// Fixed boundary point and the dilation there, when the automorphism was built around one.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryNormalForm {
    pub fixed: BoundaryPoint,
    pub dilation: f64,
}

/// `g(z) = U φ_a(z)` with `a = g^{-1}(0)` the Möbius center and `U` unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct Automorphism {
    center: BallPoint,
    unitary: CMatrix,
    normal_form: Option<BoundaryNormalForm>,
}

const EXTRACTION_RADIUS: f64 = 0.5;

impl Automorphism {
    pub fn identity(dim: usize) -> Self {
        Self {
            center: BallPoint::origin(dim),
            unitary: CMatrix::identity(dim),
            normal_form: None,
        }
    }

    /// The involution `φ_a` with `φ_a(a) = 0`, `φ_a(0) = a`; the identity for `a = 0`.
    pub fn mobius_involution(a: &BallPoint) -> Self {
        Self {
            center: a.clone(),
            unitary: CMatrix::identity(a.dim()),
            normal_form: None,
        }
    }

    pub fn from_unitary(unitary: CMatrix) -> Result<Self> {
        if unitary.rows() != unitary.cols() || unitary.rows() == 0 {
            return Err(Error::Domain(
                "unitary must be a non-empty square matrix".into(),
            ));
        }
        let defect = unitary.unitarity_defect();
        if defect > 1e-12 {
            return Err(Error::Domain(format!(
                "matrix is not unitary (|U*U - I| = {defect:e})"
            )));
        }
        Ok(Self {
            center: BallPoint::origin(unitary.rows()),
            unitary,
            normal_form: None,
        })
    }

    pub fn from_parts(center: BallPoint, unitary: CMatrix) -> Result<Self> {
        check_dim(center.dim(), unitary.rows())?;
        let mut g = Self::from_unitary(unitary)?;
        g.center = center;
        Ok(g)
    }

    /// Hyperbolic automorphism fixing `±ζ`, repelling at `ζ` with dilation `λ` there.
    ///
    /// It translates the diameter through `ζ` by `log λ` toward `-ζ`; in the disc
    /// with `ζ = 1` it is `z ↦ (z - t)/(1 - t z)`, `t = (λ - 1)/(λ + 1)`.
    pub fn hyperbolic(zeta: &BoundaryPoint, lambda: f64) -> Result<Self> {
        if !(lambda > 1.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!(
                "hyperbolic dilation must exceed 1, got {lambda}"
            )));
        }
        let l = dd(lambda);
        let t = (l - ONE) / (l + ONE);
        let q = zeta.dim();
        Ok(Self {
            center: zeta.scaled(t)?,
            unitary: CMatrix::identity(q).scaled(-CX_ONE),
            normal_form: Some(BoundaryNormalForm {
                fixed: zeta.clone(),
                dilation: lambda,
            }),
        })
    }

    /// Hyperbolic automorphism translating the diameter through `ζ` by signed length `s`
    /// (positive `s` moves points toward `ζ`).
    pub fn axial_translation(zeta: &BoundaryPoint, s: f64) -> Result<Self> {
        if s == 0.0 {
            return Ok(Self::identity(zeta.dim()));
        }
        if s > 0.0 {
            Self::hyperbolic(&zeta.neg(), s.exp())
        } else {
            Self::hyperbolic(zeta, (-s).exp())
        }
    }

    /// Automorphism fixing `ζ` and sending `a` to 0, with its dilation `μ = exp(-h(a, ζ))` at `ζ`.
    ///
    /// Built in the Siegel picture of the frame where `ζ = e_1`: a unitary
    /// reflection carrying `ζ` to `e_1`, a Heisenberg translation moving `a`
    /// onto the axis while preserving horospheres, and the axial dilation
    /// carrying that axis point to the origin.
    pub fn normalizing(a: &BallPoint, zeta: &BoundaryPoint) -> Result<(Self, f64)> {
        check_dim(zeta.dim(), a.dim())?;
        let frame = unitary_to_e1(zeta.coords());
        let frame_inv = frame.adjoint();
        let (w1, wp) = cayley(&frame.mul_vec(a.coords()));
        let height = w1.im - norm_sqr(&wp);
        let shift_c: Vec<Cx> = wp.iter().map(|c| -*c).collect();
        let shift_x = -w1.re;
        let stage = Siegel {
            shift_c,
            shift_x,
            height,
        };
        let forward = |z: &[Cx]| -> Vec<Cx> {
            let (v1, vp) = cayley(&frame.mul_vec(z));
            let (v1, vp) = stage.heisenberg(v1, vp);
            let (v1, vp) = stage.dilate(v1, vp);
            frame_inv.mul_vec(&cayley_inv(v1, &vp))
        };
        let mut g = canonicalize(a.clone(), forward);
        let mu = to_f64(height);
        let image = g.apply_raw(a.coords());
        if numeric::norm(&image).hi() > 1e-10 {
            return Err(Error::Numerical(format!(
                "normalizing automorphism misses the origin by {:e}",
                to_f64(numeric::norm(&image))
            )));
        }
        g.normal_form = Some(BoundaryNormalForm {
            fixed: zeta.clone(),
            dilation: mu,
        });
        Ok((g, mu))
    }

    /// Parabolic automorphism fixing `ζ` with dilation 1 there: the Heisenberg translation
    /// `(w_1, w') ↦ (w_1 + x + 2i<w', c> + i|c|^2, w' + c)` in the Siegel frame of `ζ`.
    ///
    /// `shift` has `q - 1` entries; horospheres at `ζ` are mapped onto themselves.
    pub fn parabolic(zeta: &BoundaryPoint, shift: &[Cx], x: f64) -> Result<Self> {
        check_dim(zeta.dim() - 1, shift.len())?;
        if !x.is_finite() {
            return Err(Error::Domain(format!("parabolic shift {x} is not finite")));
        }
        let frame = unitary_to_e1(zeta.coords());
        let frame_inv = frame.adjoint();
        let forward = Siegel {
            shift_c: shift.to_vec(),
            shift_x: dd(x),
            height: ONE,
        };
        let backward = Siegel {
            shift_c: shift.iter().map(|c| -*c).collect(),
            shift_x: dd(-x),
            height: ONE,
        };
        let through = |stage: &Siegel, z: &[Cx]| -> Vec<Cx> {
            let (v1, vp) = cayley(&frame.mul_vec(z));
            let (v1, vp) = stage.heisenberg(v1, vp);
            frame_inv.mul_vec(&cayley_inv(v1, &vp))
        };
        let center = BallPoint::new(through(&backward, &vec![CX_ZERO; zeta.dim()]))?;
        let mut g = canonicalize(center, |z| through(&forward, z));
        g.normal_form = Some(BoundaryNormalForm {
            fixed: zeta.clone(),
            dilation: 1.0,
        });
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn center(&self) -> &BallPoint {
        &self.center
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn normal_form(&self) -> Option<&BoundaryNormalForm> {
        self.normal_form.as_ref()
    }

    pub(crate) fn apply_raw(&self, z: &[Cx]) -> Vec<Cx> {
        self.unitary.mul_vec(&moebius_raw(self.center.coords(), z))
    }

    pub fn apply(&self, z: &BallPoint) -> Result<BallPoint> {
        check_dim(self.dim(), z.dim())?;
        BallPoint::new(self.apply_raw(z.coords()))
    }

    /// Continuous extension to the sphere.
    pub fn apply_boundary(&self, zeta: &BoundaryPoint) -> Result<BoundaryPoint> {
        check_dim(self.dim(), zeta.dim())?;
        BoundaryPoint::new(self.apply_raw(zeta.coords()))
    }

    pub fn inverse(&self) -> Self {
        let center = self.unitary.mul_vec(self.center.coords());
        Self {
            center: BallPoint::new(center).expect("image of a ball point stays in the ball"),
            unitary: self.unitary.adjoint(),
            normal_form: self.normal_form.as_ref().map(|nf| BoundaryNormalForm {
                fixed: nf.fixed.clone(),
                dilation: nf.dilation.recip(),
            }),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Automorphism) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        let center = other.inverse().apply(&self.center)?;
        Ok(canonicalize(center, |z| {
            self.apply_raw(&other.apply_raw(z))
        }))
    }

    /// Complex Jacobian of `z ↦ U φ_a(z)`.
    pub(crate) fn jacobian_raw(&self, z: &[Cx]) -> CMatrix {
        self.unitary.mul(&moebius_jacobian(self.center.coords(), z))
    }

    /// Dilation at a fixed boundary point, `exp(h(g(0), ζ))`.
    pub fn dilation_at(&self, zeta: &BoundaryPoint) -> Result<f64> {
        check_dim(self.dim(), zeta.dim())?;
        let moved = numeric::dist_euclid(&self.apply_raw(zeta.coords()), zeta.coords());
        if moved > 1e-9 {
            return Err(Error::Domain(format!(
                "automorphism does not fix the boundary point (moved by {moved:e})"
            )));
        }
        let g0 = self.apply_raw(&vec![CX_ZERO; self.dim()]);
        Ok(horofunction_raw(&g0, zeta.coords()).exp())
    }
}

/// Turns a closure known to be an automorphism with `g(center) = 0` into normal form.
///
/// `g ∘ φ_center` is unitary, so its columns are read off at a fixed radius.
pub(crate) fn canonicalize(center: BallPoint, g: impl Fn(&[Cx]) -> Vec<Cx>) -> Automorphism {
    let q = center.dim();
    let r = dd(EXTRACTION_RADIUS);
    let cols: Vec<Vec<Cx>> = (0..q)
        .map(|j| {
            let mut e = vec![CX_ZERO; q];
            e[j] = cx_real(r);
            let img = g(&moebius_raw(center.coords(), &e));
            img.into_iter().map(|v| scale(v, ONE / r)).collect()
        })
        .collect();
    Automorphism {
        center,
        unitary: CMatrix::from_columns(&cols),
        normal_form: None,
    }
}

/// `J = [-A(1 - <z,a>) + (a - A z) a^*] / (1 - <z,a>)^2` with `A = s I + (1 - s) a a^*/|a|^2`.
fn moebius_jacobian(a: &[Cx], z: &[Cx]) -> CMatrix {
    let q = a.len();
    let aa = norm_sqr(a);
    if aa.hi() == 0.0 {
        return CMatrix::identity(q);
    }
    let s = (ONE - aa).sqrt();
    let mut amat = CMatrix::identity(q).scaled(cx_real(s));
    let coef = (ONE - s) / aa;
    for i in 0..q {
        for j in 0..q {
            let v = amat.get(i, j) + scale(a[i] * a[j].conj(), coef);
            amat.set(i, j, v);
        }
    }
    let den = CX_ONE - inner(z, a);
    let az = amat.mul_vec(z);
    let num_vec: Vec<Cx> = a.iter().zip(&az).map(|(ai, v)| *ai - *v).collect();
    let den2 = den * den;
    let mut j = CMatrix::zeros(q, q);
    for r in 0..q {
        for c in 0..q {
            let v = (-amat.get(r, c) * den + num_vec[r] * a[c].conj()) / den2;
            j.set(r, c, v);
        }
    }
    j
}

/// Cayley map of the ball (frame `ζ = e_1`) onto `{Im w_1 > |w'|^2}`.
fn cayley(z: &[Cx]) -> (Cx, Vec<Cx>) {
    let d = CX_ONE - z[0];
    let w1 = CX_I * (CX_ONE + z[0]) / d;
    let wp = z[1..].iter().map(|zj| CX_I * *zj / d).collect();
    (w1, wp)
}

fn cayley_inv(w1: Cx, wp: &[Cx]) -> Vec<Cx> {
    // 1 - z_1 = 2i / (w_1 + i)
    let d = Cx::new(dd(0.0), dd(2.0)) / (w1 + CX_I);
    let mut z = Vec::with_capacity(wp.len() + 1);
    z.push(CX_ONE - d);
    z.extend(wp.iter().map(|w| -CX_I * *w * d));
    z
}

/// Ball point with Siegel coordinates `(w_1, w')` in the frame where `ζ = e_1`.
///
/// Its horofunction at `ζ` is `-log(Im w_1 - |w'|^2)`.
pub(crate) fn siegel_to_ball(zeta: &BoundaryPoint, w1: Cx, wp: &[Cx]) -> Vec<Cx> {
    let frame_inv = unitary_to_e1(zeta.coords()).adjoint();
    frame_inv.mul_vec(&cayley_inv(w1, wp))
}

/// Heisenberg translation by `(c, x)` followed by the dilation by `1/height`.
struct Siegel {
    shift_c: Vec<Cx>,
    shift_x: numeric::Real,
    height: numeric::Real,
}

impl Siegel {
    fn heisenberg(&self, w1: Cx, wp: Vec<Cx>) -> (Cx, Vec<Cx>) {
        let wc = inner(&wp, &self.shift_c);
        let cc = norm_sqr(&self.shift_c);
        let w1n = w1 + cx_real(self.shift_x) + Cx::new(dd(0.0), dd(2.0)) * wc + CX_I * cx_real(cc);
        let wpn = wp.iter().zip(&self.shift_c).map(|(w, c)| *w + *c).collect();
        (w1n, wpn)
    }

    fn dilate(&self, w1: Cx, wp: Vec<Cx>) -> (Cx, Vec<Cx>) {
        let r = self.height;
        let sr = r.sqrt();
        (
            scale(w1, ONE / r),
            wp.into_iter().map(|w| scale(w, ONE / sr)).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::metric::{geodesic_point, horofunction, kob_dist};
    use num_complex::Complex64;

    fn p(c: &[f64]) -> BallPoint {
        BallPoint::from_real(c).unwrap()
    }

    #[test]
    fn involution_exchanges_center_and_origin() {
        let a =
            BallPoint::from_c64(&[Complex64::new(0.3, -0.2), Complex64::new(0.1, 0.4)]).unwrap();
        let g = Automorphism::mobius_involution(&a);
        assert!(g.apply(&a).unwrap().norm() < 1e-30);
        assert!(g.apply(&BallPoint::origin(2)).unwrap().dist_euclid(&a) < 1e-30);
        let z = p(&[0.2, -0.6]);
        let back = g.apply(&g.apply(&z).unwrap()).unwrap();
        assert!(back.dist_euclid(&z) < 1e-28);
    }

    #[test]
    fn involution_at_origin_is_identity() {
        let g = Automorphism::mobius_involution(&BallPoint::origin(2));
        let z = p(&[0.2, -0.6]);
        assert_eq!(g.apply(&z).unwrap(), z);
    }

    #[test]
    fn disc_hyperbolic_matches_closed_form() {
        // ζ = -1, λ = 3 gives z ↦ (z + 1/2)/(1 + z/2)
        let g = Automorphism::hyperbolic(&BoundaryPoint::from_real(&[-1.0]).unwrap(), 3.0).unwrap();
        for x in [-0.7, -0.1, 0.0, 0.4, 0.9] {
            let img = g.apply(&p(&[x])).unwrap().to_c64()[0];
            let expect = (x + 0.5) / (1.0 + 0.5 * x);
            assert!((img.re - expect).abs() < 1e-15 && img.im.abs() < 1e-15);
        }
    }

    #[test]
    fn hyperbolic_translates_axis_and_reports_dilation() {
        let zeta = BoundaryPoint::e1(2);
        let g = Automorphism::hyperbolic(&zeta, 3.0).unwrap();
        let d = kob_dist(
            &BallPoint::origin(2),
            &g.apply(&BallPoint::origin(2)).unwrap(),
        )
        .unwrap();
        assert!((d - 3f64.ln()).abs() < 1e-14);
        assert!((g.dilation_at(&zeta).unwrap() - 3.0).abs() < 1e-12);
        assert!((g.dilation_at(&zeta.neg()).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(g.unitary().unitarity_defect() < 1e-12);
    }

    #[test]
    fn near_identity_hyperbolic() {
        let zeta = BoundaryPoint::e1(2);
        let g = Automorphism::hyperbolic(&zeta, 1.0 + 1e-12).unwrap();
        let z = p(&[0.3, 0.4]);
        assert!(g.apply(&z).unwrap().dist_euclid(&z) < 1e-11);
        assert!(Automorphism::hyperbolic(&zeta, 1.0).is_err());
    }

    #[test]
    fn composition_and_inverse() {
        let zeta = BoundaryPoint::e1(2);
        let g = Automorphism::hyperbolic(&zeta, 2.5).unwrap();
        let a =
            BallPoint::from_c64(&[Complex64::new(0.1, 0.2), Complex64::new(-0.3, 0.1)]).unwrap();
        let h = Automorphism::mobius_involution(&a);
        let gh = g.compose(&h).unwrap();
        let z = p(&[0.25, -0.5]);
        let direct = g.apply(&h.apply(&z).unwrap()).unwrap();
        assert!(gh.apply(&z).unwrap().dist_euclid(&direct) < 1e-28);
        assert!(gh.unitary().unitarity_defect() < 1e-28);
        let round = gh.inverse().apply(&gh.apply(&z).unwrap()).unwrap();
        assert!(round.dist_euclid(&z) < 1e-28);
    }

    #[test]
    fn normalizing_at_origin_is_identity_with_unit_dilation() {
        let zeta = BoundaryPoint::e1(2);
        let (g, mu) = Automorphism::normalizing(&BallPoint::origin(2), &zeta).unwrap();
        assert!((mu - 1.0).abs() < 1e-15);
        let z = p(&[0.3, -0.2]);
        assert!(g.apply(&z).unwrap().dist_euclid(&z) < 1e-28);
    }

    #[test]
    fn normalizing_on_axis_is_axial() {
        let zeta = BoundaryPoint::e1(2);
        let s = 1.7;
        let a = geodesic_point(&zeta, s).unwrap();
        let (g, mu) = Automorphism::normalizing(&a, &zeta).unwrap();
        assert!((mu - s.exp()).abs() < 1e-12 * mu);
        let h = Automorphism::hyperbolic(&zeta, s.exp()).unwrap();
        let z = p(&[0.1, 0.35]);
        assert!(g.apply(&z).unwrap().dist_euclid(&h.apply(&z).unwrap()) < 1e-14);
    }

    #[test]
    fn normalizing_fixes_zeta_and_shifts_horofunction() {
        let zeta =
            BoundaryPoint::from_c64(&[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap();
        let a =
            BallPoint::from_c64(&[Complex64::new(0.2, 0.3), Complex64::new(-0.1, 0.4)]).unwrap();
        let (g, mu) = Automorphism::normalizing(&a, &zeta).unwrap();
        assert!(g.apply(&a).unwrap().norm() < 1e-28);
        let img = g.apply_boundary(&zeta).unwrap();
        assert!(numeric::dist_euclid(img.coords(), zeta.coords()) < 1e-26);
        let ha = horofunction(&a, &zeta).unwrap();
        assert!((mu.ln() + ha).abs() < 1e-12);
        assert!((g.dilation_at(&zeta).unwrap() - mu).abs() < 1e-12 * mu);
        let z = p(&[-0.3, 0.2]);
        let shift =
            horofunction(&g.apply(&z).unwrap(), &zeta).unwrap() - horofunction(&z, &zeta).unwrap();
        assert!((shift - mu.ln()).abs() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let a =
            BallPoint::from_c64(&[Complex64::new(0.3, -0.2), Complex64::new(0.1, 0.4)]).unwrap();
        let g = Automorphism::mobius_involution(&a)
            .compose(&Automorphism::hyperbolic(&BoundaryPoint::e1(2), 2.0).unwrap())
            .unwrap();
        let z = vec![numeric::cx(0.1, 0.05), numeric::cx(-0.2, 0.3)];
        let j = g.jacobian_raw(&z);
        let h = 1e-7;
        for col in 0..2 {
            let mut zp = z.clone();
            zp[col] = zp[col] + numeric::cx(h, 0.0);
            let mut zm = z.clone();
            zm[col] = zm[col] - numeric::cx(h, 0.0);
            let fp = g.apply_raw(&zp);
            let fm = g.apply_raw(&zm);
            for row in 0..2 {
                let fd = numeric::cx_to_f64((fp[row] - fm[row]) / numeric::cx(2.0 * h, 0.0));
                let an = numeric::cx_to_f64(j.get(row, col));
                assert!((fd - an).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn parabolic_preserves_horofunction() {
        let zeta =
            BoundaryPoint::from_c64(&[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap();
        let g = Automorphism::parabolic(&zeta, &[numeric::cx(0.3, -0.2)], 0.7).unwrap();
        for z in [p(&[0.1, 0.2]), p(&[-0.5, 0.3]), p(&[0.0, 0.0])] {
            let a = horofunction(&z, &zeta).unwrap();
            let b = horofunction(&g.apply(&z).unwrap(), &zeta).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        assert!((g.dilation_at(&zeta).unwrap() - 1.0).abs() < 1e-12);
        let z = p(&[0.25, -0.4]);
        let round = g.inverse().apply(&g.apply(&z).unwrap()).unwrap();
        assert!(round.dist_euclid(&z) < 1e-28);
    }
}
