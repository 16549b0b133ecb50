use crate::catalog::SelfMap;
use crate::error::{check_dim, Error, Result};
use crate::geometry::sampling::{mixed_cloud, seeded, uniform_in_radius};
use crate::geometry::{axis_point, Automorphism, BallPoint, BoundaryPoint};
use crate::numeric::{self, cx_real, dd, defect, norm, to_f64, Cx, CX_I, CX_ZERO, ONE};

/// Outcome of sampling `1 - |f(z)|` over a cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfMapCheck {
    pub passed: bool,
    pub samples: usize,
    /// Smallest `1 - |f(z)|` seen; negative when a sample left the ball.
    pub worst_margin: f64,
    pub witness: Option<BallPoint>,
}

/// Samples `n` points (uniform in radius plus a near-sphere shell) and checks `|f(z)| < 1`.
pub fn self_map_check(f: &SelfMap, n: usize, seed: u64) -> Result<SelfMapCheck> {
    if n == 0 {
        return Err(Error::Config(
            "self-map check needs at least one sample".into(),
        ));
    }
    let mut rng = seeded(seed);
    let cloud = mixed_cloud(&mut rng, f.dim(), n);
    let mut worst = f64::INFINITY;
    let mut witness = None;
    let mut worst_point = None;
    for z in cloud {
        let w = f.eval_raw(z.coords());
        let d = defect(&w);
        let margin = to_f64(d / (ONE + norm(&w)));
        if (!margin.is_finite() || margin <= 0.0) && witness.is_none() {
            witness = Some(z.clone());
        }
        let m = if margin.is_finite() {
            margin
        } else {
            f64::NEG_INFINITY
        };
        if m < worst {
            worst = m;
            worst_point = Some(z);
        }
    }
    let passed = witness.is_none();
    Ok(SelfMapCheck {
        passed,
        samples: n,
        worst_margin: worst,
        witness: if passed {
            None
        } else {
            witness.or(worst_point)
        },
    })
}

/// Depths along which the Korányi probes approach the boundary.
pub const PROBE_DEPTHS: [f64; 5] = [5.0, 10.0, 20.0, 30.0, 40.0];

const PROBE_OFFSET: f64 = 0.3;

/// Three approach sequences to `ζ` inside `K(ζ, 2)`: the radius and two
/// sequences `T_s(p)` where `T_s` is the axial translation by `s` and `p` is a
/// fixed offset of modulus 0.3 (along `iζ`, and orthogonal to `ζ` when `q > 1`).
pub fn koranyi_probes(zeta: &BoundaryPoint, depths: &[f64]) -> Result<Vec<Vec<BallPoint>>> {
    let q = zeta.dim();
    let off = cx_real(dd(PROBE_OFFSET));
    let p1: Vec<Cx> = zeta.coords().iter().map(|c| *c * CX_I * off).collect();
    let p2: Vec<Cx> = if q > 1 {
        orthogonal_unit(zeta).into_iter().map(|c| c * off).collect()
    } else {
        zeta.coords().iter().map(|c| -*c * CX_I * off).collect()
    };
    let p1 = BallPoint::new(p1)?;
    let p2 = BallPoint::new(p2)?;
    let mut radial = Vec::new();
    let mut first = Vec::new();
    let mut second = Vec::new();
    for &s in depths {
        radial.push(axis_point(zeta, s)?);
        let t = Automorphism::axial_translation(zeta, s)?;
        first.push(t.apply(&p1)?);
        second.push(t.apply(&p2)?);
    }
    Ok(vec![radial, first, second])
}

/// Unit vector orthogonal to `ζ` (requires `q ≥ 2`).
fn orthogonal_unit(zeta: &BoundaryPoint) -> Vec<Cx> {
    let c = zeta.coords();
    let q = c.len();
    // pick the basis vector least aligned with ζ and Gram-Schmidt it
    let j = (0..q)
        .min_by(|&a, &b| {
            to_f64(c[a].norm_sqr())
                .partial_cmp(&to_f64(c[b].norm_sqr()))
                .expect("finite")
        })
        .expect("q >= 2");
    let mut v = vec![CX_ZERO; q];
    v[j] = numeric::CX_ONE;
    let proj = numeric::inner(&v, c);
    let v: Vec<Cx> = v.iter().zip(c).map(|(a, b)| *a - *b * proj).collect();
    let n = norm(&v);
    v.into_iter().map(|x| numeric::scale(x, ONE / n)).collect()
}

/// Residuals `|f(z_i) - ζ|` along the Korányi probe sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFixedReport {
    pub fixed: bool,
    pub depths: Vec<f64>,
    pub residuals: Vec<Vec<f64>>,
}

/// Tests whether `f` has K-limit `ζ` at `ζ` by following three Korányi probe sequences.
pub fn is_boundary_fixed(
    f: &SelfMap,
    zeta: &BoundaryPoint,
    tol: f64,
) -> Result<BoundaryFixedReport> {
    check_dim(f.dim(), zeta.dim())?;
    let probes = koranyi_probes(zeta, &PROBE_DEPTHS)?;
    let residuals: Vec<Vec<f64>> = probes
        .iter()
        .map(|seq| {
            seq.iter()
                .map(|z| numeric::dist_euclid(&f.eval_raw(z.coords()), zeta.coords()))
                .collect()
        })
        .collect();
    let fixed = residuals.iter().all(|r| {
        let last = *r.last().expect("non-empty probe");
        last < tol && last <= r[0]
    });
    Ok(BoundaryFixedReport {
        fixed,
        depths: PROBE_DEPTHS.to_vec(),
        residuals,
    })
}

/// Largest relative discrepancy between the analytic Jacobian and central
/// differences along `e_j` and `i e_j`, over `n` samples with `|z| < 0.9`.
pub fn jacobian_consistency(f: &SelfMap, n: usize, seed: u64) -> Result<f64> {
    let q = f.dim();
    let mut rng = seeded(seed);
    let h = dd(1e-7);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let z = uniform_in_radius(&mut rng, q, 0.9);
        let jac = f.jacobian(&z)?;
        for j in 0..q {
            for dir in [numeric::CX_ONE, CX_I] {
                let step = dir * cx_real(h);
                let mut zp = z.coords().to_vec();
                let mut zm = z.coords().to_vec();
                zp[j] = zp[j] + step;
                zm[j] = zm[j] - step;
                let fp = f.eval_raw(&zp);
                let fm = f.eval_raw(&zm);
                for i in 0..q {
                    let fd = (fp[i] - fm[i]) / (cx_real(dd(2.0)) * step);
                    let an = jac.get(i, j);
                    let diff = to_f64((fd - an).norm_sqr().sqrt());
                    let scale = 1.0 + to_f64(an.norm_sqr().sqrt());
                    worst = worst.max(diff / scale);
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::regions::koranyi_functional;
    use crate::numeric::{cx, CX_ONE};

    fn blaschke() -> SelfMap {
        SelfMap::blaschke(vec![CX_ZERO, cx_real(dd(1.0) / dd(3.0))], CX_ONE).unwrap()
    }

    #[test]
    fn automorphisms_and_blaschke_pass_self_map_check() {
        let g = Automorphism::hyperbolic(&BoundaryPoint::e1(2), 2.0).unwrap();
        let r = self_map_check(&SelfMap::automorphism(g), 2000, 1).unwrap();
        assert!(r.passed);
        let r = self_map_check(&blaschke(), 10_000, 2).unwrap();
        assert!(r.passed && r.worst_margin > 0.0);
    }

    #[test]
    fn expanding_linear_map_fails_with_witness() {
        let f = SelfMap::linear_unchecked(cx(1.01, 0.0), 1);
        let r = self_map_check(&f, 500, 3).unwrap();
        assert!(!r.passed);
        let w = r.witness.unwrap();
        assert!(w.norm() * 1.01 >= 1.0);
        assert!(self_map_check(&f, 0, 3).is_err());
    }

    #[test]
    fn probes_stay_in_koranyi_region_of_amplitude_two() {
        let zeta = BoundaryPoint::from_c64(&[
            num_complex::Complex64::new(0.6, 0.0),
            num_complex::Complex64::new(0.0, 0.8),
        ])
        .unwrap();
        for seq in koranyi_probes(&zeta, &PROBE_DEPTHS).unwrap() {
            for z in seq {
                assert!(koranyi_functional(&z, &zeta).unwrap() < 2.0 * 2f64.ln());
            }
        }
    }

    #[test]
    fn boundary_fixed_examples() {
        let one = BoundaryPoint::e1(1);
        assert!(is_boundary_fixed(&blaschke(), &one, 1e-6).unwrap().fixed);
        assert!(
            !is_boundary_fixed(&blaschke(), &one.neg(), 1e-6)
                .unwrap()
                .fixed
        );
        let id = SelfMap::identity(2).unwrap();
        let z = BoundaryPoint::from_real(&[0.0, 1.0]).unwrap();
        assert!(is_boundary_fixed(&id, &z, 1e-6).unwrap().fixed);
    }

    #[test]
    fn analytic_jacobians_match_differences() {
        let b = blaschke();
        assert!(jacobian_consistency(&b, 50, 4).unwrap() < 1e-6);
        let g = Automorphism::normalizing(
            &BallPoint::from_real(&[0.2, -0.3]).unwrap(),
            &BoundaryPoint::e1(2),
        )
        .unwrap()
        .0;
        let w = SelfMap::warped_product(b, cx(0.5, 0.0), 2).unwrap();
        let c = SelfMap::conjugate(w, g).unwrap();
        assert!(jacobian_consistency(&c, 50, 5).unwrap() < 1e-6);
    }
}
