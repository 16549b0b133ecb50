use std::fmt;

use crate::catalog::dilation::estimate_dilation;
use crate::catalog::SelfMap;
use crate::error::{check_dim, Error, Result};
use crate::geometry::metric::{horofunction_raw, kob_dist_raw};
use crate::geometry::sampling::{in_kobayashi_ball, seeded};
use crate::geometry::{Automorphism, BallPoint, BoundaryPoint};
use crate::numeric::{self, to_f64, CX_ONE};
use crate::solve::newton_in_ball;

const CLOUD_SIZE: usize = 16;
const CLOUD_RADIUS: f64 = 3.0;
const CLOUD_SEED: u64 = 0x5eed;
const MAX_FORWARD_STEPS: usize = 5_000;
const INTERIOR_SPREAD: f64 = 1e-9;
const BOUNDARY_DEFECT: f64 = 1e-8;
const BOUNDARY_SPREAD: f64 = 1e-3;

/// Minimum horofunction of the transported witness set after clearance.
pub const CLEARANCE_MARGIN: f64 = 0.1;
const CLEARANCE_FIRST_T: f64 = 0.25;
const CLEARANCE_DOUBLINGS: usize = 20;
const DILATION_DRIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsKind {
    InteriorFixedPoint,
    DenjoyWolffBoundary,
}

impl fmt::Display for DynamicsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DynamicsKind::InteriorFixedPoint => "interior-fixed-point",
            DynamicsKind::DenjoyWolffBoundary => "denjoy-wolff-boundary",
        })
    }
}

/// Forward-dynamics classification with its witness.
///
/// `cloud` is the forward image of a seeded sample cloud and stands in for the
/// limit set of the forward dynamics.
#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsClass {
    Interior {
        fixed_point: BallPoint,
        cloud: Vec<BallPoint>,
        iterations: usize,
    },
    DenjoyWolff {
        point: BoundaryPoint,
        cloud: Vec<BallPoint>,
        iterations: usize,
    },
}

impl DynamicsClass {
    pub fn kind(&self) -> DynamicsKind {
        match self {
            DynamicsClass::Interior { .. } => DynamicsKind::InteriorFixedPoint,
            DynamicsClass::DenjoyWolff { .. } => DynamicsKind::DenjoyWolffBoundary,
        }
    }

    pub fn cloud(&self) -> &[BallPoint] {
        match self {
            DynamicsClass::Interior { cloud, .. } | DynamicsClass::DenjoyWolff { cloud, .. } => {
                cloud
            }
        }
    }

    /// Witness points whose transport must clear the closed horoball `Ē_0`.
    fn witness_set(&self) -> Vec<BallPoint> {
        let mut w = self.cloud().to_vec();
        if let DynamicsClass::Interior { fixed_point, .. } = self {
            w.push(fixed_point.clone());
        }
        w
    }
}

/// Iterates a seeded cloud forward until it collapses onto an interior point or
/// onto a single boundary point; otherwise searches for an interior fixed point
/// by Newton's method (this covers elliptic maps, whose cloud never collapses).
pub fn classify_dynamics(f: &SelfMap) -> Result<DynamicsClass> {
    let q = f.dim();
    let mut rng = seeded(CLOUD_SEED);
    let mut cloud: Vec<Vec<_>> = (0..CLOUD_SIZE)
        .map(|_| in_kobayashi_ball(&mut rng, q, CLOUD_RADIUS).into_coords())
        .collect();
    for step in 1..=MAX_FORWARD_STEPS {
        for z in cloud.iter_mut() {
            *z = f.eval_raw(z);
        }
        let defects: Vec<f64> = cloud.iter().map(|z| to_f64(numeric::defect(z))).collect();
        if defects.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Invariant(format!(
                "{} pushed the cloud out of the ball",
                f.label()
            )));
        }
        if defects.iter().all(|d| *d < BOUNDARY_DEFECT) {
            let spread = cloud
                .iter()
                .map(|z| numeric::dist_euclid(z, &cloud[0]))
                .fold(0.0, f64::max);
            if spread < BOUNDARY_SPREAD {
                let n = numeric::norm(&cloud[0]);
                let unit = cloud[0]
                    .iter()
                    .map(|c| numeric::scale(*c, numeric::ONE / n))
                    .collect();
                let point = BoundaryPoint::new(unit)
                    .map_err(|e| Error::Numerical(format!("boundary witness: {e}")))?;
                return Ok(DynamicsClass::DenjoyWolff {
                    point,
                    cloud: to_points(cloud)?,
                    iterations: step,
                });
            }
        }
        if defects.iter().all(|d| *d > 1e-6) {
            let spread = cloud
                .iter()
                .map(|z| kob_dist_raw(z, &cloud[0]))
                .fold(0.0, f64::max);
            if spread < INTERIOR_SPREAD {
                let fixed_point = polish_fixed_point(f, &cloud[0])
                    .unwrap_or_else(|| BallPoint::new(cloud[0].clone()).expect("inside"));
                return Ok(DynamicsClass::Interior {
                    fixed_point,
                    cloud: to_points(cloud)?,
                    iterations: step,
                });
            }
        }
    }
    let seeds = std::iter::once(vec![numeric::CX_ZERO; q]).chain(cloud.iter().cloned());
    for seed in seeds {
        if let Some(p) = polish_fixed_point(f, &seed) {
            return Ok(DynamicsClass::Interior {
                fixed_point: p,
                cloud: to_points(cloud)?,
                iterations: MAX_FORWARD_STEPS,
            });
        }
    }
    Err(Error::Numerical(format!(
        "forward dynamics of {} undecided after {MAX_FORWARD_STEPS} steps",
        f.label()
    )))
}

fn to_points(cloud: Vec<Vec<numeric::Cx>>) -> Result<Vec<BallPoint>> {
    cloud.into_iter().map(BallPoint::new).collect()
}

/// Newton on `f(z) - z`; accepts only well-inside fixed points with tiny residual.
fn polish_fixed_point(f: &SelfMap, seed: &[numeric::Cx]) -> Option<BallPoint> {
    let q = f.dim();
    let out = newton_in_ball(
        |z| numeric::sub(&f.eval_raw(z), z),
        |z| {
            let mut j = f.jacobian_raw(z);
            for i in 0..q {
                j.set(i, i, j.get(i, i) - CX_ONE);
            }
            j
        },
        seed,
        60,
    );
    let inside = to_f64(numeric::defect(&out.z)) > 1e-6;
    (inside && out.residual < 1e-20).then(|| BallPoint::new(out.z).expect("inside"))
}

/// Result of conjugating `f` so that its forward limit set avoids `Ē_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleClearance {
    pub map: SelfMap,
    pub conjugator: Automorphism,
    /// Translation length `t` of the conjugator (its dilation at `ζ` is `e^t`).
    pub translation: f64,
    /// Minimum horofunction of the transported witness set.
    pub clearance: f64,
    pub dynamics: DynamicsClass,
    pub dilation_before: f64,
    pub dilation_after: f64,
}

/// Conjugates `f` by `h`, a hyperbolic automorphism fixing `±ζ`, so that the
/// witness set of the forward dynamics lies strictly outside `Ē_0`.
///
/// `t = 0` (no conjugation) is tried first, then `t = 0.25, 0.5, 1, ...` up to
/// twenty doublings. The dilation at `ζ` is re-estimated afterwards and must
/// agree within `1e-6`.
pub fn ensure_pole_clearance(f: &SelfMap, zeta: &BoundaryPoint) -> Result<PoleClearance> {
    check_dim(f.dim(), zeta.dim())?;
    let dilation_before = estimate_dilation(f, zeta)?.lambda;
    let dynamics = classify_dynamics(f)?;
    if let DynamicsClass::DenjoyWolff { point, .. } = &dynamics {
        if numeric::dist_euclid(point.coords(), zeta.coords()) < 1e-3 {
            return Err(Error::Domain(
                "ζ attracts the forward dynamics; it cannot be a repelling fixed point".into(),
            ));
        }
    }
    let witness = dynamics.witness_set();
    let mut t = 0.0;
    for attempt in 0..=CLEARANCE_DOUBLINGS + 1 {
        if attempt == 1 {
            t = CLEARANCE_FIRST_T;
        } else if attempt > 1 {
            t *= 2.0;
        }
        let h = if t == 0.0 {
            Automorphism::identity(f.dim())
        } else {
            let lambda = t.exp();
            if !lambda.is_finite() {
                break;
            }
            Automorphism::hyperbolic(zeta, lambda)?
        };
        let clearance = witness
            .iter()
            .map(|w| horofunction_raw(&h.apply_raw(w.coords()), zeta.coords()))
            .fold(f64::INFINITY, f64::min);
        if clearance > CLEARANCE_MARGIN {
            let map = if t == 0.0 {
                f.clone()
            } else {
                SelfMap::conjugate(f.clone(), h.clone())?
            };
            let dilation_after = estimate_dilation(&map, zeta)?.lambda;
            if (dilation_after - dilation_before).abs() > DILATION_DRIFT_TOL {
                return Err(Error::Numerical(format!(
                    "conjugation changed the dilation from {dilation_before} to {dilation_after}"
                )));
            }
            return Ok(PoleClearance {
                map,
                conjugator: h,
                translation: t,
                clearance,
                dynamics,
                dilation_before,
                dilation_after,
            });
        }
    }
    Err(Error::Numerical(format!(
        "pole clearance not achieved after {CLEARANCE_DOUBLINGS} doublings"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::horofunction;
    use crate::numeric::{cx, cx_real, dd, CX_ZERO};

    fn blaschke() -> SelfMap {
        SelfMap::blaschke(vec![CX_ZERO, cx_real(dd(1.0) / dd(3.0))], CX_ONE).unwrap()
    }

    #[test]
    fn blaschke_has_interior_fixed_point_zero() {
        let c = classify_dynamics(&blaschke()).unwrap();
        match c {
            DynamicsClass::Interior { fixed_point, .. } => assert!(fixed_point.norm() < 1e-20),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hyperbolic_automorphism_is_denjoy_wolff_at_the_attracting_end() {
        let zeta = BoundaryPoint::e1(2);
        let f = SelfMap::automorphism(Automorphism::hyperbolic(&zeta, 3.0).unwrap());
        let c = classify_dynamics(&f).unwrap();
        assert_eq!(c.kind(), DynamicsKind::DenjoyWolffBoundary);
        if let DynamicsClass::DenjoyWolff { point, .. } = c {
            assert!(numeric::dist_euclid(point.coords(), zeta.neg().coords()) < 1e-3);
        }
    }

    #[test]
    fn rotation_is_interior_with_witness_zero() {
        let rot = SelfMap::blaschke(vec![CX_ZERO], cx(0.6, 0.8)).unwrap();
        match classify_dynamics(&rot).unwrap() {
            DynamicsClass::Interior { fixed_point, .. } => assert!(fixed_point.norm() < 1e-20),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn blaschke_clearance_moves_fixed_point_to_negative_axis() {
        let zeta = BoundaryPoint::e1(1);
        let pc = ensure_pole_clearance(&blaschke(), &zeta).unwrap();
        assert_eq!(pc.translation, 0.25);
        let p = pc.conjugator.apply(&BallPoint::origin(1)).unwrap();
        let c = -to_f64(p.coords()[0].re);
        assert!(c > 0.0);
        let h = horofunction(&p, &zeta).unwrap();
        assert!((h - ((1.0 + c) / (1.0 - c)).ln()).abs() < 1e-12);
        assert!((pc.dilation_after - 3.0).abs() < 1e-4);
    }

    #[test]
    fn cleared_map_is_left_alone() {
        let tau = SelfMap::disc_hyperbolic(CX_ONE, 3.0).unwrap();
        let w = SelfMap::warped_product(tau, cx(0.5, 0.0), 2).unwrap();
        let pc = ensure_pole_clearance(&w, &BoundaryPoint::e1(2)).unwrap();
        assert_eq!(pc.translation, 0.0);
        assert_eq!(pc.map, w);
    }
}
