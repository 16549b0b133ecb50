//! Backward orbits by solving `f(w) = z` step by step.
//!
//! This is the independent reference the harvested orbits are compared with.

use crate::catalog::SelfMap;
use crate::error::{check_dim, Error, Result};
use crate::geometry::metric::{horofunction_raw, kob_dist_raw};
use crate::geometry::sampling::{seeded, unit_direction};
use crate::geometry::{Automorphism, BallPoint, BoundaryPoint};
use crate::numeric::{self, cx_real, dd, to_f64, Cx};
use crate::orbit::OrbitSegment;
use crate::solve::newton_in_ball;

#[derive(Debug, Clone, PartialEq)]
pub struct PreimageParams {
    pub max_iter: usize,
    /// Accepted `|f(w) - z|`.
    pub residual_tol: f64,
    /// Accepted `k(f(w), z)`.
    pub kobayashi_tol: f64,
    /// Two distinct preimages whose scores differ by less than this make the branch ambiguous.
    pub rho_branch: f64,
}

impl Default for PreimageParams {
    fn default() -> Self {
        Self {
            max_iter: 80,
            residual_tol: 1e-12,
            kobayashi_tol: 1e-9,
            rho_branch: 1e-3,
        }
    }
}

const GRID_RADII: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 8.0];
const GRID_DIRECTIONS: usize = 12;
const GRID_NEWTON_STARTS: usize = 3;
const DISTINCT_ROOTS: f64 = 1e-6;

fn try_newton(
    f: &SelfMap,
    target: &BallPoint,
    seed: &[Cx],
    p: &PreimageParams,
) -> Option<BallPoint> {
    let t = target.coords();
    let out = newton_in_ball(
        |z| numeric::sub(&f.eval_raw(z), t),
        |z| f.jacobian_raw(z),
        seed,
        p.max_iter,
    );
    let w = BallPoint::new(out.z).ok()?;
    let image = f.eval_raw(w.coords());
    let ok = out.residual < p.residual_tol
        && numeric::to_f64(numeric::defect(&image)) > 0.0
        && kob_dist_raw(&image, t) < p.kobayashi_tol;
    ok.then_some(w)
}

/// Seeds on Kobayashi spheres around `center`.
fn grid_seeds(center: &BallPoint) -> Vec<BallPoint> {
    let q = center.dim();
    let phi = Automorphism::mobius_involution(center);
    let mut rng = seeded(0x9e37_79b9);
    let mut dirs: Vec<Vec<Cx>> = Vec::new();
    if q == 1 {
        for i in 0..GRID_DIRECTIONS {
            let a = std::f64::consts::TAU * i as f64 / GRID_DIRECTIONS as f64;
            dirs.push(vec![numeric::cx(a.cos(), a.sin())]);
        }
    } else {
        for _ in 0..GRID_DIRECTIONS {
            dirs.push(unit_direction(&mut rng, q));
        }
    }
    let mut out = vec![center.clone()];
    for r in GRID_RADII {
        let t = dd((r / 2.0).tanh());
        for d in &dirs {
            let p: Vec<Cx> = d.iter().map(|c| *c * cx_real(t)).collect();
            if let Ok(p) = BallPoint::new(p) {
                if let Ok(w) = phi.apply(&p) {
                    out.push(w);
                }
            }
        }
    }
    out
}

/// Solves `f(w) = target` by damped Newton from `seed`; if that fails, Newton is
/// restarted from the best few points of a Kobayashi grid around `seed`.
pub fn newton_preimage(
    f: &SelfMap,
    target: &BallPoint,
    seed: &BallPoint,
    params: &PreimageParams,
) -> Result<BallPoint> {
    check_dim(f.dim(), target.dim())?;
    check_dim(f.dim(), seed.dim())?;
    if let Some(w) = try_newton(f, target, seed.coords(), params) {
        return Ok(w);
    }
    let mut grid: Vec<(f64, BallPoint)> = grid_seeds(seed)
        .into_iter()
        .map(|c| (kob_dist_raw(&f.eval_raw(c.coords()), target.coords()), c))
        .filter(|(d, _)| d.is_finite())
        .collect();
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, c) in grid.iter().take(GRID_NEWTON_STARTS) {
        if let Some(w) = try_newton(f, target, c.coords(), params) {
            return Ok(w);
        }
    }
    Err(Error::Numerical(format!(
        "no preimage of the target under {} found near the seed",
        f.label()
    )))
}

/// Backward orbit `y_0 = z0`, `f(y_{n+1}) = y_n`, choosing at each step the
/// preimage that minimizes `k(y_n, w) + h(w, ζ)`.
///
/// Seeds are the current point pushed toward `ζ` by `log λ` along the axial
/// flow, and the current point itself.
pub fn backward_orbit_via_preimages(
    f: &SelfMap,
    z0: &BallPoint,
    zeta: &BoundaryPoint,
    lambda: f64,
    steps: usize,
    params: &PreimageParams,
) -> Result<OrbitSegment> {
    check_dim(f.dim(), zeta.dim())?;
    check_dim(f.dim(), z0.dim())?;
    if !(lambda > 1.0) {
        return Err(Error::Domain(format!(
            "dilation must exceed 1, got {lambda}"
        )));
    }
    let push = Automorphism::axial_translation(zeta, lambda.ln())?;
    let mut points = vec![z0.clone()];
    for n in 0..steps {
        let y = points.last().expect("non-empty").clone();
        let seeds = [push.apply(&y)?, y.clone()];
        let mut roots: Vec<BallPoint> = Vec::new();
        for s in &seeds {
            if let Some(w) = try_newton(f, &y, s.coords(), params) {
                if roots
                    .iter()
                    .all(|r| kob_dist_raw(r.coords(), w.coords()) > DISTINCT_ROOTS)
                {
                    roots.push(w);
                }
            }
        }
        if roots.is_empty() {
            roots.push(newton_preimage(f, &y, &seeds[0], params)?);
        }
        let mut scored: Vec<(f64, BallPoint)> = roots
            .into_iter()
            .map(|w| {
                let s = kob_dist_raw(y.coords(), w.coords())
                    + horofunction_raw(w.coords(), zeta.coords());
                (s, w)
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        if scored.len() > 1 && scored[1].0 - scored[0].0 < params.rho_branch {
            return Err(Error::Construction(format!(
                "ambiguous branch at step {n}: preimage scores {} and {}",
                numeric::fmt15(scored[0].0),
                numeric::fmt15(scored[1].0)
            )));
        }
        points.push(scored.swap_remove(0).1);
    }
    OrbitSegment::new(points, zeta.clone(), Some(lambda), f.label())
}

/// The point at Kobayashi distance `radius` from `x` in the direction `v` (taken at the origin).
pub fn kobayashi_offset(x: &BallPoint, v: &[Cx], radius: f64) -> Result<BallPoint> {
    check_dim(x.dim(), v.len())?;
    let n = numeric::norm(v);
    if to_f64(n) == 0.0 {
        return Err(Error::Domain("offset direction is zero".into()));
    }
    let t = dd((radius / 2.0).tanh()) / n;
    let p = BallPoint::new(v.iter().map(|c| *c * cx_real(t)).collect())?;
    Automorphism::mobius_involution(x).apply(&p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::kob_dist;
    use crate::numeric::{cx, CX_ONE, CX_ZERO};

    fn cube() -> SelfMap {
        SelfMap::blaschke(vec![CX_ZERO; 3], CX_ONE).unwrap()
    }

    #[test]
    fn preimage_of_cube() {
        let f = cube();
        let target = BallPoint::from_c64(&[num_complex::Complex64::new(-0.5, 0.1)]).unwrap();
        let seed = BallPoint::from_real(&[-0.8]).unwrap();
        let w = newton_preimage(&f, &target, &seed, &PreimageParams::default()).unwrap();
        assert!(numeric::dist_euclid(&f.eval_raw(w.coords()), target.coords()) < 1e-25);
        assert!(to_f64(w.coords()[0].re) < 0.0);
    }

    #[test]
    fn automorphism_preimage_is_the_inverse() {
        let g =
            Automorphism::hyperbolic(&BoundaryPoint::from_real(&[0.6, 0.8]).unwrap(), 2.5).unwrap();
        let f = SelfMap::automorphism(g.clone());
        let target = BallPoint::from_real(&[0.1, -0.4]).unwrap();
        let w = newton_preimage(
            &f,
            &target,
            &BallPoint::origin(2),
            &PreimageParams::default(),
        )
        .unwrap();
        assert!(w.dist_euclid(&g.inverse().apply(&target).unwrap()) < 1e-10);
    }

    #[test]
    fn both_blaschke_preimages() {
        // z(z - 1/3)/(1 - z/3) = w  <=>  z^2 + (w/3 - 1/3) z - w = 0
        let third = cx_real(dd(1.0) / dd(3.0));
        let b = SelfMap::blaschke(vec![CX_ZERO, third], CX_ONE).unwrap();
        let w = num_complex::Complex64::new(0.2, 0.1);
        let p = w / 3.0 - 1.0 / 3.0;
        let disc = (p * p + 4.0 * w).sqrt();
        let roots = [(-p + disc) / 2.0, (-p - disc) / 2.0];
        let target = BallPoint::from_c64(&[w]).unwrap();
        for r in roots {
            let seed = BallPoint::from_c64(&[r * 0.9]).unwrap();
            let z = newton_preimage(&b, &target, &seed, &PreimageParams::default()).unwrap();
            assert!((z.to_c64()[0] - r).norm() < 1e-12);
            assert!(numeric::dist_euclid(&b.eval_raw(z.coords()), target.coords()) < 1e-12);
        }
    }

    #[test]
    fn fixed_point_is_its_own_preimage() {
        let b = SelfMap::blaschke(vec![CX_ZERO, cx_real(dd(0.5))], CX_ONE).unwrap();
        let z = newton_preimage(
            &b,
            &BallPoint::origin(1),
            &BallPoint::origin(1),
            &PreimageParams::default(),
        )
        .unwrap();
        assert_eq!(z, BallPoint::origin(1));
    }

    #[test]
    fn blaschke_orbit_from_near_one() {
        let b = SelfMap::blaschke(vec![CX_ZERO, cx_real(dd(1.0) / dd(3.0))], CX_ONE).unwrap();
        let zeta = BoundaryPoint::e1(1);
        let z0 = BallPoint::from_real(&[0.9]).unwrap();
        let o = backward_orbit_via_preimages(&b, &z0, &zeta, 3.0, 30, &PreimageParams::default())
            .unwrap();
        assert!(o.backward_residual(&b) < 1e-10);
        assert!((o.steps().last().unwrap() - 3f64.ln()).abs() < 1e-3);
        assert!(*o.dists_to_zeta().last().unwrap() < 1e-10);
    }

    #[test]
    fn grid_fallback_recovers_from_a_bad_seed() {
        let f = cube();
        let target = BallPoint::from_real(&[0.3]).unwrap();
        // z^3 has a critical point at 0, so Newton started there cannot move
        let seed = BallPoint::origin(1);
        let w = newton_preimage(&f, &target, &seed, &PreimageParams::default()).unwrap();
        assert!(kob_dist(&f.apply(&w).unwrap(), &target).unwrap() < 1e-9);
    }

    #[test]
    fn cube_orbit_converges_to_minus_one() {
        let f = cube();
        let zeta = BoundaryPoint::from_real(&[-1.0]).unwrap();
        let z0 = BallPoint::from_c64(&[num_complex::Complex64::new(-0.2, 0.05)]).unwrap();
        let o = backward_orbit_via_preimages(&f, &z0, &zeta, 3.0, 30, &PreimageParams::default())
            .unwrap();
        assert!(o.backward_residual(&f) < 1e-20);
        assert!(*o.dists_to_zeta().last().unwrap() < 1e-10);
        let steps = o.steps();
        // off the axis the step settles above log λ, at a value fixed by the approach angle
        let n = steps.len();
        assert!((steps[n - 1] - steps[n - 2]).abs() < 1e-9);
        assert!(steps[n - 1] >= 3f64.ln());
        let radial = BallPoint::from_real(&[-0.2]).unwrap();
        let o =
            backward_orbit_via_preimages(&f, &radial, &zeta, 3.0, 30, &PreimageParams::default())
                .unwrap();
        assert!((o.steps().last().unwrap() - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn offset_has_the_requested_distance() {
        let x = BallPoint::from_real(&[0.9, 0.1]).unwrap();
        let y = kobayashi_offset(&x, &[cx(0.0, 1.0), cx(0.3, 0.0)], 0.05).unwrap();
        assert!((kob_dist(&x, &y).unwrap() - 0.05).abs() < 1e-13);
    }
}
