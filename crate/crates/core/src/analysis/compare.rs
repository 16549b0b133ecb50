use crate::catalog::SelfMap;
use crate::error::{check_dim, Error, Result};
use crate::geometry::metric::kob_dist_raw;
use crate::geometry::BallPoint;
use crate::numeric;
use crate::orbit::OrbitSegment;

/// Largest increase of the direct profile over its last quarter that still counts as a plateau.
pub const EPS_PLATEAU: f64 = 1e-2;
const ZETA_MATCH: f64 = 1e-9;
const PROFILE_TOL: f64 = 1e-12;

/// Prepends `x_{-n} = f^n(x_0)` for `n = 1..=forward`, so the orbit covers
/// indices `first_index - forward ..= last_index`.
pub fn extend_to_bilateral(
    orbit: &OrbitSegment,
    f: &SelfMap,
    forward: usize,
) -> Result<OrbitSegment> {
    check_dim(f.dim(), orbit.zeta().dim())?;
    let mut ahead = Vec::with_capacity(forward);
    let mut x = orbit.points()[0].clone();
    for _ in 0..forward {
        x = f.apply(&x)?;
        ahead.push(x.clone());
    }
    ahead.reverse();
    ahead.extend(orbit.points().iter().cloned());
    OrbitSegment::with_first_index(
        ahead,
        orbit.first_index() - forward as i64,
        orbit.zeta().clone(),
        orbit.lambda(),
        orbit.map_label(),
    )
}

/// Direct and shifted distance profiles of two backward orbits.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitComparison {
    /// Indices `n` of the common window.
    pub indices: Vec<i64>,
    /// `k(x_n, y_n)`.
    pub direct: Vec<f64>,
    /// `inf_m k(x_n, y_m)` over the bilateral extension of `η`.
    pub shifted: Vec<f64>,
    /// Largest increase of `direct` over the last quarter of the window.
    pub last_quarter_increase: f64,
    pub plateau: bool,
    /// Bound on the direct profile over the window.
    pub c_direct: f64,
    /// Bound on the shifted profile over the window.
    pub c_shifted: f64,
    /// `shifted ≤ direct` pointwise.
    pub shifted_below_direct: bool,
    /// `shifted` non-decreasing.
    pub shifted_monotone: bool,
}

fn same_target(xi: &OrbitSegment, eta: &OrbitSegment) -> Result<()> {
    check_dim(xi.zeta().dim(), eta.zeta().dim())?;
    let d = numeric::dist_euclid(xi.zeta().coords(), eta.zeta().coords());
    if d > ZETA_MATCH {
        return Err(Error::Domain(format!(
            "orbits converge to different boundary points (|ζ_ξ - ζ_η| = {d:.3e})"
        )));
    }
    Ok(())
}

fn common_window(xi: &OrbitSegment, eta: &OrbitSegment) -> Result<(i64, i64)> {
    let lo = xi.first_index().max(eta.first_index());
    let hi = xi.last_index().min(eta.last_index());
    if hi - lo < 1 {
        return Err(Error::Domain(format!(
            "orbits share only the index window [{lo}, {hi}]"
        )));
    }
    Ok((lo, hi))
}

fn point(o: &OrbitSegment, n: i64) -> &BallPoint {
    o.get(n).expect("index inside the window")
}

/// Compares two backward orbits of `f` converging to the same boundary point.
///
/// `η` is extended forward by the window length before the shifted profile is
/// taken, so that `inf_m` sees every `y_{m-1} = f(y_m)` it needs.
pub fn orbit_distance_profile(
    f: &SelfMap,
    xi: &OrbitSegment,
    eta: &OrbitSegment,
) -> Result<OrbitComparison> {
    orbit_distance_profile_with(f, xi, eta, EPS_PLATEAU)
}

/// [`orbit_distance_profile`] with a caller-chosen plateau tolerance.
pub fn orbit_distance_profile_with(
    f: &SelfMap,
    xi: &OrbitSegment,
    eta: &OrbitSegment,
    eps_plateau: f64,
) -> Result<OrbitComparison> {
    if !(eps_plateau > 0.0) {
        return Err(Error::Config(format!(
            "eps_plateau must be positive, got {eps_plateau}"
        )));
    }
    same_target(xi, eta)?;
    let (lo, hi) = common_window(xi, eta)?;
    let eta_ext = extend_to_bilateral(eta, f, (hi - lo) as usize)?;
    let indices: Vec<i64> = (lo..=hi).collect();
    let direct: Vec<f64> = indices
        .iter()
        .map(|&n| kob_dist_raw(point(xi, n).coords(), point(eta, n).coords()))
        .collect();
    let shifted: Vec<f64> = indices
        .iter()
        .map(|&n| {
            let x = point(xi, n).coords();
            eta_ext
                .points()
                .iter()
                .map(|y| kob_dist_raw(x, y.coords()))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let len = direct.len();
    let q0 = len - (len / 4).max(2).min(len);
    let tail = &direct[q0..];
    let last_quarter_increase = tail.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b))
        - tail.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    let tol = |v: f64| PROFILE_TOL * (1.0 + v.abs());
    let shifted_below_direct = shifted.iter().zip(&direct).all(|(s, d)| *s <= d + tol(*d));
    let shifted_monotone = shifted.windows(2).all(|w| w[0] <= w[1] + tol(w[1]));
    Ok(OrbitComparison {
        plateau: last_quarter_increase < eps_plateau,
        last_quarter_increase,
        c_direct: direct.iter().copied().fold(0.0, f64::max),
        c_shifted: shifted.iter().copied().fold(0.0, f64::max),
        indices,
        direct,
        shifted,
        shifted_below_direct,
        shifted_monotone,
    })
}

/// A shift `α` with `k(x_n, y_{n+α}) ≤ C` on the window, and the certified
/// direct bound `C + |α| σ̂(η)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftRecovery {
    pub alpha: i64,
    pub c: f64,
    /// Largest step of `η`.
    pub sigma_hat: f64,
    pub certified_bound: f64,
    /// `max_n k(x_n, y_n)` on the window, which must not exceed the certified bound.
    pub direct_max: f64,
    /// `(α, C_α)` for every scanned shift with a usable window.
    pub scan: Vec<(i64, f64)>,
}

/// Scans `α ∈ [-max_shift, max_shift]` for the smallest `C_α = max_n k(x_n, y_{n+α})`
/// over the common window (shrunk where `y_{n+α}` leaves the bilateral extension of `η`).
pub fn shift_recovery(
    f: &SelfMap,
    xi: &OrbitSegment,
    eta: &OrbitSegment,
    max_shift: usize,
) -> Result<ShiftRecovery> {
    same_target(xi, eta)?;
    let (lo, hi) = common_window(xi, eta)?;
    let eta_ext = extend_to_bilateral(eta, f, max_shift)?;
    let min_window = ((hi - lo + 1) / 2).max(2) as usize;
    let mut scan = Vec::new();
    for alpha in -(max_shift as i64)..=(max_shift as i64) {
        let values: Vec<f64> = (lo..=hi)
            .filter_map(|n| {
                eta_ext
                    .get(n + alpha)
                    .map(|y| kob_dist_raw(point(xi, n).coords(), y.coords()))
            })
            .collect();
        if values.len() >= min_window {
            scan.push((alpha, values.into_iter().fold(0.0, f64::max)));
        }
    }
    let Some(&(alpha, c)) = scan
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.abs().cmp(&b.0.abs())))
    else {
        return Err(Error::Invariant(format!(
            "no admissible shift in [-{max_shift}, {max_shift}]"
        )));
    };
    let sigma_hat = eta.steps().into_iter().fold(0.0, f64::max);
    let certified_bound = c + alpha.unsigned_abs() as f64 * sigma_hat;
    let direct_max = (lo..=hi)
        .map(|n| kob_dist_raw(point(xi, n).coords(), point(eta, n).coords()))
        .fold(0.0, f64::max);
    if !(c.is_finite()) || direct_max > certified_bound + 1e-9 * (1.0 + certified_bound) {
        return Err(Error::Invariant(format!(
            "shift {alpha} gives C = {c}, but the direct profile reaches {direct_max} > {certified_bound}"
        )));
    }
    Ok(ShiftRecovery {
        alpha,
        c,
        sigma_hat,
        certified_bound,
        direct_max,
        scan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Automorphism, BoundaryPoint};
    use crate::numeric::CX_ONE;
    use crate::orbit::{construct_backward_orbit, OrbitParams};

    fn axial() -> (SelfMap, OrbitSegment) {
        let f = SelfMap::disc_hyperbolic(CX_ONE, 3.0).unwrap();
        let zeta = BoundaryPoint::e1(1);
        let o = construct_backward_orbit(&f, &zeta, 3.0, &OrbitParams::default())
            .unwrap()
            .orbit;
        (f, o)
    }

    fn relabel(o: &OrbitSegment, by: i64) -> OrbitSegment {
        OrbitSegment::with_first_index(
            o.points().to_vec(),
            o.first_index() + by,
            o.zeta().clone(),
            o.lambda(),
            o.map_label(),
        )
        .unwrap()
    }

    #[test]
    fn bilateral_seam() {
        let (f, o) = axial();
        let b = extend_to_bilateral(&o, &f, 5).unwrap();
        assert_eq!(b.first_index(), -5);
        assert_eq!(b.get(-1).unwrap(), &f.apply(b.get(0).unwrap()).unwrap());
        assert_eq!(&f.apply(b.get(1).unwrap()).unwrap(), b.get(0).unwrap());
        assert!(b.steps().iter().all(|d| (d - 3f64.ln()).abs() < 1e-10));
    }

    #[test]
    fn bilateral_blaschke_tends_to_the_fixed_point() {
        let b = SelfMap::blaschke(
            vec![
                numeric::CX_ZERO,
                numeric::cx_real(numeric::dd(1.0) / numeric::dd(3.0)),
            ],
            CX_ONE,
        )
        .unwrap();
        let zeta = BoundaryPoint::e1(1);
        let o = crate::orbit::backward_orbit_via_preimages(
            &b,
            &BallPoint::from_real(&[0.5]).unwrap(),
            &zeta,
            3.0,
            5,
            &Default::default(),
        )
        .unwrap();
        let e = extend_to_bilateral(&o, &b, 200).unwrap();
        assert!(e.points()[0].norm() < 1e-10);
    }

    #[test]
    fn identical_and_shifted_orbits() {
        let (f, o) = axial();
        let c = orbit_distance_profile(&f, &o, &o).unwrap();
        assert!(c.direct.iter().all(|d| *d == 0.0));
        assert!(c.plateau);
        let s = relabel(&o, 1);
        let c = orbit_distance_profile(&f, &o, &s).unwrap();
        assert!(c.direct.iter().all(|d| *d <= 3f64.ln() + 1e-10));
        assert!(c.plateau && c.shifted_below_direct && c.shifted_monotone);
        let r = shift_recovery(&f, &o, &relabel(&o, 3), 6).unwrap();
        assert_eq!(r.alpha, 3);
        assert!(r.c < 1e-12);
    }

    #[test]
    fn independent_axial_orbits() {
        let (f, o) = axial();
        // a second orbit on the axis, offset by half a step
        let g = Automorphism::axial_translation(o.zeta(), 0.5 * 3f64.ln()).unwrap();
        let eta = o.transported(&g, "half").unwrap();
        let r = shift_recovery(&f, &o, &eta, 5).unwrap();
        assert!(r.alpha == 0 || r.alpha == -1);
        assert!((r.c - 0.5 * 3f64.ln()).abs() < 1e-9);
        assert!(r.direct_max <= r.certified_bound);
    }

    #[test]
    fn different_targets_are_refused() {
        let (f, o) = axial();
        let minus = OrbitSegment::new(
            o.points()
                .iter()
                .map(|p| BallPoint::new(vec![-p.coords()[0]]).unwrap())
                .collect(),
            o.zeta().neg(),
            Some(3.0),
            "minus",
        )
        .unwrap();
        assert!(matches!(
            orbit_distance_profile(&f, &o, &minus),
            Err(Error::Domain(_))
        ));
        assert!(shift_recovery(&f, &o, &minus, 3).is_err());
    }
}
