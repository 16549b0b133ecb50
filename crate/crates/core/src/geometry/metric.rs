//! Kobayashi distance, horofunctions and the radial geodesic.
//!
//! Normalization: `k(0, z) = log((1 + |z|) / (1 - |z|))`, twice the usual
//! Poincaré–Bergman convention. Under it the anchors `r_k` sit exactly on the
//! horosphere boundaries `∂E_k`, the horosphere `E_0(ζ, R)` is the sublevel
//! set `{horofunction < log R}`, and the anchor step `k(r_k, f(r_k))` tends to
//! `log λ`. Korányi amplitudes are only meaningful relative to this choice.

use crate::error::{check_dim, Error, Result};
use crate::geometry::point::{BallPoint, BoundaryPoint};
use crate::numeric::{self, dd, defect, inner, norm_sqr, scale, to_f64, Cx, Real, CX_ONE, ONE};

/// The involution `φ_a` exchanging `a` and `0`; the identity when `a = 0`.
pub(crate) fn moebius_raw(a: &[Cx], z: &[Cx]) -> Vec<Cx> {
    let aa = norm_sqr(a);
    if aa.hi() == 0.0 {
        return z.to_vec();
    }
    let s = (ONE - aa).sqrt();
    let za = inner(z, a);
    let den = CX_ONE - za;
    let proj = za / numeric::cx_real(aa);
    a.iter()
        .zip(z)
        .map(|(ai, zi)| {
            let p = *ai * proj;
            let q = *zi - p;
            (*ai - p - scale(q, s)) / den
        })
        .collect()
}

/// Kobayashi distance for raw coordinates already known to lie in the ball.
pub(crate) fn kob_dist_raw(z: &[Cx], w: &[Cx]) -> f64 {
    let rho2 = norm_sqr(&moebius_raw(z, w));
    let r2 = to_f64(rho2);
    if r2 < 0.25 {
        return 2.0 * r2.sqrt().atanh();
    }
    let c = CX_ONE - inner(w, z);
    let one_minus = defect(z) * defect(w) / c.norm_sqr();
    let rho = (ONE - one_minus).sqrt();
    let ratio = (ONE + rho) * (ONE + rho) / one_minus;
    to_f64(ratio).ln()
}

/// Kobayashi distance of the unit ball (doubled normalization).
pub fn kob_dist(z: &BallPoint, w: &BallPoint) -> Result<f64> {
    check_dim(z.dim(), w.dim())?;
    Ok(kob_dist_raw(z.coords(), w.coords()))
}

pub(crate) fn horofunction_raw(z: &[Cx], zeta: &[Cx]) -> f64 {
    let c = CX_ONE - inner(z, zeta);
    to_f64(c.norm_sqr() / defect(z)).ln()
}

/// `log(|1 - <z, ζ>|^2 / (1 - |z|^2))`, the Busemann function at `ζ` normalized to vanish at 0.
pub fn horofunction(z: &BallPoint, zeta: &BoundaryPoint) -> Result<f64> {
    check_dim(zeta.dim(), z.dim())?;
    Ok(horofunction_raw(z.coords(), zeta.coords()))
}

/// Limit form of the horofunction, `k(z, w) - k(0, w)` with `w = γ(s)`; used as a cross-check.
pub fn horofunction_limit(z: &BallPoint, zeta: &BoundaryPoint, s: f64) -> Result<f64> {
    check_dim(zeta.dim(), z.dim())?;
    let w = axis_point(zeta, s)?;
    Ok(kob_dist_raw(z.coords(), w.coords())
        - kob_dist_raw(&vec![numeric::CX_ZERO; z.dim()], w.coords()))
}

/// `tanh(s/2)` as a double-double, with the defect `1 - tanh(s/2)` resolved for large `s`.
pub(crate) fn radial_parameter(s: f64) -> Real {
    let a = s.abs();
    let tail = dd(2.0) / (dd(a.exp()) + ONE);
    let r = ONE - tail;
    if s < 0.0 {
        -r
    } else {
        r
    }
}

/// Point at signed geodesic parameter `s` on the diameter through `-ζ, 0, ζ`.
pub fn axis_point(zeta: &BoundaryPoint, s: f64) -> Result<BallPoint> {
    if !s.is_finite() {
        return Err(Error::Domain(format!(
            "geodesic parameter {s} is not finite"
        )));
    }
    zeta.scaled(radial_parameter(s))
}

/// The radial geodesic from 0 toward `ζ`: `γ(s) = tanh(s/2) ζ`, so `k(0, γ(s)) = s`.
pub fn geodesic_point(zeta: &BoundaryPoint, s: f64) -> Result<BallPoint> {
    if s < 0.0 {
        return Err(Error::Domain(format!(
            "geodesic parameter must be >= 0, got {s}"
        )));
    }
    axis_point(zeta, s)
}

/// Result of minimizing `s ↦ k(z, γ(s))` over `s >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicProjection {
    pub distance: f64,
    pub s: f64,
    pub iterations: usize,
}

pub const GOLDEN_TOL: f64 = 1e-10;
pub const GOLDEN_MAX_ITER: usize = 200;
const S_CEILING: f64 = 62.0;

/// Kobayashi distance from `z` to the radial geodesic toward `ζ`.
///
/// Bracket around a Busemann-based guess, golden-section to [`GOLDEN_TOL`] in
/// `s`, then a parabolic polishing step that is kept only if it improves.
pub fn dist_to_geodesic(z: &BallPoint, zeta: &BoundaryPoint) -> Result<GeodesicProjection> {
    check_dim(zeta.dim(), z.dim())?;
    let zc = z.coords();
    let origin = vec![numeric::CX_ZERO; z.dim()];
    let eval = |s: f64| -> f64 {
        let w = zeta
            .coords()
            .iter()
            .map(|c| scale(*c, radial_parameter(s)))
            .collect::<Vec<_>>();
        kob_dist_raw(zc, &w)
    };

    let guess = (0.5 * (kob_dist_raw(&origin, zc) - horofunction_raw(zc, zeta.coords())))
        .clamp(0.0, S_CEILING);
    let mut step = 1.0;
    let mut lo = (guess - step).max(0.0);
    let mut hi = (guess + step).min(S_CEILING);
    let mut expansions = 0;
    loop {
        let f_lo = eval(lo);
        let f_hi = eval(hi);
        let f_mid = eval(0.5 * (lo + hi));
        let lo_ok = lo == 0.0 || f_lo > f_mid;
        let hi_ok = hi == S_CEILING || f_hi > f_mid;
        if lo_ok && hi_ok {
            break;
        }
        expansions += 1;
        if expansions > 60 {
            return Err(Error::Numerical(
                "could not bracket geodesic projection".into(),
            ));
        }
        step *= 2.0;
        if !lo_ok {
            lo = (lo - step).max(0.0);
        }
        if !hi_ok {
            hi = (hi + step).min(S_CEILING);
        }
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    let mut iterations = 0;
    while (b - a) > GOLDEN_TOL {
        if iterations >= GOLDEN_MAX_ITER {
            return Err(Error::Numerical(format!(
                "golden-section search did not converge in {GOLDEN_MAX_ITER} iterations"
            )));
        }
        iterations += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    let (mut s_best, mut f_best) = if fc <= fd { (c, fc) } else { (d, fd) };
    for cand in [a, b] {
        let fv = eval(cand);
        if fv < f_best {
            s_best = cand;
            f_best = fv;
        }
    }

    // parabolic polish through three nearby samples
    let h = 1e-4;
    if s_best - h >= 0.0 && s_best + h <= S_CEILING {
        let (f0, f1, f2) = (eval(s_best - h), f_best, eval(s_best + h));
        let curv = f0 - 2.0 * f1 + f2;
        if curv > 0.0 {
            let cand = (s_best - 0.5 * h * (f2 - f0) / curv).max(0.0);
            let fv = eval(cand);
            if fv < f_best {
                s_best = cand;
                f_best = fv;
            }
        }
    }
    Ok(GeodesicProjection {
        distance: f_best.max(0.0),
        s: s_best,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> BallPoint {
        BallPoint::from_real(c).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(kob_dist(&p(&[0.0, 0.0]), &p(&[0.0, 0.0])).unwrap(), 0.0);
        let d = kob_dist(&p(&[0.0, 0.0]), &p(&[0.5, 0.0])).unwrap();
        assert!((d - 3f64.ln()).abs() < 1e-14);
        let d = kob_dist(&p(&[0.5]), &p(&[-0.5])).unwrap();
        assert!((d - 9f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn distance_rejects_mixed_dimensions() {
        assert!(matches!(
            kob_dist(&p(&[0.1]), &p(&[0.1, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn horofunction_examples() {
        let e1 = BoundaryPoint::e1(2);
        assert_eq!(horofunction(&p(&[0.0, 0.0]), &e1).unwrap(), 0.0);
        let h = horofunction(&p(&[0.5, 0.0]), &e1).unwrap();
        assert!((h + 3f64.ln()).abs() < 1e-14);
        let h = horofunction(&p(&[0.0, 0.5]), &e1).unwrap();
        assert!((h - (4.0f64 / 3.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn geodesic_examples() {
        let e1 = BoundaryPoint::e1(3);
        assert_eq!(geodesic_point(&e1, 0.0).unwrap(), BallPoint::origin(3));
        let g = geodesic_point(&e1, 3f64.ln()).unwrap();
        assert!(g.dist_euclid(&p(&[0.5, 0.0, 0.0])) < 1e-15);
        assert!(geodesic_point(&e1, -1.0).is_err());
        let far = geodesic_point(&e1, 40.0).unwrap();
        let d = kob_dist(&BallPoint::origin(3), &far).unwrap();
        assert!((d - 40.0).abs() < 1e-12);
        assert!((horofunction(&far, &e1).unwrap() + 40.0).abs() < 1e-12);
    }

    #[test]
    fn projection_of_axis_point_is_itself() {
        let e1 = BoundaryPoint::e1(2);
        let z = geodesic_point(&e1, 2.5).unwrap();
        let proj = dist_to_geodesic(&z, &e1).unwrap();
        assert!(proj.distance < 1e-7);
        assert!((proj.s - 2.5).abs() < 1e-6);
    }

    #[test]
    fn projection_clamps_to_start_of_geodesic() {
        let e1 = BoundaryPoint::e1(1);
        let z = p(&[-0.5]);
        let proj = dist_to_geodesic(&z, &e1).unwrap();
        assert_eq!(proj.s, 0.0);
        assert!((proj.distance - 3f64.ln()).abs() < 1e-12);
    }
}
