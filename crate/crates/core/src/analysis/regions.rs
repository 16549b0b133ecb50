use crate::error::{check_dim, Error, Result};
use crate::geometry::metric::kob_dist_raw;
use crate::geometry::sampling::{in_kobayashi_ball, seeded};
use crate::geometry::{
    dist_to_geodesic, koranyi_functional, Automorphism, BallPoint, BoundaryPoint,
};
use crate::orbit::OrbitSegment;

const KORANYI_SLACK: f64 = 1e-9;
const TUBE_SLACK: f64 = 1e-6;

/// A sample of `A(γ, L)`: `z = T_s(p)` with `k(0, p) < L`, so `k(z, γ(s)) = k(0, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeSample {
    pub s: f64,
    pub point: BallPoint,
    /// `k(z, γ(s))`, an upper bound for the distance to the geodesic.
    pub offset: f64,
}

/// `n` samples of `A(γ, L)` spread evenly over the geodesic parameters `s_values`.
pub fn sample_tube(
    zeta: &BoundaryPoint,
    width: f64,
    s_values: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<TubeSample>> {
    if !(width >= 0.0) || !width.is_finite() {
        return Err(Error::Domain(format!(
            "tube width must be non-negative, got {width}"
        )));
    }
    if s_values.is_empty() {
        return Err(Error::Domain("no geodesic parameters to sample".into()));
    }
    let mut rng = seeded(seed);
    let translations = s_values
        .iter()
        .map(|&s| Automorphism::axial_translation(zeta, s))
        .collect::<Result<Vec<_>>>()?;
    let origin = BallPoint::origin(zeta.dim());
    (0..n)
        .map(|i| {
            let j = i % s_values.len();
            let p = in_kobayashi_ball(&mut rng, zeta.dim(), width);
            let offset = kob_dist_raw(origin.coords(), p.coords());
            Ok(TubeSample {
                s: s_values[j],
                point: translations[j].apply(&p)?,
                offset,
            })
        })
        .collect()
}

/// Tallies for the inclusion `A(γ, L) ⊂ K(ζ, e^L)` and the empirical converse.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub width: f64,
    pub amplitude: f64,
    pub samples: usize,
    /// Samples of `A(γ, L)` whose Korányi functional exceeds `2L + 1e-9`.
    pub violations: usize,
    /// Largest functional over the samples.
    pub max_functional: f64,
    /// `2L + 1e-9 - max_functional`.
    pub margin: f64,
    /// Per-sample `(tube margin L - k(z, γ(s)), Korányi margin 2L - functional)`.
    pub margins: Vec<(f64, f64)>,
    /// Tail (second half) of the supplied sequence: largest Korányi functional.
    pub tail_functional: Option<f64>,
    /// Tail inside `K(ζ, M)`.
    pub tail_in_koranyi: Option<bool>,
    /// Empirical `L̂` with the tail inside `A(γ, L̂)`.
    pub l_hat: Option<f64>,
    /// Points of the supplied sequence inside `A(γ, L)`, and how many of those break the inclusion.
    pub sequence_in_tube: usize,
    pub sequence_violations: usize,
}

impl RegionReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.sequence_violations == 0
    }

    pub fn verify(&self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(Error::Invariant(format!(
                "{} sampled points of A(γ, {}) lie outside K(ζ, e^L) (max functional {})",
                self.violations + self.sequence_violations,
                self.width,
                self.max_functional
            )))
        }
    }
}

/// Geodesic parameters `s = 1, ..., 30` used for graded tube samples.
pub fn graded_parameters() -> Vec<f64> {
    (1..=30).map(f64::from).collect()
}

/// Checks `A(γ, L) ⊂ K(ζ, e^L)` on `n` graded samples; for a sequence tending to
/// `ζ`, reports whether its tail sits in `K(ζ, M)` and the smallest tube around
/// `γ` containing that tail.
pub fn region_equivalence_check(
    zeta: &BoundaryPoint,
    sequence: &[BallPoint],
    width: f64,
    amplitude: f64,
    n: usize,
    seed: u64,
) -> Result<RegionReport> {
    if !(amplitude > 1.0) {
        return Err(Error::Domain(format!(
            "Korányi amplitude must exceed 1, got {amplitude}"
        )));
    }
    for p in sequence {
        check_dim(zeta.dim(), p.dim())?;
    }
    let samples = sample_tube(zeta, width, &graded_parameters(), n, seed)?;
    let bound = 2.0 * width + KORANYI_SLACK;
    let mut violations = 0;
    let mut max_functional = f64::NEG_INFINITY;
    let mut margins = Vec::with_capacity(n);
    for s in &samples {
        let fun = koranyi_functional(&s.point, zeta)?;
        if fun > bound {
            violations += 1;
        }
        max_functional = max_functional.max(fun);
        margins.push((width - s.offset, 2.0 * width - fun));
    }

    let mut sequence_in_tube = 0;
    let mut sequence_violations = 0;
    let mut tail_functional = None;
    let mut l_hat = None;
    if !sequence.is_empty() {
        let mut dists = Vec::with_capacity(sequence.len());
        let mut funs = Vec::with_capacity(sequence.len());
        for p in sequence {
            let d = dist_to_geodesic(p, zeta)?.distance;
            let fun = koranyi_functional(p, zeta)?;
            if d < width {
                sequence_in_tube += 1;
                if fun > bound {
                    sequence_violations += 1;
                }
            }
            dists.push(d);
            funs.push(fun);
        }
        let half = sequence.len() / 2;
        tail_functional = Some(
            funs[half..]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max),
        );
        l_hat = Some(dists[half..].iter().copied().fold(0.0, f64::max));
    }
    Ok(RegionReport {
        width,
        amplitude,
        samples: n,
        violations,
        max_functional,
        margin: bound - max_functional,
        margins,
        tail_in_koranyi: tail_functional.map(|t| t < 2.0 * amplitude.ln()),
        tail_functional,
        l_hat,
        sequence_in_tube,
        sequence_violations,
    })
}

/// Covering radius of the tube `A(γ, L)` by a backward orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeReport {
    pub width: f64,
    pub samples: usize,
    /// `max over samples of min_n k(z, y_n)`.
    pub r_hat: f64,
    /// `max_n` distance from `y_n` to the diameter through `ζ`.
    pub c_hat: f64,
    /// Largest step of the orbit.
    pub sigma_hat: f64,
    /// `L + 3 Ĉ + σ̂`.
    pub bound: f64,
    /// Covering radius over the shallowest and deepest quarters of the sampled range.
    pub r_shallow: f64,
    pub r_deep: f64,
    /// Range of geodesic parameters sampled (the projections of the orbit).
    pub s_range: (f64, f64),
}

impl TubeReport {
    pub fn margin(&self) -> f64 {
        self.bound + TUBE_SLACK - self.r_hat
    }

    pub fn passed(&self) -> bool {
        self.margin() > 0.0 && self.r_hat.is_finite()
    }

    pub fn verify(&self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(Error::Invariant(format!(
                "covering radius {} exceeds L + 3C + σ = {}",
                self.r_hat, self.bound
            )))
        }
    }
}

/// Samples `A(γ, L)` over the stretch of `γ` that the orbit projects onto and
/// measures the Kobayashi distance from each sample to the orbit.
///
/// `Ĉ` is measured to the whole diameter through `ζ`: the exit point of a chain
/// may sit beyond the origin, where the ray from `0` is not the nearest part of
/// the axis.
pub fn tube_covering_check(
    eta: &OrbitSegment,
    width: f64,
    n: usize,
    seed: u64,
) -> Result<TubeReport> {
    let zeta = eta.zeta();
    let mut c_hat: f64 = 0.0;
    let mut s_lo = f64::INFINITY;
    let mut s_hi = f64::NEG_INFINITY;
    let opposite = zeta.neg();
    for y in eta.points() {
        let proj = dist_to_geodesic(y, zeta)?;
        let back = dist_to_geodesic(y, &opposite)?;
        c_hat = c_hat.max(proj.distance.min(back.distance));
        s_lo = s_lo.min(proj.s);
        s_hi = s_hi.max(proj.s);
    }
    if !(s_hi > s_lo) {
        return Err(Error::Domain(
            "orbit projects onto a single point of γ".into(),
        ));
    }
    let grid = 64;
    let s_values: Vec<f64> = (0..grid)
        .map(|i| s_lo + (s_hi - s_lo) * i as f64 / (grid - 1) as f64)
        .collect();
    let samples = sample_tube(zeta, width, &s_values, n, seed)?;
    let mut r_hat: f64 = 0.0;
    let mut r_shallow: f64 = 0.0;
    let mut r_deep: f64 = 0.0;
    let quarter = 0.25 * (s_hi - s_lo);
    for s in &samples {
        let r = eta
            .points()
            .iter()
            .map(|y| kob_dist_raw(s.point.coords(), y.coords()))
            .fold(f64::INFINITY, f64::min);
        r_hat = r_hat.max(r);
        if s.s <= s_lo + quarter {
            r_shallow = r_shallow.max(r);
        }
        if s.s >= s_hi - quarter {
            r_deep = r_deep.max(r);
        }
    }
    let sigma_hat = eta.steps().into_iter().fold(0.0, f64::max);
    Ok(TubeReport {
        width,
        samples: n,
        r_hat,
        c_hat,
        sigma_hat,
        bound: width + 3.0 * c_hat + sigma_hat,
        r_shallow,
        r_deep,
        s_range: (s_lo, s_hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::SelfMap;
    use crate::geometry::axis_point;
    use crate::numeric::CX_ONE;
    use crate::orbit::{construct_backward_orbit, OrbitParams};

    fn horofunctions(seq: &[BallPoint], zeta: &BoundaryPoint) -> Vec<f64> {
        use crate::geometry::metric::horofunction_raw;
        seq.iter()
            .map(|p| horofunction_raw(p.coords(), zeta.coords()))
            .collect()
    }

    #[test]
    fn radial_sequence_is_in_every_tube() {
        let zeta = BoundaryPoint::from_real(&[0.6, 0.8]).unwrap();
        let seq: Vec<BallPoint> = (1..40)
            .map(|s| axis_point(&zeta, s as f64).unwrap())
            .collect();
        let r = region_equivalence_check(&zeta, &seq, 0.5, 1.5, 500, 1).unwrap();
        assert!(r.passed());
        assert!(r.l_hat.unwrap() < 1e-6);
        assert!(r.tail_in_koranyi.unwrap());
        assert_eq!(r.sequence_in_tube, seq.len());
        assert!(horofunctions(&seq, &zeta).windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn point_beyond_the_bound_is_outside_the_tube() {
        // functional 2L + 1 forces k(z, γ) ≥ L + 1/2 > L, so it never counts against the inclusion
        let zeta = BoundaryPoint::e1(2);
        let l = 1.0;
        let t = Automorphism::axial_translation(&zeta, 5.0).unwrap();
        let dir = [crate::numeric::CX_ZERO, CX_ONE];
        let at = |r: f64| {
            let p = crate::orbit::kobayashi_offset(&BallPoint::origin(2), &dir, r).unwrap();
            t.apply(&p).unwrap()
        };
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if koranyi_functional(&at(mid), &zeta).unwrap() < 2.0 * l + 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let z = at(lo);
        assert!((koranyi_functional(&z, &zeta).unwrap() - (2.0 * l + 1.0)).abs() < 1e-9);
        assert!(dist_to_geodesic(&z, &zeta).unwrap().distance > l);
        let r = region_equivalence_check(&zeta, &[z], l, 2.0, 100, 2).unwrap();
        assert_eq!(r.sequence_in_tube, 0);
        assert!(r.passed());
    }

    #[test]
    fn axial_orbit_covers_with_step_bound() {
        let f = SelfMap::disc_hyperbolic(CX_ONE, 3.0).unwrap();
        let zeta = BoundaryPoint::e1(1);
        let o = construct_backward_orbit(&f, &zeta, 3.0, &OrbitParams::default())
            .unwrap()
            .orbit;
        for l in [0.0, 0.5, 2.0] {
            let r = tube_covering_check(&o, l, 400, 3).unwrap();
            assert!(r.c_hat < 1e-8, "{r:?}");
            assert!(r.r_hat <= l + r.sigma_hat + 1e-6, "{r:?}");
            assert!(r.passed());
        }
    }
}
