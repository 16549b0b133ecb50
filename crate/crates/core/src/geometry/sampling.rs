//! Seeded point samplers used by the checks and the acceptance battery.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::geometry::automorphism::siegel_to_ball;
use crate::geometry::metric::radial_parameter;
use crate::geometry::point::{BallPoint, BoundaryPoint};
use crate::numeric::{self, cx, cx_real, dd, norm_sqr, scale, Cx, ONE};

pub type SampleRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly distributed unit vector of `C^q`.
pub fn unit_direction(rng: &mut SampleRng, dim: usize) -> Vec<Cx> {
    loop {
        let v: Vec<Cx> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                cx(re, im)
            })
            .collect();
        let n = numeric::norm(&v);
        if n.hi() > 1e-8 {
            return v.into_iter().map(|c| numeric::scale(c, ONE / n)).collect();
        }
    }
}

/// Point with Euclidean radius uniform in `[0, r_max)`.
pub fn uniform_in_radius(rng: &mut SampleRng, dim: usize, r_max: f64) -> BallPoint {
    let r = dd(rng.gen::<f64>() * r_max);
    let dir = unit_direction(rng, dim);
    BallPoint::new(dir.into_iter().map(|c| c * cx_real(r)).collect()).expect("radius below one")
}

/// Point in the shell `1 - |z| = 10^{-u}`, `u` uniform in `[u_min, u_max]`.
pub fn near_sphere(rng: &mut SampleRng, dim: usize, u_min: f64, u_max: f64) -> BallPoint {
    let u = u_min + rng.gen::<f64>() * (u_max - u_min);
    let r = ONE - dd(10f64.powf(-u));
    let dir = unit_direction(rng, dim);
    BallPoint::new(dir.into_iter().map(|c| c * cx_real(r)).collect())
        .expect("shell radius below one")
}

/// Point at Kobayashi distance uniform in `[0, radius)` from the origin.
pub fn in_kobayashi_ball(rng: &mut SampleRng, dim: usize, radius: f64) -> BallPoint {
    let l = rng.gen::<f64>() * radius;
    let r = radial_parameter(l);
    let dir = unit_direction(rng, dim);
    BallPoint::new(dir.into_iter().map(|c| c * cx_real(r)).collect())
        .expect("finite Kobayashi radius")
}

/// Point strictly inside the horoball `{h(·, ζ) < -level}`.
///
/// The depth below the level is exponentially distributed (mean 2, capped at
/// 40); the Siegel offsets scale with the height so that samples spread over a
/// fixed aperture of directions at every depth.
pub fn in_horoball(
    rng: &mut SampleRng,
    zeta: &BoundaryPoint,
    level: f64,
    aperture: f64,
) -> BallPoint {
    let extra: f64 = rng.sample::<f64, _>(Exp1) * 2.0;
    let s = level + extra.clamp(1e-6, 40.0);
    let height = dd(s.exp());
    let x = height * dd(aperture * (2.0 * rng.gen::<f64>() - 1.0));
    let q = zeta.dim();
    let wp: Vec<Cx> = if q > 1 {
        let r = height.sqrt() * dd(aperture * rng.gen::<f64>());
        unit_direction(rng, q - 1)
            .into_iter()
            .map(|c| scale(c, r))
            .collect()
    } else {
        Vec::new()
    };
    let w1 = Cx::new(x, norm_sqr(&wp) + height);
    BallPoint::new(siegel_to_ball(zeta, w1, &wp)).expect("horoball depth is capped")
}

/// Mixed cloud: uniform-in-radius interior samples plus a near-sphere shell.
pub fn mixed_cloud(rng: &mut SampleRng, dim: usize, n: usize) -> Vec<BallPoint> {
    (0..n)
        .map(|i| {
            if i % 4 == 3 {
                near_sphere(rng, dim, 2.0, 12.0)
            } else {
                uniform_in_radius(rng, dim, 0.999)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::metric::kob_dist;

    #[test]
    fn samplers_are_deterministic_and_inside() {
        let a: Vec<_> = mixed_cloud(&mut seeded(7), 3, 50);
        let b: Vec<_> = mixed_cloud(&mut seeded(7), 3, 50);
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.norm() < 1.0));
    }

    #[test]
    fn kobayashi_ball_radius_respected() {
        let mut rng = seeded(1);
        let o = BallPoint::origin(2);
        for _ in 0..200 {
            let p = in_kobayashi_ball(&mut rng, 2, 1.5);
            assert!(kob_dist(&o, &p).unwrap() < 1.5 + 1e-12);
        }
    }

    #[test]
    fn horoball_samples_are_below_level() {
        let mut rng = seeded(5);
        let zeta = BoundaryPoint::from_real(&[0.0, 1.0]).unwrap();
        for _ in 0..200 {
            let z = in_horoball(&mut rng, &zeta, 3.0, 2.0);
            let h = crate::geometry::metric::horofunction(&z, &zeta).unwrap();
            assert!(h < -3.0);
        }
    }
}
