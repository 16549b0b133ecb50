//! Graded tube samples inside Korányi regions, and how well orbits cover a tube.

use backward_orbits::analysis::{region_equivalence_check, tube_covering_check};
use backward_orbits::geometry::BoundaryPoint;
use backward_orbits::orbit::{construct_backward_orbit, OrbitParams};
use backward_orbits::suite::{cleared_blaschke, hyperbolic_map};

fn main() -> backward_orbits::Result<()> {
    let zeta = BoundaryPoint::e1(1);
    let blaschke =
        construct_backward_orbit(&cleared_blaschke()?, &zeta, 3.0, &OrbitParams::default())?.orbit;

    for l in [0.5, 1.0, 2.0] {
        let r = region_equivalence_check(&zeta, blaschke.points(), l, l.exp(), 2000, 1)?;
        println!(
            "L = {l}: max functional {:.6} ≤ 2L = {}, violations {}, orbit points in the tube: {:?}",
            r.max_functional,
            2.0 * l,
            r.violations,
            r.sequence_in_tube
        );
    }

    let axial =
        construct_backward_orbit(&hyperbolic_map()?, &zeta, 3.0, &OrbitParams::default())?.orbit;
    for (name, o) in [("axial", &axial), ("blaschke", &blaschke)] {
        let t = tube_covering_check(o, 1.0, 500, 1)?;
        println!(
            "{name:8}: R = {:.6}, C = {:.3e}, σ = {:.6}, L + 3C + σ = {:.6}",
            t.r_hat, t.c_hat, t.sigma_hat, t.bound
        );
    }
    Ok(())
}
