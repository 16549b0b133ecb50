//! Two backward orbits to the same point stay at bounded distance once one is shifted.

use backward_orbits::analysis::{orbit_distance_profile, shift_recovery};
use backward_orbits::geometry::BoundaryPoint;
use backward_orbits::numeric::CX_I;
use backward_orbits::orbit::{
    backward_orbit_via_preimages, construct_backward_orbit, kobayashi_offset, OrbitParams,
    PreimageParams,
};
use backward_orbits::suite::cleared_blaschke;

fn main() -> backward_orbits::Result<()> {
    let f = cleared_blaschke()?;
    let zeta = BoundaryPoint::e1(1);
    let xi = construct_backward_orbit(&f, &zeta, 3.0, &OrbitParams::default())?.orbit;

    for offset in [0.05, 0.5, 2.0] {
        let y0 = kobayashi_offset(&xi.points()[0], &[CX_I], offset)?;
        let eta = backward_orbit_via_preimages(
            &f,
            &y0,
            &zeta,
            3.0,
            xi.len() - 1,
            &PreimageParams::default(),
        )?;
        let cmp = orbit_distance_profile(&f, &xi, &eta)?;
        let s = shift_recovery(&f, &xi, &eta, 6)?;
        println!(
            "offset {offset:4}: sup k(x_n, y_n) = {:.6}, plateau = {}, α = {}, C_α = {:.6}, bound = {:.6}",
            cmp.c_direct, cmp.plateau, s.alpha, s.c, s.certified_bound
        );
    }
    Ok(())
}
