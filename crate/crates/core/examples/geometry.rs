//! Distances, horofunctions and region membership at a boundary point of B^2.

use backward_orbits::geometry::{
    dist_to_geodesic, horofunction, kob_dist, koranyi_functional, BallPoint, BoundaryPoint,
    GeodesicTube, Horosphere, KoranyiRegion,
};

fn main() -> backward_orbits::Result<()> {
    let zeta = BoundaryPoint::e1(2);
    let origin = BallPoint::origin(2);
    let z = BallPoint::from_real(&[0.5, 0.2])?;

    println!("k(0, z)        = {:.12}", kob_dist(&origin, &z)?);
    println!("h(z, e1)       = {:.12}", horofunction(&z, &zeta)?);
    println!("Korányi value  = {:.12}", koranyi_functional(&z, &zeta)?);

    let proj = dist_to_geodesic(&z, &zeta)?;
    println!(
        "dist to radius = {:.12} at s = {:.6}",
        proj.distance, proj.s
    );

    let e1 = Horosphere::level(zeta.clone(), 3.0, 1)?;
    let k2 = KoranyiRegion::new(zeta.clone(), 2.0)?;
    let tube = GeodesicTube::new(zeta, 0.5)?;
    for (name, m) in [
        ("E_1 (λ = 3)", e1.contains(&z)?),
        ("K(e1, 2)", k2.contains(&z)?),
        ("A(γ, 0.5)", tube.contains(&z)?),
    ] {
        println!(
            "{name:12} inside = {:5} margin = {:+.6}",
            m.inside, m.margin
        );
    }
    Ok(())
}
