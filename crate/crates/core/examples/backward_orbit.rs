//! Builds a backward orbit of z (z - 1/3)/(1 - z/3) converging to 1 and prints it.

use backward_orbits::catalog::ensure_pole_clearance;
use backward_orbits::cli::load_map;
use backward_orbits::geometry::BoundaryPoint;
use backward_orbits::orbit::{construct_with_clearance, write_orbit_csv, OrbitParams};

fn main() -> backward_orbits::Result<()> {
    let f = load_map("blaschke:a=1/3")?;
    let zeta = BoundaryPoint::e1(1);

    let clearance = ensure_pole_clearance(&f, &zeta)?;
    println!("conjugating translation t = {}", clearance.translation);

    let r = construct_with_clearance(&f, &zeta, &OrbitParams::default())?;
    let o = &r.original;
    println!("λ = {}, chain from k = {:?}", r.lambda, r.cleared.chosen_k);
    println!("backward residual {:.3e}", o.backward_residual(&f));
    let steps = o.steps();
    println!(
        "steps: first {:.9}, last {:.9}, log λ = {:.9}",
        steps[0],
        steps[steps.len() - 1],
        r.lambda.ln()
    );

    write_orbit_csv(o, std::io::stdout().lock())?;
    Ok(())
}
