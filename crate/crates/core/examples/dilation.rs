//! Dilation at a boundary repelling fixed point, for maps given as specs.

use backward_orbits::catalog::verify_brfp;
use backward_orbits::cli::{load_map, parse_boundary};

fn main() -> backward_orbits::Result<()> {
    for (spec, zeta) in [
        ("blaschke:a=1/3", "1"),
        ("mobius:zeta=0,1;lambda=5", "0,1"),
        (
            "ball_automorphism:form=hyperbolic;zeta=0.6,0;0,0.8;lambda=2",
            "0.6,0;0,0.8",
        ),
        (
            "warped_product:phi.kind=blaschke;phi.a=1/3;c=0.5;dim=2",
            "1;0",
        ),
    ] {
        let f = load_map(spec)?;
        let r = verify_brfp(&f, &parse_boundary(zeta)?)?;
        let jac = r
            .estimate
            .jacobian_dilation
            .map(|j| format!("{j:.10}"))
            .unwrap_or_else(|| "-".into());
        println!("{spec}\n    λ = {:.10}   Re<Jζ,ζ> = {jac}", r.dilation);
    }
    Ok(())
}
