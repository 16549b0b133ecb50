//! Validates a one-dimensional pre-model of a warped product on B^2, and a corrupted one.

use backward_orbits::analysis::premodel_validate;
use backward_orbits::geometry::BoundaryPoint;
use backward_orbits::suite::warped_product_with_premodel;

fn main() -> backward_orbits::Result<()> {
    let zeta = BoundaryPoint::e1(2);
    for lambda_tau in [3.0, 3.3] {
        let (f, model) = warped_product_with_premodel(lambda_tau)?;
        let r = premodel_validate(&f, &model, &zeta, 5)?;
        println!("{} with λ_τ = {lambda_tau}", f.label());
        print!("{}", r.report);
    }
    Ok(())
}
