//! Horospheres, Korányi regions and geodesic tubes at a boundary point.

use crate::error::{Error, Result};
use crate::geometry::metric::{dist_to_geodesic, horofunction, kob_dist};
use crate::geometry::point::{BallPoint, BoundaryPoint};
use crate::numeric::{inner, to_f64, CX_ONE};

/// Membership verdict with a signed margin; positive margin means strictly inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub inside: bool,
    pub margin: f64,
}

impl Membership {
    fn from_margin(margin: f64) -> Self {
        Self {
            inside: margin > 0.0,
            margin,
        }
    }
}

/// `E_0(ζ, R) = {z : h(z, ζ) < log R}`, pole at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Horosphere {
    center: BoundaryPoint,
    radius: f64,
}

impl Horosphere {
    pub fn new(center: BoundaryPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!(
                "horosphere radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    /// `E_k = E_0(ζ, λ^{-k})`.
    pub fn level(center: BoundaryPoint, lambda: f64, k: i32) -> Result<Self> {
        Self::new(center, lambda.powi(-k))
    }

    pub fn center(&self) -> &BoundaryPoint {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Margin `log R - h(z, ζ)`.
    pub fn contains(&self, z: &BallPoint) -> Result<Membership> {
        Ok(Membership::from_margin(
            self.radius.ln() - horofunction(z, &self.center)?,
        ))
    }

    /// The quotient `|1 - <z, ζ>|^2 / (1 - |z|^2)` compared against `R` directly.
    pub fn quotient(&self, z: &BallPoint) -> f64 {
        let c = CX_ONE - inner(z.coords(), self.center.coords());
        to_f64(c.norm_sqr() / z.defect())
    }
}

/// `K(ζ, M) = {z : k(0, z) + h(z, ζ) < 2 log M}`.
#[derive(Debug, Clone, PartialEq)]
pub struct KoranyiRegion {
    vertex: BoundaryPoint,
    amplitude: f64,
}

impl KoranyiRegion {
    pub fn new(vertex: BoundaryPoint, amplitude: f64) -> Result<Self> {
        if !(amplitude > 1.0) || !amplitude.is_finite() {
            return Err(Error::Domain(format!(
                "Korányi amplitude must exceed 1, got {amplitude}"
            )));
        }
        Ok(Self { vertex, amplitude })
    }

    pub fn vertex(&self) -> &BoundaryPoint {
        &self.vertex
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn contains(&self, z: &BallPoint) -> Result<Membership> {
        Ok(Membership::from_margin(
            2.0 * self.amplitude.ln() - koranyi_functional(z, &self.vertex)?,
        ))
    }
}

/// `k(0, z) + h(z, ζ)`; zero along the radial geodesic.
pub fn koranyi_functional(z: &BallPoint, zeta: &BoundaryPoint) -> Result<f64> {
    Ok(kob_dist(&BallPoint::origin(z.dim()), z)? + horofunction(z, zeta)?)
}

/// `A(γ, L) = {z : k(z, γ) < L}` around the radial geodesic toward `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicTube {
    target: BoundaryPoint,
    width: f64,
}

impl GeodesicTube {
    pub fn new(target: BoundaryPoint, width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::Domain(format!(
                "tube width must be positive, got {width}"
            )));
        }
        Ok(Self { target, width })
    }

    pub fn target(&self) -> &BoundaryPoint {
        &self.target
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn contains(&self, z: &BallPoint) -> Result<Membership> {
        let proj = dist_to_geodesic(z, &self.target)?;
        Ok(Membership::from_margin(self.width - proj.distance))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::metric::geodesic_point;

    #[test]
    fn anchor_lies_on_horosphere_boundary() {
        let e1 = BoundaryPoint::e1(2);
        let lambda: f64 = 3.0;
        for k in 0..6 {
            let lk = lambda.powi(k);
            let r = BallPoint::from_real(&[(lk - 1.0) / (lk + 1.0), 0.0]).unwrap();
            let e = Horosphere::level(e1.clone(), lambda, k).unwrap();
            assert!(e.contains(&r).unwrap().margin.abs() < 1e-12);
        }
    }

    #[test]
    fn origin_on_unit_horosphere_and_negative_axis_outside() {
        let e1 = BoundaryPoint::e1(2);
        let e0 = Horosphere::new(e1.clone(), 1.0).unwrap();
        let m = e0.contains(&BallPoint::origin(2)).unwrap();
        assert_eq!(m.margin, 0.0);
        assert!(!m.inside);
        let m = e0
            .contains(&BallPoint::from_real(&[-0.3, 0.0]).unwrap())
            .unwrap();
        assert!(!m.inside);
        assert!((m.margin + (1.69f64 / 0.91).ln()).abs() < 1e-14);
    }

    #[test]
    fn quotient_agrees_with_horofunction() {
        let e1 = BoundaryPoint::e1(2);
        let e = Horosphere::new(e1, 0.7).unwrap();
        let z = BallPoint::from_real(&[0.4, 0.3]).unwrap();
        let by_quotient = e.quotient(&z) < 0.7;
        assert_eq!(by_quotient, e.contains(&z).unwrap().inside);
    }

    #[test]
    fn radial_points_are_in_every_koranyi_region() {
        let e1 = BoundaryPoint::e1(2);
        let k = KoranyiRegion::new(e1.clone(), 1.0001).unwrap();
        for s in [0.0, 0.5, 3.0, 20.0] {
            let z = geodesic_point(&e1, s).unwrap();
            assert!(koranyi_functional(&z, &e1).unwrap().abs() < 1e-12);
            assert!(k.contains(&z).unwrap().margin > 0.0);
        }
        assert!(KoranyiRegion::new(e1, 1.0).is_err());
    }

    #[test]
    fn tube_membership() {
        let e1 = BoundaryPoint::e1(2);
        let tube = GeodesicTube::new(e1.clone(), 0.5).unwrap();
        assert!(
            tube.contains(&geodesic_point(&e1, 2.0).unwrap())
                .unwrap()
                .inside
        );
        assert!(
            !tube
                .contains(&BallPoint::from_real(&[0.0, 0.9]).unwrap())
                .unwrap()
                .inside
        );
        assert!(GeodesicTube::new(e1, 0.0).is_err());
    }
}
