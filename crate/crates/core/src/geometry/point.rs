use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::{self, cx, cx_to_f64, defect, norm, to_f64, Cx, Real, CX_ONE, CX_ZERO};

/// Minimum admissible `1 - |z|`; closer points are treated as lying on the sphere.
pub const BOUNDARY_GUARD: f64 = 1e-28;

/// Tolerance on `| |zeta| - 1 |` accepted when constructing a [`BoundaryPoint`].
pub const SPHERE_TOL: f64 = 1e-12;

/// A point of the open unit ball of `C^q`.
#[derive(Clone, PartialEq)]
pub struct BallPoint(Vec<Cx>);

impl BallPoint {
    pub fn new(coords: Vec<Cx>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("ball dimension must be at least 1".into()));
        }
        let d = defect(&coords);
        if !d.hi().is_finite() || to_f64(d) < 2.0 * BOUNDARY_GUARD {
            return Err(Error::Domain(format!(
                "point is on or outside the unit sphere (1 - |z|^2 = {:e})",
                to_f64(d)
            )));
        }
        Ok(Self(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Self(vec![CX_ZERO; dim])
    }

    pub fn from_c64(coords: &[Complex64]) -> Result<Self> {
        Self::new(coords.iter().map(|z| cx(z.re, z.im)).collect())
    }

    /// Real coordinates, imaginary parts zero.
    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| cx(x, 0.0)).collect())
    }

    pub fn coords(&self) -> &[Cx] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Cx> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `1 - |z|^2` in double-double precision.
    pub fn defect(&self) -> Real {
        defect(&self.0)
    }

    pub fn norm(&self) -> f64 {
        to_f64(norm(&self.0))
    }

    pub fn to_c64(&self) -> Vec<Complex64> {
        self.0.iter().map(|z| cx_to_f64(*z)).collect()
    }

    pub fn dist_euclid(&self, other: &BallPoint) -> f64 {
        numeric::dist_euclid(&self.0, &other.0)
    }
}

impl fmt::Debug for BallPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("BallPoint").field(&self.to_c64()).finish()
    }
}

/// A point of the unit sphere `∂B^q`.
#[derive(Clone, PartialEq)]
pub struct BoundaryPoint(Vec<Cx>);

impl BoundaryPoint {
    /// Accepts coordinates within [`SPHERE_TOL`] of the sphere and renormalizes them.
    pub fn new(coords: Vec<Cx>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("sphere dimension must be at least 1".into()));
        }
        let n = norm(&coords);
        if (to_f64(n) - 1.0).abs() > SPHERE_TOL {
            return Err(Error::Domain(format!(
                "boundary point has norm {} (expected 1)",
                to_f64(n)
            )));
        }
        Ok(Self(
            coords
                .into_iter()
                .map(|z| numeric::scale(z, numeric::ONE / n))
                .collect(),
        ))
    }

    /// `e_1 = (1, 0, ..., 0)`.
    pub fn e1(dim: usize) -> Self {
        let mut c = vec![CX_ZERO; dim];
        c[0] = CX_ONE;
        Self(c)
    }

    pub fn from_c64(coords: &[Complex64]) -> Result<Self> {
        Self::new(coords.iter().map(|z| cx(z.re, z.im)).collect())
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| cx(x, 0.0)).collect())
    }

    pub fn coords(&self) -> &[Cx] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_c64(&self) -> Vec<Complex64> {
        self.0.iter().map(|z| cx_to_f64(*z)).collect()
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|z| -*z).collect())
    }

    /// `t * zeta` for real `t` in `(-1, 1)`.
    pub fn scaled(&self, t: Real) -> Result<BallPoint> {
        BallPoint::new(self.0.iter().map(|z| numeric::scale(*z, t)).collect())
    }

    /// Euclidean distance from a ball point to this boundary point.
    pub fn dist_from(&self, z: &BallPoint) -> f64 {
        numeric::dist_euclid(&self.0, z.coords())
    }
}

impl fmt::Debug for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("BoundaryPoint")
            .field(&self.to_c64())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::dd;

    #[test]
    fn rejects_points_on_sphere() {
        assert!(BallPoint::from_real(&[1.0, 0.0]).is_err());
        assert!(BallPoint::from_real(&[0.8, 0.7]).is_err());
        assert!(BallPoint::from_real(&[0.6, 0.79]).is_ok());
        assert!(BallPoint::new(vec![]).is_err());
    }

    #[test]
    fn accepts_points_beyond_f64_resolution() {
        let t = numeric::ONE - dd(1e-20);
        let z = BallPoint::new(vec![numeric::cx_real(t)]).unwrap();
        assert!((to_f64(z.defect()) - 2e-20).abs() < 1e-30);
    }

    #[test]
    fn boundary_point_is_renormalized() {
        let z = BoundaryPoint::from_real(&[1.0 + 1e-13, 0.0]).unwrap();
        assert!((to_f64(norm(z.coords())) - 1.0).abs() < 1e-30);
        assert!(BoundaryPoint::from_real(&[0.9, 0.0]).is_err());
    }
}
