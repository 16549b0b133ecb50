//! Backward orbits converging to a boundary repelling fixed point.
//!
//! The construction runs the forward orbit of the anchors `r_k ∈ ∂E_k` until it
//! first leaves `Ē_0` and reads the path backwards; see [`construct_backward_orbit`].

mod construct;
mod csv;
mod newton;

pub use construct::{
    construct_backward_orbit, construct_with_clearance, BackwardOrbitResult, ChainDiagnostics,
    ClearedOrbit, ConstructionMode, OrbitParams,
};
pub use csv::{read_orbit_csv, write_orbit_csv, CSV_COORD_DIGITS};
pub use newton::{backward_orbit_via_preimages, kobayashi_offset, newton_preimage, PreimageParams};

use crate::catalog::SelfMap;
use crate::error::{Error, Result};
use crate::geometry::metric::{horofunction_raw, kob_dist_raw};
use crate::geometry::{BallPoint, BoundaryPoint};
use crate::numeric::{self, dd, ONE};

/// Tolerance under which a horofunction value counts as `0`, i.e. inside `Ē_0`.
pub const EXIT_TIE_TOL: f64 = 1e-13;
/// Default cap on forward iterations in [`stopping_time`].
pub const DEFAULT_N_MAX: usize = 100_000;

/// Finite orbit with `f(z_{n+1}) = z_n`, indexed from `first_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSegment {
    points: Vec<BallPoint>,
    first_index: i64,
    zeta: BoundaryPoint,
    lambda: Option<f64>,
    map_label: String,
}

impl OrbitSegment {
    pub fn new(
        points: Vec<BallPoint>,
        zeta: BoundaryPoint,
        lambda: Option<f64>,
        map_label: impl Into<String>,
    ) -> Result<Self> {
        Self::with_first_index(points, 0, zeta, lambda, map_label)
    }

    pub fn with_first_index(
        points: Vec<BallPoint>,
        first_index: i64,
        zeta: BoundaryPoint,
        lambda: Option<f64>,
        map_label: impl Into<String>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("an orbit needs at least one point".into()));
        }
        for p in &points {
            crate::error::check_dim(zeta.dim(), p.dim())?;
        }
        Ok(Self {
            points,
            first_index,
            zeta,
            lambda,
            map_label: map_label.into(),
        })
    }

    pub fn points(&self) -> &[BallPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first_index(&self) -> i64 {
        self.first_index
    }

    pub fn last_index(&self) -> i64 {
        self.first_index + self.points.len() as i64 - 1
    }

    /// `z_n` for an absolute index `n`.
    pub fn get(&self, n: i64) -> Option<&BallPoint> {
        let i = n - self.first_index;
        (i >= 0).then(|| self.points.get(i as usize)).flatten()
    }

    pub fn zeta(&self) -> &BoundaryPoint {
        &self.zeta
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn map_label(&self) -> &str {
        &self.map_label
    }

    /// Steps `k(z_n, z_{n+1})` in index order.
    pub fn steps(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| kob_dist_raw(w[0].coords(), w[1].coords()))
            .collect()
    }

    pub fn horofunctions(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| horofunction_raw(p.coords(), self.zeta.coords()))
            .collect()
    }

    pub fn dists_to_zeta(&self) -> Vec<f64> {
        self.points.iter().map(|p| self.zeta.dist_from(p)).collect()
    }

    /// Largest `|f(z_{n+1}) - z_n|` over the segment.
    pub fn backward_residual(&self, f: &SelfMap) -> f64 {
        self.points
            .windows(2)
            .map(|w| numeric::dist_euclid(&f.eval_raw(w[1].coords()), w[0].coords()))
            .fold(0.0, f64::max)
    }

    /// Largest Kobayashi defect `k(f(z_{n+1}), z_n)` over the segment.
    pub fn backward_residual_kobayashi(&self, f: &SelfMap) -> f64 {
        self.points
            .windows(2)
            .map(|w| kob_dist_raw(&f.eval_raw(w[1].coords()), w[0].coords()))
            .fold(0.0, f64::max)
    }

    /// Applies an automorphism pointwise; `g ∘ f ∘ g^{-1}`-orbits become `f`-orbits under `g^{-1}`.
    pub fn transported(
        &self,
        g: &crate::geometry::Automorphism,
        map_label: impl Into<String>,
    ) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|p| g.apply(p))
            .collect::<Result<Vec<_>>>()?;
        let zeta = g.apply_boundary(&self.zeta)?;
        Self::with_first_index(points, self.first_index, zeta, self.lambda, map_label)
    }
}

/// `r_k = (λ^k - 1)/(λ^k + 1) ζ`, which lies on `∂E_k`.
pub fn radial_anchor(zeta: &BoundaryPoint, lambda: f64, k: u32) -> Result<BallPoint> {
    if !(lambda > 1.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "anchor dilation must exceed 1, got {lambda}"
        )));
    }
    let lk = dd(lambda).powi(k as i32);
    let t = ONE - dd(2.0) / (lk + ONE);
    zeta.scaled(t).map_err(|_| {
        Error::Domain(format!(
            "anchor r_{k} for λ = {lambda} is numerically on the sphere"
        ))
    })
}

/// First exit of the forward orbit of `r_k` from `Ē_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingRecord {
    pub k: u32,
    /// `n(k)`; equals the cap when `capped`.
    pub n: usize,
    pub exit: BallPoint,
    /// Horofunction of the exit point; positive unless capped.
    pub exit_margin: f64,
    pub capped: bool,
    /// Forward path `f^0(r_k), ..., f^n(r_k)`.
    pub path: Vec<BallPoint>,
    pub zeta: BoundaryPoint,
}

/// Iterates `f` from `anchor` until the horofunction at `ζ` exceeds `0` strictly.
///
/// Values within [`EXIT_TIE_TOL`] of `0` count as inside `Ē_0`.
pub fn stopping_time(
    f: &SelfMap,
    zeta: &BoundaryPoint,
    anchor: &BallPoint,
    k: u32,
    n_max: usize,
) -> Result<StoppingRecord> {
    crate::error::check_dim(f.dim(), zeta.dim())?;
    let mut path = vec![anchor.clone()];
    let mut h = horofunction_raw(anchor.coords(), zeta.coords());
    while !(h > EXIT_TIE_TOL) && path.len() <= n_max {
        let next = f.apply(path.last().expect("path starts with the anchor"))?;
        h = horofunction_raw(next.coords(), zeta.coords());
        path.push(next);
    }
    let capped = !(h > EXIT_TIE_TOL);
    Ok(StoppingRecord {
        k,
        n: path.len() - 1,
        exit: path.last().expect("non-empty").clone(),
        exit_margin: h,
        capped,
        path,
        zeta: zeta.clone(),
    })
}

/// The backward chain `z_j = f^{n(k)-j}(r_k)`, `j = 0..n(k)`, read off the stored forward path.
pub fn harvest_chain(
    record: &StoppingRecord,
    lambda: Option<f64>,
    map_label: &str,
) -> Result<OrbitSegment> {
    if record.capped {
        return Err(Error::Construction(format!(
            "stopping time for k = {} hit the iteration cap",
            record.k
        )));
    }
    let points: Vec<BallPoint> = record.path.iter().rev().cloned().collect();
    OrbitSegment::new(points, record.zeta.clone(), lambda, map_label)
}
