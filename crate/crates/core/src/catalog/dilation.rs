use crate::catalog::checks::{is_boundary_fixed, BoundaryFixedReport};
use crate::catalog::SelfMap;
use crate::error::{check_dim, Error, Result};
use crate::geometry::metric::kob_dist_raw;
use crate::geometry::{axis_point, BoundaryPoint};
use crate::numeric::{self, inner, to_f64, CX_ZERO};

/// Largest geodesic parameter sampled by [`estimate_dilation`].
pub const DILATION_S_MAX: f64 = 30.0;
const GRID_POINTS: usize = 25;
const GRID_START: f64 = 0.5;
const TAIL_START: f64 = 10.0;
const MIN_LOG_DILATION: f64 = 1e-6;
const MAX_TAIL_SLOPE: f64 = 0.05;
const JACOBIAN_REL_TOL: f64 = 1e-3;

/// Radial estimate of the dilation at a boundary fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationEstimate {
    pub lambda: f64,
    pub log_lambda: f64,
    /// `min d(s)` over the tail `s ≥ 10`.
    pub tail_infimum: f64,
    /// `(s, d(s))` with `d(s) = s - k(0, f(γ(s)))`.
    pub profile: Vec<(f64, f64)>,
    /// `Re <J(γ(s_max)) ζ, ζ>`, when the map has a Jacobian.
    pub jacobian_dilation: Option<f64>,
    /// `|f(γ(s)) - ζ|` along the grid.
    pub radial_residuals: Vec<f64>,
}

fn grid() -> Vec<f64> {
    let ratio = (DILATION_S_MAX / GRID_START).powf(1.0 / (GRID_POINTS - 1) as f64);
    (0..GRID_POINTS)
        .map(|i| {
            if i == GRID_POINTS - 1 {
                DILATION_S_MAX
            } else {
                GRID_START * ratio.powi(i as i32)
            }
        })
        .collect()
}

/// Estimates `λ = exp(liminf [k(0, z) - k(0, f(z))])` at `ζ` along the radius.
///
/// `d(s)` is sampled on a geometric grid up to [`DILATION_S_MAX`]; the last two
/// samples are combined assuming an `e^{-s}` error term. The tail infimum is
/// kept as a diagnostic, and when the Jacobian is available `Re <J ζ, ζ>` at the
/// deepest sample must agree to a relative `1e-3`.
pub fn estimate_dilation(f: &SelfMap, zeta: &BoundaryPoint) -> Result<DilationEstimate> {
    check_dim(f.dim(), zeta.dim())?;
    let origin = vec![CX_ZERO; f.dim()];
    let mut profile = Vec::with_capacity(GRID_POINTS);
    let mut radial_residuals = Vec::with_capacity(GRID_POINTS);
    for s in grid() {
        let z = axis_point(zeta, s)?;
        let w = f.eval_raw(z.coords());
        if numeric::to_f64(numeric::defect(&w)) <= 0.0 {
            return Err(Error::Invariant(format!(
                "{} maps the radius outside the ball at s = {s}",
                f.label()
            )));
        }
        radial_residuals.push(numeric::dist_euclid(&w, zeta.coords()));
        profile.push((s, s - kob_dist_raw(&origin, &w)));
    }
    let last_residual = *radial_residuals.last().expect("grid is non-empty");
    if last_residual > 1e-6 {
        return Err(Error::Domain(format!(
            "ζ is not fixed along the radius (|f(γ({DILATION_S_MAX})) - ζ| = {last_residual:e})"
        )));
    }
    let n = profile.len();
    let (s1, d1) = profile[n - 2];
    let (s2, d2) = profile[n - 1];
    let (s0, d0) = profile[n - 5];
    let slope = (d2 - d0) / (s2 - s0);
    let tail_infimum = profile
        .iter()
        .filter(|(s, _)| *s >= TAIL_START)
        .map(|(_, d)| *d)
        .fold(f64::INFINITY, f64::min);
    if slope > MAX_TAIL_SLOPE {
        return Err(Error::OutOfScope {
            reason: format!("d(s) keeps growing (slope {slope:.3e}); dilation appears infinite"),
            log_dilation: d2,
        });
    }
    let w = (s1 - s2).exp();
    let log_lambda = (d2 - w * d1) / (1.0 - w);
    if !(log_lambda > MIN_LOG_DILATION) {
        return Err(Error::OutOfScope {
            reason: "dilation is not above 1".into(),
            log_dilation: log_lambda,
        });
    }
    let lambda = log_lambda.exp();

    let deepest = axis_point(zeta, DILATION_S_MAX)?;
    let jac = f.jacobian_raw(deepest.coords());
    let jz = jac.mul_vec(zeta.coords());
    let jacobian_dilation = to_f64(inner(&jz, zeta.coords()).re);
    if (jacobian_dilation - lambda).abs() > JACOBIAN_REL_TOL * lambda {
        return Err(Error::Numerical(format!(
            "radial dilation {lambda} disagrees with the boundary derivative {jacobian_dilation}"
        )));
    }
    Ok(DilationEstimate {
        lambda,
        log_lambda,
        tail_infimum,
        profile,
        jacobian_dilation: Some(jacobian_dilation),
        radial_residuals,
    })
}

/// Evidence that `ζ` is a boundary repelling fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct BrfpReport {
    pub zeta: BoundaryPoint,
    pub dilation: f64,
    pub probes: BoundaryFixedReport,
    pub estimate: DilationEstimate,
}

/// K-limit probes plus the radial dilation estimate.
pub fn verify_brfp(f: &SelfMap, zeta: &BoundaryPoint) -> Result<BrfpReport> {
    let probes = is_boundary_fixed(f, zeta, 1e-6)?;
    if !probes.fixed {
        return Err(Error::Domain(format!(
            "{} does not have K-limit ζ at ζ (probe residuals {:?})",
            f.label(),
            probes
                .residuals
                .iter()
                .map(|r| r.last().copied().unwrap_or(f64::NAN))
                .collect::<Vec<_>>()
        )));
    }
    let estimate = estimate_dilation(f, zeta)?;
    Ok(BrfpReport {
        zeta: zeta.clone(),
        dilation: estimate.lambda,
        probes,
        estimate,
    })
}
