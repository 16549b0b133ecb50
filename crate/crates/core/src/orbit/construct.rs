use std::fmt;

use crate::catalog::{ensure_pole_clearance, estimate_dilation, SelfMap};
use crate::error::{check_dim, Error, Result};
use crate::geometry::metric::kob_dist_raw;
use crate::geometry::{BallPoint, BoundaryPoint};
use crate::numeric;
use crate::orbit::{harvest_chain, radial_anchor, stopping_time, OrbitSegment, EXIT_TIE_TOL};

/// How chains harvested at different `k` are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstructionMode {
    /// Keep the single longest chain that passes all checks.
    #[default]
    SingleTail,
    /// Pick, at each depth, the medoid of the largest cluster of candidates.
    Cluster,
}

impl fmt::Display for ConstructionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstructionMode::SingleTail => "single-tail",
            ConstructionMode::Cluster => "cluster",
        })
    }
}

impl std::str::FromStr for ConstructionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single-tail" | "single_tail" => Ok(Self::SingleTail),
            "cluster" => Ok(Self::Cluster),
            other => Err(Error::Parse(format!("unknown construction mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitParams {
    pub k_min: u32,
    pub k_max: u32,
    pub n_max: usize,
    /// Allowed gap between the deepest step and `log λ`.
    pub eps_sigma: f64,
    /// Required `|z_N - ζ|` at the deep end of the orbit.
    pub dist_target: f64,
    /// Kobayashi radius used to group candidates in cluster mode.
    pub rho_cluster: f64,
    /// Largest `|f(w_j) - w_{j-1}|` accepted for a clustered orbit.
    pub tol_cluster: f64,
    pub mode: ConstructionMode,
}

impl Default for OrbitParams {
    fn default() -> Self {
        Self {
            k_min: 1,
            k_max: 40,
            n_max: super::DEFAULT_N_MAX,
            eps_sigma: 1e-3,
            dist_target: 1e-4,
            rho_cluster: 0.1,
            tol_cluster: 1e-6,
            mode: ConstructionMode::SingleTail,
        }
    }
}

impl OrbitParams {
    fn validate(&self) -> Result<()> {
        if self.k_min > self.k_max {
            return Err(Error::Config(format!(
                "k_min = {} exceeds k_max = {}",
                self.k_min, self.k_max
            )));
        }
        for (name, v) in [
            ("eps_sigma", self.eps_sigma),
            ("dist_target", self.dist_target),
            ("rho_cluster", self.rho_cluster),
            ("tol_cluster", self.tol_cluster),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_max == 0 {
            return Err(Error::Config("n_max must be positive".into()));
        }
        Ok(())
    }
}

/// Per-chain checks behind the choice of the final orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDiagnostics {
    pub k: u32,
    pub n: usize,
    pub capped: bool,
    pub exit_margin: f64,
    /// Step at the deep end of the chain.
    pub sigma_tail: Option<f64>,
    pub steps_monotone: bool,
    /// `z_0` outside `Ē_0` and every later point inside it.
    pub horoball_ordering: bool,
    /// Horofunction strictly decreasing in `j`.
    pub horo_decreasing: bool,
    /// `k(r_k, f(r_k))`, an upper bound for every step of the chain.
    pub anchor_step: f64,
    pub steps_below_anchor_step: bool,
    pub final_dist: f64,
    pub passed: bool,
    pub reason: Option<String>,
}

/// Orbit plus the evidence collected while building it.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardOrbitResult {
    pub orbit: OrbitSegment,
    pub mode: ConstructionMode,
    /// Largest step along the orbit.
    pub sigma_hat: f64,
    pub log_lambda: f64,
    pub chosen_k: Option<u32>,
    pub chains: Vec<ChainDiagnostics>,
    pub warnings: Vec<String>,
}

fn monotone_tol(d: f64) -> f64 {
    1e-12 * (1.0 + d.abs())
}

fn diagnose(
    f: &SelfMap,
    orbit: &OrbitSegment,
    k: u32,
    n: usize,
    exit_margin: f64,
    log_lambda: f64,
    params: &OrbitParams,
) -> ChainDiagnostics {
    let steps = orbit.steps();
    let h = orbit.horofunctions();
    let final_dist = *orbit.dists_to_zeta().last().expect("non-empty orbit");
    let sigma_tail = steps.last().copied();
    let steps_monotone = steps.windows(2).all(|w| w[0] <= w[1] + monotone_tol(w[1]));
    let horoball_ordering = h[0] > EXIT_TIE_TOL && h[1..].iter().all(|v| *v <= EXIT_TIE_TOL);
    let horo_decreasing = h.windows(2).all(|w| w[1] < w[0]);
    let deep = orbit.points().last().expect("non-empty orbit");
    let anchor_step = kob_dist_raw(deep.coords(), &f.eval_raw(deep.coords()));
    let steps_below_anchor_step = steps
        .iter()
        .all(|d| *d <= anchor_step + monotone_tol(anchor_step));
    let mut reason = None;
    if let Some(s) = sigma_tail {
        if (s - log_lambda).abs() > params.eps_sigma {
            reason = Some(format!(
                "deepest step {s:.6e} is not within ε of log λ = {log_lambda:.6e}"
            ));
        }
    } else {
        reason = Some("chain has a single point".into());
    }
    if reason.is_none() && !steps_monotone {
        reason = Some("steps decrease along the chain".into());
    }
    if reason.is_none() && !horo_decreasing {
        reason = Some("horofunction does not decrease along the chain".into());
    }
    if reason.is_none() && !horoball_ordering {
        reason = Some("chain is not ordered by the horoball E_0".into());
    }
    if reason.is_none() && !(final_dist < params.dist_target) {
        reason = Some(format!("deep end is {final_dist:.3e} from ζ"));
    }
    ChainDiagnostics {
        k,
        n,
        capped: false,
        exit_margin,
        sigma_tail,
        steps_monotone,
        horoball_ordering,
        horo_decreasing,
        anchor_step,
        steps_below_anchor_step,
        final_dist,
        passed: reason.is_none(),
        reason,
    }
}

/// Builds a backward orbit of `f` converging to the boundary repelling fixed
/// point `ζ` of dilation `λ`.
///
/// For each `k` in `k_min..=k_max` the anchor `r_k` is iterated forward until it
/// leaves `Ē_0`; the reversed path is a backward chain `z_0, ..., z_{n(k)}`.
/// The map is expected to be pole-cleared at `ζ`, see [`construct_with_clearance`].
pub fn construct_backward_orbit(
    f: &SelfMap,
    zeta: &BoundaryPoint,
    lambda: f64,
    params: &OrbitParams,
) -> Result<BackwardOrbitResult> {
    check_dim(f.dim(), zeta.dim())?;
    params.validate()?;
    if !(lambda > 1.0) {
        return Err(Error::Domain(format!(
            "dilation must exceed 1, got {lambda}"
        )));
    }
    let log_lambda = lambda.ln();
    let mut chains = Vec::new();
    let mut diagnostics = Vec::new();
    for k in params.k_min..=params.k_max {
        let anchor = radial_anchor(zeta, lambda, k)?;
        let rec = stopping_time(f, zeta, &anchor, k, params.n_max)?;
        if rec.capped {
            diagnostics.push(ChainDiagnostics {
                k,
                n: rec.n,
                capped: true,
                exit_margin: rec.exit_margin,
                sigma_tail: None,
                steps_monotone: false,
                horoball_ordering: false,
                horo_decreasing: false,
                anchor_step: f64::NAN,
                steps_below_anchor_step: false,
                final_dist: zeta.dist_from(&anchor),
                passed: false,
                reason: Some(format!(
                    "no exit from Ē_0 within {} iterations",
                    params.n_max
                )),
            });
            continue;
        }
        let chain = harvest_chain(&rec, Some(lambda), f.label())?;
        diagnostics.push(diagnose(
            f,
            &chain,
            k,
            rec.n,
            rec.exit_margin,
            log_lambda,
            params,
        ));
        chains.push((k, chain));
    }

    let mut warnings = Vec::new();
    if params.mode == ConstructionMode::Cluster {
        match cluster_orbit(f, &chains, params) {
            Ok(orbit) => {
                let d = diagnose(
                    f,
                    &orbit,
                    params.k_max,
                    orbit.len() - 1,
                    0.0,
                    log_lambda,
                    params,
                );
                if d.passed {
                    let sigma_hat = max_step(&orbit);
                    return Ok(BackwardOrbitResult {
                        orbit,
                        mode: ConstructionMode::Cluster,
                        sigma_hat,
                        log_lambda,
                        chosen_k: None,
                        chains: diagnostics,
                        warnings,
                    });
                }
                warnings.push(format!(
                    "clustered orbit failed its checks ({}); falling back to single-tail",
                    d.reason.unwrap_or_default()
                ));
            }
            Err(e) => warnings.push(format!("{e}; falling back to single-tail")),
        }
    }

    let best = chains
        .iter()
        .zip(diagnostics.iter().filter(|d| !d.capped))
        .filter(|(_, d)| d.passed)
        .max_by_key(|((k, c), _)| (c.len(), *k));
    let Some(((k, chain), _)) = best else {
        let summary: Vec<String> = diagnostics
            .iter()
            .map(|d| format!("k={}: {}", d.k, d.reason.as_deref().unwrap_or("ok")))
            .collect();
        return Err(Error::Construction(format!(
            "no chain passed the checks [{}]",
            summary.join("; ")
        )));
    };
    let orbit = chain.clone();
    Ok(BackwardOrbitResult {
        sigma_hat: max_step(&orbit),
        orbit,
        mode: ConstructionMode::SingleTail,
        log_lambda,
        chosen_k: Some(*k),
        chains: diagnostics,
        warnings,
    })
}

fn max_step(orbit: &OrbitSegment) -> f64 {
    orbit.steps().into_iter().fold(0.0, f64::max)
}

fn cluster_orbit(
    f: &SelfMap,
    chains: &[(u32, OrbitSegment)],
    params: &OrbitParams,
) -> Result<OrbitSegment> {
    let Some((_, first)) = chains.first() else {
        return Err(Error::Construction("no uncapped chains to cluster".into()));
    };
    let depth_max = chains
        .iter()
        .map(|(k, c)| (*k as usize).min(c.len() - 1))
        .max()
        .expect("non-empty");
    let mut points: Vec<BallPoint> = Vec::with_capacity(depth_max + 1);
    for j in 0..=depth_max {
        let candidates: Vec<&BallPoint> = chains
            .iter()
            .filter(|(k, c)| *k as usize >= j && c.len() > j)
            .map(|(_, c)| &c.points()[j])
            .collect();
        points.push(medoid_of_largest_cluster(&candidates, params.rho_cluster).clone());
    }
    let orbit = OrbitSegment::new(points, first.zeta().clone(), first.lambda(), f.label())?;
    let residual = orbit.backward_residual(f);
    if !(residual < params.tol_cluster) {
        return Err(Error::Construction(format!(
            "clustered orbit has backward residual {residual:.3e}"
        )));
    }
    Ok(orbit)
}

fn medoid_of_largest_cluster<'a>(candidates: &[&'a BallPoint], rho: f64) -> &'a BallPoint {
    let n = candidates.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = kob_dist_raw(candidates[i].coords(), candidates[j].coords());
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    // cluster = neighbourhood of the point with the most neighbours; ties go to the deepest anchor
    let center = (0..n)
        .max_by_key(|&i| ((0..n).filter(|&j| dist[i * n + j] <= rho).count(), i))
        .expect("at least one candidate");
    let members: Vec<usize> = (0..n).filter(|&j| dist[center * n + j] <= rho).collect();
    let medoid = members
        .iter()
        .copied()
        .min_by(|&a, &b| {
            let sa: f64 = members.iter().map(|&m| dist[a * n + m]).sum();
            let sb: f64 = members.iter().map(|&m| dist[b * n + m]).sum();
            sa.total_cmp(&sb).then(b.cmp(&a))
        })
        .expect("cluster contains its center");
    candidates[medoid]
}

/// Backward orbit of `f` itself, built on a pole-cleared conjugate.
#[derive(Debug, Clone, PartialEq)]
pub struct ClearedOrbit {
    /// Orbit of the pole-cleared map `h ∘ f ∘ h^{-1}`.
    pub cleared: BackwardOrbitResult,
    /// The same orbit transported back by `h^{-1}`; an orbit of `f`.
    pub original: OrbitSegment,
    pub translation: f64,
    pub lambda: f64,
    pub map: SelfMap,
}

/// Estimates `λ`, clears the forward dynamics out of `Ē_0`, constructs the orbit
/// and transports it back to `f`.
pub fn construct_with_clearance(
    f: &SelfMap,
    zeta: &BoundaryPoint,
    params: &OrbitParams,
) -> Result<ClearedOrbit> {
    let lambda = match f.known_dilation(zeta) {
        Some(l) => l,
        None => estimate_dilation(f, zeta)?.lambda,
    };
    let clearance = ensure_pole_clearance(f, zeta)?;
    let cleared = construct_backward_orbit(&clearance.map, zeta, lambda, params)?;
    let original = cleared
        .orbit
        .transported(&clearance.conjugator.inverse(), f.label())?;
    let residual = original.backward_residual(f);
    let scale = original
        .points()
        .iter()
        .map(|p| numeric::to_f64(p.defect()))
        .fold(f64::INFINITY, f64::min);
    // h^{-1} is Euclidean-Lipschitz with constant e^{|t|}, so the cleared
    // residual (nonzero in cluster mode) may grow by that factor
    let inherited =
        clearance.translation.abs().exp() * cleared.orbit.backward_residual(&clearance.map);
    if !(residual <= 1e-20_f64.max(1e-6 * scale))
        && !(residual < 1e-12)
        && !(residual <= inherited * (1.0 + 1e-6) + 1e-15)
    {
        return Err(Error::Numerical(format!(
            "transported orbit has backward residual {residual:.3e}"
        )));
    }
    Ok(ClearedOrbit {
        cleared,
        original,
        translation: clearance.translation,
        lambda,
        map: clearance.map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{cx_real, dd, CX_ONE, CX_ZERO};

    fn blaschke() -> SelfMap {
        SelfMap::blaschke(vec![CX_ZERO, cx_real(dd(1.0) / dd(3.0))], CX_ONE).unwrap()
    }

    #[test]
    fn hyperbolic_orbit_is_exact() {
        let f = SelfMap::disc_hyperbolic(CX_ONE, 3.0).unwrap();
        let zeta = BoundaryPoint::e1(1);
        let r = construct_backward_orbit(&f, &zeta, 3.0, &OrbitParams::default()).unwrap();
        assert_eq!(r.chosen_k, Some(40));
        assert_eq!(r.orbit.len(), 42);
        assert!((r.sigma_hat - 3f64.ln()).abs() < 1e-12);
        assert!(r.chains.iter().all(|d| d.n == d.k as usize + 1));
        assert!(r
            .orbit
            .steps()
            .iter()
            .all(|d| (d - 3f64.ln()).abs() < 1e-10));
    }

    #[test]
    fn cleared_blaschke_orbit() {
        let b = blaschke();
        let zeta = BoundaryPoint::e1(1);
        let c = construct_with_clearance(&b, &zeta, &OrbitParams::default()).unwrap();
        assert!((c.translation - 0.25).abs() < 1e-15);
        let o = &c.cleared.orbit;
        assert!(o.len() > 30);
        assert!(o.backward_residual(&c.map) < 1e-25);
        assert!((c.cleared.sigma_hat - 3f64.ln()).abs() < 1e-3);
        assert!(c.original.backward_residual(&b) < 1e-20);
        assert!(*c.original.dists_to_zeta().last().unwrap() < 1e-4);
        assert!(c.cleared.chains.iter().all(|d| d.steps_below_anchor_step));
        assert!(c
            .cleared
            .chains
            .iter()
            .filter(|d| d.k >= 1 && d.k <= 30)
            .all(|d| d.n > d.k as usize));
    }

    #[test]
    fn warped_product_orbit_flattens_second_coordinate() {
        let b = blaschke();
        let w = SelfMap::warped_product(b, numeric::cx(0.5, 0.0), 2).unwrap();
        let zeta = BoundaryPoint::e1(2);
        let c = construct_with_clearance(&w, &zeta, &OrbitParams::default()).unwrap();
        let last = c.cleared.orbit.points().last().unwrap();
        assert!(numeric::to_f64(last.coords()[1].norm_sqr()) < 1e-20);
        assert!(*c.cleared.orbit.dists_to_zeta().last().unwrap() < 1e-4);
    }

    #[test]
    fn cluster_mode_agrees_with_single_tail_near_the_exit() {
        let b = blaschke();
        let zeta = BoundaryPoint::e1(1);
        let cleared = ensure_pole_clearance(&b, &zeta).unwrap().map;
        let single =
            construct_backward_orbit(&cleared, &zeta, 3.0, &OrbitParams::default()).unwrap();
        let params = OrbitParams {
            mode: ConstructionMode::Cluster,
            ..OrbitParams::default()
        };
        let cl = construct_backward_orbit(&cleared, &zeta, 3.0, &params).unwrap();
        assert!(cl.orbit.backward_residual(&cleared) < 1e-6);
        let d = kob_dist_raw(
            cl.orbit.points()[0].coords(),
            single.orbit.points()[0].coords(),
        );
        assert!(d < 0.1, "{d} {:?}", cl.warnings);
    }

    #[test]
    fn bad_params_and_missing_exit() {
        let f = SelfMap::disc_hyperbolic(CX_ONE, 3.0).unwrap();
        let zeta = BoundaryPoint::e1(1);
        let bad = OrbitParams {
            k_min: 5,
            k_max: 2,
            ..OrbitParams::default()
        };
        assert!(matches!(
            construct_backward_orbit(&f, &zeta, 3.0, &bad),
            Err(Error::Config(_))
        ));
        let id = SelfMap::identity(1).unwrap();
        let p = OrbitParams {
            n_max: 20,
            k_max: 5,
            ..OrbitParams::default()
        };
        assert!(matches!(
            construct_backward_orbit(&id, &zeta, 3.0, &p),
            Err(Error::Construction(_))
        ));
    }
}
