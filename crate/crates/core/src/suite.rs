//! The acceptance battery behind `borbit suite`.
//!
//! Two catalog maps are used throughout: the disc automorphism hyperbolic at `1`
//! with dilation `3`, and the Blaschke product `z (z - 1/3)/(1 - z/3)` made
//! pole-cleared at `1`. Everything is seeded, so the report is byte-for-byte
//! reproducible.

use crate::analysis::{
    orbit_distance_profile, premodel_validate, region_equivalence_check, shift_recovery,
    tube_covering_check, CheckLine, Intertwiner, PreModel, Report,
};
use crate::catalog::{ensure_pole_clearance, SelfMap};
use crate::error::Result;
use crate::geometry::metric::horofunction_raw;
use crate::geometry::sampling::{in_horoball, seeded};
use crate::geometry::{horofunction, Automorphism, BoundaryPoint};
use crate::numeric::{cx, cx_real, dd, CMatrix, CX_ONE, CX_ZERO};
use crate::orbit::{
    backward_orbit_via_preimages, construct_backward_orbit, kobayashi_offset, radial_anchor,
    stopping_time, OrbitParams, PreimageParams, DEFAULT_N_MAX,
};

pub const DEFAULT_SEED: u64 = 20_240_917;
pub const JULIA_SAMPLES: usize = 10_000;
pub const REGION_SAMPLES: usize = 10_000;
pub const TUBE_SAMPLES: usize = 1_000;
pub const TUBE_WIDTH: f64 = 1.0;
pub const PERTURBATION: f64 = 0.05;
pub const MAX_SHIFT: usize = 6;

/// The disc automorphism `(z - 1/2)/(1 - z/2)`: hyperbolic, repelling at `1` with dilation `3`.
pub fn hyperbolic_map() -> Result<SelfMap> {
    Ok(SelfMap::disc_hyperbolic(CX_ONE, 3.0)?.with_label("hyperbolic(1,3)"))
}

/// `z (z - 1/3)/(1 - z/3)`; boundary repelling at `1` with dilation `3`, interior fixed point `0`.
pub fn blaschke_map() -> Result<SelfMap> {
    let b = SelfMap::blaschke(vec![CX_ZERO, cx_real(dd(1.0) / dd(3.0))], CX_ONE)?;
    Ok(b.with_known_fixed_point(BoundaryPoint::e1(1), 3.0)?
        .with_label("blaschke(a=1/3)"))
}

pub fn cleared_blaschke() -> Result<SelfMap> {
    let zeta = BoundaryPoint::e1(1);
    let b = blaschke_map()?;
    let c = ensure_pole_clearance(&b, &zeta)?;
    Ok(c.map
        .with_known_fixed_point(zeta, 3.0)?
        .with_label("blaschke(a=1/3) cleared"))
}

/// `(φ(z1), z2/2)` on `B^2` with `φ` the hyperbolic disc automorphism, and its
/// one-dimensional pre-model `τ = hyperbolic(i, λ_τ)`, `ℓ(w) = (-i w, 0)`.
pub fn warped_product_with_premodel(lambda_tau: f64) -> Result<(SelfMap, PreModel)> {
    let f = SelfMap::warped_product(hyperbolic_map()?, cx(0.5, 0.0), 2)?
        .with_label("warped(hyperbolic(1,3), 1/2)");
    let r = BoundaryPoint::from_c64(&[num_complex::Complex64::new(0.0, 1.0)])?;
    let tau = Automorphism::hyperbolic(&r, lambda_tau)?;
    let mut u = CMatrix::identity(1);
    u.set(0, 0, cx(0.0, -1.0));
    let rot = SelfMap::automorphism(Automorphism::from_unitary(u)?);
    let ell = Intertwiner::new(rot, Automorphism::identity(2))?;
    Ok((f, PreModel::new(ell, tau, r)?))
}

/// Criterion 1: `h(r_k, e_1) = -k log λ`.
pub fn check_anchor_levels() -> Result<Report> {
    let mut worst: f64 = 0.0;
    for q in [1usize, 2] {
        let e1 = BoundaryPoint::e1(q);
        for lambda in [1.5, 3.0, 10.0] {
            for k in 0..=20u32 {
                let r = radial_anchor(&e1, lambda, k)?;
                let h = horofunction(&r, &e1)?;
                worst = worst.max((h + k as f64 * lambda.ln()).abs());
            }
        }
    }
    let mut rep = Report::new();
    rep.push(CheckLine::from_margin("c1.anchor_levels", 1e-12 - worst));
    Ok(rep)
}

/// Criterion 2: `|k(r_40, f(r_40)) - log λ| < 1e-3`.
pub fn check_anchor_step() -> Result<Report> {
    let zeta = BoundaryPoint::e1(1);
    let mut rep = Report::new();
    for (name, f) in [
        ("hyperbolic", hyperbolic_map()?),
        ("blaschke", cleared_blaschke()?),
    ] {
        let r = radial_anchor(&zeta, 3.0, 40)?;
        let d = crate::geometry::kob_dist(&r, &f.apply(&r)?)?;
        rep.push(CheckLine::from_margin(
            format!("c2.anchor_step.{name}"),
            1e-3 - (d - 3f64.ln()).abs(),
        ));
    }
    Ok(rep)
}

/// Criterion 3: `f(E_k) ⊂ E_{k-1}` on sampled horoball points.
pub fn check_julia(seed: u64) -> Result<Report> {
    let zeta = BoundaryPoint::e1(1);
    let log3 = 3f64.ln();
    let mut rep = Report::new();
    for (name, f) in [
        ("hyperbolic", hyperbolic_map()?),
        ("blaschke", cleared_blaschke()?),
    ] {
        let mut rng = seeded(seed);
        let mut violations = 0usize;
        let mut worst = f64::INFINITY;
        for i in 0..JULIA_SAMPLES {
            let k = (i % 6) as f64;
            let z = in_horoball(&mut rng, &zeta, k * log3, 1.0);
            let w = f.eval_raw(z.coords());
            let margin = -(k - 1.0) * log3 - horofunction_raw(&w, zeta.coords());
            if margin <= -1e-9 {
                violations += 1;
            }
            worst = worst.min(margin);
        }
        rep.push(CheckLine::new(
            format!("c3.julia.{name}"),
            violations == 0,
            worst,
        ));
    }
    Ok(rep)
}

/// Criterion 4: `n(k) > k` on the cleared Blaschke map, `n(k) = k + 1` for the automorphism.
pub fn check_stopping_times() -> Result<Report> {
    let zeta = BoundaryPoint::e1(1);
    let h = hyperbolic_map()?;
    let b = cleared_blaschke()?;
    let mut exact = true;
    let mut min_gap = i64::MAX;
    for k in 1..=30u32 {
        let r = radial_anchor(&zeta, 3.0, k)?;
        let nh = stopping_time(&h, &zeta, &r, k, DEFAULT_N_MAX)?;
        exact &= !nh.capped && nh.n == k as usize + 1;
        let nb = stopping_time(&b, &zeta, &r, k, DEFAULT_N_MAX)?;
        let gap = if nb.capped {
            i64::MIN
        } else {
            nb.n as i64 - k as i64
        };
        min_gap = min_gap.min(gap);
    }
    let mut rep = Report::new();
    rep.push(CheckLine::new(
        "c4.stopping.hyperbolic_exact",
        exact,
        if exact { 1.0 } else { -1.0 },
    ));
    rep.push(CheckLine::new(
        "c4.stopping.blaschke_gap",
        min_gap > 0,
        min_gap as f64,
    ));
    Ok(rep)
}

fn cleared_orbit() -> Result<(SelfMap, crate::orbit::BackwardOrbitResult)> {
    let b = cleared_blaschke()?;
    let r = construct_backward_orbit(&b, &BoundaryPoint::e1(1), 3.0, &OrbitParams::default())?;
    Ok((b, r))
}

/// Criterion 5: the constructed orbit of the cleared Blaschke map.
pub fn check_construction() -> Result<Report> {
    let (b, r) = cleared_orbit()?;
    let o = &r.orbit;
    let steps = o.steps();
    let tail = *steps.last().expect("orbit has steps");
    let monotone = steps
        .windows(2)
        .map(|w| w[1] - w[0] + 1e-12)
        .fold(f64::INFINITY, f64::min);
    let depth25 = o
        .get(25)
        .map(|z| o.zeta().dist_from(z))
        .unwrap_or(f64::INFINITY);
    let mut rep = Report::new();
    rep.push(CheckLine::from_margin(
        "c5.residual",
        1e-10 - o.backward_residual(&b),
    ));
    rep.push(CheckLine::from_margin(
        "c5.step_tail",
        1e-3 - (tail - 3f64.ln()).abs(),
    ));
    rep.push(CheckLine::new(
        "c5.step_monotone",
        monotone >= 0.0,
        monotone,
    ));
    rep.push(CheckLine::from_margin("c5.depth25", 1e-4 - depth25));
    Ok(rep)
}

/// Criterion 6: construction orbit against a Newton orbit from a perturbed seed.
pub fn check_comparison() -> Result<Report> {
    let (b, r) = cleared_orbit()?;
    let x = &r.orbit;
    let zeta = x.zeta().clone();
    let dir: Vec<_> = zeta
        .coords()
        .iter()
        .map(|c| *c * crate::numeric::CX_I)
        .collect();
    let y0 = kobayashi_offset(&x.points()[0], &dir, PERTURBATION)?;
    let y =
        backward_orbit_via_preimages(&b, &y0, &zeta, 3.0, x.len() - 1, &PreimageParams::default())?;
    let cmp = orbit_distance_profile(&b, x, &y)?;
    let shift = shift_recovery(&b, x, &y, MAX_SHIFT);
    let mut rep = Report::new();
    rep.push(CheckLine::from_margin(
        "c6.newton_residual",
        1e-10 - y.backward_residual(&b),
    ));
    rep.push(CheckLine::from_margin(
        "c6.plateau",
        crate::analysis::EPS_PLATEAU - cmp.last_quarter_increase,
    ));
    rep.push(CheckLine::new(
        "c6.shifted_profile",
        cmp.shifted_below_direct && cmp.shifted_monotone,
        cmp.c_shifted,
    ));
    match shift {
        Ok(s) => rep.push(CheckLine::from_margin(
            "c6.shift_certified",
            s.certified_bound - s.direct_max + 1e-9,
        )),
        Err(_) => rep.push(CheckLine::new("c6.shift_certified", false, -1.0)),
    }
    Ok(rep)
}

/// Criterion 7: `A(γ, L) ⊂ K(ζ, e^L)`.
pub fn check_regions(seed: u64) -> Result<Report> {
    let mut rep = Report::new();
    for (i, l) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let zeta = BoundaryPoint::e1(2);
        let r = region_equivalence_check(&zeta, &[], l, l.exp(), REGION_SAMPLES, seed + i as u64)?;
        rep.push(CheckLine::new(
            format!("c7.tube_in_koranyi.L{l}"),
            r.passed(),
            r.margin,
        ));
    }
    Ok(rep)
}

/// Criterion 8: covering radius of `A(γ, L)` by the two orbits.
pub fn check_tube(seed: u64) -> Result<Report> {
    let zeta = BoundaryPoint::e1(1);
    let h = hyperbolic_map()?;
    let axial = construct_backward_orbit(&h, &zeta, 3.0, &OrbitParams::default())?.orbit;
    let ta = tube_covering_check(&axial, TUBE_WIDTH, TUBE_SAMPLES, seed)?;
    let (_, r) = cleared_orbit()?;
    let tb = tube_covering_check(&r.orbit, TUBE_WIDTH, TUBE_SAMPLES, seed)?;
    let mut rep = Report::new();
    rep.push(CheckLine::from_margin(
        "c8.tube.hyperbolic",
        TUBE_WIDTH + ta.sigma_hat + 1e-6 - ta.r_hat,
    ));
    rep.push(CheckLine::from_margin("c8.tube.blaschke", tb.margin()));
    Ok(rep)
}

/// Criterion 9: pre-model validation, honest and corrupted.
pub fn check_premodel(seed: u64) -> Result<Report> {
    let zeta = BoundaryPoint::e1(2);
    let (f, good) = warped_product_with_premodel(3.0)?;
    let mut rep = premodel_validate(&f, &good, &zeta, seed)?.report;
    let (_, bad) = warped_product_with_premodel(3.0 * 1.1)?;
    let bad = premodel_validate(&f, &bad, &zeta, seed)?;
    let ii = bad
        .report
        .get("premodel.dilation")
        .expect("dilation check present");
    rep.push(CheckLine::new(
        "premodel.corrupted_rejected",
        !ii.passed,
        -ii.margin,
    ));
    Ok(rep)
}

/// Criteria 1-9 in order.
pub fn run_suite(seed: u64) -> Result<Report> {
    let mut rep = check_anchor_levels()?;
    rep.extend(check_anchor_step()?);
    rep.extend(check_julia(seed)?);
    rep.extend(check_stopping_times()?);
    rep.extend(check_construction()?);
    rep.extend(check_comparison()?);
    rep.extend(check_regions(seed)?);
    rep.extend(check_tube(seed)?);
    rep.extend(check_premodel(seed)?);
    Ok(rep)
}
