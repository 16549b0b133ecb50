//! Catalog of holomorphic self-maps of the ball with analytic Jacobians.

mod checks;
mod dilation;
mod dynamics;

pub use checks::{
    is_boundary_fixed, jacobian_consistency, koranyi_probes, self_map_check, BoundaryFixedReport,
    SelfMapCheck, PROBE_DEPTHS,
};
pub use dilation::{estimate_dilation, verify_brfp, BrfpReport, DilationEstimate, DILATION_S_MAX};
pub use dynamics::{
    classify_dynamics, ensure_pole_clearance, DynamicsClass, DynamicsKind, PoleClearance,
    CLEARANCE_MARGIN,
};

use std::fmt;

use crate::error::{check_dim, Error, Result};
use crate::geometry::{Automorphism, BallPoint, BoundaryPoint};
use crate::numeric::{self, cx_real, CMatrix, Cx, CX_ONE, CX_ZERO, ONE};

/// How a catalog map is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    Identity,
    Automorphism(Automorphism),
    /// `rotation * prod (z - a_i) / (1 - conj(a_i) z)` on the disc.
    Blaschke {
        zeros: Vec<Cx>,
        rotation: Cx,
    },
    /// `(φ(z_1), c z')` with `φ` a disc self-map.
    WarpedProduct {
        phi: Box<SelfMap>,
        c: Cx,
    },
    /// `g ∘ f ∘ g^{-1}`; `g_inv` caches the inverse.
    Conjugate {
        g: Automorphism,
        g_inv: Automorphism,
        f: Box<SelfMap>,
    },
    /// `maps[0] ∘ maps[1] ∘ ...`.
    Compose(Vec<SelfMap>),
    Iterate {
        f: Box<SelfMap>,
        n: u32,
    },
    /// `z ↦ c z`; only a self-map when `|c| ≤ 1`, which is not enforced.
    Linear {
        c: Cx,
    },
}

/// A boundary fixed point with its dilation, recorded when known in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownFixedPoint {
    pub zeta: BoundaryPoint,
    pub dilation: f64,
}

/// Holomorphic self-map of `B^q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfMap {
    dim: usize,
    kind: MapKind,
    label: String,
    known: Vec<KnownFixedPoint>,
}

impl SelfMap {
    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        Ok(Self {
            dim,
            kind: MapKind::Identity,
            label: format!("identity(q={dim})"),
            known: Vec::new(),
        })
    }

    pub fn automorphism(g: Automorphism) -> Self {
        let mut known = Vec::new();
        if let Some(nf) = g.normal_form() {
            known.push(KnownFixedPoint {
                zeta: nf.fixed.clone(),
                dilation: nf.dilation,
            });
        }
        Self {
            dim: g.dim(),
            label: format!("automorphism(q={})", g.dim()),
            kind: MapKind::Automorphism(g),
            known,
        }
    }

    /// Disc hyperbolic automorphism repelling at `ζ` (unimodular) with dilation `λ`.
    pub fn disc_hyperbolic(zeta: Cx, lambda: f64) -> Result<Self> {
        let z = BoundaryPoint::new(vec![zeta])?;
        let g = Automorphism::hyperbolic(&z, lambda)?;
        let mut m = Self::automorphism(g);
        m.label = format!("mobius(zeta={}, lambda={lambda})", fmt_cx(zeta));
        Ok(m)
    }

    /// Finite Blaschke product on the disc.
    pub fn blaschke(zeros: Vec<Cx>, rotation: Cx) -> Result<Self> {
        if zeros.is_empty() {
            return Err(Error::Config(
                "Blaschke product needs at least one factor".into(),
            ));
        }
        for a in &zeros {
            if numeric::to_f64(ONE - a.norm_sqr()) <= 0.0 {
                return Err(Error::Config(format!(
                    "Blaschke zero {} is not inside the disc",
                    fmt_cx(*a)
                )));
            }
        }
        let m = numeric::to_f64(rotation.norm_sqr());
        if (m - 1.0).abs() > 1e-12 {
            return Err(Error::Config("Blaschke rotation must be unimodular".into()));
        }
        let label = format!(
            "blaschke(zeros=[{}])",
            zeros
                .iter()
                .map(|a| fmt_cx(*a))
                .collect::<Vec<_>>()
                .join("; ")
        );
        Ok(Self {
            dim: 1,
            kind: MapKind::Blaschke { zeros, rotation },
            label,
            known: Vec::new(),
        })
    }

    /// `(φ(z_1), c z')` in `B^dim`; requires `|c|^2 ≤ (1 - |φ(0)|)/(1 + |φ(0)|)`.
    pub fn warped_product(phi: SelfMap, c: Cx, dim: usize) -> Result<Self> {
        if phi.dim != 1 {
            return Err(Error::Config(
                "warped product needs a disc map for φ".into(),
            ));
        }
        if dim < 2 {
            return Err(Error::Config(
                "warped product needs dimension at least 2".into(),
            ));
        }
        let p0 = numeric::to_f64(phi.eval_raw(&[CX_ZERO])[0].norm_sqr().sqrt());
        let bound = (1.0 - p0) / (1.0 + p0);
        let cc = numeric::to_f64(c.norm_sqr());
        if cc > bound * (1.0 + 1e-14) {
            return Err(Error::Config(format!(
                "warped product inadmissible: |c|^2 = {cc} exceeds (1-|φ(0)|)/(1+|φ(0)|) = {bound}"
            )));
        }
        let known = phi
            .known
            .iter()
            .map(|k| {
                let mut z = vec![CX_ZERO; dim];
                z[0] = k.zeta.coords()[0];
                KnownFixedPoint {
                    zeta: BoundaryPoint::new(z).expect("unit first coordinate"),
                    dilation: k.dilation,
                }
            })
            .collect();
        Ok(Self {
            dim,
            label: format!("warped({}, c={})", phi.label, fmt_cx(c)),
            kind: MapKind::WarpedProduct {
                phi: Box::new(phi),
                c,
            },
            known,
        })
    }

    /// `g ∘ f ∘ g^{-1}`.
    pub fn conjugate(f: SelfMap, g: Automorphism) -> Result<Self> {
        check_dim(f.dim, g.dim())?;
        let known = f
            .known
            .iter()
            .filter_map(|k| {
                g.apply_boundary(&k.zeta).ok().map(|zeta| KnownFixedPoint {
                    zeta,
                    dilation: k.dilation,
                })
            })
            .collect();
        Ok(Self {
            dim: f.dim,
            label: format!("conj({})", f.label),
            kind: MapKind::Conjugate {
                g_inv: g.inverse(),
                g,
                f: Box::new(f),
            },
            known,
        })
    }

    /// `maps[0] ∘ maps[1] ∘ ...`.
    pub fn compose(maps: Vec<SelfMap>) -> Result<Self> {
        let first = maps
            .first()
            .ok_or_else(|| Error::Config("composition of zero maps".into()))?;
        let dim = first.dim;
        for m in &maps {
            check_dim(dim, m.dim)?;
        }
        let mut known = Vec::new();
        for k in &first.known {
            let mut lambda = 1.0;
            let all = maps.iter().all(|m| {
                m.known
                    .iter()
                    .find(|o| numeric::dist_euclid(o.zeta.coords(), k.zeta.coords()) < 1e-12)
                    .map(|o| lambda *= o.dilation)
                    .is_some()
            });
            if all {
                known.push(KnownFixedPoint {
                    zeta: k.zeta.clone(),
                    dilation: lambda,
                });
            }
        }
        Ok(Self {
            dim,
            label: format!(
                "compose({})",
                maps.iter()
                    .map(|m| m.label.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            kind: MapKind::Compose(maps),
            known,
        })
    }

    pub fn iterate(f: SelfMap, n: u32) -> Result<Self> {
        if n == 0 {
            return Self::identity(f.dim);
        }
        let known = f
            .known
            .iter()
            .map(|k| KnownFixedPoint {
                zeta: k.zeta.clone(),
                dilation: k.dilation.powi(n as i32),
            })
            .collect();
        Ok(Self {
            dim: f.dim,
            label: format!("iterate({}, {n})", f.label),
            kind: MapKind::Iterate { f: Box::new(f), n },
            known,
        })
    }

    /// `z ↦ c z` without the self-map check; used to exercise failure paths.
    pub fn linear_unchecked(c: Cx, dim: usize) -> Self {
        Self {
            dim,
            kind: MapKind::Linear { c },
            label: format!("linear(c={})", fmt_cx(c)),
            known: Vec::new(),
        }
    }

    /// Records a boundary fixed point whose dilation is known independently.
    pub fn with_known_fixed_point(mut self, zeta: BoundaryPoint, dilation: f64) -> Result<Self> {
        check_dim(self.dim, zeta.dim())?;
        self.known.push(KnownFixedPoint { zeta, dilation });
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn known_fixed_points(&self) -> &[KnownFixedPoint] {
        &self.known
    }

    /// Closed-form dilation at `ζ` when recorded in the metadata.
    pub fn known_dilation(&self, zeta: &BoundaryPoint) -> Option<f64> {
        self.known
            .iter()
            .find(|k| numeric::dist_euclid(k.zeta.coords(), zeta.coords()) < 1e-12)
            .map(|k| k.dilation)
    }

    /// Evaluates `f` on raw coordinates; the caller guarantees `z` is in the ball.
    pub(crate) fn eval_raw(&self, z: &[Cx]) -> Vec<Cx> {
        match &self.kind {
            MapKind::Identity => z.to_vec(),
            MapKind::Automorphism(g) => g.apply_raw(z),
            MapKind::Blaschke { zeros, rotation } => {
                let w = zeros
                    .iter()
                    .fold(*rotation, |acc, a| acc * blaschke_factor(*a, z[0]));
                vec![w]
            }
            MapKind::WarpedProduct { phi, c } => {
                let mut out = Vec::with_capacity(z.len());
                out.push(phi.eval_raw(&z[..1])[0]);
                out.extend(z[1..].iter().map(|v| *c * *v));
                out
            }
            MapKind::Conjugate { g, g_inv, f } => {
                let inner = g_inv.apply_raw(z);
                g.apply_raw(&f.eval_raw(&inner))
            }
            MapKind::Compose(maps) => maps
                .iter()
                .rev()
                .fold(z.to_vec(), |acc, m| m.eval_raw(&acc)),
            MapKind::Iterate { f, n } => (0..*n).fold(z.to_vec(), |acc, _| f.eval_raw(&acc)),
            MapKind::Linear { c } => z.iter().map(|v| *c * *v).collect(),
        }
    }

    /// Complex Jacobian at raw coordinates.
    pub(crate) fn jacobian_raw(&self, z: &[Cx]) -> CMatrix {
        match &self.kind {
            MapKind::Identity => CMatrix::identity(self.dim),
            MapKind::Automorphism(g) => g.jacobian_raw(z),
            MapKind::Blaschke { zeros, rotation } => {
                let factors: Vec<Cx> = zeros.iter().map(|a| blaschke_factor(*a, z[0])).collect();
                let mut d = CX_ZERO;
                for (i, a) in zeros.iter().enumerate() {
                    let den = CX_ONE - a.conj() * z[0];
                    let fi = cx_real(ONE - a.norm_sqr()) / (den * den);
                    let rest = factors
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .fold(CX_ONE, |acc, (_, v)| acc * *v);
                    d = d + fi * rest;
                }
                let mut m = CMatrix::zeros(1, 1);
                m.set(0, 0, *rotation * d);
                m
            }
            MapKind::WarpedProduct { phi, c } => {
                let mut m = CMatrix::identity(self.dim).scaled(*c);
                m.set(0, 0, phi.jacobian_raw(&z[..1]).get(0, 0));
                m
            }
            MapKind::Conjugate { g, g_inv, f } => {
                let u = g_inv.apply_raw(z);
                let fu = f.eval_raw(&u);
                g.jacobian_raw(&fu)
                    .mul(&f.jacobian_raw(&u))
                    .mul(&g_inv.jacobian_raw(z))
            }
            MapKind::Compose(maps) => {
                let mut point = z.to_vec();
                let mut jac = CMatrix::identity(self.dim);
                for m in maps.iter().rev() {
                    jac = m.jacobian_raw(&point).mul(&jac);
                    point = m.eval_raw(&point);
                }
                jac
            }
            MapKind::Iterate { f, n } => {
                let mut point = z.to_vec();
                let mut jac = CMatrix::identity(self.dim);
                for _ in 0..*n {
                    jac = f.jacobian_raw(&point).mul(&jac);
                    point = f.eval_raw(&point);
                }
                jac
            }
            MapKind::Linear { c } => CMatrix::identity(self.dim).scaled(*c),
        }
    }

    /// `f(z)`; fails if the image is not strictly inside the ball.
    pub fn apply(&self, z: &BallPoint) -> Result<BallPoint> {
        check_dim(self.dim, z.dim())?;
        let w = self.eval_raw(z.coords());
        BallPoint::new(w)
            .map_err(|_| Error::Invariant(format!("{} maps {:?} outside the ball", self.label, z)))
    }

    pub fn jacobian(&self, z: &BallPoint) -> Result<CMatrix> {
        check_dim(self.dim, z.dim())?;
        Ok(self.jacobian_raw(z.coords()))
    }

    /// `f^n(z)`.
    pub fn iterate_point(&self, z: &BallPoint, n: usize) -> Result<BallPoint> {
        let mut p = z.clone();
        for _ in 0..n {
            p = self.apply(&p)?;
        }
        Ok(p)
    }

    /// The conjugating automorphism, when this map is `g ∘ f ∘ g^{-1}`.
    pub fn conjugator(&self) -> Option<&Automorphism> {
        match &self.kind {
            MapKind::Conjugate { g, .. } => Some(g),
            _ => None,
        }
    }
}

impl fmt::Display for SelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn blaschke_factor(a: Cx, z: Cx) -> Cx {
    (z - a) / (CX_ONE - a.conj() * z)
}

fn fmt_cx(z: Cx) -> String {
    let c = numeric::cx_to_f64(z);
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("{},{}", c.re, c.im)
    }
}
