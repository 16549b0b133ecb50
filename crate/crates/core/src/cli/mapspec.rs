//! Map specifications: inline strings such as `blaschke:a=1/3` or TOML files.
//!
//! Both forms become a TOML table and go through the same loader. Inline specs
//! are `kind:key=value;key=value`; a segment without `=` continues the previous
//! value (so `zeros=0;1/3` lists two zeros) and dotted keys open nested tables
//! (`phi.kind=mobius`). Complex scalars are `re,im` or a bare real.

use std::path::Path;

use toml::{Table, Value};

use crate::analysis::{Intertwiner, PreModel};
use crate::catalog::{self_map_check, SelfMap};
use crate::error::{Error, Result};
use crate::geometry::{Automorphism, BallPoint, BoundaryPoint};
use crate::numeric::{self, cx_real, parse_complex, parse_dd, CMatrix, Cx, CX_ONE};

/// Samples drawn by the self-map check every loaded map must pass.
pub const LOAD_CHECK_SAMPLES: usize = 2000;
const LOAD_CHECK_SEED: u64 = 0x10ad;

/// Loads a map from an inline spec or, when `spec` names an existing file, from TOML.
pub fn load_map(spec: &str) -> Result<SelfMap> {
    let table = if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec)?;
        text.parse::<Table>()
            .map_err(|e| Error::Parse(format!("{spec}: {e}")))?
    } else {
        parse_inline(spec)?
    };
    let f = map_from_table(&table)?;
    let check = self_map_check(&f, LOAD_CHECK_SAMPLES, LOAD_CHECK_SEED)?;
    if !check.passed {
        return Err(Error::Config(format!(
            "{} is not a self-map of the ball (margin {} at {})",
            f.label(),
            numeric::fmt15(check.worst_margin),
            check.witness.map(|w| format_point(&w)).unwrap_or_default()
        )));
    }
    Ok(f)
}

fn format_point(z: &BallPoint) -> String {
    z.to_c64()
        .iter()
        .map(|c| format!("{:.6},{:.6}", c.re, c.im))
        .collect::<Vec<_>>()
        .join(";")
}

/// `kind:key=value;...` as a TOML table with string leaves.
pub fn parse_inline(spec: &str) -> Result<Table> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let kind = kind.trim();
    if kind.is_empty() {
        return Err(Error::Parse(format!("map spec '{spec}' has no kind")));
    }
    let mut pairs: Vec<(String, String)> = Vec::new();
    for seg in rest.split(';') {
        let seg = seg.trim();
        if seg.is_empty() {
            continue;
        }
        match seg.split_once('=') {
            Some((k, v)) => pairs.push((k.trim().to_string(), v.trim().to_string())),
            None => match pairs.last_mut() {
                Some((_, v)) => {
                    v.push(';');
                    v.push_str(seg);
                }
                None => return Err(Error::Parse(format!("dangling value '{seg}' in '{spec}'"))),
            },
        }
    }
    let mut table = Table::new();
    table.insert("kind".into(), Value::String(kind.to_string()));
    for (k, v) in pairs {
        insert_dotted(&mut table, &k, v)?;
    }
    Ok(table)
}

fn insert_dotted(table: &mut Table, key: &str, value: String) -> Result<()> {
    match key.split_once('.') {
        None => {
            if table
                .insert(key.to_string(), Value::String(value))
                .is_some()
            {
                return Err(Error::Parse(format!("key '{key}' given twice")));
            }
            Ok(())
        }
        Some((head, tail)) => {
            let entry = table
                .entry(head.to_string())
                .or_insert_with(|| Value::Table(Table::new()));
            match entry {
                Value::Table(t) => insert_dotted(t, tail, value),
                _ => Err(Error::Parse(format!(
                    "key '{head}' is both a value and a table"
                ))),
            }
        }
    }
}

fn field<'a>(t: &'a Table, key: &str) -> Result<&'a Value> {
    t.get(key)
        .ok_or_else(|| Error::Config(format!("missing field '{key}'")))
}

fn as_real(v: &Value, key: &str) -> Result<numeric::Real> {
    match v {
        Value::String(s) => parse_dd(s),
        Value::Float(x) => Ok(numeric::dd(*x)),
        Value::Integer(i) => Ok(numeric::dd(*i as f64)),
        _ => Err(Error::Parse(format!("field '{key}' must be a number"))),
    }
}

fn as_complex(v: &Value, key: &str) -> Result<Cx> {
    match v {
        Value::String(s) => parse_complex(s),
        Value::Array(a) if a.len() == 2 => Ok(Cx::new(as_real(&a[0], key)?, as_real(&a[1], key)?)),
        other => Ok(cx_real(as_real(other, key)?)),
    }
}

fn as_cvec(v: &Value, key: &str) -> Result<Vec<Cx>> {
    match v {
        Value::String(s) => numeric::parse_cvec(s),
        Value::Array(a) => a.iter().map(|x| as_complex(x, key)).collect(),
        other => Ok(vec![as_complex(other, key)?]),
    }
}

fn as_f64(v: &Value, key: &str) -> Result<f64> {
    Ok(numeric::to_f64(as_real(v, key)?))
}

fn as_usize(v: &Value, key: &str) -> Result<usize> {
    let x = match v {
        Value::Integer(i) => *i as f64,
        other => as_f64(other, key)?,
    };
    if x < 0.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
        return Err(Error::Parse(format!(
            "field '{key}' must be a non-negative integer"
        )));
    }
    Ok(x as usize)
}

fn as_table<'a>(v: &'a Value, key: &str) -> Result<&'a Table> {
    v.as_table()
        .ok_or_else(|| Error::Parse(format!("field '{key}' must be a table")))
}

fn opt_f64(t: &Table, key: &str) -> Result<Option<f64>> {
    t.get(key).map(|v| as_f64(v, key)).transpose()
}

fn kind(t: &Table) -> Result<&str> {
    field(t, "kind")?
        .as_str()
        .ok_or_else(|| Error::Parse("field 'kind' must be a string".into()))
}

/// Boundary point from `re,im;re,im`, renormalized.
pub fn parse_boundary(s: &str) -> Result<BoundaryPoint> {
    BoundaryPoint::new(numeric::parse_cvec(s)?)
}

pub fn parse_point(s: &str) -> Result<BallPoint> {
    BallPoint::new(numeric::parse_cvec(s)?)
}

fn boundary_field(t: &Table, key: &str) -> Result<BoundaryPoint> {
    BoundaryPoint::new(as_cvec(field(t, key)?, key)?)
}

/// Disc automorphism `e^{iθ} (a - z)/(1 - conj(a) z)`, or hyperbolic at `zeta` with dilation `lambda`.
fn mobius(t: &Table) -> Result<SelfMap> {
    if t.contains_key("zeta") || t.contains_key("lambda") {
        let zeta = as_complex(field(t, "zeta")?, "zeta")?;
        let lambda = as_f64(field(t, "lambda")?, "lambda")?;
        return SelfMap::disc_hyperbolic(zeta, lambda);
    }
    let a = t
        .get("a")
        .map(|v| as_complex(v, "a"))
        .transpose()?
        .unwrap_or(numeric::CX_ZERO);
    let theta = opt_f64(t, "theta")?.unwrap_or(0.0);
    let mut u = CMatrix::identity(1);
    u.set(0, 0, numeric::cx(theta.cos(), theta.sin()));
    Ok(SelfMap::automorphism(Automorphism::from_parts(
        BallPoint::new(vec![a])?,
        u,
    )?))
}

fn blaschke(t: &Table) -> Result<SelfMap> {
    let zeros = match (t.get("zeros"), t.get("a")) {
        (Some(z), None) => as_cvec(z, "zeros")?,
        (None, Some(a)) => vec![numeric::CX_ZERO, as_complex(a, "a")?],
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "give either 'zeros' or the shorthand 'a', not both".into(),
            ))
        }
        (None, None) => return Err(Error::Config("blaschke needs 'zeros' or 'a'".into())),
    };
    let rotation = match (t.get("rotation"), opt_f64(t, "theta")?) {
        (Some(r), None) => as_complex(r, "rotation")?,
        (None, Some(th)) => numeric::cx(th.cos(), th.sin()),
        (None, None) => CX_ONE,
        _ => {
            return Err(Error::Config(
                "give either 'rotation' or 'theta', not both".into(),
            ))
        }
    };
    SelfMap::blaschke(zeros, rotation)
}

/// Automorphism from a `mobius` or `ball_automorphism` table.
pub fn automorphism_from_table(t: &Table) -> Result<Automorphism> {
    match kind(t)? {
        "mobius" => match mobius(t)?.kind() {
            crate::catalog::MapKind::Automorphism(g) => Ok(g.clone()),
            _ => unreachable!("mobius specs build automorphisms"),
        },
        "ball_automorphism" => ball_automorphism(t),
        "identity" => Ok(Automorphism::identity(as_usize(field(t, "dim")?, "dim")?)),
        other => Err(Error::Config(format!(
            "'{other}' does not describe an automorphism"
        ))),
    }
}

fn ball_automorphism(t: &Table) -> Result<Automorphism> {
    let form = t
        .get("form")
        .and_then(|v| v.as_str())
        .unwrap_or("hyperbolic");
    let g = match form {
        "hyperbolic" => {
            let zeta = boundary_field(t, "zeta")?;
            Automorphism::hyperbolic(&zeta, as_f64(field(t, "lambda")?, "lambda")?)?
        }
        "parabolic" => {
            let zeta = boundary_field(t, "zeta")?;
            let shift = match t.get("shift") {
                Some(v) => as_cvec(v, "shift")?,
                None => vec![numeric::CX_ZERO; zeta.dim() - 1],
            };
            Automorphism::parabolic(&zeta, &shift, opt_f64(t, "x")?.unwrap_or(0.0))?
        }
        "involution" => {
            Automorphism::mobius_involution(&BallPoint::new(as_cvec(field(t, "a")?, "a")?)?)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown automorphism form '{other}'"
            )))
        }
    };
    if let Some(d) = t.get("dim") {
        crate::error::check_dim(as_usize(d, "dim")?, g.dim())?;
    }
    Ok(g)
}

/// Builds the map described by a table (see the module docs for the syntax).
pub fn map_from_table(t: &Table) -> Result<SelfMap> {
    let f = match kind(t)? {
        "identity" => SelfMap::identity(as_usize(field(t, "dim")?, "dim")?)?,
        "mobius" => mobius(t)?,
        "blaschke" => blaschke(t)?,
        "ball_automorphism" => SelfMap::automorphism(ball_automorphism(t)?),
        "warped_product" => {
            let phi = map_from_table(as_table(field(t, "phi")?, "phi")?)?;
            let c = as_complex(field(t, "c")?, "c")?;
            let dim = t
                .get("dim")
                .map(|v| as_usize(v, "dim"))
                .transpose()?
                .unwrap_or(2);
            SelfMap::warped_product(phi, c, dim)?
        }
        "conjugate" => {
            let f = map_from_table(as_table(field(t, "f")?, "f")?)?;
            let g = automorphism_from_table(as_table(field(t, "g")?, "g")?)?;
            SelfMap::conjugate(f, g)?
        }
        "compose" => {
            let maps = field(t, "maps")?
                .as_array()
                .ok_or_else(|| Error::Parse("field 'maps' must be an array of tables".into()))?
                .iter()
                .map(|m| map_from_table(as_table(m, "maps")?))
                .collect::<Result<Vec<_>>>()?;
            SelfMap::compose(maps)?
        }
        "iterate" => {
            let f = map_from_table(as_table(field(t, "f")?, "f")?)?;
            let n = as_usize(field(t, "n")?, "n")?;
            SelfMap::iterate(f, n as u32)?
        }
        "linear" => {
            let c = as_complex(field(t, "c")?, "c")?;
            SelfMap::linear_unchecked(c, as_usize(field(t, "dim")?, "dim")?)
        }
        other => return Err(Error::Config(format!("unknown map kind '{other}'"))),
    };
    Ok(match t.get("label").and_then(|v| v.as_str()) {
        Some(l) => f.with_label(l),
        None => f,
    })
}

/// Loads a pre-model `(B^k, ℓ, τ)` for a map on `B^q` from a TOML file:
/// `repelling` (the point `R`), a `[tau]` automorphism table, and optional
/// `[pre]` map on `B^k` and `[post]` automorphism of `B^q` forming
/// `ℓ = post ∘ embed ∘ pre`.
pub fn load_premodel(path: &Path, target_dim: usize) -> Result<PreModel> {
    let text = std::fs::read_to_string(path)?;
    let t: Table = text
        .parse()
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    premodel_from_table(&t, target_dim)
}

pub fn premodel_from_table(t: &Table, target_dim: usize) -> Result<PreModel> {
    for key in t.keys() {
        if !matches!(key.as_str(), "repelling" | "tau" | "pre" | "post") {
            return Err(Error::Config(format!("unknown pre-model field '{key}'")));
        }
    }
    let tau = automorphism_from_table(as_table(field(t, "tau")?, "tau")?)?;
    let repelling = boundary_field(t, "repelling")?;
    let pre = match t.get("pre") {
        Some(v) => map_from_table(as_table(v, "pre")?)?,
        None => SelfMap::identity(tau.dim())?,
    };
    let post = match t.get("post") {
        Some(v) => automorphism_from_table(as_table(v, "post")?)?,
        None => Automorphism::identity(target_dim),
    };
    crate::error::check_dim(target_dim, post.dim())?;
    PreModel::new(Intertwiner::new(pre, post)?, tau, repelling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{cx, to_f64};

    #[test]
    fn inline_blaschke_shorthand() {
        let f = load_map("blaschke:a=1/3").unwrap();
        let z = f.eval_raw(&[cx(0.5, 0.0)])[0];
        // 0.5 (0.5 - 1/3) / (1 - 1/6) = 0.1
        assert!((to_f64(z.re) - 0.1).abs() < 1e-30);
    }

    #[test]
    fn continuation_segments_and_nesting() {
        let t =
            parse_inline("warped_product:phi.kind=blaschke;phi.zeros=0;1/3;c=0.5;dim=2").unwrap();
        let phi = t["phi"].as_table().unwrap();
        assert_eq!(phi["zeros"].as_str(), Some("0;1/3"));
        let f = map_from_table(&t).unwrap();
        assert_eq!(f.dim(), 2);
        assert!(parse_inline(":a=1").is_err());
        assert!(parse_inline("blaschke:a=1;a=2").is_err());
    }

    #[test]
    fn toml_compose_and_conjugate() {
        let text = r#"
            kind = "conjugate"
            [f]
            kind = "compose"
            [[f.maps]]
            kind = "mobius"
            zeta = 1
            lambda = 3
            [[f.maps]]
            kind = "blaschke"
            zeros = ["0", "0.25,0.1"]
            [g]
            kind = "mobius"
            a = [0.2, 0.0]
        "#;
        let t: Table = text.parse().unwrap();
        let f = map_from_table(&t).unwrap();
        assert!(self_map_check(&f, 500, 1).unwrap().passed);
    }

    #[test]
    fn expanding_linear_map_is_refused() {
        assert!(matches!(
            load_map("linear:c=1.5;dim=2"),
            Err(Error::Config(_))
        ));
        assert!(load_map("linear:c=0.5;dim=2").is_ok());
        assert!(matches!(load_map("nonsense:x=1"), Err(Error::Config(_))));
        assert!(matches!(load_map("blaschke:a=abc"), Err(Error::Parse(_))));
    }

    #[test]
    fn premodel_table() {
        let text = r#"
            repelling = "0,1"
            [tau]
            kind = "mobius"
            zeta = "0,1"
            lambda = 3
            [pre]
            kind = "mobius"
            theta = -1.5707963267948966
        "#;
        let t: Table = text.parse().unwrap();
        let m = premodel_from_table(&t, 2).unwrap();
        assert!((m.lambda_tau() - 3.0).abs() < 1e-9);
        let mut bad = t.clone();
        bad.insert("extra".into(), Value::Integer(1));
        assert!(premodel_from_table(&bad, 2).is_err());
    }

    #[test]
    fn ball_automorphism_forms() {
        for spec in [
            "ball_automorphism:form=hyperbolic;zeta=0.6,0;0,0.8;lambda=2",
            "ball_automorphism:form=parabolic;zeta=1,0;0,0;shift=0.3,0.1;x=0.5",
            "ball_automorphism:form=involution;a=0.1,0;0.2,0.3",
        ] {
            let f = load_map(spec).unwrap();
            assert_eq!(f.dim(), 2, "{spec}");
        }
    }
}
