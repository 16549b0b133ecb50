//! Inline and TOML map specifications, loaded through the same path.

use backward_orbits::cli::load_map;
use backward_orbits::cli::mapspec::{map_from_table, parse_inline};

const TOML_SPEC: &str = r#"
kind = "conjugate"
label = "conjugated blaschke"

[f]
kind = "blaschke"
zeros = ["0", "1/3"]

[g]
kind = "mobius"
a = "0.2,0.1"
"#;

fn main() -> backward_orbits::Result<()> {
    let inline = "warped_product:phi.kind=blaschke;phi.zeros=0;1/3;c=0.5;dim=2";
    println!("{inline}\n  as a table:\n{}", parse_inline(inline)?);
    let f = load_map(inline)?;
    println!("  loaded: {} on B^{}", f.label(), f.dim());

    let table: toml::Table = TOML_SPEC
        .parse()
        .map_err(|e| backward_orbits::Error::Parse(format!("{e}")))?;
    let g = map_from_table(&table)?;
    println!("TOML spec loaded: {} on B^{}", g.label(), g.dim());

    for bad in ["linear:c=1.5;dim=2", "blaschke:zeros=1.2", "mobius:zeta=1"] {
        match load_map(bad) {
            Ok(_) => println!("{bad}: accepted"),
            Err(e) => println!("{bad}: {e}"),
        }
    }
    Ok(())
}
