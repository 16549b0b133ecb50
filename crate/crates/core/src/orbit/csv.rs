//! Orbit CSV: `j, re_z1, im_z1, ..., horofunction, step_to_next, dist_to_zeta`.
//!
//! Coordinates are written with [`CSV_COORD_DIGITS`] significant digits so that a
//! written orbit reads back at double-double precision; the diagnostic columns use
//! fifteen. The last row leaves `step_to_next` empty.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::geometry::{BallPoint, BoundaryPoint};
use crate::numeric::{fmt15, format_dd, parse_dd, Cx};
use crate::orbit::OrbitSegment;

pub const CSV_COORD_DIGITS: usize = 30;

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("orbit csv: {e}"))
}

fn header(q: usize) -> Vec<String> {
    let mut h = vec!["j".to_string()];
    for i in 1..=q {
        h.push(format!("re_z{i}"));
        h.push(format!("im_z{i}"));
    }
    h.extend(["horofunction", "step_to_next", "dist_to_zeta"].map(String::from));
    h
}

pub fn write_orbit_csv<W: Write>(orbit: &OrbitSegment, out: W) -> Result<()> {
    let q = orbit.zeta().dim();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(q)).map_err(csv_err)?;
    let steps = orbit.steps();
    let horo = orbit.horofunctions();
    let dists = orbit.dists_to_zeta();
    for (i, p) in orbit.points().iter().enumerate() {
        let mut row = vec![(orbit.first_index() + i as i64).to_string()];
        for c in p.coords() {
            row.push(format_dd(c.re));
            row.push(format_dd(c.im));
        }
        row.push(fmt15(horo[i]));
        row.push(steps.get(i).map(|s| fmt15(*s)).unwrap_or_default());
        row.push(fmt15(dists[i]));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the coordinates and indices back; derived columns are ignored.
pub fn read_orbit_csv<R: Read>(
    input: R,
    zeta: &BoundaryPoint,
    label: &str,
) -> Result<OrbitSegment> {
    let mut r = csv::Reader::from_reader(input);
    let hdr = r.headers().map_err(csv_err)?.clone();
    let cols = hdr.len();
    if cols < 6 || (cols - 4) % 2 != 0 {
        return Err(Error::Parse(format!("orbit csv has {cols} columns")));
    }
    let q = (cols - 4) / 2;
    if hdr.iter().collect::<Vec<_>>() != header(q) {
        return Err(Error::Parse("orbit csv header does not match".into()));
    }
    crate::error::check_dim(zeta.dim(), q)?;
    let mut points = Vec::new();
    let mut first = None;
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let j: i64 = rec[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad index on row {}", line + 2)))?;
        match first {
            None => first = Some(j),
            Some(f) if j != f + points.len() as i64 => {
                return Err(Error::Parse(format!(
                    "indices are not consecutive at j = {j}"
                )))
            }
            _ => {}
        }
        let coords = (0..q)
            .map(|i| {
                Ok(Cx::new(
                    parse_dd(&rec[1 + 2 * i])?,
                    parse_dd(&rec[2 + 2 * i])?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        points.push(BallPoint::new(coords)?);
    }
    let first = first.ok_or_else(|| Error::Parse("orbit csv has no rows".into()))?;
    OrbitSegment::with_first_index(points, first, zeta.clone(), None, label)
}
