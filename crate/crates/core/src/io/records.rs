//! Diagnostics CSV: a schema comment line, a header, then one record per
//! line with 17 significant digits and empty cells for absent values.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::diagnostics::DiagnosticRecord;
use crate::error::{Error, Result};

pub const SCHEMA_LINE: &str = "# nlslab diagnostics v1";

fn axis_names(prefix: &str, dim: usize) -> impl Iterator<Item = String> + '_ {
    (0..dim).map(move |a| format!("{prefix}_{a}"))
}

/// Column names in record field order.
pub fn diagnostics_header(dim: usize) -> Vec<String> {
    let mut h: Vec<String> = ["t", "mass", "energy"].iter().map(|s| s.to_string()).collect();
    h.extend(axis_names("momentum", dim));
    h.extend(["variance", "grad_sq", "linf", "lambda"].iter().map(|s| s.to_string()));
    h.extend(axis_names("x_center", dim));
    h.extend(axis_names("xi", dim));
    h.extend(
        ["gamma", "spacetime_norm_partial", "morawetz_value", "fit_distance"]
            .iter()
            .map(|s| s.to_string()),
    );
    h
}

pub(crate) fn format_float(v: f64, column: &str) -> Result<String> {
    if !v.is_finite() {
        return Err(Error::Serialize(format!("non-finite value {v} in column {column}")));
    }
    Ok(format!("{v:.16e}"))
}

fn record_cells(r: &DiagnosticRecord, dim: usize, header: &[String]) -> Result<Vec<String>> {
    if r.dim() != dim {
        return Err(Error::Serialize(format!("record has dimension {}, table has {dim}", r.dim())));
    }
    let opt_vec = |v: &Option<Vec<f64>>| -> Vec<Option<f64>> {
        match v {
            Some(v) => v.iter().map(|x| Some(*x)).collect(),
            None => vec![None; dim],
        }
    };
    let mut values: Vec<Option<f64>> = vec![Some(r.t), Some(r.mass), Some(r.energy)];
    values.extend(r.momentum.iter().map(|x| Some(*x)));
    values.extend([Some(r.variance), Some(r.grad_sq), Some(r.linf), r.lambda]);
    values.extend(opt_vec(&r.x_center));
    values.extend(opt_vec(&r.xi));
    values.extend([r.gamma, Some(r.spacetime_norm_partial), r.morawetz_value, r.fit_distance]);
    values
        .iter()
        .zip(header)
        .map(|(v, name)| match v {
            Some(x) => format_float(*x, name),
            None => Ok(String::new()),
        })
        .collect()
}

/// Writes `records` of spatial dimension `dim`; an empty slice gives a
/// header-only file.
pub fn write_diagnostics(records: &[DiagnosticRecord], dim: usize, path: impl AsRef<Path>) -> Result<()> {
    let header = diagnostics_header(dim);
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| record_cells(r, dim, &header))
        .collect::<Result<_>>()?;
    write_rows(path, SCHEMA_LINE, &header, &rows)
}

/// Writes a plain table of floats with the same formatting rules.
pub fn write_table(path: impl AsRef<Path>, schema: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|row| row.iter().zip(&header).map(|(v, h)| format_float(*v, h)).collect())
        .collect::<Result<_>>()?;
    write_rows(path, schema, &header, &cells)
}

fn write_rows(path: impl AsRef<Path>, schema: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut file = File::create(path)?;
    writeln!(file, "{schema}")?;
    let mut w = csv::Writer::from_writer(file);
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(header).map_err(ser)?;
    for row in rows {
        w.write_record(row).map_err(ser)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a file written by [`write_diagnostics`].
pub fn read_diagnostics(path: impl AsRef<Path>) -> Result<Vec<DiagnosticRecord>> {
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).map_err(ser)?;
    let header: Vec<String> = rdr.headers().map_err(ser)?.iter().map(str::to_string).collect();
    let dim = header.iter().filter(|h| h.starts_with("momentum_")).count();
    if header != diagnostics_header(dim) {
        return Err(Error::Serialize(format!("unexpected diagnostics header {header:?}")));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(ser)?;
        let cells: Vec<Option<f64>> = row
            .iter()
            .map(|c| {
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.parse::<f64>().map(Some).map_err(|e| Error::Serialize(format!("{c:?}: {e}")))
                }
            })
            .collect::<Result<_>>()?;
        let mut it = cells.into_iter();
        let mut req = |name: &str| -> Result<f64> {
            it.next().flatten().ok_or_else(|| Error::Serialize(format!("missing value for {name}")))
        };
        let (t, mass, energy) = (req("t")?, req("mass")?, req("energy")?);
        let momentum = (0..dim).map(|_| req("momentum")).collect::<Result<Vec<_>>>()?;
        let (variance, grad_sq, linf) = (req("variance")?, req("grad_sq")?, req("linf")?);
        let rest: Vec<Option<f64>> = it.collect();
        let vec_of = |s: &[Option<f64>]| -> Option<Vec<f64>> { s.iter().copied().collect() };
        out.push(DiagnosticRecord {
            t,
            mass,
            energy,
            momentum,
            variance,
            grad_sq,
            linf,
            lambda: rest[0],
            x_center: vec_of(&rest[1..1 + dim]),
            xi: vec_of(&rest[1 + dim..1 + 2 * dim]),
            gamma: rest[1 + 2 * dim],
            spacetime_norm_partial: rest[2 + 2 * dim]
                .ok_or_else(|| Error::Serialize("missing spacetime_norm_partial".into()))?,
            morawetz_value: rest[3 + 2 * dim],
            fit_distance: rest[4 + 2 * dim],
        });
    }
    Ok(out)
}
