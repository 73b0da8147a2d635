//! CSV and JSON writers. Floats carry 17 significant digits and a `.`
//! decimal separator regardless of locale.

use std::io::Write;

use serde::Serialize;
use taildep_core::quadeval::{ChiCurve, EtaDiagnostic};
use taildep_core::simest::SampleBatch;

use crate::error::CliError;

/// Shortest-round-trip is not enough for diffing runs; print 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_chi_curve<W: Write>(out: W, curve: &ChiCurve, eta: Option<&EtaDiagnostic>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["q", "one_minus_q", "chi_q", "abs_err_est"];
    if eta.is_some() {
        header.extend(["x", "log_marginal", "log_joint", "eta_ratio"]);
    }
    w.write_record(&header)?;
    for (i, p) in curve.points.iter().enumerate() {
        let mut rec = vec![fmt_f64(p.q), fmt_f64(p.one_minus_q), fmt_f64(p.chi_q), fmt_f64(p.abs_err_est)];
        if let Some(d) = eta {
            match d.points.get(i) {
                Some(e) => rec.extend([e.x, e.log_marginal, e.log_joint, e.ratio].map(fmt_f64)),
                None => rec.extend(std::iter::repeat_n(String::new(), 4)),
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_batch<W: Write>(out: W, batch: &SampleBatch) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x1", "x2"])?;
    for p in &batch.pairs {
        w.write_record([fmt_f64(p[0]), fmt_f64(p[1])])?;
    }
    w.flush()?;
    Ok(())
}

/// Pairs from a two-column CSV with header `x1,x2`.
pub fn read_pairs<R: std::io::Read>(input: R) -> Result<Vec<[f64; 2]>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(CliError::Invalid(format!("row {}: expected 2 columns, got {}", line + 1, rec.len())));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Invalid(format!("row {}: {e}", line + 1)))
        };
        out.push([parse(&rec[0])?, parse(&rec[1])?]);
    }
    Ok(out)
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
