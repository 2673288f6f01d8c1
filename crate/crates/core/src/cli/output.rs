//! Byte-stable JSON and CSV rendering.
//!
//! Floats are written with 17 significant digits in exponent form and JSON
//! object keys are sorted, so identical inputs give identical bytes.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::Result;
use crate::regimes::{RegimeReport, ScanPoint};
use crate::simulator::SimResult;
use super::SimEntry;

/// `x` with 17 significant digits; `nan`, `inf`, `-inf` for non-finite values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

struct StableFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for StableFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with sorted keys and fixed float formatting, newline-terminated.
pub fn stable_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    // going through Value sorts the keys (its map is ordered)
    let tree = serde_json::to_value(value)?;
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, StableFormatter(PrettyFormatter::new()));
    tree.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

fn csv_string(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("CSV fields are UTF-8"))
}

fn scan_row(p: &ScanPoint) -> Vec<String> {
    vec![
        p.m.to_string(),
        p.d.to_string(),
        fmt_f64(p.tau),
        fmt_opt(p.kappa),
        fmt_opt(p.e0),
        fmt_opt(p.total),
        fmt_opt(p.upper_sq),
        fmt_opt(p.upper_lin),
        fmt_opt(p.lower),
        fmt_opt(p.a),
        fmt_opt(p.b),
        fmt_opt(p.c),
        p.flags.join(";"),
    ]
}

/// One row per grid point, columns as in [`RegimeReport::CSV_HEADER`].
pub fn scan_csv(report: &RegimeReport) -> Result<String> {
    csv_string(&RegimeReport::CSV_HEADER, report.points.iter().map(scan_row))
}

/// One row per experiment, columns as in [`SimResult::CSV_HEADER`]. Failed
/// experiments keep `m`, `d`, `tau` and leave the rest empty.
pub fn sim_csv(entries: &[SimEntry]) -> Result<String> {
    csv_string(
        &SimResult::CSV_HEADER,
        entries.iter().map(|e| match e {
            SimEntry::Done(r) => vec![
                r.m.to_string(),
                r.d.to_string(),
                fmt_f64(r.tau),
                fmt_f64(r.empirical_mean),
                fmt_f64(r.empirical_stderr),
                fmt_f64(r.predicted_total),
                fmt_f64(r.null_risk),
                fmt_f64(r.bayes_risk),
                fmt_f64(r.jitter_max),
            ],
            SimEntry::Failed { d, m, tau, .. } => {
                let mut row = vec![m.to_string(), d.to_string(), fmt_f64(*tau)];
                row.resize(SimResult::CSV_HEADER.len(), String::new());
                row
            }
        }),
    )
}
