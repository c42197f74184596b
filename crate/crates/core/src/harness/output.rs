use std::fmt::Write as _;

use super::{ResultRow, SolutionDump};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "delta_rel,delta_abs,n_iterations,rel_error,c0,n_points,seed,model,exact,stopped,wall_time_s";

/// Formats like C's `%.6g`: six significant digits, trailing zeros removed,
/// scientific notation outside `[1e-4, 1e6)`.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn row_fields(r: &ResultRow) -> [String; 11] {
    [
        format_sig6(r.delta_rel),
        format_sig6(r.delta_abs),
        r.n_iterations.to_string(),
        format_sig6(r.rel_error),
        format_sig6(r.c0),
        r.n_points.to_string(),
        r.seed.to_string(),
        r.model.clone(),
        r.exact.clone(),
        r.stopped.to_string(),
        format_sig6(r.wall_time_s),
    ]
}

pub fn render_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&row_fields(r).join(","));
        out.push('\n');
    }
    out
}

/// Writes the results CSV to `sink`.
pub fn emit_csv(rows: &[ResultRow], sink: &mut impl std::io::Write) -> std::io::Result<()> {
    sink.write_all(render_csv(rows).as_bytes())
}

/// Fixed-width text table: a header line, a rule, then one line per row.
pub fn emit_table(rows: &[ResultRow]) -> String {
    let header: Vec<&str> = CSV_HEADER.split(',').collect();
    let cells: Vec<[String; 11]> = rows.iter().map(row_fields).collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            cells
                .iter()
                .map(|c| c[i].len())
                .chain([header[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let line = |fields: &mut dyn Iterator<Item = &str>| {
        fields
            .zip(&widths)
            .map(|(f, w)| format!("{f:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    writeln!(out, "{}", line(&mut header.iter().copied())).unwrap();
    let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    writeln!(out, "{}", "-".repeat(total)).unwrap();
    for c in &cells {
        writeln!(out, "{}", line(&mut c.iter().map(String::as_str))).unwrap();
    }
    out
}

/// Parses a results CSV produced by [`render_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Validation(format!("bad CSV header: {e}")))?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Validation(format!(
            "unexpected CSV header '{}'",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let bad = |what: &str, e: &dyn std::fmt::Display| Error::Validation(format!("bad {what}: {e}"));
    let mut rows = Vec::new();
    for record in reader.records() {
        let rec = record.map_err(|e| bad("CSV record", &e))?;
        let f = |i: usize| -> Result<f64> { rec[i].parse().map_err(|e| bad(&rec[i], &e)) };
        let u = |i: usize| -> Result<u64> { rec[i].parse().map_err(|e| bad(&rec[i], &e)) };
        rows.push(ResultRow {
            delta_rel: f(0)?,
            delta_abs: f(1)?,
            n_iterations: u(2)? as usize,
            rel_error: f(3)?,
            c0: f(4)?,
            n_points: u(5)? as usize,
            seed: u(6)?,
            model: rec[7].to_string(),
            exact: rec[8].to_string(),
            stopped: rec[9].parse().map_err(|e| bad(&rec[9], &e))?,
            wall_time_s: f(10)?,
        });
    }
    Ok(rows)
}

/// `x,u_exact,u_dsm` at full precision.
pub fn solution_csv(dump: &SolutionDump) -> String {
    let mut out = String::from("x,u_exact,u_dsm\n");
    for ((x, e), d) in dump.x.iter().zip(&dump.exact).zip(&dump.dsm) {
        writeln!(out, "{x},{e},{d}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_matches_printf_g() {
        let cases = [
            (0.02, "0.02"),
            (1.0, "1"),
            (7.0, "7"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (999999.5, "1e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-0.0625, "-0.0625"),
            (0.123456789, "0.123457"),
            (3.0e-7, "3e-07"),
            (1.0 / 3.0, "0.333333"),
            (0.0, "0"),
        ];
        for (v, s) in cases {
            assert_eq!(format_sig6(v), s, "{v}");
        }
    }

    #[test]
    fn sig6_round_trips_to_six_digits() {
        for v in [0.0123456789, 98765.4321, 2.5e-9, 6.02214076e23] {
            let back: f64 = format_sig6(v).parse().unwrap();
            assert!(((back - v) / v).abs() <= 5e-6, "{v}");
        }
    }
}
