//! Per-level result tables as CSV or aligned text.

use crate::refine::IterationRecord;

pub const CSV_HEADER: &str = "level,vertices,estimate,effectivity,E_r,E_m,E_Gamma,E_dOmega";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Csv,
    Aligned,
}

impl TableFormat {
    pub fn parse(s: &str) -> Option<TableFormat> {
        match s {
            "csv" => Some(TableFormat::Csv),
            "aligned" | "table" => Some(TableFormat::Aligned),
            _ => None,
        }
    }
}

/// Three significant digits; fixed notation down to `1e-2`, scientific below.
pub fn format_sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0.00".into() } else { x.to_string() };
    }
    let mut e = x.abs().log10().floor() as i32;
    if (x.abs() / 10f64.powi(e - 2)).round() >= 1000.0 {
        e += 1;
    }
    if e < -2 {
        return format!("{x:.2e}");
    }
    let decimals = (2 - e).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Scientific notation with two decimals and a signed two-digit exponent.
pub fn format_component(x: f64) -> String {
    let s = format!("{x:.2e}");
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let e: i32 = exp.parse().unwrap_or(0);
            format!("{mantissa}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
        }
        None => s,
    }
}

fn cells(r: &IterationRecord, missing: &str) -> [String; 8] {
    [
        r.level.to_string(),
        r.vertex_count.to_string(),
        format_sig3(r.estimate),
        r.effectivity.map_or_else(|| missing.to_string(), format_sig3),
        format_component(r.e_r),
        format_component(r.e_m),
        format_component(r.e_gamma),
        format_component(r.e_domega),
    ]
}

pub fn emit_table(records: &[IterationRecord], format: TableFormat) -> String {
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in records {
                out.push_str(&cells(r, "").join(","));
                out.push('\n');
            }
        }
        TableFormat::Aligned => {
            let header: Vec<String> = CSV_HEADER.split(',').map(str::to_string).collect();
            let rows: Vec<[String; 8]> = records.iter().map(|r| cells(r, "--")).collect();
            let mut width: Vec<usize> = header.iter().map(String::len).collect();
            for row in &rows {
                for (w, c) in width.iter_mut().zip(row) {
                    *w = (*w).max(c.len());
                }
            }
            let line = |row: &[String]| {
                row.iter().zip(&width).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ")
            };
            out.push_str(&line(&header));
            out.push('\n');
            for row in &rows {
                out.push_str(&line(row));
                out.push('\n');
            }
        }
    }
    out
}

/// Numeric content of one CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub level: usize,
    pub vertices: usize,
    pub estimate: f64,
    pub effectivity: Option<f64>,
    /// `[E_r, E_m, E_Gamma, E_dOmega]`.
    pub components: [f64; 4],
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct TableParseError {
    pub line: usize,
    pub message: String,
}

pub fn parse_csv(text: &str) -> Result<Vec<TableRow>, TableParseError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((i, _)) => return Err(TableParseError { line: i + 1, message: "unexpected header".into() }),
        None => return Ok(Vec::new()),
    }
    let mut rows = Vec::new();
    for (i, l) in lines {
        let err = |m: &str| TableParseError { line: i + 1, message: m.to_string() };
        let f: Vec<&str> = l.split(',').map(str::trim).collect();
        if f.len() != 8 {
            return Err(err("expected 8 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(&format!("`{s}` is not a number")));
        let int = |s: &str| s.parse::<usize>().map_err(|_| err(&format!("`{s}` is not an integer")));
        rows.push(TableRow {
            level: int(f[0])?,
            vertices: int(f[1])?,
            estimate: num(f[2])?,
            effectivity: if f[3].is_empty() { None } else { Some(num(f[3])?) },
            components: [num(f[4])?, num(f[5])?, num(f[6])?, num(f[7])?],
        });
    }
    Ok(rows)
}
