//! CSV artifacts and their metadata headers.
//!
//! Every file starts with `# key = value` comment lines (tool version,
//! constants, input hash, seed) followed by a CSV header row. Numbers are
//! written with 17 significant digits so files round-trip exactly. No
//! timestamps are written, which keeps outputs byte-identical across runs.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::budget::BudgetReport;
use crate::constraints::ExclusionCurve;
use crate::error::{Error, Result};
use crate::spectral::{BrownianRunRecord, SimulationRun};
use crate::types::{NoiseSpectrum, PsdKind};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Header lines written at the top of every artifact.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metadata {
    pub constants: Option<String>,
    pub input_sha256: Option<String>,
    pub seed: Option<u64>,
    pub extra: Vec<(String, String)>,
}

impl Metadata {
    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.push((key.to_string(), value.to_string()));
        self
    }

    fn write(&self, out: &mut String) {
        let _ = writeln!(out, "# tool = {TOOL_VERSION}");
        if let Some(c) = &self.constants {
            let _ = writeln!(out, "# constants = {c}");
        }
        if let Some(h) = &self.input_sha256 {
            let _ = writeln!(out, "# input_sha256 = {h}");
        }
        if let Some(s) = self.seed {
            let _ = writeln!(out, "# seed = {s}");
        }
        for (k, v) in &self.extra {
            let _ = writeln!(out, "# {k} = {}", v.replace('\n', " "));
        }
    }
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_row(out: &mut String, cells: impl IntoIterator<Item = String>) {
    let row: Vec<String> = cells.into_iter().collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn spectrum_csv(s: &NoiseSpectrum, meta: &Metadata) -> String {
    let mut out = String::new();
    meta.write(&mut out);
    let _ = writeln!(out, "# kind = {}", s.kind());
    let _ = writeln!(out, "# unit = {}", s.kind().unit());
    push_row(&mut out, ["frequency_hz".into(), "psd_value".into()]);
    for (f, v) in s.freqs().iter().zip(s.values()) {
        push_row(&mut out, [num(*f), num(*v)]);
    }
    out
}

fn format_err(path: &str, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_string(),
        message: message.into(),
    }
}

fn header_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .filter_map(|l| l.trim_start().strip_prefix('#'))
        .filter_map(|l| l.split_once('='))
        .find(|(k, _)| k.trim() == key)
        .map(|(_, v)| v.trim())
}

struct Table {
    headers: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

fn read_table(text: &str, path: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| format_err(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = reader
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| format_err(path, e.to_string()))?;
    Ok(Table { headers, rows })
}

impl Table {
    fn column(&self, name: &str, path: &str) -> Result<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| {
            format_err(
                path,
                format!("missing column `{name}` (found: {})", self.headers.join(", ")),
            )
        })
    }

    fn numbers(&self, col: usize, path: &str) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let cell = row.get(col).unwrap_or("");
                cell.parse::<f64>().map_err(|_| {
                    format_err(
                        path,
                        format!("row {}: cannot parse `{cell}` in column `{}`", i + 1, self.headers[col]),
                    )
                })
            })
            .collect()
    }
}

pub fn parse_spectrum(text: &str, path: &str) -> Result<NoiseSpectrum> {
    let kind: PsdKind = header_value(text, "kind")
        .ok_or_else(|| format_err(path, "missing `# kind = ...` header"))?
        .parse()
        .map_err(|e: Error| format_err(path, e.to_string()))?;
    let table = read_table(text, path)?;
    let f = table.numbers(table.column("frequency_hz", path)?, path)?;
    let v = table.numbers(table.column("psd_value", path)?, path)?;
    NoiseSpectrum::new(f, v, kind).map_err(|e| format_err(path, e.to_string()))
}

pub fn read_spectrum(path: &Path) -> Result<NoiseSpectrum> {
    let label = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| format_err(&label, e.to_string()))?;
    parse_spectrum(&text, &label)
}

pub fn curve_csv(curve: &ExclusionCurve, meta: &Metadata) -> String {
    let mut out = String::new();
    meta.write(&mut out);
    let _ = writeln!(out, "# label = {}", curve.source_label);
    let _ = writeln!(out, "# r_valid_max_m = {}", num(curve.r_valid_max));
    push_row(&mut out, ["r_m".into(), "lambda_max_s_inv".into()]);
    for (r, l) in &curve.points {
        push_row(&mut out, [num(*r), num(*l)]);
    }
    out
}

/// Columns: frequency, then `<source>_force_psd` and `<source>_disp_psd`
/// for each component, then totals and residuals.
pub fn budget_csv(report: &BudgetReport, meta: &Metadata) -> String {
    let mut out = String::new();
    meta.write(&mut out);
    for a in &report.assumptions {
        let _ = writeln!(out, "# assumption = {a}");
    }
    let mut header = vec!["frequency_hz".to_string()];
    for c in &report.components {
        header.push(format!("{}_force_psd", c.source.name()));
        header.push(format!("{}_disp_psd", c.source.name()));
    }
    for name in [
        "total_force_psd",
        "total_disp_psd",
        "residual_force_psd",
        "residual_disp_psd",
    ] {
        header.push(name.to_string());
    }
    push_row(&mut out, header);
    for (i, f) in report.freqs.iter().enumerate() {
        let mut row = vec![num(*f)];
        for c in &report.components {
            row.push(num(c.force.values()[i]));
            row.push(num(c.displacement.values()[i]));
        }
        for s in [
            &report.total_force,
            &report.total_displacement,
            &report.residual_force,
            &report.residual_displacement,
        ] {
            row.push(num(s.values()[i]));
        }
        push_row(&mut out, row);
    }
    out
}

pub fn run_csv(run: &SimulationRun, meta: &Metadata) -> String {
    let mut out = String::new();
    meta.write(&mut out);
    let _ = writeln!(out, "# dt_s = {}", num(run.dt));
    push_row(&mut out, ["time_s".into(), "position_m".into(), "force_n".into()]);
    for (i, (x, f)) in run.trajectory.iter().zip(&run.force_trace).enumerate() {
        push_row(&mut out, [num(i as f64 * run.dt), num(*x), num(*f)]);
    }
    out
}

/// A uniformly sampled column from a time-series CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dt: f64,
    pub values: Vec<f64>,
}

/// Reads `column` from a CSV with a `time_s` column. The sample interval
/// comes from the `# dt_s` header when present, otherwise from the times,
/// which must be uniform.
pub fn parse_trace(text: &str, path: &str, column: &str) -> Result<Trace> {
    let table = read_table(text, path)?;
    let values = table.numbers(table.column(column, path)?, path)?;
    if values.len() < 2 {
        return Err(format_err(path, "time series needs at least two samples"));
    }
    let header_dt = header_value(text, "dt_s")
        .map(|v| v.parse::<f64>().map_err(|_| format_err(path, format!("bad dt_s `{v}`"))))
        .transpose()?;
    let dt = match header_dt {
        Some(dt) => dt,
        None => {
            let t = table.numbers(table.column("time_s", path)?, path)?;
            let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
            if let Some(i) = (1..t.len()).find(|&i| ((t[i] - t[i - 1]) - dt).abs() > 1e-6 * dt.abs()) {
                return Err(format_err(path, format!("non-uniform sampling at row {}", i + 1)));
            }
            dt
        }
    };
    if !(dt.is_finite() && dt > 0.0) {
        return Err(format_err(path, format!("sample interval must be positive, got {dt}")));
    }
    Ok(Trace { dt, values })
}

pub fn read_trace(path: &Path, column: &str) -> Result<Trace> {
    let label = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| format_err(&label, e.to_string()))?;
    parse_trace(&text, &label, column)
}

pub fn parse_run_table(text: &str, path: &str) -> Result<Vec<BrownianRunRecord>> {
    let table = read_table(text, path)?;
    let t = table.numbers(table.column("t_days", path)?, path)?;
    let s = table.numbers(table.column("s_brown_fm2_s4_hz", path)?, path)?;
    let sigma = table.numbers(table.column("sigma_fm2_s4_hz", path)?, path)?;
    let label_col = table.headers.iter().position(|h| h == "label");
    Ok(table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| BrownianRunRecord {
            t_days: t[i],
            s_brown: s[i],
            sigma: sigma[i],
            label: label_col
                .and_then(|c| row.get(c))
                .map_or_else(|| format!("row{}", i + 1), str::to_string),
        })
        .collect())
}

pub fn read_run_table(path: &Path) -> Result<Vec<BrownianRunRecord>> {
    let label = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| format_err(&label, e.to_string()))?;
    parse_run_table(&text, &label)
}

pub fn run_table_csv(runs: &[BrownianRunRecord], meta: &Metadata) -> String {
    let mut out = String::new();
    meta.write(&mut out);
    push_row(
        &mut out,
        ["t_days", "s_brown_fm2_s4_hz", "sigma_fm2_s4_hz", "label"].map(String::from),
    );
    for r in runs {
        push_row(&mut out, [num(r.t_days), num(r.s_brown), num(r.sigma), r.label.clone()]);
    }
    out
}

/// Whitespace-separated columns for gnuplot, written as `dir/name.dat`.
pub fn write_plot_data(dir: &Path, name: &str, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut out = String::new();
    let _ = writeln!(out, "# {}", headers.join(" "));
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        let cells: Vec<String> = columns.iter().map(|c| num(c[i])).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    write_atomic(&dir.join(format!("{name}.dat")), out.as_bytes())
}
