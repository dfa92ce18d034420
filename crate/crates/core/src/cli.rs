//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 validation, 3 numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::budget::build_budget;
use crate::collapse::csl_force_psd;
use crate::constraints::{csl_lambda_bound, dp_sigma_bound, exclusion_curve, log_grid};
use crate::error::{Error, Result};
use crate::io::config::{load_config, sha256_hex, ConfigDocument, Profile};
use crate::io::formats::{
    budget_csv, curve_csv, num, read_run_table, read_spectrum, read_trace, run_csv, spectrum_csv,
    write_atomic, write_plot_data, Metadata, TOOL_VERSION,
};
use crate::spectral::{
    decompose_white_plus_colored, fit_powerlaw_decay, simulate_oscillator, welch_psd,
    welch_segment_count, ColorModel, OscillatorDrive, Window, RNG_ALGORITHM,
};
use crate::types::{ConversionContext, CslParams, NoiseSpectrum, PsdKind, WhiteLevel};

#[derive(Debug, Parser)]
#[command(name = "collapse-bounds", version, about = "Collapse-model bounds and torsion-balance noise budgets")]
struct Cli {
    /// Error report format on stderr.
    #[arg(long, value_enum, default_value_t = ErrorFormat::Text, global = true)]
    errors: ErrorFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ErrorFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Setup {
    /// Built-in parameter set.
    #[arg(long, value_parser = ["table1", "lpf"])]
    profile: Option<String>,
    /// Configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// CSL rate and DP cutoff bounds from a white acceleration (or force) level.
    Bound {
        #[command(flatten)]
        setup: Setup,
        /// Acceleration PSD, m^2 s^-4 / Hz.
        #[arg(long, required_unless_present = "sf", conflicts_with = "sf")]
        sa: Option<f64>,
        /// Force PSD of one test mass, N^2 / Hz (converted with S_a = 4 S_F / M^2).
        #[arg(long)]
        sf: Option<f64>,
        /// CSL correlation length, m.
        #[arg(long, default_value_t = 1e-7)]
        r: f64,
    },
    /// CSL exclusion curve lambda_max(r) on a log grid.
    Exclusion {
        #[command(flatten)]
        setup: Setup,
        #[arg(long)]
        sa: f64,
        #[arg(long)]
        r_min: f64,
        #[arg(long)]
        r_max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "exclusion")]
        label: String,
        /// Also write gnuplot columns into this directory.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Per-source noise budget of the torsion balance.
    Budget {
        #[command(flatten)]
        setup: Setup,
        #[arg(long, default_value_t = 1e-4)]
        f_min: f64,
        #[arg(long, default_value_t = 1e-1)]
        f_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
        /// Print the full report as JSON on stdout.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Time-domain run of the torsion mode driven by white force noise.
    Simulate {
        #[command(flatten)]
        setup: Setup,
        #[arg(long)]
        seed: u64,
        /// Run length, s.
        #[arg(long)]
        duration: f64,
        /// Sample interval, s (default 0.05 / omega_m).
        #[arg(long)]
        dt: Option<f64>,
        /// Force PSD, N^2/Hz (default: viscous thermal level 4 k_B T M_eff omega_m / Q).
        #[arg(long)]
        force_psd: Option<f64>,
        /// Adds the CSL force level for this rate, s^-1.
        #[arg(long, requires = "csl_r")]
        csl_lambda: Option<f64>,
        /// CSL correlation length for --csl-lambda, m.
        #[arg(long)]
        csl_r: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Welch PSD of one column of a time-series CSV.
    EstimatePsd {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 4096)]
        segment: usize,
        #[arg(long, default_value_t = 0.5)]
        overlap: f64,
        #[arg(long, default_value = "position_m")]
        column: String,
        /// Spectrum kind; inferred for `position_m` and `force_n`.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Fits S(f) = A + B f^-k to a spectrum file.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        /// Fit the color exponent in [0.2, 4] instead of fixing k = 1.
        #[arg(long)]
        free_exponent: bool,
        #[arg(long)]
        f_min: Option<f64>,
        #[arg(long)]
        f_max: Option<f64>,
    },
    /// Power-law fit of Brownian levels against time.
    FitDecay {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

struct Streams<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

/// Parses `args` (including the program name) and runs one subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let json_errors = args
        .windows(2)
        .any(|w| w[0] == "--errors" && w[1] == "json")
        || args.iter().any(|a| a == "--errors=json");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            if json_errors {
                let _ = writeln!(
                    stderr,
                    "{}",
                    json!({"error": {"kind": "usage", "message": e.render().to_string().trim(), "exit_code": 1}})
                );
            } else {
                let _ = write!(stderr, "{}", e.render());
            }
            return 1;
        }
    };
    let format = cli.errors;
    let mut io = Streams {
        out: stdout,
        err: stderr,
    };
    match dispatch(cli.command, &mut io) {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            match format {
                ErrorFormat::Json => {
                    let _ = writeln!(
                        io.err,
                        "{}",
                        json!({"error": {"kind": e.kind_name(), "message": e.to_string(), "exit_code": code}})
                    );
                }
                ErrorFormat::Text => {
                    let _ = writeln!(io.err, "error: {e}");
                }
            }
            code
        }
    }
}

fn usage(msg: &str) -> Error {
    Error::invalid(msg.to_string())
}

fn resolve(setup: &Setup) -> Result<ConfigDocument> {
    match (&setup.profile, &setup.config) {
        (Some(p), None) => Ok(ConfigDocument::from_profile(Profile::parse(p)?)),
        (None, Some(path)) => load_config(path),
        _ => Err(usage("give either --profile or --config")),
    }
}

fn source_json(setup: &Setup, doc: &ConfigDocument) -> serde_json::Value {
    match &setup.config {
        Some(path) => json!({"config": path.display().to_string(), "config_sha256": doc.hash}),
        None => json!({"profile": setup.profile}),
    }
}

fn metadata(doc: &ConfigDocument) -> Metadata {
    Metadata {
        constants: Some(doc.constants.label()),
        input_sha256: Some(doc.hash.clone()),
        seed: None,
        extra: Vec::new(),
    }
}

fn warn_mass(doc: &ConfigDocument, io: &mut Streams<'_>) {
    if let Some(w) = doc.mass_warning() {
        let _ = writeln!(io.err, "warning: {w}");
    }
}

fn print_json(io: &mut Streams<'_>, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numerical(format!("cannot serialize result: {e}")))?;
    writeln!(io.out, "{text}")?;
    Ok(())
}

fn file_hash(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(sha256_hex(&bytes))
}

fn dispatch(command: Command, io: &mut Streams<'_>) -> Result<()> {
    match command {
        Command::Bound { setup, sa, sf, r } => {
            let doc = resolve(&setup)?;
            warn_mass(&doc, io);
            let tm = doc.mass;
            let level = match (sa, sf) {
                (Some(sa), _) => WhiteLevel::accel(sa)?,
                (None, Some(sf)) => WhiteLevel::force(sf)?
                    .convert(PsdKind::Accel, &ConversionContext::default().with_mass(tm.mass))?,
                (None, None) => return Err(usage("give --sa or --sf")),
            };
            let lambda = csl_lambda_bound(&level, &tm, r, &doc.constants)?;
            let sigma = dp_sigma_bound(&level, &tm, &doc.constants)?;
            print_json(
                io,
                &json!({
                    "lambda_max_s_inv": lambda,
                    "sigma_dp_min_m": sigma,
                    "inputs": {
                        "source": source_json(&setup, &doc),
                        "sa_m2_s4_hz": level.value,
                        "sf_n2_hz": sf,
                        "r_m": r,
                        "test_mass": tm,
                        "r_valid_max_m": tm.r_valid_max(),
                        "constants": doc.constants.label(),
                    },
                    "tool": TOOL_VERSION,
                }),
            )
        }
        Command::Exclusion {
            setup,
            sa,
            r_min,
            r_max,
            points,
            out,
            label,
            plot_data,
        } => {
            let doc = resolve(&setup)?;
            warn_mass(&doc, io);
            let tm = doc.mass;
            if r_max > tm.r_valid_max() {
                return Err(Error::Regime {
                    r: r_max,
                    r_valid_max: tm.r_valid_max(),
                });
            }
            let grid = log_grid(r_min, r_max, points)?;
            let curve = exclusion_curve(&WhiteLevel::accel(sa)?, &tm, &grid, &label, &doc.constants)?;
            let meta = metadata(&doc).with("sa_m2_s4_hz", num(sa));
            write_atomic(&out, curve_csv(&curve, &meta).as_bytes())?;
            if let Some(dir) = plot_data {
                let r: Vec<f64> = curve.points.iter().map(|p| p.0).collect();
                let l: Vec<f64> = curve.points.iter().map(|p| p.1).collect();
                write_plot_data(&dir, &label, &["r_m", "lambda_max_s_inv"], &[&r, &l])?;
            }
            Ok(())
        }
        Command::Budget {
            setup,
            f_min,
            f_max,
            points,
            out,
            json,
            plot_data,
        } => {
            let doc = resolve(&setup)?;
            warn_mass(&doc, io);
            let report = build_budget(&doc.device, f_min, f_max, points, &doc.constants)?;
            write_atomic(&out, budget_csv(&report, &metadata(&doc)).as_bytes())?;
            if let Some(dir) = plot_data {
                let f = &report.freqs;
                for c in &report.components {
                    write_plot_data(&dir, c.source.name(), &["frequency_hz", "force_psd"], &[f, c.force.values()])?;
                }
                write_plot_data(&dir, "total", &["frequency_hz", "force_psd"], &[f, report.total_force.values()])?;
                write_plot_data(&dir, "residual", &["frequency_hz", "force_psd"], &[f, report.residual_force.values()])?;
            }
            if json {
                print_json(
                    io,
                    &json!({
                        "tool": TOOL_VERSION,
                        "constants": doc.constants.label(),
                        "input_sha256": doc.hash,
                        "band_hz": [report.band.0, report.band.1],
                        "frequency_hz": report.freqs,
                        "components": report.components.iter().map(|c| json!({
                            "source": c.source.name(),
                            "calibrated": c.calibrated,
                            "force_psd": c.force.values(),
                            "disp_psd": c.displacement.values(),
                        })).collect::<Vec<_>>(),
                        "total_force_psd": report.total_force.values(),
                        "total_disp_psd": report.total_displacement.values(),
                        "residual_force_psd": report.residual_force.values(),
                        "residual_disp_psd": report.residual_displacement.values(),
                        "assumptions": report.assumptions,
                    }),
                )?;
            }
            Ok(())
        }
        Command::Simulate {
            setup,
            seed,
            duration,
            dt,
            force_psd,
            csl_lambda,
            csl_r,
            out,
        } => {
            let doc = resolve(&setup)?;
            warn_mass(&doc, io);
            let dev = &doc.device;
            let dt = dt.unwrap_or(0.05 / dev.omega_m);
            if !(duration.is_finite() && duration > 0.0 && dt > 0.0) {
                return Err(usage("duration and dt must be positive"));
            }
            let mut psd = force_psd.unwrap_or(
                4.0 * doc.constants.k_b * dev.temperature * dev.effective_mass() * dev.omega_m / dev.q,
            );
            if let (Some(lambda), Some(r)) = (csl_lambda, csl_r) {
                psd += csl_force_psd(&CslParams::new(lambda, r)?, &doc.mass, &doc.constants)?.d;
            }
            let drive = OscillatorDrive {
                effective_mass: dev.effective_mass(),
                omega_m: dev.omega_m,
                q: dev.q,
                force_psd: psd,
                dt,
                n_samples: (duration / dt).ceil() as usize,
                seed,
            };
            let run = simulate_oscillator(&drive)?;
            let meta = Metadata {
                seed: Some(seed),
                ..metadata(&doc)
            }
            .with("rng", RNG_ALGORITHM)
            .with("force_psd_n2_hz", num(psd))
            .with("effective_mass_kg", num(dev.effective_mass()))
            .with("omega_m_rad_s", num(dev.omega_m))
            .with("quality_factor", num(dev.q));
            write_atomic(&out, run_csv(&run, &meta).as_bytes())
        }
        Command::EstimatePsd {
            input,
            segment,
            overlap,
            column,
            kind,
            out,
            plot_data,
        } => {
            let kind: PsdKind = match (kind, column.as_str()) {
                (Some(k), _) => k.parse()?,
                (None, "position_m") => PsdKind::Displacement,
                (None, "force_n") => PsdKind::Force,
                (None, other) => {
                    return Err(usage(&format!("cannot infer the spectrum kind of column `{other}`; pass --kind")))
                }
            };
            let trace = read_trace(&input, &column)?;
            let psd = welch_psd(&trace.values, trace.dt, segment, overlap, Window::Hann, kind)?;
            let meta = Metadata {
                input_sha256: Some(file_hash(&input)?),
                ..Metadata::default()
            }
            .with("window", "hann (periodic)")
            .with("segment", segment)
            .with("overlap", num(overlap))
            .with("segments", welch_segment_count(trace.values.len(), segment, overlap));
            write_atomic(&out, spectrum_csv(&psd, &meta).as_bytes())?;
            if let Some(dir) = plot_data {
                write_plot_data(&dir, "psd", &["frequency_hz", "psd_value"], &[psd.freqs(), psd.values()])?;
            }
            Ok(())
        }
        Command::Decompose {
            input,
            free_exponent,
            f_min,
            f_max,
        } => {
            let s = read_spectrum(&input)?;
            let s = restrict(&s, f_min, f_max)?;
            let model = if free_exponent {
                ColorModel::Free {
                    min_exponent: 0.2,
                    max_exponent: 4.0,
                }
            } else {
                ColorModel::InverseF
            };
            let d = decompose_white_plus_colored(&s, model)?;
            print_json(
                io,
                &json!({
                    "white_level": d.white_level,
                    "colored_coeff": d.colored_coeff,
                    "color_exponent": d.color_exponent,
                    "residual": d.residual,
                    "kind": s.kind().name(),
                    "bins": s.len(),
                    "band_hz": [s.band().0, s.band().1],
                }),
            )
        }
        Command::FitDecay { input } => {
            let runs = read_run_table(&input)?;
            let fit = fit_powerlaw_decay(&runs)?;
            print_json(
                io,
                &json!({
                    "exponent": fit.exponent,
                    "stderr": fit.exponent_stderr,
                    "amplitude": fit.amplitude,
                    "log_amplitude_stderr": fit.log_amplitude_stderr,
                    "chi2": fit.chi2,
                    "records": runs.len(),
                }),
            )
        }
    }
}

fn restrict(s: &NoiseSpectrum, f_min: Option<f64>, f_max: Option<f64>) -> Result<NoiseSpectrum> {
    if f_min.is_none() && f_max.is_none() {
        return Ok(s.clone());
    }
    let lo = f_min.unwrap_or(f64::NEG_INFINITY);
    let hi = f_max.unwrap_or(f64::INFINITY);
    let (f, v): (Vec<f64>, Vec<f64>) = s
        .freqs()
        .iter()
        .zip(s.values())
        .filter(|(f, _)| **f >= lo && **f <= hi)
        .unzip();
    NoiseSpectrum::new(f, v, s.kind())
}
