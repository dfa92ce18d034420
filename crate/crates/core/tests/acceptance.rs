//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use collapse_bounds::budget::{build_budget, DeviceConfig, Source};
use collapse_bounds::collapse::{csl_force_psd, csl_geometry_factor};
use collapse_bounds::constraints::{csl_lambda_bound, dp_sigma_bound, log_grid};
use collapse_bounds::spectral::{
    decompose_white_plus_colored, fit_powerlaw_decay, simulate_oscillator, welch_psd,
    welch_segment_count, BrownianRunRecord, ColorModel, OscillatorDrive, Window,
};
use collapse_bounds::types::{CslParams, NoiseSpectrum, PhysicalConstants, PsdKind, TestMass, WhiteLevel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

const C: PhysicalConstants = PhysicalConstants::CODATA_2018;
const BIN: &str = env!("CARGO_BIN_EXE_collapse-bounds");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn cli_json(args: &[&str]) -> (serde_json::Value, Duration) {
    let start = Instant::now();
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    let elapsed = start.elapsed();
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    (serde_json::from_slice(&out.stdout).expect("json output"), elapsed)
}

fn number(v: &serde_json::Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing `{key}` in {v}"))
}

fn lpf_bound(sa: &str) -> (f64, f64, Duration) {
    let (v, t) = cli_json(&["bound", "--profile", "lpf", "--sa", sa, "--r", "1e-7"]);
    (number(&v, "lambda_max_s_inv"), number(&v, "sigma_dp_min_m"), t)
}

fn criterion_1() -> Outcome {
    let (lambda, _, t) = lpf_bound("2.704e-29");
    let e = rel(lambda, 2.96e-8);
    outcome(
        e < 0.02 && t < Duration::from_secs(1),
        format!("LPF CSL bound lambda_max = {lambda:.4e} s^-1 (rel. dev. {e:.2e} vs 2.96e-8, tol 2%), {:.0} ms", t.as_secs_f64() * 1e3),
    )
}

fn criterion_2() -> Outcome {
    let (lambda, _, t) = lpf_bound("7.5e-32");
    let e = rel(lambda, 8.3e-11);
    outcome(
        e < 0.03 && t < Duration::from_secs(1),
        format!("updated CSL bound lambda_max = {lambda:.4e} s^-1 (rel. dev. {e:.2e} vs 8.3e-11, tol 3%), {:.0} ms", t.as_secs_f64() * 1e3),
    )
}

fn criterion_3() -> Outcome {
    let (_, s1, _) = lpf_bound("2.704e-29");
    let (_, s2, _) = lpf_bound("7.5e-32");
    let (e1, e2) = (rel(s1, 40.1e-15), rel(s2, 285.5e-15));
    outcome(
        e1 < 0.02 && e2 < 0.02,
        format!(
            "DP cutoffs {:.2} fm / {:.2} fm (rel. dev. {e1:.2e}, {e2:.2e} vs 40.1 / 285.5 fm, tol 2%)",
            s1 * 1e15,
            s2 * 1e15
        ),
    )
}

fn criterion_4() -> Outcome {
    // 1e-17 N/rtHz per test mass, converted with S_a = 4 S_F / M^2.
    let (v, _) = cli_json(&["bound", "--profile", "table1", "--sf", "1e-34", "--r", "1e-7"]);
    let lambda = number(&v, "lambda_max_s_inv");
    let sigma = number(&v, "sigma_dp_min_m");
    let fl = (lambda / 3e-11).max(3e-11 / lambda);
    let fs = (sigma / 945.2e-15).max(945.2e-15 / sigma);
    let tm = &v["inputs"]["test_mass"];
    println!(
        "      assumptions: S_F = 1e-34 N^2/Hz per cube, S_a = 4 S_F / M^2 = {:.3e}, M = {} kg, rho = {} kg/m^3, b = {:.5} m, a = {:.1e} m, {}",
        number(&v["inputs"], "sa_m2_s4_hz"),
        tm["mass"],
        tm["density"],
        number(tm, "side"),
        number(tm, "lattice_constant"),
        v["inputs"]["constants"].as_str().unwrap_or("?"),
    );
    outcome(
        fl < 10.0 && fs < 3.0,
        format!(
            "device forecast lambda = {lambda:.3e} s^-1 (factor {fl:.2} from 3e-11, tol 10), sigma_DP = {:.1} fm (factor {fs:.2} from 945.2 fm, tol 3)",
            sigma * 1e15
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let tm = TestMass::lpf();
    let d = csl_force_psd(&CslParams::new(2.96e-8, 1e-7).unwrap(), &tm, &C).unwrap().d;
    let (f0, q, dt) = (1e-3, 100.0, 1.0);
    let w0 = 2.0 * PI * f0;
    let segment = 4096;
    let n = segment / 2 * 202;
    let run = simulate_oscillator(&OscillatorDrive {
        effective_mass: tm.mass,
        omega_m: w0,
        q,
        force_psd: d,
        dt,
        n_samples: n,
        seed: 20160607,
    })
    .unwrap();
    let segments = welch_segment_count(n, segment, 0.5);
    let psd = welch_psd(&run.trajectory, dt, segment, 0.5, Window::Hann, PsdKind::Displacement).unwrap();
    // Free-mass band well above the resonance; viscous |chi|^2 written out by hand.
    let (mut sum, mut bins) = (0.0, 0usize);
    for (&f, &sx) in psd.freqs().iter().zip(psd.values()) {
        if (0.01..=0.05).contains(&f) {
            let w = 2.0 * PI * f;
            let chi2 = 1.0 / (tm.mass.powi(2) * ((w0 * w0 - w * w).powi(2) + (w0 * w / q).powi(2)));
            sum += sx / chi2;
            bins += 1;
        }
    }
    let estimate = sum / bins as f64;
    let e = rel(estimate, d);
    let t = start.elapsed();
    outcome(
        e < 0.10 && segments >= 200 && t < Duration::from_secs(60),
        format!(
            "simulated CSL force level {estimate:.4e} vs analytic {d:.4e} N^2/Hz (rel. dev. {e:.2e}, tol 10%), {segments} segments, {bins} bins, {:.1} s",
            t.as_secs_f64()
        ),
    )
}

fn criterion_6() -> Outcome {
    const CASES: usize = 1000;
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let names = [
        "lambda linear in S_a",
        "lambda ~ 1/r^2",
        "lambda ~ 1/b^2",
        "lambda ~ (M/rho)^2",
        "sigma_DP ~ S_a^(-1/3)",
        "alpha ~ r^4",
        "alpha ~ 1/b^2",
    ];
    let mut worst = [0.0f64; 7];
    for _ in 0..CASES {
        let tm = TestMass::new(
            10f64.powf(rng.random_range(-1.0..1.0)),
            rng.random_range(1000.0..25000.0),
            rng.random_range(0.01..0.1),
            rng.random_range(2e-10..6e-10),
        )
        .unwrap();
        let r = 10f64.powf(rng.random_range(-9.0..-4.5));
        let sa = 10f64.powf(rng.random_range(-34.0..-26.0));
        let k = rng.random_range(0.5..2.0);
        let level = |v: f64| WhiteLevel::accel(v).unwrap();
        let lam = |sa: f64, tm: &TestMass, r: f64| csl_lambda_bound(&level(sa), tm, r, &C).unwrap();
        let base = lam(sa, &tm, r);

        let checks = [
            rel(lam(k * sa, &tm, r), k * base),
            rel(lam(sa, &tm, k * r), base / (k * k)),
            rel(lam(sa, &TestMass { side: k * tm.side, ..tm }, r), base / (k * k)),
            rel(lam(sa, &TestMass { mass: k * tm.mass, ..tm }, r), base * k * k),
            {
                let s1 = dp_sigma_bound(&level(sa), &tm, &C).unwrap();
                let s2 = dp_sigma_bound(&level(k * sa), &tm, &C).unwrap();
                rel(s2, s1 * k.powf(-1.0 / 3.0))
            },
            {
                let a1 = csl_geometry_factor(&tm, r, &C).unwrap().alpha;
                let a2 = csl_geometry_factor(&tm, k * r, &C).unwrap().alpha;
                rel(a2, a1 * k.powi(4))
            },
            {
                let a1 = csl_geometry_factor(&tm, r, &C).unwrap().alpha;
                let a2 = csl_geometry_factor(&TestMass { side: k * tm.side, ..tm }, r, &C)
                    .unwrap()
                    .alpha;
                rel(a2, a1 / (k * k))
            },
        ];
        for (w, c) in worst.iter_mut().zip(checks) {
            *w = w.max(c);
        }
    }
    let mut pass = true;
    for (name, w) in names.iter().zip(worst) {
        let ok = w <= TOL;
        pass &= ok;
        println!("      {} {name}: worst rel. dev. {w:.2e}", if ok { "ok  " } else { "FAIL" });
    }
    outcome(pass, format!("scaling laws over {CASES} randomized cases, tol {TOL:e}"))
}

fn criterion_7() -> Outcome {
    let times: Vec<f64> = log_grid(5.0, 600.0, 10).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let runs: Vec<BrownianRunRecord> = times
            .iter()
            .map(|&t| {
                let clean = 3.0 * t.powf(-0.8);
                let z: f64 = StandardNormal.sample(&mut rng);
                BrownianRunRecord {
                    t_days: t,
                    s_brown: clean * (1.0 + 0.01 * z),
                    sigma: 0.01 * clean,
                    label: format!("day {t:.1}"),
                }
            })
            .collect();
        let fit = fit_powerlaw_decay(&runs).unwrap();
        worst = worst.max((fit.exponent + 0.8).abs());
    }
    outcome(
        worst <= 0.05,
        format!("power-law decay exponent: worst |n + 0.80| = {worst:.2e} over 100 seeds (tol 0.05)"),
    )
}

fn criterion_8() -> Outcome {
    let (a, b) = (2.5e-30, 4.0e-33);
    let grid = log_grid(1e-4, 1e-1, 400).unwrap();
    let clean = NoiseSpectrum::from_fn(&grid, PsdKind::Accel, |f| a + b / f).unwrap();
    let d = decompose_white_plus_colored(&clean, ColorModel::InverseF).unwrap();
    let (ea, eb) = (rel(d.white_level, a), rel(d.colored_coeff, b));

    // Welch-averaged bins: chi^2 with 2K degrees of freedom, K = 100.
    let gamma = Gamma::new(100.0, 1.0 / 100.0).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(1000 + seed);
        let values = grid.iter().map(|f| (a + b / f) * gamma.sample(&mut rng)).collect();
        let noisy = NoiseSpectrum::new(grid.clone(), values, PsdKind::Accel).unwrap();
        let fit = decompose_white_plus_colored(&noisy, ColorModel::InverseF).unwrap();
        worst = worst.max(rel(fit.white_level, a));
    }
    outcome(
        ea < 0.01 && eb < 0.01 && worst < 0.05,
        format!("decomposition: noise-free A, B rel. dev. {ea:.1e}, {eb:.1e} (tol 1%); chi^2 bins worst A dev. {worst:.2e} over 20 seeds (tol 5%)"),
    )
}

fn criterion_9() -> Outcome {
    let cfg = DeviceConfig::table1();
    let report = build_budget(&cfg, 1e-4, 1e-1, 301, &C).unwrap();
    let asd = report.residual_force_at(1e-3).unwrap().sqrt();
    let factor = (asd / 1e-17).max(1e-17 / asd);
    let sql = report.component(Source::Sql).expect("SQL line present");
    let m_eff = cfg.effective_mass();
    let exact = report
        .freqs
        .iter()
        .zip(sql.force.values())
        .all(|(&f, &v)| v == C.hbar * m_eff * (2.0 * PI * f).powi(2));
    outcome(
        factor < 3.0 && exact,
        format!("budget: residual force ASD at 1 mHz = {asd:.3e} N/rtHz (factor {factor:.2} from 1e-17, tol 3); SQL line exact: {exact}"),
    )
}

fn artifacts(dir: &Path) -> Vec<Vec<u8>> {
    let p = |name: &str| dir.join(name).display().to_string();
    let runs: [Vec<String>; 4] = [
        ["simulate", "--profile", "table1", "--seed", "42", "--duration", "2e5", "--out", &p("run.csv")].map(String::from).to_vec(),
        ["estimate-psd", "--in", &p("run.csv"), "--segment", "2048", "--overlap", "0.5", "--out", &p("psd.csv")].map(String::from).to_vec(),
        ["budget", "--profile", "table1", "--f-min", "1e-4", "--f-max", "1e-1", "--points", "100", "--out", &p("budget.csv")].map(String::from).to_vec(),
        ["exclusion", "--profile", "lpf", "--sa", "7.5e-32", "--r-min", "1e-9", "--r-max", "1e-3", "--points", "60", "--out", &p("curve.csv")].map(String::from).to_vec(),
    ];
    for args in &runs {
        let st = Command::new(BIN).args(args).status().unwrap();
        assert!(st.success(), "{args:?}");
    }
    ["run.csv", "psd.csv", "budget.csv", "curve.csv"]
        .iter()
        .map(|n| std::fs::read(dir.join(n)).unwrap())
        .collect()
}

fn criterion_10() -> Outcome {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let a = artifacts(first.path());
    let b = artifacts(second.path());
    let same = a == b;
    let bytes: usize = a.iter().map(Vec::len).sum();
    outcome(same, format!("determinism: 4 artifacts ({bytes} bytes) byte-identical across two runs: {same}"))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = Vec::new();
    for (id, run) in criteria {
        let o = run();
        println!("[{}] criterion {id:>2}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
