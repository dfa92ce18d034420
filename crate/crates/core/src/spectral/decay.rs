use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Brownian acceleration-noise level measured in one science run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrownianRunRecord {
    /// Days since mission start.
    pub t_days: f64,
    /// fm^2 s^-4 Hz^-1
    pub s_brown: f64,
    /// 1-sigma uncertainty, fm^2 s^-4 Hz^-1
    pub sigma: f64,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub exponent: f64,
    /// Level at t = 1 day, same units as `s_brown`.
    pub amplitude: f64,
    pub exponent_stderr: f64,
    /// Standard error of ln(amplitude).
    pub log_amplitude_stderr: f64,
    /// Weighted sum of squared residuals in log space.
    pub chi2: f64,
}

/// Weighted least squares of `ln S = ln A + n ln t`, with log-space
/// weights `(S / sigma)^2`. Standard errors take the supplied sigmas as
/// absolute.
pub fn fit_powerlaw_decay(runs: &[BrownianRunRecord]) -> Result<DecayFit> {
    if runs.len() < 3 {
        return Err(Error::invalid(format!(
            "power-law fit needs at least 3 records, got {}",
            runs.len()
        )));
    }
    for r in runs {
        if !(r.t_days.is_finite() && r.t_days > 0.0) {
            return Err(Error::invalid(format!(
                "record `{}` has non-positive time {}",
                r.label, r.t_days
            )));
        }
        if !(r.s_brown.is_finite() && r.s_brown > 0.0 && r.sigma.is_finite() && r.sigma > 0.0) {
            return Err(Error::invalid(format!(
                "record `{}` needs positive level and uncertainty",
                r.label
            )));
        }
    }
    let mut times: Vec<f64> = runs.iter().map(|r| r.t_days).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.len() < 3 {
        return Err(Error::invalid("power-law fit needs at least 3 distinct times"));
    }

    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in runs {
        let x = r.t_days.ln();
        let y = r.s_brown.ln();
        let w = (r.s_brown / r.sigma).powi(2);
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    if det.is_nan() || det <= 0.0 {
        return Err(Error::Numerical("degenerate power-law design".into()));
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let chi2 = runs
        .iter()
        .map(|r| {
            let resid = r.s_brown.ln() - intercept - slope * r.t_days.ln();
            (r.s_brown / r.sigma).powi(2) * resid * resid
        })
        .sum();
    Ok(DecayFit {
        exponent: slope,
        amplitude: intercept.exp(),
        exponent_stderr: (sw / det).sqrt(),
        log_amplitude_stderr: (sxx / det).sqrt(),
        chi2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64, s: f64, sigma: f64) -> BrownianRunRecord {
        BrownianRunRecord {
            t_days: t,
            s_brown: s,
            sigma,
            label: format!("t{t}"),
        }
    }

    #[test]
    fn exact_power_law() {
        let runs: Vec<_> = [10.0, 40.0, 90.0, 200.0, 500.0]
            .iter()
            .map(|&t| rec(t, 7.0 * f64::powf(t, -0.8), 0.01))
            .collect();
        let fit = fit_powerlaw_decay(&runs).unwrap();
        assert!((fit.exponent + 0.8).abs() < 1e-12);
        assert!((fit.amplitude - 7.0).abs() < 1e-10);
    }

    #[test]
    fn constant_level_has_zero_exponent() {
        let runs: Vec<_> = [1.0, 5.0, 30.0, 100.0]
            .iter()
            .zip([1.0, 1.02, 0.99, 1.01])
            .map(|(&t, s)| rec(t, s, 0.02))
            .collect();
        let fit = fit_powerlaw_decay(&runs).unwrap();
        assert!(fit.exponent.abs() < fit.exponent_stderr, "{fit:?}");
    }

    #[test]
    fn inflated_sigma_record_drops_out() {
        let mut runs: Vec<_> = [20.0, 50.0, 120.0, 300.0, 450.0]
            .iter()
            .zip([0.98, 1.03, 1.0, 0.97, 1.02])
            .map(|(&t, noise)| rec(t, 5.0 * f64::powf(t, -0.8) * noise, 0.02 * 5.0 * f64::powf(t, -0.8)))
            .collect();
        let without = fit_powerlaw_decay(&runs).unwrap();
        runs.push(rec(80.0, 50.0, 0.02 * 50.0 * 1e3));
        let with = fit_powerlaw_decay(&runs).unwrap();
        assert!((with.exponent - without.exponent).abs() / without.exponent.abs() < 0.01);
    }

    #[test]
    fn input_errors() {
        assert!(fit_powerlaw_decay(&[rec(1.0, 1.0, 0.1), rec(2.0, 1.0, 0.1)]).is_err());
        assert!(fit_powerlaw_decay(&[rec(0.0, 1.0, 0.1), rec(2.0, 1.0, 0.1), rec(3.0, 1.0, 0.1)]).is_err());
        assert!(fit_powerlaw_decay(&[rec(1.0, 1.0, 0.1), rec(1.0, 1.1, 0.1), rec(2.0, 1.0, 0.1)]).is_err());
        assert!(fit_powerlaw_decay(&[rec(1.0, 1.0, 0.0), rec(2.0, 1.0, 0.1), rec(3.0, 1.0, 0.1)]).is_err());
    }
}
