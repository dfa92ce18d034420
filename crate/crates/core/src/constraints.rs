//! Inversion of a measured white acceleration-noise level into upper bounds
//! on the CSL collapse rate and lower bounds on the DP cut-off length, plus
//! `(lambda, r)` exclusion curves.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{require_positive, CslParams, PhysicalConstants, PsdKind, TestMass, WhiteLevel};

/// Curve labels used in exported artifacts.
pub const LABEL_LPF_2016: &str = "LPF-2016";
pub const LABEL_LPF_UPDATED: &str = "LPF-updated";
pub const LABEL_UNDERGROUND: &str = "underground-proposal";

/// A named reference point in the CSL parameter plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchmarkPoint {
    pub name: &'static str,
    pub lambda: f64,
    pub r: f64,
    /// Decimal orders of magnitude of uncertainty on lambda, if any.
    pub log10_uncertainty: f64,
}

impl BenchmarkPoint {
    pub fn params(&self) -> CslParams {
        CslParams {
            lambda: self.lambda,
            r: self.r,
        }
    }
}

pub const GRW: BenchmarkPoint = BenchmarkPoint {
    name: "GRW",
    lambda: 1e-16,
    r: 1e-7,
    log10_uncertainty: 0.0,
};

pub const ADLER_1E7: BenchmarkPoint = BenchmarkPoint {
    name: "Adler (r = 1e-7 m)",
    lambda: 1e-8,
    r: 1e-7,
    log10_uncertainty: 2.0,
};

pub const ADLER_1E6: BenchmarkPoint = BenchmarkPoint {
    name: "Adler (r = 1e-6 m)",
    lambda: 1e-6,
    r: 1e-6,
    log10_uncertainty: 2.0,
};

pub const BENCHMARKS: [BenchmarkPoint; 3] = [GRW, ADLER_1E7, ADLER_1E6];

fn accel_level(sa: &WhiteLevel) -> Result<f64> {
    if sa.kind != PsdKind::Accel {
        return Err(Error::invalid(format!(
            "bound inversion expects an AccelPSD level, got {}",
            sa.kind
        )));
    }
    Ok(sa.value)
}

/// Largest CSL rate compatible with a white acceleration PSD `sa`:
///
/// `lambda = m0^2 / (32 pi hbar^2 r^2) (M/rho)^2 S_a / b^2`.
pub fn csl_lambda_bound(
    sa: &WhiteLevel,
    tm: &TestMass,
    r: f64,
    consts: &PhysicalConstants,
) -> Result<f64> {
    let sa = accel_level(sa)?;
    let r = require_positive("r_CSL", r)?;
    if r > tm.r_valid_max() {
        return Err(Error::Regime {
            r,
            r_valid_max: tm.r_valid_max(),
        });
    }
    let volume = tm.mass / tm.density;
    Ok(consts.m0.powi(2) / (32.0 * PI * consts.hbar.powi(2) * r.powi(2)) * volume.powi(2)
        / tm.side.powi(2)
        * sa)
}

/// Smallest DP cut-off length compatible with `sa`:
///
/// `sigma = a (2 hbar G / (3 sqrt(pi)) rho / M / S_a)^(1/3)`.
pub fn dp_sigma_bound(sa: &WhiteLevel, tm: &TestMass, consts: &PhysicalConstants) -> Result<f64> {
    let sa = accel_level(sa)?;
    if sa <= 0.0 {
        return Err(Error::invalid("DP bound diverges for a zero noise level"));
    }
    let inner = 2.0 * consts.hbar * consts.g / (3.0 * PI.sqrt()) * tm.density / tm.mass / sa;
    Ok(tm.lattice_constant * inner.cbrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExclusionCurve {
    /// `(r, lambda_max)` with r strictly increasing.
    pub points: Vec<(f64, f64)>,
    pub source_label: String,
    pub r_valid_max: f64,
    /// Grid points dropped because they exceed `r_valid_max`.
    pub dropped: Vec<f64>,
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    let lo = require_positive("grid start", lo)?;
    let hi = require_positive("grid end", hi)?;
    if n == 0 || (n == 1 && lo != hi) || (n > 1 && hi <= lo) {
        return Err(Error::invalid(format!(
            "cannot build a {n}-point grid over [{lo:e}, {hi:e}]"
        )));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|i| (a + step * i as f64).exp()).collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    Ok(grid)
}

/// Applies [`csl_lambda_bound`] on every grid point inside the validity
/// regime; points beyond it are recorded in `dropped`.
pub fn exclusion_curve(
    sa: &WhiteLevel,
    tm: &TestMass,
    r_grid: &[f64],
    source_label: &str,
    consts: &PhysicalConstants,
) -> Result<ExclusionCurve> {
    accel_level(sa)?;
    if sa.value <= 0.0 {
        return Err(Error::invalid("exclusion curve needs a positive noise level"));
    }
    if let Some(w) = r_grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!(
            "r grid must be strictly increasing ({:e} then {:e})",
            w[0], w[1]
        )));
    }
    let r_valid_max = tm.r_valid_max();
    let mut points = Vec::with_capacity(r_grid.len());
    let mut dropped = Vec::new();
    for &r in r_grid {
        require_positive("r", r)?;
        if r > r_valid_max {
            dropped.push(r);
        } else {
            points.push((r, csl_lambda_bound(sa, tm, r, consts)?));
        }
    }
    if points.is_empty() {
        return Err(Error::Regime {
            r: r_grid.first().copied().unwrap_or(f64::NAN),
            r_valid_max,
        });
    }
    Ok(ExclusionCurve {
        points,
        source_label: source_label.to_string(),
        r_valid_max,
        dropped,
    })
}

impl ExclusionCurve {
    pub fn r_range(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    /// Boundary value at `r`, interpolated linearly in (log r, log lambda).
    pub fn lambda_max_at(&self, r: f64) -> Result<f64> {
        let (lo, hi) = self.r_range();
        if !(r >= lo && r <= hi) {
            return Err(Error::invalid(format!(
                "r = {r:e} m is outside the curve range [{lo:e}, {hi:e}] m"
            )));
        }
        let idx = self.points.partition_point(|p| p.0 < r);
        let (r1, l1) = self.points[idx];
        if r1 == r {
            return Ok(l1);
        }
        let (r0, l0) = self.points[idx - 1];
        let t = (r / r0).ln() / (r1 / r0).ln();
        Ok((l0.ln() + t * (l1 / l0).ln()).exp())
    }
}

/// True when `p` lies strictly above the curve. Points on the boundary are
/// allowed.
pub fn excludes(curve: &ExclusionCurve, p: &CslParams) -> Result<bool> {
    Ok(p.lambda > curve.lambda_max_at(p.r)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: PhysicalConstants = PhysicalConstants::CODATA_2018;

    fn sa(v: f64) -> WhiteLevel {
        WhiteLevel::accel(v).unwrap()
    }

    #[test]
    fn lpf_2016_lambda() {
        let l = csl_lambda_bound(&sa(5.2e-15f64.powi(2)), &TestMass::lpf(), 1e-7, &C).unwrap();
        assert!((l - 2.96e-8).abs() / 2.96e-8 < 0.02, "{l:e}");
    }

    #[test]
    fn lpf_updated_lambda() {
        let l = csl_lambda_bound(&sa(0.075e-30), &TestMass::lpf(), 1e-7, &C).unwrap();
        assert!((l - 8.3e-11).abs() / 8.3e-11 < 0.03, "{l:e}");
    }

    #[test]
    fn zero_noise_gives_zero_lambda() {
        assert_eq!(csl_lambda_bound(&sa(0.0), &TestMass::lpf(), 1e-7, &C).unwrap(), 0.0);
    }

    #[test]
    fn lambda_regime_error_carries_cutoff() {
        let err = csl_lambda_bound(&sa(1e-30), &TestMass::lpf(), 0.01, &C).unwrap_err();
        match err {
            Error::Regime { r_valid_max, .. } => assert!((r_valid_max - 0.0046).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn force_level_is_rejected() {
        let f = WhiteLevel::force(1e-30).unwrap();
        assert!(csl_lambda_bound(&f, &TestMass::lpf(), 1e-7, &C).is_err());
    }

    #[test]
    fn dp_bounds() {
        let s1 = dp_sigma_bound(&sa(5.2e-15f64.powi(2)), &TestMass::lpf(), &C).unwrap();
        assert!((s1 - 40.1e-15).abs() / 40.1e-15 < 0.02, "{s1:e}");
        let s2 = dp_sigma_bound(&sa(0.075e-30), &TestMass::lpf(), &C).unwrap();
        assert!((s2 - 285.5e-15).abs() / 285.5e-15 < 0.02, "{s2:e}");
        assert!(dp_sigma_bound(&sa(0.0), &TestMass::lpf(), &C).is_err());
    }

    #[test]
    fn dp_cube_root_law() {
        let tm = TestMass::lpf();
        let s1 = dp_sigma_bound(&sa(8e-30), &tm, &C).unwrap();
        let s2 = dp_sigma_bound(&sa(1e-30), &tm, &C).unwrap();
        assert!((s2 / s1 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn curve_three_decades() {
        let tm = TestMass::lpf();
        let level = sa(0.075e-30);
        let curve = exclusion_curve(&level, &tm, &[1e-8, 1e-7, 1e-6], LABEL_LPF_UPDATED, &C).unwrap();
        let expected = [8.3e-9, 8.3e-11, 8.3e-13];
        for ((r, l), e) in curve.points.iter().zip(expected) {
            assert!((l - e).abs() / e < 0.03, "r={r:e} lambda={l:e}");
            // Independent evaluation of the closed form at each node.
            let direct = C.m0.powi(2) / (32.0 * PI * C.hbar.powi(2) * r * r)
                * (tm.mass / tm.density).powi(2)
                / (tm.side * tm.side)
                * 0.075e-30;
            assert!((l - direct).abs() / direct < 1e-12);
        }
        assert!(curve.dropped.is_empty());
    }

    #[test]
    fn single_point_curve_matches_bound() {
        let tm = TestMass::lpf();
        let level = sa(0.075e-30);
        let curve = exclusion_curve(&level, &tm, &[1e-7], LABEL_LPF_UPDATED, &C).unwrap();
        assert_eq!(curve.points[0].1, csl_lambda_bound(&level, &tm, 1e-7, &C).unwrap());
    }

    #[test]
    fn curve_drops_and_fails_outside_regime() {
        let tm = TestMass::lpf();
        let level = sa(0.075e-30);
        let curve = exclusion_curve(&level, &tm, &[1e-7, 1e-2], LABEL_LPF_UPDATED, &C).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert_eq!(curve.dropped, vec![1e-2]);
        assert!(matches!(
            exclusion_curve(&level, &tm, &[1e-2, 2e-2], LABEL_LPF_UPDATED, &C),
            Err(Error::Regime { .. })
        ));
    }

    #[test]
    fn benchmark_points_against_updated_curve() {
        let tm = TestMass::lpf();
        let grid = log_grid(1e-9, 1e-3, 61).unwrap();
        let curve = exclusion_curve(&sa(0.075e-30), &tm, &grid, LABEL_LPF_UPDATED, &C).unwrap();
        assert!(!excludes(&curve, &GRW.params()).unwrap());
        assert!(excludes(&curve, &ADLER_1E7.params()).unwrap());
        assert!(excludes(&curve, &ADLER_1E6.params()).unwrap());
    }

    #[test]
    fn boundary_point_is_allowed() {
        let tm = TestMass::lpf();
        let curve =
            exclusion_curve(&sa(0.075e-30), &tm, &[1e-8, 1e-7, 1e-6], LABEL_LPF_UPDATED, &C).unwrap();
        let (r, l) = curve.points[1];
        assert!(!excludes(&curve, &CslParams::new(l, r).unwrap()).unwrap());
        let up = CslParams::new(l * (1.0 + 1e-12), r).unwrap();
        assert!(excludes(&curve, &up).unwrap());
        assert!(excludes(&curve, &CslParams::new(1.0, 1e-5).unwrap()).is_err());
    }

    #[test]
    fn interpolation_follows_inverse_square() {
        let tm = TestMass::lpf();
        let level = sa(0.075e-30);
        let curve = exclusion_curve(&level, &tm, &[1e-8, 1e-6], LABEL_LPF_UPDATED, &C).unwrap();
        let mid = curve.lambda_max_at(1e-7).unwrap();
        let direct = csl_lambda_bound(&level, &tm, 1e-7, &C).unwrap();
        assert!((mid - direct).abs() / direct < 1e-12);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-8, 1e-6, 3).unwrap();
        assert_eq!(g[0], 1e-8);
        assert_eq!(g[2], 1e-6);
        assert!((g[1] - 1e-7).abs() / 1e-7 < 1e-14);
        assert!(log_grid(1.0, 0.5, 4).is_err());
    }
}
