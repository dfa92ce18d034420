use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::NoiseSpectrum;

/// Shape of the colored term `B f^-k`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ColorModel {
    /// `k = 1`.
    #[default]
    InverseF,
    /// `k` fitted within `[min_exponent, max_exponent]` (diagnostics only).
    Free { min_exponent: f64, max_exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    /// White level A, same units as the input spectrum.
    pub white_level: f64,
    /// Coefficient B of the colored term.
    pub colored_coeff: f64,
    /// Exponent k of the colored term `B f^-k`.
    pub color_exponent: f64,
    /// RMS relative residual `(S - model) / model`.
    pub residual: f64,
}

const IRLS_ITERATIONS: usize = 30;

struct Fit {
    a: f64,
    b: f64,
    cost: f64,
}

/// Weighted nonnegative least squares for `y ~ a + b g` with two unknowns.
fn nnls2(y: &[f64], g: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let (mut s0, mut s1, mut s11, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&yi, &gi), &wi) in y.iter().zip(g).zip(w) {
        s0 += wi;
        s1 += wi * gi;
        s11 += wi * gi * gi;
        t0 += wi * yi;
        t1 += wi * yi * gi;
    }
    let cost = |a: f64, b: f64| -> f64 {
        y.iter()
            .zip(g)
            .zip(w)
            .map(|((&yi, &gi), &wi)| wi * (yi - a - b * gi).powi(2))
            .sum()
    };
    let det = s0 * s11 - s1 * s1;
    if det > 1e-12 * s0 * s11 {
        let a = (s11 * t0 - s1 * t1) / det;
        let b = (s0 * t1 - s1 * t0) / det;
        if a >= 0.0 && b >= 0.0 {
            return Ok((a, b));
        }
    }
    let candidates = [
        ((t0 / s0).max(0.0), 0.0),
        (0.0, if s11 > 0.0 { (t1 / s11).max(0.0) } else { 0.0 }),
    ];
    candidates
        .into_iter()
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .min_by(|p, q| cost(p.0, p.1).total_cmp(&cost(q.0, q.1)))
        .ok_or_else(|| Error::Numerical("white-plus-colored fit is singular".into()))
}

/// Iteratively reweighted fit with relative weights `1 / model^2`.
fn fit_fixed(freqs: &[f64], values: &[f64], exponent: f64) -> Result<Fit> {
    let g: Vec<f64> = freqs.iter().map(|f| f.powf(-exponent)).collect();
    // Start from observed relative weights on the positive bins only.
    let mut w: Vec<f64> = values
        .iter()
        .map(|&v| if v > 0.0 { 1.0 / (v * v) } else { 0.0 })
        .collect();
    let (mut a, mut b) = nnls2(values, &g, &w)?;
    for _ in 0..IRLS_ITERATIONS {
        let model: Vec<f64> = g.iter().map(|gi| a + b * gi).collect();
        if model.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::Numerical(
                "white-plus-colored model vanishes on part of the band".into(),
            ));
        }
        w = model.iter().map(|m| 1.0 / (m * m)).collect();
        let (na, nb) = nnls2(values, &g, &w)?;
        let converged = (na - a).abs() <= 1e-14 * na.abs().max(1e-300)
            && (nb - b).abs() <= 1e-14 * nb.abs().max(1e-300);
        a = na;
        b = nb;
        if converged {
            break;
        }
    }
    let n = values.len() as f64;
    let cost = values
        .iter()
        .zip(&g)
        .map(|(&v, gi)| {
            let m = a + b * gi;
            ((v - m) / m).powi(2)
        })
        .sum::<f64>()
        / n;
    if !cost.is_finite() {
        return Err(Error::Numerical("white-plus-colored fit diverged".into()));
    }
    Ok(Fit { a, b, cost })
}

/// Splits `S(f)` into a white level and a colored tail, `S ~ A + B f^-k`,
/// with `A, B >= 0`.
pub fn decompose_white_plus_colored(s: &NoiseSpectrum, model: ColorModel) -> Result<Decomposition> {
    let (lo, hi) = s.band();
    if lo <= 0.0 {
        return Err(Error::invalid("decomposition needs strictly positive frequencies"));
    }
    if hi / lo < 10.0 {
        return Err(Error::invalid(format!(
            "decomposition needs at least one decade, got [{lo:e}, {hi:e}] Hz"
        )));
    }
    let positive = s.values().iter().filter(|&&v| v > 0.0).count();
    if positive < 2 {
        return Err(Error::Numerical(
            "ill-conditioned decomposition: power concentrated in fewer than two bins".into(),
        ));
    }

    let (exponent, fit) = match model {
        ColorModel::InverseF => (1.0, fit_fixed(s.freqs(), s.values(), 1.0)?),
        ColorModel::Free {
            min_exponent,
            max_exponent,
        } => {
            if !(min_exponent > 0.0 && max_exponent > min_exponent) {
                return Err(Error::invalid("free color exponent needs 0 < min < max"));
            }
            golden_section(min_exponent, max_exponent, |k| {
                fit_fixed(s.freqs(), s.values(), k)
            })?
        }
    };
    Ok(Decomposition {
        white_level: fit.a,
        colored_coeff: fit.b,
        color_exponent: exponent,
        residual: fit.cost.sqrt(),
    })
}

fn golden_section(lo: f64, hi: f64, eval: impl Fn(f64) -> Result<Fit>) -> Result<(f64, Fit)> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = eval(c)?.cost;
    let mut fd = eval(d)?.cost;
    for _ in 0..80 {
        if (b - a).abs() < 1e-10 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = eval(c)?.cost;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = eval(d)?.cost;
        }
    }
    let k = (a + b) / 2.0;
    Ok((k, eval(k)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::log_grid;
    use crate::types::PsdKind;

    fn constructed(a: f64, b: f64, k: f64) -> NoiseSpectrum {
        let grid = log_grid(1e-4, 1e-1, 200).unwrap();
        NoiseSpectrum::from_fn(&grid, PsdKind::Accel, |f| a + b * f.powf(-k)).unwrap()
    }

    #[test]
    fn noise_free_recovery() {
        let d = decompose_white_plus_colored(&constructed(3.0, 2.0, 1.0), ColorModel::InverseF).unwrap();
        assert!((d.white_level - 3.0).abs() / 3.0 < 0.01);
        assert!((d.colored_coeff - 2.0).abs() / 2.0 < 0.01);
        assert!(d.residual < 1e-10);
    }

    #[test]
    fn pure_white_has_no_tail() {
        let d = decompose_white_plus_colored(&constructed(5.0, 0.0, 1.0), ColorModel::InverseF).unwrap();
        assert!((d.white_level - 5.0).abs() < 1e-12);
        assert!(d.colored_coeff.abs() < 1e-12);
    }

    #[test]
    fn free_exponent_finds_steeper_tail() {
        let s = constructed(1.0, 1e-6, 2.0);
        let d = decompose_white_plus_colored(
            &s,
            ColorModel::Free {
                min_exponent: 0.2,
                max_exponent: 4.0,
            },
        )
        .unwrap();
        assert!((d.color_exponent - 2.0).abs() < 1e-3, "{}", d.color_exponent);
        assert!((d.white_level - 1.0).abs() < 1e-3);
    }

    #[test]
    fn single_bin_power_is_ill_conditioned() {
        let grid = log_grid(1e-4, 1e-1, 50).unwrap();
        let mut values = vec![0.0; 50];
        values[10] = 4.0;
        let s = NoiseSpectrum::new(grid, values, PsdKind::Accel).unwrap();
        assert!(matches!(
            decompose_white_plus_colored(&s, ColorModel::InverseF),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn needs_a_decade() {
        let grid = log_grid(1e-3, 5e-3, 20).unwrap();
        let s = NoiseSpectrum::from_fn(&grid, PsdKind::Accel, |_| 1.0).unwrap();
        assert!(decompose_white_plus_colored(&s, ColorModel::InverseF).is_err());
    }
}
