//! Effective white force noise that the CSL and Diosi-Penrose models exert
//! on a cuboid test mass.
//!
//! Both models act as a delta-correlated force `<F(t)F(t+tau)> = D delta(tau)`.
//! The one-sided force PSD level is identified with `D` itself (no factor
//! two), which is the normalization under which the published LPF bounds are
//! reproduced. The same identification is used by the bound inversions in
//! [`crate::constraints`], so the chain is self-consistent.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{require_positive, CslParams, DpParams, PhysicalConstants, TestMass};

/// Emitted when `r` exceeds a tenth of the cube side, where the small-r
/// geometry factor starts to lose accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeWarning {
    pub r: f64,
    pub r_valid_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryFactor {
    pub alpha: f64,
    pub warning: Option<RegimeWarning>,
}

/// `alpha = 8 pi rho^2 r^4 b^2 / m0^2`.
///
/// Small-r form: for `r << b` only the two faces normal to the motion
/// contribute, so the factor grows with the face area `b^2`. This is the
/// form whose inverse is [`crate::constraints::csl_lambda_bound`].
///
/// Warns for `r > b/10`, fails for `r >= b`.
pub fn csl_geometry_factor(
    tm: &TestMass,
    r: f64,
    consts: &PhysicalConstants,
) -> Result<GeometryFactor> {
    let r = require_positive("r_CSL", r)?;
    if r >= tm.side {
        return Err(Error::Regime {
            r,
            r_valid_max: tm.r_valid_max(),
        });
    }
    let alpha = 8.0 * PI * tm.density.powi(2) * r.powi(4) * tm.side.powi(2) / consts.m0.powi(2);
    let warning = (r > tm.r_valid_max()).then_some(RegimeWarning {
        r,
        r_valid_max: tm.r_valid_max(),
    });
    Ok(GeometryFactor { alpha, warning })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CslDiffusion {
    /// White force-noise intensity, N^2 s (= one-sided N^2/Hz level).
    pub d: f64,
    pub alpha: f64,
    pub warning: Option<RegimeWarning>,
}

/// `D_CSL = lambda (hbar/r)^2 alpha`.
pub fn csl_force_psd(
    p: &CslParams,
    tm: &TestMass,
    consts: &PhysicalConstants,
) -> Result<CslDiffusion> {
    let geometry = csl_geometry_factor(tm, p.r, consts)?;
    let d = p.lambda * (consts.hbar / p.r).powi(2) * geometry.alpha;
    Ok(CslDiffusion {
        d,
        alpha: geometry.alpha,
        warning: geometry.warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DpDiffusion {
    /// N^2 s
    pub d: f64,
}

/// `D_DP = (G hbar / 6 sqrt(pi)) (a/sigma)^3 M rho`.
pub fn dp_force_psd(p: &DpParams, tm: &TestMass, consts: &PhysicalConstants) -> DpDiffusion {
    let ratio = tm.lattice_constant / p.sigma;
    let d = consts.g * consts.hbar / (6.0 * PI.sqrt()) * ratio.powi(3) * tm.mass * tm.density;
    DpDiffusion { d }
}
