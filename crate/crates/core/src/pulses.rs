//! Gaussian drive pulses, effective Raman couplings and the boundary-ratio
//! check that pins the dark state to `ψ1`/`ψ6` at the start of the window
//! and to `ψ5`/`ψ10` at the end.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Denominators below this are treated as a switched-off pulse.
const UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PulseId {
    /// `Ω_L`, driving the atom in cavity 1.
    L,
    /// `Ω_R`, driving the atom in cavity 3.
    R,
    /// `Ω₁` (field `F₁`), driving the ancilla in cavity 2.
    One,
}

impl PulseId {
    pub const ALL: [PulseId; 3] = [PulseId::L, PulseId::R, PulseId::One];

    /// Turn-on offset `t_ξ` relative to the window midpoint.
    pub fn offset(self, p: &SystemParams) -> f64 {
        match self {
            PulseId::L => p.t_l,
            PulseId::R => p.t_r,
            PulseId::One => p.t_1,
        }
    }

    /// Time at which the pulse peaks.
    pub fn center(self, p: &SystemParams) -> f64 {
        0.5 * p.total_time + self.offset(p)
    }
}

/// `Ω₀ exp[−(t − T/2 − t_ξ)² / (2τ²)]`, evaluated untruncated for any `t`.
pub fn gaussian_pulse(t: f64, xi: PulseId, p: &SystemParams) -> f64 {
    let x = t - xi.center(p);
    p.omega0 * (-x * x / (2.0 * p.tau_pulse * p.tau_pulse)).exp()
}

/// Two-photon Raman coupling `Ω_ξ(t) g / Δ`.
pub fn effective_rabi(t: f64, xi: PulseId, p: &SystemParams) -> Result<f64> {
    if !(p.delta > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "detuning must be > 0 (got {})",
            p.delta
        )));
    }
    Ok(gaussian_pulse(t, xi, p) * p.g / p.delta)
}

/// Effective couplings `(Ω_Le, Ω_Re, Ω_1e)` at `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub left: f64,
    pub right: f64,
    pub one: f64,
}

pub fn effective_couplings(t: f64, p: &SystemParams) -> Result<Couplings> {
    Ok(Couplings {
        left: effective_rabi(t, PulseId::L, p)?,
        right: effective_rabi(t, PulseId::R, p)?,
        one: effective_rabi(t, PulseId::One, p)?,
    })
}

/// Counterpart-pulse ratios at the window edges; both should be small.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRatios {
    /// `max(Ω_1e/Ω_Le, Ω_1e/Ω_Re)` at `t = 0`.
    pub ratio_start: f64,
    /// `max(Ω_Le/Ω_1e, Ω_Re/Ω_1e)` at `t = T`.
    pub ratio_end: f64,
}

pub fn boundary_ratio_check(p: &SystemParams) -> Result<BoundaryRatios> {
    let ratio = |num: f64, den: f64, what: &str, t: f64| {
        if den < UNDERFLOW {
            Err(Error::DegeneratePulse(format!("{what} underflows at t = {t}")))
        } else {
            Ok(num / den)
        }
    };
    let start = effective_couplings(0.0, p)?;
    let end = effective_couplings(p.total_time, p)?;
    let ratio_start = ratio(start.one, start.left, "Ω_Le", 0.0)?
        .max(ratio(start.one, start.right, "Ω_Re", 0.0)?);
    let t_end = p.total_time;
    let ratio_end =
        ratio(end.left, end.one, "Ω_1e", t_end)?.max(ratio(end.right, end.one, "Ω_1e", t_end)?);
    Ok(BoundaryRatios {
        ratio_start,
        ratio_end,
    })
}
