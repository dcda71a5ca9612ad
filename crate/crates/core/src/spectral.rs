//! Dark states and instantaneous spectra of the chain Hamiltonian.
//!
//! Each five-state chain has exactly one zero-energy eigenvector while its
//! couplings are nonzero. It lives on the two atomic end states and the fiber
//! state in between, and carries no cavity amplitude.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{build, BuildOptions, HamiltonianMatrix};
use crate::model::{BasisLabel, Chain, StateVector, SystemParams, DIM};
use crate::pulses::effective_couplings;
use crate::C64;

/// Eigenvalues with `|E| ≤ DARK_TOLERANCE · ‖H‖` count as dark.
pub const DARK_TOLERANCE: f64 = 1e-9;
const UNDERFLOW: f64 = 1e-300;

/// Rotates `s` so that its first non-negligible amplitude (label order) is
/// real and non-negative.
pub fn fix_phase(s: &StateVector) -> StateVector {
    let scale = s.amps().iter().map(|a| a.norm()).fold(0.0, f64::max);
    match s.amps().iter().find(|a| a.norm() > 1e-12 * scale) {
        Some(lead) => StateVector(s.0 * (lead.conj() / lead.norm())),
        None => *s,
    }
}

fn three_level_dark(
    chain: Chain,
    pump: f64,
    drive: f64,
    eta: f64,
) -> Result<StateVector> {
    let [a, _, fiber, _, b] = chain.labels();
    let ca = pump * eta;
    let cf = -pump * drive;
    let cb = drive * eta;
    let k = (ca * ca + cf * cf + cb * cb).sqrt();
    if !(k > UNDERFLOW) {
        return Err(Error::DegenerateDarkState { norm: k });
    }
    let mut s = StateVector::zeros();
    s[a] = C64::new(ca / k, 0.0);
    s[fiber] = C64::new(cf / k, 0.0);
    s[b] = C64::new(cb / k, 0.0);
    Ok(fix_phase(&s))
}

/// `(Ω_Le η_A ψ1 − Ω_Le Ω_1e ψ3 + Ω_1e η_A ψ5) / K₀`.
pub fn analytic_dark_left(t: f64, p: &SystemParams) -> Result<StateVector> {
    let c = effective_couplings(t, p)?;
    three_level_dark(Chain::Left, c.left, c.one, p.eta_a)
}

/// `(Ω_Re η_B ψ6 − Ω_Re Ω_1e ψ8 + Ω_1e η_B ψ10) / K₁`.
pub fn analytic_dark_right(t: f64, p: &SystemParams) -> Result<StateVector> {
    let c = effective_couplings(t, p)?;
    three_level_dark(Chain::Right, c.right, c.one, p.eta_b)
}

pub fn analytic_dark(t: f64, p: &SystemParams, chain: Chain) -> Result<StateVector> {
    match chain {
        Chain::Left => analytic_dark_left(t, p),
        Chain::Right => analytic_dark_right(t, p),
    }
}

/// Dark state in the strong-fiber limit, where the fiber amplitude drops out:
/// `(Ω_Le ψ1 + Ω_1e ψ5)/√(Ω_Le² + Ω_1e²)` or its right-chain mirror.
pub fn reduced_dark(t: f64, p: &SystemParams, side: Chain) -> Result<StateVector> {
    let c = effective_couplings(t, p)?;
    let pump = match side {
        Chain::Left => c.left,
        Chain::Right => c.right,
    };
    let [a, _, _, _, b] = side.labels();
    let k = (pump * pump + c.one * c.one).sqrt();
    if !(k > UNDERFLOW) {
        return Err(Error::DegenerateDarkState { norm: k });
    }
    let mut s = StateVector::zeros();
    s[a] = C64::new(pump / k, 0.0);
    s[b] = C64::new(c.one / k, 0.0);
    Ok(fix_phase(&s))
}

/// `|⟨(D_L + D_R)/√2 | ψ⟩|²`, the weight of `ψ` on the two-branch dark state.
pub fn dark_overlap(t: f64, p: &SystemParams, psi: &StateVector) -> Result<f64> {
    let d = StateVector(
        (analytic_dark_left(t, p)?.0 + analytic_dark_right(t, p)?.0)
            * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    );
    Ok(d.inner(psi).norm_sqr())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSnapshot {
    pub time: f64,
    /// Ascending.
    pub eigenvalues: [f64; DIM],
    #[serde(skip)]
    pub eigenvectors: Vec<StateVector>,
    pub dark_indices: Vec<usize>,
}

impl SpectrumSnapshot {
    pub fn dark_vectors(&self) -> Vec<StateVector> {
        self.dark_indices.iter().map(|&i| self.eigenvectors[i]).collect()
    }
}

/// `‖v − Σ_b ⟨b|v⟩ b‖` for an orthonormal `basis`.
pub fn projection_residual(v: &StateVector, basis: &[StateVector]) -> f64 {
    let mut r = v.0;
    for b in basis {
        r -= b.0 * b.inner(v);
    }
    r.norm()
}

/// Eigenpairs of one chain block, embedded in the 10-dimensional space.
fn chain_eigen(h: &HamiltonianMatrix, chain: Chain) -> Result<Vec<(f64, StateVector)>> {
    let block = h.block(chain);
    let eig = SymmetricEigen::try_new(block, f64::EPSILON, 10_000).ok_or_else(|| {
        Error::NumericalFailure(format!("eigensolver did not converge at t = {}", h.time))
    })?;
    let o = chain.offset();
    Ok((0..5)
        .map(|k| {
            let mut v = StateVector::zeros();
            for i in 0..5 {
                v.0[o + i] = eig.eigenvectors[(i, k)];
            }
            (eig.eigenvalues[k], fix_phase(&v))
        })
        .collect())
}

fn ensure_block_diagonal(h: &HamiltonianMatrix) -> Result<()> {
    if h.cross_block_max() != 0.0 {
        return Err(Error::NumericalFailure("Hamiltonian couples the two chains".into()));
    }
    Ok(())
}

/// Full eigendecomposition of the lossless Hamiltonian at `t`.
///
/// The two chains are diagonalized separately, so when their spectra coincide
/// every eigenvector still lives on a single chain.
pub fn instantaneous_spectrum(t: f64, p: &SystemParams) -> Result<SpectrumSnapshot> {
    let h = build(t, p, BuildOptions::default())?;
    ensure_block_diagonal(&h)?;
    let mut pairs = chain_eigen(&h, Chain::Left)?;
    pairs.extend(chain_eigen(&h, Chain::Right)?);
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let tol = DARK_TOLERANCE * h.norm();
    let eigenvalues: [f64; DIM] = std::array::from_fn(|i| pairs[i].0);
    let dark_indices = (0..DIM).filter(|&i| eigenvalues[i].abs() <= tol).collect();
    Ok(SpectrumSnapshot {
        time: t,
        eigenvalues,
        eigenvectors: pairs.into_iter().map(|(_, v)| v).collect(),
        dark_indices,
    })
}

fn dark_derivative(t: f64, p: &SystemParams, chain: Chain, delta: f64) -> Result<StateVector> {
    let plus = analytic_dark(t + delta, p, chain)?;
    let minus = analytic_dark(t - delta, p, chain)?;
    Ok(StateVector((plus.0 - minus.0) * C64::new(0.5 / delta, 0.0)))
}

/// `max_t max_k |⟨E_k|dD/dt⟩| / |E_k|` over the bright eigenstates of both
/// chains, sampled on `n_samples` evenly spaced points of `[0, T]`.
pub fn adiabaticity_metric(p: &SystemParams, n_samples: usize) -> Result<f64> {
    if n_samples < 10 {
        return Err(Error::InvalidParameters(format!(
            "adiabaticity metric needs at least 10 samples (got {n_samples})"
        )));
    }
    let delta = p.total_time / 1e5;
    let mut worst = 0.0f64;
    for j in 0..n_samples {
        let t = p.total_time * j as f64 / (n_samples - 1) as f64;
        let h = build(t, p, BuildOptions::default())?;
        ensure_block_diagonal(&h)?;
        let tol = DARK_TOLERANCE * h.norm();
        for chain in [Chain::Left, Chain::Right] {
            let pairs = chain_eigen(&h, chain)?;
            let n_dark = pairs.iter().filter(|(e, _)| e.abs() <= tol).count();
            if n_dark != 1 {
                return Err(Error::DegenerateGap {
                    time: t,
                    detail: format!("{n_dark} zero-energy states in the {chain:?} chain"),
                });
            }
            let d_dot = dark_derivative(t, p, chain, delta)?;
            for (e, v) in pairs.iter().filter(|(e, _)| e.abs() > tol) {
                worst = worst.max(v.inner(&d_dot).norm() / e.abs());
            }
        }
    }
    Ok(worst)
}

/// Largest `|amp(ψ3)|²` carried by the left dark state over `n` samples.
pub fn max_fiber_population(p: &SystemParams, n: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for j in 0..n {
        let t = p.total_time * j as f64 / (n - 1).max(1) as f64;
        let d = analytic_dark_left(t, p)?;
        worst = worst.max(d[BasisLabel::Psi3].norm_sqr());
    }
    Ok(worst)
}
