//! Fixed-step RK4 integration of `i dψ/dt = H(t) ψ` over `[0, T]`.

use crate::error::{Error, Result};
use crate::hamiltonian::{build, BuildOptions, HamiltonianMatrix};
use crate::model::{BasisLabel, StateVector, SystemParams, DIM};
use crate::C64;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_SAMPLE_EVERY: usize = 100;
/// Norm drift above this in a lossless run aborts with [`Error::StepTooLarge`].
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Sampled solution. Always holds at least the samples at `t = 0` and `t = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<StateVector>,
    step_size: f64,
    hermitian: bool,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    /// True when the run had no loss terms.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory holds at least two samples")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &StateVector)> {
        self.times.iter().copied().zip(self.states.iter())
    }

    /// `max |‖ψ‖² − 1|` over the samples.
    pub fn max_norm_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn derivative(h: &HamiltonianMatrix, psi: &StateVector) -> StateVector {
    // -i H ψ
    StateVector((h.entries * psi.0) * C64::new(0.0, -1.0))
}

fn axpy(psi: &StateVector, k: &StateVector, a: f64) -> StateVector {
    StateVector(psi.0 + k.0 * C64::new(a, 0.0))
}

pub fn evolve(
    psi0: &StateVector,
    p: &SystemParams,
    opts: BuildOptions,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    p.validate()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameters(format!("dt must be > 0 (got {dt})")));
    }
    if sample_every == 0 {
        return Err(Error::InvalidParameters("sample_every must be >= 1".into()));
    }
    if (psi0.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameters(format!(
            "initial state not normalized (‖ψ‖² = {})",
            psi0.norm_sqr()
        )));
    }

    let hermitian = !opts.include_decay || (p.gamma_f == 0.0 && p.kappa_c == 0.0);
    let total = p.total_time;
    let n_steps = ((total / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = total / n_steps as f64;

    let mut times = vec![0.0];
    let mut states = vec![*psi0];
    let mut psi = *psi0;
    let mut h_now = build(0.0, p, opts)?;
    let mut worst_drift = 0.0f64;

    for k in 0..n_steps {
        let t = k as f64 * h;
        let t_next = if k + 1 == n_steps { total } else { (k + 1) as f64 * h };
        let h_mid = build(t + 0.5 * h, p, opts)?;
        let h_next = build(t_next, p, opts)?;

        let k1 = derivative(&h_now, &psi);
        let k2 = derivative(&h_mid, &axpy(&psi, &k1, 0.5 * h));
        let k3 = derivative(&h_mid, &axpy(&psi, &k2, 0.5 * h));
        let k4 = derivative(&h_next, &axpy(&psi, &k3, h));
        psi = StateVector(
            psi.0 + (k1.0 + (k2.0 + k3.0) * C64::new(2.0, 0.0) + k4.0) * C64::new(h / 6.0, 0.0),
        );
        h_now = h_next;

        if hermitian {
            worst_drift = worst_drift.max((psi.norm_sqr() - 1.0).abs());
        }
        if (k + 1) % sample_every == 0 || k + 1 == n_steps {
            times.push(t_next);
            states.push(psi);
        }
    }

    if hermitian && worst_drift > NORM_DRIFT_LIMIT {
        return Err(Error::StepTooLarge {
            drift: worst_drift,
            limit: NORM_DRIFT_LIMIT,
            dt: h,
        });
    }

    Ok(Trajectory {
        times,
        states,
        step_size: h,
        hermitian,
    })
}

/// `|amp_i|²` per label.
pub fn populations(s: &StateVector) -> [f64; DIM] {
    s.populations()
}

/// `P(ψ5) + P(ψ10)` at the last sample.
pub fn transfer_probability(traj: &Trajectory) -> f64 {
    let p = traj.final_state().populations();
    p[BasisLabel::Psi5.index_of()] + p[BasisLabel::Psi10.index_of()]
}

/// `|⟨target|ψ(T)⟩|²` under the lossy, non-Hermitian evolution.
pub fn survival_fidelity(
    psi0: &StateVector,
    target: &StateVector,
    p: &SystemParams,
    dt: f64,
) -> Result<f64> {
    if (target.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameters("target state not normalized".into()));
    }
    let traj = evolve(psi0, p, BuildOptions::lossy(), dt, usize::MAX)?;
    Ok(target.inner(traj.final_state()).norm_sqr())
}
