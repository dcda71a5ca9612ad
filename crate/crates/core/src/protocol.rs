//! Multi-round NOON construction at the level of the two entangled branches.
//!
//! Between steps the network is always in
//! `amp_l |x_L⟩|n,0⟩ + amp_r |x_R⟩|0,n⟩` with the cavities and fibers empty,
//! where `x` is the ancilla level (`f` before a round, `g` after). One
//! adiabatic round maps `|f_L⟩ → |g_L⟩` while loading one more atom into
//! `|k⟩` on the matching side, so the register only tracks `n`, the two
//! branch amplitudes and the ancilla level.
//!
//! Measurement draws one uniform `f64` from a `ChaCha8Rng` seeded with
//! `seed_from_u64(seed)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, transfer_probability, Trajectory, DEFAULT_DT, DEFAULT_SAMPLE_EVERY};
use crate::error::{Error, Result};
use crate::fidelity::round_fidelity;
use crate::hamiltonian::BuildOptions;
use crate::model::{StateVector, SystemParams};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ancilla {
    /// `|f_L⟩ / |f_R⟩`: ready for an adiabatic round.
    F,
    /// `|g_L⟩ / |g_R⟩`: a round has completed.
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundMode {
    Analytic,
    Simulated,
}

impl std::str::FromStr for RoundMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "simulated" => Ok(Self::Simulated),
            other => Err(Error::InvalidParameters(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoonRegister {
    pub n: u32,
    pub amp_l: C64,
    pub amp_r: C64,
    pub ancilla_level: Ancilla,
    pub est_fidelity: f64,
    /// Set once the Hadamard has been applied; amplitudes are then stored in
    /// the rotated ancilla basis.
    pub interfered: bool,
}

impl NoonRegister {
    pub fn norm_sqr(&self) -> f64 {
        self.amp_l.norm_sqr() + self.amp_r.norm_sqr()
    }

    fn state_name(&self) -> String {
        format!(
            "ancilla {:?}{}",
            self.ancilla_level,
            if self.interfered { " after Hadamard" } else { "" }
        )
    }

    fn require(&self, operation: &'static str, level: Ancilla, interfered: bool) -> Result<()> {
        if self.ancilla_level != level || self.interfered != interfered {
            let expected = match (level, interfered) {
                (Ancilla::F, _) => "ancilla f",
                (Ancilla::G, false) => "ancilla g before Hadamard",
                (Ancilla::G, true) => "ancilla g after Hadamard",
            };
            return Err(Error::ProtocolOrder {
                operation,
                expected,
                found: self.state_name(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Detection {
    #[serde(rename = "g_L")]
    GL,
    #[serde(rename = "g_R")]
    GR,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoonSign {
    #[serde(rename = "NOON+")]
    Plus,
    #[serde(rename = "NOON-")]
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub detected: Detection,
    pub resulting_state: NoonSign,
    pub n: u32,
    /// Born probability of `detected`.
    pub probability: f64,
    /// Normalized amplitudes on `|n,0⟩` and `|0,n⟩` after the collapse.
    pub amp_n0: C64,
    pub amp_0n: C64,
}

/// `(|f_L⟩ + |f_R⟩)/√2` with both atom sets in `|s⟩` and no atoms loaded yet.
pub fn init_register() -> NoonRegister {
    let w = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    NoonRegister {
        n: 0,
        amp_l: w,
        amp_r: w,
        ancilla_level: Ancilla::F,
        est_fidelity: 1.0,
        interfered: false,
    }
}

/// Outcome of a simulated adiabatic round.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedRound {
    pub transfer_probability: f64,
    pub trajectory: Trajectory,
}

/// Integrates one round from `(ψ1 + ψ6)/√2`.
pub fn simulate_round(p: &SystemParams, dt: f64) -> Result<SimulatedRound> {
    let trajectory = evolve(
        &StateVector::protocol_initial(),
        p,
        BuildOptions::default(),
        dt,
        DEFAULT_SAMPLE_EVERY,
    )?;
    Ok(SimulatedRound {
        transfer_probability: transfer_probability(&trajectory),
        trajectory,
    })
}

/// Branch-diagonal adiabatic transfer `|f_x⟩ → |g_x⟩`, loading one atom.
///
/// `simulated` may carry a precomputed round; in [`RoundMode::Simulated`]
/// without one, the round is integrated here.
pub fn adiabatic_round_with(
    reg: &NoonRegister,
    p: &SystemParams,
    mode: RoundMode,
    simulated: Option<&SimulatedRound>,
) -> Result<(NoonRegister, Option<SimulatedRound>)> {
    reg.require("adiabatic_round", Ancilla::F, false)?;
    let mut next = *reg;
    next.n += 1;
    next.ancilla_level = Ancilla::G;
    next.est_fidelity *= round_fidelity(p)?;
    let record = match mode {
        RoundMode::Analytic => None,
        RoundMode::Simulated => {
            let run = match simulated {
                Some(r) => r.clone(),
                None => simulate_round(p, DEFAULT_DT)?,
            };
            next.est_fidelity *= run.transfer_probability;
            Some(run)
        }
    };
    Ok((next, record))
}

pub fn adiabatic_round(reg: &NoonRegister, p: &SystemParams, mode: RoundMode) -> Result<NoonRegister> {
    adiabatic_round_with(reg, p, mode, None).map(|(r, _)| r)
}

/// Ideal `π/2` pulse on `F₂`: `|g_x⟩ → |f_x⟩` in both branches.
pub fn reset_pulse(reg: &NoonRegister) -> Result<NoonRegister> {
    reg.require("reset_pulse", Ancilla::G, false)?;
    Ok(NoonRegister {
        ancilla_level: Ancilla::F,
        ..*reg
    })
}

/// `|g_L⟩ → (|g_L⟩ + |g_R⟩)/√2`, `|g_R⟩ → (|g_L⟩ − |g_R⟩)/√2`.
pub fn hadamard(reg: &NoonRegister) -> Result<NoonRegister> {
    reg.require("hadamard", Ancilla::G, false)?;
    Ok(NoonRegister {
        interfered: true,
        ..hadamard_amplitudes(reg)
    })
}

fn hadamard_amplitudes(reg: &NoonRegister) -> NoonRegister {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    NoonRegister {
        amp_l: (reg.amp_l + reg.amp_r) * s,
        amp_r: (reg.amp_l - reg.amp_r) * s,
        ..*reg
    }
}

/// Projective measurement of the ancilla in `{|g_L⟩, |g_R⟩}`.
///
/// With pre-Hadamard branch amplitudes `(a, b)`, the post-Hadamard state is
/// `[|g_L⟩(a|n,0⟩ + b|0,n⟩) + |g_R⟩(a|n,0⟩ − b|0,n⟩)]/√2`, so each outcome
/// has weight `(|a|² + |b|²)/2` because `|n,0⟩ ⟂ |0,n⟩` for `n ≥ 1`.
pub fn measure(reg: &NoonRegister, seed: u64) -> Result<MeasurementOutcome> {
    reg.require("measure", Ancilla::G, true)?;
    // H² = I recovers the branch amplitudes
    let branches = hadamard_amplitudes(reg);
    let (a, b) = (branches.amp_l, branches.amp_r);
    let weight = a.norm_sqr() + b.norm_sqr();
    let p_left = 0.5 * weight / reg.norm_sqr();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.gen();
    let detected = if u < p_left { Detection::GL } else { Detection::GR };
    let norm = weight.sqrt();
    let (sign, probability, amp_0n) = match detected {
        Detection::GL => (NoonSign::Plus, p_left, b / norm),
        Detection::GR => (NoonSign::Minus, 1.0 - p_left, -b / norm),
    };
    Ok(MeasurementOutcome {
        detected,
        resulting_state: sign,
        n: reg.n,
        probability,
        amp_n0: a / norm,
        amp_0n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Step {
    Init,
    Round {
        index: u32,
        #[serde(skip_serializing_if = "Option::is_none")]
        transfer_probability: Option<f64>,
    },
    Reset { index: u32 },
    Hadamard,
    Measure { outcome: MeasurementOutcome },
}

impl Step {
    fn label(&self) -> String {
        match self {
            Step::Init => "init".into(),
            Step::Round { index, .. } => format!("round {index}"),
            Step::Reset { index } => format!("reset {index}"),
            Step::Hadamard => "hadamard".into(),
            Step::Measure { .. } => "measure".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub step: Step,
    pub register: NoonRegister,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRun {
    pub n: u32,
    pub mode: RoundMode,
    pub seed: u64,
    pub outcome: MeasurementOutcome,
    pub est_fidelity: f64,
    pub transcript: Vec<TranscriptEntry>,
}

fn at_step<T>(index: usize, step: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Step {
        index,
        step: step.to_string(),
        source: Box::new(e),
    })
}

/// `init → (round → reset)ⁿ⁻¹ → round → hadamard → measure`.
pub fn run_protocol(n: u32, p: &SystemParams, seed: u64, mode: RoundMode) -> Result<ProtocolRun> {
    run_protocol_with(n, p, seed, mode, DEFAULT_DT)
}

/// As [`run_protocol`], with the integrator step used by simulated rounds.
pub fn run_protocol_with(
    n: u32,
    p: &SystemParams,
    seed: u64,
    mode: RoundMode,
    dt: f64,
) -> Result<ProtocolRun> {
    if n == 0 {
        return Err(Error::InvalidParameters("protocol needs n >= 1".into()));
    }
    p.validate()?;
    let mut transcript = Vec::with_capacity(2 * n as usize + 2);
    let mut reg = init_register();
    transcript.push(TranscriptEntry { step: Step::Init, register: reg });

    // identical inputs every round: integrate once
    let simulated = match mode {
        RoundMode::Simulated => {
            Some(at_step(1, "round 1", simulate_round(p, dt))?)
        }
        RoundMode::Analytic => None,
    };

    for k in 1..=n {
        let (next, run) = at_step(
            transcript.len(),
            &format!("round {k}"),
            adiabatic_round_with(&reg, p, mode, simulated.as_ref()),
        )?;
        reg = next;
        transcript.push(TranscriptEntry {
            step: Step::Round {
                index: k,
                transfer_probability: run.map(|r| r.transfer_probability),
            },
            register: reg,
        });
        if k < n {
            let step = Step::Reset { index: k };
            reg = at_step(transcript.len(), &step.label(), reset_pulse(&reg))?;
            transcript.push(TranscriptEntry { step, register: reg });
        }
    }

    reg = at_step(transcript.len(), "hadamard", hadamard(&reg))?;
    transcript.push(TranscriptEntry { step: Step::Hadamard, register: reg });

    let outcome = at_step(transcript.len(), "measure", measure(&reg, seed))?;
    transcript.push(TranscriptEntry {
        step: Step::Measure { outcome },
        register: reg,
    });

    Ok(ProtocolRun {
        n,
        mode,
        seed,
        outcome,
        est_fidelity: reg.est_fidelity,
        transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::noon_fidelity;

    const NORM_TOLERANCE: f64 = 1e-12;

    fn lossy() -> SystemParams {
        SystemParams::default().with_eta(0.6).with_gamma_f(0.2)
    }

    #[test]
    fn init_state() {
        let r = init_register();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!((r.n, r.amp_l, r.amp_r, r.ancilla_level, r.est_fidelity), (0, C64::new(s, 0.0), C64::new(s, 0.0), Ancilla::F, 1.0));
        assert!((r.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE);
        assert_eq!(init_register(), r);
    }

    #[test]
    fn one_round() {
        let p = lossy();
        let r = adiabatic_round(&init_register(), &p, RoundMode::Analytic).unwrap();
        assert_eq!(r.n, 1);
        assert_eq!(r.ancilla_level, Ancilla::G);
        assert_eq!((r.amp_l, r.amp_r), (init_register().amp_l, init_register().amp_r));
        assert_eq!(r.est_fidelity, round_fidelity(&p).unwrap());
    }

    #[test]
    fn two_rounds_with_reset() {
        let p = lossy();
        let r = adiabatic_round(&init_register(), &p, RoundMode::Analytic).unwrap();
        let r = reset_pulse(&r).unwrap();
        assert_eq!(r.ancilla_level, Ancilla::F);
        let r = adiabatic_round(&r, &p, RoundMode::Analytic).unwrap();
        assert_eq!(r.n, 2);
        assert_eq!(r.ancilla_level, Ancilla::G);
        assert!((r.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE);
    }

    #[test]
    fn lossless_rounds_keep_unit_fidelity() {
        let p = SystemParams::default();
        let mut r = init_register();
        for _ in 0..5 {
            r = reset_pulse(&adiabatic_round(&r, &p, RoundMode::Analytic).unwrap()).unwrap();
        }
        assert_eq!(r.est_fidelity, 1.0);
    }

    #[test]
    fn order_is_enforced() {
        let p = SystemParams::default();
        let fresh = init_register();
        assert!(matches!(reset_pulse(&fresh), Err(Error::ProtocolOrder { .. })));
        assert!(matches!(hadamard(&fresh), Err(Error::ProtocolOrder { .. })));
        assert!(matches!(measure(&fresh, 0), Err(Error::ProtocolOrder { .. })));
        let done = adiabatic_round(&fresh, &p, RoundMode::Analytic).unwrap();
        assert!(matches!(adiabatic_round(&done, &p, RoundMode::Analytic), Err(Error::ProtocolOrder { .. })));
        assert!(matches!(measure(&done, 0), Err(Error::ProtocolOrder { .. })));
        let reset = reset_pulse(&done).unwrap();
        assert!(matches!(reset_pulse(&reset), Err(Error::ProtocolOrder { .. })));
        let h = hadamard(&done).unwrap();
        assert!(matches!(hadamard(&h), Err(Error::ProtocolOrder { .. })));
        assert!(matches!(reset_pulse(&h), Err(Error::ProtocolOrder { .. })));
    }

    #[test]
    fn hadamard_amplitude_map() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut r = adiabatic_round(&init_register(), &SystemParams::default(), RoundMode::Analytic).unwrap();
        let h = hadamard(&r).unwrap();
        assert!((h.amp_l - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(h.amp_r.norm() < 1e-15);

        r.amp_l = C64::new(1.0, 0.0);
        r.amp_r = C64::new(0.0, 0.0);
        let h = hadamard(&r).unwrap();
        assert!((h.amp_l - C64::new(s, 0.0)).norm() < 1e-15);
        assert!((h.amp_r - C64::new(s, 0.0)).norm() < 1e-15);

        // involution, checked on the amplitude map
        let r2 = NoonRegister { amp_l: C64::new(0.6, 0.1), amp_r: C64::new(-0.2, 0.768_114_574_786_860_8), ..r };
        let back = hadamard_amplitudes(&hadamard_amplitudes(&r2));
        assert!((back.amp_l - r2.amp_l).norm() < 1e-15 && (back.amp_r - r2.amp_r).norm() < 1e-15);
        assert!((hadamard(&r2).unwrap().norm_sqr() - r2.norm_sqr()).abs() <= NORM_TOLERANCE);
    }

    #[test]
    fn measurement_statistics_and_replay() {
        let p = SystemParams::default();
        let ready = hadamard(&adiabatic_round(&init_register(), &p, RoundMode::Analytic).unwrap()).unwrap();
        let trials = 10_000u64;
        let left = (0..trials)
            .filter(|&s| measure(&ready, s).unwrap().detected == Detection::GL)
            .count();
        let freq = left as f64 / trials as f64;
        assert!((freq - 0.5).abs() <= 0.01, "{freq}");
        assert_eq!(measure(&ready, 42).unwrap(), measure(&ready, 42).unwrap());
    }

    #[test]
    fn both_outcomes_are_noon_states() {
        let p = SystemParams::default();
        let ready = hadamard(&adiabatic_round(&init_register(), &p, RoundMode::Analytic).unwrap()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut seen = [false; 2];
        for seed in 0..64 {
            let o = measure(&ready, seed).unwrap();
            assert!((o.probability - 0.5).abs() < 1e-15);
            assert!((o.amp_n0 - C64::new(s, 0.0)).norm() < 1e-15);
            match o.detected {
                Detection::GL => {
                    assert_eq!(o.resulting_state, NoonSign::Plus);
                    assert!((o.amp_0n - C64::new(s, 0.0)).norm() < 1e-15);
                    seen[0] = true;
                }
                Detection::GR => {
                    assert_eq!(o.resulting_state, NoonSign::Minus);
                    assert!((o.amp_0n + C64::new(s, 0.0)).norm() < 1e-15);
                    seen[1] = true;
                }
            }
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn full_run_transcript() {
        let p = lossy();
        for n in [1u32, 2, 5, 10] {
            let run = run_protocol(n, &p, 7, RoundMode::Analytic).unwrap();
            assert_eq!(run.transcript.len(), 2 * n as usize + 2);
            assert_eq!(run.outcome.n, n);
            assert!((run.est_fidelity - noon_fidelity(&p, n).unwrap()).abs() <= 1e-12);
            for e in &run.transcript {
                assert!((e.register.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE);
            }
        }
        let f10 = run_protocol(10, &p, 0, RoundMode::Analytic).unwrap().est_fidelity;
        assert!((f10 - 0.934).abs() < 0.01);
    }

    #[test]
    fn lossless_single_round_run() {
        let run = run_protocol(1, &SystemParams::default(), 3, RoundMode::Analytic).unwrap();
        assert_eq!(run.est_fidelity, 1.0);
        assert!(matches!(run.outcome.resulting_state, NoonSign::Plus | NoonSign::Minus));
    }

    #[test]
    fn simulated_mode_multiplies_transfer() {
        let p = SystemParams::default().time_scaled(30.0);
        let run = run_protocol(2, &p, 1, RoundMode::Simulated).unwrap();
        let transfers: Vec<f64> = run
            .transcript
            .iter()
            .filter_map(|e| match e.step {
                Step::Round { transfer_probability, .. } => transfer_probability,
                _ => None,
            })
            .collect();
        assert_eq!(transfers.len(), 2);
        assert!(transfers[0] > 0.999);
        assert!((run.est_fidelity - transfers[0] * transfers[1]).abs() < 1e-15);
    }

    #[test]
    fn step_errors_carry_index() {
        let p = SystemParams::default().with_eta(0.01).with_gamma_f(0.2);
        match run_protocol(3, &p, 0, RoundMode::Analytic) {
            Err(Error::Step { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(run_protocol(0, &SystemParams::default(), 0, RoundMode::Analytic).is_err());
    }

    #[test]
    fn transcript_serializes() {
        let run = run_protocol(2, &lossy(), 5, RoundMode::Analytic).unwrap();
        let json = serde_json::to_string(&run).unwrap();
        assert!(json.contains("\"kind\":\"round\""));
        assert!(json.contains("NOON"));
    }
}
