//! Physical parameters, the single-excitation basis and the state container.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::SVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Dimension of the single-excitation subspace.
pub const DIM: usize = 10;

/// Rates and detunings in units of `g`, times in units of `1/g`.
///
/// Missing fields deserialize to the default set, which is the reference pulse schedule
/// with `η = 0.6g` and a lossless network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemParams {
    /// Atom–cavity coupling, shared by every cavity mode.
    pub g: f64,
    /// Common single-photon detuning `Δ`.
    pub delta: f64,
    /// Fiber A coupling to cavity 1 and the left mode of cavity 2.
    pub eta_a: f64,
    /// Fiber B coupling to the right mode of cavity 2 and cavity 3.
    pub eta_b: f64,
    /// Fiber decay rate (both fibers).
    pub gamma_f: f64,
    /// Cavity decay rate (all four cavity modes).
    pub kappa_c: f64,
    /// Pulse amplitude `Ω₀`.
    pub omega0: f64,
    /// Adiabatic window `T`.
    pub total_time: f64,
    /// Gaussian waist `τ`.
    pub tau_pulse: f64,
    pub t_l: f64,
    pub t_r: f64,
    pub t_1: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            g: 1.0,
            delta: 15.0,
            eta_a: 0.6,
            eta_b: 0.6,
            gamma_f: 0.0,
            kappa_c: 0.0,
            omega0: 1.5,
            total_time: 100.0,
            tau_pulse: 12.0,
            t_l: -15.0,
            t_r: -15.0,
            t_1: 15.0,
        }
    }
}

impl SystemParams {
    /// Sets both fiber couplings.
    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta_a = eta;
        self.eta_b = eta;
        self
    }

    pub fn with_gamma_f(mut self, gamma_f: f64) -> Self {
        self.gamma_f = gamma_f;
        self
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    /// Stretches the whole schedule (window, waist and offsets) by `factor`,
    /// leaving the pulse shape unchanged in units of `T`.
    pub fn time_scaled(mut self, factor: f64) -> Self {
        self.total_time *= factor;
        self.tau_pulse *= factor;
        self.t_l *= factor;
        self.t_r *= factor;
        self.t_1 *= factor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g", self.g),
            ("delta", self.delta),
            ("eta_a", self.eta_a),
            ("eta_b", self.eta_b),
            ("gamma_f", self.gamma_f),
            ("kappa_c", self.kappa_c),
            ("omega0", self.omega0),
            ("total_time", self.total_time),
            ("tau_pulse", self.tau_pulse),
            ("t_l", self.t_l),
            ("t_r", self.t_r),
            ("t_1", self.t_1),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParameters(format!("{name} is not finite ({v})")));
        }
        let rates = [
            ("g", self.g),
            ("eta_a", self.eta_a),
            ("eta_b", self.eta_b),
            ("gamma_f", self.gamma_f),
            ("kappa_c", self.kappa_c),
            ("omega0", self.omega0),
        ];
        if let Some((name, v)) = rates.iter().find(|(_, v)| *v < 0.0) {
            return Err(Error::InvalidParameters(format!("{name} must be >= 0 (got {v})")));
        }
        for (name, v) in [
            ("delta", self.delta),
            ("total_time", self.total_time),
            ("tau_pulse", self.tau_pulse),
        ] {
            if v <= 0.0 {
                return Err(Error::InvalidParameters(format!("{name} must be > 0 (got {v})")));
            }
        }
        Ok(())
    }
}

/// Level of the double-Λ ancilla atom in cavity 2 (excited levels eliminated).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AncillaLevel {
    FL,
    FR,
    GL,
    GR,
}

impl AncillaLevel {
    pub const ALL: [AncillaLevel; 4] = [Self::FL, Self::FR, Self::GL, Self::GR];

    pub fn excitation(self) -> u32 {
        match self {
            Self::FL | Self::FR => 1,
            Self::GL | Self::GR => 0,
        }
    }
}

/// Ground levels of the Λ atoms in cavities 1 and 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AtomLevel {
    S,
    K,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 2] = [Self::S, Self::K];

    pub fn excitation(self) -> u32 {
        match self {
            Self::S => 0,
            Self::K => 1,
        }
    }
}

/// Bosonic modes: four cavity modes and two fiber modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Cavity1,
    Cavity2L,
    Cavity2R,
    Cavity3,
    FiberA,
    FiberB,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Self::Cavity1,
        Self::Cavity2L,
        Self::Cavity2R,
        Self::Cavity3,
        Self::FiberA,
        Self::FiberB,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_fiber(self) -> bool {
        matches!(self, Self::FiberA | Self::FiberB)
    }
}

/// Full physical content of a product basis ket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Occupation {
    pub ancilla: AncillaLevel,
    pub left_atom: AtomLevel,
    pub right_atom: AtomLevel,
    /// Photon numbers indexed by [`Mode::index`].
    pub photons: [u8; 6],
}

impl Occupation {
    pub fn excitation_number(&self) -> u32 {
        self.ancilla.excitation()
            + self.left_atom.excitation()
            + self.right_atom.excitation()
            + self.photons.iter().map(|&n| u32::from(n)).sum::<u32>()
    }
}

/// The two decoupled five-state chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chain {
    Left,
    Right,
}

impl Chain {
    pub fn labels(self) -> [BasisLabel; 5] {
        use BasisLabel::*;
        match self {
            Chain::Left => [Psi1, Psi2, Psi3, Psi4, Psi5],
            Chain::Right => [Psi6, Psi7, Psi8, Psi9, Psi10],
        }
    }

    /// Index of the chain's first label.
    pub fn offset(self) -> usize {
        match self {
            Chain::Left => 0,
            Chain::Right => 5,
        }
    }
}

/// The ten basis kets of the one-excitation subspace.
///
/// `Psi1..Psi5` form the chain reached from `|f_L⟩`, `Psi6..Psi10` the chain
/// reached from `|f_R⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasisLabel {
    Psi1,
    Psi2,
    Psi3,
    Psi4,
    Psi5,
    Psi6,
    Psi7,
    Psi8,
    Psi9,
    Psi10,
}

impl BasisLabel {
    pub const ALL: [BasisLabel; DIM] = [
        Self::Psi1,
        Self::Psi2,
        Self::Psi3,
        Self::Psi4,
        Self::Psi5,
        Self::Psi6,
        Self::Psi7,
        Self::Psi8,
        Self::Psi9,
        Self::Psi10,
    ];

    pub fn index_of(self) -> usize {
        self as usize
    }

    pub fn label_of(index: usize) -> Option<BasisLabel> {
        Self::ALL.get(index).copied()
    }

    pub fn chain(self) -> Chain {
        if self.index_of() < 5 {
            Chain::Left
        } else {
            Chain::Right
        }
    }

    /// Ket in the notation `|ancilla⟩|left⟩L|right⟩R|cavities⟩c|fibers⟩f`.
    pub fn describe(self) -> &'static str {
        match self {
            Self::Psi1 => "|fL⟩|s⟩L|s⟩R|000⟩c|00⟩f",
            Self::Psi2 => "|gL⟩|s⟩L|s⟩R|01l0⟩c|00⟩f",
            Self::Psi3 => "|gL⟩|s⟩L|s⟩R|000⟩c|1l0⟩f",
            Self::Psi4 => "|gL⟩|s⟩L|s⟩R|1l00⟩c|00⟩f",
            Self::Psi5 => "|gL⟩|k⟩L|s⟩R|000⟩c|00⟩f",
            Self::Psi6 => "|fR⟩|s⟩L|s⟩R|000⟩c|00⟩f",
            Self::Psi7 => "|gR⟩|s⟩L|s⟩R|01r0⟩c|00⟩f",
            Self::Psi8 => "|gR⟩|s⟩L|s⟩R|000⟩c|01r⟩f",
            Self::Psi9 => "|gR⟩|s⟩L|s⟩R|001r⟩c|00⟩f",
            Self::Psi10 => "|gR⟩|s⟩L|k⟩R|000⟩c|00⟩f",
        }
    }

    pub fn occupation(self) -> Occupation {
        use AncillaLevel::*;
        use AtomLevel::*;
        let photon = |m: Option<Mode>| {
            let mut p = [0u8; 6];
            if let Some(m) = m {
                p[m.index()] = 1;
            }
            p
        };
        let (ancilla, left_atom, right_atom, mode) = match self {
            Self::Psi1 => (FL, S, S, None),
            Self::Psi2 => (GL, S, S, Some(Mode::Cavity2L)),
            Self::Psi3 => (GL, S, S, Some(Mode::FiberA)),
            Self::Psi4 => (GL, S, S, Some(Mode::Cavity1)),
            Self::Psi5 => (GL, K, S, None),
            Self::Psi6 => (FR, S, S, None),
            Self::Psi7 => (GR, S, S, Some(Mode::Cavity2R)),
            Self::Psi8 => (GR, S, S, Some(Mode::FiberB)),
            Self::Psi9 => (GR, S, S, Some(Mode::Cavity3)),
            Self::Psi10 => (GR, S, K, None),
        };
        Occupation {
            ancilla,
            left_atom,
            right_atom,
            photons: photon(mode),
        }
    }

    /// Fiber-populated labels.
    pub fn is_fiber(self) -> bool {
        matches!(self, Self::Psi3 | Self::Psi8)
    }

    /// Cavity-populated labels.
    pub fn is_cavity(self) -> bool {
        matches!(self, Self::Psi2 | Self::Psi4 | Self::Psi7 | Self::Psi9)
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ψ{}", self.index_of() + 1)
    }
}

/// Complex amplitudes over [`BasisLabel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector(pub SVector<C64, DIM>);

impl Default for StateVector {
    fn default() -> Self {
        Self::zeros()
    }
}

impl StateVector {
    pub fn zeros() -> Self {
        Self(SVector::zeros())
    }

    pub fn basis(label: BasisLabel) -> Self {
        let mut s = Self::zeros();
        s[label] = C64::new(1.0, 0.0);
        s
    }

    pub fn from_amplitudes(amps: [C64; DIM]) -> Self {
        Self(SVector::from(amps))
    }

    /// Equal-weight superposition `(|a⟩ + |b⟩)/√2`.
    pub fn bell(a: BasisLabel, b: BasisLabel) -> Self {
        let mut s = Self::zeros();
        let w = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        s[a] += w;
        s[b] += w;
        s
    }

    /// `(ψ1 + ψ6)/√2`, the state after loading both atom pairs.
    pub fn protocol_initial() -> Self {
        Self::bell(BasisLabel::Psi1, BasisLabel::Psi6)
    }

    /// `(ψ5 + ψ10)/√2`, the target after one ideal round.
    pub fn protocol_target() -> Self {
        Self::bell(BasisLabel::Psi5, BasisLabel::Psi10)
    }

    pub fn amps(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn normalized(&self) -> Result<StateVector> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "cannot normalize state with norm {n}"
            )));
        }
        Ok(Self(self.0.unscale(n)))
    }

    pub fn populations(&self) -> [f64; DIM] {
        std::array::from_fn(|i| self.0[i].norm_sqr())
    }

    /// Weight carried by `chain`.
    pub fn chain_weight(&self, chain: Chain) -> f64 {
        chain.labels().iter().map(|&l| self[l].norm_sqr()).sum()
    }
}

impl Index<BasisLabel> for StateVector {
    type Output = C64;

    fn index(&self, label: BasisLabel) -> &C64 {
        &self.0[label.index_of()]
    }
}

impl IndexMut<BasisLabel> for StateVector {
    fn index_mut(&mut self, label: BasisLabel) -> &mut C64 {
        &mut self.0[label.index_of()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_endpoints() {
        assert_eq!(BasisLabel::Psi1.index_of(), 0);
        assert_eq!(BasisLabel::Psi10.index_of(), 9);
        assert_eq!(BasisLabel::label_of(10), None);
    }

    #[test]
    fn index_label_bijection() {
        for l in BasisLabel::ALL {
            assert_eq!(BasisLabel::label_of(l.index_of()), Some(l));
        }
        for i in 0..DIM {
            assert_eq!(BasisLabel::label_of(i).unwrap().index_of(), i);
        }
    }

    #[test]
    fn describe_matches_printed_kets() {
        assert_eq!(BasisLabel::Psi1.describe(), "|fL⟩|s⟩L|s⟩R|000⟩c|00⟩f");
        assert_eq!(BasisLabel::Psi8.describe(), "|gR⟩|s⟩L|s⟩R|000⟩c|01r⟩f");
        assert_eq!(BasisLabel::Psi5.describe(), "|gL⟩|k⟩L|s⟩R|000⟩c|00⟩f");
    }

    #[test]
    fn every_label_carries_one_excitation() {
        for l in BasisLabel::ALL {
            assert_eq!(l.occupation().excitation_number(), 1, "{l}");
        }
    }

    #[test]
    fn occupations_distinct() {
        let occ: std::collections::HashSet<_> =
            BasisLabel::ALL.iter().map(|l| l.occupation()).collect();
        assert_eq!(occ.len(), DIM);
    }

    #[test]
    fn chains_partition_the_basis() {
        let left = Chain::Left.labels();
        let right = Chain::Right.labels();
        assert!(left.iter().all(|l| !right.contains(l)));
        let mut all: Vec<_> = left.iter().chain(right.iter()).copied().collect();
        all.sort();
        assert_eq!(all, BasisLabel::ALL.to_vec());
        assert!(left.iter().all(|l| l.chain() == Chain::Left));
        assert!(right.iter().all(|l| l.chain() == Chain::Right));
    }

    #[test]
    fn default_schedule_values() {
        let p = SystemParams::default();
        assert_eq!(p.omega0, 1.5);
        assert_eq!(p.total_time, 100.0);
        assert_eq!(p.tau_pulse, 12.0);
        assert_eq!((p.t_l, p.t_r, p.t_1), (-15.0, -15.0, 15.0));
        assert_eq!(p.delta, 15.0);
        assert_eq!(p.g, 1.0);
        p.validate().unwrap();
    }

    #[test]
    fn json_missing_fields_take_defaults() {
        let p: SystemParams = serde_json::from_str(r#"{"gamma_f": 0.2, "eta_a": 0.3}"#).unwrap();
        assert_eq!(p.gamma_f, 0.2);
        assert_eq!(p.eta_a, 0.3);
        assert_eq!(p.eta_b, 0.6);
        assert_eq!(p.omega0, 1.5);
        let back: SystemParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn validate_rejects_bad_values() {
        let base = SystemParams::default();
        assert!(SystemParams { delta: 0.0, ..base }.validate().is_err());
        assert!(SystemParams { total_time: -1.0, ..base }.validate().is_err());
        assert!(SystemParams { tau_pulse: 0.0, ..base }.validate().is_err());
        assert!(SystemParams { gamma_f: -0.1, ..base }.validate().is_err());
        assert!(SystemParams { t_1: f64::NAN, ..base }.validate().is_err());
    }

    #[test]
    fn populations_of_simple_states() {
        let p = StateVector::basis(BasisLabel::Psi1).populations();
        assert_eq!(p[0], 1.0);
        assert!(p[1..].iter().all(|&x| x == 0.0));

        let p = StateVector::protocol_initial().populations();
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[5] - 0.5).abs() < 1e-15);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_state_cannot_be_normalized() {
        assert!(StateVector::zeros().normalized().is_err());
    }
}
