//! Operator-level construction of the same Hamiltonian on a photon-truncated
//! tensor-product space. Only used to check the hand-coded 10×10 matrix and
//! the claim that one excitation never leaves the ten labelled kets.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{AncillaLevel, AtomLevel, BasisLabel, Mode, Occupation, SystemParams, DIM};
use crate::pulses::{effective_couplings, gaussian_pulse, PulseId};
use crate::C64;

use super::{BuildOptions, Matrix10};

/// Largest supported photon cutoff. `n_max = 2` already gives 11 664 states.
pub const FOCK_CUTOFF_CAP: usize = 2;

/// `{ancilla} ⊗ {left atom} ⊗ {right atom} ⊗ Fock(6 modes, ≤ n_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    pub n_max: usize,
}

impl FockBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidParameters("photon cutoff must be >= 1".into()));
        }
        if n_max > FOCK_CUTOFF_CAP {
            return Err(Error::CapacityExceeded {
                n_max,
                cap: FOCK_CUTOFF_CAP,
            });
        }
        Ok(Self { n_max })
    }

    fn radix(&self) -> usize {
        self.n_max + 1
    }

    pub fn len(&self) -> usize {
        AncillaLevel::ALL.len() * 2 * 2 * self.radix().pow(Mode::ALL.len() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, occ: &Occupation) -> Option<usize> {
        if occ.photons.iter().any(|&n| n as usize > self.n_max) {
            return None;
        }
        let mut i = occ.ancilla as usize;
        i = i * 2 + occ.left_atom as usize;
        i = i * 2 + occ.right_atom as usize;
        for &n in &occ.photons {
            i = i * self.radix() + n as usize;
        }
        Some(i)
    }

    pub fn state(&self, mut i: usize) -> Occupation {
        let mut photons = [0u8; 6];
        for slot in photons.iter_mut().rev() {
            *slot = (i % self.radix()) as u8;
            i /= self.radix();
        }
        let right_atom = AtomLevel::ALL[i % 2];
        i /= 2;
        let left_atom = AtomLevel::ALL[i % 2];
        i /= 2;
        Occupation {
            ancilla: AncillaLevel::ALL[i],
            left_atom,
            right_atom,
            photons,
        }
    }

    /// Tensor-basis indices of `ψ1..ψ10`, in label order.
    pub fn subspace_indices(&self) -> [usize; DIM] {
        BasisLabel::ALL.map(|l| {
            self.index_of(&l.occupation())
                .expect("labels hold at most one photon")
        })
    }
}

/// Sparse matrix over a [`FockBasis`], keyed by `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub basis: FockBasis,
    pub time: f64,
    pub entries: BTreeMap<(usize, usize), C64>,
}

impl FockOperator {
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.entries.get(&(row, col)).copied().unwrap_or_default()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Restriction to the ten labelled kets, in label order.
    pub fn restrict_to_subspace(&self) -> Matrix10 {
        let idx = self.basis.subspace_indices();
        Matrix10::from_fn(|r, c| self.entry(idx[r], idx[c]))
    }

    /// Largest `|H_ij|` with exactly one of `i`, `j` inside the subspace.
    pub fn off_subspace_max(&self) -> f64 {
        let idx = self.basis.subspace_indices();
        self.entries
            .iter()
            .filter(|((r, c), _)| idx.contains(r) != idx.contains(c))
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Atomic raising/lowering pair attached to one cavity mode.
#[derive(Clone, Copy)]
enum Transition {
    Left,
    Right,
    AncillaL,
    AncillaR,
}

impl Transition {
    /// `|to⟩⟨from|` applied to `occ`; the photon is created in the paired mode.
    fn lower(self, occ: &Occupation) -> Option<Occupation> {
        let mut o = *occ;
        match self {
            Self::Left if o.left_atom == AtomLevel::K => o.left_atom = AtomLevel::S,
            Self::Right if o.right_atom == AtomLevel::K => o.right_atom = AtomLevel::S,
            Self::AncillaL if o.ancilla == AncillaLevel::FL => o.ancilla = AncillaLevel::GL,
            Self::AncillaR if o.ancilla == AncillaLevel::FR => o.ancilla = AncillaLevel::GR,
            _ => return None,
        }
        Some(o)
    }

    fn raise(self, occ: &Occupation) -> Option<Occupation> {
        let mut o = *occ;
        match self {
            Self::Left if o.left_atom == AtomLevel::S => o.left_atom = AtomLevel::K,
            Self::Right if o.right_atom == AtomLevel::S => o.right_atom = AtomLevel::K,
            Self::AncillaL if o.ancilla == AncillaLevel::GL => o.ancilla = AncillaLevel::FL,
            Self::AncillaR if o.ancilla == AncillaLevel::GR => o.ancilla = AncillaLevel::FR,
            _ => return None,
        }
        Some(o)
    }
}

fn create(occ: &Occupation, m: Mode, n_max: usize) -> Option<(Occupation, f64)> {
    let n = occ.photons[m.index()] as usize;
    if n >= n_max {
        return None;
    }
    let mut o = *occ;
    o.photons[m.index()] += 1;
    Some((o, ((n + 1) as f64).sqrt()))
}

fn annihilate(occ: &Occupation, m: Mode) -> Option<(Occupation, f64)> {
    let n = occ.photons[m.index()] as usize;
    if n == 0 {
        return None;
    }
    let mut o = *occ;
    o.photons[m.index()] -= 1;
    Some((o, (n as f64).sqrt()))
}

pub fn build_fock_oracle(
    t: f64,
    p: &SystemParams,
    n_max: usize,
    opts: BuildOptions,
) -> Result<FockOperator> {
    let basis = FockBasis::new(n_max)?;
    if !t.is_finite() {
        return Err(Error::InvalidParameters(format!("time {t} is not finite")));
    }
    p.validate()?;
    let c = effective_couplings(t, p)?;

    // Ω a† σ + h.c. for each atom–mode pair.
    let raman = [
        (c.left, Transition::Left, Mode::Cavity1),
        (c.one, Transition::AncillaL, Mode::Cavity2L),
        (c.one, Transition::AncillaR, Mode::Cavity2R),
        (c.right, Transition::Right, Mode::Cavity3),
    ];
    // η b a† + h.c. for each fiber–cavity pair.
    let hopping = [
        (p.eta_a, Mode::FiberA, Mode::Cavity1),
        (p.eta_a, Mode::FiberA, Mode::Cavity2L),
        (p.eta_b, Mode::FiberB, Mode::Cavity2R),
        (p.eta_b, Mode::FiberB, Mode::Cavity3),
    ];

    let mut entries: BTreeMap<(usize, usize), C64> = BTreeMap::new();
    let mut push = |row: usize, col: usize, v: C64| {
        if v != C64::new(0.0, 0.0) {
            *entries.entry((row, col)).or_default() += v;
        }
    };

    for col in 0..basis.len() {
        let occ = basis.state(col);

        for &(w, tr, mode) in &raman {
            if let Some(o) = tr.lower(&occ) {
                if let Some((o, f)) = create(&o, mode, n_max) {
                    push(basis.index_of(&o).unwrap(), col, C64::new(w * f, 0.0));
                }
            }
            if let Some((o, f)) = annihilate(&occ, mode) {
                if let Some(o) = tr.raise(&o) {
                    push(basis.index_of(&o).unwrap(), col, C64::new(w * f, 0.0));
                }
            }
        }

        for &(w, fiber, cavity) in &hopping {
            if let Some((o, f1)) = annihilate(&occ, fiber) {
                if let Some((o, f2)) = create(&o, cavity, n_max) {
                    push(basis.index_of(&o).unwrap(), col, C64::new(w * f1 * f2, 0.0));
                }
            }
            if let Some((o, f1)) = annihilate(&occ, cavity) {
                if let Some((o, f2)) = create(&o, fiber, n_max) {
                    push(basis.index_of(&o).unwrap(), col, C64::new(w * f1 * f2, 0.0));
                }
            }
        }

        let n = |m: Mode| f64::from(occ.photons[m.index()]);
        let mut diag = C64::new(0.0, 0.0);
        if opts.include_stark {
            let shift = |xi| gaussian_pulse(t, xi, p).powi(2) / p.delta;
            let photon = p.g * p.g / p.delta;
            if occ.left_atom == AtomLevel::K {
                diag += shift(PulseId::L);
            }
            if occ.right_atom == AtomLevel::K {
                diag += shift(PulseId::R);
            }
            if matches!(occ.ancilla, AncillaLevel::FL | AncillaLevel::FR) {
                diag += shift(PulseId::One);
            }
            if occ.left_atom == AtomLevel::S {
                diag += photon * n(Mode::Cavity1);
            }
            if occ.ancilla == AncillaLevel::GL {
                diag += photon * n(Mode::Cavity2L);
            }
            if occ.ancilla == AncillaLevel::GR {
                diag += photon * n(Mode::Cavity2R);
            }
            if occ.right_atom == AtomLevel::S {
                diag += photon * n(Mode::Cavity3);
            }
        }
        if opts.include_decay {
            let mut loss = 0.0;
            for m in Mode::ALL {
                let rate = if m.is_fiber() { p.gamma_f } else { p.kappa_c };
                loss += rate * n(m);
            }
            diag += C64::new(0.0, -0.5 * loss);
        }
        push(col, col, diag);
    }

    Ok(FockOperator {
        basis,
        time: t,
        entries,
    })
}
