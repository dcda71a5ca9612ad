//! Interaction-picture Hamiltonian on the one-excitation subspace.
//!
//! The left chain is `ψ1 –Ω₁e– ψ2 –η_A– ψ3 –η_A– ψ4 –Ω_Le– ψ5` and the right
//! chain mirrors it with `η_B` and `Ω_Re`. The two chains never couple.

mod fock;

pub use fock::{build_fock_oracle, FockBasis, FockOperator, FOCK_CUTOFF_CAP};

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BasisLabel, Chain, StateVector, SystemParams, DIM};
use crate::pulses::{effective_couplings, gaussian_pulse, PulseId};
use crate::C64;

pub type Matrix10 = SMatrix<C64, DIM, DIM>;
pub type Matrix5 = SMatrix<C64, 5, 5>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Add the drive- and photon-induced level shifts on the diagonal.
    pub include_stark: bool,
    /// Add `−iγ_f/2` on fiber labels and `−iκ_c/2` on cavity labels.
    pub include_decay: bool,
}

impl BuildOptions {
    pub fn lossy() -> Self {
        Self {
            include_stark: false,
            include_decay: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianMatrix {
    pub time: f64,
    pub entries: Matrix10,
}

impl HamiltonianMatrix {
    pub fn entry(&self, row: BasisLabel, col: BasisLabel) -> C64 {
        self.entries[(row.index_of(), col.index_of())]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖H − H†‖` (Frobenius).
    pub fn hermiticity_defect(&self) -> f64 {
        (self.entries - self.entries.adjoint())
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        StateVector(self.entries * state.0)
    }

    /// The 5×5 diagonal block acting on `chain`.
    pub fn block(&self, chain: Chain) -> Matrix5 {
        let o = chain.offset();
        self.entries.fixed_view::<5, 5>(o, o).into_owned()
    }

    /// Largest modulus among entries coupling the two chains.
    pub fn cross_block_max(&self) -> f64 {
        let mut m = 0.0f64;
        for r in 0..DIM {
            for c in 0..DIM {
                if (r < 5) != (c < 5) {
                    m = m.max(self.entries[(r, c)].norm());
                }
            }
        }
        m
    }
}

fn set_pair(m: &mut Matrix10, a: BasisLabel, b: BasisLabel, v: f64) {
    m[(a.index_of(), b.index_of())] = C64::new(v, 0.0);
    m[(b.index_of(), a.index_of())] = C64::new(v, 0.0);
}

fn add_diag(m: &mut Matrix10, a: BasisLabel, v: C64) {
    m[(a.index_of(), a.index_of())] += v;
}

pub fn build(t: f64, p: &SystemParams, opts: BuildOptions) -> Result<HamiltonianMatrix> {
    if !t.is_finite() {
        return Err(Error::InvalidParameters(format!("time {t} is not finite")));
    }
    p.validate()?;
    use BasisLabel::*;

    let c = effective_couplings(t, p)?;
    let mut m = Matrix10::zeros();

    set_pair(&mut m, Psi1, Psi2, c.one);
    set_pair(&mut m, Psi2, Psi3, p.eta_a);
    set_pair(&mut m, Psi3, Psi4, p.eta_a);
    set_pair(&mut m, Psi4, Psi5, c.left);

    set_pair(&mut m, Psi6, Psi7, c.one);
    set_pair(&mut m, Psi7, Psi8, p.eta_b);
    set_pair(&mut m, Psi8, Psi9, p.eta_b);
    set_pair(&mut m, Psi9, Psi10, c.right);

    if opts.include_stark {
        let shift = |xi| {
            let w = gaussian_pulse(t, xi, p);
            C64::new(w * w / p.delta, 0.0)
        };
        let photon = C64::new(p.g * p.g / p.delta, 0.0);
        add_diag(&mut m, Psi1, shift(PulseId::One));
        add_diag(&mut m, Psi6, shift(PulseId::One));
        for l in [Psi2, Psi4, Psi7, Psi9] {
            add_diag(&mut m, l, photon);
        }
        add_diag(&mut m, Psi5, shift(PulseId::L));
        add_diag(&mut m, Psi10, shift(PulseId::R));
    }

    if opts.include_decay {
        for l in BasisLabel::ALL {
            if l.is_fiber() {
                add_diag(&mut m, l, C64::new(0.0, -0.5 * p.gamma_f));
            } else if l.is_cavity() {
                add_diag(&mut m, l, C64::new(0.0, -0.5 * p.kappa_c));
            }
        }
    }

    Ok(HamiltonianMatrix { time: t, entries: m })
}
