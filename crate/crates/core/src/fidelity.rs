//! Perturbative fiber-loss fidelity of one adiabatic round, its compounding
//! over `n` rounds, and parameter sweeps over either.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::pulses::effective_couplings;

/// Simpson nodes used by [`round_fidelity`].
pub const QUADRATURE_NODES: usize = 10_001;
const UNDERFLOW: f64 = 1e-300;

/// Composite Simpson rule on `[a, b]` with an odd number of nodes.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, nodes: usize) -> f64 {
    assert!(nodes >= 3 && nodes % 2 == 1, "Simpson needs an odd node count >= 3");
    let panels = nodes - 1;
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// `Ω_p² Ω_1e² / K²`, the fiber population of a three-level dark state;
/// zero when `K²` underflows.
fn fiber_weight(pump: f64, drive: f64, eta: f64) -> f64 {
    let num = pump * pump * drive * drive;
    let k2 = pump * pump * eta * eta + num + drive * drive * eta * eta;
    if k2 < UNDERFLOW {
        0.0
    } else {
        num / k2
    }
}

/// Fiber occupation summed over both dark states at time `t`.
pub fn fiber_integrand(t: f64, p: &SystemParams) -> Result<f64> {
    let c = effective_couplings(t, p)?;
    Ok(fiber_weight(c.left, c.one, p.eta_a) + fiber_weight(c.right, c.one, p.eta_b))
}

/// `∫₀ᵀ [Ω_Le²Ω_1e²/K₀² + Ω_Re²Ω_1e²/K₁²] dt`.
pub fn fiber_loss_integral(p: &SystemParams, nodes: usize) -> Result<f64> {
    p.validate()?;
    if nodes < 3 || nodes % 2 == 0 {
        return Err(Error::InvalidParameters(format!(
            "quadrature needs an odd node count >= 3 (got {nodes})"
        )));
    }
    // effective_couplings only fails on Δ ≤ 0, which validate already rejects
    Ok(simpson(
        |t| fiber_integrand(t, p).unwrap_or(f64::NAN),
        0.0,
        p.total_time,
        nodes,
    ))
}

pub fn round_fidelity_with_nodes(p: &SystemParams, nodes: usize) -> Result<f64> {
    let integral = fiber_loss_integral(p, nodes)?;
    let f = 1.0 - 0.5 * p.gamma_f * integral;
    if !f.is_finite() || f < 0.0 {
        return Err(Error::InvalidParameters(format!(
            "perturbative fidelity {f} is outside its range of validity"
        )));
    }
    Ok(f)
}

/// `F = 1 − (γ_f/2) ∫₀ᵀ [...] dt`.
pub fn round_fidelity(p: &SystemParams) -> Result<f64> {
    round_fidelity_with_nodes(p, QUADRATURE_NODES)
}

/// Rule for combining per-round fidelities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Compounding {
    /// `F_round^n`: independent, identical rounds.
    #[default]
    Product,
    /// `1 − n (1 − F_round)`: first order in the per-round loss.
    Linear,
}

impl Compounding {
    pub fn combine(self, round: f64, n: u32) -> f64 {
        match self {
            Compounding::Product => round.powi(n as i32),
            Compounding::Linear => 1.0 - f64::from(n) * (1.0 - round),
        }
    }
}

impl std::str::FromStr for Compounding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(Self::Product),
            "linear" => Ok(Self::Linear),
            other => Err(Error::InvalidParameters(format!("unknown compounding rule {other:?}"))),
        }
    }
}

pub fn noon_fidelity_with(p: &SystemParams, n: u32, rule: Compounding) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameters("n must be >= 1".into()));
    }
    let f = rule.combine(round_fidelity(p)?, n);
    if f < 0.0 {
        return Err(Error::InvalidParameters(format!(
            "compounded fidelity {f} is outside its range of validity"
        )));
    }
    Ok(f)
}

/// Fidelity of `|Ψ_n⟩` after `n` rounds, `F_round^n`.
pub fn noon_fidelity(p: &SystemParams, n: u32) -> Result<f64> {
    noon_fidelity_with(p, n, Compounding::Product)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    GammaF,
    /// Sets `η_A = η_B`.
    Eta,
    N,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::GammaF => "gamma_f",
            SweepVariable::Eta => "eta",
            SweepVariable::N => "n",
        }
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma_f" | "gamma-f" => Ok(Self::GammaF),
            "eta" => Ok(Self::Eta),
            "n" => Ok(Self::N),
            other => Err(Error::InvalidParameters(format!("unknown sweep variable {other:?}"))),
        }
    }
}

/// Parameter varied between curves of one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlayParam {
    Omega0,
    GammaF,
    Eta,
}

impl OverlayParam {
    pub fn name(self) -> &'static str {
        match self {
            OverlayParam::Omega0 => "omega0",
            OverlayParam::GammaF => "gamma_f",
            OverlayParam::Eta => "eta",
        }
    }

    pub fn apply(self, p: SystemParams, v: f64) -> SystemParams {
        match self {
            OverlayParam::Omega0 => p.with_omega0(v),
            OverlayParam::GammaF => p.with_gamma_f(v),
            OverlayParam::Eta => p.with_eta(v),
        }
    }
}

impl std::str::FromStr for OverlayParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omega0" => Ok(Self::Omega0),
            "gamma_f" | "gamma-f" => Ok(Self::GammaF),
            "eta" => Ok(Self::Eta),
            other => Err(Error::InvalidParameters(format!("unknown overlay parameter {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlay {
    pub param: OverlayParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepColumn {
    pub overlay_value: Option<f64>,
    /// `None` where the point failed; see `errors`.
    pub fidelities: Vec<Option<f64>>,
    pub errors: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub overlay: Option<OverlayParam>,
    pub compounding: Compounding,
    pub columns: Vec<SweepColumn>,
    pub fixed: SystemParams,
}

/// One output line: `x, fidelity[, overlay_value]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<'a> {
    pub x: f64,
    pub fidelity: Option<f64>,
    pub overlay_value: Option<f64>,
    pub error: Option<&'a str>,
}

impl SweepTable {
    /// Rows grouped by overlay value, grid order within each group.
    pub fn rows(&self) -> impl Iterator<Item = SweepRow<'_>> {
        self.columns.iter().flat_map(move |col| {
            self.grid.iter().enumerate().map(move |(i, &x)| SweepRow {
                x,
                fidelity: col.fidelities[i],
                overlay_value: col.overlay_value,
                error: col.errors[i].as_deref(),
            })
        })
    }

    pub fn failures(&self) -> usize {
        self.columns
            .iter()
            .map(|c| c.errors.iter().filter(|e| e.is_some()).count())
            .sum()
    }
}

fn point(
    p: SystemParams,
    variable: SweepVariable,
    x: f64,
    compounding: Compounding,
) -> Result<f64> {
    match variable {
        SweepVariable::GammaF => round_fidelity(&p.with_gamma_f(x)),
        SweepVariable::Eta => round_fidelity(&p.with_eta(x)),
        SweepVariable::N => noon_fidelity_with(&p, x as u32, compounding),
    }
}

pub fn sweep(
    p: &SystemParams,
    variable: SweepVariable,
    grid: &[f64],
    overlay: Option<&Overlay>,
    compounding: Compounding,
) -> Result<SweepTable> {
    p.validate()?;
    if grid.is_empty() {
        return Err(Error::InvalidParameters("sweep grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidParameters(format!("grid value {bad} is not finite")));
    }
    if variable == SweepVariable::N {
        if let Some(bad) = grid.iter().find(|&&x| x < 1.0 || x.fract() != 0.0 || x > u32::MAX as f64) {
            return Err(Error::InvalidParameters(format!(
                "round counts must be positive integers (got {bad})"
            )));
        }
    }

    let bases: Vec<(Option<f64>, SystemParams)> = match overlay {
        Some(o) if !o.values.is_empty() => {
            o.values.iter().map(|&v| (Some(v), o.param.apply(*p, v))).collect()
        }
        _ => vec![(None, *p)],
    };

    let columns = bases
        .par_iter()
        .map(|&(overlay_value, base)| {
            let results: Vec<Result<f64>> = grid
                .par_iter()
                .map(|&x| point(base, variable, x, compounding))
                .collect();
            let (fidelities, errors) = results
                .into_iter()
                .map(|r| match r {
                    Ok(f) => (Some(f), None),
                    Err(e) => (None, Some(e.to_string())),
                })
                .unzip();
            SweepColumn {
                overlay_value,
                fidelities,
                errors,
            }
        })
        .collect();

    Ok(SweepTable {
        variable,
        grid: grid.to_vec(),
        overlay: overlay.filter(|o| !o.values.is_empty()).map(|o| o.param),
        compounding,
        columns,
        fixed: *p,
    })
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Trapezoid rule on a much finer grid, independent of the Simpson path.
    fn trapezoid_integral(p: &SystemParams) -> f64 {
        let n = 400_000;
        let h = p.total_time / n as f64;
        let f = |t: f64| {
            let lw = p.omega0 * (-(t - 35.0f64).powi(2) / 288.0).exp() / 15.0;
            let ow = p.omega0 * (-(t - 65.0f64).powi(2) / 288.0).exp() / 15.0;
            let term = |pump: f64, eta: f64| {
                pump * pump * ow * ow / (pump * pump * eta * eta + pump * pump * ow * ow + ow * ow * eta * eta)
            };
            term(lw, p.eta_a) + term(lw, p.eta_b)
        };
        let mut s = 0.5 * (f(0.0) + f(p.total_time));
        for i in 1..n {
            s += f(i as f64 * h);
        }
        s * h
    }

    fn anchor() -> SystemParams {
        SystemParams::default().with_eta(0.6).with_gamma_f(0.2)
    }

    #[test]
    fn lossless_fidelity_is_exactly_one() {
        assert_eq!(round_fidelity(&SystemParams::default()).unwrap(), 1.0);
    }

    #[test]
    fn integral_matches_trapezoid_oracle() {
        let p = anchor();
        let simpson = fiber_loss_integral(&p, QUADRATURE_NODES).unwrap();
        let trap = trapezoid_integral(&p);
        assert!((simpson - trap).abs() < 1e-9, "{simpson} vs {trap}");
        // one chain contributes 0.0339892; both together twice that
        assert!((simpson - 2.0 * 0.033_989_196_584).abs() < 1e-10);
    }

    #[test]
    fn anchor_exceeds_099() {
        let f = round_fidelity(&anchor()).unwrap();
        assert_relative_eq!(f, 0.993_202_160_683_141_3, max_relative = 1e-10);
        assert!(f > 0.99 && f < 1.0);
    }

    #[test]
    fn affine_in_gamma() {
        let p = anchor();
        let f1 = round_fidelity(&p).unwrap();
        let f2 = round_fidelity(&p.with_gamma_f(0.4)).unwrap();
        assert!(((f2 - 1.0) - 2.0 * (f1 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn quadrature_converged() {
        let p = anchor();
        let a = round_fidelity_with_nodes(&p, 10_001).unwrap();
        let b = round_fidelity_with_nodes(&p, 20_001).unwrap();
        assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn invalid_regime_reported() {
        let p = anchor().with_eta(0.01);
        assert!(matches!(round_fidelity(&p), Err(Error::InvalidParameters(_))));
        assert!(fiber_loss_integral(&p, 10).is_err());
    }

    #[test]
    fn noon_anchors() {
        let p = anchor();
        assert_eq!(noon_fidelity(&p, 1).unwrap(), round_fidelity(&p).unwrap());
        let f10 = noon_fidelity(&p, 10).unwrap();
        assert_relative_eq!(f10, 0.934_063_833_620_612_6, max_relative = 1e-9);
        let f20 = noon_fidelity(&p.with_gamma_f(0.1), 20).unwrap();
        assert_relative_eq!(f20, 0.934_172_487_048_318_9, max_relative = 1e-9);
        assert!(noon_fidelity(&p, 0).is_err());
    }

    #[test]
    fn linear_compounding_alternative() {
        let p = anchor();
        let r = round_fidelity(&p).unwrap();
        let f = noon_fidelity_with(&p, 10, Compounding::Linear).unwrap();
        assert!((f - (1.0 - 10.0 * (1.0 - r))).abs() < 1e-15);
        assert!(f < noon_fidelity(&p, 10).unwrap());
    }

    #[test]
    fn noon_strictly_decreasing_in_n() {
        let p = anchor();
        let v: Vec<f64> = (1..=30).map(|n| noon_fidelity(&p, n).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn omega0_ordering() {
        for g in [0.05, 0.1, 0.2, 0.3] {
            let p = anchor().with_gamma_f(g);
            let f = |o| round_fidelity(&p.with_omega0(o)).unwrap();
            assert!(f(0.75) >= f(1.5) && f(1.5) >= f(2.25));
        }
    }

    #[test]
    fn gamma_sweep_monotone() {
        let overlay = Overlay { param: OverlayParam::Omega0, values: vec![0.75, 1.5, 2.25] };
        let grid = linspace(0.0, 0.3, 31);
        let t = sweep(&SystemParams::default(), SweepVariable::GammaF, &grid, Some(&overlay), Compounding::Product).unwrap();
        assert_eq!(t.failures(), 0);
        assert_eq!(t.columns.len(), 3);
        for c in &t.columns {
            let f: Vec<f64> = c.fidelities.iter().map(|x| x.unwrap()).collect();
            assert_eq!(f[0], 1.0);
            assert!(f.windows(2).all(|w| w[1] <= w[0]));
            assert!(f.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }

    #[test]
    fn eta_sweep_monotone() {
        let overlay = Overlay { param: OverlayParam::GammaF, values: vec![0.05, 0.1, 0.2] };
        let grid = linspace(0.05, 1.5, 30);
        let t = sweep(&SystemParams::default(), SweepVariable::Eta, &grid, Some(&overlay), Compounding::Product).unwrap();
        assert_eq!(t.failures(), 0);
        for c in &t.columns {
            let f: Vec<f64> = c.fidelities.iter().map(|x| x.unwrap()).collect();
            assert!(f.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn zero_loss_column_is_all_ones() {
        let overlay = Overlay { param: OverlayParam::GammaF, values: vec![0.0] };
        let t = sweep(&SystemParams::default(), SweepVariable::Eta, &linspace(0.1, 1.5, 15), Some(&overlay), Compounding::Product).unwrap();
        assert!(t.columns[0].fidelities.iter().all(|&f| f == Some(1.0)));
    }

    #[test]
    fn failures_recorded_per_row() {
        let p = SystemParams::default().with_gamma_f(0.2);
        let t = sweep(&p, SweepVariable::Eta, &[0.01, 0.6], None, Compounding::Product).unwrap();
        assert_eq!(t.failures(), 1);
        let rows: Vec<_> = t.rows().collect();
        assert!(rows[0].fidelity.is_none() && rows[0].error.is_some());
        assert!(rows[1].fidelity.unwrap() > 0.99);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let p = SystemParams::default();
        assert!(sweep(&p, SweepVariable::GammaF, &[], None, Compounding::Product).is_err());
        assert!(sweep(&p, SweepVariable::N, &[1.5], None, Compounding::Product).is_err());
        assert!(sweep(&p, SweepVariable::N, &[0.0], None, Compounding::Product).is_err());
    }

    #[test]
    fn n_sweep_matches_noon_fidelity() {
        let p = anchor();
        let grid: Vec<f64> = (1..=20).map(f64::from).collect();
        let t = sweep(&p, SweepVariable::N, &grid, None, Compounding::Product).unwrap();
        for (i, &n) in grid.iter().enumerate() {
            assert_eq!(t.columns[0].fidelities[i], Some(noon_fidelity(&p, n as u32).unwrap()));
        }
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, 0.3, 31);
        assert_eq!(g.len(), 31);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[30], 0.3);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
    }
}
