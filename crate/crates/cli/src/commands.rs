//! One function per subcommand. Each returns the text to write so the
//! commands stay pure functions of their configuration.

use std::fmt::Write as _;

use noon_passage::dynamics::{evolve, transfer_probability, DEFAULT_SAMPLE_EVERY};
use noon_passage::fidelity::{sweep, Overlay, OverlayParam, SweepTable, SweepVariable};
use noon_passage::hamiltonian::BuildOptions;
use noon_passage::protocol::{run_protocol_with, RoundMode};
use noon_passage::pulses::{gaussian_pulse, PulseId};
use noon_passage::spectral::{dark_overlap, instantaneous_spectrum};
use noon_passage::{Error, StateVector};
use serde_json::json;

use crate::config::{Grid, RunConfig};
use crate::CliError;

/// Points per time series when no `--grid` is given.
pub const DEFAULT_TIME_POINTS: usize = 1001;
pub const DEFAULT_ROUNDS: u32 = 10;
pub const DEFAULT_MAX_ROUNDS: u32 = 20;

pub const PULSES_HEADER: &str = "t,omega_L_norm,omega_R_norm,omega_1_norm";
pub const SIMULATE_HEADER: &str = "t,p1,p2,p3,p4,p5,p6,p7,p8,p9,p10,norm2,dark_overlap";
pub const SPECTRUM_HEADER: &str = "t,e1,e2,e3,e4,e5,e6,e7,e8,e9,e10";
pub const SWEEP_HEADER: &str = "x,fidelity,overlay_value";

/// Main output plus an optional JSON record of the fixed parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: String,
    pub sidecar: Option<String>,
    /// One-line summary for stderr.
    pub summary: Option<String>,
}

impl Output {
    fn body(body: String) -> Self {
        Output { body, sidecar: None, summary: None }
    }
}

fn time_grid(cfg: &RunConfig) -> Vec<f64> {
    cfg.grid_or(Grid::new(0.0, cfg.params.total_time, DEFAULT_TIME_POINTS))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn cmd_pulses(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = &cfg.params;
    if p.omega0 == 0.0 {
        return Err(CliError::Config("omega0 = 0 leaves the pulses unnormalizable".into()));
    }
    let mut out = format!("{PULSES_HEADER}\n");
    for t in time_grid(cfg) {
        let [l, r, one] = PulseId::ALL.map(|xi| gaussian_pulse(t, xi, p) / p.omega0);
        writeln!(out, "{t},{l},{r},{one}").unwrap();
    }
    Ok(Output::body(out))
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = &cfg.params;
    let opts = BuildOptions { include_stark: cfg.stark, include_decay: cfg.decay };
    let every = cfg.sample_every.unwrap_or(DEFAULT_SAMPLE_EVERY);
    let traj = evolve(&StateVector::protocol_initial(), p, opts, cfg.dt(), every)?;

    let mut out = format!("{SIMULATE_HEADER}\n");
    for (t, s) in traj.iter() {
        write!(out, "{t}").unwrap();
        for x in s.populations() {
            write!(out, ",{x}").unwrap();
        }
        let overlap = match dark_overlap(t, p, s) {
            Ok(w) => w,
            Err(Error::DegenerateDarkState { .. }) => f64::NAN,
            Err(e) => return Err(e.into()),
        };
        writeln!(out, ",{},{overlap}", s.norm_sqr()).unwrap();
    }
    Ok(Output {
        body: out,
        sidecar: None,
        summary: Some(format!("final P(psi5)+P(psi10) = {}", transfer_probability(&traj))),
    })
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut out = format!("{SPECTRUM_HEADER}\n");
    for t in time_grid(cfg) {
        let s = instantaneous_spectrum(t, &cfg.params)?;
        write!(out, "{t}").unwrap();
        for e in s.eigenvalues {
            write!(out, ",{e}").unwrap();
        }
        out.push('\n');
    }
    Ok(Output::body(out))
}

fn sweep_output(
    cfg: &RunConfig,
    command: &str,
    variable: SweepVariable,
    grid: Vec<f64>,
    default_overlay: Overlay,
) -> Result<Output, CliError> {
    // A parameter fixed explicitly is not overlaid unless asked for.
    let overlay = match &cfg.overlay {
        Some(o) => o.clone(),
        None if cfg.is_explicit(overlay_key(default_overlay.param)) => {
            Overlay { param: default_overlay.param, values: Vec::new() }
        }
        None => default_overlay,
    };
    let compounding = cfg.compounding.unwrap_or_default();
    let table = sweep(&cfg.params, variable, &grid, Some(&overlay), compounding)?;

    let mut out = format!("{SWEEP_HEADER}\n");
    for row in table.rows() {
        let f = row.fidelity.unwrap_or(f64::NAN);
        writeln!(out, "{},{f},{}", row.x, opt(row.overlay_value)).unwrap();
    }
    let failures = table.failures();
    Ok(Output {
        body: out,
        sidecar: Some(sidecar(command, &table, &overlay)),
        summary: (failures > 0)
            .then(|| format!("{failures} sweep point(s) failed; see the JSON sidecar")),
    })
}

fn overlay_key(param: OverlayParam) -> &'static str {
    match param {
        OverlayParam::Omega0 => "omega0",
        OverlayParam::GammaF => "gamma_f",
        OverlayParam::Eta => "eta_a",
    }
}

fn sidecar(command: &str, table: &SweepTable, overlay: &Overlay) -> String {
    let failures: Vec<_> = table
        .rows()
        .filter_map(|r| r.error.map(|e| json!({"x": r.x, "overlay_value": r.overlay_value, "error": e})))
        .collect();
    let value = json!({
        "command": command,
        "variable": table.variable,
        "grid": table.grid,
        "overlay": table.overlay.map(|param| json!({"param": param, "values": overlay.values})),
        "compounding": table.compounding,
        "fixed": table.fixed,
        "failures": failures,
    });
    let mut s = serde_json::to_string_pretty(&value).expect("sweep record serializes");
    s.push('\n');
    s
}

fn gamma_overlay() -> Overlay {
    Overlay { param: OverlayParam::GammaF, values: vec![0.05, 0.1, 0.2] }
}

/// γ_f: 0..0.3 over three Ω₀; η: 0.05..1.5 over three γ_f; n: 1..20.
pub fn cmd_fidelity_sweep(cfg: &RunConfig) -> Result<Output, CliError> {
    let variable = cfg.variable.unwrap_or(SweepVariable::GammaF);
    let (grid, overlay) = match variable {
        SweepVariable::GammaF => (
            Grid::new(0.0, 0.3, 31),
            Overlay { param: OverlayParam::Omega0, values: vec![0.75, 1.5, 2.25] },
        ),
        SweepVariable::Eta => (Grid::new(0.05, 1.5, 30), gamma_overlay()),
        SweepVariable::N => (round_grid(cfg), gamma_overlay()),
    };
    sweep_output(cfg, "fidelity-sweep", variable, cfg.grid_or(grid), overlay)
}

fn round_grid(cfg: &RunConfig) -> Grid {
    let n = cfg.n.unwrap_or(DEFAULT_MAX_ROUNDS).max(1);
    Grid::new(1.0, f64::from(n), n as usize)
}

/// NOON fidelity against the number of rounds `1..=n`.
pub fn cmd_noon_scaling(cfg: &RunConfig) -> Result<Output, CliError> {
    if let Some(v) = cfg.variable.filter(|&v| v != SweepVariable::N) {
        return Err(CliError::Config(format!(
            "noon-scaling sweeps n; use fidelity-sweep for {}",
            v.name()
        )));
    }
    let grid = cfg.grid_or(round_grid(cfg));
    sweep_output(cfg, "noon-scaling", SweepVariable::N, grid, gamma_overlay())
}

pub fn cmd_protocol(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = cfg.n.unwrap_or(DEFAULT_ROUNDS);
    let mode = cfg.mode.unwrap_or(RoundMode::Analytic);
    let run = run_protocol_with(n, &cfg.params, cfg.seed.unwrap_or(0), mode, cfg.dt())?;
    let mut body = serde_json::to_string_pretty(&run).expect("transcript serializes");
    body.push('\n');
    Ok(Output {
        body,
        sidecar: None,
        summary: Some(format!(
            "{:?} detected, est_fidelity = {}",
            run.outcome.resulting_state, run.est_fidelity
        )),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use noon_passage::fidelity::Compounding;
    use noon_passage::SystemParams;

    fn rows(csv: &str) -> Vec<Vec<f64>> {
        csv.lines()
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect())
            .collect()
    }

    #[test]
    fn pulses_peak_at_centres() {
        let out = cmd_pulses(&RunConfig::default()).unwrap();
        assert!(out.body.starts_with(PULSES_HEADER));
        let r = rows(&out.body);
        assert_eq!(r.len(), DEFAULT_TIME_POINTS);
        let argmax = |col: usize| {
            r.iter()
                .max_by(|a, b| a[col].total_cmp(&b[col]))
                .map(|row| (row[0], row[col]))
                .unwrap()
        };
        for (col, centre) in [(1, 35.0), (2, 35.0), (3, 65.0)] {
            let (t, v) = argmax(col);
            assert!((t - centre).abs() < 1e-9 && (v - 1.0).abs() < 1e-12, "{t}, {v}");
        }
        assert!(r.iter().all(|row| row[1] == row[2]));
    }

    #[test]
    fn pulses_normalized_independent_of_amplitude() {
        let mut cfg = RunConfig::default();
        let a = cmd_pulses(&cfg).unwrap();
        cfg.params.omega0 = 4.0;
        let b = cmd_pulses(&cfg).unwrap();
        let (ra, rb) = (rows(&a.body), rows(&b.body));
        for (x, y) in ra.iter().zip(&rb) {
            for c in 1..4 {
                assert!((x[c] - y[c]).abs() <= 1e-15);
            }
        }
        cfg.params.omega0 = 0.0;
        assert!(matches!(cmd_pulses(&cfg), Err(CliError::Config(_))));
    }

    #[test]
    fn simulate_columns_and_lossy_norm() {
        let cfg = RunConfig {
            params: SystemParams::default().with_gamma_f(0.2),
            dt: Some(1e-2),
            decay: true,
            ..Default::default()
        };
        let out = cmd_simulate(&cfg).unwrap();
        let r = rows(&out.body);
        assert!(r.iter().all(|row| row.len() == 13));
        assert!(r.last().unwrap()[11] < 1.0);
        assert!((r[0][11] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn simulate_writes_nan_for_degenerate_dark_state() {
        let cfg = RunConfig {
            params: SystemParams::default().with_omega0(0.0),
            dt: Some(1e-2),
            ..Default::default()
        };
        let r = rows(&cmd_simulate(&cfg).unwrap().body);
        assert!(r.iter().all(|row| row[12].is_nan()));
    }

    #[test]
    fn spectrum_rows_sorted() {
        let cfg = RunConfig { grid: Some(Grid::new(0.0, 100.0, 11)), ..Default::default() };
        let out = cmd_spectrum(&cfg).unwrap();
        assert!(out.body.starts_with(SPECTRUM_HEADER));
        for row in rows(&out.body) {
            assert!(row[1..].windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn default_sweep_shape() {
        let out = cmd_fidelity_sweep(&RunConfig::default()).unwrap();
        let r = rows(&out.body);
        assert_eq!(r.len(), 31 * 3);
        assert_eq!(r[0], vec![0.0, 1.0, 0.75]);
        let side: serde_json::Value = serde_json::from_str(out.sidecar.as_deref().unwrap()).unwrap();
        assert_eq!(side["variable"], "gamma_f");
        assert_eq!(side["overlay"]["param"], "omega0");
        assert_eq!(side["fixed"]["delta"], 15.0);
    }

    #[test]
    fn eta_sweep_passes_point_six() {
        let cfg = RunConfig { variable: Some(SweepVariable::Eta), ..Default::default() };
        let r = rows(&cmd_fidelity_sweep(&cfg).unwrap().body);
        let at = r
            .iter()
            .find(|row| (row[0] - 0.6).abs() < 1e-12 && row[2] == 0.2)
            .expect("η = 0.6 lies on the grid");
        assert!(at[1] > 0.99);
    }

    #[test]
    fn noon_scaling_default_anchor() {
        let out = cmd_noon_scaling(&RunConfig::default()).unwrap();
        let r = rows(&out.body);
        assert_eq!(r.len(), 20 * 3);
        let f10 = r.iter().find(|row| row[0] == 10.0 && row[2] == 0.2).unwrap()[1];
        assert!((f10 - 0.934).abs() <= 0.01, "{f10}");
    }

    #[test]
    fn explicit_parameter_suppresses_default_overlay() {
        let mut cfg = RunConfig::default();
        cfg.params.gamma_f = 0.1;
        cfg.explicit.insert("gamma_f".into());
        let out = cmd_noon_scaling(&cfg).unwrap();
        let r = rows(&out.body);
        assert_eq!(r.len(), 20);
        assert!(r.iter().all(|row| row[2].is_nan()));
    }

    #[test]
    fn failed_points_reported_in_sidecar() {
        let cfg = RunConfig {
            variable: Some(SweepVariable::GammaF),
            grid: Some(Grid::new(0.0, 100.0, 3)),
            overlay: Some(crate::config::parse_overlay("none").unwrap()),
            ..Default::default()
        };
        let out = cmd_fidelity_sweep(&cfg).unwrap();
        assert!(out.summary.is_some());
        let side: serde_json::Value = serde_json::from_str(out.sidecar.as_deref().unwrap()).unwrap();
        assert_eq!(side["failures"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn noon_scaling_rejects_other_variables() {
        let cfg = RunConfig { variable: Some(SweepVariable::Eta), ..Default::default() };
        assert!(matches!(cmd_noon_scaling(&cfg), Err(CliError::Config(_))));
    }

    #[test]
    fn protocol_transcript_is_json() {
        let cfg = RunConfig { n: Some(3), seed: Some(5), ..Default::default() };
        let out = cmd_protocol(&cfg).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.body).unwrap();
        assert_eq!(v["transcript"].as_array().unwrap().len(), 8);
        assert_eq!(v["est_fidelity"], 1.0);
        assert_eq!(out.body, cmd_protocol(&cfg).unwrap().body);
    }

    #[test]
    fn linear_compounding_selectable() {
        let cfg = RunConfig {
            params: SystemParams::default().with_gamma_f(0.2),
            compounding: Some(Compounding::Linear),
            explicit: ["gamma_f".to_string()].into(),
            ..Default::default()
        };
        let r = rows(&cmd_noon_scaling(&cfg).unwrap().body);
        assert!((r[9][1] - 0.93202).abs() < 1e-4, "{}", r[9][1]);
    }
}
