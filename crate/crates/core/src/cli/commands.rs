//! Command implementations behind the thin binary: simulate, classify,
//! sweep, convergence. File formats live here (CSV schemas, report text).

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::cli::config::RunConfig;
use crate::diagnostics::{boundedness_verdict, TimeSeries, DEFAULT_VERDICT_SLACK};
use crate::error::{Error, Result};
use crate::grid::{make_grid, DomainSpec, Field};
use crate::regime::{classify, estimate_cgn, CgnValue, RegimeReport};
use crate::stepper::{run, DiagSpec, RunOutcome, RunStatus};

/// Exact column header of `<prefix>_series.csv`.
pub const SERIES_HEADER: &str = "t,dt,mass,l_beta,l_k,linf,min_u,nonlocal,reaction_integral,neg_fraction,v_linf";

/// Exit code contract: 0 reached t_end, 2 blow-up suspected, 3 step
/// underflow, 4 numerical corruption (1 is reserved for I/O and usage
/// errors).
pub fn status_exit_code(status: RunStatus) -> i32 {
    match status {
        RunStatus::ReachedTEnd => 0,
        RunStatus::BlowUpSuspected => 2,
        RunStatus::StepUnderflow => 3,
        RunStatus::NumericalCorruption => 4,
    }
}

/// Resolve the interpolation constant for the corollary check: the supplied
/// value when the config carries one, otherwise a numerical lower bound for
/// the exponents (p, q, r) = (ρ, β, γ) on the configured (or unit) domain.
pub fn resolve_cgn(cfg: &RunConfig) -> CgnValue {
    if let Some(v) = cfg.cgn {
        return CgnValue::supplied(v);
    }
    let domain = cfg.domain().or_else(|_| {
        // classify-style configs may omit the grid; estimate on a unit box
        let cells = vec![65 / cfg.n; cfg.n];
        make_grid(cfg.n, &vec![1.0; cfg.n], &cells)
    });
    let Ok(domain) = domain else {
        return CgnValue {
            value: f64::NAN,
            estimated_lower_bound: true,
        };
    };
    match estimate_cgn(&domain, cfg.params.rho, cfg.params.beta, cfg.params.gamma, cfg.seed) {
        Ok(est) => CgnValue::estimated(est.lower_bound),
        Err(_) => CgnValue {
            value: f64::NAN,
            estimated_lower_bound: true,
        },
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}

fn write_series_csv(path: &Path, series: &TimeSeries) -> Result<()> {
    ensure_parent(path)?;
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "{SERIES_HEADER}")?;
    for r in series.rows() {
        writeln!(
            f,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.t,
            r.dt,
            r.mass,
            r.l_beta,
            r.l_k,
            r.linf,
            r.min_u,
            r.nonlocal,
            r.reaction_integral,
            r.neg_fraction,
            r.v_linf
        )?;
    }
    Ok(())
}

/// Row-major node values, one CSV row per grid line (a single row in 1D).
fn write_field_csv(path: &Path, field: &Field) -> Result<()> {
    ensure_parent(path)?;
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    let (nx, ny) = field.domain().shape();
    let vals = field.values();
    match field.domain().dim {
        1 => {
            let row: Vec<String> = vals.iter().map(|v| format!("{v:.12e}")).collect();
            writeln!(f, "{}", row.join(","))?;
        }
        _ => {
            for i in 0..nx {
                let row: Vec<String> =
                    (0..ny).map(|j| format!("{:.12e}", vals[i * ny + j])).collect();
                writeln!(f, "{}", row.join(","))?;
            }
        }
    }
    Ok(())
}

fn write_report_txt(
    path: &Path,
    outcome: &RunOutcome,
    regime: &RegimeReport,
    ctrl_threshold: f64,
) -> Result<()> {
    ensure_parent(path)?;
    let mut text = String::new();
    let _ = writeln!(text, "status = {}", outcome.status);
    let _ = writeln!(text, "t_final = {:.12e}", outcome.t_final);
    let _ = writeln!(text, "steps = {}", outcome.final_state.step_count);
    let _ = writeln!(text, "max_mass = {:.12e}", outcome.series.max_mass());
    let _ = writeln!(text, "max_linf = {:.12e}", outcome.series.max_linf());
    match boundedness_verdict(&outcome.series, 0.5, DEFAULT_VERDICT_SLACK, ctrl_threshold) {
        Ok(v) => {
            let _ = writeln!(text, "verdict = {v}");
        }
        Err(_) => {
            let _ = writeln!(text, "verdict = n/a (too few recorded rows)");
        }
    }
    let _ = writeln!(text);
    text.push_str(&regime.to_text());
    fs::write(path, text)?;
    Ok(())
}

/// Run the simulation described by `cfg`, write
/// `<prefix>_series.csv`, `<prefix>_final_u.csv`, `<prefix>_final_v.csv`
/// and `<prefix>_report.txt`, and return the process exit code implied by
/// the run status.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<i32> {
    let domain = cfg.domain()?;
    let ctrl = cfg.step_control()?;
    let initial = cfg.initial_state(&domain)?;
    let diag = DiagSpec {
        every: cfg.diag_every,
        k_norm: cfg.k_norm,
    };
    let outcome = run(initial, &cfg.params, &ctrl, &diag);
    let regime = classify(&cfg.params, cfg.n as u32, domain.measure(), resolve_cgn(cfg));

    let prefix = &cfg.out_prefix;
    write_series_csv(&PathBuf::from(format!("{prefix}_series.csv")), &outcome.series)?;
    write_field_csv(&PathBuf::from(format!("{prefix}_final_u.csv")), &outcome.final_state.u)?;
    write_field_csv(&PathBuf::from(format!("{prefix}_final_v.csv")), &outcome.final_state.v)?;
    write_report_txt(
        &PathBuf::from(format!("{prefix}_report.txt")),
        &outcome,
        &regime,
        ctrl.blowup_threshold,
    )?;
    Ok(status_exit_code(outcome.status))
}

/// Evaluate every structural condition for the configured parameters and
/// return the report text (grid keys optional; |Ω| defaults to 1).
pub fn cmd_classify(cfg: &RunConfig) -> Result<String> {
    let omega = cfg
        .extents
        .as_ref()
        .map(|e| e.iter().product())
        .unwrap_or(1.0);
    let report = classify(&cfg.params, cfg.n as u32, omega, resolve_cgn(cfg));
    Ok(report.to_text())
}

/// One sweep axis: a numeric model-parameter key and its values.
#[derive(Debug, Clone)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<f64>,
}

struct SweepRow {
    coords: Vec<f64>,
    classification: String,
    status: Option<String>,
    max_mass: Option<f64>,
    max_linf: Option<f64>,
}

fn sweep_point(cfg: &RunConfig, keys: &[String], coords: &[f64], simulate: bool) -> Result<SweepRow> {
    let mut point = cfg.clone();
    for (key, &value) in keys.iter().zip(coords) {
        point.params.set_by_name(key, value)?;
    }
    point
        .params
        .validate(point.test_mode)
        .map_err(|e| Error::Sweep(format!("point {coords:?}: {e}")))?;
    let omega = point
        .extents
        .as_ref()
        .map(|e| e.iter().product())
        .unwrap_or(1.0);
    let report = classify(&point.params, point.n as u32, omega, resolve_cgn(&point));
    let mut row = SweepRow {
        coords: coords.to_vec(),
        classification: report.classification.to_string(),
        status: None,
        max_mass: None,
        max_linf: None,
    };
    if simulate {
        let domain = point.domain()?;
        let ctrl = point.step_control()?;
        let initial = point.initial_state(&domain)?;
        let diag = DiagSpec {
            every: point.diag_every,
            k_norm: point.k_norm,
        };
        let outcome = run(initial, &point.params, &ctrl, &diag);
        row.status = Some(outcome.status.to_string());
        row.max_mass = Some(outcome.series.max_mass());
        row.max_linf = Some(outcome.series.max_linf());
    }
    Ok(row)
}

/// Classify (and with `simulate`, also integrate) every point of a one- or
/// two-axis parameter grid; writes `<prefix>_sweep.csv` and returns its path.
/// Points run concurrently; the CSV keeps grid order.
pub fn cmd_sweep(cfg: &RunConfig, axes: &[SweepAxis], simulate: bool) -> Result<PathBuf> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::Sweep(format!(
            "expected 1 or 2 sweep axes, got {}",
            axes.len()
        )));
    }
    for axis in axes {
        if axis.values.is_empty() {
            return Err(Error::Sweep(format!("empty value list for key \"{}\"", axis.key)));
        }
        // reject non-numeric keys up front
        let mut probe = cfg.params;
        probe.set_by_name(&axis.key, 1.0)?;
    }
    let keys: Vec<String> = axes.iter().map(|a| a.key.clone()).collect();
    let mut points: Vec<Vec<f64>> = Vec::new();
    match axes.len() {
        1 => {
            for &v in &axes[0].values {
                points.push(vec![v]);
            }
        }
        _ => {
            for &v0 in &axes[0].values {
                for &v1 in &axes[1].values {
                    points.push(vec![v0, v1]);
                }
            }
        }
    }

    let rows: Vec<Result<SweepRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = points
            .iter()
            .map(|coords| {
                let keys = &keys;
                scope.spawn(move || sweep_point(cfg, keys, coords, simulate))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });

    let path = PathBuf::from(format!("{}_sweep.csv", cfg.out_prefix));
    ensure_parent(&path)?;
    let mut f = std::io::BufWriter::new(fs::File::create(&path)?);
    writeln!(f, "{},classification,status,max_mass,max_linf", keys.join(","))?;
    for row in rows {
        let row = row?;
        let coords: Vec<String> = row.coords.iter().map(|v| format!("{v}")).collect();
        writeln!(
            f,
            "{},{},{},{},{}",
            coords.join(","),
            row.classification,
            row.status.unwrap_or_default(),
            row.max_mass.map(|v| format!("{v:.12e}")).unwrap_or_default(),
            row.max_linf.map(|v| format!("{v:.12e}")).unwrap_or_default(),
        )?;
    }
    Ok(path)
}

/// Errors, refinement spacings and observed orders of a manufactured case.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub case: String,
    pub h: Vec<f64>,
    pub max_error: Vec<f64>,
    /// orders[i] compares refinement i against i+1.
    pub orders: Vec<f64>,
}

impl ConvergenceTable {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "case = {}", self.case);
        let _ = writeln!(s, "h,max_error,order");
        for (i, (&h, &e)) in self.h.iter().zip(&self.max_error).enumerate() {
            let order = if i == 0 {
                "-".to_string()
            } else {
                format!("{:.3}", self.orders[i - 1])
            };
            let _ = writeln!(s, "{h:.6e},{e:.6e},{order}");
        }
        s
    }
}

fn refined_grids(cfg: &RunConfig) -> Result<Vec<DomainSpec>> {
    let base = cfg.domain()?;
    let l = base.extents[0];
    let n0 = base.cells_per_axis[0];
    Ok([n0, 2 * (n0 - 1) + 1, 4 * (n0 - 1) + 1]
        .into_iter()
        .map(|n| make_grid(1, &[l], &[n]).expect("refinement grid"))
        .collect())
}

fn orders_from_errors(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Spatial convergence study on a named manufactured case
/// (`heat_cosine` or `helmholtz_cosine`), three refinements h, h/2, h/4.
/// Both cases are one-dimensional along the first configured axis.
pub fn convergence_case(cfg: &RunConfig, case: &str) -> Result<ConvergenceTable> {
    match case {
        "heat_cosine" => heat_cosine(cfg),
        "helmholtz_cosine" => helmholtz_cosine(cfg),
        other => Err(Error::UnknownCase(other.to_string())),
    }
}

/// Pure diffusion of 1 + cos(πx/L); exact solution
/// 1 + e^{−(π/L)² t}·cos(πx/L).
fn heat_cosine(cfg: &RunConfig) -> Result<ConvergenceTable> {
    use crate::grid::{ModelParams, Tau};
    use crate::stepper::{SimState, StepControl};
    let pi = std::f64::consts::PI;
    let t_end = cfg.t_end.unwrap_or(0.05);
    let params =
        ModelParams::relaxed(0.0, 0.0, 0.0, 0.0, 2.0, 1.0, 2.0, 2.0, Tau::Parabolic).expect("pure diffusion");
    let mut hs = Vec::new();
    let mut errors = Vec::new();
    for d in refined_grids(cfg)? {
        let l = d.extents[0];
        let u0 = Field::from_fn(&d, |x| 1.0 + (pi * x[0] / l).cos());
        let v0 = Field::constant(&d, 0.0);
        let ctrl = StepControl {
            t_end,
            cfl_safety: cfg.cfl_safety,
            ..StepControl::default()
        };
        let out = run(SimState::new(u0, v0), &params, &ctrl, &DiagSpec { every: 1_000_000, k_norm: 2.0 });
        if out.status != RunStatus::ReachedTEnd {
            return Err(Error::Parameter(format!(
                "heat_cosine run ended with {} instead of reaching t_end",
                out.status
            )));
        }
        let decay = (-(pi / l) * (pi / l) * t_end).exp();
        let err = out
            .final_state
            .u
            .values()
            .iter()
            .enumerate()
            .map(|(i, &u)| {
                let x = i as f64 * d.h[0];
                (u - (1.0 + decay * (pi * x / l).cos())).abs()
            })
            .fold(0.0f64, f64::max);
        hs.push(d.h[0]);
        errors.push(err);
    }
    let orders = orders_from_errors(&errors);
    Ok(ConvergenceTable {
        case: "heat_cosine".into(),
        h: hs,
        max_error: errors,
        orders,
    })
}

/// Stationary solve (−Δ + 1)v = 1 + cos(πx/L); exact solution
/// 1 + cos(πx/L)/(1 + (π/L)²).
fn helmholtz_cosine(cfg: &RunConfig) -> Result<ConvergenceTable> {
    use crate::elliptic::{solve_helmholtz, DEFAULT_TOL};
    let pi = std::f64::consts::PI;
    let mut hs = Vec::new();
    let mut errors = Vec::new();
    for d in refined_grids(cfg)? {
        let l = d.extents[0];
        let u = Field::from_fn(&d, |x| 1.0 + (pi * x[0] / l).cos());
        let rep = solve_helmholtz(&u, DEFAULT_TOL)?;
        let denom = 1.0 + (pi / l) * (pi / l);
        let err = rep
            .v
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let x = i as f64 * d.h[0];
                (v - (1.0 + (pi * x / l).cos() / denom)).abs()
            })
            .fold(0.0f64, f64::max);
        hs.push(d.h[0]);
        errors.push(err);
    }
    let orders = orders_from_errors(&errors);
    Ok(ConvergenceTable {
        case: "helmholtz_cosine".into(),
        h: hs,
        max_error: errors,
        orders,
    })
}

/// Text form of [`convergence_case`] for the CLI.
pub fn cmd_convergence(cfg: &RunConfig, case: &str) -> Result<String> {
    Ok(convergence_case(cfg, case)?.to_text())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::{parse_config, parse_config_for, Purpose};

    fn base_config(dir: &Path) -> RunConfig {
        let text = format!(
            "\
n = 1
extents = 1.0
cells = 33
chi = 1.0
a = 1.0
b = 3.1
c = 1.0
rho = 2.0
beta = 1.0
delta = 2.0
gamma = 2.0
tau = 0
t_end = 0.2
ic_kind = cosine_bump
ic_amplitude = 0.5
cgn = 1.0
diag_every = 5
out_prefix = {}
",
            dir.join("t").display()
        );
        parse_config(&text).unwrap()
    }

    #[test]
    fn simulate_writes_all_outputs_with_exact_header() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = base_config(dir.path());
        let code = cmd_simulate(&cfg).unwrap();
        assert_eq!(code, 0);
        let series = fs::read_to_string(dir.path().join("t_series.csv")).unwrap();
        assert!(series.starts_with(SERIES_HEADER));
        let first_row = series.lines().nth(1).unwrap();
        assert_eq!(first_row.split(',').count(), 11);
        assert!(dir.path().join("t_final_u.csv").exists());
        assert!(dir.path().join("t_final_v.csv").exists());
        let report = fs::read_to_string(dir.path().join("t_report.txt")).unwrap();
        assert!(report.contains("status = ReachedTEnd"));
        assert!(report.contains("classification = BoundednessGuaranteedCorollary"));
    }

    #[test]
    fn series_rows_carry_twelve_significant_digits() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = base_config(dir.path());
        cmd_simulate(&cfg).unwrap();
        let series = fs::read_to_string(dir.path().join("t_series.csv")).unwrap();
        let cell = series.lines().nth(2).unwrap().split(',').nth(2).unwrap();
        // mantissa of the form d.dddddddddddd (12 fractional digits)
        let mantissa = cell.split('e').next().unwrap();
        let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
        assert!(digits >= 13, "cell {cell} has too few digits");
    }

    #[test]
    fn classify_text_for_gridless_config() {
        let text = "\
n = 2
chi = 1.0
a = 1.0
b = 1.0
c = 1.0
rho = 2.5
beta = 1.0
delta = 4.5
gamma = 2.0
cgn = 1.0
";
        let cfg = parse_config_for(text, Purpose::Classify).unwrap();
        let out = cmd_classify(&cfg).unwrap();
        assert!(out.contains("classification = BoundednessGuaranteedMT1"));
    }

    #[test]
    fn sweep_rejects_bad_axes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = base_config(dir.path());
        let empty = [SweepAxis {
            key: "b".into(),
            values: vec![],
        }];
        assert!(cmd_sweep(&cfg, &empty, false).is_err());
        let unknown = [SweepAxis {
            key: "t_end".into(),
            values: vec![1.0],
        }];
        assert!(cmd_sweep(&cfg, &unknown, false).is_err());
        assert!(cmd_sweep(&cfg, &[], false).is_err());
    }

    #[test]
    fn sweep_writes_grid_ordered_rows() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = base_config(dir.path());
        let axes = [
            SweepAxis {
                key: "b".into(),
                values: vec![3.0, 3.2],
            },
            SweepAxis {
                key: "delta".into(),
                values: vec![2.0, 2.0],
            },
        ];
        let path = cmd_sweep(&cfg, &axes, false).unwrap();
        let text = fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "b,delta,classification,status,max_mass,max_linf"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].starts_with("3,2,"));
        assert!(rows[3].starts_with("3.2,2,"));
    }

    #[test]
    fn convergence_rejects_unknown_case() {
        let text = "n = 1\nextents = 1.0\ncells = 17\n";
        let cfg = parse_config_for(text, Purpose::Convergence).unwrap();
        let err = cmd_convergence(&cfg, "bogus").unwrap_err().to_string();
        assert!(err.contains("heat_cosine") && err.contains("helmholtz_cosine"));
    }

    #[test]
    fn helmholtz_case_is_second_order() {
        let text = "n = 1\nextents = 1.0\ncells = 17\n";
        let cfg = parse_config_for(text, Purpose::Convergence).unwrap();
        let table = convergence_case(&cfg, "helmholtz_cosine").unwrap();
        for &o in &table.orders {
            assert!(o >= 1.9, "order {o}");
        }
    }
}
