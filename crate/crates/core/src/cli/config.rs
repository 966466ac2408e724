//! Line-based `key = value` run configuration.
//!
//! The format is deliberately flat: one key per line, `#` starts a comment,
//! keys are case-sensitive, unknown or duplicate keys are errors. Vector
//! values (extents, cells) are comma-separated.

use crate::error::{Error, Result};
use crate::grid::{make_grid, DomainSpec, Field, ModelParams, Tau};
use crate::operators::FluxScheme;
use crate::stepper::{DiffusionScheme, SimState, StepControl};

/// Initial-condition presets; all are compatible with the zero-flux
/// boundary (zero normal derivative at ∂Ω, exactly or to rounding).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcKind {
    Constant,
    CosineBump,
    GaussianBump,
    TwoBumps,
}

impl IcKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IcKind::Constant => "constant",
            IcKind::CosineBump => "cosine_bump",
            IcKind::GaussianBump => "gaussian_bump",
            IcKind::TwoBumps => "two_bumps",
        }
    }

    fn parse(s: &str) -> Result<IcKind> {
        match s {
            "constant" => Ok(IcKind::Constant),
            "cosine_bump" => Ok(IcKind::CosineBump),
            "gaussian_bump" => Ok(IcKind::GaussianBump),
            "two_bumps" => Ok(IcKind::TwoBumps),
            other => Err(Error::Config(format!(
                "ic_kind must be one of constant, cosine_bump, gaussian_bump, two_bumps; got \"{other}\""
            ))),
        }
    }
}

/// How the initial chemoattractant field is derived from u₀ (τ = 1 only;
/// for τ = 0 the solver overwrites v at start).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VInit {
    /// v₀ = u₀.
    Same,
    /// v₀ ≡ 0.
    Zero,
    /// v₀ ≡ mean of u₀.
    Mean,
}

impl VInit {
    pub fn as_str(self) -> &'static str {
        match self {
            VInit::Same => "same",
            VInit::Zero => "zero",
            VInit::Mean => "mean",
        }
    }

    fn parse(s: &str) -> Result<VInit> {
        match s {
            "same" => Ok(VInit::Same),
            "zero" => Ok(VInit::Zero),
            "mean" => Ok(VInit::Mean),
            other => Err(Error::Config(format!(
                "ic_v must be one of same, zero, mean; got \"{other}\""
            ))),
        }
    }
}

/// What a parsed config must be able to drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    /// Needs the full grid, time horizon and initial data.
    Simulate,
    /// Parameter checks only; grid keys optional.
    Classify,
    /// Manufactured cases; needs the grid but no model parameters.
    Convergence,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub extents: Option<Vec<f64>>,
    pub cells: Option<Vec<usize>>,
    pub params: ModelParams,
    pub test_mode: bool,
    pub t_end: Option<f64>,
    pub dt_init: f64,
    pub dt_min: f64,
    pub cfl_safety: f64,
    pub blowup_threshold: f64,
    pub advection: FluxScheme,
    pub diffusion: DiffusionScheme,
    pub ic_kind: Option<IcKind>,
    pub ic_amplitude: f64,
    pub ic_base: f64,
    pub ic_width: Option<f64>,
    pub ic_v: VInit,
    pub cgn: Option<f64>,
    pub diag_every: usize,
    pub k_norm: f64,
    pub out_prefix: String,
    pub seed: u64,
}

const REQUIRED_SIMULATE: &[&str] = &[
    "n", "extents", "cells", "chi", "a", "b", "c", "rho", "beta", "delta", "gamma", "t_end",
    "ic_kind",
];
const REQUIRED_CLASSIFY: &[&str] = &["n", "chi", "a", "b", "c", "rho", "beta", "delta", "gamma"];
const REQUIRED_CONVERGENCE: &[&str] = &["n", "extents", "cells"];

const KNOWN_KEYS: &[&str] = &[
    "n",
    "extents",
    "cells",
    "chi",
    "a",
    "b",
    "c",
    "rho",
    "beta",
    "delta",
    "gamma",
    "tau",
    "test_mode",
    "t_end",
    "dt_init",
    "dt_min",
    "cfl_safety",
    "blowup_threshold",
    "advection",
    "diffusion",
    "ic_kind",
    "ic_amplitude",
    "ic_base",
    "ic_width",
    "ic_v",
    "cgn",
    "diag_every",
    "k_norm",
    "out_prefix",
    "seed",
];

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key} expects a number, got \"{value}\"")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("{key} expects a nonnegative integer, got \"{value}\"")))
}

fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|v| parse_f64(key, v.trim())).collect()
}

fn parse_usize_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value.split(',').map(|v| parse_usize(key, v.trim())).collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Config(format!("{key} expects true or false, got \"{other}\""))),
    }
}

/// Parse and validate a config for the simulate command (the full key set).
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_for(text, Purpose::Simulate)
}

/// Parse and validate a config, requiring only the keys the given command
/// needs; everything else falls back to documented defaults.
pub fn parse_config_for(text: &str, purpose: Purpose) -> Result<RunConfig> {
    let mut seen: Vec<(&str, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got \"{line}\"",
                lineno + 1
            )));
        };
        let key = key.trim();
        let value = value.trim();
        let Some(&canon) = KNOWN_KEYS.iter().find(|&&k| k == key) else {
            return Err(Error::Config(format!("line {}: unknown key \"{key}\"", lineno + 1)));
        };
        if seen.iter().any(|(k, _)| *k == canon) {
            return Err(Error::Config(format!("line {}: duplicate key \"{key}\"", lineno + 1)));
        }
        if value.is_empty() {
            return Err(Error::Config(format!("line {}: key \"{key}\" has no value", lineno + 1)));
        }
        seen.push((canon, value.to_string()));
    }

    let required: &[&str] = match purpose {
        Purpose::Simulate => REQUIRED_SIMULATE,
        Purpose::Classify => REQUIRED_CLASSIFY,
        Purpose::Convergence => REQUIRED_CONVERGENCE,
    };
    for &req in required {
        if !seen.iter().any(|(k, _)| *k == req) {
            return Err(Error::Config(format!("missing required key \"{req}\"")));
        }
    }

    let get = |key: &str| seen.iter().find(|(k, _)| *k == key).map(|(_, v)| v.as_str());

    let n = match get("n") {
        Some(v) => parse_usize("n", v)?,
        None => 1,
    };
    let extents = get("extents").map(|v| parse_f64_list("extents", v)).transpose()?;
    let cells = get("cells").map(|v| parse_usize_list("cells", v)).transpose()?;

    let test_mode = get("test_mode").map(|v| parse_bool("test_mode", v)).transpose()?.unwrap_or(false);
    let tau = match get("tau") {
        Some(v) => Tau::from_int(
            v.parse::<i64>()
                .map_err(|_| Error::Config(format!("tau expects 0 or 1, got \"{v}\"")))?,
        )?,
        None => Tau::Parabolic,
    };
    let num = |key: &str, default: f64| -> Result<f64> {
        match get(key) {
            Some(v) => parse_f64(key, v),
            None => Ok(default),
        }
    };

    let params = ModelParams {
        chi: num("chi", 1.0)?,
        a: num("a", 1.0)?,
        b: num("b", 1.0)?,
        c: num("c", 1.0)?,
        rho: num("rho", 2.0)?,
        beta: num("beta", 1.0)?,
        delta: num("delta", 2.0)?,
        gamma: num("gamma", 2.0)?,
        tau,
    };
    if purpose != Purpose::Convergence {
        params.validate(test_mode).map_err(|e| Error::Config(e.to_string()))?;
    }

    let cfg = RunConfig {
        n,
        extents,
        cells,
        params,
        test_mode,
        t_end: get("t_end").map(|v| parse_f64("t_end", v)).transpose()?,
        dt_init: num("dt_init", 0.1)?,
        dt_min: num("dt_min", 1e-12)?,
        cfl_safety: num("cfl_safety", 0.4)?,
        blowup_threshold: num("blowup_threshold", 1e8)?,
        advection: match get("advection") {
            Some("central") | None => FluxScheme::Central,
            Some("upwind") => FluxScheme::Upwind,
            Some(other) => {
                return Err(Error::Config(format!(
                    "advection must be central or upwind, got \"{other}\""
                )))
            }
        },
        diffusion: match get("diffusion") {
            Some("explicit") | None => DiffusionScheme::Explicit,
            Some("semi_implicit") => DiffusionScheme::SemiImplicit,
            Some(other) => {
                return Err(Error::Config(format!(
                    "diffusion must be explicit or semi_implicit, got \"{other}\""
                )))
            }
        },
        ic_kind: get("ic_kind").map(IcKind::parse).transpose()?,
        ic_amplitude: num("ic_amplitude", 1.0)?,
        ic_base: num("ic_base", 0.0)?,
        ic_width: get("ic_width").map(|v| parse_f64("ic_width", v)).transpose()?,
        ic_v: get("ic_v").map(VInit::parse).transpose()?.unwrap_or(VInit::Same),
        cgn: get("cgn").map(|v| parse_f64("cgn", v)).transpose()?,
        diag_every: match get("diag_every") {
            Some(v) => parse_usize("diag_every", v)?,
            None => 10,
        },
        k_norm: num("k_norm", 4.0)?,
        out_prefix: get("out_prefix").unwrap_or("out").to_string(),
        seed: match get("seed") {
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("seed expects a nonnegative integer, got \"{v}\"")))?,
            None => 0,
        },
    };
    cfg.validate(purpose)?;
    Ok(cfg)
}

impl RunConfig {
    fn validate(&self, purpose: Purpose) -> Result<()> {
        if self.n != 1 && self.n != 2 {
            return Err(Error::Config(format!("n must be 1 or 2, got {}", self.n)));
        }
        if let Some(extents) = &self.extents {
            if extents.len() != self.n {
                return Err(Error::Config(format!(
                    "extents lists {} values but n = {}",
                    extents.len(),
                    self.n
                )));
            }
            if extents.iter().any(|&e| !(e > 0.0)) {
                return Err(Error::Config("extents must be positive".into()));
            }
        }
        if let Some(cells) = &self.cells {
            if cells.len() != self.n {
                return Err(Error::Config(format!(
                    "cells lists {} values but n = {}",
                    cells.len(),
                    self.n
                )));
            }
            if cells.iter().any(|&c| c < 3) {
                return Err(Error::Config("cells must be at least 3 per axis".into()));
            }
        }
        if let Some(t) = self.t_end {
            if !(t > 0.0) {
                return Err(Error::Config(format!("t_end must be > 0, got {t}")));
            }
        }
        let ctrl = self.step_control_unchecked();
        ctrl.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.diag_every == 0 {
            return Err(Error::Config("diag_every must be at least 1".into()));
        }
        if !(self.k_norm >= 1.0) {
            return Err(Error::Config(format!("k_norm must be >= 1, got {}", self.k_norm)));
        }
        if let Some(c) = self.cgn {
            if !(c > 0.0) {
                return Err(Error::Config(format!("cgn must be > 0, got {c}")));
            }
        }
        if !(self.ic_amplitude >= 0.0) || !(self.ic_base >= 0.0) {
            return Err(Error::Config(
                "ic_amplitude and ic_base must be >= 0 (initial data is nonnegative)".into(),
            ));
        }
        if let Some(w) = self.ic_width {
            if !(w > 0.0) {
                return Err(Error::Config(format!("ic_width must be > 0, got {w}")));
            }
        }
        if purpose == Purpose::Simulate && self.ic_amplitude == 0.0 && self.ic_base == 0.0 {
            // all-zero initial data is allowed; nothing to check
        }
        Ok(())
    }

    fn step_control_unchecked(&self) -> StepControl {
        StepControl {
            dt_init: self.dt_init,
            dt_min: self.dt_min,
            cfl_safety: self.cfl_safety,
            blowup_threshold: self.blowup_threshold,
            t_end: self.t_end.unwrap_or(1.0),
            advection: self.advection,
            diffusion: self.diffusion,
        }
    }

    /// Build the grid; errors if grid keys were not supplied.
    pub fn domain(&self) -> Result<DomainSpec> {
        let extents = self
            .extents
            .as_ref()
            .ok_or_else(|| Error::Config("missing required key \"extents\"".into()))?;
        let cells = self
            .cells
            .as_ref()
            .ok_or_else(|| Error::Config("missing required key \"cells\"".into()))?;
        make_grid(self.n, extents, cells)
    }

    /// Step control; errors if `t_end` was not supplied.
    pub fn step_control(&self) -> Result<StepControl> {
        if self.t_end.is_none() {
            return Err(Error::Config("missing required key \"t_end\"".into()));
        }
        Ok(self.step_control_unchecked())
    }

    /// Build the initial u₀ from the configured preset.
    pub fn initial_u(&self, domain: &DomainSpec) -> Result<Field> {
        let kind = self
            .ic_kind
            .ok_or_else(|| Error::Config("missing required key \"ic_kind\"".into()))?;
        let amp = self.ic_amplitude;
        let base = self.ic_base;
        let pi = std::f64::consts::PI;
        let min_extent = domain.extents.iter().copied().fold(f64::INFINITY, f64::min);
        // narrower default for two bumps so they neither overlap nor touch ∂Ω
        let width = self.ic_width.unwrap_or(match kind {
            IcKind::TwoBumps => min_extent / 16.0,
            _ => min_extent / 8.0,
        });
        let field = match kind {
            IcKind::Constant => Field::constant(domain, base + amp),
            IcKind::CosineBump => Field::from_fn(domain, |x| {
                let mut prod = 1.0;
                for (axis, &xi) in x.iter().enumerate() {
                    prod *= 1.0 + (pi * xi / domain.extents[axis]).cos();
                }
                base + amp * prod
            }),
            IcKind::GaussianBump => Field::from_fn(domain, |x| {
                let mut prod = 1.0;
                for (axis, &xi) in x.iter().enumerate() {
                    let z = (xi - 0.5 * domain.extents[axis]) / width;
                    prod *= (-z * z).exp();
                }
                base + amp * prod
            }),
            IcKind::TwoBumps => Field::from_fn(domain, |x| {
                let mut lo = 1.0;
                let mut hi = 1.0;
                for (axis, &xi) in x.iter().enumerate() {
                    let l = domain.extents[axis];
                    let z1 = (xi - 0.25 * l) / width;
                    let z2 = (xi - 0.75 * l) / width;
                    lo *= (-z1 * z1).exp();
                    hi *= (-z2 * z2).exp();
                }
                base + amp * (lo + hi)
            }),
        };
        Ok(field)
    }

    /// Build the full initial state (u₀ plus the configured v₀ policy).
    pub fn initial_state(&self, domain: &DomainSpec) -> Result<SimState> {
        let u = self.initial_u(domain)?;
        let v = match self.ic_v {
            VInit::Same => u.clone(),
            VInit::Zero => Field::constant(domain, 0.0),
            VInit::Mean => {
                let mean = crate::grid::integrate(&u) / domain.measure();
                Field::constant(domain, mean)
            }
        };
        Ok(SimState::new(u, v))
    }

    /// Serialize every resolved key; parsing the output reproduces `self`.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "n = {}", self.n);
        if let Some(e) = &self.extents {
            let list: Vec<String> = e.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(s, "extents = {}", list.join(","));
        }
        if let Some(c) = &self.cells {
            let list: Vec<String> = c.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(s, "cells = {}", list.join(","));
        }
        let p = &self.params;
        let _ = writeln!(s, "chi = {}", p.chi);
        let _ = writeln!(s, "a = {}", p.a);
        let _ = writeln!(s, "b = {}", p.b);
        let _ = writeln!(s, "c = {}", p.c);
        let _ = writeln!(s, "rho = {}", p.rho);
        let _ = writeln!(s, "beta = {}", p.beta);
        let _ = writeln!(s, "delta = {}", p.delta);
        let _ = writeln!(s, "gamma = {}", p.gamma);
        let _ = writeln!(s, "tau = {}", p.tau.as_int());
        let _ = writeln!(s, "test_mode = {}", self.test_mode);
        if let Some(t) = self.t_end {
            let _ = writeln!(s, "t_end = {t}");
        }
        let _ = writeln!(s, "dt_init = {}", self.dt_init);
        let _ = writeln!(s, "dt_min = {}", self.dt_min);
        let _ = writeln!(s, "cfl_safety = {}", self.cfl_safety);
        let _ = writeln!(s, "blowup_threshold = {}", self.blowup_threshold);
        let _ = writeln!(
            s,
            "advection = {}",
            match self.advection {
                FluxScheme::Central => "central",
                FluxScheme::Upwind => "upwind",
            }
        );
        let _ = writeln!(
            s,
            "diffusion = {}",
            match self.diffusion {
                DiffusionScheme::Explicit => "explicit",
                DiffusionScheme::SemiImplicit => "semi_implicit",
            }
        );
        if let Some(k) = self.ic_kind {
            let _ = writeln!(s, "ic_kind = {}", k.as_str());
        }
        let _ = writeln!(s, "ic_amplitude = {}", self.ic_amplitude);
        let _ = writeln!(s, "ic_base = {}", self.ic_base);
        if let Some(w) = self.ic_width {
            let _ = writeln!(s, "ic_width = {w}");
        }
        let _ = writeln!(s, "ic_v = {}", self.ic_v.as_str());
        if let Some(c) = self.cgn {
            let _ = writeln!(s, "cgn = {c}");
        }
        let _ = writeln!(s, "diag_every = {}", self.diag_every);
        let _ = writeln!(s, "k_norm = {}", self.k_norm);
        let _ = writeln!(s, "out_prefix = {}", self.out_prefix);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}
