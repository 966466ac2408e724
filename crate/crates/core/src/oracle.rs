//! Independent scalar-ODE ground truth.
//!
//! Restricted to spatially constant states, the transport and gradient terms
//! of the cell equation vanish and the dynamics reduces to
//! `u' = a·u^ρ − b·(|Ω|·u^β)^δ`. These integrators use explicit Euler with a
//! caller-supplied dt sequence so they are comparable step-for-step with the
//! PDE stepper on homogeneous data.

use crate::grid::ModelParams;

/// Parameters of the homogeneous reduction.
#[derive(Debug, Clone, Copy)]
pub struct HomogeneousParams {
    pub a: f64,
    pub b: f64,
    pub rho: f64,
    pub beta: f64,
    pub delta: f64,
    /// measure(Ω); multiplies u^β inside the nonlocal term.
    pub omega_measure: f64,
}

impl HomogeneousParams {
    /// Extract the homogeneous reduction from full model parameters.
    pub fn from_model(p: &ModelParams, omega_measure: f64) -> HomogeneousParams {
        HomogeneousParams {
            a: p.a,
            b: p.b,
            rho: p.rho,
            beta: p.beta,
            delta: p.delta,
            omega_measure,
        }
    }
}

#[inline]
fn pow_nonneg(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else {
        x.powf(e)
    }
}

/// Right-hand side a·u^ρ − b·(|Ω|·u^β)^δ of the homogeneous reduction.
///
/// # Panics
///
/// Panics if `u < 0`.
pub fn homogeneous_rhs(u: f64, p: &HomogeneousParams) -> f64 {
    assert!(u >= 0.0, "homogeneous_rhs: state must be nonnegative, got {u}");
    let growth = if p.a == 0.0 {
        0.0
    } else {
        p.a * pow_nonneg(u, p.rho)
    };
    let sink = if p.b == 0.0 {
        0.0
    } else {
        p.b * pow_nonneg(p.omega_measure * pow_nonneg(u, p.beta), p.delta)
    };
    growth - sink
}

/// The positive equilibrium u* = (a / (b·|Ω|^δ))^{1/(βδ − ρ)}, when βδ ≠ ρ
/// and both coefficients are active.
pub fn homogeneous_equilibrium(p: &HomogeneousParams) -> Option<f64> {
    if p.a <= 0.0 || p.b <= 0.0 {
        return None;
    }
    let diff = p.beta * p.delta - p.rho;
    if diff == 0.0 {
        return None;
    }
    Some((p.a / (p.b * p.omega_measure.powf(p.delta))).powf(1.0 / diff))
}

/// Trajectory of a scalar Euler integration.
#[derive(Debug, Clone)]
pub struct ScalarTrajectory {
    /// States, starting with the initial value; one entry per completed step.
    pub values: Vec<f64>,
    /// True when the trajectory crossed the blow-up threshold (or left the
    /// finite range) and integration stopped early.
    pub blew_up: bool,
}

/// Explicit Euler on the homogeneous reduction with the given dt sequence.
///
/// Integration stops with the blow-up sentinel set as soon as the state
/// exceeds `blowup_threshold` or stops being finite.
pub fn integrate_homogeneous(
    u0: f64,
    p: &HomogeneousParams,
    dt_sequence: &[f64],
    blowup_threshold: f64,
) -> ScalarTrajectory {
    assert!(u0 >= 0.0, "integrate_homogeneous: u0 must be nonnegative");
    let mut values = Vec::with_capacity(dt_sequence.len() + 1);
    let mut u = u0;
    values.push(u);
    for &dt in dt_sequence {
        u += dt * homogeneous_rhs(u, p);
        values.push(u);
        if !u.is_finite() || u.abs() > blowup_threshold {
            return ScalarTrajectory { values, blew_up: true };
        }
    }
    ScalarTrajectory { values, blew_up: false }
}

/// Trajectory and equilibrium of the mass-comparison equation.
#[derive(Debug, Clone)]
pub struct MassComparison {
    pub trajectory: Vec<f64>,
    /// y* = (c_d / c_g)^{1/exponent}.
    pub equilibrium: f64,
}

/// Integrate y' = c_d − c_g·y^e (the equality case of the comparison
/// inequality bounding the mass) with explicit Euler on `dt_sequence`.
///
/// Trajectories are monotone toward the equilibrium for any reasonable dt;
/// a debug assertion fires if a step overshoots past y*.
pub fn mass_comparison(
    y0: f64,
    c_d: f64,
    c_g: f64,
    exponent: f64,
    dt_sequence: &[f64],
) -> MassComparison {
    assert!(y0 >= 0.0 && c_d >= 0.0 && c_g > 0.0 && exponent >= 1.0);
    let equilibrium = (c_d / c_g).powf(1.0 / exponent);
    let mut trajectory = Vec::with_capacity(dt_sequence.len() + 1);
    let mut y = y0;
    trajectory.push(y);
    for &dt in dt_sequence {
        let rate = c_d - c_g * pow_nonneg(y, exponent);
        let y_new = y + dt * rate;
        debug_assert!(
            (y_new - equilibrium) * (y - equilibrium) >= 0.0,
            "mass_comparison: step crossed the equilibrium; dt too large"
        );
        y = y_new;
        trajectory.push(y);
    }
    MassComparison { trajectory, equilibrium }
}
