//! Finite-difference simulator and parameter-regime classifier for the
//! zero-flux chemotaxis-growth system
//!
//! ```text
//! u_t = Δu − χ∇·(u∇v) + a·u^ρ − b(∫_Ω u^β)^δ − c|∇u|^γ   in Ω × (0, T),
//! τ v_t = Δv − v + u                                      in Ω × (0, T),
//! u_ν = v_ν = 0                                           on ∂Ω,
//! ```
//!
//! with χ, a, b, c > 0, exponents ρ, β, δ, γ ≥ 1 and τ ∈ {0, 1}.
//!
//! The crate integrates the system forward in time on 1D/2D boxes, monitors
//! the quantities the boundedness analysis controls (mass, L^k norms, L^∞),
//! detects numerical blow-up, and evaluates every explicit structural
//! condition on (n, ρ, β, δ, γ, b) under which global boundedness is
//! guaranteed — including the explicit lower threshold on b in the
//! sharp-balance regime δ = ρ/β, γ = ρ.
//!
//! Start with the runnable examples (`cargo run --example classify_regimes`)
//! or the `chemgrow` binary (`simulate`, `classify`, `sweep`, `convergence`
//! subcommands).

pub mod cli;
pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod grid;
pub mod operators;
pub mod oracle;
pub mod regime;
pub mod stepper;

pub use error::{Error, Result};
