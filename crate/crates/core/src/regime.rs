//! Structural-condition checker: evaluates every explicit parameter regime
//! under which global boundedness is guaranteed, and classifies a parameter
//! set.
//!
//! Covered conditions, all for the reaction a·u^ρ − b(∫u^β)^δ − c|∇u|^γ:
//!
//! * regime MT1: 1 ≤ β < 2(n+1)/n, max{2, β} < ρ < 2(n+1)/n,
//!   nρ/(n+1) < γ ≤ 2, δ > max{(nγ−nρ+ργ)/(nγ−nρ+βγ), ρ/β};
//! * regime MT2: 1 ≤ β < ρ ≤ 2, 2n/(n+1) < γ ≤ 2, same δ threshold;
//! * the mass-bound regime ρ > β ≥ 1, γ > nρ/(n+β), same δ threshold, with
//!   interpolation exponent θ = (1/β − 1/ρ)/(1/β + 1/n − 1/γ);
//! * the sharp-balance corollary δ = ρ/β, γ = ρ, max{β, 2n/(n+1)} < ρ ≤ 2,
//!   and b at least an explicit threshold involving the interpolation
//!   constant C_GN;
//! * the tangent-line constants that bound a·s^ρ − b·s^β by C0 − C1·s when
//!   β > ρ (the regime where mass control is automatic).

use crate::error::{Error, Result};
use crate::grid::{integrate, lp_norm, DomainSpec, Field, ModelParams};
use crate::operators::grad_magnitude_pow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// ψ(s) = a·s^ρ − b·s^β, the spatially homogeneous local source profile.
pub fn source_profile(a: f64, b: f64, rho: f64, beta: f64, s: f64) -> f64 {
    a * s.powf(rho) - b * s.powf(beta)
}

fn source_profile_derivative(a: f64, b: f64, rho: f64, beta: f64, s: f64) -> f64 {
    a * rho * s.powf(rho - 1.0) - b * beta * s.powf(beta - 1.0)
}

/// Constants of the affine bound ψ(s) ≤ C0 − C1·s for β > ρ ≥ 1.
#[derive(Debug, Clone, Copy)]
pub struct TangentConstants {
    /// Tangency abscissa: ½((a/b)^{1/(β−ρ)} + (aρ/(bβ))^{1/(β−ρ)}).
    pub c_m: f64,
    /// ψ(c_m).
    pub c_t: f64,
    /// Intercept c_t − ψ'(c_m)·c_m.
    pub c0: f64,
    /// Slope −ψ'(c_m), positive by construction.
    pub c1: f64,
}

impl TangentConstants {
    /// The bounding line C0 − C1·s.
    pub fn line(&self, s: f64) -> f64 {
        self.c0 - self.c1 * s
    }
}

/// Tangent-line constants for the decay-dominated regime β > ρ ≥ 1.
pub fn tangent_constants(a: f64, b: f64, rho: f64, beta: f64) -> Result<TangentConstants> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Parameter(format!(
            "tangent_constants needs a, b > 0 (got a = {a}, b = {b})"
        )));
    }
    if !(rho >= 1.0 && beta > rho) {
        return Err(Error::Parameter(format!(
            "tangent_constants needs beta > rho >= 1 (got rho = {rho}, beta = {beta})"
        )));
    }
    let inv = 1.0 / (beta - rho);
    let c_m = 0.5 * ((a / b).powf(inv) + (a * rho / (b * beta)).powf(inv));
    let c_t = source_profile(a, b, rho, beta, c_m);
    let slope = source_profile_derivative(a, b, rho, beta, c_m);
    let c1 = -slope;
    let c0 = c_t + c1 * c_m;
    assert!(
        c1 > 0.0,
        "tangent construction lost its negative slope (c1 = {c1}); inputs a={a}, b={b}, rho={rho}, beta={beta}"
    );
    Ok(TangentConstants { c_m, c_t, c0, c1 })
}

/// One pass/fail clause of a structural condition.
#[derive(Debug, Clone)]
pub struct Clause {
    pub label: String,
    pub pass: bool,
}

fn clause(pass: bool, label: String) -> Clause {
    Clause { label, pass }
}

/// Outcome of one multi-clause condition.
#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub satisfied: bool,
    pub delta_threshold: f64,
    pub clauses: Vec<Clause>,
}

/// The shared δ threshold max{(nγ−nρ+ργ)/(nγ−nρ+βγ), ρ/β}.
///
/// The ratio is meaningful only when nγ − nρ + βγ > 0, i.e. when
/// γ > nρ/(n+β); outside that range the threshold is +∞ (the underlying
/// interpolation step is unavailable).
pub fn delta_threshold(params: &ModelParams, n: u32) -> f64 {
    let nf = n as f64;
    let (rho, beta, gamma) = (params.rho, params.beta, params.gamma);
    let den = nf * gamma - nf * rho + beta * gamma;
    let ratio = if den > 0.0 {
        (nf * gamma - nf * rho + rho * gamma) / den
    } else {
        f64::INFINITY
    };
    ratio.max(rho / beta)
}

/// Interpolation exponent θ = (1/β − 1/ρ)/(1/β + 1/n − 1/γ).
///
/// Lies in (0, 1) whenever ρ > β and γ > nρ/(n+β); returned raw otherwise.
pub fn interpolation_theta(params: &ModelParams, n: u32) -> f64 {
    let nf = n as f64;
    (1.0 / params.beta - 1.0 / params.rho) / (1.0 / params.beta + 1.0 / nf - 1.0 / params.gamma)
}

/// Check of the mass-bound regime hypotheses.
#[derive(Debug, Clone)]
pub struct MassLemmaCheck {
    pub satisfied: bool,
    pub theta: f64,
    pub delta_threshold: f64,
    pub clauses: Vec<Clause>,
}

/// Hypotheses under which the total mass stays uniformly bounded:
/// ρ > β ≥ 1, γ > nρ/(n+β), δ > the shared threshold.
pub fn mass_lemma_check(params: &ModelParams, n: u32) -> MassLemmaCheck {
    let nf = n as f64;
    let (rho, beta, gamma, delta) = (params.rho, params.beta, params.gamma, params.delta);
    let gamma_bound = nf * rho / (nf + beta);
    let thr = delta_threshold(params, n);
    let clauses = vec![
        clause(
            rho > beta && beta >= 1.0,
            format!("rho > beta >= 1: rho = {rho}, beta = {beta}"),
        ),
        clause(
            gamma > gamma_bound,
            format!("gamma > n*rho/(n+beta) = {gamma_bound}: gamma = {gamma}"),
        ),
        clause(delta > thr, format!("delta > {thr}: delta = {delta}")),
    ];
    MassLemmaCheck {
        satisfied: clauses.iter().all(|c| c.pass),
        theta: interpolation_theta(params, n),
        delta_threshold: thr,
        clauses,
    }
}

/// Regime MT1: superquadratic growth tamed by strong nonlocal damping.
pub fn check_mt1(params: &ModelParams, n: u32) -> ConditionCheck {
    let nf = n as f64;
    let (rho, beta, gamma, delta) = (params.rho, params.beta, params.gamma, params.delta);
    let upper = 2.0 * (nf + 1.0) / nf;
    let gamma_lower = nf * rho / (nf + 1.0);
    let thr = delta_threshold(params, n);
    let clauses = vec![
        clause(
            (1.0..upper).contains(&beta),
            format!("1 <= beta < 2(n+1)/n = {upper}: beta = {beta}"),
        ),
        clause(
            rho > beta.max(2.0) && rho < upper,
            format!("max(2, beta) < rho < {upper}: rho = {rho}"),
        ),
        clause(
            gamma > gamma_lower && gamma <= 2.0,
            format!("n*rho/(n+1) = {gamma_lower} < gamma <= 2: gamma = {gamma}"),
        ),
        clause(delta > thr, format!("delta > {thr}: delta = {delta}")),
    ];
    ConditionCheck {
        satisfied: clauses.iter().all(|c| c.pass),
        delta_threshold: thr,
        clauses,
    }
}

/// Regime MT2: growth at most quadratic, milder γ requirement.
pub fn check_mt2(params: &ModelParams, n: u32) -> ConditionCheck {
    let nf = n as f64;
    let (rho, beta, gamma, delta) = (params.rho, params.beta, params.gamma, params.delta);
    let gamma_lower = 2.0 * nf / (nf + 1.0);
    let thr = delta_threshold(params, n);
    let clauses = vec![
        clause(
            beta >= 1.0 && beta < rho && rho <= 2.0,
            format!("1 <= beta < rho <= 2: beta = {beta}, rho = {rho}"),
        ),
        clause(
            gamma > gamma_lower && gamma <= 2.0,
            format!("2n/(n+1) = {gamma_lower} < gamma <= 2: gamma = {gamma}"),
        ),
        clause(delta > thr, format!("delta > {thr}: delta = {delta}")),
    ];
    ConditionCheck {
        satisfied: clauses.iter().all(|c| c.pass),
        delta_threshold: thr,
        clauses,
    }
}

/// The explicit lower bound on b in the sharp-balance regime (δ = ρ/β,
/// γ = ρ):
///
/// (a·2^{ρ−1}·C^ρ/|Ω|) · [ βρ/(nρ+βρ−nβ) ·
///   ( a·2^{ρ−1}·C^ρ·n(ρ−β) / (c·(nρ+βρ−nβ)) )^{n(ρ−β)/(βρ)} + 1 ],
///
/// with C the interpolation constant.
pub fn b_threshold(
    a: f64,
    c: f64,
    rho: f64,
    beta: f64,
    n: u32,
    omega_measure: f64,
    cgn: f64,
) -> Result<f64> {
    if !(rho > beta && beta >= 1.0) {
        return Err(Error::Parameter(format!(
            "b_threshold needs rho > beta >= 1 (got rho = {rho}, beta = {beta})"
        )));
    }
    if !(a > 0.0 && c > 0.0 && cgn > 0.0 && omega_measure > 0.0) {
        return Err(Error::Parameter(
            "b_threshold needs a, c, cgn and the domain measure positive".into(),
        ));
    }
    let nf = n as f64;
    let lead = a * 2f64.powf(rho - 1.0) * cgn.powf(rho) / omega_measure;
    let mix = nf * rho + beta * rho - nf * beta;
    let inner = a * 2f64.powf(rho - 1.0) * cgn.powf(rho) * nf * (rho - beta) / (c * mix);
    let bracket = (beta * rho / mix) * inner.powf(nf * (rho - beta) / (beta * rho)) + 1.0;
    Ok(lead * bracket)
}

/// Where the C_GN value used by a classification came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgnValue {
    pub value: f64,
    /// True when the value is a numerical lower bound from [`estimate_cgn`].
    /// The b-threshold needs an upper bound on C_GN to be conservative, so
    /// a corollary verdict built on an estimate is not a guarantee.
    pub estimated_lower_bound: bool,
}

impl CgnValue {
    pub fn supplied(value: f64) -> CgnValue {
        CgnValue {
            value,
            estimated_lower_bound: false,
        }
    }

    pub fn estimated(value: f64) -> CgnValue {
        CgnValue {
            value,
            estimated_lower_bound: true,
        }
    }
}

/// A numerical lower bound on the interpolation constant.
#[derive(Debug, Clone)]
pub struct GnEstimate {
    pub lower_bound: f64,
    /// Trial field achieving the bound.
    pub witness: Field,
    /// θ from the admissibility data.
    pub theta: f64,
}

fn quasinorm(f: &Field, q: f64) -> f64 {
    if q >= 1.0 {
        return lp_norm(f, q);
    }
    // 0 < q < 1: the same formula is a quasinorm; evaluate it directly
    let powed: Vec<f64> = f.values().iter().map(|&x| x.abs().powf(q)).collect();
    integrate(&Field::from_raw(f.domain(), powed)).powf(1.0 / q)
}

/// The interpolation quotient ‖ψ‖_p / (‖∇ψ‖_r^θ·‖ψ‖_q^{1−θ} + ‖ψ‖_q).
fn gn_quotient(psi: &Field, p: f64, q: f64, r: f64, theta: f64) -> Option<f64> {
    let np = if p == f64::INFINITY {
        psi.linf()
    } else {
        lp_norm(psi, p)
    };
    let nq = quasinorm(psi, q);
    if nq == 0.0 {
        return None;
    }
    let ngrad = lp_norm(&grad_magnitude_pow(psi, 1.0), r);
    let denom = ngrad.powf(theta) * nq.powf(1.0 - theta) + nq;
    if denom > 0.0 && denom.is_finite() {
        Some(np / denom)
    } else {
        None
    }
}

/// Synthesize a Neumann-compatible cosine series from coefficients.
/// In 2D the same series multiplies along each axis.
fn cosine_series(d: &DomainSpec, offset: f64, coeffs: &[f64]) -> Field {
    let pi = std::f64::consts::PI;
    Field::from_fn(d, |x| {
        let mut val = offset;
        for (k, &c) in coeffs.iter().enumerate() {
            let mut mode = 1.0;
            for (axis, &xi) in x.iter().enumerate() {
                mode *= ((k + 1) as f64 * pi * xi / d.extents[axis]).cos();
            }
            val += c * mode;
        }
        val
    })
}

/// Numerical lower bound on C_GN for exponents (p, q, r) on the given
/// domain, by maximizing the interpolation quotient over constants, cosine
/// modes, localized bumps, and seeded random cosine series refined by
/// coordinate ascent.
///
/// Admissibility: r ≥ 1, 0 < q ≤ p ≤ ∞, 1/r ≤ 1/n + 1/p.
pub fn estimate_cgn(domain: &DomainSpec, p: f64, q: f64, r: f64, seed: u64) -> Result<GnEstimate> {
    let n = domain.dim as f64;
    let inv_p = if p == f64::INFINITY { 0.0 } else { 1.0 / p };
    if !(r >= 1.0) {
        return Err(Error::Inadmissible(format!("need r >= 1, got r = {r}")));
    }
    if !(q > 0.0 && q <= p) {
        return Err(Error::Inadmissible(format!("need 0 < q <= p, got q = {q}, p = {p}")));
    }
    if 1.0 / r > 1.0 / n + inv_p {
        return Err(Error::Inadmissible(format!(
            "need 1/r <= 1/n + 1/p, got 1/{r} > 1/{n} + {inv_p}"
        )));
    }
    let theta = (1.0 / q - inv_p) / (1.0 / q + 1.0 / n - 1.0 / r);
    if !theta.is_finite() || !(0.0..=1.0).contains(&theta) {
        return Err(Error::Inadmissible(format!(
            "interpolation exponent theta = {theta} falls outside [0, 1]"
        )));
    }

    let mut best: Option<(f64, Field)> = None;
    let consider = |psi: Field, best: &mut Option<(f64, Field)>| {
        if let Some(quot) = gn_quotient(&psi, p, q, r, theta) {
            if best.as_ref().map(|(b, _)| quot > *b).unwrap_or(true) {
                *best = Some((quot, psi));
            }
        }
    };

    // constants: quotient is |Ω|^{1/p − 1/q}
    consider(Field::constant(domain, 1.0), &mut best);

    // pure and shifted cosine modes
    for k in 0..4usize {
        let mut coeffs = vec![0.0; 4];
        coeffs[k] = 1.0;
        consider(cosine_series(domain, 0.0, &coeffs), &mut best);
        consider(cosine_series(domain, 1.0, &coeffs), &mut best);
        coeffs[k] = 0.25;
        consider(cosine_series(domain, 1.0, &coeffs), &mut best);
    }

    // localized bumps (compact cosine bumps, centered and corner)
    let pi = std::f64::consts::PI;
    for frac in [0.5, 0.25, 0.125] {
        for center_frac in [0.5, 0.0] {
            let bump = Field::from_fn(domain, |x| {
                let mut prod = 1.0;
                for (axis, &xi) in x.iter().enumerate() {
                    let l = domain.extents[axis];
                    let w = frac * l;
                    let dist = (xi - center_frac * l).abs() / w;
                    prod *= if dist >= 1.0 {
                        0.0
                    } else {
                        0.5 * (1.0 + (pi * dist).cos())
                    };
                }
                prod
            });
            consider(bump, &mut best);
        }
    }

    // random cosine series with coordinate-ascent refinement
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_modes = 5;
    let mut best_coeffs: Option<(f64, f64, Vec<f64>)> = None;
    for _ in 0..8 {
        let offset: f64 = rng.gen_range(0.0..1.0);
        let coeffs: Vec<f64> = (0..n_modes)
            .map(|k| rng.gen_range(-1.0..1.0) / ((k + 1) * (k + 1)) as f64)
            .collect();
        let psi = cosine_series(domain, offset, &coeffs);
        if let Some(quot) = gn_quotient(&psi, p, q, r, theta) {
            if best_coeffs.as_ref().map(|(b, _, _)| quot > *b).unwrap_or(true) {
                best_coeffs = Some((quot, offset, coeffs));
            }
        }
    }
    if let Some((mut score, mut offset, mut coeffs)) = best_coeffs {
        let mut step = 0.25;
        for _ in 0..6 {
            for slot in 0..=n_modes {
                for dir in [1.0, -1.0] {
                    let mut o2 = offset;
                    let mut c2 = coeffs.clone();
                    if slot == n_modes {
                        o2 += dir * step;
                    } else {
                        c2[slot] += dir * step;
                    }
                    let psi = cosine_series(domain, o2, &c2);
                    if let Some(quot) = gn_quotient(&psi, p, q, r, theta) {
                        if quot > score {
                            score = quot;
                            offset = o2;
                            coeffs = c2;
                        }
                    }
                }
            }
            step *= 0.5;
        }
        consider(cosine_series(domain, offset, &coeffs), &mut best);
    }

    let (lower_bound, witness) = best.expect("at least the constant trial field is admissible");
    Ok(GnEstimate {
        lower_bound,
        witness,
        theta,
    })
}

/// Summary label for a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    BoundednessGuaranteedMT1,
    BoundednessGuaranteedMT2,
    BoundednessGuaranteedCorollary,
    /// Mass stays bounded but no boundedness regime applies.
    MassBoundOnly,
    OutOfTheoremScope,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::BoundednessGuaranteedMT1 => "BoundednessGuaranteedMT1",
            Classification::BoundednessGuaranteedMT2 => "BoundednessGuaranteedMT2",
            Classification::BoundednessGuaranteedCorollary => "BoundednessGuaranteedCorollary",
            Classification::MassBoundOnly => "MassBoundOnly",
            Classification::OutOfTheoremScope => "OutOfTheoremScope",
        };
        write!(f, "{s}")
    }
}

/// Check of the sharp-balance corollary.
#[derive(Debug, Clone)]
pub struct CorollaryCheck {
    pub applicable: bool,
    pub b_threshold: Option<f64>,
    pub clauses: Vec<Clause>,
}

/// Full evaluation of every structural condition for one parameter set.
#[derive(Debug, Clone)]
pub struct RegimeReport {
    pub n: u32,
    pub omega_measure: f64,
    pub cgn: CgnValue,
    pub params: ModelParams,
    pub mt1: ConditionCheck,
    pub mt2: ConditionCheck,
    pub mass_lemma: MassLemmaCheck,
    pub corollary: CorollaryCheck,
    pub theta: f64,
    pub delta_threshold: f64,
    pub b_threshold: Option<f64>,
    pub classification: Classification,
    pub remark: Option<String>,
}

/// Tolerance for the exact-identity clauses δ = ρ/β and γ = ρ.
const IDENTITY_TOL: f64 = 1e-12;

/// Evaluate every condition and classify. Strict inequalities are evaluated
/// exactly; the corollary's identity clauses allow 1e-12 absolute slack.
/// Precedence of the summary label: MT1 > MT2 > Corollary > MassBoundOnly.
pub fn classify(params: &ModelParams, n: u32, omega_measure: f64, cgn: CgnValue) -> RegimeReport {
    let mt1 = check_mt1(params, n);
    let mt2 = check_mt2(params, n);
    let mass_lemma = mass_lemma_check(params, n);

    let nf = n as f64;
    let (rho, beta, gamma, delta, b) = (params.rho, params.beta, params.gamma, params.delta, params.b);
    let bt = if rho > beta {
        b_threshold(params.a, params.c, rho, beta, n, omega_measure, cgn.value).ok()
    } else {
        None
    };
    let rho_lower = beta.max(2.0 * nf / (nf + 1.0));
    let corollary_clauses = vec![
        clause(
            (delta - rho / beta).abs() <= IDENTITY_TOL,
            format!("delta = rho/beta: delta = {delta}, rho/beta = {}", rho / beta),
        ),
        clause(
            (gamma - rho).abs() <= IDENTITY_TOL,
            format!("gamma = rho: gamma = {gamma}, rho = {rho}"),
        ),
        clause(
            rho > rho_lower && rho <= 2.0,
            format!("max(beta, 2n/(n+1)) = {rho_lower} < rho <= 2: rho = {rho}"),
        ),
        clause(
            bt.map(|t| b >= t).unwrap_or(false),
            match bt {
                Some(t) => format!("b >= {t}: b = {b}"),
                None => "b >= threshold: threshold unavailable (needs rho > beta)".to_string(),
            },
        ),
    ];
    let corollary = CorollaryCheck {
        applicable: corollary_clauses.iter().all(|c| c.pass),
        b_threshold: bt,
        clauses: corollary_clauses,
    };

    let classification = if mt1.satisfied {
        Classification::BoundednessGuaranteedMT1
    } else if mt2.satisfied {
        Classification::BoundednessGuaranteedMT2
    } else if corollary.applicable {
        Classification::BoundednessGuaranteedCorollary
    } else if mass_lemma.satisfied {
        Classification::MassBoundOnly
    } else {
        Classification::OutOfTheoremScope
    };

    let remark = if rho <= beta {
        Some(
            "decay dominates growth (rho <= beta): the total mass is bounded with no further \
             conditions, via the tangent-line bound; the regimes checked here target rho > beta"
                .to_string(),
        )
    } else {
        None
    };

    RegimeReport {
        n,
        omega_measure,
        cgn,
        params: *params,
        theta: mass_lemma.theta,
        delta_threshold: mass_lemma.delta_threshold,
        b_threshold: bt,
        mt1,
        mt2,
        mass_lemma,
        corollary,
        classification,
        remark,
    }
}

impl RegimeReport {
    /// Flat key-value text block, one datum per line.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "classification = {}", self.classification);
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "omega_measure = {}", self.omega_measure);
        let _ = writeln!(
            s,
            "cgn = {} ({})",
            self.cgn.value,
            if self.cgn.estimated_lower_bound {
                "numerical lower bound; corollary verdict conditional on the true constant"
            } else {
                "supplied"
            }
        );
        let _ = writeln!(s, "theta = {}", self.theta);
        let _ = writeln!(s, "delta_threshold = {}", self.delta_threshold);
        match self.b_threshold {
            Some(t) => {
                let _ = writeln!(s, "b_threshold = {t}");
            }
            None => {
                let _ = writeln!(s, "b_threshold = n/a (needs rho > beta)");
            }
        }
        let blocks = [
            ("mt1", self.mt1.satisfied, &self.mt1.clauses),
            ("mt2", self.mt2.satisfied, &self.mt2.clauses),
            ("mass_lemma", self.mass_lemma.satisfied, &self.mass_lemma.clauses),
            ("corollary", self.corollary.applicable, &self.corollary.clauses),
        ];
        for (name, ok, clauses) in blocks {
            let _ = writeln!(s, "{name}.satisfied = {ok}");
            for (i, c) in clauses.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{name}.clause.{} = [{}] {}",
                    i + 1,
                    if c.pass { "pass" } else { "fail" },
                    c.label
                );
            }
        }
        if let Some(r) = &self.remark {
            let _ = writeln!(s, "remark = {r}");
        }
        s
    }
}
