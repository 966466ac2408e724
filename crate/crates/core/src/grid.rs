//! Uniform Cartesian grids, scalar fields on them, and the quadrature /
//! norm primitives every other module builds on.
//!
//! Values are node-centered. Integration is the trapezoidal rule (boundary
//! nodes carry half weight per axis), which is exact for fields affine along
//! each axis and, together with the flux-form operators, makes the discrete
//! divergence theorem hold to rounding.

use crate::error::{Error, Result};

/// Discrete description of the box domain Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    /// Spatial dimension, 1 or 2.
    pub dim: usize,
    /// Length of Ω along each axis.
    pub extents: Vec<f64>,
    /// Node count along each axis (≥ 3).
    pub cells_per_axis: Vec<usize>,
    /// Grid spacing per axis, `extent / (count - 1)`.
    pub h: Vec<f64>,
}

/// Build a grid, validating dimension, extents and node counts.
pub fn make_grid(dim: usize, extents: &[f64], cells_per_axis: &[usize]) -> Result<DomainSpec> {
    if dim != 1 && dim != 2 {
        return Err(Error::Domain(format!("dimension must be 1 or 2, got {dim}")));
    }
    if extents.len() != dim || cells_per_axis.len() != dim {
        return Err(Error::Domain(format!(
            "expected {dim} extents and {dim} node counts, got {} and {}",
            extents.len(),
            cells_per_axis.len()
        )));
    }
    for &e in extents {
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::Domain(format!("extents must be positive, got {e}")));
        }
    }
    for &c in cells_per_axis {
        if c < 3 {
            return Err(Error::Domain(format!("need at least 3 nodes per axis, got {c}")));
        }
    }
    let h = extents
        .iter()
        .zip(cells_per_axis)
        .map(|(&e, &c)| e / (c - 1) as f64)
        .collect();
    Ok(DomainSpec {
        dim,
        extents: extents.to_vec(),
        cells_per_axis: cells_per_axis.to_vec(),
        h,
    })
}

impl DomainSpec {
    pub fn num_nodes(&self) -> usize {
        self.cells_per_axis.iter().product()
    }

    /// measure(Ω): product of the extents.
    pub fn measure(&self) -> f64 {
        self.extents.iter().product()
    }

    /// Trapezoid weight along one axis: h/2 at the two end nodes, h inside.
    #[inline]
    pub fn axis_weight(&self, axis: usize, i: usize) -> f64 {
        let last = self.cells_per_axis[axis] - 1;
        if i == 0 || i == last {
            0.5 * self.h[axis]
        } else {
            self.h[axis]
        }
    }

    /// Node counts as (nx, ny); ny = 1 in one dimension.
    pub fn shape(&self) -> (usize, usize) {
        match self.dim {
            1 => (self.cells_per_axis[0], 1),
            _ => (self.cells_per_axis[0], self.cells_per_axis[1]),
        }
    }
}

/// A scalar function sampled on the nodes of a [`DomainSpec`].
///
/// Storage is row-major: in 2D the flat index of node (i, j) is `i * ny + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    domain: DomainSpec,
    values: Vec<f64>,
}

impl Field {
    /// Constant field.
    pub fn constant(domain: &DomainSpec, value: f64) -> Field {
        Field {
            values: vec![value; domain.num_nodes()],
            domain: domain.clone(),
        }
    }

    /// Sample a function of the node coordinates.
    pub fn from_fn<F: FnMut(&[f64]) -> f64>(domain: &DomainSpec, mut f: F) -> Field {
        let mut values = Vec::with_capacity(domain.num_nodes());
        match domain.dim {
            1 => {
                let h = domain.h[0];
                for i in 0..domain.cells_per_axis[0] {
                    values.push(f(&[i as f64 * h]));
                }
            }
            _ => {
                let (nx, ny) = domain.shape();
                let (hx, hy) = (domain.h[0], domain.h[1]);
                for i in 0..nx {
                    for j in 0..ny {
                        values.push(f(&[i as f64 * hx, j as f64 * hy]));
                    }
                }
            }
        }
        Field {
            domain: domain.clone(),
            values,
        }
    }

    /// Wrap explicit node values, checking length and finiteness.
    pub fn from_values(domain: &DomainSpec, values: Vec<f64>) -> Result<Field> {
        if values.len() != domain.num_nodes() {
            return Err(Error::Domain(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                domain.num_nodes()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("field contains non-finite values".into()));
        }
        Ok(Field {
            domain: domain.clone(),
            values,
        })
    }

    /// Internal constructor for operator outputs; skips validation.
    pub(crate) fn from_raw(domain: &DomainSpec, values: Vec<f64>) -> Field {
        debug_assert_eq!(values.len(), domain.num_nodes());
        Field {
            domain: domain.clone(),
            values,
        }
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// max |f|.
    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Quadrature without the finiteness check; may return NaN/Inf for
/// corrupted fields. The public [`integrate`] wraps this with an assert.
pub(crate) fn integrate_raw(f: &Field) -> f64 {
    let d = f.domain();
    let v = f.values();
    match d.dim {
        1 => {
            let mut s = 0.0;
            for (i, &fi) in v.iter().enumerate() {
                s += d.axis_weight(0, i) * fi;
            }
            s
        }
        _ => {
            let (nx, ny) = d.shape();
            let mut s = 0.0;
            for i in 0..nx {
                let wx = d.axis_weight(0, i);
                for j in 0..ny {
                    s += wx * d.axis_weight(1, j) * v[i * ny + j];
                }
            }
            s
        }
    }
}

/// Trapezoidal quadrature of `f` over Ω.
///
/// Exact for fields affine along each axis; boundary nodes are weighted
/// half per axis.
///
/// # Panics
///
/// Panics if the quadrature result is non-finite (corrupted field).
pub fn integrate(f: &Field) -> f64 {
    let sum = integrate_raw(f);
    assert!(sum.is_finite(), "integrate: field quadrature is non-finite");
    sum
}

pub(crate) fn lp_norm_raw(f: &Field, p: f64) -> f64 {
    if p == f64::INFINITY {
        return f.linf();
    }
    assert!(p >= 1.0, "lp_norm: exponent must be >= 1 or infinity, got {p}");
    let d = f.domain();
    let v = f.values();
    let term = |x: f64| -> f64 {
        let a = x.abs();
        if p == 1.0 {
            a
        } else {
            a.powf(p)
        }
    };
    let mut s = 0.0;
    match d.dim {
        1 => {
            for (i, &fi) in v.iter().enumerate() {
                s += d.axis_weight(0, i) * term(fi);
            }
        }
        _ => {
            let (nx, ny) = d.shape();
            for i in 0..nx {
                let wx = d.axis_weight(0, i);
                for j in 0..ny {
                    s += wx * d.axis_weight(1, j) * term(v[i * ny + j]);
                }
            }
        }
    }
    if p == 1.0 {
        s
    } else {
        s.powf(1.0 / p)
    }
}

/// L^p norm of |f|: `(∫ |f|^p)^{1/p}`, or max |f| for `p = ∞`.
///
/// # Panics
///
/// Panics if `p < 1` or the quadrature result is non-finite.
pub fn lp_norm(f: &Field, p: f64) -> f64 {
    let s = lp_norm_raw(f, p);
    assert!(s.is_finite(), "lp_norm: field quadrature is non-finite");
    s
}

/// Chooses between the stationary (τ = 0) and evolving (τ = 1)
/// chemoattractant equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tau {
    /// τ = 0: v solves 0 = Δv − v + u at every instant.
    Elliptic,
    /// τ = 1: v evolves by v_t = Δv − v + u.
    Parabolic,
}

impl Tau {
    pub fn from_int(i: i64) -> Result<Tau> {
        match i {
            0 => Ok(Tau::Elliptic),
            1 => Ok(Tau::Parabolic),
            _ => Err(Error::Parameter(format!("tau must be 0 or 1, got {i}"))),
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Tau::Elliptic => 0,
            Tau::Parabolic => 1,
        }
    }
}

/// Coefficients and exponents of the model
/// `u_t = Δu − χ∇·(u∇v) + a·u^ρ − b(∫u^β)^δ − c|∇u|^γ`,
/// `τ v_t = Δv − v + u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub chi: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub rho: f64,
    pub beta: f64,
    pub delta: f64,
    pub gamma: f64,
    pub tau: Tau,
}

impl ModelParams {
    /// Production constructor: all coefficients strictly positive.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        chi: f64,
        a: f64,
        b: f64,
        c: f64,
        rho: f64,
        beta: f64,
        delta: f64,
        gamma: f64,
        tau: Tau,
    ) -> Result<ModelParams> {
        let p = ModelParams {
            chi,
            a,
            b,
            c,
            rho,
            beta,
            delta,
            gamma,
            tau,
        };
        p.validate(false)?;
        Ok(p)
    }

    /// Test-mode constructor: coefficients may be zero, which disables the
    /// corresponding term. Exponent constraints are unchanged.
    #[allow(clippy::too_many_arguments)]
    pub fn relaxed(
        chi: f64,
        a: f64,
        b: f64,
        c: f64,
        rho: f64,
        beta: f64,
        delta: f64,
        gamma: f64,
        tau: Tau,
    ) -> Result<ModelParams> {
        let p = ModelParams {
            chi,
            a,
            b,
            c,
            rho,
            beta,
            delta,
            gamma,
            tau,
        };
        p.validate(true)?;
        Ok(p)
    }

    /// Check coefficient positivity (or nonnegativity in test mode) and the
    /// exponent ranges.
    pub fn validate(&self, test_mode: bool) -> Result<()> {
        let coeffs = [
            ("chi", self.chi),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
        ];
        for (name, v) in coeffs {
            if !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be finite, got {v}")));
            }
            if test_mode {
                if v < 0.0 {
                    return Err(Error::Parameter(format!("{name} must be >= 0, got {v}")));
                }
            } else if v <= 0.0 {
                return Err(Error::Parameter(format!("{name} must be > 0, got {v}")));
            }
        }
        let exps = [
            ("rho", self.rho),
            ("beta", self.beta),
            ("delta", self.delta),
            ("gamma", self.gamma),
        ];
        for (name, v) in exps {
            if !v.is_finite() || v < 1.0 {
                return Err(Error::Parameter(format!("{name} must be >= 1, got {v}")));
            }
        }
        Ok(())
    }

    /// Look up a numeric coefficient or exponent by its config key.
    pub fn get_by_name(&self, key: &str) -> Option<f64> {
        match key {
            "chi" => Some(self.chi),
            "a" => Some(self.a),
            "b" => Some(self.b),
            "c" => Some(self.c),
            "rho" => Some(self.rho),
            "beta" => Some(self.beta),
            "delta" => Some(self.delta),
            "gamma" => Some(self.gamma),
            _ => None,
        }
    }

    /// Overwrite a numeric coefficient or exponent by its config key.
    /// Used by the sweep runner; the caller revalidates.
    pub fn set_by_name(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "chi" => self.chi = value,
            "a" => self.a = value,
            "b" => self.b = value,
            "c" => self.c = value,
            "rho" => self.rho = value,
            "beta" => self.beta = value,
            "delta" => self.delta = value,
            "gamma" => self.gamma = value,
            _ => {
                return Err(Error::Sweep(format!(
                    "\"{key}\" is not a numeric model parameter (expected one of chi, a, b, c, rho, beta, delta, gamma)"
                )))
            }
        }
        Ok(())
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            chi: 1.0,
            a: 1.0,
            b: 1.0,
            c: 1.0,
            rho: 2.0,
            beta: 1.0,
            delta: 2.0,
            gamma: 2.0,
            tau: Tau::Parabolic,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_1d(n: usize) -> DomainSpec {
        make_grid(1, &[1.0], &[n]).unwrap()
    }

    #[test]
    fn make_grid_computes_spacing_and_measure() {
        let g = make_grid(1, &[1.0], &[101]).unwrap();
        assert!((g.h[0] - 0.01).abs() < 1e-15);
        assert_eq!(g.measure(), 1.0);

        let g = make_grid(2, &[1.0, 2.0], &[11, 21]).unwrap();
        assert!((g.h[0] - 0.1).abs() < 1e-15);
        assert!((g.h[1] - 0.1).abs() < 1e-15);
        assert_eq!(g.measure(), 2.0);
        assert_eq!(g.num_nodes(), 11 * 21);
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert!(make_grid(3, &[1.0, 1.0, 1.0], &[5, 5, 5]).is_err());
        assert!(make_grid(0, &[], &[]).is_err());
        assert!(make_grid(1, &[1.0], &[2]).is_err());
        assert!(make_grid(1, &[-1.0], &[5]).is_err());
        assert!(make_grid(2, &[1.0], &[5, 5]).is_err());
    }

    #[test]
    fn integrate_constant_fields() {
        let g = make_grid(2, &[1.0, 1.0], &[11, 11]).unwrap();
        let f = Field::constant(&g, 2.0);
        assert!((integrate(&f) - 2.0).abs() < 1e-14);

        let z = Field::constant(&g, 0.0);
        assert_eq!(integrate(&z), 0.0);
    }

    #[test]
    fn integrate_exact_on_affine() {
        // trapezoid is exact on f(x) = x; 101 nodes on (0, 1)
        let g = unit_1d(101);
        let f = Field::from_fn(&g, |x| x[0]);
        assert!((integrate(&f) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn lp_norm_constants() {
        let g = unit_1d(51);
        let f = Field::constant(&g, 3.0);
        assert!((lp_norm(&f, 2.0) - 3.0).abs() < 1e-13);
        assert_eq!(lp_norm(&f, f64::INFINITY), 3.0);

        // |Ω| = 2: the L1 norm of the constant 2 is 4
        let g2 = make_grid(2, &[1.0, 2.0], &[11, 21]).unwrap();
        let f2 = Field::constant(&g2, 2.0);
        assert!((lp_norm(&f2, 1.0) - 4.0).abs() < 1e-13);
    }

    #[test]
    #[should_panic(expected = "exponent must be >= 1")]
    fn lp_norm_rejects_small_p() {
        let g = unit_1d(5);
        let f = Field::constant(&g, 1.0);
        lp_norm(&f, 0.5);
    }

    #[test]
    fn from_values_checks_length_and_finiteness() {
        let g = unit_1d(5);
        assert!(Field::from_values(&g, vec![0.0; 4]).is_err());
        assert!(Field::from_values(&g, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(Field::from_values(&g, vec![0.0; 5]).is_ok());
    }

    #[test]
    fn model_params_validation() {
        assert!(ModelParams::new(1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 2.0, 2.0, Tau::Parabolic).is_ok());
        assert!(ModelParams::new(0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 2.0, 2.0, Tau::Parabolic).is_err());
        assert!(ModelParams::relaxed(0.0, 0.0, 0.0, 0.0, 2.0, 1.0, 2.0, 2.0, Tau::Parabolic).is_ok());
        assert!(ModelParams::new(1.0, 1.0, 1.0, 1.0, 0.5, 1.0, 2.0, 2.0, Tau::Parabolic).is_err());
        assert!(Tau::from_int(2).is_err());
    }

    proptest! {
        // integrate(αf + βg) = α·integrate(f) + β·integrate(g) to rounding
        #[test]
        fn integrate_is_linear(
            alpha in -10.0f64..10.0,
            beta in -10.0f64..10.0,
            seed in 0u64..1000,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = unit_1d(33);
            let f = Field::from_fn(&g, |_| rng.gen_range(-1.0..1.0));
            let q = Field::from_fn(&g, |_| rng.gen_range(-1.0..1.0));
            let combo_vals: Vec<f64> = f
                .values()
                .iter()
                .zip(q.values())
                .map(|(&a, &b)| alpha * a + beta * b)
                .collect();
            let combo = Field::from_values(&g, combo_vals).unwrap();
            let lhs = integrate(&combo);
            let rhs = alpha * integrate(&f) + beta * integrate(&q);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs.abs())));
        }

        // raising any |value| never decreases an Lp norm
        #[test]
        fn lp_norm_monotone_in_magnitude(
            p in 1.0f64..6.0,
            idx in 0usize..33,
            bump in 0.0f64..5.0,
            seed in 0u64..1000,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = unit_1d(33);
            let f = Field::from_fn(&g, |_| rng.gen_range(-1.0..1.0));
            let before = lp_norm(&f, p);
            let mut vals = f.values().to_vec();
            let s = if vals[idx] < 0.0 { -1.0 } else { 1.0 };
            vals[idx] = s * (vals[idx].abs() + bump);
            let f2 = Field::from_values(&g, vals).unwrap();
            let after = lp_norm(&f2, p);
            prop_assert!(after + 1e-12 >= before);
        }

        // constant fields: Lp norm is k·|Ω|^{1/p}, Linf norm is k
        #[test]
        fn lp_norm_constant_scaling(k in 0.0f64..10.0, p in 1.0f64..8.0) {
            let g = make_grid(2, &[1.0, 2.0], &[9, 9]).unwrap();
            let f = Field::constant(&g, k);
            let expected = k * g.measure().powf(1.0 / p);
            prop_assert!((lp_norm(&f, p) - expected).abs() <= 1e-10 * (1.0 + expected));
            prop_assert_eq!(lp_norm(&f, f64::INFINITY), k);
        }
    }
}
