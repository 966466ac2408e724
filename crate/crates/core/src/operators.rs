//! Discrete spatial operators with zero-flux (Neumann) boundaries:
//! diffusion, chemotactic transport, gradient damping and the nonlocal sink —
//! every term of `u_t = Δu − χ∇·(u∇v) + a·u^ρ − b(∫u^β)^δ − c|∇u|^γ`.
//!
//! Diffusion and transport are assembled in conservative flux form: face
//! gradients first, then a divergence with half-width control volumes at the
//! boundary and face flux 0 on ∂Ω. The trapezoid weights of [`integrate`]
//! telescope against this assembly, so the discrete integral of `laplacian`
//! and of `chemo_divergence` vanishes to rounding for any input.

use crate::grid::{integrate, DomainSpec, Field, ModelParams};

/// Face value of u in the chemotaxis flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxScheme {
    /// Arithmetic mean of the two adjacent nodes (second order).
    Central,
    /// Donor-cell value selected by the sign of the face gradient of v
    /// (first order, monotone).
    Upwind,
}

/// x^e with negative x clamped to zero before powering.
#[inline]
fn pow_clamped(x: f64, e: f64) -> f64 {
    let y = x.max(0.0);
    if e == 1.0 {
        y
    } else {
        y.powf(e)
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

/// Gradient across x-faces: entry `k*ny + j` holds (f[k+1,j] − f[k,j]) / hx.
fn gradient_faces_x(f: &Field) -> Vec<f64> {
    let d = f.domain();
    let (nx, ny) = d.shape();
    let h = d.h[0];
    let v = f.values();
    let mut g = vec![0.0; (nx - 1) * ny];
    for i in 0..nx - 1 {
        for j in 0..ny {
            g[i * ny + j] = (v[(i + 1) * ny + j] - v[i * ny + j]) / h;
        }
    }
    g
}

/// Gradient across y-faces: entry `i*(ny-1) + k` holds (f[i,k+1] − f[i,k]) / hy.
fn gradient_faces_y(f: &Field) -> Vec<f64> {
    let d = f.domain();
    let (nx, ny) = d.shape();
    let h = d.h[1];
    let v = f.values();
    let mut g = vec![0.0; nx * (ny - 1)];
    for i in 0..nx {
        for j in 0..ny - 1 {
            g[i * (ny - 1) + j] = (v[i * ny + j + 1] - v[i * ny + j]) / h;
        }
    }
    g
}

/// Accumulate the x-divergence of face values into `out`. Boundary faces
/// carry zero flux; boundary nodes own a half-width control volume.
fn add_divergence_x(d: &DomainSpec, faces: &[f64], out: &mut [f64]) {
    let (nx, ny) = d.shape();
    let h = d.h[0];
    let half = 0.5 * h;
    for j in 0..ny {
        out[j] += faces[j] / half;
        for i in 1..nx - 1 {
            out[i * ny + j] += (faces[i * ny + j] - faces[(i - 1) * ny + j]) / h;
        }
        out[(nx - 1) * ny + j] += -faces[(nx - 2) * ny + j] / half;
    }
}

fn add_divergence_y(d: &DomainSpec, faces: &[f64], out: &mut [f64]) {
    let (nx, ny) = d.shape();
    let h = d.h[1];
    let half = 0.5 * h;
    let m = ny - 1;
    for i in 0..nx {
        out[i * ny] += faces[i * m] / half;
        for j in 1..ny - 1 {
            out[i * ny + j] += (faces[i * m + j] - faces[i * m + j - 1]) / h;
        }
        out[i * ny + ny - 1] += -faces[i * m + m - 1] / half;
    }
}

/// Second-order Neumann Laplacian.
///
/// Assembled as the divergence of face gradients with zero boundary flux,
/// which is algebraically the reflected-ghost stencil; its discrete integral
/// is zero to rounding for any field.
pub fn laplacian(f: &Field) -> Field {
    let d = f.domain();
    let mut out = vec![0.0; f.len()];
    let gx = gradient_faces_x(f);
    add_divergence_x(d, &gx, &mut out);
    if d.dim == 2 {
        let gy = gradient_faces_y(f);
        add_divergence_y(d, &gy, &mut out);
    }
    Field::from_raw(d, out)
}

/// The transport term −χ∇·(u∇v) in conservative flux form.
///
/// Face flux = χ · (u at face) · (central difference of v across the face);
/// boundary faces carry exactly zero flux, so the discrete integral of the
/// output vanishes to rounding.
///
/// # Panics
///
/// Panics if `u` and `v` live on different grids.
pub fn chemo_divergence(u: &Field, v: &Field, chi: f64) -> Field {
    chemo_divergence_scheme(u, v, chi, FluxScheme::Central)
}

/// [`chemo_divergence`] with an explicit face-value scheme.
pub fn chemo_divergence_scheme(u: &Field, v: &Field, chi: f64, scheme: FluxScheme) -> Field {
    assert_eq!(
        u.domain(),
        v.domain(),
        "chemo_divergence: u and v must share a grid"
    );
    let d = u.domain();
    let (nx, ny) = d.shape();
    let uv = u.values();
    let mut div = vec![0.0; u.len()];

    let mut fx = gradient_faces_x(v);
    for i in 0..nx - 1 {
        for j in 0..ny {
            let g = fx[i * ny + j];
            let uface = match scheme {
                FluxScheme::Central => 0.5 * (uv[i * ny + j] + uv[(i + 1) * ny + j]),
                FluxScheme::Upwind => {
                    if g > 0.0 {
                        uv[i * ny + j]
                    } else {
                        uv[(i + 1) * ny + j]
                    }
                }
            };
            fx[i * ny + j] = chi * uface * g;
        }
    }
    add_divergence_x(d, &fx, &mut div);

    if d.dim == 2 {
        let m = ny - 1;
        let mut fy = gradient_faces_y(v);
        for i in 0..nx {
            for j in 0..ny - 1 {
                let g = fy[i * m + j];
                let uface = match scheme {
                    FluxScheme::Central => 0.5 * (uv[i * ny + j] + uv[i * ny + j + 1]),
                    FluxScheme::Upwind => {
                        if g > 0.0 {
                            uv[i * ny + j]
                        } else {
                            uv[i * ny + j + 1]
                        }
                    }
                };
                fy[i * m + j] = chi * uface * g;
            }
        }
        add_divergence_y(d, &fy, &mut div);
    }

    for x in &mut div {
        *x = -*x;
    }
    Field::from_raw(d, div)
}

/// Pointwise |∇u|^γ with central differences in the interior.
///
/// At boundary nodes the normal derivative is taken as 0, consistent with
/// the zero-flux condition; the tangential part stays central.
///
/// # Panics
///
/// Panics if `gamma < 1`.
pub fn grad_magnitude_pow(u: &Field, gamma: f64) -> Field {
    assert!(gamma >= 1.0, "grad_magnitude_pow: gamma must be >= 1, got {gamma}");
    let d = u.domain();
    let (nx, ny) = d.shape();
    let v = u.values();
    let mut out = vec![0.0; u.len()];
    match d.dim {
        1 => {
            let two_h = 2.0 * d.h[0];
            for i in 1..nx - 1 {
                let g = (v[i + 1] - v[i - 1]) / two_h;
                out[i] = pow_nonneg(g.abs(), gamma);
            }
            // boundary nodes: u_ν = 0, so |∇u| = 0 there in 1D
        }
        _ => {
            let two_hx = 2.0 * d.h[0];
            let two_hy = 2.0 * d.h[1];
            for i in 0..nx {
                for j in 0..ny {
                    let gx = if i == 0 || i == nx - 1 {
                        0.0
                    } else {
                        (v[(i + 1) * ny + j] - v[(i - 1) * ny + j]) / two_hx
                    };
                    let gy = if j == 0 || j == ny - 1 {
                        0.0
                    } else {
                        (v[i * ny + j + 1] - v[i * ny + j - 1]) / two_hy
                    };
                    let mag = (gx * gx + gy * gy).sqrt();
                    out[i * ny + j] = pow_nonneg(mag, gamma);
                }
            }
        }
    }
    Field::from_raw(d, out)
}

/// The nonlocal sink coefficient b·(∫_Ω u^β)^δ (a spatial constant).
///
/// Negative u values are clamped to zero inside the power; the field itself
/// is untouched.
pub fn nonlocal_term(u: &Field, beta: f64, delta: f64, b: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let powed: Vec<f64> = u.values().iter().map(|&x| pow_clamped(x, beta)).collect();
    let integral = integrate(&Field::from_raw(u.domain(), powed));
    b * pow_nonneg(integral, delta)
}

/// The three reaction terms of the cell equation and their pointwise total.
#[derive(Debug, Clone)]
pub struct ReactionBreakdown {
    /// a·u^ρ per node.
    pub growth: Field,
    /// b·(∫u^β)^δ, spatially constant.
    pub nonlocal_sink: f64,
    /// c·|∇u|^γ per node.
    pub gradient_sink: Field,
    /// growth − nonlocal_sink − gradient_sink per node.
    pub total: Field,
}

/// Assemble the reaction a·u^ρ − b(∫u^β)^δ − c|∇u|^γ.
pub fn reaction(u: &Field, params: &ModelParams) -> ReactionBreakdown {
    let d = u.domain();
    let growth_vals: Vec<f64> = if params.a == 0.0 {
        vec![0.0; u.len()]
    } else {
        u.values()
            .iter()
            .map(|&x| params.a * pow_clamped(x, params.rho))
            .collect()
    };
    let sink = nonlocal_term(u, params.beta, params.delta, params.b);
    let grad_vals: Vec<f64> = if params.c == 0.0 {
        vec![0.0; u.len()]
    } else {
        grad_magnitude_pow(u, params.gamma)
            .values()
            .iter()
            .map(|&g| params.c * g)
            .collect()
    };
    let total_vals: Vec<f64> = growth_vals
        .iter()
        .zip(&grad_vals)
        .map(|(&gr, &gs)| (gr - sink) - gs)
        .collect();
    ReactionBreakdown {
        growth: Field::from_raw(d, growth_vals),
        nonlocal_sink: sink,
        gradient_sink: Field::from_raw(d, grad_vals),
        total: Field::from_raw(d, total_vals),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{lp_norm, make_grid, Tau};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_1d(n: usize) -> DomainSpec {
        make_grid(1, &[1.0], &[n]).unwrap()
    }

    fn random_field(d: &DomainSpec, rng: &mut ChaCha8Rng) -> Field {
        Field::from_fn(d, |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn laplacian_of_constant_is_exactly_zero() {
        for d in [unit_1d(17), make_grid(2, &[1.0, 2.0], &[9, 13]).unwrap()] {
            let f = Field::constant(&d, 5.0);
            assert!(laplacian(&f).values().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn laplacian_matches_neumann_eigenfunction() {
        // cos(πx) is an eigenfunction of the Neumann Laplacian on (0,1)
        let d = unit_1d(65);
        let f = Field::from_fn(&d, |x| (std::f64::consts::PI * x[0]).cos());
        let lap = laplacian(&f);
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let err = f
            .values()
            .iter()
            .zip(lap.values())
            .map(|(&fv, &lv)| (lv + pi2 * fv).abs())
            .fold(0.0f64, f64::max);
        // truncation ~ (π^4/12)·h^2 ≈ 2.0e-3 at h = 1/64
        assert!(err < 3e-3, "max eigenfunction error {err}");
    }

    #[test]
    fn laplacian_second_order_convergence() {
        let pi = std::f64::consts::PI;
        let mut errs = Vec::new();
        for n in [33usize, 65, 129] {
            let d = unit_1d(n);
            let f = Field::from_fn(&d, |x| (pi * x[0]).cos());
            let lap = laplacian(&f);
            let err = f
                .values()
                .iter()
                .zip(lap.values())
                .map(|(&fv, &lv)| (lv + pi * pi * fv).abs())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "observed order {order} from errors {errs:?}");
        }
    }

    #[test]
    fn laplacian_integrates_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [unit_1d(101), make_grid(2, &[1.0, 1.0], &[41, 41]).unwrap()] {
            for _ in 0..20 {
                let f = random_field(&d, &mut rng);
                let lap = laplacian(&f);
                let scale = lp_norm(&lap, 1.0).max(1e-300);
                assert!(integrate(&lap).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn chemo_zero_when_v_constant() {
        let d = unit_1d(33);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_field(&d, &mut rng);
        let v = Field::constant(&d, 4.2);
        for scheme in [FluxScheme::Central, FluxScheme::Upwind] {
            let out = chemo_divergence_scheme(&u, &v, 1.5, scheme);
            assert!(out.values().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn chemo_reduces_to_laplacian_for_unit_u() {
        // with u ≡ 1 and χ = 1 the flux form collapses node-for-node onto
        // −Δv: output + laplacian(v) must be exactly zero
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [unit_1d(41), make_grid(2, &[1.0, 1.5], &[9, 11]).unwrap()] {
            let v = random_field(&d, &mut rng);
            let u = Field::constant(&d, 1.0);
            let lap = laplacian(&v);
            for scheme in [FluxScheme::Central, FluxScheme::Upwind] {
                let out = chemo_divergence_scheme(&u, &v, 1.0, scheme);
                for (o, l) in out.values().iter().zip(lap.values()) {
                    assert_eq!(o + l, 0.0, "flux form failed to reduce to the stencil");
                }
            }
        }
    }

    #[test]
    fn chemo_integrates_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for d in [unit_1d(101), make_grid(2, &[1.0, 1.0], &[41, 41]).unwrap()] {
            for scheme in [FluxScheme::Central, FluxScheme::Upwind] {
                for _ in 0..10 {
                    let u = random_field(&d, &mut rng);
                    let v = random_field(&d, &mut rng);
                    let out = chemo_divergence_scheme(&u, &v, 2.0, scheme);
                    let scale = lp_norm(&out, 1.0).max(1e-300);
                    assert!(integrate(&out).abs() <= 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn chemo_aggregates_toward_signal_peak() {
        // uniform cells drift up the gradient of v: growth at the peak
        let d = unit_1d(65);
        let u = Field::constant(&d, 1.0);
        let pi = std::f64::consts::PI;
        let v = Field::from_fn(&d, |x| (2.0 * pi * x[0]).cos().mul_add(-0.5, 0.5));
        // v peaks at x = 1/2 (node 32)
        let out = chemo_divergence(&u, &v, 1.0);
        assert!(out.values()[32] > 0.0);
        assert!(out.values()[0] < 0.0);
    }

    #[test]
    fn grad_magnitude_zero_on_constants() {
        for d in [unit_1d(17), make_grid(2, &[1.0, 1.0], &[9, 9]).unwrap()] {
            let f = Field::constant(&d, 3.0);
            assert!(grad_magnitude_pow(&f, 1.7).values().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn grad_magnitude_exact_on_affine() {
        // dyadic spacing keeps node coordinates and differences exact
        let d = unit_1d(65);
        let f = Field::from_fn(&d, |x| x[0]);
        for gamma in [1.0, 1.5, 2.0] {
            let g = grad_magnitude_pow(&f, gamma);
            for i in 1..64 {
                assert_eq!(g.values()[i], 1.0, "gamma = {gamma}, node {i}");
            }
            assert_eq!(g.values()[0], 0.0);
            assert_eq!(g.values()[64], 0.0);
        }
    }

    #[test]
    fn grad_magnitude_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = make_grid(2, &[1.0, 1.0], &[11, 11]).unwrap();
        let f = random_field(&d, &mut rng);
        assert!(grad_magnitude_pow(&f, 1.3).values().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn nonlocal_term_examples() {
        let d = unit_1d(33);
        let one = Field::constant(&d, 1.0);
        assert!((nonlocal_term(&one, 3.0, 1.7, 0.9) - 0.9).abs() < 1e-12);

        let two = Field::constant(&d, 2.0);
        // (∫ 2^2)^2 = 16 on the unit interval
        assert!((nonlocal_term(&two, 2.0, 2.0, 1.0) - 16.0).abs() < 1e-12);

        let zero = Field::constant(&d, 0.0);
        assert_eq!(nonlocal_term(&zero, 2.0, 2.0, 1.0), 0.0);
    }

    #[test]
    fn nonlocal_term_clamps_negative_values() {
        let d = unit_1d(33);
        let f = Field::constant(&d, -1.0);
        // clamped to zero before powering: sink vanishes
        assert_eq!(nonlocal_term(&f, 1.5, 2.0, 1.0), 0.0);
    }

    #[test]
    fn reaction_on_zero_field_is_zero() {
        let d = unit_1d(17);
        let u = Field::constant(&d, 0.0);
        let p = ModelParams::default();
        let r = reaction(&u, &p);
        assert!(r.total.values().iter().all(|&x| x == 0.0));
        assert_eq!(r.nonlocal_sink, 0.0);
    }

    #[test]
    fn reaction_on_unit_field() {
        let d = unit_1d(33);
        let u = Field::constant(&d, 1.0);
        let p = ModelParams::new(1.0, 2.0, 1.0, 1.0, 3.0, 2.0, 1.5, 2.0, Tau::Parabolic).unwrap();
        let r = reaction(&u, &p);
        // a·1 − b·(|Ω|·1)^δ − 0 = 2 − 1 = 1
        for &t in r.total.values() {
            assert!((t - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reaction_matches_homogeneous_rhs_on_constants() {
        use crate::oracle::{homogeneous_rhs, HomogeneousParams};
        let d = unit_1d(65); // dyadic: quadrature weights sum to exactly |Ω|
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let u0: f64 = rng.gen_range(0.1..3.0);
            let p = ModelParams::new(
                1.0,
                rng.gen_range(0.2..2.0),
                rng.gen_range(0.2..2.0),
                1.0,
                rng.gen_range(1.0..3.0),
                rng.gen_range(1.0..2.0),
                rng.gen_range(1.0..2.5),
                2.0,
                Tau::Elliptic,
            )
            .unwrap();
            let u = Field::constant(&d, u0);
            let r = reaction(&u, &p);
            let hp = HomogeneousParams {
                a: p.a,
                b: p.b,
                rho: p.rho,
                beta: p.beta,
                delta: p.delta,
                omega_measure: d.measure(),
            };
            let expected = homogeneous_rhs(u0, &hp);
            for &t in r.total.values() {
                assert!(
                    (t - expected).abs() <= 1e-12 * (1.0 + expected.abs()),
                    "total {t} vs homogeneous rhs {expected}"
                );
            }
        }
    }

    #[test]
    fn reaction_breakdown_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = make_grid(2, &[1.0, 1.0], &[9, 9]).unwrap();
        let u = random_field(&d, &mut rng);
        let p = ModelParams::default();
        let r = reaction(&u, &p);
        for i in 0..u.len() {
            let expect = (r.growth.values()[i] - r.nonlocal_sink) - r.gradient_sink.values()[i];
            assert_eq!(r.total.values()[i], expect);
        }
        assert!(r.growth.values().iter().all(|&x| x >= 0.0));
        assert!(r.gradient_sink.values().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn operators_preserve_mirror_symmetry() {
        // symmetric inputs must produce bitwise-symmetric outputs
        let n = 41;
        let d = unit_1d(n);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut vals: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
        for i in 0..n / 2 {
            vals[n - 1 - i] = vals[i];
        }
        let u = Field::from_values(&d, vals.clone()).unwrap();
        let mut vvals: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        for i in 0..n / 2 {
            vvals[n - 1 - i] = vvals[i];
        }
        let v = Field::from_values(&d, vvals).unwrap();

        let check = |f: &Field| {
            for i in 0..n {
                assert_eq!(f.values()[i], f.values()[n - 1 - i]);
            }
        };
        check(&laplacian(&u));
        check(&chemo_divergence(&u, &v, 0.7));
        check(&chemo_divergence_scheme(&u, &v, 0.7, FluxScheme::Upwind));
        check(&grad_magnitude_pow(&u, 1.4));
        check(&reaction(&u, &ModelParams::default()).total);
    }
}
