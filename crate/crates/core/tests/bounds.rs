use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakly_coupled::bounds::{
    coupling_constant_numeric, coupling_constant_tridiagonal, energy_growth_bound, galerkin_error_bound,
    ln_factorial, min_galerkin_dim, min_galerkin_dim_tridiagonal, tail_coupling_bound, transition_bound,
    tridiagonal_projection_error_bound, BoundReport, EstimateKind, GenericBoundInputs, MinDim, TridiagonalBounds,
    DEFAULT_N_MAX,
};
use weakly_coupled::models::{harmonic_oscillator, planar_rotor, tabulated, trapped_ion, TrappedIonParams};
use weakly_coupled::{build_galerkin, propagate, Complex64, Control64, Error, GalerkinSystem64, QuantumState64};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Largest eigenvalue of the symmetric tri-diagonal matrix with zero diagonal
/// and off-diagonal `e`, by Sturm-sequence bisection.
fn sturm_max_eigenvalue(e: &[f64]) -> f64 {
    let count_below = |x: f64| {
        let mut q = -x;
        let mut count = usize::from(q < 0.0);
        for &ei in e {
            let denom = if q == 0.0 { 1e-300 } else { q };
            q = -x - ei * ei / denom;
            count += usize::from(q < 0.0);
        }
        count
    };
    let n = e.len() + 1;
    let (mut lo, mut hi) = (0.0, 2.0 * e.iter().fold(0.0f64, |a, &b| a.max(b.abs())) + 1e-300);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Independent evaluation of `max |eig|` of `Λ^{-k/2} H Λ^{-k/2}` for a
/// tri-diagonal, zero-diagonal compression.
fn numeric_oracle(g: &GalerkinSystem64, k: f64) -> f64 {
    let b = g.b_matrix(1).unwrap();
    let lam = g.eigenvalues();
    let e: Vec<f64> = (0..lam.len() - 1)
        .map(|j| {
            let r = (lam[j] / lam[j + 1]).powf(k / 2.0);
            (0.5 * (b[(j, j + 1)] * r + b[(j + 1, j)].conj() / r)).norm()
        })
        .collect();
    sturm_max_eigenvalue(&e)
}

#[test]
fn rotor_coupling_constants_closed_form() {
    let rotor = planar_rotor::<f64>();
    for k in 1..=6u32 {
        let est = coupling_constant_tridiagonal(&rotor, k, DEFAULT_N_MAX).unwrap();
        let expect = (4f64.powi(k as i32) - 1.0) / 2.0;
        assert!((est.value - expect).abs() <= 1e-12 * expect, "k={k}");
        assert_eq!(est.kind, EstimateKind::ExactSupremum);
        assert_eq!(est.argmax, Some(1));
        assert!(est.warnings.is_empty(), "{:?}", est.warnings);
    }
    assert_eq!(coupling_constant_tridiagonal(&rotor, 1, DEFAULT_N_MAX).unwrap().value, 1.5);
}

#[test]
fn oscillator_coupling_constants() {
    let osc = harmonic_oscillator::<f64>();
    assert!((coupling_constant_tridiagonal(&osc, 1, DEFAULT_N_MAX).unwrap().value - 2.0).abs() < 1e-12);
    for k in 2..=6u32 {
        let v = coupling_constant_tridiagonal(&osc, k, DEFAULT_N_MAX).unwrap().value;
        assert!(v <= 3f64.powi(k as i32) - 1.0 + 1e-9, "k={k}: {v}");
    }
    let c2 = coupling_constant_tridiagonal(&osc, 2, DEFAULT_N_MAX).unwrap().value;
    assert!((c2 - 8.0).abs() < 1e-12);
}

#[test]
fn coupling_constant_rejects_dense_systems() {
    let ion = trapped_ion::<f64>(&TrappedIonParams { omega: 1.0, detuning: 1.0, eta: 0.3, levels: 3 }).unwrap();
    assert!(matches!(coupling_constant_tridiagonal(&ion, 1, 100), Err(Error::Shape(_))));
    assert!(matches!(transition_bound(&ion, 1, 2, 1.0), Err(Error::Shape(_))));
}

#[test]
fn hypothesis_warnings_on_wild_tables() {
    // Ratio λ_{n+1}/λ_n explodes and the coupling grows faster than λ_n.
    let spectrum: Vec<f64> = (0..12).map(|i| 10f64.powi(i)).collect();
    let entries: Vec<_> = (1..12).map(|j| (1, j, j + 1, Complex64::new(0.0, 10f64.powi(j as i32 + 2)))).collect();
    let sys = tabulated("wild", spectrum, &entries).unwrap();
    let est = coupling_constant_tridiagonal(&sys, 1, DEFAULT_N_MAX).unwrap();
    assert_eq!(est.kind, EstimateKind::TruncationNumeric);
    assert!(!est.warnings.is_empty());
}

#[test]
fn numeric_coupling_constant_matches_sturm_oracle() {
    for (sys, k) in [(planar_rotor::<f64>(), 1.0), (planar_rotor(), 2.0), (harmonic_oscillator(), 1.0), (harmonic_oscillator(), 0.5)] {
        let mut prev = 0.0;
        for n in [2, 3, 5, 10, 20, 50, 200] {
            let g = build_galerkin(&sys, n).unwrap();
            let est = coupling_constant_numeric(&g, k, 1).unwrap();
            let oracle = numeric_oracle(&g, k);
            assert!((est.value - oracle).abs() < 1e-10, "{} N={n}: {} vs {oracle}", sys.name, est.value);
            assert!(est.value >= prev - 1e-12, "not monotone in N");
            assert_eq!(est.truncation_order, Some(n));
            prev = est.value;
        }
        if k.fract() == 0.0 {
            let closed = coupling_constant_tridiagonal(&sys, k as u32, DEFAULT_N_MAX).unwrap().value;
            assert!(prev <= closed + 1e-10);
        }
    }
}

#[test]
fn numeric_coupling_constant_reference_values() {
    let rotor = planar_rotor::<f64>();
    let osc = harmonic_oscillator::<f64>();
    let at = |sys, n, k| coupling_constant_numeric(&build_galerkin(sys, n).unwrap(), k, 1).unwrap().value;
    assert!((at(&rotor, 200, 1.0) - 0.43585123331982).abs() < 1e-10);
    assert!((at(&rotor, 200, 2.0) - 1.04992868659926).abs() < 1e-10);
    assert!((at(&osc, 200, 1.0) - 0.5f64.sqrt()).abs() < 1e-3);
    assert!(at(&osc, 200, 1.0) <= 0.5f64.sqrt());
}

#[test]
fn numeric_coupling_constant_of_diagonal_coupling_is_zero() {
    let entries: Vec<_> = (1..=6).map(|j| (1, j, j, Complex64::new(0.0, j as f64 * 0.3 - 1.0))).collect();
    let sys = tabulated("diag", (1..=6).map(|j| j as f64).collect(), &entries).unwrap();
    let g = build_galerkin(&sys, 6).unwrap();
    assert_eq!(coupling_constant_numeric(&g, 1.0, 1).unwrap().value, 0.0);
    let g1 = build_galerkin(&sys, 1).unwrap();
    assert!(matches!(coupling_constant_numeric(&g1, 1.0, 1), Err(Error::InvalidDimension(_))));
}

#[test]
fn energy_growth_examples() {
    assert_eq!(energy_growth_bound(0.0f64, 3.0, 2.5).unwrap(), 2.5);
    assert_eq!(energy_growth_bound(1.5f64, 0.0, 2.5).unwrap(), 2.5);
    assert!((energy_growth_bound(1.5f64, 4.0, 1.0).unwrap() - 403.4287934927351).abs() < 1e-9);
    assert!(energy_growth_bound(-1.0f64, 1.0, 1.0).is_err());
}

fn gi(d: f64, r: f64, k: f64, c_k: f64, l1_budget: f64, snorm: f64) -> GenericBoundInputs<f64> {
    GenericBoundInputs { d, r, k, c_k, l1_budget, snorm }
}

#[test]
fn tail_and_galerkin_error_examples() {
    assert!((tail_coupling_bound(&gi(1.0, 0.0, 2.0, 3.0, 0.0, 1.0), 100.0).unwrap() - 0.01).abs() < 1e-15);
    assert!(tail_coupling_bound(&gi(1.0, 0.0, 2.0, 3.0, 1.0, 1.0), 1e300).unwrap() < 1e-140);
    assert!(matches!(tail_coupling_bound(&gi(1.0, 2.0, 2.0, 1.0, 1.0, 1.0), 4.0), Err(Error::InvalidExponent(_))));
    let e6 = 6f64.exp();
    for n in [1.0, 9.0, 99.0] {
        let v = tail_coupling_bound(&gi(1.0, 0.0, 1.0, 1.5, 4.0, 1.0), (n + 1.0) * (n + 1.0)).unwrap();
        assert!(rel(v, e6 / (n + 1.0)) < 1e-12);
    }

    let g0 = galerkin_error_bound(&gi(1.0, 0.0, 2.0, 3.0, 0.0, 0.7), 25.0).unwrap();
    assert!(rel(g0, 0.7 / 25.0) < 1e-14);
    let a = galerkin_error_bound(&gi(1.0, 0.0, 1.0, 1.5, 4.0, 1.0), 1e16).unwrap();
    let b = galerkin_error_bound(&gi(1.0, 0.0, 1.0, 1.5, 4.0, 2.0), 1e16).unwrap();
    assert!(rel(b, 2.0 * a) < 1e-14);
    assert!(rel(a, e6 * (1e-8 + 4e-8)) < 1e-12);

    // Monotonicity.
    let base = gi(1.0, 0.5, 2.0, 1.0, 2.0, 1.0);
    let f = |inp: GenericBoundInputs<f64>, l: f64| galerkin_error_bound(&inp, l).unwrap();
    assert!(f(base, 10.0) > f(base, 11.0));
    assert!(f(gi(1.0, 0.5, 2.0, 1.0, 2.5, 1.0), 10.0) > f(base, 10.0));
    assert!(f(gi(1.0, 0.5, 2.0, 1.0, 2.0, 1.1), 10.0) > f(base, 10.0));
}

#[test]
fn generic_min_dim_rotor() {
    let rotor = planar_rotor::<f64>();
    let inputs = gi(1.0, 0.0, 1.0, 1.5, 4.0, 1.0);
    let res = min_galerkin_dim(&rotor, &inputs, 1e-4, usize::MAX / 4).unwrap();
    let thr = 4.0 * 6f64.exp() * 1e4;
    assert!(rel(res.ln_threshold(), 2.0 * thr.ln()) < 1e-14);
    let n = res.order().unwrap();
    assert_eq!(n + 1, thr.ceil() as usize);
    assert!(n as f64 + 1.0 > thr && (n as f64) <= thr);
    assert!(n > 2_700_000);
    // Unsatisfiable below the cap.
    assert!(matches!(min_galerkin_dim(&rotor, &inputs, 1e-4, 2_700_000).unwrap(), MinDim::Unsat { .. }));
    // Huge ε: any truncation works.
    assert_eq!(min_galerkin_dim(&rotor, &inputs, 1e9, 100).unwrap().order(), Some(1));
    assert!(min_galerkin_dim(&rotor, &inputs, 0.0, 100).is_err());
}

#[test]
fn generic_min_dim_oscillator_threshold() {
    let osc = harmonic_oscillator::<f64>();
    let (k, eps) = (3.0f64, 1e-4f64);
    let inputs = gi(1.0, 1.0, 2.0, 8.0, k, 0.5);
    let res = min_galerkin_dim(&osc, &inputs, eps, 1000).unwrap();
    // λ_{N+1} = N + 1/2 > K² e^{16K} / (4ε²).
    let expect = (k * k).ln() + 16.0 * k - (4.0 * eps * eps).ln();
    assert!((res.ln_threshold() - expect).abs() < 1e-12);
    assert!(res.ln_threshold().exp() > 1e29);
    assert!(res.order().is_none());
}

#[test]
fn transition_bound_examples() {
    let rotor = planar_rotor::<f64>();
    for k in [0.5, 1.0, 4.0] {
        assert!((transition_bound(&rotor, 3, 4, k).unwrap() - k.ln()).abs() < 1e-14);
    }
    assert_eq!(transition_bound(&rotor, 1, 5, 0.0).unwrap(), f64::NEG_INFINITY);
    let v = transition_bound(&rotor, 1, 20, 4.0).unwrap();
    assert!((v - (19.0 * 4f64.ln() - ln_factorial::<f64>(19))).abs() < 1e-12);
    assert!(rel(v.exp(), 2.26e-6) < 5e-3);
    assert!(transition_bound(&rotor, 3, 3, 1.0).is_err());
}

#[test]
fn projection_bound_examples() {
    let rotor = planar_rotor::<f64>();
    let v = tridiagonal_projection_error_bound(&rotor, 1, 20, 4.0).unwrap();
    let closed = 19.0 * 4f64.ln() - ln_factorial::<f64>(18);
    assert!((v - closed).abs() < 1e-12);
    assert!(v.exp() < 1e-4 && rel(v.exp(), 4.3e-5) < 0.01);
    assert_eq!(tridiagonal_projection_error_bound(&rotor, 2, 20, 4.0).unwrap(), v);

    let osc = harmonic_oscillator::<f64>();
    let n = 413usize;
    let ln_expr = (n as f64 - 1.0) * 2f64.ln() + 0.5 * (n as f64 + 2.0).ln() - ln_factorial::<f64>(n - 1)
        + 0.5 * (ln_factorial::<f64>(2 * n) - ln_factorial::<f64>(n + 1))
        + n as f64 * 3f64.ln();
    let got = tridiagonal_projection_error_bound(&osc, 1, n, 3.0).unwrap();
    assert!(got >= ln_expr - 1e-9);
    assert!(got < 1e-4f64.ln());
    assert_eq!(tridiagonal_projection_error_bound(&rotor, 1, 20, 0.0).unwrap(), f64::NEG_INFINITY);
    assert!(tridiagonal_projection_error_bound(&osc, 5, 4, 1.0).is_err());
}

#[test]
fn tridiagonal_min_dim() {
    let rotor = planar_rotor::<f64>();
    let res = min_galerkin_dim_tridiagonal(&rotor, 1, 4.0, 1e-4, 1000).unwrap();
    assert_eq!(res.order, Some(20));
    let (prev_n, prev_ln) = res.previous.unwrap();
    assert_eq!(prev_n, 19);
    assert!(rel(prev_ln.exp(), 1.93e-4) < 0.01);
    assert!(res.tail_monotone);

    let osc = harmonic_oscillator::<f64>();
    let res = min_galerkin_dim_tridiagonal(&osc, 1, 3.0, 1e-4, 2000).unwrap();
    assert!(res.order.unwrap() <= 413);

    let edge = min_galerkin_dim_tridiagonal(&rotor, 1, 1.0, 1.5, 100).unwrap();
    assert_eq!(edge.order, Some(2));
    let none = min_galerkin_dim_tridiagonal(&rotor, 1, 4.0, 1e-4, 15).unwrap();
    assert_eq!(none.order, None);
}

#[test]
fn log_and_linear_reports_agree() {
    let ln = tridiagonal_projection_error_bound(&planar_rotor::<f64>(), 1, 20, 4.0).unwrap();
    let r = BoundReport::from_ln("p", Default::default(), ln, "x");
    let value = r.value.unwrap();
    assert!(rel(value, ln.exp()) < 1e-12);
    assert!(rel(10f64.powf(r.log10_value.unwrap()), value) < 1e-12);
    let tiny = BoundReport::from_ln("p", Default::default(), -2000.0, "x");
    assert!(tiny.value.is_none());
    let json = serde_json::to_value(&tiny).unwrap();
    assert!(json["value"].is_null());
    for key in ["name", "inputs", "log10_value", "anchor"] {
        assert!(json.get(key).is_some(), "{key}");
    }
}

fn random_control(rng: &mut ChaCha8Rng, budget: f64) -> Control64 {
    let m = rng.random_range(1..=6);
    let mut pieces: Vec<(f64, f64)> =
        (0..m).map(|_| (rng.random_range(0.05..1.0), rng.random_range(-1.0..1.0))).collect();
    let l1: f64 = pieces.iter().map(|(d, u)| d * u.abs()).sum();
    for p in &mut pieces {
        p.1 *= budget / l1;
    }
    Control64::scalar(&pieces).unwrap()
}

#[test]
fn bounds_dominate_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for sys in [planar_rotor::<f64>(), harmonic_oscillator()] {
        let mut tb = TridiagonalBounds::new(&sys).unwrap();
        for n_order in [4usize, 10, 25] {
            let g = build_galerkin(&sys, n_order).unwrap();
            let g_ref = build_galerkin(&sys, 2 * n_order).unwrap();
            let g_tr = build_galerkin(&sys, n_order + 15).unwrap();
            for _ in 0..6 {
                let k = rng.random_range(0.1..4.0);
                let control = random_control(&mut rng, k);
                let kk = control.l1_norm();
                for n in [1usize, 2] {
                    let tr = propagate(&g_tr, &control, &QuantumState64::basis(n_order + 15, n).unwrap(), Some(0.1))
                        .unwrap();
                    for (_, psi) in &tr.trajectory {
                        for l in n + 1..=(n + 6).min(n_order) {
                            let b = tb.transition(n, l, kk).unwrap().exp();
                            assert!(psi.coefficient(l).norm() <= b + 1e-9);
                        }
                    }
                    if n_order < tb.first_order(n) {
                        continue;
                    }
                    let small = propagate(&g, &control, &QuantumState64::basis(n_order, n).unwrap(), Some(0.1)).unwrap();
                    let big =
                        propagate(&g_ref, &control, &QuantumState64::basis(2 * n_order, n).unwrap(), Some(0.1)).unwrap();
                    let bound = tb.projection(n, n_order, kk).unwrap().exp();
                    for ((_, a), (_, b)) in small.trajectory.iter().zip(&big.trajectory) {
                        let err = b.project(n_order).unwrap().distance(a);
                        assert!(err <= bound + 1e-8, "{} N={n_order} n={n}: {err:e} > {bound:e}", sys.name);
                    }
                }
            }
        }
    }
}
