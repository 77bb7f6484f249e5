use weakly_coupled::bounds::min_galerkin_dim_tridiagonal;
use weakly_coupled::lyapunov::{
    certify_infinite_dim, lyapunov_value, synthesize, CertificateStatus, LyapunovConfig,
};
use weakly_coupled::models::{harmonic_oscillator, planar_rotor, trapped_ion, TrappedIonParams};
use weakly_coupled::{build_galerkin, propagate, Complex64, Error, QuantumState64};

fn tilted(n: usize) -> QuantumState64 {
    QuantumState64::tilted(n, 1e-3).unwrap()
}

#[test]
fn value_examples() {
    let phi2 = QuantumState64::basis(5, 2).unwrap();
    let phi1 = QuantumState64::basis(5, 1).unwrap();
    assert_eq!(lyapunov_value(&phi2, 2).unwrap(), 0.0);
    assert_eq!(lyapunov_value(&phi1, 2).unwrap(), 1.0);
    let v = lyapunov_value(&tilted(5), 2).unwrap();
    assert!((v - (1.0 - 1e-3f64.sin().powi(2))).abs() < 1e-15);
    let bad = QuantumState64::unnormalized(nalgebra::DVector::from_element(3, Complex64::new(1.0, 0.0)));
    assert!(matches!(lyapunov_value(&bad, 1), Err(Error::Contract(_))));
}

#[test]
fn target_state_is_an_equilibrium() {
    let sys = planar_rotor::<f64>();
    let g = build_galerkin(&sys, 10).unwrap();
    let cfg = LyapunovConfig { horizon: 1.0, ..Default::default() };
    let run = synthesize(&g, &QuantumState64::basis(10, 2).unwrap(), &cfg).unwrap();
    assert!(run.feedback.iter().all(|u| u.abs() < 1e-14));
    assert!(run.v_trace.iter().all(|(_, v)| *v < 1e-14));
    assert!(run.stagnation.is_none());
}

#[test]
fn stagnation_is_reported_for_ground_state() {
    let sys = planar_rotor::<f64>();
    let g = build_galerkin(&sys, 6).unwrap();
    let cfg = LyapunovConfig { horizon: 0.1, ..Default::default() };
    let run = synthesize(&g, &QuantumState64::basis(6, 1).unwrap(), &cfg).unwrap();
    assert!(run.stagnation.is_some());
    assert_eq!(run.final_fidelity, 0.0);
}

#[test]
fn rejects_bad_configs() {
    let rotor = planar_rotor::<f64>();
    let g = build_galerkin(&rotor, 4).unwrap();
    let psi = tilted(4);
    let zero_gain = LyapunovConfig { gain: 0.0, ..Default::default() };
    assert!(matches!(synthesize(&g, &psi, &zero_gain), Err(Error::InvalidArgument { .. })));
    let ragged = LyapunovConfig { horizon: 1.0, sample_dt: 0.3, ..Default::default() };
    assert!(synthesize(&g, &psi, &ragged).is_err());

    let ion = trapped_ion::<f64>(&TrappedIonParams { omega: 1.0, detuning: 2.0, eta: 0.1, levels: 2 }).unwrap();
    let gi = build_galerkin(&ion, 4).unwrap();
    assert!(matches!(synthesize(&gi, &psi, &LyapunovConfig::default()), Err(Error::Unsupported(_))));
}

#[test]
fn gain_scales_first_feedback() {
    let sys = harmonic_oscillator::<f64>();
    let g = build_galerkin(&sys, 8).unwrap();
    let psi = QuantumState64::tilted(8, 0.3).unwrap();
    let base = LyapunovConfig { horizon: 0.05, ..Default::default() };
    let a = synthesize(&g, &psi, &base).unwrap();
    let b = synthesize(&g, &psi, &LyapunovConfig { gain: 2.5, ..base.clone() }).unwrap();
    assert_eq!(b.feedback[0], 2.5 * a.feedback[0]);
}

#[test]
fn rotor_experiment() {
    let n = 20;
    let sys = planar_rotor::<f64>();
    let g = build_galerkin(&sys, n).unwrap();
    let psi0 = tilted(n);
    let run = synthesize(&g, &psi0, &LyapunovConfig::default()).unwrap();

    assert!(run.final_fidelity > 1.0 - 1e-3, "fidelity {}", run.final_fidelity);
    let k = run.control.l1_norm();
    assert!(k < 4.5, "L1 {k}");
    for w in run.v_trace.windows(2) {
        assert!(w[1].1 <= w[0].1 + 1e-10);
    }
    assert!(run.v_trace.iter().all(|(_, v)| (0.0..=1.0).contains(v)));
    let last_v = run.v_trace.last().unwrap().1;
    assert!((run.final_fidelity - (1.0 - last_v)).abs() < 1e-15);

    // Replaying the emitted control reproduces the loop bit for bit.
    let replay = propagate(&g, &run.control, &psi0, None).unwrap();
    assert_eq!(replay.final_state.coefficients(), run.final_state.coefficients());

    let cert = certify_infinite_dim(&run, &sys, n, 1e-4).unwrap();
    assert_eq!(cert.status, CertificateStatus::Certified);
    assert!(cert.error_bound < 4.4e-5);
    assert!(cert.certified_fidelity > run.final_fidelity - 1e-4);
    assert!(cert.certified_amplitude > cert.final_amplitude - 4.4e-5);

    // Below the minimal order for ε = margin the certificate is withheld.
    let m = 19;
    let gm = build_galerkin(&sys, m).unwrap();
    let short = synthesize(&gm, &tilted(m), &LyapunovConfig::default()).unwrap();
    let need = min_galerkin_dim_tridiagonal(&sys, 2, short.control.l1_norm(), 1e-4, 100).unwrap();
    assert!(need.order.unwrap() > m);
    let cert = certify_infinite_dim(&short, &sys, m, 1e-4).unwrap();
    assert!(matches!(cert.status, CertificateStatus::Unavailable(_)));
}

#[test]
fn zero_control_certificate_is_exact() {
    let sys = planar_rotor::<f64>();
    let g = build_galerkin(&sys, 5).unwrap();
    let run = synthesize(&g, &QuantumState64::basis(5, 2).unwrap(), &LyapunovConfig { horizon: 0.5, ..Default::default() })
        .unwrap();
    assert_eq!(run.control.l1_norm(), 0.0);
    let cert = certify_infinite_dim(&run, &sys, 5, 1e-4).unwrap();
    assert_eq!(cert.certified_fidelity, cert.final_fidelity);
    assert_eq!(cert.error_bound, 0.0);
}

#[test]
fn v_trace_csv_shape() {
    let sys = planar_rotor::<f64>();
    let g = build_galerkin(&sys, 4).unwrap();
    let run = synthesize(&g, &tilted(4), &LyapunovConfig { horizon: 0.03, ..Default::default() }).unwrap();
    let mut out = Vec::new();
    run.write_v_trace_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "t,V,u");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].ends_with(','));
}
