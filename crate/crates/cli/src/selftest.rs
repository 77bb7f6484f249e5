//! Golden checks against known values of the built-in models.
//!
//! The rotor checks run against the built-in rotor unless the configuration
//! supplies a replacement under `params.rotor`, which makes it possible to see
//! the suite reject a perturbed coupling table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use weakly_coupled::bounds::{
    coupling_constant_numeric, coupling_constant_tridiagonal, min_galerkin_dim,
    min_galerkin_dim_tridiagonal, GenericBoundInputs, TridiagonalBounds, DEFAULT_N_MAX,
};
use weakly_coupled::chains::chain_report;
use weakly_coupled::io::SystemSpec;
use weakly_coupled::models::{harmonic_oscillator, ion_matrices, planar_rotor};
use weakly_coupled::{build_galerkin, propagate, propagate_oracle, Control64, ControlSystem64, QuantumState64};

use crate::config::{typed_from_value, LoadedConfig};
use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, Serialize)]
pub struct Item {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
}

#[derive(Debug, Default, Serialize)]
pub struct Report {
    pub items: Vec<Item>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn failed(&self) -> Vec<String> {
        self.items
            .iter()
            .filter(|i| i.outcome == Outcome::Fail)
            .map(|i| i.name.clone())
            .collect()
    }

    fn check(&mut self, name: &str, f: impl FnOnce() -> CliResult<(bool, String)>) {
        let (outcome, detail) = match f() {
            Ok((true, d)) => (Outcome::Pass, d),
            Ok((false, d)) => (Outcome::Fail, d),
            Err(e) => (Outcome::Fail, e.to_string()),
        };
        self.items.push(Item {
            name: name.to_string(),
            outcome,
            detail,
        });
    }

    fn skip(&mut self, name: &str, why: &str) {
        self.items.push(Item {
            name: name.to_string(),
            outcome: Outcome::Skip,
            detail: why.to_string(),
        });
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    #[serde(default)]
    rotor: Option<Value>,
    #[serde(default)]
    models: Vec<String>,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn close(name: &str, got: f64, want: f64, tol: f64) -> (bool, String) {
    (rel(got, want) <= tol, format!("{name} = {got:e}, expected {want:e} (rel tol {tol:e})"))
}

const ROTOR_ITEMS: [&str; 7] = [
    "rotor-coupling-constant-k1",
    "rotor-coupling-constant-k2",
    "rotor-numeric-coupling-k1",
    "rotor-transition",
    "rotor-projection",
    "rotor-min-dim",
    "rotor-generic-threshold",
];

pub fn run(config: Option<&LoadedConfig>) -> CliResult<Report> {
    let params: Params = match config {
        Some(c) if !c.scenario.params.is_null() => typed_from_value(&c.scenario.params, "params")?,
        _ => Params::default(),
    };
    let mut report = Report::default();

    let rotor = match &params.rotor {
        None => Some(planar_rotor::<f64>()),
        Some(doc) => load_override(config, doc, &mut report)?,
    };
    match &rotor {
        Some(r) => rotor_items(&mut report, r),
        None => ROTOR_ITEMS.iter().for_each(|n| report.skip(n, "rotor override unavailable")),
    }
    oscillator_items(&mut report);
    dynamics_items(&mut report);
    structure_items(&mut report);

    for file in &params.models {
        let path = config.map_or_else(|| file.into(), |c| c.resolve(file));
        let name = format!("model-file {file}");
        match std::fs::read_to_string(&path) {
            Err(e) => {
                report.warnings.push(format!("skipping model file {}: {e}", path.display()));
                report.skip(&name, "file not readable");
            }
            Ok(text) => report.check(&name, || {
                let sys: ControlSystem64 = SystemSpec::from_json(&text)?.build()?;
                let n = sys.max_dimension().unwrap_or(16).min(16);
                sys.validate(n)?;
                build_galerkin(&sys, n)?;
                Ok((true, format!("{} validated up to N = {n}", sys.name)))
            }),
        }
    }
    Ok(report)
}

/// `None` (with a warning) when the override points at a missing file.
fn load_override(config: Option<&LoadedConfig>, doc: &Value, report: &mut Report) -> CliResult<Option<ControlSystem64>> {
    let doc = match doc.get("file").and_then(Value::as_str) {
        Some(file) => {
            let path = config.map_or_else(|| file.into(), |c| c.resolve(file));
            match std::fs::read_to_string(&path) {
                Ok(text) => serde_json::from_str(&text).map_err(|e| {
                    CliError::schema(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
                })?,
                Err(e) => {
                    report.warnings.push(format!("rotor override {}: {e}", path.display()));
                    return Ok(None);
                }
            }
        }
        None => doc.clone(),
    };
    let spec = SystemSpec::from_value(&doc).map_err(|e| CliError::schema(format!("field `params.rotor`: {e}")))?;
    Ok(Some(spec.build()?))
}

fn rotor_items(report: &mut Report, rotor: &ControlSystem64) {
    report.check(ROTOR_ITEMS[0], || {
        let c = coupling_constant_tridiagonal(rotor, 1, DEFAULT_N_MAX)?.value;
        Ok(close("c_1", c, 1.5, 1e-12))
    });
    report.check(ROTOR_ITEMS[1], || {
        let c = coupling_constant_tridiagonal(rotor, 2, DEFAULT_N_MAX)?.value;
        Ok(close("c_2", c, 7.5, 1e-12))
    });
    report.check(ROTOR_ITEMS[2], || {
        let g = build_galerkin(rotor, 200)?;
        let c = coupling_constant_numeric(&g, 1.0, 1)?.value;
        Ok(close("c_1 at N = 200", c, 0.43585123331982, 1e-10))
    });
    report.check(ROTOR_ITEMS[3], || {
        let ln = TridiagonalBounds::new(rotor)?.transition(1, 20, 4.0)?;
        Ok(close("|<phi_20, psi>| bound at K = 4", ln.exp(), 2.26e-6, 5e-3))
    });
    report.check(ROTOR_ITEMS[4], || {
        let ln = TridiagonalBounds::new(rotor)?.projection(1, 20, 4.0)?;
        Ok(close("projection bound at N = 20, K = 4", ln.exp(), 4.3e-5, 1e-2))
    });
    report.check(ROTOR_ITEMS[5], || {
        let res = min_galerkin_dim_tridiagonal(rotor, 1, 4.0, 1e-4, 1000)?;
        let prev = res.previous.map(|(n, ln)| (n, ln.exp()));
        let ok = res.order == Some(20)
            && prev.is_some_and(|(n, b)| n == 19 && rel(b, 1.93e-4) < 1e-2);
        Ok((ok, format!("N = {:?}, previous = {prev:?}; expected 20 and (19, 1.93e-4)", res.order)))
    });
    report.check(ROTOR_ITEMS[6], || {
        let c_k = coupling_constant_tridiagonal(rotor, 1, DEFAULT_N_MAX)?.value;
        let gi = GenericBoundInputs {
            d: 1.0,
            r: 0.0,
            k: 1.0,
            c_k,
            l1_budget: 4.0,
            snorm: 1.0,
        };
        let res = min_galerkin_dim(rotor, &gi, 1e-4, usize::MAX / 4)?;
        let sqrt_thr = (res.ln_threshold() / 2.0).exp();
        Ok(close("sqrt(lambda threshold)", sqrt_thr, 4.0 * 6f64.exp() * 1e4, 1e-12))
    });
}

fn oscillator_items(report: &mut Report) {
    let osc = harmonic_oscillator::<f64>();
    report.check("oscillator-coupling-constants", || {
        let c1 = coupling_constant_tridiagonal(&osc, 1, DEFAULT_N_MAX)?.value;
        let c2 = coupling_constant_tridiagonal(&osc, 2, DEFAULT_N_MAX)?.value;
        let ok = (c1 - 2.0).abs() < 1e-12 && (c2 - 8.0).abs() < 1e-12;
        Ok((ok, format!("c_1 = {c1}, c_2 = {c2}; expected 2 and 8")))
    });
    report.check("oscillator-numeric-coupling-k1", || {
        let c = coupling_constant_numeric(&build_galerkin(&osc, 200)?, 1.0, 1)?.value;
        let limit = 0.5f64.sqrt();
        Ok((c <= limit && limit - c < 1e-3, format!("c_1 at N = 200 = {c}, limit 1/sqrt(2) from below")))
    });
    report.check("oscillator-projection-413", || {
        let b = TridiagonalBounds::new(&osc)?.projection(1, 413, 3.0)?.exp();
        Ok((b < 1e-4, format!("projection bound at N = 413, K = 3 is {b:e}, expected < 1e-4")))
    });
    report.check("oscillator-generic-threshold", || {
        let gi = GenericBoundInputs {
            d: 1.0,
            r: 1.0,
            k: 2.0,
            c_k: 8.0,
            l1_budget: 3.0,
            snorm: 0.5,
        };
        let res = min_galerkin_dim(&osc, &gi, 1e-4, 1000)?;
        let want = 9f64.ln() + 48.0 - 4e-8f64.ln();
        let thr = res.ln_threshold().exp();
        Ok((
            (res.ln_threshold() - want).abs() < 1e-12 && res.order().is_none(),
            format!("lambda threshold {thr:e}, expected {:e} and no N below the cap", want.exp()),
        ))
    });
}

fn random_control(rng: &mut ChaCha8Rng, budget: f64) -> Control64 {
    let m = rng.random_range(1..=6);
    let mut pieces: Vec<(f64, f64)> =
        (0..m).map(|_| (rng.random_range(0.05..1.0), rng.random_range(-1.0..1.0))).collect();
    let l1: f64 = pieces.iter().map(|(d, u)| d * u.abs()).sum();
    for p in &mut pieces {
        p.1 *= budget / l1;
    }
    Control64::scalar(&pieces).expect("finite pieces")
}

fn dynamics_items(report: &mut Report) {
    let rotor = planar_rotor::<f64>();
    report.check("rotor-dominance", || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut tb = TridiagonalBounds::new(&rotor)?;
        let mut worst = 0.0f64;
        for order in [6usize, 12] {
            let g = build_galerkin(&rotor, order)?;
            let g_ref = build_galerkin(&rotor, 3 * order)?;
            for _ in 0..4 {
                let budget = rng.random_range(0.2..3.0);
                let control = random_control(&mut rng, budget);
                let k = control.l1_norm();
                let small = propagate(&g, &control, &QuantumState64::basis(order, 1)?, Some(0.1))?;
                let big = propagate(&g_ref, &control, &QuantumState64::basis(3 * order, 1)?, Some(0.1))?;
                let bound = tb.projection(1, order, k)?.exp();
                for ((_, a), (_, b)) in small.trajectory.iter().zip(&big.trajectory) {
                    worst = worst.max(b.project(order)?.distance(a) / bound);
                    for l in 2..=order {
                        worst = worst.max(b.coefficient(l).norm() / tb.transition(1, l, k)?.exp());
                    }
                }
            }
        }
        Ok((worst <= 1.0 + 1e-9, format!("largest observed/bound ratio {worst:.3e}")))
    });
    report.check("rotor-oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let control = random_control(&mut rng, 2.0);
        let g = build_galerkin(&rotor, 6)?;
        let psi0 = QuantumState64::basis(6, 1)?;
        let exact = propagate(&g, &control, &psi0, None)?.final_state;
        let rk4 = propagate_oracle(&g, &control, &psi0, 1e-4)?;
        let d = exact.distance(&rk4);
        Ok((d <= 1e-7, format!("|exponential - RK4| = {d:e}, tolerance 1e-7")))
    });
}

fn structure_items(report: &mut Report) {
    report.check("chains", || {
        let r = chain_report(&build_galerkin(&planar_rotor::<f64>(), 20)?, 1, 1e-12)?;
        let o = chain_report(&build_galerkin(&harmonic_oscillator::<f64>(), 20)?, 1, 1e-12)?;
        let ok = r.connected && r.non_degenerate && o.connected && !o.non_degenerate;
        Ok((
            ok,
            format!(
                "rotor connected {} non-degenerate {}; oscillator connected {} non-degenerate {}",
                r.connected, r.non_degenerate, o.connected, o.non_degenerate
            ),
        ))
    });
    report.check("ion-parity", || {
        let (c, s) = ion_matrices::<f64>(0.4, 40)?;
        let mut worst = 0.0f64;
        for m in 0..40 {
            for n in 0..40 {
                let v = if (m + n) % 2 == 1 { c[(m, n)] } else { s[(m, n)] };
                worst = worst.max(v.abs());
            }
        }
        let ground = (c[(0, 0)] - (-0.08f64).exp()).abs();
        Ok((
            worst <= 1e-12 && ground < 1e-13,
            format!("largest forbidden element {worst:e}, ground-state error {ground:e}"),
        ))
    });
}
