//! One runner per scenario kind. Each validates its parameters, computes, and
//! returns the output files plus a few human-readable summary lines.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use weakly_coupled::bounds::{
    coupling_constant_numeric, coupling_constant_tridiagonal, energy_growth_bound, galerkin_error_bound, inputs,
    min_galerkin_dim, min_galerkin_dim_tridiagonal, tail_coupling_bound, BoundReport, EstimateKind,
    GenericBoundInputs, MinDim, TridiagonalBounds, DEFAULT_N_MAX,
};
use weakly_coupled::chains::{coupling_graph, nondegeneracy_check, DEFAULT_GAP_REL, DEFAULT_TOL};
use weakly_coupled::io::ControlSpec;
use weakly_coupled::lyapunov::{certify_infinite_dim, synthesize, CertificateStatus, LyapunovConfig};
use weakly_coupled::propagator::{default_oracle_step, write_trajectory_csv};
use weakly_coupled::{build_galerkin, propagate, propagate_oracle, ControlSystem64};

use crate::config::{Kind, LoadedConfig};
use crate::error::{CliError, CliResult};
use crate::inputs::{load_control, load_system, InitialSpec};
use crate::output::Outputs;

pub struct ScenarioRun {
    pub outputs: Outputs,
    pub summary: Vec<String>,
}

pub fn run(kind: Kind, config: &LoadedConfig) -> CliResult<ScenarioRun> {
    match kind {
        Kind::Simulate => simulate(config),
        Kind::Bound => bound(config),
        Kind::MinDim => min_dim(config),
        Kind::Lyapunov => lyapunov(config),
        Kind::Chain => chain(config),
        Kind::OracleCompare => oracle_compare(config),
        Kind::SelfTest => Err(CliError::schema("self-test is not a scenario kind")),
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> weakly_coupled::Result<()>) -> CliResult<Vec<u8>> {
    let mut out = Vec::new();
    f(&mut out)?;
    Ok(out)
}

fn coefficients(psi: &weakly_coupled::QuantumState64) -> Vec<[f64; 2]> {
    psi.coefficients().iter().map(|c| [c.re, c.im]).collect()
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateParams {
    #[serde(rename = "N")]
    order: usize,
    control: Value,
    #[serde(default)]
    initial: InitialSpec,
    #[serde(default)]
    sample_every: Option<f64>,
}

fn simulate(config: &LoadedConfig) -> CliResult<ScenarioRun> {
    let p: SimulateParams = config.params()?;
    let system = load_system(config)?;
    let control = load_control(config, &p.control, "params.control")?;
    let g = build_galerkin(&system, p.order)?;
    let psi0 = p.initial.build(p.order)?;
    let r = propagate(&g, &control, &psi0, p.sample_every)?;
    let mut outputs = Outputs::new();
    if p.sample_every.is_some() {
        outputs.add(
            "trajectory.csv",
            csv_bytes(|out| write_trajectory_csv(out, &r.trajectory, g.eigenvalues()))?,
        );
    }
    let snorm = r.final_state.s_norm_with(g.eigenvalues(), 0.5)?;
    outputs.json(
        "final_state.json",
        &json!({
            "N": p.order,
            "t_final": control.total_duration(),
            "l1_norm": control.l1_norm(),
            "coefficients": coefficients(&r.final_state),
            "norm": r.final_state.norm(),
            "snorm_half": snorm,
            "max_norm_drift": r.max_norm_drift,
        }),
    );
    Ok(ScenarioRun {
        outputs,
        summary: vec![format!(
            "propagated N = {} over t = {} (max norm drift {:e})",
            p.order,
            control.total_duration(),
            r.max_norm_drift
        )],
    })
}

// ------------------------------------------------------------------- bound

#[derive(Debug, Deserialize)]
#[serde(tag = "bound", rename_all = "kebab-case", deny_unknown_fields)]
enum BoundParams {
    CouplingConstant {
        k: u32,
        #[serde(default = "default_n_max")]
        n_max: usize,
    },
    CouplingConstantNumeric {
        k: f64,
        #[serde(rename = "N")]
        order: usize,
        #[serde(default = "one")]
        channel: usize,
    },
    EnergyGrowth {
        #[serde(default)]
        c_k: Option<f64>,
        #[serde(default)]
        k: Option<u32>,
        #[serde(rename = "K")]
        l1_budget: f64,
        snorm: f64,
    },
    Tail(GenericParams),
    GalerkinError(GenericParams),
    Transition {
        n: usize,
        l: usize,
        #[serde(rename = "K")]
        l1_budget: f64,
    },
    Projection {
        n: usize,
        #[serde(rename = "N")]
        order: usize,
        #[serde(rename = "K")]
        l1_budget: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenericParams {
    #[serde(default = "one_f")]
    d: f64,
    #[serde(default)]
    r: f64,
    k: f64,
    #[serde(default)]
    c_k: Option<f64>,
    #[serde(rename = "K")]
    l1_budget: f64,
    #[serde(default = "one_f")]
    snorm: f64,
    #[serde(default)]
    lambda_next: Option<f64>,
    #[serde(default, rename = "N")]
    order: Option<usize>,
}

fn one() -> usize {
    1
}

fn one_f() -> f64 {
    1.0
}

fn default_n_max() -> usize {
    DEFAULT_N_MAX
}

/// `c_k` from the configuration, or the tri-diagonal closed form for integer `k`.
fn resolve_c_k(system: &ControlSystem64, c_k: Option<f64>, k: f64) -> CliResult<(f64, Vec<String>)> {
    if let Some(c) = c_k {
        return Ok((c, Vec::new()));
    }
    if k.fract() != 0.0 || k < 1.0 {
        return Err(CliError::schema(format!(
            "field `params.c_k` is required when k = {k} is not a positive integer"
        )));
    }
    let est = coupling_constant_tridiagonal(system, k as u32, DEFAULT_N_MAX)?;
    let mut notes = est.warnings.clone();
    notes.push(format!("c_k = {} from the tri-diagonal supremum", est.value));
    Ok((est.value, notes))
}

fn generic_inputs(system: &ControlSystem64, p: &GenericParams) -> CliResult<(GenericBoundInputs<f64>, Vec<String>)> {
    let (c_k, notes) = resolve_c_k(system, p.c_k, p.k)?;
    Ok((
        GenericBoundInputs {
            d: p.d,
            r: p.r,
            k: p.k,
            c_k,
            l1_budget: p.l1_budget,
            snorm: p.snorm,
        },
        notes,
    ))
}

fn lambda_next(system: &ControlSystem64, p: &GenericParams) -> CliResult<f64> {
    match (p.lambda_next, p.order) {
        (Some(l), None) => Ok(l),
        (None, Some(n)) => Ok(system.spectrum.eigenvalue(n + 1)?),
        _ => Err(CliError::schema("exactly one of `params.lambda_next` and `params.N` is required")),
    }
}

fn bound(config: &LoadedConfig) -> CliResult<ScenarioRun> {
    let p: BoundParams = config.params()?;
    let system = load_system(config)?;
    let report = match &p {
        BoundParams::CouplingConstant { k, n_max } => {
            let est = coupling_constant_tridiagonal(&system, *k, *n_max)?;
            let mut warnings = est.warnings.clone();
            if est.kind == EstimateKind::TruncationNumeric {
                warnings.push(format!("supremum over n ≤ {} only", est.truncation_order.unwrap_or(0)));
            }
            BoundReport::from_value(
                "coupling-constant-tridiagonal",
                inputs([
                    ("k", f64::from(*k)),
                    ("n_max", *n_max as f64),
                    ("argmax", est.argmax.unwrap_or(0) as f64),
                    ("exact_supremum", f64::from(u8::from(est.kind == EstimateKind::ExactSupremum))),
                ]),
                est.value,
                "sup_n |b_{n,n+1}| ((lambda_{n+1}/lambda_n)^k - 1)",
            )
            .with_warnings(warnings)
        }
        BoundParams::CouplingConstantNumeric { k, order, channel } => {
            let g = build_galerkin(&system, *order)?;
            let est = coupling_constant_numeric(&g, *k, *channel)?;
            BoundReport::from_value(
                "coupling-constant-numeric",
                inputs([("k", *k), ("N", *order as f64), ("channel", *channel as f64)]),
                est.value,
                "max |eig| of Lambda^{-k/2} Herm(Lambda^k B_N) Lambda^{-k/2}",
            )
        }
        BoundParams::EnergyGrowth { c_k, k, l1_budget, snorm } => {
            let (c, notes) = match (c_k, k) {
                (Some(c), _) => (*c, Vec::new()),
                (None, Some(k)) => resolve_c_k(&system, None, f64::from(*k))?,
                (None, None) => return Err(CliError::schema("one of `params.c_k` and `params.k` is required")),
            };
            BoundReport::from_value(
                "energy-growth",
                inputs([("c_k", c), ("K", *l1_budget), ("snorm", *snorm)]),
                energy_growth_bound(c, *l1_budget, *snorm)?,
                "exp(c_k K) * |psi0|_{k/2}",
            )
            .with_warnings(notes)
        }
        BoundParams::Tail(gp) | BoundParams::GalerkinError(gp) => {
            let (gi, notes) = generic_inputs(&system, gp)?;
            let lam = lambda_next(&system, gp)?;
            let tail = matches!(p, BoundParams::Tail(_));
            let value = if tail {
                tail_coupling_bound(&gi, lam)?
            } else {
                galerkin_error_bound(&gi, lam)?
            };
            let (name, anchor) = if tail {
                ("tail-coupling", "d lambda_{N+1}^{(r-k)/2} exp(c_k K) |psi0|_{k/2}")
            } else {
                (
                    "galerkin-error",
                    "lambda_{N+1}^{-k/2} exp(c_k K) |psi0|_{k/2} + K d lambda_{N+1}^{(r-k)/2} exp(c_k K) |psi0|_{k/2}",
                )
            };
            BoundReport::from_value(
                name,
                inputs([
                    ("d", gi.d),
                    ("r", gi.r),
                    ("k", gi.k),
                    ("c_k", gi.c_k),
                    ("K", gi.l1_budget),
                    ("snorm", gi.snorm),
                    ("lambda_next", lam),
                ]),
                value,
                anchor,
            )
            .with_warnings(notes)
        }
        BoundParams::Transition { n, l, l1_budget } => {
            let ln = TridiagonalBounds::new(&system)?.transition(*n, *l, *l1_budget)?;
            BoundReport::from_ln(
                "transition",
                inputs([("n", *n as f64), ("l", *l as f64), ("K", *l1_budget)]),
                ln,
                "base^{l-n} K^{l-n} prod_{j=l+1}^{2l-n} L(j) / (l-n)!",
            )
        }
        BoundParams::Projection { n, order, l1_budget } => {
            let ln = TridiagonalBounds::new(&system)?.projection(*n, *order, *l1_budget)?;
            BoundReport::from_ln(
                "tridiagonal-projection-error",
                inputs([("n", *n as f64), ("N", *order as f64), ("K", *l1_budget)]),
                ln,
                "max(model closed form, base^{N-n}/(N-n)! L(N+1) prod_{j=N+1}^{2N-n} L(j) K^{N-n+1})",
            )
        }
    };
    let mut outputs = Outputs::new();
    outputs.json("bound.json", &report);
    let shown = report
        .value
        .map(|v| v.to_string())
        .unwrap_or_else(|| format!("10^{}", report.log10_value.unwrap_or(f64::NEG_INFINITY)));
    Ok(ScenarioRun {
        outputs,
        summary: vec![format!("{} = {shown}", report.name)],
    })
}

// ----------------------------------------------------------------- min-dim

#[derive(Debug, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
enum MinDimParams {
    Tridiagonal {
        #[serde(default = "one")]
        n: usize,
        #[serde(rename = "K")]
        l1_budget: f64,
        epsilon: f64,
        #[serde(default = "default_tri_cap")]
        n_cap: usize,
    },
    Generic {
        #[serde(default = "one_f")]
        d: f64,
        #[serde(default)]
        r: f64,
        k: f64,
        #[serde(default)]
        c_k: Option<f64>,
        #[serde(rename = "K")]
        l1_budget: f64,
        #[serde(default = "one_f")]
        snorm: f64,
        epsilon: f64,
        #[serde(default = "default_generic_cap")]
        n_cap: usize,
    },
}

fn default_tri_cap() -> usize {
    100_000
}

fn default_generic_cap() -> usize {
    1_000_000_000_000
}

#[derive(Serialize)]
struct Evaluated {
    #[serde(rename = "N")]
    order: usize,
    log10_bound: f64,
    bound: Option<f64>,
}

fn evaluated(order: usize, ln: f64) -> Evaluated {
    let r = BoundReport::from_ln("", Default::default(), ln, "");
    Evaluated {
        order,
        log10_bound: r.log10_value.unwrap_or(f64::NEG_INFINITY),
        bound: r.value,
    }
}

fn min_dim(config: &LoadedConfig) -> CliResult<ScenarioRun> {
    let p: MinDimParams = config.params()?;
    let system = load_system(config)?;
    let (doc, summary) = match p {
        MinDimParams::Tridiagonal {
            n,
            l1_budget,
            epsilon,
            n_cap,
        } => {
            let res = min_galerkin_dim_tridiagonal(&system, n, l1_budget, epsilon, n_cap)?;
            let summary = match res.order {
                Some(o) => format!("smallest N with projection bound < {epsilon}: {o}"),
                None => format!("no N ≤ {n_cap} has projection bound < {epsilon}"),
            };
            let doc = json!({
                "method": "tridiagonal",
                "inputs": {"n": n, "K": l1_budget, "epsilon": epsilon, "n_cap": n_cap},
                "satisfied": res.order.is_some(),
                "N": res.order,
                "at_N": res.order.zip(res.ln_bound).map(|(o, l)| evaluated(o, l)),
                "previous": res.previous.map(|(o, l)| evaluated(o, l)),
                "tail_monotone": res.tail_monotone,
            });
            (doc, summary)
        }
        MinDimParams::Generic {
            d,
            r,
            k,
            c_k,
            l1_budget,
            snorm,
            epsilon,
            n_cap,
        } => {
            let (c_k, notes) = resolve_c_k(&system, c_k, k)?;
            let gi = GenericBoundInputs {
                d,
                r,
                k,
                c_k,
                l1_budget,
                snorm,
            };
            let res = min_galerkin_dim(&system, &gi, epsilon, n_cap)?;
            let ln_thr = res.ln_threshold();
            let summary = match res {
                MinDim::Found { n, .. } => format!("smallest N with lambda_(N+1) above threshold: {n}"),
                MinDim::Unsat { n_cap, .. } => format!("no N ≤ {n_cap} clears the threshold"),
            };
            let doc = json!({
                "method": "generic",
                "inputs": {"d": d, "r": r, "k": k, "c_k": c_k, "K": l1_budget, "snorm": snorm, "epsilon": epsilon, "n_cap": n_cap},
                "satisfied": res.order().is_some(),
                "N": res.order(),
                "threshold_lambda": ln_thr.exp(),
                "threshold_log10_lambda": ln_thr / std::f64::consts::LN_10,
                "notes": notes,
            });
            (doc, summary)
        }
    };
    let mut outputs = Outputs::new();
    outputs.json("min-dim.json", &doc);
    Ok(ScenarioRun {
        outputs,
        summary: vec![summary],
    })
}

// ---------------------------------------------------------------- lyapunov

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LyapunovParams {
    #[serde(rename = "N", default = "default_lyap_n")]
    order: usize,
    #[serde(default = "default_target")]
    target: usize,
    #[serde(rename = "T", default = "default_horizon")]
    horizon: f64,
    #[serde(default = "default_sample_dt")]
    sample_dt: f64,
    #[serde(default = "one_f")]
    gain: f64,
    #[serde(default = "yes")]
    safeguard: bool,
    #[serde(default = "default_backtracks")]
    max_backtracks: usize,
    #[serde(default = "default_lyap_initial")]
    initial: InitialSpec,
    #[serde(default = "default_margin")]
    margin: f64,
}

fn default_lyap_n() -> usize {
    20
}
fn default_target() -> usize {
    2
}
fn default_horizon() -> f64 {
    120.0
}
fn default_sample_dt() -> f64 {
    1e-2
}
fn yes() -> bool {
    true
}
fn default_backtracks() -> usize {
    60
}
fn default_lyap_initial() -> InitialSpec {
    InitialSpec::Tilted(1e-3)
}
fn default_margin() -> f64 {
    1e-4
}

fn lyapunov(config: &LoadedConfig) -> CliResult<ScenarioRun> {
    let p: LyapunovParams = config.params()?;
    let system = load_system(config)?;
    let g = build_galerkin(&system, p.order)?;
    let psi0 = p.initial.build(p.order)?;
    let cfg = LyapunovConfig {
        target: p.target,
        horizon: p.horizon,
        sample_dt: p.sample_dt,
        gain: p.gain,
        descent_safeguard: p.safeguard,
        max_backtracks: p.max_backtracks,
    };
    let run = synthesize(&g, &psi0, &cfg)?;
    let l1 = run.control.l1_norm();
    let max_increase = run.v_trace.windows(2).map(|w| w[1].1 - w[0].1).fold(0.0f64, f64::max);

    let mut outputs = Outputs::new();
    outputs.json("control.json", &ControlSpec::of_control(&run.control));
    outputs.add("v_trace.csv", csv_bytes(|out| run.write_v_trace_csv(out))?);
    let mut summary = vec![format!(
        "final fidelity {} with control L1 norm {l1}",
        run.final_fidelity
    )];
    let certificate = if system.is_tridiagonal() && system.channels() == 1 {
        let cert = certify_infinite_dim(&run, &system, p.order, p.margin)?;
        let (status, reason) = match &cert.status {
            CertificateStatus::Certified => ("certified", None),
            CertificateStatus::Unavailable(why) => ("unavailable", Some(why.clone())),
        };
        summary.push(format!("infinite-dimensional certificate: {status}"));
        json!({
            "status": status,
            "reason": reason,
            "N": cert.order,
            "K": cert.l1_norm,
            "margin": p.margin,
            "error_bound": cert.error_bound,
            "final_amplitude": cert.final_amplitude,
            "final_fidelity": cert.final_fidelity,
            "certified_amplitude": cert.certified_amplitude,
            "certified_fidelity": cert.certified_fidelity,
            "report": cert.report,
        })
    } else {
        summary.push("infinite-dimensional certificate: unavailable (system is not tri-diagonal)".into());
        json!({"status": "unavailable", "reason": "system is not tri-diagonal with one channel"})
    };
    outputs.json("certificate.json", &certificate);
    outputs.json(
        "lyapunov.json",
        &json!({
            "N": p.order,
            "target": p.target,
            "T": p.horizon,
            "sample_dt": p.sample_dt,
            "gain": p.gain,
            "safeguard": p.safeguard,
            "segments": run.control.segments().len(),
            "l1_norm": l1,
            "initial_V": run.v_trace[0].1,
            "final_V": run.v_trace.last().map(|x| x.1),
            "final_fidelity": run.final_fidelity,
            "max_V_increase": max_increase,
            "descent_constant": run.descent_constant,
            "backtracks": run.backtracks,
            "stagnation": run.stagnation,
            "first_feedback": run.feedback.first(),
            "final_state": coefficients(&run.final_state),
        }),
    );
    Ok(ScenarioRun { outputs, summary })
}

// ------------------------------------------------------------------- chain

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainParams {
    #[serde(rename = "N")]
    order: usize,
    #[serde(default = "one")]
    channel: usize,
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default)]
    gap_tol: Option<f64>,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn chain(config: &LoadedConfig) -> CliResult<ScenarioRun> {
    let p: ChainParams = config.params()?;
    let system = load_system(config)?;
    let g = build_galerkin(&system, p.order)?;
    let edges = coupling_graph(&g, p.channel, p.tol)?;
    let gap_tol = p.gap_tol.unwrap_or(DEFAULT_GAP_REL * g.eigenvalues()[p.order - 1]);
    let report = nondegeneracy_check(g.eigenvalues(), &edges, p.order, gap_tol)?;
    let summary = format!(
        "N = {}: connected = {}, non-degenerate = {} ({} gap collisions)",
        p.order,
        report.connected,
        report.non_degenerate,
        report.degenerate_collisions.len()
    );
    let mut outputs = Outputs::new();
    outputs.json(
        "chain.json",
        &json!({"channel": p.channel, "tol": p.tol, "gap_tol": gap_tol, "report": report}),
    );
    Ok(ScenarioRun {
        outputs,
        summary: vec![summary],
    })
}

// ---------------------------------------------------------- oracle-compare

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleParams {
    #[serde(rename = "N")]
    order: usize,
    control: Value,
    #[serde(default)]
    initial: InitialSpec,
    #[serde(default)]
    dt: Option<f64>,
}

fn oracle_compare(config: &LoadedConfig) -> CliResult<ScenarioRun> {
    let p: OracleParams = config.params()?;
    let system = load_system(config)?;
    let control = load_control(config, &p.control, "params.control")?;
    let g = build_galerkin(&system, p.order)?;
    let psi0 = p.initial.build(p.order)?;
    let dt = p.dt.unwrap_or_else(|| default_oracle_step(&control));
    let exact = propagate(&g, &control, &psi0, None)?;
    let oracle = propagate_oracle(&g, &control, &psi0, dt)?;
    let distance = exact.final_state.distance(&oracle);
    let mut outputs = Outputs::new();
    outputs.json(
        "oracle.json",
        &json!({
            "N": p.order,
            "dt": dt,
            "t_final": control.total_duration(),
            "l1_norm": control.l1_norm(),
            "distance": distance,
            "norm_exponential": exact.final_state.norm(),
            "norm_oracle": oracle.norm(),
            "max_norm_drift": exact.max_norm_drift,
        }),
    );
    Ok(ScenarioRun {
        outputs,
        summary: vec![format!("|exponential - RK4(dt = {dt})| = {distance:e}")],
    })
}
