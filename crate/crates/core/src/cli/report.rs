use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ModuliSpec, OutputSpec, SpaceSpec, StartSpec};
use super::{write_atomic, CliError, Outcome, Overrides, RunArtifacts};
use crate::iteration::{check_equivalence, mann_iterate, EquivalenceReport};
use crate::moduli::{
    check_lemma1_ii, compute_dc, estimate_beta_star, estimate_delta, estimate_rho, hilbert_delta, hilbert_rho,
    lindenstrauss_check, verify_alpha, AlphaCheck, DcBreakdown, ModulusEstimate,
};
use crate::operators::StrictnessReport;
use crate::rates::{certify_instance, CertificateStatus, CertifyOptions, RateParams, RateVariant};
use crate::rng;
use crate::spaces::{Space, Vector};
use crate::validation::{ValidationReport, DEFAULT_TOLERANCE};

/// Slack for comparing sampled estimates against declared bounds.
const BOUND_SLACK: f64 = 1e-9;

pub trait Named {
    fn name(&self) -> &str;
    fn output_dir(&self) -> &Path;
}

impl Named for ExperimentConfig {
    fn name(&self) -> &str {
        &self.name
    }

    fn output_dir(&self) -> &Path {
        &self.output.dir
    }
}

/// The fields of a config that the `moduli` command reads; anything else
/// in the file is ignored so one file can drive both commands.
#[derive(Clone, Debug, Deserialize)]
pub struct ModuliConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub space: SpaceSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default)]
    pub moduli: ModuliSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_name() -> String {
    "experiment".to_owned()
}

fn default_probes() -> usize {
    10_000
}

impl Named for ModuliConfig {
    fn name(&self) -> &str {
        &self.name
    }

    fn output_dir(&self) -> &Path {
        &self.output.dir
    }
}

#[derive(Serialize)]
struct CertificateRecord {
    variant: RateVariant,
    epsilon: f64,
    predicted_index: usize,
    max_residual_beyond: f64,
    pass: bool,
    status: CertificateStatus,
    witness_index: Option<usize>,
    checked_indices: Vec<usize>,
}

#[derive(Serialize)]
struct RateRecord {
    variant: RateVariant,
    params: RateParams,
    stationary_from: Option<usize>,
}

#[derive(Serialize)]
struct InstanceRecord {
    label: String,
    k: f64,
    strictness: StrictnessReport,
}

#[derive(Serialize)]
struct ScheduleRecord {
    k: f64,
    d: f64,
    bound: f64,
    first_step: f64,
}

#[derive(Serialize)]
struct RunReport {
    name: String,
    seed: u64,
    space: Space,
    declared_d_check: ValidationReport,
    dc: DcBreakdown,
    instance: InstanceRecord,
    schedule: ScheduleRecord,
    x0: Vector,
    n_max: usize,
    fejer_violation: f64,
    equivalence: EquivalenceReport,
    rates: Vec<RateRecord>,
}

fn start_point(spec: &StartSpec, space: &Space, seed: u64) -> Result<Vector, CliError> {
    match spec {
        StartSpec::Literal(c) => {
            let v = Vector::new(c.clone())?;
            space.norm(&v)?;
            Ok(v)
        }
        StartSpec::Random { random } => {
            if !(random.radius.is_finite() && random.radius > 0.0) {
                return Err(CliError::Config(format!(
                    "x0.random.radius = {} must be positive",
                    random.radius
                )));
            }
            Ok(space.random_cube_point(&mut rng::stream(seed, u64::MAX), random.radius))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Resource(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn check_eps(list: &[f64]) -> Result<(), CliError> {
    match list.iter().position(|e| !(e.is_finite() && *e > 0.0)) {
        Some(i) => Err(CliError::Config(format!(
            "eps_list[{i}] = {} must be positive",
            list[i]
        ))),
        None => Ok(()),
    }
}

fn tolerance(overrides: &Overrides) -> Result<f64, CliError> {
    match overrides.strict_tolerance {
        Some(t) if !(t.is_finite() && t >= 0.0) => {
            Err(CliError::Config(format!("--strict-tolerance {t} must be nonnegative")))
        }
        Some(t) => Ok(t),
        None => Ok(DEFAULT_TOLERANCE),
    }
}

/// Runs one experiment and writes its three files under `dir`.
pub fn run_one_experiment(cfg: &ExperimentConfig, dir: &Path, overrides: &Overrides) -> Outcome {
    let seed = overrides.seed.unwrap_or(cfg.seed);
    let tol = tolerance(overrides)?;
    check_eps(&cfg.eps_list)?;

    let space = cfg.space.build()?;
    let declared_d_check = check_lemma1_ii(&space, space.d(), cfg.moduli.lemma1_pairs.max(1), seed)?;
    let instance = match cfg.operator.build(&space, seed, tol) {
        Ok(i) => i,
        Err(crate::Error::ValidationFailed {
            what,
            max_violation,
            pairs,
        }) => {
            let summary = format!(
                "{}: {what} failed validation (max violation {max_violation:e} over {pairs} pairs)\n",
                cfg.name
            );
            let moduli_json = dir.join(&cfg.output.moduli);
            write_atomic(
                &moduli_json,
                &to_json(&serde_json::json!({
                    "name": cfg.name,
                    "seed": seed,
                    "space": space,
                    "declared_d_check": declared_d_check,
                    "operator_validation": { "what": what, "max_violation": max_violation, "pairs": pairs, "pass": false },
                }))?,
            )?;
            return Ok(RunArtifacts {
                name: cfg.name.clone(),
                trajectory_csv: None,
                certificates_json: None,
                moduli_json,
                summary,
                all_pass: false,
            });
        }
        Err(e) => return Err(e.into()),
    };
    let schedule = cfg.schedule.build(&instance)?;
    let x0 = start_point(&cfg.x0, &space, seed)?;
    let strictness = crate::operators::validate_k_strict(
        &space,
        instance.map(),
        instance.k(),
        &crate::operators::ValidationBudget {
            seed,
            tolerance: tol,
            ..Default::default()
        },
    )?;

    let trajectory = mann_iterate(&instance, &x0, &schedule, cfg.n_max)?;
    let equivalence = check_equivalence(&instance, &x0, &schedule, cfg.n_max.min(1000))?;
    let options = CertifyOptions {
        check_budget: cfg.certify.check_budget,
        extension_cap: cfg.certify.extension_cap,
        exhaustive: cfg.certify.exhaustive,
        tolerance: tol,
    };

    let mut records = Vec::new();
    let mut rates = Vec::new();
    for &variant in &cfg.rates {
        let run = certify_instance(
            &instance,
            &x0,
            &schedule,
            cfg.n_max,
            variant,
            &cfg.eps_list,
            cfg.b,
            &options,
        )?;
        rates.push(RateRecord {
            variant,
            params: run.params,
            stationary_from: run.trajectory.stationary_from(),
        });
        records.extend(run.certificates.into_iter().map(|c| CertificateRecord {
            variant,
            epsilon: c.epsilon,
            predicted_index: c.predicted_index,
            max_residual_beyond: c.max_residual_beyond,
            pass: c.pass,
            status: c.status,
            witness_index: c.witness_index,
            checked_indices: c.checked_indices,
        }));
    }

    let mut csv = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Resource(e.to_string());
    csv.write_record(["n", "residual", "fix_distance"]).map_err(csv_err)?;
    for (n, (r, f)) in trajectory
        .residuals()
        .iter()
        .zip(trajectory.fix_distances())
        .enumerate()
    {
        csv.write_record([n.to_string(), r.to_string(), f.to_string()])
            .map_err(csv_err)?;
    }
    let csv = csv.into_inner().map_err(|e| CliError::Resource(e.to_string()))?;

    let fejer_violation = trajectory.fejer_violation();
    let report = RunReport {
        name: cfg.name.clone(),
        seed,
        space: space.clone(),
        dc: compute_dc(space.c())?,
        declared_d_check,
        instance: InstanceRecord {
            label: instance.label().to_owned(),
            k: instance.k(),
            strictness,
        },
        schedule: ScheduleRecord {
            k: schedule.k(),
            d: schedule.d(),
            bound: schedule.bound(),
            first_step: schedule.step(0),
        },
        x0,
        n_max: cfg.n_max,
        fejer_violation: fejer_violation.max(0.0),
        equivalence,
        rates,
    };

    let checks_pass = report.declared_d_check.pass
        && report.instance.strictness.pass()
        && fejer_violation <= tol.max(DEFAULT_TOLERANCE)
        && equivalence.max_deviation() <= DEFAULT_TOLERANCE;
    let all_pass = checks_pass && records.iter().all(|r| r.pass);

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "{}: {} (k = {}), {} steps, t_0 = {}, bound (1-k)/d = {}",
        cfg.name,
        instance.label(),
        instance.k(),
        cfg.n_max,
        schedule.step(0),
        schedule.bound()
    );
    let _ = writeln!(
        summary,
        "  declared d = {}: {}; strictness: {}; fejer: {}; equivalence deviation {:e}",
        space.d(),
        verdict(report.declared_d_check.pass),
        verdict(report.instance.strictness.pass()),
        verdict(fejer_violation <= tol.max(DEFAULT_TOLERANCE)),
        equivalence.max_deviation()
    );
    for r in &records {
        let _ = writeln!(
            summary,
            "  {} eps={} h={} max_residual={:e} {}",
            r.variant,
            r.epsilon,
            r.predicted_index,
            r.max_residual_beyond,
            match r.status {
                CertificateStatus::Pass => "PASS",
                CertificateStatus::Fail => "FAIL",
                CertificateStatus::Inconclusive => "INCONCLUSIVE",
            }
        );
    }

    let trajectory_csv = dir.join(&cfg.output.trajectory);
    let certificates_json = dir.join(&cfg.output.certificates);
    let moduli_json = dir.join(&cfg.output.moduli);
    let certs = to_json(&records)?;
    let rep = to_json(&report)?;
    write_atomic(&trajectory_csv, &csv)?;
    write_atomic(&certificates_json, &certs)?;
    write_atomic(&moduli_json, &rep)?;

    Ok(RunArtifacts {
        name: cfg.name.clone(),
        trajectory_csv: Some(trajectory_csv),
        certificates_json: Some(certificates_json),
        moduli_json,
        summary,
        all_pass,
    })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

#[derive(Serialize)]
struct RhoRow {
    tau: f64,
    estimate: ModulusEstimate,
    declared_bound: f64,
    analytic: Option<f64>,
    within_declared: bool,
}

#[derive(Serialize)]
struct DeltaRow {
    eps: f64,
    estimate: ModulusEstimate,
    eta: f64,
    eta_below_estimate: bool,
}

#[derive(Serialize)]
struct BetaRow {
    x: Vector,
    t: f64,
    estimate: ModulusEstimate,
    bound: f64,
    within_bound: bool,
}

#[derive(Serialize)]
struct LindenstraussRow {
    tau: f64,
    value: f64,
    analytic: f64,
}

#[derive(Serialize)]
struct ModuliReport {
    name: String,
    seed: u64,
    probes: usize,
    space: Space,
    rho: Vec<RhoRow>,
    delta: Vec<DeltaRow>,
    beta_star: Vec<BetaRow>,
    dc: DcBreakdown,
    alpha: AlphaCheck,
    lindenstrauss: Option<Vec<LindenstraussRow>>,
    lemma1_ii: ValidationReport,
    pass: bool,
}

fn moduli_report(cfg: &ModuliConfig, seed: u64) -> Result<ModuliReport, CliError> {
    let space = cfg.space.build()?;
    let m = &cfg.moduli;
    let probes = cfg.probes;
    let rho = m
        .tau_grid
        .iter()
        .map(|&tau| {
            let estimate = estimate_rho(&space, tau, probes, seed)?;
            let declared_bound = space.c() * tau * tau;
            Ok(RhoRow {
                tau,
                estimate,
                declared_bound,
                analytic: space.is_hilbert().then(|| hilbert_rho(tau)),
                within_declared: estimate.value <= declared_bound + BOUND_SLACK,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let delta = m
        .eps_grid
        .iter()
        .map(|&eps| {
            let estimate = estimate_delta(&space, eps, probes, seed)?;
            let eta = space.eta().eval(eps);
            Ok(DeltaRow {
                eps,
                estimate,
                eta,
                eta_below_estimate: eta <= estimate.value + BOUND_SLACK,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let mut beta_star = Vec::new();
    for i in 0..m.beta_points {
        let x = space.random_cube_point(&mut rng::stream(seed, 1 << 32 | i as u64), 1.0);
        for &t in &m.t_grid {
            let estimate = estimate_beta_star(&space, &x, t, probes, seed)?;
            let bound = space.d() * t;
            beta_star.push(BetaRow {
                x: x.clone(),
                t,
                estimate,
                bound,
                within_bound: estimate.value <= bound + BOUND_SLACK,
            });
        }
    }
    let lindenstrauss = if space.is_hilbert() {
        Some(
            m.tau_grid
                .iter()
                .map(|&tau| {
                    Ok(LindenstraussRow {
                        tau,
                        value: lindenstrauss_check(tau, hilbert_delta, m.lindenstrauss_grid_step)?,
                        analytic: hilbert_rho(tau),
                    })
                })
                .collect::<crate::Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let lemma1_ii = check_lemma1_ii(&space, space.d(), m.lemma1_pairs.max(1), seed)?;
    let pass = lemma1_ii.pass
        && rho.iter().all(|r| r.within_declared)
        && delta.iter().all(|r| r.eta_below_estimate)
        && beta_star.iter().all(|r| r.within_bound);
    Ok(ModuliReport {
        name: cfg.name.clone(),
        seed,
        probes,
        dc: compute_dc(space.c())?,
        alpha: verify_alpha(m.alpha_grid_step)?,
        space,
        rho,
        delta,
        beta_star,
        lindenstrauss,
        lemma1_ii,
        pass,
    })
}

/// Writes the moduli report of one config under `dir`.
pub fn run_one_moduli(cfg: &ModuliConfig, dir: &Path, overrides: &Overrides) -> Outcome {
    let seed = overrides.seed.unwrap_or(cfg.seed);
    let report = moduli_report(cfg, seed)?;
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "{}: d_c({}) = {}, alpha grid max {} at t = {}",
        cfg.name, report.dc.c, report.dc.dc, report.alpha.max_value, report.alpha.argmax
    );
    let _ = writeln!(
        summary,
        "  declared d = {}: {} (max violation {:e} over {} pairs)",
        report.space.d(),
        verdict(report.lemma1_ii.pass),
        report.lemma1_ii.max_violation,
        report.lemma1_ii.pairs_checked
    );
    let path: PathBuf = dir.join(&cfg.output.moduli);
    write_atomic(&path, &to_json(&report)?)?;
    Ok(RunArtifacts {
        name: cfg.name.clone(),
        trajectory_csv: None,
        certificates_json: None,
        moduli_json: path,
        summary,
        all_pass: report.pass,
    })
}
