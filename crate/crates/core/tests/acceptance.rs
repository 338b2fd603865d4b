//! Acceptance criteria, one line per criterion:
//!
//! ```text
//! cargo test --test acceptance
//! ```

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mann_rates::cli::{exit_code, run_experiment, Overrides};
use mann_rates::iteration::{check_equivalence, mann_iterate};
use mann_rates::moduli::{
    beta_star_probe, check_lemma1_ii, compute_dc, estimate_delta, estimate_rho, hilbert_delta, hilbert_rho,
    lindenstrauss_check, verify_alpha,
};
use mann_rates::operators::{catalog, check_nonexpansive, from_nonexpansive, scaled_negation, NonexpansiveMap};
use mann_rates::operators::{PseudocontractionInstance, ValidationBudget};
use mann_rates::rates::{
    certify_instance, rate_argument, CertificateStatus, CertifyOptions, RateParams, RateVariant, ScheduleKind,
    StepSchedule,
};
use mann_rates::spaces::{pairing, Modulus, Space, Vector};

type Check = Result<(), String>;

/// Name, check and optional runtime limit.
type Criterion = (&'static str, fn() -> Check, Option<Duration>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn c1_dc() -> Check {
    let b = compute_dc(0.5).map_err(|e| e.to_string())?;
    ensure!(b.dc == 64.0, "d_c(0.5) = {}", b.dc);
    ensure!(b.k1 == 0.125 && b.k2 == 0.015625, "k1 = {}, k2 = {}", b.k1, b.k2);
    Ok(())
}

fn c2_alpha() -> Check {
    let a = verify_alpha(1e-5).map_err(|e| e.to_string())?;
    let target = std::f64::consts::SQRT_2 - 2.0;
    ensure!((a.max_value - target).abs() <= 1e-6, "max {} vs {target}", a.max_value);
    ensure!(a.argmax == 1.0, "argmax {}", a.argmax);
    Ok(())
}

fn c3_beta_star() -> Check {
    let space = Space::hilbert(10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst: f64 = 0.0;
    for i in 0..1000u64 {
        let x = Vector::new((0..10).map(|_| rng.random_range(-10.0..10.0)).collect()).unwrap();
        let t: f64 = 1.0 - rng.random::<f64>();
        for v in space.sphere_probes(i).take(100) {
            worst = worst.max((beta_star_probe(&space, &x, t, &v) - t).abs());
        }
    }
    ensure!(worst <= 1e-9, "max |probe - t| = {worst:e}");
    Ok(())
}

/// Recomputes `‖x+y‖² − ‖x‖² − 2⟨y, j(x)⟩ − d‖y‖²` at a reported witness.
fn lemma1_excess(space: &Space, d: f64, x: &Vector, y: &Vector) -> f64 {
    let n = |v: &Vector| space.norm(v).unwrap().powi(2);
    let j = space.duality_map(x).unwrap();
    n(&(x + y)) - n(x) - 2.0 * pairing(&j, y).unwrap() - d * n(y)
}

fn c4_lemma1() -> Check {
    let space = Space::lp(5, 4.0).unwrap();
    let ok = check_lemma1_ii(&space, 3.0, 100_000, 0).map_err(|e| e.to_string())?;
    ensure!(ok.pass && ok.pairs_checked == 100_000, "d = 3: {ok:?}");
    ensure!(ok.max_violation <= 1e-9, "d = 3: max violation {:e}", ok.max_violation);
    let bad = check_lemma1_ii(&space, 1.0, 100_000, 0).map_err(|e| e.to_string())?;
    ensure!(!bad.pass, "d = 1 passed");
    let w = bad.witness.ok_or("d = 1: no witness")?;
    let excess = lemma1_excess(&space, 1.0, &w.x, &w.y);
    ensure!(excess > 1e-9, "d = 1: witness excess {excess:e}");
    Ok(())
}

fn c5_lemma2() -> Check {
    let h3 = Space::hilbert(3).unwrap();
    let h2 = Space::hilbert(2).unwrap();
    let budget = ValidationBudget::default().with_pairs(100_000);
    let neg = scaled_negation(2.0, &h3).map_err(|e| e.to_string())?;
    let ball =
        from_nonexpansive(&NonexpansiveMap::ball_projection(2, 1.0), 0.5, &h2, &budget).map_err(|e| e.to_string())?;
    for inst in [&neg, &ball] {
        let t = inst.max_nonexpansive_t();
        let r = check_nonexpansive(inst.space(), &inst.averaged(t).unwrap(), &budget);
        ensure!(
            r.pairs_checked == 100_000,
            "{}: {} pairs",
            inst.label(),
            r.pairs_checked
        );
        ensure!(r.pass, "{} at t = {t}: {:?}", inst.label(), r.witness);
    }
    Ok(())
}

/// Every catalog instance with constant steps at 1/10, 1/2 and 9/10 of
/// `(1−k)/d` and a capped harmonic schedule.
fn shipped_combinations() -> Vec<(PseudocontractionInstance, StepSchedule, Vector)> {
    let mut out = Vec::new();
    for inst in catalog().unwrap() {
        let (k, d, dim) = (inst.k(), inst.space().d(), inst.space().dim());
        let bound = (1.0 - k) / d;
        let x0 = Vector::new((0..dim).map(|i| 2.0 - 1.5 * i as f64).collect()).unwrap();
        let kinds = [
            ScheduleKind::Constant { a: 0.1 * bound },
            ScheduleKind::Constant { a: 0.5 * bound },
            ScheduleKind::Constant { a: 0.9 * bound },
            ScheduleKind::HarmonicCapped {
                a: 1.0,
                cap: 0.5 * bound,
            },
        ];
        for kind in kinds {
            out.push((inst.clone(), StepSchedule::strict(kind, k, d).unwrap(), x0.clone()));
        }
    }
    out
}

fn c6_equivalence() -> Check {
    for (inst, s, x0) in shipped_combinations() {
        let r = check_equivalence(&inst, &x0, &s, 1000).map_err(|e| e.to_string())?;
        ensure!(r.steps == 1000, "{}: {} steps", inst.label(), r.steps);
        ensure!(
            r.max_deviation() <= 1e-9,
            "{}: deviation {:e}",
            inst.label(),
            r.max_deviation()
        );
    }
    Ok(())
}

fn theta_two_sided(s: &StepSchedule, n: u64) -> Check {
    let th = s.theta(n).map_err(|e| e.to_string())?;
    ensure!(s.partial_sum(th) >= n as f64, "S({th}) < {n}");
    ensure!(th == 0 || s.partial_sum(th - 1) < n as f64, "S({}) >= {n}", th - 1);
    Ok(())
}

fn c7_rates() -> Check {
    let h = Space::hilbert(1).unwrap();
    let t = scaled_negation(2.0, &h).map_err(|e| e.to_string())?;
    ensure!((t.k() - 1.0 / 3.0).abs() < 1e-15, "k = {}", t.k());
    let s = StepSchedule::strict(ScheduleKind::Constant { a: 1.0 / 6.0 }, t.k(), 1.0).unwrap();
    let x0 = Vector::new(vec![1.0]).unwrap();
    let eps = [0.5, 0.1, 0.01];

    ensure!(s.theta(32) == Ok(383), "theta(32) = {:?}", s.theta(32));
    theta_two_sided(&s, 32)?;
    let traj = mann_iterate(&t, &x0, &s, 400).map_err(|e| e.to_string())?;
    let r383 = traj.residuals()[383];
    ensure!(r383 == 3.0 * 2f64.powi(-383) && r383 <= 1.0, "residual(383) = {r383:e}");

    let params = RateParams {
        b: 1.0,
        k: t.k(),
        d: 1.0,
        eta: Some(Modulus::Hilbert),
    };
    ensure!(
        rate_argument(RateVariant::H4, &params, 1.0) == Ok(18),
        "h4 argument at eps = 1"
    );
    ensure!(s.theta(18) == Ok(215), "theta(18) = {:?}", s.theta(18));
    for variant in [RateVariant::H3, RateVariant::H4] {
        let run = certify_instance(&t, &x0, &s, 2000, variant, &eps, Some(1.0), &CertifyOptions::default())
            .map_err(|e| e.to_string())?;
        for (c, &e) in run.certificates.iter().zip(&eps) {
            ensure!(
                c.status == CertificateStatus::Pass,
                "{variant} eps = {e}: {:?}",
                c.status
            );
            ensure!(c.max_residual_beyond <= e, "{variant} eps = {e}");
            let n = rate_argument(variant, &params, e).map_err(|e| e.to_string())?;
            theta_two_sided(&s, n)?;
            ensure!(
                s.theta(n) == Ok(c.predicted_index),
                "{variant} eps = {e}: index mismatch"
            );
        }
    }
    Ok(())
}

fn c8_fejer() -> Check {
    for (inst, s, x0) in shipped_combinations() {
        let traj = mann_iterate(&inst, &x0, &s, 10_000).map_err(|e| e.to_string())?;
        let v = traj.fejer_violation();
        ensure!(v <= 1e-9, "{}: fejer violation {v:e}", inst.label());
    }
    // Trajectories written by the shipped run configs.
    let dir = tempfile::tempdir().unwrap();
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for name in ["minimal.json", "batch.json", "lp4_custom.json"] {
        let out = dir.path().join(name);
        let overrides = Overrides {
            out_dir: Some(out.clone()),
            ..Overrides::default()
        };
        let result = run_experiment(&configs.join(name), &overrides);
        ensure!(exit_code(&result) == 0, "{name}: exit {}", exit_code(&result));
        for artifacts in result.unwrap() {
            let csv = artifacts.unwrap().trajectory_csv.unwrap();
            let mut prev = f64::INFINITY;
            for line in fs::read_to_string(&csv).unwrap().lines().skip(1) {
                let f: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
                ensure!(f <= prev + 1e-9, "{}: {f} after {prev}", csv.display());
                prev = f;
            }
        }
    }
    Ok(())
}

fn c9_lindenstrauss() -> Check {
    let space = Space::hilbert(3).unwrap();
    for tau in [0.1, 0.5, 1.0] {
        let est = estimate_rho(&space, tau, 10_000, 0).map_err(|e| e.to_string())?.value;
        let dual = lindenstrauss_check(tau, hilbert_delta, 1e-4).map_err(|e| e.to_string())?;
        let exact = hilbert_rho(tau);
        ensure!((est - dual).abs() <= 5e-3, "tau = {tau}: {est} vs {dual}");
        ensure!(
            (est - exact).abs() <= 5e-3 && (dual - exact).abs() <= 5e-3,
            "tau = {tau}: exact {exact}"
        );
    }
    Ok(())
}

fn c10_eta() -> Check {
    let space = Space::hilbert(3).unwrap();
    for i in 1..=20 {
        let eps = i as f64 / 10.0;
        let est = estimate_delta(&space, eps, 10_000, 0).map_err(|e| e.to_string())?.value;
        let eta = eps * eps / 8.0;
        ensure!(est >= eta - 1e-9, "eps = {eps}: delta estimate {est} < {eta}");
    }
    Ok(())
}

fn c11_determinism() -> Check {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for name in ["minimal.json", "batch.json"] {
        for d in &dirs {
            let overrides = Overrides {
                out_dir: Some(d.path().join(name)),
                seed: Some(5),
                ..Overrides::default()
            };
            let result = run_experiment(&configs.join(name), &overrides);
            ensure!(exit_code(&result) == 0, "{name}: exit {}", exit_code(&result));
        }
    }
    let mut files = 0;
    let mut stack = vec![dirs[0].path().to_path_buf()];
    while let Some(p) = stack.pop() {
        for entry in fs::read_dir(&p).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let twin = dirs[1].path().join(path.strip_prefix(dirs[0].path()).unwrap());
            ensure!(
                fs::read(&path).unwrap() == fs::read(&twin).unwrap(),
                "{} differs",
                twin.display()
            );
            files += 1;
        }
    }
    ensure!(files == 12, "{files} files compared");
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("d_c(0.5) = 64", c1_dc, Some(Duration::from_millis(1))),
        ("alpha maximum at t = 1", c2_alpha, Some(Duration::from_secs(1))),
        (
            "Hilbert beta* probes equal t",
            c3_beta_star,
            Some(Duration::from_secs(5)),
        ),
        (
            "l4^5 declared d = 3 holds, d = 1 has a witness",
            c4_lemma1,
            Some(Duration::from_secs(10)),
        ),
        (
            "averaged maps nonexpansive at (1-k)/d",
            c5_lemma2,
            Some(Duration::from_secs(10)),
        ),
        (
            "recurrence equivalence over 1000 steps",
            c6_equivalence,
            Some(Duration::from_secs(5)),
        ),
        ("h3/h4 certificates and theta(32) = 383", c7_rates, None),
        ("Fejer monotone trajectories", c8_fejer, None),
        (
            "Lindenstrauss consistency",
            c9_lindenstrauss,
            Some(Duration::from_secs(10)),
        ),
        ("eta(eps) = eps^2/8 below sampled delta", c10_eta, None),
        ("byte-identical reruns", c11_determinism, None),
    ];
    let suite = Instant::now();
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(()), Some(l)) if elapsed > *l => Err(format!("took {elapsed:?}, limit {l:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(()) => println!("criterion {:>2} PASS  {name} ({elapsed:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({elapsed:.2?}): {why}", i + 1);
            }
        }
    }
    let total = suite.elapsed();
    if total > Duration::from_secs(30) {
        failed += 1;
        println!("suite FAIL  total {total:.2?} exceeds 30s");
    } else {
        println!("suite total {total:.2?}");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
