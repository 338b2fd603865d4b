//! Step schedules, rates of divergence and rates of asymptotic regularity.
//!
//! A rate of divergence `θ` for a series of nonnegative terms is an index
//! function with `∑_{n=0}^{θ(N)} a_n ≥ N`. The schedules here compute the
//! least such index from partial sums. Two series are attached to a step
//! schedule `(t_n)`:
//!
//! * nonexpansive: `a_n = t_n(1 − t_n)`, for iterations of nonexpansive maps;
//! * strict: `a_n = t_n((1−k)/d − t_n)`, for `k`-strict pseudocontractions.
//!
//! A rate of asymptotic regularity `h` promises `‖x_n − Tx_n‖ ≤ ε` for every
//! `n ≥ h(ε)`; [`certify`] checks that promise along a computed trajectory.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iteration::{mann_iterate, mann_iterate_map, reparameterize, Trajectory};
use crate::operators::PseudocontractionInstance;
use crate::spaces::{Modulus, Vector};
use crate::validation::DEFAULT_TOLERANCE;

/// Guard for partial-sum scans on series that may not diverge.
pub const DEFAULT_SCAN_CAP: u64 = 1_000_000_000;

type GeneratorFn = dyn Fn(usize) -> f64 + Send + Sync;

/// A step sequence given by an arbitrary function of the index. Its steps
/// are range-checked lazily, one at a time.
#[derive(Clone)]
pub struct Generator {
    f: Arc<GeneratorFn>,
    label: String,
}

impl Generator {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        Generator {
            f: Arc::new(f),
            label: label.into(),
        }
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Generator({})", self.label)
    }
}

#[derive(Clone, Debug)]
pub enum ScheduleKind {
    /// `t_n = a`.
    Constant {
        a: f64,
    },
    /// `t_n = min(cap, a/(n+1))`.
    HarmonicCapped {
        a: f64,
        cap: f64,
    },
    Generator(Generator),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Nonexpansive,
    Strict,
}

impl SeriesKind {
    fn name(self) -> &'static str {
        match self {
            SeriesKind::Nonexpansive => "nonexpansive",
            SeriesKind::Strict => "strict",
        }
    }
}

/// A step sequence `(t_n)` tagged with `(k, d)` and the series it feeds.
///
/// Steps are `scale · base_n`, where `base_n` comes from the kind; the scale
/// is 1 except after [`reparameterize`].
#[derive(Clone, Debug)]
pub struct StepSchedule {
    kind: ScheduleKind,
    scale: f64,
    k: f64,
    d: f64,
    series: SeriesKind,
    scan_cap: u64,
}

impl StepSchedule {
    /// A schedule for a `k`-strict pseudocontraction in a space with
    /// constant `d`: every step must lie in `(0, (1−k)/d)`.
    pub fn strict(kind: ScheduleKind, k: f64, d: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::InvalidParameter {
                name: "k",
                value: k,
                reason: "must lie in [0, 1)",
            });
        }
        if !(d.is_finite() && d >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "d",
                value: d,
                reason: "must be >= 1",
            });
        }
        Self::build(kind, 1.0, k, d, SeriesKind::Strict)
    }

    /// A schedule for a nonexpansive map: every step must lie in `(0, 1)`.
    pub fn nonexpansive(kind: ScheduleKind) -> Result<Self> {
        Self::build(kind, 1.0, 0.0, 1.0, SeriesKind::Nonexpansive)
    }

    pub(crate) fn build(kind: ScheduleKind, scale: f64, k: f64, d: f64, series: SeriesKind) -> Result<Self> {
        let s = StepSchedule {
            kind,
            scale,
            k,
            d,
            series,
            scan_cap: DEFAULT_SCAN_CAP,
        };
        s.validate_eager()?;
        Ok(s)
    }

    pub fn with_scan_cap(mut self, cap: u64) -> Self {
        self.scan_cap = cap;
        self
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn series(&self) -> SeriesKind {
        self.series
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, ScheduleKind::Constant { .. })
    }

    /// Exclusive upper bound on the steps: `(1−k)/d` or 1.
    pub fn bound(&self) -> f64 {
        match self.series {
            SeriesKind::Strict => (1.0 - self.k) / self.d,
            SeriesKind::Nonexpansive => 1.0,
        }
    }

    /// Largest step, or `None` for generators.
    fn max_step(&self) -> Option<f64> {
        match self.kind {
            ScheduleKind::Constant { a } => Some(a),
            ScheduleKind::HarmonicCapped { a, cap } => Some(a.min(cap)),
            ScheduleKind::Generator(_) => None,
        }
    }

    fn validate_eager(&self) -> Result<()> {
        if let ScheduleKind::HarmonicCapped { a, cap } = self.kind {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "a",
                    value: a,
                    reason: "harmonic numerator must be positive",
                });
            }
            if !(cap > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "cap",
                    value: cap,
                    reason: "step cap must be positive",
                });
            }
        }
        if let Some(raw) = self.max_step() {
            let t = self.scale * raw;
            if !(t > 0.0 && t < self.bound()) {
                return Err(Error::StepOutOfRange {
                    index: 0,
                    step: t,
                    bound: self.bound(),
                });
            }
        }
        Ok(())
    }

    /// `t_n`, unchecked.
    pub fn step(&self, n: usize) -> f64 {
        let base = match &self.kind {
            ScheduleKind::Constant { a } => *a,
            ScheduleKind::HarmonicCapped { a, cap } => cap.min(a / (n as f64 + 1.0)),
            ScheduleKind::Generator(g) => (g.f)(n),
        };
        self.scale * base
    }

    /// `t_n`, rejected when outside `(0, bound)`.
    pub fn checked_step(&self, n: usize) -> Result<f64> {
        let t = self.step(n);
        if t > 0.0 && t < self.bound() {
            Ok(t)
        } else {
            Err(Error::StepOutOfRange {
                index: n,
                step: t,
                bound: self.bound(),
            })
        }
    }

    /// Series term `a_n`.
    pub fn term(&self, n: usize) -> f64 {
        let t = self.step(n);
        t * (self.bound() - t)
    }

    /// `∑_{i=0}^{n} a_i`: closed form for constant steps, otherwise a
    /// left-to-right compensated (Neumaier) sum.
    pub fn partial_sum(&self, n: usize) -> f64 {
        if self.is_constant() {
            return (n as f64 + 1.0) * self.term(0);
        }
        let mut acc = NeumaierSum::default();
        for i in 0..=n {
            acc.add(self.term(i));
        }
        acc.value()
    }

    /// Least `n` with `partial_sum(n) ≥ target`; `θ(0) = 0`.
    pub fn theta(&self, target: u64) -> Result<usize> {
        if target == 0 {
            return Ok(0);
        }
        let goal = target as f64;
        if self.is_constant() {
            let term = self.term(0);
            let guess = (goal / term).ceil() - 1.0;
            if !(guess.is_finite() && guess < 2f64.powi(53)) {
                return Err(Error::IndexOverflow { value: guess });
            }
            let mut n = guess.max(0.0) as usize;
            while self.partial_sum(n) < goal {
                n += 1;
            }
            while n > 0 && self.partial_sum(n - 1) >= goal {
                n -= 1;
            }
            return Ok(n);
        }
        let mut acc = NeumaierSum::default();
        for i in 0..self.scan_cap {
            let i = i as usize;
            self.checked_step(i)?;
            acc.add(self.term(i));
            if acc.value() >= goal {
                return Ok(i);
            }
        }
        Err(Error::SeriesNotDivergent {
            target,
            cap: self.scan_cap,
        })
    }
}

#[derive(Default)]
struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// The four rates of asymptotic regularity.
///
/// * `H1`: nonexpansive maps in a uniformly convex space with modulus `η`.
/// * `H2`: `H1` specialised to Hilbert spaces.
/// * `H3`: `k`-strict pseudocontractions in a 2-uniformly smooth, uniformly
///   convex space with constant `d`.
/// * `H4`: `H3` specialised to Hilbert spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateVariant {
    H1,
    H2,
    H3,
    H4,
}

impl RateVariant {
    pub fn name(self) -> &'static str {
        match self {
            RateVariant::H1 => "h1",
            RateVariant::H2 => "h2",
            RateVariant::H3 => "h3",
            RateVariant::H4 => "h4",
        }
    }

    pub fn series(self) -> SeriesKind {
        match self {
            RateVariant::H1 | RateVariant::H2 => SeriesKind::Nonexpansive,
            RateVariant::H3 | RateVariant::H4 => SeriesKind::Strict,
        }
    }

    fn needs_modulus(self) -> bool {
        matches!(self, RateVariant::H1 | RateVariant::H3)
    }
}

impl fmt::Display for RateVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Inputs shared by the rate formulas. `b` bounds the distance from the
/// starting point to a fixed point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub b: f64,
    pub k: f64,
    pub d: f64,
    pub eta: Option<Modulus>,
}

/// The argument handed to `θ`, i.e. the ceiling inside each rate.
pub fn rate_argument(variant: RateVariant, params: &RateParams, eps: f64) -> Result<u64> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            value: eps,
            reason: "must be positive",
        });
    }
    if !(params.b.is_finite() && params.b > 0.0) {
        return Err(Error::InvalidParameter {
            name: "b",
            value: params.b,
            reason: "must be positive",
        });
    }
    let RateParams { b, k, d, eta } = *params;
    let eta = match (variant.needs_modulus(), eta) {
        (true, None) => {
            return Err(Error::MissingModulus {
                variant: variant.name(),
            })
        }
        (_, e) => e,
    };
    let inner = match variant {
        RateVariant::H1 => {
            let eta = eta.expect("checked above");
            3.0 * (b + 1.0) / (2.0 * eps * eta.eval(eps / (b + 1.0)))
        }
        RateVariant::H2 => 4.0 * (b + 1.0) / (eps * eps),
        RateVariant::H3 => {
            let eta = eta.expect("checked above");
            let slack = 1.0 - k;
            3.0 * (b + 1.0) * d / (2.0 * eps * slack * eta.eval(eps * slack / ((b + 1.0) * d)))
        }
        RateVariant::H4 => 4.0 * (b + 1.0) / ((1.0 - k).powi(2) * eps * eps),
    };
    let up = inner.ceil();
    if !(up.is_finite() && up >= 0.0 && up < u64::MAX as f64) {
        return Err(Error::IndexOverflow { value: inner });
    }
    Ok(up as u64)
}

/// `h(ε) = θ(⌈…⌉)` for the chosen variant. `theta` must carry the series
/// the variant is stated for.
pub fn rate_h(variant: RateVariant, params: &RateParams, theta: &StepSchedule, eps: f64) -> Result<usize> {
    if theta.series() != variant.series() {
        return Err(Error::SeriesMismatch {
            variant: variant.name(),
            expected: variant.series().name(),
            found: theta.series().name(),
        });
    }
    theta.theta(rate_argument(variant, params, eps)?)
}

/// `b = ‖x₀ − p‖` rounded up to the next representable value.
pub fn default_b(x0: &Vector, fixed_point: &Vector, norm: impl Fn(&Vector) -> f64) -> f64 {
    let b = norm(&(x0 - fixed_point)).next_up();
    // a zero distance still needs a positive bound
    b.max(f64::MIN_POSITIVE)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    Pass,
    Fail,
    /// Some checked index lay beyond what the trajectory could reach.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCertificate {
    pub epsilon: f64,
    pub predicted_index: usize,
    pub checked_indices: Vec<usize>,
    pub max_residual_beyond: f64,
    /// First checked index whose residual exceeded `ε + tolerance`.
    pub witness_index: Option<usize>,
    pub status: CertificateStatus,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// Geometrically spaced indices checked in `[h, 4h]`.
    pub check_budget: usize,
    /// Furthest index the trajectory may be extended to.
    pub extension_cap: usize,
    /// Also check every stored index in `[h, end]`.
    pub exhaustive: bool,
    pub tolerance: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            check_budget: 16,
            extension_cap: 10_000_000,
            exhaustive: false,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

fn check_indices(h: usize, end: usize, budget: usize) -> Vec<usize> {
    let mut idx = vec![h];
    let lo = h.max(1) as f64;
    let hi = 4.0 * lo;
    for j in 0..budget {
        let f = if budget > 1 {
            j as f64 / (budget - 1) as f64
        } else {
            1.0
        };
        idx.push((lo * (hi / lo).powf(f)).round() as usize);
    }
    if end >= h {
        idx.push(end);
    }
    idx.sort_unstable();
    idx.dedup();
    idx
}

/// Checks `rate` against the residuals of `trajectory` for every `ε`,
/// extending the trajectory on demand up to `options.extension_cap`.
pub fn certify<R>(
    trajectory: &mut Trajectory,
    rate: R,
    eps_list: &[f64],
    options: &CertifyOptions,
) -> Result<Vec<RateCertificate>>
where
    R: Fn(f64) -> Result<usize>,
{
    let end = trajectory.last_index();
    let plans = eps_list
        .iter()
        .map(|&eps| {
            let h = rate(eps)?;
            Ok((eps, h, check_indices(h, end, options.check_budget)))
        })
        .collect::<Result<Vec<_>>>()?;
    let needed = plans
        .iter()
        .filter_map(|(_, _, idx)| idx.last().copied())
        .max()
        .unwrap_or(0);
    trajectory.extend_to(needed.min(options.extension_cap))?;

    let traj = &*trajectory;
    Ok(plans
        .into_par_iter()
        .map(|(eps, h, mut idx)| {
            if options.exhaustive {
                idx.extend(h..=traj.last_index());
                idx.sort_unstable();
                idx.dedup();
            }
            let mut max_residual = f64::NEG_INFINITY;
            let mut witness = None;
            let mut reachable = true;
            for &n in &idx {
                match traj.residual_at(n) {
                    Some(r) => {
                        max_residual = max_residual.max(r);
                        if witness.is_none() && !(r <= eps + options.tolerance) {
                            witness = Some(n);
                        }
                    }
                    None => reachable = false,
                }
            }
            let status = match (witness, reachable) {
                (Some(_), _) => CertificateStatus::Fail,
                (None, false) => CertificateStatus::Inconclusive,
                (None, true) => CertificateStatus::Pass,
            };
            RateCertificate {
                epsilon: eps,
                predicted_index: h,
                checked_indices: idx,
                max_residual_beyond: max_residual,
                witness_index: witness,
                status,
                pass: status == CertificateStatus::Pass,
            }
        })
        .collect())
}

/// Trajectory and certificates for one rate variant on one instance.
#[derive(Debug)]
pub struct CertificationRun {
    pub variant: RateVariant,
    pub params: RateParams,
    pub trajectory: Trajectory,
    pub certificates: Vec<RateCertificate>,
}

/// Runs the iteration that `variant` speaks about and certifies it.
///
/// `H3`/`H4` iterate `T` with `(t_n)`. `H1`/`H2` iterate the nonexpansive
/// map `T_{(1−k)/d}` with the reparameterized steps `t_n·d/(1−k)`; the
/// iterates coincide, but the residual is that of the averaged map.
#[allow(clippy::too_many_arguments)]
pub fn certify_instance(
    instance: &PseudocontractionInstance,
    x0: &Vector,
    schedule: &StepSchedule,
    n_max: usize,
    variant: RateVariant,
    eps_list: &[f64],
    b: Option<f64>,
    options: &CertifyOptions,
) -> Result<CertificationRun> {
    let space = instance.space();
    let b = match b {
        Some(b) => b,
        None => default_b(x0, instance.known_fixed_point(), |v| space.norm_unchecked(v)),
    };
    let params = RateParams {
        b,
        k: schedule.k(),
        d: schedule.d(),
        eta: Some(space.eta()),
    };
    let (mut trajectory, theta) = match variant.series() {
        SeriesKind::Strict => (mann_iterate(instance, x0, schedule, n_max)?, schedule.clone()),
        SeriesKind::Nonexpansive => {
            let s = (1.0 - schedule.k()) / schedule.d();
            let averaged = instance.averaged(s)?;
            let primed = reparameterize(schedule, schedule.k(), schedule.d())?;
            let traj = mann_iterate_map(space, &averaged, instance.known_fixed_point(), x0, &primed, n_max)?;
            (traj, primed)
        }
    };
    let certificates = certify(
        &mut trajectory,
        |eps| rate_h(variant, &params, &theta, eps),
        eps_list,
        options,
    )?;
    Ok(CertificationRun {
        variant,
        params,
        trajectory,
        certificates,
    })
}
