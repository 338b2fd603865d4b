//! Strict pseudocontractions with known fixed points, the averaged maps
//! `T_t = tT + (1−t)·id`, and sampled validation of both.
//!
//! In a smooth space `T` is `k`-strict when
//!
//! ```text
//! j(x−y)((x−Tx) − (y−Ty)) ≥ (1−k)/2 · ‖(x−Tx) − (y−Ty)‖²
//! ```
//!
//! which in a Hilbert space is equivalent to
//! `‖Tx−Ty‖² ≤ ‖x−y‖² + k‖(x−Tx) − (y−Ty)‖²`. For `t ≤ (1−k)/d` the
//! averaged map `T_t` is nonexpansive and has the same fixed points as `T`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{pairing_unchecked, Space, Vector};
use crate::validation::{self, PairCheck, Tolerance, ValidationReport, DEFAULT_TOLERANCE};

type MapFn = dyn Fn(&Vector) -> Vector + Send + Sync;

/// A self-map of the space. Cheap to clone; the closure must be pure.
#[derive(Clone)]
pub struct Map {
    f: Arc<MapFn>,
    label: String,
}

impl Map {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        Map {
            f: Arc::new(f),
            label: label.into(),
        }
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        (self.f)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn identity() -> Self {
        Map::new("id", Vector::clone)
    }

    /// `x ↦ −c·x`.
    pub fn scaled_negation(c: f64) -> Self {
        Map::new(format!("-{c}*id"), move |x| -c * x)
    }

    /// `x ↦ t·T(x) + (1−t)·x` for `t ∈ (0, 1]`.
    pub fn averaged(&self, t: f64) -> Result<Map> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "t",
                value: t,
                reason: "averaging parameter must lie in (0, 1]",
            });
        }
        let inner = self.clone();
        Ok(Map::new(format!("({})_{t}", self.label), move |x| {
            let tx = inner.apply(x);
            let keep = 1.0 - t;
            Vector::from_raw(
                tx.coords()
                    .iter()
                    .zip(x.coords())
                    .map(|(a, b)| t * a + keep * b)
                    .collect(),
            )
        }))
    }
}

impl fmt::Debug for Map {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Map").field("label", &self.label).finish()
    }
}

/// How many random pairs a validation draws, and from where.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationBudget {
    pub pairs: usize,
    pub seed: u64,
    /// Coordinates are drawn uniformly from `[−radius, radius]`.
    pub radius: f64,
    pub tolerance: f64,
}

impl Default for ValidationBudget {
    fn default() -> Self {
        ValidationBudget {
            pairs: 10_000,
            seed: 0,
            radius: 10.0,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl ValidationBudget {
    pub fn with_pairs(mut self, pairs: usize) -> Self {
        self.pairs = pairs;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// j-form report plus, in Hilbert spaces, the norm-form report and the
/// number of pairs on which the two forms disagreed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrictnessReport {
    pub k: f64,
    pub j_form: ValidationReport,
    pub norm_form: Option<ValidationReport>,
    pub form_disagreements: usize,
}

impl StrictnessReport {
    pub fn pass(&self) -> bool {
        self.j_form.pass && self.norm_form.as_ref().is_none_or(|r| r.pass)
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::InvalidParameter {
            name: "k",
            value: k,
            reason: "strictness constant must lie in [0, 1)",
        });
    }
    Ok(())
}

struct StrictTerms {
    x: Vector,
    y: Vector,
    j_deficit: f64,
    norm_deficit: f64,
}

fn strict_terms(
    space: &Space,
    map: &Map,
    k: f64,
    budget: &ValidationBudget,
    r: &mut rand_chacha::ChaCha8Rng,
) -> StrictTerms {
    let x = space.random_cube_point(r, budget.radius);
    let y = space.random_cube_point(r, budget.radius);
    let tx = map.apply(&x);
    let ty = map.apply(&y);
    let diff = &x - &y;
    let gap = &(&x - &tx) - &(&y - &ty);
    let gap_sq = space.norm_sq_unchecked(&gap);
    let j = space.duality_unchecked(&diff);
    let j_deficit = (1.0 - k) / 2.0 * gap_sq - pairing_unchecked(&j, &gap);
    let norm_deficit = if space.is_hilbert() {
        space.norm_sq_unchecked(&(&tx - &ty)) - space.norm_sq_unchecked(&diff) - k * gap_sq
    } else {
        f64::NAN
    };
    StrictTerms {
        x,
        y,
        j_deficit,
        norm_deficit,
    }
}

/// Samples pairs and checks that `map` is `k`-strict.
///
/// The norm form deficit is exactly twice the j-form deficit in a Hilbert
/// space, so it is judged against twice the tolerance.
pub fn validate_k_strict(space: &Space, map: &Map, k: f64, budget: &ValidationBudget) -> Result<StrictnessReport> {
    check_k(k)?;
    let tol = budget.tolerance;
    let j_form = validation::sample_pairs(budget.pairs, budget.seed, Tolerance::Absolute(tol), |r| {
        let s = strict_terms(space, map, k, budget, r);
        PairCheck {
            deficit: s.j_deficit,
            magnitude: 0.0,
            x: s.x,
            y: s.y,
        }
    });
    let (norm_form, form_disagreements) = if space.is_hilbert() {
        let report = validation::sample_pairs(budget.pairs, budget.seed, Tolerance::Absolute(2.0 * tol), |r| {
            let s = strict_terms(space, map, k, budget, r);
            PairCheck {
                deficit: s.norm_deficit,
                magnitude: 0.0,
                x: s.x,
                y: s.y,
            }
        });
        let disagreements = validation::count_pairs(budget.pairs, budget.seed, |r| {
            let s = strict_terms(space, map, k, budget, r);
            (s.j_deficit <= tol) != (s.norm_deficit <= 2.0 * tol)
        });
        (Some(report), disagreements)
    } else {
        (None, 0)
    };
    Ok(StrictnessReport {
        k,
        j_form,
        norm_form,
        form_disagreements,
    })
}

/// Samples pairs and checks `‖Mx − My‖ ≤ ‖x − y‖`.
pub fn check_nonexpansive(space: &Space, map: &Map, budget: &ValidationBudget) -> ValidationReport {
    validation::sample_pairs(budget.pairs, budget.seed, Tolerance::Absolute(budget.tolerance), |r| {
        let x = space.random_cube_point(r, budget.radius);
        let y = space.random_cube_point(r, budget.radius);
        let image = space.norm_unchecked(&(&map.apply(&x) - &map.apply(&y)));
        PairCheck {
            deficit: image - space.norm_unchecked(&(&x - &y)),
            magnitude: 0.0,
            x,
            y,
        }
    })
}

/// Smallest `k` (to within `2^-40`) at which `map` passes
/// [`validate_k_strict`] on the given sample set. Empirical only.
pub fn certify_k_by_bisection(space: &Space, map: &Map, budget: &ValidationBudget) -> Result<f64> {
    let passes = |k: f64| validate_k_strict(space, map, k, budget).map(|r| r.pass());
    if passes(0.0)? {
        return Ok(0.0);
    }
    let mut hi = 1.0 - 1e-9;
    if !passes(hi)? {
        let report = validate_k_strict(space, map, hi, budget)?;
        return Err(Error::ValidationFailed {
            what: format!("{} as a strict pseudocontraction", map.label()),
            max_violation: report.j_form.max_violation,
            pairs: budget.pairs,
        });
    }
    let mut lo = 0.0;
    while hi - lo > 2f64.powi(-40) {
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// A nonexpansive map together with one of its fixed points.
#[derive(Clone, Debug)]
pub struct NonexpansiveMap {
    pub map: Map,
    pub fixed_point: Vector,
}

impl NonexpansiveMap {
    pub fn new(map: Map, fixed_point: Vector) -> Self {
        NonexpansiveMap { map, fixed_point }
    }

    /// Euclidean metric projection onto the closed ball of `radius` at 0.
    pub fn ball_projection(dim: usize, radius: f64) -> Self {
        let map = Map::new(format!("P_B(0,{radius})"), move |x| {
            let n = x.coords().iter().map(|c| c * c).sum::<f64>().sqrt();
            if n <= radius {
                x.clone()
            } else {
                (radius / n) * x
            }
        });
        NonexpansiveMap::new(map, Vector::zeros(dim))
    }

    /// `x ↦ point`.
    pub fn constant(point: Vector) -> Self {
        let p = point.clone();
        let map = Map::new(format!("const{point}"), move |_| p.clone());
        NonexpansiveMap::new(map, point)
    }

    /// `x ↦ A·x` for a square matrix given by rows; fixed point 0.
    pub fn linear(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let map = Map::new("linear", move |x| {
            Vector::from_raw(
                rows.iter()
                    .map(|r| r.iter().zip(x.coords()).map(|(a, b)| a * b).sum())
                    .collect(),
            )
        });
        Ok(NonexpansiveMap::new(map, Vector::zeros(n)))
    }
}

/// A `k`-strict pseudocontraction with a known fixed point.
#[derive(Clone, Debug)]
pub struct PseudocontractionInstance {
    space: Space,
    map: Map,
    k: f64,
    fixed_point: Vector,
    label: String,
}

/// Tolerance for `T(p) = p` at the declared fixed point.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-12;

impl PseudocontractionInstance {
    /// Builds an instance after checking the fixed point and validating
    /// `k`-strictness on `budget`.
    pub fn new(
        space: Space,
        map: Map,
        k: f64,
        fixed_point: Vector,
        label: impl Into<String>,
        budget: &ValidationBudget,
    ) -> Result<Self> {
        check_k(k)?;
        space.norm(&fixed_point)?;
        let moved = space.norm_unchecked(&(&map.apply(&fixed_point) - &fixed_point));
        if !(moved <= FIXED_POINT_TOLERANCE) {
            return Err(Error::ValidationFailed {
                what: format!("declared fixed point of {}", map.label()),
                max_violation: moved,
                pairs: 1,
            });
        }
        let report = validate_k_strict(&space, &map, k, budget)?;
        if !report.pass() {
            return Err(Error::ValidationFailed {
                what: format!("{} as a {k}-strict pseudocontraction", map.label()),
                max_violation: report.j_form.max_violation,
                pairs: budget.pairs,
            });
        }
        Ok(PseudocontractionInstance {
            space,
            map,
            k,
            fixed_point,
            label: label.into(),
        })
    }

    /// Like [`PseudocontractionInstance::new`], with `k` found by
    /// [`certify_k_by_bisection`].
    pub fn with_certified_k(
        space: Space,
        map: Map,
        fixed_point: Vector,
        label: impl Into<String>,
        budget: &ValidationBudget,
    ) -> Result<Self> {
        let k = certify_k_by_bisection(&space, &map, budget)?;
        Self::new(space, map, k, fixed_point, label, budget)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn map(&self) -> &Map {
        &self.map
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        self.map.apply(x)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn known_fixed_point(&self) -> &Vector {
        &self.fixed_point
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `T_t`.
    pub fn averaged(&self, t: f64) -> Result<Map> {
        self.map.averaged(t)
    }

    /// `(1−k)/d`, the largest averaging parameter for which `T_t` is
    /// guaranteed nonexpansive.
    pub fn max_nonexpansive_t(&self) -> f64 {
        (1.0 - self.k) / self.space.d()
    }
}

/// `T = −c·id` on a Hilbert space, which is `(c−1)/(c+1)`-strict with
/// fixed point 0.
pub fn scaled_negation(c: f64, space: &Space) -> Result<PseudocontractionInstance> {
    if !(c.is_finite() && c >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "c",
            value: c,
            reason: "scaled negation needs c >= 1",
        });
    }
    if !space.is_hilbert() {
        return Err(Error::Unsupported("scaled_negation is defined on Hilbert spaces"));
    }
    let k = (c - 1.0) / (c + 1.0);
    PseudocontractionInstance::new(
        space.clone(),
        Map::scaled_negation(c),
        k,
        Vector::zeros(space.dim()),
        format!("scaled_negation(c={c})"),
        &ValidationBudget::default().with_pairs(1000),
    )
}

/// Inverts averaging: returns `T = (1/s)·N − ((1−s)/s)·id`, so that
/// `T_s = N`, declared `(1−s)`-strict.
pub fn from_nonexpansive(
    n: &NonexpansiveMap,
    s: f64,
    space: &Space,
    budget: &ValidationBudget,
) -> Result<PseudocontractionInstance> {
    if !space.is_hilbert() {
        return Err(Error::Unsupported("from_nonexpansive is defined on Hilbert spaces"));
    }
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s,
            reason: "must lie in (0, 1]",
        });
    }
    let report = check_nonexpansive(space, &n.map, budget);
    if !report.pass {
        return Err(Error::ValidationFailed {
            what: format!("{} as a nonexpansive map", n.map.label()),
            max_violation: report.max_violation,
            pairs: report.pairs_checked,
        });
    }
    let map = if s == 1.0 {
        n.map.clone()
    } else {
        let inner = n.map.clone();
        let (a, b) = (1.0 / s, (1.0 - s) / s);
        Map::new(format!("inverse_average({}, s={s})", n.map.label()), move |x| {
            let nx = inner.apply(x);
            Vector::from_raw(nx.coords().iter().zip(x.coords()).map(|(p, q)| a * p - b * q).collect())
        })
    };
    let label = format!("from_nonexpansive({}, s={s})", n.map.label());
    PseudocontractionInstance::new(space.clone(), map, 1.0 - s, n.fixed_point.clone(), label, budget)
}

/// The instances used across the examples, tests and the acceptance suite.
pub fn catalog() -> Result<Vec<PseudocontractionInstance>> {
    let budget = ValidationBudget::default();
    let h1 = Space::hilbert(1)?;
    let h2 = Space::hilbert(2)?;
    let h3 = Space::hilbert(3)?;
    let l4 = Space::lp(3, 4.0)?;
    Ok(vec![
        scaled_negation(2.0, &h1)?,
        scaled_negation(3.0, &h3)?,
        from_nonexpansive(&NonexpansiveMap::ball_projection(2, 1.0), 0.5, &h2, &budget)?,
        from_nonexpansive(&NonexpansiveMap::constant(Vector::zeros(2)), 1.0 / 3.0, &h2, &budget)?,
        PseudocontractionInstance::with_certified_k(
            l4,
            Map::scaled_negation(2.0),
            Vector::zeros(3),
            "lp4_negation(c=2)",
            &budget.with_pairs(2000),
        )?,
    ])
}
