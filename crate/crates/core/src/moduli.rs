//! Sampled moduli of smoothness and convexity, the `β*` function, and the
//! explicit constant `d_c` for 2-uniformly smooth spaces.
//!
//! Every sampled estimate is one-sided and says so in its
//! [`Direction`]: a maximum over probes can only under-estimate a
//! supremum, a minimum over admissible probes can only over-estimate an
//! infimum. Probe sequences are prefix-stable, so raising the budget under
//! the same seed moves an estimate monotonically toward the true value.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::spaces::{pairing_unchecked, Space, Vector};
use crate::validation::{self, PairCheck, Tolerance, ValidationReport};

/// Which side of the true value a sampled estimate lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    LowerBoundOfSup,
    UpperBoundOfInf,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusEstimate {
    pub value: f64,
    pub direction: Direction,
    pub probes_used: usize,
    pub seed: u64,
}

fn check_probes(probes: usize) -> Result<()> {
    if probes == 0 {
        return Err(Error::InvalidParameter {
            name: "probes",
            value: 0.0,
            reason: "must be >= 1",
        });
    }
    Ok(())
}

/// Pair `i` of the deterministic probe sequence on `S(E) × S(E)`: all
/// ordered pairs of signed basis vectors, then seeded random pairs.
fn sphere_pair(space: &Space, seed: u64, i: usize) -> (Vector, Vector) {
    let dim = space.dim();
    let m = 2 * dim;
    if i < m * m {
        let (a, b) = (i / m, i % m);
        let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        (Vector::basis(dim, a / 2, sign(a)), Vector::basis(dim, b / 2, sign(b)))
    } else {
        let mut r = rng::indexed(seed, i);
        let u = space.random_unit(&mut r);
        let v = space.random_unit(&mut r);
        (u, v)
    }
}

/// Analytic modulus of smoothness of a Hilbert space, `√(1+τ²) − 1`.
pub fn hilbert_rho(tau: f64) -> f64 {
    (1.0 + tau * tau).sqrt() - 1.0
}

/// Analytic modulus of convexity of a Hilbert space, `1 − √(1 − ε²/4)`.
pub fn hilbert_delta(eps: f64) -> f64 {
    1.0 - (1.0 - eps * eps / 4.0).max(0.0).sqrt()
}

/// Sampled `ρ_E(τ) = sup { (‖u+τv‖ + ‖u−τv‖)/2 − 1 : u, v ∈ S(E) }`.
pub fn estimate_rho(space: &Space, tau: f64, probes: usize, seed: u64) -> Result<ModulusEstimate> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: tau,
            reason: "must be positive",
        });
    }
    check_probes(probes)?;
    let value = (0..probes)
        .into_par_iter()
        .map(|i| {
            let (u, v) = sphere_pair(space, seed, i);
            rho_probe(space, &u, &v, tau)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(ModulusEstimate {
        value,
        direction: Direction::LowerBoundOfSup,
        probes_used: probes,
        seed,
    })
}

/// Contribution of a single pair `(u, v)` to the `ρ_E` supremum.
pub fn rho_probe(space: &Space, u: &Vector, v: &Vector, tau: f64) -> f64 {
    let plus = space.norm_unchecked(&u.axpy(tau, v));
    let minus = space.norm_unchecked(&u.axpy(-tau, v));
    (plus + minus) / 2.0 - 1.0
}

/// Sampled `δ_E(ε) = inf { 1 − ‖x+y‖/2 : x, y ∈ S(E), ‖x−y‖ ≥ ε }`.
///
/// Pairs closer than `ε` are rejected. The antipodal pair `(e₁, −e₁)` is
/// admissible for every `ε ≤ 2` and bounds the result by 1.
pub fn estimate_delta(space: &Space, eps: f64, probes: usize, seed: u64) -> Result<ModulusEstimate> {
    if !(0.0..=2.0).contains(&eps) {
        return Err(Error::InvalidParameter {
            name: "eps",
            value: eps,
            reason: "must lie in [0, 2]",
        });
    }
    check_probes(probes)?;
    let sampled = (0..probes)
        .into_par_iter()
        .filter_map(|i| {
            let (x, y) = sphere_pair(space, seed, i);
            (space.norm_unchecked(&(&x - &y)) >= eps).then(|| 1.0 - space.norm_unchecked(&(&x + &y)) / 2.0)
        })
        .reduce(|| f64::INFINITY, f64::min);
    // antipodal fallback: ‖x + (−x)‖ = 0
    let value = sampled.min(1.0);
    Ok(ModulusEstimate {
        value,
        direction: Direction::UpperBoundOfInf,
        probes_used: probes,
        seed,
    })
}

/// One probe of `β*_E(x, t)`: `(‖x+tv‖² − ‖x‖²)/t − 2·j(x)(v)` for `t > 0`.
pub fn beta_star_probe(space: &Space, x: &Vector, t: f64, v: &Vector) -> f64 {
    let shifted = space.norm_sq_unchecked(&x.axpy(t, v));
    let base = space.norm_sq_unchecked(x);
    let j = space.duality_unchecked(x);
    (shifted - base) / t - 2.0 * pairing_unchecked(&j, v)
}

/// Sampled `β*_E(x, t) = sup_{v ∈ S(E)} (‖x+tv‖² − ‖x‖²)/t − 2·j(x)(v)`,
/// with `β*_E(x, 0) = 0`.
pub fn estimate_beta_star(space: &Space, x: &Vector, t: f64, probes: usize, seed: u64) -> Result<ModulusEstimate> {
    space.norm(x)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "must be nonnegative",
        });
    }
    check_probes(probes)?;
    let value = if t == 0.0 {
        0.0
    } else {
        space
            .sphere_probes(seed)
            .take(probes)
            .map(|v| beta_star_probe(space, x, t, &v))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    Ok(ModulusEstimate {
        value,
        direction: Direction::LowerBoundOfSup,
        probes_used: probes,
        seed,
    })
}

/// The chain of constants leading from `ρ_E(τ) ≤ cτ²` to `d_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DcBreakdown {
    pub c: f64,
    /// `2 − √2`.
    pub alpha: f64,
    /// `min(1/(16c), α)`: the convexity-of-the-dual constant.
    pub k1: f64,
    /// `min(k1, 1)/8`.
    pub k2: f64,
    /// `1/k2`.
    pub dc: f64,
}

pub const ALPHA: f64 = 2.0 - std::f64::consts::SQRT_2;

/// `d_c = 8 / min(1/(16c), 2 − √2)`, with every intermediate exposed.
pub fn compute_dc(c: f64) -> Result<DcBreakdown> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "c",
            value: c,
            reason: "must be positive",
        });
    }
    let alpha = ALPHA;
    let k1 = (1.0 / (16.0 * c)).min(alpha);
    let k2 = k1.min(1.0) / 8.0;
    Ok(DcBreakdown {
        c,
        alpha,
        k1,
        k2,
        dc: 1.0 / k2,
    })
}

/// `(√(2 − (1−t)²) − 1 − t) / t²`, whose supremum over `(0, 1]` is `−α`.
pub fn alpha_objective(t: f64) -> f64 {
    ((2.0 - (1.0 - t).powi(2)).sqrt() - 1.0 - t) / (t * t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaCheck {
    pub max_value: f64,
    pub argmax: f64,
    pub grid_points: usize,
}

/// Maximizes [`alpha_objective`] over the grid `1, 1−h, 1−2h, … > 0`.
pub fn verify_alpha(grid_step: f64) -> Result<AlphaCheck> {
    if !(grid_step > 0.0 && grid_step <= 1e-3) {
        return Err(Error::InvalidParameter {
            name: "grid_step",
            value: grid_step,
            reason: "must lie in (0, 1e-3]",
        });
    }
    let mut best = AlphaCheck {
        max_value: f64::NEG_INFINITY,
        argmax: f64::NAN,
        grid_points: 0,
    };
    let mut i = 0usize;
    loop {
        let t = 1.0 - i as f64 * grid_step;
        if t <= 0.0 {
            break;
        }
        let f = alpha_objective(t);
        if f > best.max_value {
            best.max_value = f;
            best.argmax = t;
        }
        i += 1;
    }
    best.grid_points = i;
    Ok(best)
}

/// Grid evaluation of `sup_{ε ∈ [0,2]} (ε·τ/2 − δ_{E*}(ε))`, which equals
/// `ρ_E(τ)` for the analytic dual modulus `delta_dual`. Both endpoints are
/// always on the grid.
pub fn lindenstrauss_check<F>(tau: f64, delta_dual: F, grid_step: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: tau,
            reason: "must be positive",
        });
    }
    if !(grid_step > 0.0 && grid_step <= 2.0) {
        return Err(Error::InvalidParameter {
            name: "grid_step",
            value: grid_step,
            reason: "must lie in (0, 2]",
        });
    }
    let objective = |eps: f64| eps * tau / 2.0 - delta_dual(eps);
    let mut best = objective(2.0);
    let mut i = 0usize;
    loop {
        let eps = i as f64 * grid_step;
        if eps >= 2.0 {
            break;
        }
        best = best.max(objective(eps));
        i += 1;
    }
    Ok(best)
}

/// Sampling radius for the `x` in Lemma 1 style checks.
pub const PAIR_RADIUS: f64 = 10.0;

/// Samples `(x, y)` and checks `‖x+y‖² ≤ ‖x‖² + 2·j(x)(y) + d·‖y‖²`.
///
/// `x` is uniform in `[−10, 10]^dim`; `y` is a random unit direction scaled
/// by `10^{U(−2, 1)}` so both the local (second order) and the large-step
/// regimes are probed. The allowance is `1e−9 · max(1, magnitude)`.
pub fn check_lemma1_ii(space: &Space, d: f64, pairs: usize, seed: u64) -> Result<ValidationReport> {
    if !(d.is_finite() && d >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "d",
            value: d,
            reason: "must be >= 1",
        });
    }
    check_probes(pairs)?;
    Ok(validation::sample_pairs(
        pairs,
        seed,
        Tolerance::Relative(validation::DEFAULT_TOLERANCE),
        |r| {
            use rand::Rng;
            let x = space.random_cube_point(r, PAIR_RADIUS);
            let scale = 10f64.powf(r.random_range(-2.0..1.0));
            let y = scale * &space.random_unit(r);
            let lhs = space.norm_sq_unchecked(&(&x + &y));
            let nx = space.norm_sq_unchecked(&x);
            let cross = 2.0 * pairing_unchecked(&space.duality_unchecked(&x), &y);
            let tail = d * space.norm_sq_unchecked(&y);
            PairCheck {
                deficit: lhs - nx - cross - tail,
                magnitude: lhs.max(nx).max(cross.abs()).max(tail),
                x,
                y,
            }
        },
    ))
}

/// Checks the space's own declared `d` (see [`check_lemma1_ii`]).
pub fn validate_declared_d(space: &Space, pairs: usize, seed: u64) -> Result<ValidationReport> {
    check_lemma1_ii(space, space.d(), pairs, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn rho_hilbert_matches_analytic() {
        let h = Space::hilbert(3).unwrap();
        let e = estimate_rho(&h, 1.0, 10_000, 1).unwrap();
        assert_eq!(e.direction, Direction::LowerBoundOfSup);
        assert_abs_diff_eq!(e.value, SQRT2 - 1.0, epsilon = 5e-3);
        assert!(e.value <= SQRT2 - 1.0 + 1e-12);
        let small = estimate_rho(&h, 0.1, 10_000, 1).unwrap();
        assert!(small.value <= 0.5 * 0.01);
    }

    #[test]
    fn rho_collinear_probe_is_zero() {
        let h = Space::hilbert(2).unwrap();
        let u = Vector::basis(2, 0, 1.0);
        assert_eq!(rho_probe(&h, &u, &u, 0.5), 0.0);
        // probe 0 is (e1, e1)
        assert_eq!(estimate_rho(&h, 0.5, 1, 0).unwrap().value, 0.0);
    }

    #[test]
    fn delta_hilbert_values() {
        let h = Space::hilbert(2).unwrap();
        let at2 = estimate_delta(&h, 2.0, 1000, 3).unwrap();
        assert_eq!(at2.value, 1.0);
        assert_eq!(at2.direction, Direction::UpperBoundOfInf);
        assert_eq!(estimate_delta(&h, 0.0, 10, 3).unwrap().value, 0.0);
        let at1 = estimate_delta(&h, 1.0, 10_000, 3).unwrap();
        assert_abs_diff_eq!(at1.value, 1.0 - 3f64.sqrt() / 2.0, epsilon = 5e-3);
        assert!(at1.value >= hilbert_delta(1.0) - 1e-12);
    }

    #[test]
    fn delta_falls_back_to_antipodal_pair() {
        let h = Space::hilbert(2).unwrap();
        // a single probe (e1, e1) is never admissible for eps > 0
        assert_eq!(estimate_delta(&h, 1.5, 1, 0).unwrap().value, 1.0);
        assert!(estimate_delta(&h, 2.5, 1, 0).is_err());
    }

    #[test]
    fn beta_star_hilbert_is_t() {
        let h = Space::hilbert(4).unwrap();
        let x = Vector::new(vec![0.3, -1.2, 2.0, 0.7]).unwrap();
        for &t in &[0.01, 0.5, 3.0] {
            for v in h.sample_unit_sphere(5, 50).unwrap() {
                assert_abs_diff_eq!(beta_star_probe(&h, &x, t, &v), t, epsilon = 1e-9);
            }
        }
        assert_eq!(estimate_beta_star(&h, &x, 0.0, 10, 0).unwrap().value, 0.0);
        assert!(estimate_beta_star(&h, &x, -1.0, 10, 0).is_err());
    }

    #[test]
    fn beta_star_lp4_below_declared_d() {
        let l4 = Space::lp(5, 4.0).unwrap();
        let mut r = rng::stream(99, 0);
        let x = l4.random_cube_point(&mut r, 1.0);
        let e = estimate_beta_star(&l4, &x, 0.5, 10_000, 4).unwrap();
        assert!(e.value <= 3.0 * 0.5 + 1e-9, "{}", e.value);
        assert!(e.value > 0.0);
    }

    #[test]
    fn dc_values() {
        let b = compute_dc(0.5).unwrap();
        assert_eq!(b.dc, 64.0);
        assert_eq!(b.k1, 0.125);
        assert_eq!(b.k2, 0.015625);
        let b = compute_dc(1.0).unwrap();
        assert_eq!(b.k1, 1.0 / 16.0);
        assert_eq!(b.dc, 128.0);
        let b = compute_dc(0.01).unwrap();
        assert_eq!(b.k1, 2.0 - SQRT2);
        assert_abs_diff_eq!(b.dc, 4.0 * (2.0 + SQRT2), epsilon = 1e-12);
        assert!(compute_dc(0.0).is_err());
        assert!(compute_dc(-1.0).is_err());
    }

    #[test]
    fn alpha_objective_values() {
        assert_eq!(alpha_objective(1.0), SQRT2 - 2.0);
        let mid = alpha_objective(0.5);
        assert_abs_diff_eq!(mid, (1.75f64.sqrt() - 1.5) / 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(mid, -0.7085, epsilon = 1e-4);
        assert!(mid < SQRT2 - 2.0);
    }

    #[test]
    fn verify_alpha_grid() {
        let a = verify_alpha(1e-5).unwrap();
        assert_abs_diff_eq!(a.max_value, SQRT2 - 2.0, epsilon = 1e-6);
        assert_eq!(a.argmax, 1.0);
        assert!(verify_alpha(0.01).is_err());
        assert!(verify_alpha(0.0).is_err());
    }

    #[test]
    fn lindenstrauss_hilbert_and_degenerate() {
        let v = lindenstrauss_check(1.0, hilbert_delta, 1e-4).unwrap();
        assert_abs_diff_eq!(v, SQRT2 - 1.0, epsilon = 1e-4);
        let v = lindenstrauss_check(0.5, hilbert_delta, 1e-4).unwrap();
        assert_abs_diff_eq!(v, 1.25f64.sqrt() - 1.0, epsilon = 1e-4);
        assert_eq!(lindenstrauss_check(1.0, |_| 0.0, 1e-3).unwrap(), 1.0);
    }

    #[test]
    fn lemma1_ii_hilbert_equality() {
        let h = Space::hilbert(3).unwrap();
        let rep = check_lemma1_ii(&h, 1.0, 2000, 0).unwrap();
        assert!(rep.pass);
        assert!(rep.max_violation.abs() <= 1e-10, "{}", rep.max_violation);
    }

    #[test]
    fn lemma1_ii_lp4() {
        let l4 = Space::lp(5, 4.0).unwrap();
        assert!(check_lemma1_ii(&l4, 3.0, 20_000, 1).unwrap().pass);
        let bad = check_lemma1_ii(&l4, 1.0, 20_000, 1).unwrap();
        assert!(!bad.pass);
        let w = bad.witness.unwrap();
        let lhs = l4.norm(&(&w.x + &w.y)).unwrap().powi(2);
        let j = l4.duality_map(&w.x).unwrap();
        let rhs = l4.norm(&w.x).unwrap().powi(2)
            + 2.0 * crate::spaces::pairing(&j, &w.y).unwrap()
            + l4.norm(&w.y).unwrap().powi(2);
        assert!(lhs > rhs);
    }
}
