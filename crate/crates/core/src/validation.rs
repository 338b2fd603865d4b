//! Seeded pair sampling shared by the inequality checks.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::spaces::Vector;

/// Default absolute tolerance on inequality deficits.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// How the per-pair allowance is computed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    Absolute(f64),
    /// `value · max(1, magnitude)` where magnitude is the size of the terms.
    Relative(f64),
}

impl Tolerance {
    fn allowance(&self, magnitude: f64) -> f64 {
        match *self {
            Tolerance::Absolute(t) => t,
            Tolerance::Relative(t) => t * magnitude.max(1.0),
        }
    }
}

/// A pair that violated the checked inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vector,
    pub y: Vector,
    pub violation: f64,
}

/// Outcome of a sampled inequality check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub pairs_checked: usize,
    /// Largest deficit `lhs − rhs` seen, before subtracting any tolerance.
    pub max_violation: f64,
    pub tolerance: Tolerance,
    pub witness: Option<Witness>,
}

/// One evaluated pair: the inequality deficit (positive means violated)
/// and the magnitude used for relative tolerances.
pub(crate) struct PairCheck {
    pub deficit: f64,
    pub magnitude: f64,
    pub x: Vector,
    pub y: Vector,
}

struct Acc {
    max_deficit: f64,
    worst: Option<(f64, usize, PairCheck)>,
}

impl Acc {
    fn empty() -> Self {
        Acc {
            max_deficit: f64::NEG_INFINITY,
            worst: None,
        }
    }

    fn merge(self, other: Acc) -> Acc {
        let worst = match (self.worst, other.worst) {
            (None, w) | (w, None) => w,
            (Some(a), Some(b)) => {
                // larger excess wins, ties go to the lower index
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
        };
        Acc {
            max_deficit: self.max_deficit.max(other.max_deficit),
            worst,
        }
    }
}

/// Evaluates `check` on `pairs` seeded samples in parallel. Sample `i` uses
/// its own RNG stream, so the report depends only on `(seed, pairs)`.
pub(crate) fn sample_pairs<F>(pairs: usize, seed: u64, tolerance: Tolerance, check: F) -> ValidationReport
where
    F: Fn(&mut ChaCha8Rng) -> PairCheck + Sync,
{
    let acc = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::indexed(seed, i);
            let pc = check(&mut rng);
            let excess = pc.deficit - tolerance.allowance(pc.magnitude);
            Acc {
                max_deficit: pc.deficit,
                worst: Some((excess, i, pc)),
            }
        })
        .reduce(Acc::empty, Acc::merge);

    let witness = acc.worst.and_then(|(excess, _, pc)| {
        (excess > 0.0 || excess.is_nan()).then_some(Witness {
            x: pc.x,
            y: pc.y,
            violation: pc.deficit,
        })
    });
    ValidationReport {
        pass: witness.is_none(),
        pairs_checked: pairs,
        max_violation: if pairs == 0 { 0.0 } else { acc.max_deficit },
        tolerance,
        witness,
    }
}

/// Counts the samples for which `pred` holds, using the same streams as
/// [`sample_pairs`].
pub(crate) fn count_pairs<F>(pairs: usize, seed: u64, pred: F) -> usize
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    (0..pairs)
        .into_par_iter()
        .filter(|&i| pred(&mut rng::indexed(seed, i)))
        .count()
}
