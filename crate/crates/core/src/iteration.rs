//! The Mann iteration `x_{n+1} = t_n·Tx_n + (1−t_n)·x_n` and its
//! averaged-operator reparameterization.
//!
//! Steps are evaluated as `x_n + t_n·(Tx_n − x_n)`. When `Tx_n = x_n`
//! exactly this reproduces `x_n` bit for bit, and under a constant step any
//! repeated iterate repeats forever. The engine detects both cases and marks
//! the trajectory stationary, which lets certification read residuals at
//! indices far beyond what is ever stored.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{Map, PseudocontractionInstance};
use crate::rates::{SeriesKind, StepSchedule};
use crate::spaces::{Space, Vector};

/// Points beyond this index are not stored; residuals and distances are.
pub const DEFAULT_POINT_CAP: usize = 1_000_000;

/// A Mann trajectory `x_0, …, x_N` with residuals `‖x_n − Tx_n‖` and
/// distances `‖x_n − p‖` to the known fixed point.
#[derive(Clone, Debug)]
pub struct Trajectory {
    points: Vec<Vector>,
    residuals: Vec<f64>,
    fix_distances: Vec<f64>,
    stationary_from: Option<usize>,
    schedule: StepSchedule,
    space: Space,
    map: Map,
    fixed_point: Vector,
    current: Vector,
    current_image: Vector,
    point_cap: usize,
}

impl Trajectory {
    fn start(space: &Space, map: &Map, fixed_point: &Vector, x0: &Vector, schedule: &StepSchedule) -> Result<Self> {
        space.norm(x0)?;
        space.norm(fixed_point)?;
        let image = map.apply(x0);
        if image.dim() != x0.dim() {
            return Err(Error::DimensionMismatch {
                expected: x0.dim(),
                found: image.dim(),
            });
        }
        let mut t = Trajectory {
            points: Vec::new(),
            residuals: Vec::new(),
            fix_distances: Vec::new(),
            stationary_from: None,
            schedule: schedule.clone(),
            space: space.clone(),
            map: map.clone(),
            fixed_point: fixed_point.clone(),
            current: x0.clone(),
            current_image: image,
            point_cap: DEFAULT_POINT_CAP,
        };
        t.record()?;
        Ok(t)
    }

    fn record(&mut self) -> Result<()> {
        if let Some(index) = self.current.coords().iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let residual = self.space.norm_unchecked(&(&self.current - &self.current_image));
        let distance = self.space.norm_unchecked(&(&self.current - &self.fixed_point));
        self.residuals.push(residual);
        self.fix_distances.push(distance);
        if self.points.len() < self.point_cap {
            self.points.push(self.current.clone());
        }
        Ok(())
    }

    /// Computes further steps until index `n` is stored or the trajectory
    /// turns stationary.
    pub fn extend_to(&mut self, n: usize) -> Result<()> {
        while self.last_index() < n && self.stationary_from.is_none() {
            let i = self.last_index();
            let t = self.schedule.checked_step(i)?;
            let gap = &self.current_image - &self.current;
            let next = self.current.axpy(t, &gap);
            let repeated = bit_equal(&next, &self.current) && (gap.is_zero() || self.schedule.is_constant());
            if repeated {
                self.stationary_from = Some(i);
                break;
            }
            self.current_image = self.map.apply(&next);
            self.current = next;
            self.record()?;
        }
        Ok(())
    }

    /// Like [`Trajectory::extend_to`] but also fills the stored arrays of a
    /// stationary tail, so exactly `n + 1` entries exist.
    fn fill_to(&mut self, n: usize) -> Result<()> {
        self.extend_to(n)?;
        while self.last_index() < n {
            self.record()?;
        }
        Ok(())
    }

    /// Index of the last stored entry.
    pub fn last_index(&self) -> usize {
        self.residuals.len() - 1
    }

    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }

    /// Stored iterates, up to the point cap.
    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn fix_distances(&self) -> &[f64] {
        &self.fix_distances
    }

    pub fn schedule_used(&self) -> &StepSchedule {
        &self.schedule
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn map(&self) -> &Map {
        &self.map
    }

    /// First index from which every iterate is identical, if detected.
    pub fn stationary_from(&self) -> Option<usize> {
        self.stationary_from
    }

    /// `‖x_n − Tx_n‖`, including indices in a detected stationary tail.
    pub fn residual_at(&self, n: usize) -> Option<f64> {
        match self.residuals.get(n) {
            Some(&r) => Some(r),
            None => self.stationary_from.map(|_| *self.residuals.last().expect("nonempty")),
        }
    }

    pub fn fix_distance_at(&self, n: usize) -> Option<f64> {
        match self.fix_distances.get(n) {
            Some(&r) => Some(r),
            None => self
                .stationary_from
                .map(|_| *self.fix_distances.last().expect("nonempty")),
        }
    }

    /// Largest increase `‖x_{n+1} − p‖ − ‖x_n − p‖` (≤ 0 for a Fejér
    /// monotone trajectory).
    pub fn fejer_violation(&self) -> f64 {
        self.fix_distances
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn bit_equal(a: &Vector, b: &Vector) -> bool {
    a.coords()
        .iter()
        .zip(b.coords())
        .all(|(x, y)| x.to_bits() == y.to_bits())
}

fn check_compatible(instance: &PseudocontractionInstance, schedule: &StepSchedule) -> Result<()> {
    let space_d = instance.space().d();
    if schedule.series() != SeriesKind::Strict || schedule.k() < instance.k() || schedule.d() < space_d {
        return Err(Error::ScheduleMismatch {
            schedule_k: schedule.k(),
            schedule_d: schedule.d(),
            operator_k: instance.k(),
            space_d,
        });
    }
    Ok(())
}

/// Runs `n_max` Mann steps of a `k`-strict pseudocontraction. The schedule
/// must be a strict schedule whose `(k, d)` are at least the instance's.
pub fn mann_iterate(
    instance: &PseudocontractionInstance,
    x0: &Vector,
    schedule: &StepSchedule,
    n_max: usize,
) -> Result<Trajectory> {
    check_compatible(instance, schedule)?;
    let mut t = Trajectory::start(
        instance.space(),
        instance.map(),
        instance.known_fixed_point(),
        x0,
        schedule,
    )?;
    t.fill_to(n_max)?;
    Ok(t)
}

/// Runs `n_max` Mann steps of an arbitrary map under any schedule; used for
/// nonexpansive maps such as `T_{(1−k)/d}`.
pub fn mann_iterate_map(
    space: &Space,
    map: &Map,
    fixed_point: &Vector,
    x0: &Vector,
    schedule: &StepSchedule,
    n_max: usize,
) -> Result<Trajectory> {
    let mut t = Trajectory::start(space, map, fixed_point, x0, schedule)?;
    t.fill_to(n_max)?;
    Ok(t)
}

/// `t'_n = t_n · d/(1−k)`: the steps under which the Mann iteration of
/// `T_{(1−k)/d}` reproduces the Mann iteration of `T` under `t_n`.
pub fn reparameterize(schedule: &StepSchedule, k: f64, d: f64) -> Result<StepSchedule> {
    if schedule.series() != SeriesKind::Strict {
        return Err(Error::Unsupported("only strict schedules can be reparameterized"));
    }
    if !(0.0..1.0).contains(&k) || !(d.is_finite() && d >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "k/d",
            value: k,
            reason: "need k in [0, 1) and d >= 1",
        });
    }
    let bound = (1.0 - k) / d;
    if bound > schedule.bound() {
        return Err(Error::ScheduleMismatch {
            schedule_k: schedule.k(),
            schedule_d: schedule.d(),
            operator_k: k,
            space_d: d,
        });
    }
    let factor = d / (1.0 - k);
    StepSchedule::build(
        schedule.kind().clone(),
        schedule.scale() * factor,
        schedule.k(),
        schedule.d(),
        SeriesKind::Nonexpansive,
    )
}

/// Largest discrepancies between the two descriptions of one iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub steps: usize,
    /// `max_n ‖x_n − x'_n‖` between the direct and reparameterized runs.
    pub max_point_deviation: f64,
    /// `max_n |‖x_n − T_s x_n‖ − s·‖x_n − Tx_n‖|` with `s = (1−k)/d`.
    pub max_residual_identity_deficit: f64,
}

impl EquivalenceReport {
    pub fn max_deviation(&self) -> f64 {
        self.max_point_deviation.max(self.max_residual_identity_deficit)
    }
}

/// Runs `T` under `(t_n)` and `T_{(1−k)/d}` under `(t'_n)` from the same
/// start and compares them step by step.
pub fn check_equivalence(
    instance: &PseudocontractionInstance,
    x0: &Vector,
    schedule: &StepSchedule,
    n_max: usize,
) -> Result<EquivalenceReport> {
    let direct = mann_iterate(instance, x0, schedule, n_max)?;
    let (k, d) = (schedule.k(), schedule.d());
    let s = (1.0 - k) / d;
    let averaged = instance.averaged(s)?;
    let primed = reparameterize(schedule, k, d)?;
    let space = instance.space();
    let other = mann_iterate_map(space, &averaged, instance.known_fixed_point(), x0, &primed, n_max)?;

    let mut report = EquivalenceReport {
        steps: n_max,
        max_point_deviation: 0.0,
        max_residual_identity_deficit: 0.0,
    };
    for (a, b) in direct.points().iter().zip(other.points()) {
        report.max_point_deviation = report.max_point_deviation.max(space.norm_unchecked(&(a - b)));
        let lhs = space.norm_unchecked(&(a - &averaged.apply(a)));
        let rhs = s * space.norm_unchecked(&(a - &instance.apply(a)));
        report.max_residual_identity_deficit = report.max_residual_identity_deficit.max((lhs - rhs).abs());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{catalog, scaled_negation};
    use crate::rates::{Generator, ScheduleKind};

    fn neg2() -> PseudocontractionInstance {
        scaled_negation(2.0, &Space::hilbert(1).unwrap()).unwrap()
    }

    fn constant(a: f64, k: f64, d: f64) -> StepSchedule {
        StepSchedule::strict(ScheduleKind::Constant { a }, k, d).unwrap()
    }

    fn one() -> Vector {
        Vector::new(vec![1.0]).unwrap()
    }

    #[test]
    fn third_step_hits_zero() {
        let t = mann_iterate(&neg2(), &one(), &constant(1.0 / 3.0, 1.0 / 3.0, 1.0), 5).unwrap();
        assert_eq!(t.points()[1].coords(), &[0.0]);
        assert!(t.residuals()[1..].iter().all(|&r| r == 0.0));
        assert_eq!(t.len(), 6);
        assert_eq!(t.stationary_from(), Some(1));
    }

    #[test]
    fn sixth_step_halves() {
        let t = mann_iterate(&neg2(), &one(), &constant(1.0 / 6.0, 1.0 / 3.0, 1.0), 60).unwrap();
        for n in 0..=60 {
            let expect = 0.5f64.powi(n as i32);
            assert_eq!(t.points()[n].coords()[0], expect);
            assert_eq!(t.residuals()[n], 3.0 * expect);
        }
    }

    #[test]
    fn fixed_point_start_is_constant() {
        let p = Vector::zeros(1);
        let t = mann_iterate(&neg2(), &p, &constant(1.0 / 6.0, 1.0 / 3.0, 1.0), 10).unwrap();
        assert!(t.residuals().iter().all(|&r| r == 0.0));
        assert_eq!(t.stationary_from(), Some(0));
        assert_eq!(t.residual_at(1 << 40), Some(0.0));
    }

    #[test]
    fn underflowing_trajectory_becomes_stationary() {
        let mut t = mann_iterate(&neg2(), &one(), &constant(1.0 / 6.0, 1.0 / 3.0, 1.0), 10).unwrap();
        t.extend_to(5000).unwrap();
        let from = t.stationary_from().expect("stationary");
        assert!(from < 1200);
        assert!(t.residual_at(10_000_000_000).unwrap() <= 1e-300);
    }

    #[test]
    fn rejects_out_of_range_schedule() {
        assert!(StepSchedule::strict(ScheduleKind::Constant { a: 0.9 }, 1.0 / 3.0, 1.0).is_err());
        // a schedule built for a smaller k does not fit the instance
        let loose = constant(0.8, 0.0, 1.0);
        assert!(matches!(
            mann_iterate(&neg2(), &one(), &loose, 5),
            Err(Error::ScheduleMismatch { .. })
        ));
        let late = Generator::new("late", |n| if n < 4 { 0.1 } else { 0.7 });
        let lazy = StepSchedule::strict(ScheduleKind::Generator(late), 1.0 / 3.0, 1.0).unwrap();
        assert!(matches!(
            mann_iterate(&neg2(), &one(), &lazy, 10),
            Err(Error::StepOutOfRange { index: 4, .. })
        ));
    }

    #[test]
    fn reparameterize_examples() {
        let s = constant(0.3, 0.0, 1.0);
        let same = reparameterize(&s, 0.0, 1.0).unwrap();
        assert_eq!(same.step(7), 0.3);
        assert_eq!(same.series(), SeriesKind::Nonexpansive);
        let s = constant(1.0 / 6.0, 1.0 / 3.0, 1.0);
        assert!((reparameterize(&s, 1.0 / 3.0, 1.0).unwrap().step(0) - 0.25).abs() < 1e-16);
        let s = StepSchedule::strict(ScheduleKind::HarmonicCapped { a: 0.5, cap: 0.1 }, 8.0 / 9.0, 1.0).unwrap();
        let r = reparameterize(&s, 8.0 / 9.0, 1.0).unwrap();
        for n in 0..100 {
            let t = r.step(n);
            assert!(t > 0.0 && t < 1.0);
        }
        assert!(reparameterize(&r, 0.0, 1.0).is_err());
    }

    #[test]
    fn equivalence_on_negation() {
        let rep = check_equivalence(&neg2(), &one(), &constant(1.0 / 6.0, 1.0 / 3.0, 1.0), 100).unwrap();
        assert!(rep.max_deviation() <= 1e-12);
        let rep = check_equivalence(&neg2(), &Vector::zeros(1), &constant(1.0 / 6.0, 1.0 / 3.0, 1.0), 10).unwrap();
        assert_eq!(rep.max_deviation(), 0.0);
    }

    #[test]
    fn residual_identity_at_start() {
        let t = neg2();
        let avg = t.averaged(2.0 / 3.0).unwrap();
        let x = one();
        let h = t.space();
        let lhs = h.norm(&(&x - &avg.apply(&x))).unwrap();
        assert!((lhs - 2.0).abs() < 1e-15);
        assert!((lhs - (2.0 / 3.0) * h.norm(&(&x - &t.apply(&x))).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn residuals_recompute_and_fejer() {
        for inst in catalog().unwrap() {
            let space = inst.space();
            let x0 = Vector::new(vec![3.0; space.dim()]).unwrap();
            let a = 0.5 * inst.max_nonexpansive_t();
            let sched = constant(a, inst.k(), space.d());
            let t = mann_iterate(&inst, &x0, &sched, 200).unwrap();
            for (x, &r) in t.points().iter().zip(t.residuals()) {
                let again = space.norm(&(x - &inst.apply(x))).unwrap();
                assert!((again - r).abs() <= 1e-12);
            }
            assert!(t.fejer_violation() <= 1e-9, "{}", inst.label());
            assert!(t.residuals()[200] <= t.residuals()[0]);
        }
    }
}
