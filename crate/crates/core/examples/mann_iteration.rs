//! Mann iterates of `T = −2·id` with constant steps `t = 1/6`.
//!
//! Each step halves the iterate, so the residual is `3·2^{−n}` and the
//! distance to the fixed point decreases monotonically. The same iterates
//! come out of the averaged operator with the rescaled schedule.

use mann_rates::iteration::{check_equivalence, mann_iterate};
use mann_rates::operators::scaled_negation;
use mann_rates::rates::{ScheduleKind, StepSchedule};
use mann_rates::spaces::{Space, Vector};

fn main() -> mann_rates::Result<()> {
    let space = Space::hilbert(1)?;
    let t = scaled_negation(2.0, &space)?;
    let schedule = StepSchedule::strict(ScheduleKind::Constant { a: 1.0 / 6.0 }, t.k(), space.d())?;
    let x0 = Vector::new(vec![1.0])?;

    let traj = mann_iterate(&t, &x0, &schedule, 40)?;
    for n in (0..=40).step_by(5) {
        println!(
            "n = {n:>2}  x = {:<24e} residual = {:<24e} |x - p| = {:e}",
            traj.points()[n].coords()[0],
            traj.residuals()[n],
            traj.fix_distances()[n]
        );
    }
    println!("fejer violation: {:e}", traj.fejer_violation());

    let eq = check_equivalence(&t, &x0, &schedule, 1000)?;
    println!(
        "equivalence over {} steps: point deviation {:e}, residual identity deficit {:e}",
        eq.steps, eq.max_point_deviation, eq.max_residual_identity_deficit
    );
    Ok(())
}
