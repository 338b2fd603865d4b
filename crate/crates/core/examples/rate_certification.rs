//! Certifies the four rates of asymptotic regularity on `T = −2·id`
//! (`k = 1/3`, `d = 1`) with `t_n ≡ 1/6` and `b = 1`.
//!
//! `h1`/`h2` run on the averaged operator with the rescaled schedule,
//! `h3`/`h4` on `T` itself. Predicted indices go up to ~4·10⁹; the run stays
//! cheap because the iterates become exactly stationary.

use mann_rates::operators::scaled_negation;
use mann_rates::rates::{certify_instance, CertifyOptions, RateVariant, ScheduleKind, StepSchedule};
use mann_rates::spaces::{Space, Vector};

fn main() -> mann_rates::Result<()> {
    let space = Space::hilbert(1)?;
    let t = scaled_negation(2.0, &space)?;
    let schedule = StepSchedule::strict(ScheduleKind::Constant { a: 1.0 / 6.0 }, t.k(), space.d())?;
    let x0 = Vector::new(vec![1.0])?;
    let eps = [0.5, 0.1, 0.01];

    println!("theta(32) = {}", schedule.theta(32)?);
    for variant in [RateVariant::H1, RateVariant::H2, RateVariant::H3, RateVariant::H4] {
        let run = certify_instance(
            &t,
            &x0,
            &schedule,
            2000,
            variant,
            &eps,
            Some(1.0),
            &CertifyOptions::default(),
        )?;
        for c in &run.certificates {
            println!(
                "{variant} eps = {:<5} h = {:<12} max residual beyond = {:<10e} {:?}",
                c.epsilon, c.predicted_index, c.max_residual_beyond, c.status
            );
        }
    }
    Ok(())
}
