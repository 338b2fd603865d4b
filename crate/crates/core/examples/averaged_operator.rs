//! A `k`-strict pseudocontraction becomes nonexpansive after averaging with
//! the identity, `T_t = tT + (1 − t)id`, as long as `t ≤ (1 − k)/d`.
//! The threshold is sufficient, not sharp: for `−c·id` the map turns
//! expansive right after it, other instances stay nonexpansive longer.

use mann_rates::operators::{catalog, check_nonexpansive, ValidationBudget};

fn main() -> mann_rates::Result<()> {
    let budget = ValidationBudget::default().with_pairs(20_000);
    for inst in catalog()? {
        let t_max = inst.max_nonexpansive_t();
        print!("{:<40} k = {:<8.5} t_max = {:<8.5}", inst.label(), inst.k(), t_max);
        for t in [t_max, (1.5 * t_max).min(1.0)] {
            let r = check_nonexpansive(inst.space(), &inst.averaged(t)?, &budget);
            print!("  t = {t:.4}: {}", if r.pass { "nonexpansive" } else { "expansive" });
        }
        println!();
    }
    Ok(())
}
