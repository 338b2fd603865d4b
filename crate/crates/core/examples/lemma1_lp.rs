//! Sampling check of the duality-map inequality
//! `‖x+y‖² ≤ ‖x‖² + 2⟨y, j(x)⟩ + d‖y‖²` on ℓ₄⁵.
//!
//! With `d = p − 1 = 3` no pair violates it; with `d = 1` the search
//! returns a concrete witness pair.

use mann_rates::moduli::check_lemma1_ii;
use mann_rates::spaces::Space;

fn main() -> mann_rates::Result<()> {
    let space = Space::lp(5, 4.0)?;
    for d in [3.0, 2.0, 1.0] {
        let r = check_lemma1_ii(&space, d, 100_000, 0)?;
        println!(
            "d = {d}: pass = {}, pairs = {}, max violation = {:e}",
            r.pass, r.pairs_checked, r.max_violation
        );
        if let Some(w) = &r.witness {
            println!(
                "  witness x = {}\n          y = {}\n  excess {:e}",
                w.x, w.y, w.violation
            );
        }
    }
    Ok(())
}
