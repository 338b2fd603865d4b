//! Recovers the Hilbert modulus of smoothness from the modulus of convexity
//! of the dual through `ρ(τ) = sup_ε (τε/2 − δ*(ε))` and compares it with
//! the sampled estimate and the closed form `√(1+τ²) − 1`.

use mann_rates::moduli::{estimate_rho, hilbert_delta, hilbert_rho, lindenstrauss_check};
use mann_rates::spaces::Space;

fn main() -> mann_rates::Result<()> {
    let space = Space::hilbert(4)?;
    println!(
        "{:>5} {:>12} {:>12} {:>12}",
        "tau", "dual sup", "sampled", "closed form"
    );
    for tau in [0.1, 0.25, 0.5, 1.0, 2.0] {
        let l = lindenstrauss_check(tau, hilbert_delta, 1e-4)?;
        let r = estimate_rho(&space, tau, 10_000, 0)?;
        println!("{tau:>5} {l:>12.8} {:>12.8} {:>12.8}", r.value, hilbert_rho(tau));
    }
    Ok(())
}
