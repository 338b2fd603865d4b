//! Sampled moduli of smoothness and convexity in ℓ₂³ and ℓ₄³ next to the
//! declared bounds `ρ(τ) ≤ cτ²` and `δ(ε) ≥ η(ε)`.

use mann_rates::moduli::{estimate_delta, estimate_rho, hilbert_delta, hilbert_rho};
use mann_rates::spaces::Space;

fn main() -> mann_rates::Result<()> {
    for space in [Space::hilbert(3)?, Space::lp(3, 4.0)?] {
        println!("{:?} (c = {}, eta = {:?})", space.kind(), space.c(), space.eta());
        for tau in [0.1, 0.5, 1.0] {
            let r = estimate_rho(&space, tau, 10_000, 0)?;
            let exact = if space.is_hilbert() {
                format!("{:.6}", hilbert_rho(tau))
            } else {
                "-".into()
            };
            println!(
                "  rho({tau}) >= {:.6}  c*tau^2 = {:.6}  exact = {exact}",
                r.value,
                space.c() * tau * tau
            );
        }
        for eps in [0.5, 1.0, 1.5, 2.0] {
            let d = estimate_delta(&space, eps, 10_000, 0)?;
            let exact = if space.is_hilbert() {
                format!("{:.6}", hilbert_delta(eps))
            } else {
                "-".into()
            };
            println!(
                "  delta({eps}) <= {:.6}  eta = {:.6}  exact = {exact}",
                d.value,
                space.eta().eval(eps)
            );
        }
    }
    Ok(())
}
