//! The constant `d_c` from the chain α → k₁ → k₂ for a few smoothness
//! constants `c`. For the Hilbert value `c = 1/2` the chain gives 64.

use mann_rates::moduli::{compute_dc, ALPHA};

fn main() -> mann_rates::Result<()> {
    println!("alpha = 2 - sqrt(2) = {ALPHA}");
    println!("{:>8} {:>12} {:>12} {:>10}", "c", "k1", "k2", "d_c");
    for c in [0.01, 0.1, 0.5, 1.0, 1.5, 4.0] {
        let b = compute_dc(c)?;
        println!("{:>8} {:>12.6} {:>12.6} {:>10.4}", b.c, b.k1, b.k2, b.dc);
    }
    Ok(())
}
