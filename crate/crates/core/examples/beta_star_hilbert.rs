//! In a Hilbert space the moduli of the duality map satisfy `β*(x, t) = t`
//! for every base point. In ℓ₄ the same estimator stays below `d·t` with
//! `d = p − 1`.

use mann_rates::moduli::estimate_beta_star;
use mann_rates::spaces::{Space, Vector};

fn main() -> mann_rates::Result<()> {
    let h = Space::hilbert(10)?;
    let l4 = Space::lp(10, 4.0)?;
    let x = Vector::new((0..10).map(|i| (i as f64 - 4.5) / 3.0).collect())?;

    println!("{:>6} {:>14} {:>14} {:>10}", "t", "hilbert", "l4", "d*t (l4)");
    for t in [0.0, 0.01, 0.1, 0.5, 1.0, 2.0] {
        let bh = estimate_beta_star(&h, &x, t, 2000, 0)?;
        let bl = estimate_beta_star(&l4, &x, t, 2000, 0)?;
        println!("{t:>6} {:>14.10} {:>14.10} {:>10.4}", bh.value, bl.value, l4.d() * t);
    }
    Ok(())
}
