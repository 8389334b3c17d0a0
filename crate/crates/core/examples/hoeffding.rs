// Hoeffding's bound 2exp(-2t²/Σ(b_i - a_i)²) against simulated Rademacher
// sums.

use ergolab::convergence::{hoeffding_bound, hoeffding_empirical};

pub fn run_example() -> ergolab::Result<()> {
    let b = hoeffding_bound(&[0.0], &[1.0], 1.0)?;
    println!("one variable in [0, 1], t = 1: bound {:.6}", b.value);
    println!("{:>5} {:>7} {:>10} {:>10} {:>8}", "n", "t", "bound", "observed", "holds");
    for (k, &(n, t)) in [(10, 4.0), (50, 10.0), (100, 20.0), (400, 30.0)].iter().enumerate() {
        let c = hoeffding_empirical(n, t, 50_000, k as u64)?;
        println!(
            "{n:>5} {t:>7} {:>10.5} {:>10.5} {:>8}",
            c.bound, c.empirical, c.holds
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ergolab::Result<()> {
    run_example()
}
