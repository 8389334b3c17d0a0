// Rates of convergence on a cycle: f - A_n f is always a coboundary, the
// rate is controlled by the transfer function, and the L¹ norms of the
// averages cannot decay faster than the harmonic series allows.

use ergolab::averaging::{cesaro_l1_profile, harmonic_divergence_check, rate_over_check, rate_under_transfer};
use ergolab::observables::{Observable, StepObservable};
use ergolab::systems::{CyclicSystem, System};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> ergolab::Result<()> {
    let size = 512;
    let system = System::from(CyclicSystem::new(size, 3)?);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut v: Vec<f64> = (0..size).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = v.iter().sum::<f64>() / size as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    let f = Observable::Step(StepObservable::new(v));

    println!("{:>5} {:>12} {:>12} {:>12}", "n", "identity", "‖A_n f‖₂", "bound");
    for n in [1, 4, 16, 64, 256] {
        let under = rate_under_transfer(&system, &f, n)?;
        let over = rate_over_check(&system, &f, &Observable::Step(under.h), 2.0, n)?;
        println!(
            "{n:>5} {:>12.2e} {:>12.5} {:>12.5}",
            under.identity_error, over.lhs, over.rhs
        );
    }

    let l1 = cesaro_l1_profile(&system, &f, 1000)?;
    println!("‖A_n f‖₁ at n = 10, 100, 1000: {:.5} {:.5} {:.5}", l1[9], l1[99], l1[999]);
    let h = harmonic_divergence_check(&system, &f, 1000)?;
    println!("Σ ‖f‖₁/(n+1) = {:.4} <= 3 Σ ‖M(0,n)f‖₁ = {:.4}: {}", h.lhs, h.rhs, h.holds);
    Ok(())
}

#[allow(dead_code)]
fn main() -> ergolab::Result<()> {
    run_example()
}
