// Translates of small random sets, chosen greedily, cover a cycle with
// leftover at most Π (1 - μ(E_k)).

use ergolab::adversary::greedy_cover;
use ergolab::systems::CyclicSystem;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> ergolab::Result<()> {
    let n = 1u64 << 14;
    let c = CyclicSystem::new(n, 5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sets: Vec<Vec<u64>> = [0.05, 0.2, 0.1]
        .iter()
        .map(|m| {
            let k = (m * n as f64) as usize;
            let mut s: Vec<u64> = index::sample(&mut rng, n as usize, k).into_iter().map(|i| i as u64).collect();
            s.sort_unstable();
            s
        })
        .collect();
    let plan = greedy_cover(&c, &sets, 15)?;
    println!("{:>4} {:>8} {:>10} {:>10}", "step", "shift", "leftover", "Π(1-μ)");
    for k in 0..plan.shifts.len() {
        println!(
            "{:>4} {:>8} {:>10.5} {:>10.5}",
            k + 1,
            plan.shifts[k],
            plan.leftover[k],
            plan.product_bound[k]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ergolab::Result<()> {
    run_example()
}
