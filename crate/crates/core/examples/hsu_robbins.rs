// Complete convergence for IID sums: Σ P(|S_n/n| >= δ) is finite when the
// variance is. Exact binomial sums for Rademacher variables, Monte Carlo
// for the rest.

use ergolab::convergence::{iid_exceedance_scan, rademacher_exceedance_exact, IidDistribution, IidSampler};

pub fn run_example() -> ergolab::Result<()> {
    let lengths: Vec<u64> = (1..=200).collect();
    let rademacher = IidSampler::new(IidDistribution::Rademacher, 1)?;
    let exact = iid_exceedance_scan(&rademacher, &lengths, &[0.25, 0.5, 1.0], 1, true)?;
    for (d, delta) in exact.deltas.iter().enumerate() {
        let g = exact.diagnostics[d];
        println!(
            "rademacher δ={delta:<5} Σ = {:.6}  slope {:.3}  {}",
            exact.final_sum(d),
            g.slope,
            g.verdict.as_str()
        );
    }
    println!("P(|S_20| = 20) = {:.3e}", rademacher_exceedance_exact(20, 1.0));

    let short: Vec<u64> = (1..=500).collect();
    for dist in [
        IidDistribution::UniformCentered,
        IidDistribution::ParetoCentered { alpha: 3.0 },
        IidDistribution::ParetoCentered { alpha: 1.5 },
    ] {
        let name = format!("{dist:?}");
        let s = IidSampler::new(dist, 2)?;
        let scan = iid_exceedance_scan(&s, &short, &[0.5], 2000, false)?;
        let g = scan.diagnostics[0];
        println!(
            "{name:<38} Σ = {:8.3} ± {:.3}  slope {:.3}  {}",
            scan.final_sum(0),
            scan.partial_sum_stderrs[0][short.len() - 1],
            g.slope,
            g.verdict.as_str()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ergolab::Result<()> {
    run_example()
}
