// Heavy tails break complete convergence: with a finite mean but infinite
// variance, averages over disjoint consecutive blocks are independent and
// exceed 1 infinitely often.

use ergolab::convergence::{erdos_block_demo, iid_exceedance_scan, IidDistribution, IidSampler};

pub fn run_example() -> ergolab::Result<()> {
    let s = IidSampler::new(IidDistribution::ParetoCentered { alpha: 1.5 }, 3)?;
    let report = erdos_block_demo(&s, 400, 2000)?;
    println!(
        "blocks disjoint: {}, max |corr| of neighbours {:.4} (threshold {:.4})",
        report.disjoint, report.max_abs_correlation, report.correlation_threshold
    );
    for n in [10, 50, 100, 200, 400] {
        println!(
            "mean number of n' <= {n:<3} with |block average| > 1: {:.3}",
            report.mean_count_by_n[n - 1]
        );
    }

    let linear: Vec<u64> = (1..=2000).collect();
    let square: Vec<u64> = (1..=2000u64).map(|n| n * n).collect();
    for (name, lengths) in [("L_n = n", &linear), ("L_n = n²", &square)] {
        let scan = iid_exceedance_scan(&s, lengths, &[1.0], 2000, false)?;
        let g = scan.diagnostics[0];
        println!(
            "{name:<9} Σ P(|M| >= 1) = {:7.3}  slope {:.3}  {}",
            scan.final_sum(0),
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
