// A continuous function of a Bernoulli shift point, replaced by its
// conditional expectation on a finite partition. The approximation splits
// into 2n strided sequences that are IID, which carries complete
// convergence over from the IID case.

use ergolab::convergence::cofb_decomposition_scan;
use ergolab::observables::{EncodedContinuousObservable, RealFunction};
use ergolab::systems::ShiftSystem;

pub fn run_example() -> ergolab::Result<()> {
    let shift = ShiftSystem::uniform(2, 21)?;
    let f = EncodedContinuousObservable::new(RealFunction::Polynomial(vec![0.0, 0.0, 1.0]), 8)?;
    let lengths: Vec<u64> = (1..=60).map(|n| 4 * n).collect();
    let (scan, report) = cofb_decomposition_scan(&shift, &f, 4, &lengths, &[0.2, 0.4], 1000, 5, 1 << 22)?;
    println!(
        "level {}: mean {:.5}, |f - E(f|P_n)| <= {:.4} (observed {:.4})",
        report.level, report.mean, report.approx_error_bound, report.approx_error_observed
    );
    println!(
        "strided copies: max |corr| {:.4} (threshold {:.4})",
        report.stride_max_abs_correlation, report.correlation_threshold
    );
    for b in &report.bound_chain {
        println!(
            "δ = {}: direct {:.3}, conditional {:.3}, strided {:.3}",
            b.delta, b.direct, b.conditional, b.strided
        );
    }
    for (d, delta) in scan.deltas.iter().enumerate() {
        println!("δ = {delta}: {}", scan.diagnostics[d].verdict.as_str());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ergolab::Result<()> {
    run_example()
}
