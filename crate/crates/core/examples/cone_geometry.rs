// Cone cross-sections: which window schemes keep C(λ)/λ bounded, how to
// pick offsets that break the bound, and how to thin a bad scheme into a
// good one.

use ergolab::averaging::{SchemeFamily, WindowScheme};
use ergolab::cone::{cones_of, failing_offsets, good_subsequence, max_ratio_closed, ratio_profile, LambdaGrid};

pub fn run_example() -> ergolab::Result<()> {
    for (family, n_max) in [
        (SchemeFamily::Quadratic, 100),
        (SchemeFamily::Triangular, 100),
        (SchemeFamily::Hyperlacunary, 4),
    ] {
        let scheme = WindowScheme::new(family.clone(), n_max)?;
        let p = ratio_profile(&scheme, n_max as usize, &LambdaGrid::default())?;
        println!(
            "{family:<14} n_max={n_max:<4} max C(λ)/λ = {:8.3} at λ = {:<10} {}",
            p.max_ratio,
            p.witness_lambda,
            p.verdict.as_str()
        );
    }

    // Doubling lengths satisfy the bound with zero offsets, but offsets can
    // be chosen to push the ratio past any target.
    let lengths: Vec<u64> = (1..=20).map(|n| 1u64 << n).collect();
    let f = failing_offsets(&lengths, 5.0)?;
    println!(
        "L_n = 2^n with adversarial offsets: C(λ)/λ = {:.3} at λ = {}",
        f.achieved_ratio, f.witness_lambda
    );

    let q = WindowScheme::new(SchemeFamily::Quadratic, 200)?;
    let kept = good_subsequence(&q, 4.0, 200)?;
    let cones: Vec<_> = kept.iter().map(|&n| cones_of(&q)[n - 1]).collect();
    println!(
        "greedy subsequence of (n², n) with ratio <= 4: n in {kept:?}, closed max {:.3}",
        max_ratio_closed(&cones)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> ergolab::Result<()> {
    run_example()
}
