// A function in L^p with heavy peaks on a long cycle, and a window scheme
// with L_n >= n^{1/(p-1)} along which most points see a large average.

use ergolab::adversary::{run_bad_function, BadFunctionSetup};
use ergolab::observables::{FpFamily, GrowthFamily, MassRule};

pub fn run_example() -> ergolab::Result<()> {
    let setup = BadFunctionSetup {
        size: 200_000,
        step: 1,
        family: FpFamily {
            growth: GrowthFamily::Exponential { rate: 1.0 },
            masses: MassRule::Critical,
        },
        p: 2.0,
        target: 0.5,
        n_max: 6,
        level: 6,
        eta: 0.5,
        window_cap: None,
        points: 1000,
        seed: 12,
    };
    let (report, scheme) = run_bad_function(&setup)?;
    println!("peak a_n = {:.1} on {:.2e} of the cycle", report.a_n, report.peak_mass);
    println!(
        "windows of length {}..={} with mean > {}: start set has mass {:.3}",
        report.min_window, report.max_window, report.eta, report.bad_mass
    );
    println!(
        "backward stopping: {} of {} peak points stopped, Vitali keeps {} interval(s) of mass {:.3}",
        report.stopping.stopped,
        report.stopping.peak_points,
        report.stopping.selected,
        report.stopping.selected_mass
    );
    println!(
        "cover: {} shifts, leftover {:?}",
        report.cover.shifts.len(),
        report.cover.leftover
    );
    println!(
        "scheme: τ = {}, {} classes, {} pairs, first {:?}, last {:?}",
        report.tau,
        report.classes,
        scheme.len(),
        scheme.pairs().first(),
        scheme.pairs().last()
    );
    let lim = &report.limsup;
    println!(
        "share of points with a scheme average >= {}: {:.3}",
        lim.threshold, lim.fraction_above
    );
    for (q, v) in &lim.quantiles {
        println!("  quantile {q:.2} of the maximal average: {v:.3}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ergolab::Result<()> {
    run_example()
}
