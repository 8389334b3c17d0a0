// Averages of a coboundary g - g∘T collapse to (g(T^{v+1}x) - g(T^{v+L+1}x))/L,
// so they vanish at rate 1/L along any window scheme.

use ergolab::averaging::{moving_average, telescoped_average, SchemeFamily, WindowScheme};
use ergolab::observables::{coboundary_from_transfer, CylinderObservable, TransferSpec};
use ergolab::systems::{ShiftSystem, System};

pub fn run_example() -> ergolab::Result<()> {
    let shift = ShiftSystem::uniform(2, 42)?;
    // g reads x_{-1} x_0 x_1 as a binary number.
    let g = CylinderObservable::from_fn(2, 1, |w| (w[0] * 4 + w[1] * 2 + w[2]) as f64 / 7.0)?;
    let g = TransferSpec::Cylinder(g);
    let system = System::from(shift);
    let f = coboundary_from_transfer(&g, &system)?;

    let scheme = WindowScheme::new(SchemeFamily::Lacunary, 16)?;
    println!("{:>11} {:>8} {:>12} {:>12} {:>10}", "v", "L", "M(v,L)f", "telescoped", "2|g|/L");
    for t in 0..3 {
        let x = system.sample_point(7, t);
        for &(v, len) in scheme.pairs().iter().step_by(5) {
            let a = moving_average(&system, &f, &x, v, len)?;
            let b = telescoped_average(&system, &g, &x, v, len)?;
            println!(
                "{v:>11} {len:>8} {a:>12.3e} {b:>12.3e} {:>10.3e}",
                2.0 * g.sup_norm() / len as f64
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ergolab::Result<()> {
    run_example()
}
