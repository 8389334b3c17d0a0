//! Exact norm identities and inequalities on cycles, with `A_n = M(0, n)`.

use super::{lr_norm, orbit_order, CycleSums};
use crate::error::{Error, Result};
use crate::observables::{neumaier_sum, Observable, StepObservable};
use crate::systems::System;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `A_n f` at every point, indexed by point.
fn averages_by_point(system: &System, values: &[f64], n: u64) -> Result<Vec<f64>> {
    let c = system.as_cyclic()?;
    let sums = CycleSums::new(c, values);
    let by_pos = sums.averages(0, n);
    let mut out = vec![0.0; values.len()];
    for (q, a) in by_pos.into_iter().enumerate() {
        out[c.apply(0, q as i64) as usize] = a;
    }
    Ok(out)
}

/// `g - g∘T` at every point.
fn coboundary_values(system: &System, g: &[f64]) -> Result<Vec<f64>> {
    let c = system.as_cyclic()?;
    Ok((0..c.size())
        .map(|x| g[x as usize] - g[c.apply(x, 1) as usize])
        .collect())
}

/// `‖A_n f‖_r ≤ ‖A_n (f - (H - H∘T))‖_r + 2‖H‖_r / n`, both sides exact.
pub fn rate_over_check(
    system: &System,
    f: &Observable,
    h: &Observable,
    r: f64,
    n: u64,
) -> Result<InequalityCheck> {
    if !(r >= 1.0) {
        return Err(Error::invalid(format!("norm exponent {r} must be at least 1")));
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let fv = f.cyclic_values(system)?;
    let hv = h.cyclic_values(system)?;
    let cob = coboundary_values(system, &hv)?;
    let rest: Vec<f64> = fv.iter().zip(&cob).map(|(a, b)| a - b).collect();
    let lhs = lr_norm(&averages_by_point(system, &fv, n)?, r);
    let rhs = lr_norm(&averages_by_point(system, &rest, n)?, r) + 2.0 * lr_norm(&hv, r) / n as f64;
    Ok(InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-10,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateUnder {
    pub h: StepObservable,
    /// `max_x |(f - A_n f)(x) - (H - H∘T)(x)|`.
    pub identity_error: f64,
}

/// The transfer function `H` with `f - A_n f = H - H∘T`, where
/// `A_n = M(0, n)`, i.e. `A_n f = (1/n) Σ_{i=1}^{n} f∘T^i`.
///
/// With `S_k = Σ_{j=0}^{k-1} f∘T^j` (so `S_0 = 0`),
/// `H = (1/n) Σ_{k=1}^{n} S_k = (1/n) Σ_{j=0}^{n-1} (n - j) f∘T^j`.
/// For `n = 1` this is `H = f`. The identity is checked pointwise and the
/// largest residual is returned with `H`.
pub fn rate_under_transfer(system: &System, f: &Observable, n: u64) -> Result<RateUnder> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let c = system.as_cyclic()?;
    let fv = f.cyclic_values(system)?;
    let size = c.size() as usize;
    let orbit = orbit_order(c, &fv);
    let sums = CycleSums::new(c, &fv);
    // H at orbit position q, accumulated as the mean of S_1..S_n.
    let mut h_orbit = vec![0.0; size];
    for (q, slot) in h_orbit.iter_mut().enumerate() {
        let terms = (1..=n).map(|k| sums.window_sum_at(q as u64, 0, k));
        *slot = neumaier_sum(terms) / n as f64;
    }
    let a_n = sums.averages(0, n);
    let mut identity_error: f64 = 0.0;
    for q in 0..size {
        let lhs = orbit[q] - a_n[q];
        let rhs = h_orbit[q] - h_orbit[(q + 1) % size];
        identity_error = identity_error.max((lhs - rhs).abs());
    }
    let mut h = vec![0.0; size];
    for (q, v) in h_orbit.into_iter().enumerate() {
        h[c.apply(0, q as i64) as usize] = v;
    }
    Ok(RateUnder {
        h: StepObservable::new(h),
        identity_error,
    })
}

/// `Σ_{n=1}^{N} ‖f‖_1/(n+1) ≤ 3 Σ_{n=1}^{N+1} ‖M(0,n) f‖_1`, both sides exact.
pub fn harmonic_divergence_check(
    system: &System,
    f: &Observable,
    n_max: u64,
) -> Result<InequalityCheck> {
    let c = system.as_cyclic()?;
    let fv = f.cyclic_values(system)?;
    let l1 = lr_norm(&fv, 1.0);
    let lhs = neumaier_sum((1..=n_max).map(|n| l1 / (n + 1) as f64));
    let sums = CycleSums::new(c, &fv);
    let rhs = 3.0 * neumaier_sum((1..=n_max + 1).map(|n| lr_norm(&sums.averages(0, n), 1.0)));
    Ok(InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SeriesCondition {
    /// `Σ ‖f - (g_n - g_n∘T)‖_1`.
    Eq1,
    /// `Σ ‖g_n‖_2² / n²`.
    Eq2,
    /// `Σ ‖f - (g_n - g_n∘T)‖_2²`.
    Eq3,
}

/// Partial sums of the selected series over the supplied `g_1, g_2, ..`.
pub fn series_conditions_check(
    system: &System,
    f: &Observable,
    gs: &[Observable],
    which: SeriesCondition,
) -> Result<Vec<f64>> {
    let fv = f.cyclic_values(system)?;
    let mut out = Vec::with_capacity(gs.len());
    let mut acc = 0.0;
    for (j, g) in gs.iter().enumerate() {
        let gv = g.cyclic_values(system)?;
        let term = match which {
            SeriesCondition::Eq2 => {
                let n = (j + 1) as f64;
                lr_norm(&gv, 2.0).powi(2) / (n * n)
            }
            SeriesCondition::Eq1 | SeriesCondition::Eq3 => {
                let cob = coboundary_values(system, &gv)?;
                let rest: Vec<f64> = fv.iter().zip(&cob).map(|(a, b)| a - b).collect();
                if which == SeriesCondition::Eq1 {
                    lr_norm(&rest, 1.0)
                } else {
                    lr_norm(&rest, 2.0).powi(2)
                }
            }
        };
        acc += term;
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{coboundary_from_transfer, TransferSpec};
    use crate::systems::CyclicSystem;

    fn step(v: Vec<f64>) -> Observable {
        Observable::Step(StepObservable::new(v))
    }

    #[test]
    fn zero_transfer_makes_rate_over_an_equality() {
        let sys: System = CyclicSystem::unit(6).unwrap().into();
        let f = step(vec![1.0, -2.0, 0.5, 0.0, 3.0, -1.0]);
        let chk = rate_over_check(&sys, &f, &Observable::Constant(0.0), 1.0, 3).unwrap();
        assert_eq!(chk.lhs, chk.rhs);
        assert!(chk.holds);
    }

    #[test]
    fn coboundary_meets_the_transfer_bound() {
        let sys: System = CyclicSystem::new(9, 2).unwrap().into();
        let g = vec![0.0, 4.0, -1.0, 2.0, 0.5, 0.0, 1.0, -3.0, 2.0];
        let f = coboundary_from_transfer(&TransferSpec::Step(StepObservable::new(g.clone())), &sys)
            .unwrap();
        for n in 1..12 {
            let chk = rate_over_check(&sys, &f, &step(g.clone()), 2.0, n).unwrap();
            assert!((chk.rhs - 2.0 * lr_norm(&g, 2.0) / n as f64).abs() < 1e-12);
            assert!(chk.holds);
        }
    }

    #[test]
    fn rate_under_identity_including_n_one() {
        let sys: System = CyclicSystem::unit(4).unwrap().into();
        let f = step(vec![-1.0, 1.0, 0.0, 0.0]);
        let one = rate_under_transfer(&sys, &f, 1).unwrap();
        assert_eq!(one.h.values(), &[-1.0, 1.0, 0.0, 0.0]);
        assert!(one.identity_error < 1e-15);
        let five = rate_under_transfer(&sys, &f, 5).unwrap();
        assert!(five.identity_error < 1e-12);
        let zero = rate_under_transfer(&sys, &Observable::Constant(0.0), 3).unwrap();
        assert!(zero.h.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn harmonic_check_on_four_cycle() {
        let sys: System = CyclicSystem::unit(4).unwrap().into();
        let chk = harmonic_divergence_check(&sys, &step(vec![-1.0, 1.0, 0.0, 0.0]), 10).unwrap();
        assert!(chk.holds, "{chk:?}");
        let z = harmonic_divergence_check(&sys, &Observable::Constant(0.0), 10).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
    }

    #[test]
    fn series_partial_sums() {
        let sys: System = CyclicSystem::unit(8).unwrap().into();
        let gv: Vec<f64> = (0..8).map(|i| (i as f64).cos()).collect();
        let spec = TransferSpec::Step(StepObservable::new(gv.clone()));
        let f = coboundary_from_transfer(&spec, &sys).unwrap();
        let gs = vec![step(gv); 5];
        let eq1 = series_conditions_check(&sys, &f, &gs, SeriesCondition::Eq1).unwrap();
        assert!(eq1.iter().all(|&s| s.abs() < 1e-15));
        let zeros = vec![Observable::Constant(0.0); 4];
        let eq2 = series_conditions_check(&sys, &f, &zeros, SeriesCondition::Eq2).unwrap();
        assert_eq!(eq2, vec![0.0; 4]);
    }

    #[test]
    fn quarter_power_growth_keeps_eq2_summable() {
        let sys: System = CyclicSystem::unit(16).unwrap().into();
        let gs: Vec<Observable> = (1..=400)
            .map(|n| Observable::Constant((n as f64).powf(0.25)))
            .collect();
        let eq2 =
            series_conditions_check(&sys, &Observable::Constant(0.0), &gs, SeriesCondition::Eq2)
                .unwrap();
        let oracle: f64 = (1..=400).map(|n| (n as f64).powf(-1.5)).sum();
        assert!((eq2[399] - oracle).abs() < 1e-12);
        // ζ(3/2) bounds every partial sum.
        assert!(eq2.iter().all(|&s| s < 2.6124));
    }
}
