//! Moving averages and the exact identities they satisfy on cycles.
//!
//! Throughout, `M(v, L) f(x) = (1/L) Σ_{i=v+1}^{v+L} f(T^i x)`. A window
//! that starts at `T^v x` inclusive is `M(v - 1, L)` in this convention.

mod rates;
mod scheme;

pub use rates::{
    harmonic_divergence_check, rate_over_check, rate_under_transfer, series_conditions_check,
    InequalityCheck, RateUnder, SeriesCondition,
};
pub use scheme::{scheme_generate, SchemeFamily, WindowScheme};

use crate::error::{Error, Result};
use crate::observables::{neumaier_sum, Observable, TransferSpec};
use crate::systems::{CyclicSystem, PointHandle, System};

/// `M(v, L) f(x)`.
pub fn moving_average(
    system: &System,
    f: &Observable,
    x: &PointHandle,
    v: i64,
    len: u64,
) -> Result<f64> {
    if len == 0 {
        return Err(Error::invalid("window length must be at least 1"));
    }
    let (lo, hi) = window_bounds(v, len)?;
    if let System::Cyclic(c) = system {
        if len > c.size() {
            let sums = CycleSums::new(c, &f.cyclic_values(system)?);
            let PointHandle::Cyclic(p) = x else {
                return Err(Error::invalid("point does not belong to the cycle"));
            };
            return Ok(sums.window_sum(*p, lo, len) / len as f64);
        }
    }
    let vals = system.orbit_values(f, x, lo, hi)?;
    Ok(neumaier_sum(vals) / len as f64)
}

fn window_bounds(v: i64, len: u64) -> Result<(i64, i64)> {
    let overflow = || Error::IndexOverflow(format!("window ({v}, {len})"));
    let lo = v.checked_add(1).ok_or_else(overflow)?;
    let hi = i64::try_from(len)
        .ok()
        .and_then(|l| v.checked_add(l))
        .ok_or_else(overflow)?;
    Ok((lo, hi))
}

/// `(g(T^{v+1} x) - g(T^{v+L+1} x)) / L`, the collapsed form of
/// `M(v, L)(g - g∘T)`.
pub fn telescoped_average(
    system: &System,
    g: &TransferSpec,
    x: &PointHandle,
    v: i64,
    len: u64,
) -> Result<f64> {
    if len == 0 {
        return Err(Error::invalid("window length must be at least 1"));
    }
    let (lo, hi) = window_bounds(v, len)?;
    let end = hi
        .checked_add(1)
        .ok_or_else(|| Error::IndexOverflow(format!("window ({v}, {len})")))?;
    let obs = g.to_observable();
    obs.check_compatible(system)?;
    system.check_point(x)?;
    Ok((obs.value_at(system, x, lo)? - obs.value_at(system, x, end)?) / len as f64)
}

/// `C_1 f(x), .., C_n f(x)` where `C_n = (1/n) Σ_{k=1}^n S_k` and
/// `S_k = Σ_{j=1}^k f∘T^j`.
pub fn cesaro_diagnostic(
    system: &System,
    f: &Observable,
    x: &PointHandle,
    n: u64,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("Cesàro length must be at least 1"));
    }
    let hi = i64::try_from(n).map_err(|_| Error::IndexOverflow(format!("Cesàro length {n}")))?;
    let vals = system.orbit_values(f, x, 1, hi)?;
    let mut out = Vec::with_capacity(vals.len());
    let (mut s, mut total) = (0.0, 0.0);
    for (k, v) in vals.into_iter().enumerate() {
        s += v;
        total += s;
        out.push(total / (k + 1) as f64);
    }
    Ok(out)
}

/// `(1/N) Σ_x |C_n f(x)|` for `n = 1..=n_max`, exact on a cycle.
pub fn cesaro_l1_profile(system: &System, f: &Observable, n_max: u64) -> Result<Vec<f64>> {
    let c = system.as_cyclic()?;
    let vals = f.cyclic_values(system)?;
    let size = c.size() as usize;
    // Cesàro means at every point, advanced together.
    let orbit = orbit_order(c, &vals);
    let mut s = vec![0.0; size];
    let mut total = vec![0.0; size];
    let mut out = Vec::with_capacity(n_max as usize);
    for k in 1..=n_max {
        for q in 0..size {
            s[q] += orbit[(q + k as usize) % size];
            total[q] += s[q];
        }
        out.push(neumaier_sum(total.iter().map(|t| (t / k as f64).abs())) / size as f64);
    }
    Ok(out)
}

/// `f(T^k 0)` for `k = 0..N`.
pub fn orbit_order(c: &CyclicSystem, values: &[f64]) -> Vec<f64> {
    (0..c.size())
        .map(|k| values[c.apply(0, k as i64) as usize])
        .collect()
}

/// Compensated prefix sums of `f` along the single orbit of a cycle, so any
/// window sum costs O(1).
#[derive(Clone, Debug)]
pub struct CycleSums {
    system: CyclicSystem,
    prefix: Vec<f64>,
}

impl CycleSums {
    pub fn new(system: &CyclicSystem, values: &[f64]) -> Self {
        let orbit = orbit_order(system, values);
        let mut prefix = Vec::with_capacity(orbit.len() + 1);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        prefix.push(0.0);
        for v in orbit {
            let t = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - t) + v;
            } else {
                comp += (v - t) + sum;
            }
            sum = t;
            prefix.push(sum + comp);
        }
        Self {
            system: system.clone(),
            prefix,
        }
    }

    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    pub fn size(&self) -> u64 {
        self.system.size()
    }

    /// `Σ_{i=a}^{a+len-1} f(T^i x)`.
    pub fn window_sum(&self, x: u64, a: i64, len: u64) -> f64 {
        self.window_sum_at(self.system.orbit_position(x), a, len)
    }

    /// Like [`window_sum`](Self::window_sum) with `x` given by its orbit
    /// position `T^q 0`.
    pub fn window_sum_at(&self, q: u64, a: i64, len: u64) -> f64 {
        let n = self.size();
        let start = (q as i128 + a as i128).rem_euclid(n as i128) as u64;
        let full = len / n;
        let rem = len % n;
        let mut s = full as f64 * self.total();
        let end = start + rem;
        if end <= n {
            s += self.prefix[end as usize] - self.prefix[start as usize];
        } else {
            s += self.total() - self.prefix[start as usize] + self.prefix[(end - n) as usize];
        }
        s
    }

    /// `M(v, L) f` at every orbit position `q` (the point `T^q 0`).
    pub fn averages(&self, v: i64, len: u64) -> Vec<f64> {
        let a = v as i128 + 1;
        let a = a.rem_euclid(self.size() as i128) as i64;
        (0..self.size())
            .map(|q| self.window_sum_at(q, a, len) / len as f64)
            .collect()
    }
}

/// `((1/N) Σ |v|^r)^{1/r}`.
pub fn lr_norm(values: &[f64], r: f64) -> f64 {
    let s = neumaier_sum(values.iter().map(|v| v.abs().powf(r)));
    (s / values.len() as f64).powf(1.0 / r)
}
