//! Desk-scale measure-preserving systems.
//!
//! Three models share one interface: a cyclic rotation of `Z/N` (exact, the
//! stand-in for Rokhlin towers), a two-sided Bernoulli shift whose points are
//! realized lazily from a seed, and an irrational-angle circle rotation used
//! for cross-checks. Every system supports negative powers.

use crate::error::{Error, Result};
use crate::observables::Observable;
use crate::rng::{self, mix2, mix3, stream, unit_f64};
use serde::{Deserialize, Serialize};

/// Tolerance for interval membership on the circle.
pub const ROTATION_EPS: f64 = 1e-15;

/// `T x = x + step (mod N)` on `{0, .., N-1}` with counting measure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicSystem {
    size: u64,
    step: u64,
    step_inv: u64,
}

impl CyclicSystem {
    pub fn new(size: u64, step: i64) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("cyclic system size must be at least 1"));
        }
        let step = (step as i128).rem_euclid(size as i128) as u64;
        let step_inv = mod_inverse(step, size).ok_or_else(|| {
            Error::invalid(format!("step {step} is not coprime to size {size}"))
        })?;
        Ok(Self {
            size,
            step,
            step_inv,
        })
    }

    pub fn unit(size: u64) -> Result<Self> {
        Self::new(size, 1)
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// `T^i x`.
    #[inline]
    pub fn apply(&self, x: u64, i: i64) -> u64 {
        let n = self.size as i128;
        (x as i128 + (i as i128 % n) * self.step as i128).rem_euclid(n) as u64
    }

    /// The `k` in `0..N` with `T^k 0 = x`. Lets orbit-ordered prefix sums
    /// serve every starting point at once.
    #[inline]
    pub fn orbit_position(&self, x: u64) -> u64 {
        ((x as u128 * self.step_inv as u128) % self.size as u128) as u64
    }
}

fn mod_inverse(a: u64, n: u64) -> Option<u64> {
    if n == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (n as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 == 1).then(|| t0.rem_euclid(n as i128) as u64)
}

/// Two-sided Bernoulli shift on `s` symbols.
///
/// A point is an opaque 64-bit id. The uniform variate behind coordinate `k`
/// of point `id` is `unit_f64(mix3(seed ^ SHIFT_SYMBOLS, id, k))`, and the
/// symbol is the first `j` with `u < p_0 + .. + p_j`. `T` moves coordinate
/// `k + 1` to position `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftSystem {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    seed: u64,
}

impl ShiftSystem {
    pub fn new(probs: Vec<f64>, seed: u64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("alphabet must have at least one symbol"));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::invalid("symbol probabilities must be nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "symbol probabilities sum to {total}, expected 1"
            )));
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // Pin the last bucket so u < 1 always lands somewhere.
        *cumulative.last_mut().unwrap() = f64::INFINITY;
        Ok(Self {
            probs,
            cumulative,
            seed,
        })
    }

    pub fn uniform(alphabet: usize, seed: u64) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::invalid("alphabet must have at least one symbol"));
        }
        Self::new(vec![1.0 / alphabet as f64; alphabet], seed)
    }

    pub fn alphabet(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The uniform variate driving coordinate `k` of point `id`.
    #[inline]
    pub fn coordinate_uniform(&self, id: u64, k: i64) -> f64 {
        unit_f64(mix3(self.seed ^ stream::SHIFT_SYMBOLS, id, k as u64))
    }

    #[inline]
    pub fn symbol(&self, id: u64, k: i64) -> usize {
        let u = self.coordinate_uniform(id, k);
        self.cumulative.partition_point(|&c| c <= u)
    }
}

/// `T x = x + alpha (mod 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationSystem {
    alpha: f64,
    convergent: bool,
}

impl RotationSystem {
    /// `convergent` marks `alpha` as a continued-fraction convergent of the
    /// intended irrational rather than the irrational itself.
    pub fn new(alpha: f64, convergent: bool) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("rotation angle {alpha} not in (0, 1)")));
        }
        Ok(Self { alpha, convergent })
    }

    /// The golden-mean rotation.
    pub fn golden() -> Self {
        Self {
            alpha: (5f64.sqrt() - 1.0) / 2.0,
            convergent: false,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_convergent(&self) -> bool {
        self.convergent
    }

    #[inline]
    pub fn apply(&self, x: f64, i: i64) -> f64 {
        // Reduce i * alpha before adding so large |i| keeps its fractional
        // part instead of drowning it.
        let shift = (i as f64 * self.alpha).rem_euclid(1.0);
        let y = (x + shift).rem_euclid(1.0);
        if y >= 1.0 - ROTATION_EPS {
            0.0
        } else {
            y
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum System {
    Cyclic(CyclicSystem),
    Shift(ShiftSystem),
    Rotation(RotationSystem),
}

impl System {
    pub fn kind(&self) -> &'static str {
        match self {
            System::Cyclic(_) => "cyclic",
            System::Shift(_) => "shift",
            System::Rotation(_) => "rotation",
        }
    }

    pub fn as_cyclic(&self) -> Result<&CyclicSystem> {
        match self {
            System::Cyclic(c) => Ok(c),
            other => Err(Error::invalid(format!(
                "operation needs a cyclic system, got {}",
                other.kind()
            ))),
        }
    }

    pub fn as_shift(&self) -> Result<&ShiftSystem> {
        match self {
            System::Shift(s) => Ok(s),
            other => Err(Error::invalid(format!(
                "operation needs a shift system, got {}",
                other.kind()
            ))),
        }
    }

    /// Deterministic Monte Carlo point for `trial` under `master_seed`.
    pub fn sample_point(&self, master_seed: u64, trial: u64) -> PointHandle {
        let h = mix2(master_seed ^ stream::POINTS, trial);
        match self {
            System::Cyclic(c) => PointHandle::Cyclic(rng::index_below(h, c.size)),
            System::Shift(_) => PointHandle::Shift(h),
            System::Rotation(_) => PointHandle::Rotation(unit_f64(h)),
        }
    }

    /// `[f(T^i x) for i in i_lo..=i_hi]`.
    pub fn orbit_values(
        &self,
        f: &Observable,
        x: &PointHandle,
        i_lo: i64,
        i_hi: i64,
    ) -> Result<Vec<f64>> {
        if i_lo > i_hi {
            return Err(Error::invalid(format!("empty range {i_lo}..={i_hi}")));
        }
        f.check_compatible(self)?;
        self.check_point(x)?;
        (i_lo..=i_hi).map(|i| f.value_at(self, x, i)).collect()
    }

    pub fn check_point(&self, x: &PointHandle) -> Result<()> {
        match (self, x) {
            (System::Cyclic(c), PointHandle::Cyclic(i)) if *i < c.size => Ok(()),
            (System::Shift(_), PointHandle::Shift(_)) => Ok(()),
            (System::Rotation(_), PointHandle::Rotation(t)) if (0.0..1.0).contains(t) => Ok(()),
            _ => Err(Error::invalid(format!(
                "point {x:?} does not belong to the {} system",
                self.kind()
            ))),
        }
    }
}

impl From<CyclicSystem> for System {
    fn from(c: CyclicSystem) -> Self {
        System::Cyclic(c)
    }
}

impl From<ShiftSystem> for System {
    fn from(s: ShiftSystem) -> Self {
        System::Shift(s)
    }
}

impl From<RotationSystem> for System {
    fn from(r: RotationSystem) -> Self {
        System::Rotation(r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PointHandle {
    Cyclic(u64),
    Shift(u64),
    Rotation(f64),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{CylinderObservable, StepObservable};

    #[test]
    fn four_cycle_orbit() {
        let sys = System::from(CyclicSystem::unit(4).unwrap());
        let f = Observable::Step(StepObservable::new(vec![-1.0, 1.0, 0.0, 0.0]));
        let v = sys.orbit_values(&f, &PointHandle::Cyclic(0), 1, 2).unwrap();
        assert_eq!(v, vec![1.0, 0.0]);
        let back = sys.orbit_values(&f, &PointHandle::Cyclic(0), -1, 0).unwrap();
        assert_eq!(back, vec![0.0, -1.0]);
    }

    #[test]
    fn step_must_be_coprime() {
        assert!(CyclicSystem::new(10, 4).is_err());
        let c = CyclicSystem::new(10, 3).unwrap();
        let mut seen: Vec<u64> = (0..10).map(|i| c.apply(0, i)).collect();
        seen.sort();
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
        for x in 0..10 {
            assert_eq!(c.apply(0, c.orbit_position(x) as i64), x);
        }
    }

    #[test]
    fn negative_step_normalizes() {
        let c = CyclicSystem::new(7, -1).unwrap();
        assert_eq!(c.apply(0, 1), 6);
        assert_eq!(c.apply(3, -2), 5);
        assert_eq!(c.apply(3, i64::MIN), c.apply(3, i64::MIN % 7));
    }

    #[test]
    fn constant_on_any_range() {
        let sys = System::from(RotationSystem::golden());
        let v = sys
            .orbit_values(&Observable::Constant(2.5), &PointHandle::Rotation(0.3), -3, 6)
            .unwrap();
        assert_eq!(v, vec![2.5; 10]);
    }

    #[test]
    fn shift_symbols_are_reproducible() {
        let shift = ShiftSystem::uniform(2, 17).unwrap();
        let sys = System::from(shift.clone());
        let f = Observable::Cylinder(CylinderObservable::new(2, 0, vec![0.0, 1.0]).unwrap());
        let x = sys.sample_point(5, 3);
        let a = sys.orbit_values(&f, &x, 0, 63).unwrap();
        let b = sys.orbit_values(&f, &x, 0, 63).unwrap();
        assert_eq!(a, b);
        let PointHandle::Shift(id) = x else { panic!() };
        for (k, v) in a.iter().enumerate() {
            assert_eq!(*v, shift.symbol(id, k as i64) as f64);
        }
        // Both symbols occur in 64 fair coin flips with overwhelming odds.
        assert!(a.contains(&0.0) && a.contains(&1.0));
    }

    #[test]
    fn shift_rejects_bad_probabilities() {
        assert!(ShiftSystem::new(vec![0.5, 0.4], 0).is_err());
        assert!(ShiftSystem::new(vec![1.5, -0.5], 0).is_err());
        assert!(ShiftSystem::new(vec![], 0).is_err());
    }

    #[test]
    fn single_point_cycle() {
        let sys = System::from(CyclicSystem::unit(1).unwrap());
        for t in 0..10 {
            assert_eq!(sys.sample_point(99, t), PointHandle::Cyclic(0));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let sys = System::from(RotationSystem::golden());
        assert_eq!(sys.sample_point(1, 2), sys.sample_point(1, 2));
        assert_ne!(sys.sample_point(1, 2), sys.sample_point(1, 3));
    }

    #[test]
    fn cyclic_samples_pass_chi_square() {
        let n = 1000u64;
        let trials = 100_000u64;
        let sys = System::from(CyclicSystem::unit(n).unwrap());
        let mut counts = vec![0u64; n as usize];
        for t in 0..trials {
            let PointHandle::Cyclic(i) = sys.sample_point(2024, t) else { panic!() };
            counts[i as usize] += 1;
        }
        let expected = trials as f64 / n as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 99th percentile of chi-square with 999 degrees of freedom.
        assert!(chi2 < 1105.9, "chi2 = {chi2}");
    }

    #[test]
    fn rotation_wraps() {
        let r = RotationSystem::new(0.25, true).unwrap();
        assert_eq!(r.apply(0.5, 2), 0.0);
        assert!((r.apply(0.1, -1) - 0.85).abs() < 1e-15);
        assert!(RotationSystem::new(1.0, false).is_err());
    }
}
