//! Observables on the desk-scale systems.

mod cylinder;
mod encoded;
mod fp;
mod transfer;

pub use cylinder::{conditional_expectation, CylinderObservable, DEFAULT_ENUMERATION_BUDGET};
pub use encoded::{EncodedContinuousObservable, RealFunction};
pub use fp::{build_fp_function, FpFamily, FpSpec, GrowthFamily, MassRule};
pub use transfer::{coboundary_from_transfer, HeavyTailGenerator, TransferSpec};

use crate::error::{Error, Result};
use crate::systems::{PointHandle, System};
use serde::Serialize;

/// One real value per point of a cyclic system.
#[derive(Clone, Debug, PartialEq)]
pub struct StepObservable {
    values: Vec<f64>,
}

impl StepObservable {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    Constant(f64),
    Step(StepObservable),
    Cylinder(CylinderObservable),
    Encoded(EncodedContinuousObservable),
    HeavyTail(HeavyTailGenerator),
    /// `g - g∘T` for the boxed `g`.
    Coboundary(Box<Observable>),
}

impl Observable {
    pub fn name(&self) -> &'static str {
        match self {
            Observable::Constant(_) => "constant",
            Observable::Step(_) => "step",
            Observable::Cylinder(_) => "cylinder",
            Observable::Encoded(_) => "encoded-continuous",
            Observable::HeavyTail(_) => "heavy-tail",
            Observable::Coboundary(_) => "coboundary",
        }
    }

    pub fn check_compatible(&self, system: &System) -> Result<()> {
        let ok = match (self, system) {
            (Observable::Constant(_), _) | (Observable::HeavyTail(_), _) => true,
            (Observable::Step(s), System::Cyclic(c)) => {
                if s.len() as u64 != c.size() {
                    return Err(Error::invalid(format!(
                        "step observable has {} values, cycle has {} points",
                        s.len(),
                        c.size()
                    )));
                }
                true
            }
            (Observable::Cylinder(cyl), System::Shift(sh)) => {
                if cyl.alphabet() != sh.alphabet() {
                    return Err(Error::invalid(format!(
                        "cylinder alphabet {} differs from shift alphabet {}",
                        cyl.alphabet(),
                        sh.alphabet()
                    )));
                }
                true
            }
            (Observable::Encoded(_), System::Shift(_) | System::Rotation(_)) => true,
            (Observable::Coboundary(g), sys) => return g.check_compatible(sys),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Incompatible {
                observable: self.name(),
                system: system.kind(),
            })
        }
    }

    /// `f(T^i x)`. Callers are expected to have run [`check_compatible`].
    ///
    /// [`check_compatible`]: Observable::check_compatible
    pub fn value_at(&self, system: &System, x: &PointHandle, i: i64) -> Result<f64> {
        match (self, system, x) {
            (Observable::Constant(c), _, _) => Ok(*c),
            (Observable::Step(s), System::Cyclic(c), PointHandle::Cyclic(p)) => {
                Ok(s.values[c.apply(*p, i) as usize])
            }
            (Observable::Cylinder(cyl), System::Shift(sh), PointHandle::Shift(id)) => {
                cyl.eval(sh, *id, i)
            }
            (Observable::Encoded(e), System::Shift(sh), PointHandle::Shift(id)) => {
                e.eval_shift(sh, *id, i)
            }
            (Observable::Encoded(e), System::Rotation(r), PointHandle::Rotation(t)) => {
                Ok(e.function().eval(r.apply(*t, i)))
            }
            (Observable::HeavyTail(h), sys, pt) => h.value_at(sys, pt, i),
            (Observable::Coboundary(g), sys, pt) => {
                let next = i
                    .checked_add(1)
                    .ok_or_else(|| Error::IndexOverflow(format!("orbit index {i} + 1")))?;
                Ok(g.value_at(sys, pt, i)? - g.value_at(sys, pt, next)?)
            }
            _ => Err(Error::Incompatible {
                observable: self.name(),
                system: system.kind(),
            }),
        }
    }

    /// Values at every point of a cycle, indexed by point.
    pub fn cyclic_values(&self, system: &System) -> Result<Vec<f64>> {
        let c = system.as_cyclic()?;
        self.check_compatible(system)?;
        if let Observable::Step(s) = self {
            return Ok(s.values.clone());
        }
        (0..c.size())
            .map(|x| self.value_at(system, &PointHandle::Cyclic(x), 0))
            .collect()
    }
}

/// A value with its Monte Carlo standard error (zero when exact).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }
}

/// `∫ |f|^q dμ`: exact on cycles, Monte Carlo over `trials` sampled points
/// elsewhere.
pub fn moment(
    f: &Observable,
    q: f64,
    system: &System,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    if !(q > 0.0) {
        return Err(Error::invalid(format!("moment order {q} must be positive")));
    }
    f.check_compatible(system)?;
    if let System::Cyclic(_) = system {
        let vals = f.cyclic_values(system)?;
        let terms = vals.iter().map(|v| v.abs().powf(q));
        return Ok(Estimate::exact(neumaier_sum(terms) / vals.len() as f64));
    }
    if trials == 0 {
        return Err(Error::invalid("moment needs at least one trial"));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for t in 0..trials {
        let x = system.sample_point(seed, t);
        let v = f.value_at(system, &x, 0)?.abs().powf(q);
        sum += v;
        sum_sq += v * v;
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = if trials > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(Estimate {
        value: mean,
        stderr: (var / n).sqrt(),
    })
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{CyclicSystem, RotationSystem, ShiftSystem};

    fn four_cycle() -> System {
        CyclicSystem::unit(4).unwrap().into()
    }

    #[test]
    fn moment_of_four_cycle_step() {
        let f = Observable::Step(StepObservable::new(vec![-1.0, 1.0, 0.0, 0.0]));
        let m = moment(&f, 1.0, &four_cycle(), 0, 0).unwrap();
        assert_eq!(m, Estimate::exact(0.5));
        let z = moment(&Observable::Constant(0.0), 2.0, &four_cycle(), 0, 0).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn moment_monte_carlo_on_rotation() {
        // ∫ x^2 dx over the circle is 1/3.
        let f = Observable::Encoded(
            EncodedContinuousObservable::new(RealFunction::Polynomial(vec![0.0, 1.0]), 0)
                .unwrap(),
        );
        let sys = System::from(RotationSystem::golden());
        let m = moment(&f, 2.0, &sys, 20_000, 3).unwrap();
        assert!((m.value - 1.0 / 3.0).abs() < 4.0 * m.stderr, "{m:?}");
    }

    #[test]
    fn incompatible_pairs_are_typed_errors() {
        let f = Observable::Step(StepObservable::new(vec![0.0; 4]));
        let shift = System::from(ShiftSystem::uniform(2, 0).unwrap());
        assert!(matches!(
            f.check_compatible(&shift),
            Err(Error::Incompatible { .. })
        ));
        let short = System::from(CyclicSystem::unit(5).unwrap());
        assert!(f.check_compatible(&short).is_err());
        let cob = Observable::Coboundary(Box::new(f));
        assert!(shift.orbit_values(&cob, &PointHandle::Shift(0), 0, 1).is_err());
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let s = neumaier_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(s, 2.0);
    }
}
