use super::{CylinderObservable, Observable, StepObservable};
use crate::error::{Error, Result};
use crate::systems::{PointHandle, System};

/// Pareto variable `scale * (1 - u)^{-1/p}`, so `P(g > t) = min(1, (scale/t)^p)`.
///
/// The uniform `u` is the variate behind coordinate 0 on a shift, the point
/// itself on a rotation, and the cell midpoint `(x + 1/2)/N` on a cycle
/// (a quantile layout rather than an exact law there).
#[derive(Clone, Debug, PartialEq)]
pub struct HeavyTailGenerator {
    p: f64,
    scale: f64,
}

impl HeavyTailGenerator {
    pub fn new(p: f64, scale: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::invalid(format!("tail exponent {p} must be positive")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!("tail scale {scale} must be positive")));
        }
        Ok(Self { p, scale })
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        self.scale * (1.0 - u).powf(-1.0 / self.p)
    }

    pub fn tail(&self, t: f64) -> f64 {
        if t <= self.scale {
            1.0
        } else {
            (self.scale / t).powf(self.p)
        }
    }

    pub(crate) fn value_at(&self, system: &System, x: &PointHandle, i: i64) -> Result<f64> {
        let u = match (system, x) {
            (System::Cyclic(c), PointHandle::Cyclic(p)) => {
                (c.apply(*p, i) as f64 + 0.5) / c.size() as f64
            }
            (System::Shift(s), PointHandle::Shift(id)) => s.coordinate_uniform(*id, i),
            (System::Rotation(r), PointHandle::Rotation(t)) => r.apply(*t, i),
            _ => {
                return Err(Error::Incompatible {
                    observable: "heavy-tail",
                    system: system.kind(),
                })
            }
        };
        Ok(self.quantile(u))
    }
}

/// A transfer function `g` for building coboundaries `g - g∘T`.
#[derive(Clone, Debug, PartialEq)]
pub enum TransferSpec {
    Constant(f64),
    Step(StepObservable),
    Cylinder(CylinderObservable),
    HeavyTail(HeavyTailGenerator),
}

impl TransferSpec {
    pub fn to_observable(&self) -> Observable {
        match self {
            TransferSpec::Constant(c) => Observable::Constant(*c),
            TransferSpec::Step(s) => Observable::Step(s.clone()),
            TransferSpec::Cylinder(c) => Observable::Cylinder(c.clone()),
            TransferSpec::HeavyTail(h) => Observable::HeavyTail(h.clone()),
        }
    }

    /// `sup |g|`, infinite for the heavy-tail generator.
    pub fn sup_norm(&self) -> f64 {
        match self {
            TransferSpec::Constant(c) => c.abs(),
            TransferSpec::Step(s) => s.max_abs(),
            TransferSpec::Cylinder(c) => c.max_abs(),
            TransferSpec::HeavyTail(_) => f64::INFINITY,
        }
    }
}

/// `f = g - g∘T`, kept in the same representation as `g` when one exists:
/// step stays step, a radius-`r` cylinder becomes radius `r + 1`.
pub fn coboundary_from_transfer(g: &TransferSpec, system: &System) -> Result<Observable> {
    let obs = g.to_observable();
    obs.check_compatible(system)?;
    match (g, system) {
        (TransferSpec::Constant(_), _) => Ok(Observable::Constant(0.0)),
        (TransferSpec::Step(s), System::Cyclic(c)) => {
            let v = s.values();
            let f = (0..c.size())
                .map(|x| v[x as usize] - v[c.apply(x, 1) as usize])
                .collect();
            Ok(Observable::Step(StepObservable::new(f)))
        }
        (TransferSpec::Cylinder(cyl), System::Shift(_)) => {
            let r = cyl.radius();
            let len = 2 * r + 1;
            let f = CylinderObservable::from_fn(cyl.alphabet(), r + 1, |w| {
                cyl.lookup(&w[1..1 + len]) - cyl.lookup(&w[2..2 + len])
            })?;
            Ok(Observable::Cylinder(f))
        }
        _ => Ok(Observable::Coboundary(Box::new(obs))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{CyclicSystem, ShiftSystem};

    #[test]
    fn four_cycle_coboundary() {
        let sys = System::from(CyclicSystem::unit(4).unwrap());
        let g = TransferSpec::Step(StepObservable::new(vec![0.0, 1.0, 0.0, 0.0]));
        let f = coboundary_from_transfer(&g, &sys).unwrap();
        assert_eq!(
            f,
            Observable::Step(StepObservable::new(vec![-1.0, 1.0, 0.0, 0.0]))
        );
    }

    #[test]
    fn constant_transfer_is_zero() {
        let sys = System::from(ShiftSystem::uniform(2, 0).unwrap());
        let f = coboundary_from_transfer(&TransferSpec::Constant(3.0), &sys).unwrap();
        assert_eq!(f, Observable::Constant(0.0));
    }

    #[test]
    fn cylinder_coboundary_grows_radius_and_matches_pointwise() {
        let shift = ShiftSystem::new(vec![0.3, 0.7], 8).unwrap();
        let sys = System::from(shift);
        let g = CylinderObservable::from_fn(2, 1, |w| (w[0] * 4 + w[1] * 2 + w[2]) as f64).unwrap();
        let spec = TransferSpec::Cylinder(g);
        let f = coboundary_from_transfer(&spec, &sys).unwrap();
        let Observable::Cylinder(fc) = &f else { panic!() };
        assert_eq!(fc.radius(), 2);
        let lazy = Observable::Coboundary(Box::new(spec.to_observable()));
        let x = sys.sample_point(1, 1);
        assert_eq!(
            sys.orbit_values(&f, &x, -20, 20).unwrap(),
            sys.orbit_values(&lazy, &x, -20, 20).unwrap()
        );
    }

    #[test]
    fn heavy_tail_law_on_shift() {
        let h = HeavyTailGenerator::new(1.5, 2.0).unwrap();
        assert_eq!(h.tail(1.0), 1.0);
        assert!((h.tail(8.0) - 0.125).abs() < 1e-15);
        let sys = System::from(ShiftSystem::uniform(2, 5).unwrap());
        let obs = Observable::HeavyTail(h.clone());
        let trials = 40_000;
        let over = (0..trials)
            .filter(|&t| obs.value_at(&sys, &sys.sample_point(9, t), 0).unwrap() > 8.0)
            .count() as f64
            / trials as f64;
        let se = (0.125f64 * 0.875 / trials as f64).sqrt();
        assert!((over - 0.125).abs() < 4.0 * se, "{over}");
    }

    #[test]
    fn heavy_tail_coboundary_is_lazy() {
        let sys = System::from(CyclicSystem::unit(8).unwrap());
        let spec = TransferSpec::HeavyTail(HeavyTailGenerator::new(1.0, 1.0).unwrap());
        let f = coboundary_from_transfer(&spec, &sys).unwrap();
        assert!(matches!(f, Observable::Coboundary(_)));
        let total: f64 = f.cyclic_values(&sys).unwrap().iter().sum();
        assert!(total.abs() < 1e-12);
    }
}
