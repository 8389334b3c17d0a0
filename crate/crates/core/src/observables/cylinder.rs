use super::Observable;
use crate::error::{Error, Result};
use crate::systems::ShiftSystem;

/// Largest number of words `conditional_expectation` enumerates by default.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 24;

/// A function of the coordinates `-r ..= r` of a shift point.
///
/// The table is dense: the word `(x_{-r}, .., x_r)` sits at index
/// `sum_j x_{j-r} s^{2r-j}`, so coordinate `-r` is the most significant digit.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderObservable {
    alphabet: usize,
    radius: usize,
    table: Vec<f64>,
}

impl CylinderObservable {
    pub fn new(alphabet: usize, radius: usize, table: Vec<f64>) -> Result<Self> {
        let expected = word_count(alphabet, 2 * radius + 1)
            .ok_or_else(|| Error::invalid("cylinder table size overflows"))?;
        if alphabet == 0 || table.len() as u64 != expected {
            return Err(Error::invalid(format!(
                "cylinder table has {} entries, alphabet {alphabet} radius {radius} needs {expected}",
                table.len()
            )));
        }
        Ok(Self {
            alphabet,
            radius,
            table,
        })
    }

    /// Tabulates `f` over every word of length `2r + 1`.
    pub fn from_fn(alphabet: usize, radius: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = 2 * radius + 1;
        let count = word_count(alphabet, len)
            .filter(|&c| c <= DEFAULT_ENUMERATION_BUDGET)
            .ok_or(Error::BudgetExceeded {
                needed: (alphabet as u128).saturating_pow(len as u32),
                budget: DEFAULT_ENUMERATION_BUDGET as u128,
            })?;
        let mut word = vec![0usize; len];
        let mut table = Vec::with_capacity(count as usize);
        for _ in 0..count {
            table.push(f(&word));
            increment(&mut word, alphabet);
        }
        Self::new(alphabet, radius, table)
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn max_abs(&self) -> f64 {
        self.table.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn lookup(&self, word: &[usize]) -> f64 {
        self.table[word_index(word, self.alphabet)]
    }

    pub(crate) fn eval(&self, shift: &ShiftSystem, id: u64, i: i64) -> Result<f64> {
        let r = self.radius as i64;
        let lo = i
            .checked_sub(r)
            .ok_or_else(|| Error::IndexOverflow(format!("coordinate {i} - {r}")))?;
        let hi = i
            .checked_add(r)
            .ok_or_else(|| Error::IndexOverflow(format!("coordinate {i} + {r}")))?;
        let idx = (lo..=hi).fold(0usize, |acc, k| acc * self.alphabet + shift.symbol(id, k));
        Ok(self.table[idx])
    }

    /// The same function viewed as a cylinder of a larger radius.
    pub fn widen(&self, radius: usize) -> Result<Self> {
        if radius < self.radius {
            return Err(Error::invalid("cannot narrow a cylinder"));
        }
        let pad = radius - self.radius;
        Self::from_fn(self.alphabet, radius, |w| self.lookup(&w[pad..w.len() - pad]))
    }
}

fn word_count(alphabet: usize, len: usize) -> Option<u64> {
    (alphabet as u64).checked_pow(len as u32)
}

fn word_index(word: &[usize], alphabet: usize) -> usize {
    word.iter().fold(0, |acc, &s| acc * alphabet + s)
}

/// Odometer step with the last coordinate least significant.
fn increment(word: &mut [usize], alphabet: usize) {
    for s in word.iter_mut().rev() {
        *s += 1;
        if *s < alphabet {
            return;
        }
        *s = 0;
    }
}

/// `E(f | P_n)` for the partition `P_n` by coordinates `1-n ..= n-1`,
/// returned as a cylinder of radius `n - 1`.
///
/// Each table entry is the product-measure average of `f` over the
/// coordinates it depends on outside the window. The sum is exact up to
/// rounding for cylinder observables; encoded observables are summed over
/// their finite encoding depth.
pub fn conditional_expectation(
    f: &Observable,
    n: usize,
    shift: &ShiftSystem,
    budget: u64,
) -> Result<CylinderObservable> {
    if n == 0 {
        return Err(Error::invalid("refinement level n must be at least 1"));
    }
    let s = shift.alphabet();
    let inner = n - 1;
    let reach = match f {
        Observable::Constant(_) => 0,
        Observable::Cylinder(c) => {
            if c.alphabet != s {
                return Err(Error::invalid("cylinder alphabet differs from the shift"));
            }
            c.radius
        }
        Observable::Encoded(e) => e.depth(),
        other => {
            return Err(Error::Incompatible {
                observable: other.name(),
                system: "shift",
            })
        }
    };
    let outer = reach.max(inner);
    let len = 2 * outer + 1;
    let needed = (s as u128).saturating_pow(len as u32);
    let table_len = (s as u128).saturating_pow((2 * inner + 1) as u32);
    if needed > budget as u128 || table_len > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed,
            budget: budget as u128,
        });
    }

    let mut table = vec![0.0; table_len as usize];
    let mut word = vec![0usize; len];
    let pad = outer - inner;
    let off = outer - reach;
    let probs = shift.probs();
    for _ in 0..needed as u64 {
        let weight: f64 = word[..pad]
            .iter()
            .chain(&word[len - pad..])
            .map(|&a| probs[a])
            .product();
        if weight > 0.0 {
            let core = &word[off..len - off];
            let value = match f {
                Observable::Constant(c) => *c,
                Observable::Cylinder(c) => c.lookup(core),
                Observable::Encoded(e) => e.eval_word(core, s),
                _ => unreachable!(),
            };
            table[word_index(&word[pad..len - pad], s)] += weight * value;
        }
        increment(&mut word, s);
    }
    CylinderObservable::new(s, inner, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::EncodedContinuousObservable;

    fn mean(c: &CylinderObservable, shift: &ShiftSystem) -> f64 {
        let len = 2 * c.radius() + 1;
        let mut word = vec![0; len];
        let mut total = 0.0;
        for v in c.table() {
            total += v * word.iter().map(|&a| shift.probs()[a]).product::<f64>();
            increment(&mut word, c.alphabet());
        }
        total
    }

    #[test]
    fn constant_gives_constant_table() {
        let shift = ShiftSystem::uniform(3, 0).unwrap();
        let e = conditional_expectation(&Observable::Constant(1.5), 2, &shift, 1 << 20).unwrap();
        assert_eq!(e.radius(), 1);
        assert!(e.table().iter().all(|&v| v == 1.5));
    }

    #[test]
    fn measurable_cylinder_is_fixed() {
        let shift = ShiftSystem::new(vec![0.2, 0.8], 1).unwrap();
        let f = CylinderObservable::from_fn(2, 1, |w| (w[0] + 2 * w[1] + 4 * w[2]) as f64).unwrap();
        let e = conditional_expectation(&Observable::Cylinder(f.clone()), 3, &shift, 1 << 20)
            .unwrap();
        assert_eq!(e, f.widen(2).unwrap());
    }

    #[test]
    fn coordinate_outside_window_averages_out() {
        let n = 3;
        let shift = ShiftSystem::uniform(2, 0).unwrap();
        // ±1 according to coordinate n.
        let f = CylinderObservable::from_fn(2, n, |w| if w[2 * n] == 1 { 1.0 } else { -1.0 })
            .unwrap();
        let e = conditional_expectation(&Observable::Cylinder(f), n, &shift, 1 << 20).unwrap();
        assert!(e.table().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tower_property_and_contraction() {
        let shift = ShiftSystem::new(vec![0.5, 0.3, 0.2], 4).unwrap();
        let f = CylinderObservable::from_fn(3, 2, |w| {
            w.iter().enumerate().map(|(j, &a)| ((j + 1) * a) as f64).product::<f64>().sin()
        })
        .unwrap();
        let e = conditional_expectation(&Observable::Cylinder(f.clone()), 2, &shift, 1 << 20)
            .unwrap();
        assert!((mean(&e, &shift) - mean(&f, &shift)).abs() < 1e-10);
        assert!(e.max_abs() <= f.max_abs() + 1e-15);
    }

    #[test]
    fn encoded_coordinate_error_bound() {
        let shift = ShiftSystem::uniform(2, 0).unwrap();
        let enc = EncodedContinuousObservable::coordinate(10).unwrap();
        let n = 4;
        let e = conditional_expectation(&Observable::Encoded(enc.clone()), n, &shift, 1 << 22)
            .unwrap();
        let widened = e.widen(10).unwrap();
        let mut word = vec![0usize; 21];
        let mut worst: f64 = 0.0;
        for j in 0..(1u32 << 21) {
            if j % 7 == 0 {
                worst = worst.max((widened.lookup(&word) - enc.eval_word(&word, 2)).abs());
            }
            increment(&mut word, 2);
        }
        assert!(worst <= 0.125, "worst {worst}");
    }

    #[test]
    fn budget_is_enforced() {
        let shift = ShiftSystem::uniform(4, 0).unwrap();
        let r = conditional_expectation(&Observable::Constant(0.0), 20, &shift, 1 << 20);
        assert!(matches!(r, Err(Error::BudgetExceeded { .. })));
    }
}
