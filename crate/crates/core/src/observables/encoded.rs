use crate::error::{Error, Result};
use crate::systems::ShiftSystem;

/// A real function on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum RealFunction {
    /// Coefficients `c_0, c_1, ..` of `c_0 + c_1 t + c_2 t^2 + ..`.
    Polynomial(Vec<f64>),
    /// Knots `(t, y)` with strictly increasing `t`; constant beyond the ends.
    PiecewiseLinear(Vec<(f64, f64)>),
}

impl RealFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            RealFunction::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &a| acc * t + a),
            RealFunction::PiecewiseLinear(knots) => {
                let j = knots.partition_point(|&(x, _)| x <= t);
                if j == 0 {
                    return knots[0].1;
                }
                if j == knots.len() {
                    return knots[j - 1].1;
                }
                let (x0, y0) = knots[j - 1];
                let (x1, y1) = knots[j];
                y0 + (y1 - y0) * (t - x0) / (x1 - x0)
            }
        }
    }

    /// A Lipschitz constant valid on `[0, 1]`.
    pub fn lipschitz(&self) -> f64 {
        match self {
            RealFunction::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| k as f64 * a.abs())
                .sum(),
            RealFunction::PiecewiseLinear(knots) => knots
                .windows(2)
                .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                .fold(0.0, f64::max),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            RealFunction::Polynomial(c) if c.iter().all(|a| a.is_finite()) => Ok(()),
            RealFunction::Polynomial(_) => Err(Error::invalid("non-finite coefficient")),
            RealFunction::PiecewiseLinear(k) => {
                if k.is_empty() {
                    return Err(Error::invalid("piecewise-linear function needs a knot"));
                }
                if k.windows(2).any(|w| !(w[0].0 < w[1].0)) {
                    return Err(Error::invalid("knot abscissae must be strictly increasing"));
                }
                Ok(())
            }
        }
    }
}

/// `φ(e(x))` where `e` encodes a shift point into `[0, 1]`:
///
/// ```text
/// e(x) = sum_{|k| <= depth} x_k 2^{-|k|-1} / (1.5 (s - 1))
/// ```
///
/// The normalization maps the all-`(s-1)` sequence to 1, and two points that
/// agree on `|k| <= m` have encodings within `2^{-m} / 1.5`. On a rotation
/// the point already lives in `[0, 1)` and `φ` is applied directly.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedContinuousObservable {
    function: RealFunction,
    lipschitz: f64,
    depth: usize,
}

impl EncodedContinuousObservable {
    pub fn new(function: RealFunction, depth: usize) -> Result<Self> {
        function.validate()?;
        if depth > 60 {
            return Err(Error::invalid(format!("encoding depth {depth} exceeds 60")));
        }
        Ok(Self {
            lipschitz: function.lipschitz(),
            function,
            depth,
        })
    }

    /// The identity `φ(t) = t`, Lipschitz constant 1.
    pub fn coordinate(depth: usize) -> Result<Self> {
        Self::new(RealFunction::Polynomial(vec![0.0, 1.0]), depth)
    }

    pub fn function(&self) -> &RealFunction {
        &self.function
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Evaluates on a word over coordinates `-depth ..= depth`.
    pub fn eval_word(&self, word: &[usize], alphabet: usize) -> f64 {
        debug_assert_eq!(word.len(), 2 * self.depth + 1);
        let d = self.depth as i64;
        let e = word
            .iter()
            .enumerate()
            .map(|(j, &s)| s as f64 * 0.5f64.powi(((j as i64 - d).abs() + 1) as i32))
            .sum::<f64>();
        self.function.eval(normalize(e, alphabet))
    }

    pub fn eval_shift(&self, shift: &ShiftSystem, id: u64, i: i64) -> Result<f64> {
        let d = self.depth as i64;
        let (lo, hi) = (
            i.checked_sub(d)
                .ok_or_else(|| crate::Error::IndexOverflow(format!("coordinate {i} - {d}")))?,
            i.checked_add(d)
                .ok_or_else(|| crate::Error::IndexOverflow(format!("coordinate {i} + {d}")))?,
        );
        let e = (lo..=hi)
            .map(|k| shift.symbol(id, k) as f64 * 0.5f64.powi(((k - i).abs() + 1) as i32))
            .sum::<f64>();
        Ok(self.function.eval(normalize(e, shift.alphabet())))
    }
}

fn normalize(e: f64, alphabet: usize) -> f64 {
    if alphabet <= 1 {
        0.0
    } else {
        e / (1.5 * (alphabet - 1) as f64)
    }
}
