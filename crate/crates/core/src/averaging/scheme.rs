use crate::error::{Error, Result};
use std::fmt;
use std::path::Path;

/// Named window-scheme families. Pairs are `(v_n, L_n)` for `n >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum SchemeFamily {
    /// `(n², n)`.
    Quadratic,
    /// `(4^n, 2^n)`.
    Lacunary,
    /// `(2^{2^{n+1}}, 2^{2^n})`; overflows 64 bits at `n = 5`.
    Hyperlacunary,
    /// `(n(n+1)/2, n)`: consecutive disjoint blocks.
    Triangular,
    /// `(0, ⌊n^D⌋)` with `D >= 1`.
    Power(f64),
    /// `(0, 2^n)`.
    Exponential,
    /// `(0, ⌊exp(√n)⌋)`.
    ExpSqrt,
    /// Pairs listed in order.
    Explicit(Vec<(i64, u64)>),
}

impl SchemeFamily {
    /// Parses `quadratic`, `power:1.5`, `explicit:pairs.csv`, and so on.
    /// Explicit files hold one `v,L` pair per line; blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(name: &str) -> Result<Self> {
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let family = match (head, arg) {
            ("quadratic", None) => SchemeFamily::Quadratic,
            ("lacunary", None) => SchemeFamily::Lacunary,
            ("hyperlacunary", None) => SchemeFamily::Hyperlacunary,
            ("triangular", None) => SchemeFamily::Triangular,
            ("exponential", None) => SchemeFamily::Exponential,
            ("expsqrt", None) => SchemeFamily::ExpSqrt,
            ("power", Some(d)) => SchemeFamily::Power(
                d.parse()
                    .map_err(|_| Error::invalid(format!("bad power exponent `{d}`")))?,
            ),
            ("explicit", Some(path)) => SchemeFamily::Explicit(read_pairs(Path::new(path))?),
            _ => return Err(Error::invalid(format!("unknown scheme family `{name}`"))),
        };
        family.validate()?;
        Ok(family)
    }

    fn validate(&self) -> Result<()> {
        match self {
            SchemeFamily::Power(d) if !(*d >= 1.0 && d.is_finite()) => Err(Error::invalid(
                format!("power exponent {d} must be at least 1 for strictly increasing lengths"),
            )),
            SchemeFamily::Explicit(pairs) => {
                if pairs.is_empty() {
                    return Err(Error::invalid("explicit scheme is empty"));
                }
                check_lengths(pairs)
            }
            _ => Ok(()),
        }
    }

    /// The `n`-th pair, `n >= 1`.
    pub fn pair(&self, n: u64) -> Result<(i64, u64)> {
        if n == 0 {
            return Err(Error::invalid("scheme indices start at 1"));
        }
        let overflow = || Error::SchemeOverflow {
            family: self.to_string(),
            index: n,
        };
        let pow2 = |e: u64| -> Option<u64> { (e < 64).then(|| 1u64 << e) };
        let (v, l): (i128, u64) = match self {
            SchemeFamily::Quadratic => (
                (n as i128) * (n as i128),
                n,
            ),
            SchemeFamily::Lacunary => (
                pow2(2 * n).ok_or_else(overflow)? as i128,
                pow2(n).ok_or_else(overflow)?,
            ),
            SchemeFamily::Hyperlacunary => {
                let ev = pow2(n + 1).ok_or_else(overflow)?;
                let el = pow2(n).ok_or_else(overflow)?;
                (
                    pow2(ev).ok_or_else(overflow)? as i128,
                    pow2(el).ok_or_else(overflow)?,
                )
            }
            SchemeFamily::Triangular => ((n as i128) * (n as i128 + 1) / 2, n),
            SchemeFamily::Power(d) => (0, floor_power(n, *d).ok_or_else(overflow)?),
            SchemeFamily::Exponential => (0, pow2(n).ok_or_else(overflow)?),
            SchemeFamily::ExpSqrt => {
                let l = (n as f64).sqrt().exp().floor();
                if l >= 2f64.powi(63) {
                    return Err(overflow());
                }
                (0, l as u64)
            }
            SchemeFamily::Explicit(pairs) => {
                let &(v, l) = pairs.get(n as usize - 1).ok_or_else(|| {
                    Error::invalid(format!(
                        "explicit scheme has {} pairs, asked for pair {n}",
                        pairs.len()
                    ))
                })?;
                (v as i128, l)
            }
        };
        let v = i64::try_from(v).map_err(|_| overflow())?;
        if l > i64::MAX as u64 {
            return Err(overflow());
        }
        Ok((v, l))
    }

    /// How many pairs exist, if finite.
    pub fn available(&self) -> Option<u64> {
        match self {
            SchemeFamily::Explicit(p) => Some(p.len() as u64),
            _ => None,
        }
    }
}

impl fmt::Display for SchemeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeFamily::Quadratic => write!(f, "quadratic"),
            SchemeFamily::Lacunary => write!(f, "lacunary"),
            SchemeFamily::Hyperlacunary => write!(f, "hyperlacunary"),
            SchemeFamily::Triangular => write!(f, "triangular"),
            SchemeFamily::Power(d) => write!(f, "power:{d}"),
            SchemeFamily::Exponential => write!(f, "exponential"),
            SchemeFamily::ExpSqrt => write!(f, "expsqrt"),
            SchemeFamily::Explicit(p) => write!(f, "explicit[{}]", p.len()),
        }
    }
}

/// `⌊n^d⌋` robust to `powf` landing just below an exact integer.
fn floor_power(n: u64, d: f64) -> Option<u64> {
    if d.fract() == 0.0 && d <= 64.0 {
        return n.checked_pow(d as u32);
    }
    let x = (n as f64).powf(d);
    if !(x < 2f64.powi(63)) {
        return None;
    }
    let r = x.round();
    let y = if (x - r).abs() <= 1e-9 * x.max(1.0) { r } else { x.floor() };
    Some(y as u64)
}

fn check_lengths(pairs: &[(i64, u64)]) -> Result<()> {
    if let Some(j) = pairs.iter().position(|&(_, l)| l == 0) {
        return Err(Error::invalid(format!("L_{} = 0; lengths must be at least 1", j + 1)));
    }
    if let Some(j) = pairs.windows(2).position(|w| w[1].1 <= w[0].1) {
        return Err(Error::invalid(format!(
            "L_{} = {} does not exceed L_{} = {}; increasing means strictly increasing",
            j + 2,
            pairs[j + 1].1,
            j + 1,
            pairs[j].1
        )));
    }
    Ok(())
}

fn read_pairs(path: &Path) -> Result<Vec<(i64, u64)>> {
    let text = std::fs::read_to_string(path)?;
    parse_pairs(&text)
}

pub(crate) fn parse_pairs(text: &str) -> Result<Vec<(i64, u64)>> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::invalid(format!("line {}: expected `v,L`, got `{line}`", lineno + 1));
        let (v, l) = line.split_once(',').ok_or_else(bad)?;
        pairs.push((
            v.trim().parse().map_err(|_| bad())?,
            l.trim().parse().map_err(|_| bad())?,
        ));
    }
    Ok(pairs)
}

/// The `n`-th pair of `family`.
pub fn scheme_generate(family: &SchemeFamily, n: u64) -> Result<(i64, u64)> {
    family.pair(n)
}

/// A validated prefix `(v_1, L_1), .., (v_n, L_n)` of a family.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowScheme {
    family: SchemeFamily,
    pairs: Vec<(i64, u64)>,
}

impl WindowScheme {
    pub fn new(family: SchemeFamily, n_max: u64) -> Result<Self> {
        family.validate()?;
        let pairs = (1..=n_max)
            .map(|n| family.pair(n))
            .collect::<Result<Vec<_>>>()?;
        check_lengths(&pairs)?;
        Ok(Self { family, pairs })
    }

    /// Wraps a list of pairs, checking that lengths strictly increase.
    pub fn explicit(pairs: Vec<(i64, u64)>) -> Result<Self> {
        let n = pairs.len() as u64;
        Self::new(SchemeFamily::Explicit(pairs), n)
    }

    pub fn family(&self) -> &SchemeFamily {
        &self.family
    }

    pub fn pairs(&self) -> &[(i64, u64)] {
        &self.pairs
    }

    pub fn lengths(&self) -> Vec<u64> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_pairs() {
        assert_eq!(SchemeFamily::Quadratic.pair(3).unwrap(), (9, 3));
        assert_eq!(SchemeFamily::Hyperlacunary.pair(2).unwrap(), (256, 16));
        assert_eq!(SchemeFamily::Triangular.pair(3).unwrap(), (6, 3));
        assert_eq!(SchemeFamily::Lacunary.pair(3).unwrap(), (64, 8));
        assert_eq!(SchemeFamily::Exponential.pair(10).unwrap(), (0, 1024));
        assert_eq!(SchemeFamily::ExpSqrt.pair(4).unwrap(), (0, 7));
        assert_eq!(SchemeFamily::Power(2.0).pair(7).unwrap(), (0, 49));
        assert_eq!(SchemeFamily::Power(1.5).pair(4).unwrap(), (0, 8));
    }

    #[test]
    fn hyperlacunary_overflows_at_five() {
        assert_eq!(SchemeFamily::Hyperlacunary.pair(4).unwrap(), (1 << 32, 65536));
        assert!(matches!(
            SchemeFamily::Hyperlacunary.pair(5),
            Err(Error::SchemeOverflow { index: 5, .. })
        ));
        assert!(SchemeFamily::Lacunary.pair(32).is_err());
    }

    #[test]
    fn every_family_strictly_increases() {
        for fam in [
            SchemeFamily::Quadratic,
            SchemeFamily::Triangular,
            SchemeFamily::Power(1.0),
            SchemeFamily::Power(1.37),
            SchemeFamily::ExpSqrt,
            SchemeFamily::Exponential,
            SchemeFamily::Lacunary,
        ] {
            let n = if matches!(fam, SchemeFamily::Exponential | SchemeFamily::Lacunary) {
                30
            } else {
                1500
            };
            WindowScheme::new(fam.clone(), n).unwrap_or_else(|e| panic!("{fam}: {e}"));
        }
        WindowScheme::new(SchemeFamily::Hyperlacunary, 4).unwrap();
    }

    #[test]
    fn parse_names() {
        assert_eq!(SchemeFamily::parse("power:2.5").unwrap(), SchemeFamily::Power(2.5));
        assert_eq!(SchemeFamily::parse("expsqrt").unwrap(), SchemeFamily::ExpSqrt);
        assert!(SchemeFamily::parse("power:0.5").is_err());
        assert!(SchemeFamily::parse("cubic").is_err());
    }

    #[test]
    fn explicit_requires_strict_increase() {
        let err = WindowScheme::explicit(vec![(0, 1), (5, 3), (2, 3)]).unwrap_err();
        assert!(err.to_string().contains("strictly increasing"), "{err}");
        assert!(WindowScheme::explicit(vec![(0, 0)]).is_err());
        let ok = WindowScheme::explicit(vec![(-4, 1), (7, 2)]).unwrap();
        assert_eq!(ok.lengths(), vec![1, 2]);
    }

    #[test]
    fn explicit_file_round_trip() {
        let pairs = parse_pairs("# v,L\n0,1\n\n-3, 4\n").unwrap();
        assert_eq!(pairs, vec![(0, 1), (-3, 4)]);
        assert!(parse_pairs("1;2").is_err());
    }
}
