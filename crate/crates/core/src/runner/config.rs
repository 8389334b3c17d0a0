//! TOML experiment configs. The grammar is documented in `configs/README.md`.

use crate::averaging::{SchemeFamily, WindowScheme};
use crate::convergence::IidDistribution;
use crate::error::{Error, Result};
use crate::observables::{
    CylinderObservable, EncodedContinuousObservable, FpFamily, GrowthFamily, HeavyTailGenerator,
    MassRule, Observable, RealFunction, StepObservable, TransferSpec,
};
use crate::rng::{stream, trial_rng};
use crate::systems::{CyclicSystem, RotationSystem, ShiftSystem, System};
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ConeCheck,
    Scan,
    IidLab,
    Coboundary,
    Badfun,
    Cover,
    Rates,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::ConeCheck => "cone-check",
            ExperimentKind::Scan => "scan",
            ExperimentKind::IidLab => "iid-lab",
            ExperimentKind::Coboundary => "coboundary",
            ExperimentKind::Badfun => "badfun",
            ExperimentKind::Cover => "cover",
            ExperimentKind::Rates => "rates",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    Cyclic {
        size: u64,
        #[serde(default = "one")]
        step: i64,
    },
    Shift {
        alphabet: Option<usize>,
        probs: Option<Vec<f64>>,
    },
    Rotation {
        alpha: Option<f64>,
        #[serde(default)]
        convergent: bool,
    },
}

fn one() -> i64 {
    1
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObservableSpec {
    Constant {
        value: f64,
    },
    Step {
        values: Vec<f64>,
    },
    /// Uniform values in `[-range, range]`, shifted to mean zero when
    /// `centered`.
    RandomStep {
        #[serde(default = "unit")]
        range: f64,
        #[serde(default = "yes")]
        centered: bool,
    },
    Cylinder {
        radius: usize,
        table: Vec<f64>,
    },
    RandomCylinder {
        radius: usize,
        #[serde(default = "unit")]
        range: f64,
    },
    Encoded {
        polynomial: Option<Vec<f64>>,
        knots: Option<Vec<[f64; 2]>>,
        #[serde(default)]
        depth: usize,
    },
    HeavyTail {
        p: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    Fp {
        growth_rate: Option<f64>,
        heights: Option<Vec<f64>>,
        #[serde(default = "critical")]
        masses: String,
        p: f64,
        #[serde(default = "half")]
        target: f64,
        n_max: usize,
    },
}

fn unit() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn yes() -> bool {
    true
}
fn critical() -> String {
    "critical".into()
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    pub family: String,
    pub n_max: u64,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    #[serde(default = "per_decade")]
    pub per_decade: usize,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
}

fn per_decade() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct IidSpec {
    pub distribution: String,
    pub alpha: Option<f64>,
    pub values: Option<Vec<f64>>,
    pub probs: Option<Vec<f64>>,
    /// Also run the consecutive-block demo up to this `n`.
    pub erdos_n_max: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BadFunSpec {
    #[serde(default = "badfun_size")]
    pub size: u64,
    #[serde(default = "one")]
    pub step: i64,
    pub growth_rate: Option<f64>,
    pub heights: Option<Vec<f64>>,
    #[serde(default = "critical")]
    pub masses: String,
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default = "half")]
    pub target: f64,
    #[serde(default = "six")]
    pub n_max: usize,
    pub level: Option<usize>,
    #[serde(default = "half")]
    pub eta: f64,
    pub window_cap: Option<u64>,
}

fn badfun_size() -> u64 {
    200_000
}
fn two() -> f64 {
    2.0
}
fn six() -> usize {
    6
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CoverSpec {
    /// Mass of each random set, one set per entry.
    pub masses: Vec<f64>,
    /// Defaults to one step per set.
    pub steps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSpec {
    pub ns: Vec<u64>,
    #[serde(default = "unit")]
    pub r: f64,
    pub harmonic_n: Option<u64>,
}

/// One experiment, as read from a config file.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub system: Option<SystemSpec>,
    pub observable: Option<ObservableSpec>,
    /// The `g` of `f = g - g∘T` for `coboundary` runs.
    pub transfer: Option<ObservableSpec>,
    pub scheme: Option<SchemeSpec>,
    pub lengths: Option<Vec<u64>>,
    pub deltas: Option<Vec<f64>>,
    pub trials: Option<u64>,
    pub budget: Option<u64>,
    pub exact: Option<bool>,
    pub points: Option<u64>,
    pub cone: Option<ConeSpec>,
    pub iid: Option<IidSpec>,
    pub badfun: Option<BadFunSpec>,
    pub cover: Option<CoverSpec>,
    pub rates: Option<RatesSpec>,
}

/// A problem found by [`validate`], located by its config key path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    fn new(path: &str, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// SHA-256 of the config as canonical JSON (object keys sorted), so key
/// order and formatting in the source file do not matter.
pub fn config_digest(config: &ExperimentConfig) -> String {
    let value = serde_json::to_value(config).expect("config serializes");
    let canonical = serde_json::to_string(&value).expect("json value serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

impl ExperimentConfig {
    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("seed is required (no entropy default)".into()))
    }

    pub fn build_system(&self) -> Result<System> {
        let seed = self.seed()?;
        match self.system.as_ref() {
            None => Err(Error::Config("missing [system] table".into())),
            Some(SystemSpec::Cyclic { size, step }) => Ok(CyclicSystem::new(*size, *step)?.into()),
            Some(SystemSpec::Shift { alphabet, probs }) => match (alphabet, probs) {
                (Some(_), Some(_)) => Err(Error::Config(
                    "system: give either alphabet or probs, not both".into(),
                )),
                (None, Some(p)) => Ok(ShiftSystem::new(p.clone(), seed)?.into()),
                (a, None) => Ok(ShiftSystem::uniform(a.unwrap_or(2), seed)?.into()),
            },
            Some(SystemSpec::Rotation { alpha, convergent }) => match alpha {
                None if !*convergent => Ok(RotationSystem::golden().into()),
                None => Ok(RotationSystem::new(RotationSystem::golden().alpha(), true)?.into()),
                Some(a) => Ok(RotationSystem::new(*a, *convergent)?.into()),
            },
        }
    }

    pub fn build_observable(&self, system: &System) -> Result<Observable> {
        let spec = self
            .observable
            .as_ref()
            .ok_or_else(|| Error::Config("missing [observable] table".into()))?;
        let f = build_observable(spec, system, self.seed()?)?;
        f.check_compatible(system)?;
        Ok(f)
    }

    pub fn build_transfer(&self, system: &System) -> Result<TransferSpec> {
        let spec = self
            .transfer
            .as_ref()
            .ok_or_else(|| Error::Config("missing [transfer] table".into()))?;
        let g = match build_observable(spec, system, self.seed()?)? {
            Observable::Constant(c) => TransferSpec::Constant(c),
            Observable::Step(s) => TransferSpec::Step(s),
            Observable::Cylinder(c) => TransferSpec::Cylinder(c),
            Observable::HeavyTail(h) => TransferSpec::HeavyTail(h),
            other => {
                return Err(Error::Config(format!(
                    "transfer: `{}` cannot serve as a transfer function",
                    other.name()
                )))
            }
        };
        g.to_observable().check_compatible(system)?;
        Ok(g)
    }

    pub fn build_scheme(&self) -> Result<WindowScheme> {
        let spec = self
            .scheme
            .as_ref()
            .ok_or_else(|| Error::Config("missing [scheme] table".into()))?;
        let family = SchemeFamily::parse(&spec.family)?;
        let n_max = match family.available() {
            Some(avail) if spec.n_max > avail => {
                return Err(Error::invalid(format!(
                    "n_max = {} but the explicit scheme lists {avail} pairs",
                    spec.n_max
                )))
            }
            _ => spec.n_max,
        };
        WindowScheme::new(family, n_max)
    }

    /// Window lengths from `lengths`, or else from the `[scheme]` table.
    pub fn build_lengths(&self) -> Result<Vec<u64>> {
        match (&self.lengths, &self.scheme) {
            (Some(_), Some(_)) => Err(Error::Config(
                "give either lengths or [scheme], not both".into(),
            )),
            (Some(l), None) => {
                if l.is_empty() || l[0] == 0 || l.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::invalid(
                        "lengths must be positive and increasing (increasing means strictly increasing)",
                    ));
                }
                Ok(l.clone())
            }
            (None, Some(_)) => Ok(self.build_scheme()?.lengths()),
            (None, None) => Err(Error::Config("missing lengths or [scheme] table".into())),
        }
    }

    pub fn build_deltas(&self) -> Result<Vec<f64>> {
        let d = self
            .deltas
            .as_ref()
            .ok_or_else(|| Error::Config("missing deltas".into()))?;
        if d.is_empty() {
            return Err(Error::invalid("deltas is empty"));
        }
        if let Some(bad) = d.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::invalid(format!("delta {bad} must be positive")));
        }
        Ok(d.clone())
    }

    pub fn build_iid(&self) -> Result<IidDistribution> {
        let spec = self
            .iid
            .as_ref()
            .ok_or_else(|| Error::Config("missing [iid] table".into()))?;
        match spec.distribution.as_str() {
            "rademacher" => Ok(IidDistribution::Rademacher),
            "uniform-centered" => Ok(IidDistribution::UniformCentered),
            "pareto-centered" => {
                let alpha = spec
                    .alpha
                    .ok_or_else(|| Error::Config("iid: pareto-centered needs alpha".into()))?;
                Ok(IidDistribution::ParetoCentered { alpha })
            }
            "discrete" => match (&spec.values, &spec.probs) {
                (Some(v), Some(p)) => Ok(IidDistribution::Discrete {
                    values: v.clone(),
                    probs: p.clone(),
                }),
                _ => Err(Error::Config("iid: discrete needs values and probs".into())),
            },
            other => Err(Error::Config(format!("iid: unknown distribution `{other}`"))),
        }
    }
}

fn parse_masses(name: &str) -> Result<MassRule> {
    match name {
        "critical" => Ok(MassRule::Critical),
        "polynomial-rate" => Ok(MassRule::PolynomialRate),
        other => Err(Error::Config(format!("unknown mass rule `{other}`"))),
    }
}

pub(crate) fn fp_family(
    growth_rate: Option<f64>,
    heights: &Option<Vec<f64>>,
    masses: &str,
) -> Result<FpFamily> {
    let growth = match (growth_rate, heights) {
        (Some(_), Some(_)) => {
            return Err(Error::Config("give either growth_rate or heights, not both".into()))
        }
        (_, Some(h)) => GrowthFamily::Explicit(h.clone()),
        (r, None) => GrowthFamily::Exponential {
            rate: r.unwrap_or(1.0),
        },
    };
    Ok(FpFamily {
        growth,
        masses: parse_masses(masses)?,
    })
}

fn build_observable(spec: &ObservableSpec, system: &System, seed: u64) -> Result<Observable> {
    let mut rng = trial_rng(seed, stream::OBSERVABLES, 0);
    match spec {
        ObservableSpec::Constant { value } => Ok(Observable::Constant(*value)),
        ObservableSpec::Step { values } => Ok(Observable::Step(StepObservable::new(values.clone()))),
        ObservableSpec::RandomStep { range, centered } => {
            let c = system.as_cyclic()?;
            if !(*range > 0.0 && range.is_finite()) {
                return Err(Error::invalid(format!("range {range} must be positive")));
            }
            let mut v: Vec<f64> = (0..c.size()).map(|_| rng.random_range(-range..=*range)).collect();
            if *centered {
                let mean = crate::observables::neumaier_sum(v.iter().copied()) / v.len() as f64;
                v.iter_mut().for_each(|x| *x -= mean);
            }
            Ok(Observable::Step(StepObservable::new(v)))
        }
        ObservableSpec::Cylinder { radius, table } => {
            let sh = system.as_shift()?;
            Ok(Observable::Cylinder(CylinderObservable::new(
                sh.alphabet(),
                *radius,
                table.clone(),
            )?))
        }
        ObservableSpec::RandomCylinder { radius, range } => {
            let sh = system.as_shift()?;
            if !(*range > 0.0 && range.is_finite()) {
                return Err(Error::invalid(format!("range {range} must be positive")));
            }
            Ok(Observable::Cylinder(CylinderObservable::from_fn(
                sh.alphabet(),
                *radius,
                |_| rng.random_range(-range..=*range),
            )?))
        }
        ObservableSpec::Encoded {
            polynomial,
            knots,
            depth,
        } => {
            let function = match (polynomial, knots) {
                (Some(c), None) => RealFunction::Polynomial(c.clone()),
                (None, Some(k)) => RealFunction::PiecewiseLinear(k.iter().map(|p| (p[0], p[1])).collect()),
                _ => {
                    return Err(Error::Config(
                        "encoded observable needs exactly one of polynomial or knots".into(),
                    ))
                }
            };
            Ok(Observable::Encoded(EncodedContinuousObservable::new(function, *depth)?))
        }
        ObservableSpec::HeavyTail { p, scale } => {
            Ok(Observable::HeavyTail(HeavyTailGenerator::new(*p, *scale)?))
        }
        ObservableSpec::Fp {
            growth_rate,
            heights,
            masses,
            p,
            target,
            n_max,
        } => {
            let c = system.as_cyclic()?;
            let family = fp_family(*growth_rate, heights, masses)?;
            let (f, _) = crate::observables::build_fp_function(&family, *p, *target, *n_max, c)?;
            Ok(Observable::Step(f))
        }
    }
}

/// Structural and semantic checks; an empty list means the config can run.
pub fn validate(config: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut check = |path: &str, r: Result<()>| {
        if let Err(e) = r {
            out.push(Diagnostic::new(path, e.to_string()));
        }
    };
    if config.seed.is_none() {
        check("seed", Err(Error::Config("seed is required (no entropy default)".into())));
        // Without a seed nothing random can be built; stop here.
        return out;
    }
    let needs_system = !matches!(
        config.kind,
        ExperimentKind::ConeCheck | ExperimentKind::IidLab | ExperimentKind::Badfun
    );
    let system = if needs_system {
        match config.build_system() {
            Ok(s) => Some(s),
            Err(e) => {
                check("system", Err(e));
                None
            }
        }
    } else {
        None
    };
    if let Some(t) = config.trials {
        if t == 0 {
            check("trials", Err(Error::invalid("trials must be positive")));
        }
    }
    if config.points == Some(0) {
        check("points", Err(Error::invalid("points must be positive")));
    }

    match config.kind {
        ExperimentKind::ConeCheck => {
            check("scheme", config.build_scheme().map(|_| ()));
            if let Some(c) = &config.cone {
                if c.per_decade == 0 {
                    check("cone.per_decade", Err(Error::invalid("per_decade must be positive")));
                }
            }
        }
        ExperimentKind::Scan => {
            if let Some(s) = &system {
                check("observable", config.build_observable(s).map(|_| ()));
            }
            check("lengths", config.build_lengths().map(|_| ()));
            check("deltas", config.build_deltas().map(|_| ()));
        }
        ExperimentKind::IidLab => {
            check("iid", config.build_iid().and_then(|d| {
                crate::convergence::IidSampler::new(d, 0).map(|_| ())
            }));
            check("lengths", config.build_lengths().map(|_| ()));
            check("deltas", config.build_deltas().map(|_| ()));
        }
        ExperimentKind::Coboundary => {
            if let Some(s) = &system {
                check("transfer", config.build_transfer(s).map(|_| ()));
            }
            check("scheme", config.build_scheme().map(|_| ()));
        }
        ExperimentKind::Badfun => match &config.badfun {
            None => check("badfun", Err(Error::Config("missing [badfun] table".into()))),
            Some(b) => {
                check("badfun", fp_family(b.growth_rate, &b.heights, &b.masses).map(|_| ()));
                if !(b.p > 1.0) {
                    check("badfun.p", Err(Error::invalid(format!("p = {} must exceed 1", b.p))));
                }
                if !(b.eta > 0.0 && b.eta < 1.0) {
                    check("badfun.eta", Err(Error::invalid(format!("η = {} not in (0, 1)", b.eta))));
                }
                if let Some(l) = b.level {
                    if l == 0 || l > b.n_max {
                        check("badfun.level", Err(Error::invalid(format!("level {l} outside 1..={}", b.n_max))));
                    }
                }
            }
        },
        ExperimentKind::Cover => {
            if let Some(s) = &system {
                check("system", s.as_cyclic().map(|_| ()));
            }
            match &config.cover {
                None => check("cover", Err(Error::Config("missing [cover] table".into()))),
                Some(c) => {
                    if c.masses.is_empty() {
                        check("cover.masses", Err(Error::invalid("no sets given")));
                    }
                    if let Some(m) = c.masses.iter().find(|m| !(**m > 0.0 && **m <= 1.0)) {
                        check("cover.masses", Err(Error::invalid(format!("mass {m} not in (0, 1]"))));
                    }
                }
            }
        }
        ExperimentKind::Rates => {
            if let Some(s) = &system {
                check("system", s.as_cyclic().map(|_| ()));
                check("observable", config.build_observable(s).map(|_| ()));
            }
            match &config.rates {
                None => check("rates", Err(Error::Config("missing [rates] table".into()))),
                Some(r) => {
                    if r.ns.is_empty() || r.ns.contains(&0) {
                        check("rates.ns", Err(Error::invalid("ns must be nonempty and positive")));
                    }
                    if !(r.r >= 1.0) {
                        check("rates.r", Err(Error::invalid(format!("norm exponent {} below 1", r.r))));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONE: &str = r#"
kind = "cone-check"
seed = 1
[scheme]
family = "quadratic"
n_max = 100
"#;

    #[test]
    fn valid_config_has_no_diagnostics() {
        let c = parse_config(CONE).unwrap();
        assert!(validate(&c).is_empty(), "{:?}", validate(&c));
    }

    #[test]
    fn missing_seed_is_reported() {
        let c = parse_config(&CONE.replace("seed = 1\n", "")).unwrap();
        let d = validate(&c);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, "seed");
    }

    #[test]
    fn digest_ignores_key_order() {
        let a = parse_config(CONE).unwrap();
        let b = parse_config(
            "seed = 1\nkind = \"cone-check\"\n[scheme]\nn_max = 100\nfamily = \"quadratic\"\n",
        )
        .unwrap();
        assert_eq!(config_digest(&a), config_digest(&b));
        let c = parse_config(&CONE.replace("seed = 1", "seed = 2")).unwrap();
        assert_ne!(config_digest(&a), config_digest(&c));
    }

    #[test]
    fn zero_delta_and_unsorted_lengths() {
        let text = r#"
kind = "scan"
seed = 3
deltas = [0.0, 1.0]
lengths = [1, 3, 3]
[system]
type = "cyclic"
size = 16
[observable]
type = "random-step"
"#;
        let d = validate(&parse_config(text).unwrap());
        let paths: Vec<&str> = d.iter().map(|x| x.path.as_str()).collect();
        assert_eq!(paths, vec!["lengths", "deltas"]);
        assert!(d[0].message.contains("increasing means strictly increasing"));
    }

    #[test]
    fn explicit_scheme_not_increasing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pairs.csv");
        std::fs::write(&path, "0,1\n5,4\n9,4\n").unwrap();
        let text = format!(
            "kind = \"cone-check\"\nseed = 1\n[scheme]\nfamily = \"explicit:{}\"\nn_max = 3\n",
            path.display()
        );
        let d = validate(&parse_config(&text).unwrap());
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("increasing means strictly increasing"), "{}", d[0]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_config(&format!("{CONE}\nbogus = 1\n")).is_err());
    }
}
