//! Batch runs driven by TOML configs: validation, dispatch, and
//! reproducible CSV/JSON outputs.

mod config;
mod output;

pub use config::{
    config_digest, load_config, parse_config, validate, BadFunSpec, ConeSpec, CoverSpec,
    Diagnostic, ExperimentConfig, ExperimentKind, IidSpec, ObservableSpec, RatesSpec,
    SchemeSpec, SystemSpec,
};
pub use output::{format_real, output_path, write_atomic, Artifact, Cell, Csv};

use crate::adversary::{greedy_cover, run_bad_function, BadFunctionSetup};
use crate::averaging::{harmonic_divergence_check, moving_average, rate_over_check, rate_under_transfer, telescoped_average};
use crate::cone::{ratio_profile, LambdaGrid};
use crate::convergence::{
    erdos_block_demo, exceedance_scan, iid_exceedance_scan, ExceedanceScan, IidSampler,
    ScanOptions,
};
use crate::error::{Error, Result};
use crate::observables::{coboundary_from_transfer, Observable};
use crate::rng::{stream, trial_rng};
use rand::seq::index;
use serde::Serialize;
use serde_json::json;
use std::path::Path;
use std::time::Instant;

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_BUDGET: u64 = 1 << 32;
pub const DEFAULT_POINTS: u64 = 1_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

/// What a run produced. Everything except `wall_clock_seconds` is a
/// function of the config and the tool version.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub kind: String,
    pub config_digest: String,
    pub version: String,
    pub outputs: Vec<OutputRecord>,
    pub wall_clock_seconds: f64,
}

/// Why a run stopped.
#[derive(Debug)]
pub enum RunFailure {
    Validation(Vec<Diagnostic>),
    Failed(Error),
}

impl RunFailure {
    /// 2 for bad input, 3 for budget overruns, 4 for I/O, 1 for internal
    /// invariant failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunFailure::Validation(_) => 2,
            RunFailure::Failed(e) => match e {
                Error::BudgetExceeded { .. } => 3,
                Error::Io(_) => 4,
                Error::Invariant(_) => 1,
                _ => 2,
            },
        }
    }

    /// The machine-readable error record printed by the CLI.
    pub fn record(&self) -> serde_json::Value {
        let (kind, diagnostics) = match self {
            RunFailure::Validation(d) => ("validation", d.clone()),
            RunFailure::Failed(e) => {
                let kind = match self.exit_code() {
                    3 => "budget",
                    4 => "io",
                    1 => "invariant",
                    _ => "validation",
                };
                (
                    kind,
                    vec![Diagnostic {
                        path: String::new(),
                        message: e.to_string(),
                    }],
                )
            }
        };
        json!({
            "error": {
                "kind": kind,
                "exit_code": self.exit_code(),
                "diagnostics": diagnostics,
            }
        })
    }
}

impl From<Error> for RunFailure {
    fn from(e: Error) -> Self {
        RunFailure::Failed(e)
    }
}

/// Validates, computes every output in memory, then writes them (and the
/// manifest `<prefix>.manifest.json`) with [`write_atomic`]. Nothing is
/// written unless every output was computed.
pub fn run(config: &ExperimentConfig, prefix: &Path) -> std::result::Result<RunManifest, RunFailure> {
    let started = Instant::now();
    let diagnostics = validate(config);
    if !diagnostics.is_empty() {
        return Err(RunFailure::Validation(diagnostics));
    }
    let artifacts = execute(config)?;
    let mut outputs = Vec::with_capacity(artifacts.len());
    for a in &artifacts {
        let path = output_path(prefix, &a.suffix);
        write_atomic(&path, &a.bytes)?;
        outputs.push(OutputRecord {
            path: path.display().to_string(),
            sha256: a.sha256(),
        });
    }
    let manifest = RunManifest {
        kind: config.kind.as_str().into(),
        config_digest: config_digest(config),
        version: env!("CARGO_PKG_VERSION").into(),
        outputs,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let m = Artifact::json(".manifest.json", &manifest);
    write_atomic(&output_path(prefix, &m.suffix), &m.bytes)?;
    Ok(manifest)
}

/// Computes a run's outputs without touching the file system.
pub fn execute(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    match config.kind {
        ExperimentKind::ConeCheck => cone_check(config),
        ExperimentKind::Scan => scan(config),
        ExperimentKind::IidLab => iid_lab(config),
        ExperimentKind::Coboundary => coboundary(config),
        ExperimentKind::Badfun => badfun(config),
        ExperimentKind::Cover => cover(config),
        ExperimentKind::Rates => rates(config),
    }
}

fn cone_check(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let scheme = config.build_scheme()?;
    let grid = match &config.cone {
        Some(c) => LambdaGrid {
            per_decade: c.per_decade,
            lambda_min: c.lambda_min,
            lambda_max: c.lambda_max,
        },
        None => LambdaGrid::default(),
    };
    let profile = ratio_profile(&scheme, scheme.len(), &grid)?;
    let mut csv = Csv::new(&["lambda", "C_lambda", "ratio"]);
    for ((l, c), r) in profile.lambdas.iter().zip(&profile.c_values).zip(profile.ratios()) {
        csv.row(vec![(*l).into(), (*c).into(), r.into()]);
    }
    let verdict = json!({
        "max_ratio": profile.max_ratio,
        "witness_lambda": profile.witness_lambda,
        "verdict": profile.verdict.as_str(),
    });
    Ok(vec![Artifact::csv(".csv", csv), Artifact::json(".json", &verdict)])
}

fn scan_outputs(scan: &ExceedanceScan) -> Vec<Artifact> {
    let mut csv = Csv::new(&["n", "L_n", "delta", "estimate", "stderr", "partial_sum"]);
    for (d, &delta) in scan.deltas.iter().enumerate() {
        for (j, &l) in scan.lengths.iter().enumerate() {
            csv.row(vec![
                (j + 1).into(),
                l.into(),
                delta.into(),
                scan.estimates[d][j].into(),
                scan.stderrs[d][j].into(),
                scan.partial_sums[d][j].into(),
            ]);
        }
    }
    let per_delta: Vec<_> = scan
        .deltas
        .iter()
        .zip(&scan.diagnostics)
        .map(|(delta, g)| {
            json!({
                "delta": delta,
                "slope": g.slope,
                "final_increment": g.final_increment,
                "verdict": g.verdict.as_str(),
            })
        })
        .collect();
    let verdict = json!({
        "exact": scan.exact,
        "samples": scan.samples,
        "verdicts": per_delta,
    });
    vec![Artifact::csv(".csv", csv), Artifact::json(".json", &verdict)]
}

fn scan(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let system = config.build_system()?;
    let f = config.build_observable(&system)?;
    let opts = ScanOptions {
        trials: config.trials.unwrap_or(DEFAULT_TRIALS),
        seed: config.seed()?,
        budget: config.budget.unwrap_or(DEFAULT_BUDGET) as u128,
        allow_exact: config.exact.unwrap_or(true),
    };
    let scan = exceedance_scan(&system, &f, &config.build_lengths()?, &config.build_deltas()?, &opts)?;
    Ok(scan_outputs(&scan))
}

fn iid_lab(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let sampler = IidSampler::new(config.build_iid()?, config.seed()?)?;
    let trials = config.trials.unwrap_or(DEFAULT_TRIALS);
    let scan = iid_exceedance_scan(
        &sampler,
        &config.build_lengths()?,
        &config.build_deltas()?,
        trials,
        config.exact.unwrap_or(false),
    )?;
    let mut out = scan_outputs(&scan);
    if let Some(n_max) = config.iid.as_ref().and_then(|i| i.erdos_n_max) {
        let report = erdos_block_demo(&sampler, n_max, trials)?;
        out.push(Artifact::json(
            ".erdos.json",
            &json!({
                "n_max": n_max,
                "trials": trials,
                "mean_count": report.mean_count_by_n.last().copied().unwrap_or(0.0),
                "mean_count_by_n": report.mean_count_by_n,
                "disjoint": report.disjoint,
                "max_abs_correlation": report.max_abs_correlation,
                "correlation_threshold": report.correlation_threshold,
            }),
        ));
    }
    Ok(out)
}

fn coboundary(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let system = config.build_system()?;
    let g = config.build_transfer(&system)?;
    let f = coboundary_from_transfer(&g, &system)?;
    let scheme = config.build_scheme()?;
    let points = config.points.unwrap_or(DEFAULT_POINTS);
    let budget = config.budget.unwrap_or(DEFAULT_BUDGET) as u128;
    let work: u128 = scheme.lengths().iter().map(|&l| l as u128).sum::<u128>() * points as u128;
    if work > budget {
        return Err(Error::BudgetExceeded { needed: work, budget });
    }
    let seed = config.seed()?;
    let xs: Vec<_> = (0..points).map(|t| system.sample_point(seed, t)).collect();
    let sup = g.sup_norm();
    let mut csv = Csv::new(&["n", "v_n", "L_n", "max_abs_average", "sup_bound", "max_identity_error"]);
    let mut worst_error = 0.0f64;
    let mut bound_holds = true;
    for (j, &(v, l)) in scheme.pairs().iter().enumerate() {
        let mut max_abs = 0.0f64;
        let mut max_err = 0.0f64;
        for x in &xs {
            let a = moving_average(&system, &f, x, v, l)?;
            let b = telescoped_average(&system, &g, x, v, l)?;
            max_abs = max_abs.max(a.abs());
            max_err = max_err.max((a - b).abs());
        }
        let bound = 2.0 * sup / l as f64;
        bound_holds &= max_abs <= bound * (1.0 + 1e-12) + 1e-12;
        worst_error = worst_error.max(max_err);
        csv.row(vec![(j + 1).into(), v.into(), l.into(), max_abs.into(), bound.into(), max_err.into()]);
    }
    let summary = json!({
        "points": points,
        "max_identity_error": worst_error,
        "sup_norm": if sup.is_finite() { json!(sup) } else { json!(null) },
        "sup_bound_holds": bound_holds,
    });
    Ok(vec![Artifact::csv(".csv", csv), Artifact::json(".json", &summary)])
}

fn badfun(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let b = config
        .badfun
        .as_ref()
        .ok_or_else(|| Error::Config("missing [badfun] table".into()))?;
    let setup = BadFunctionSetup {
        size: b.size,
        step: b.step,
        family: config::fp_family(b.growth_rate, &b.heights, &b.masses)?,
        p: b.p,
        target: b.target,
        n_max: b.n_max,
        level: b.level.unwrap_or(b.n_max),
        eta: b.eta,
        window_cap: b.window_cap,
        points: config.points.unwrap_or(DEFAULT_POINTS),
        seed: config.seed()?,
    };
    let (report, scheme) = run_bad_function(&setup)?;
    let mut csv = Csv::new(&["i", "v_i", "L_i"]);
    for (i, &(v, l)) in scheme.pairs().iter().enumerate() {
        csv.row(vec![(i + 1).into(), v.into(), l.into()]);
    }
    let lim = &report.limsup;
    let summary = json!({
        "size": report.size,
        "level": report.level,
        "a_n": report.a_n,
        "peak_mass": report.peak_mass,
        "eta": report.eta,
        "delta": report.delta,
        "tau": report.tau,
        "min_window": report.min_window,
        "max_window": report.max_window,
        "bad_mass": report.bad_mass,
        "stopping": report.stopping,
        "cover": report.cover,
        "scheme_len": report.scheme_len,
        "classes": report.classes,
        "growth_ok": report.growth_ok,
        "monotone": report.monotone,
        "threshold": lim.threshold,
        "fraction_above": lim.fraction_above,
        "quantiles": lim.quantiles,
    });
    Ok(vec![Artifact::json(".json", &summary), Artifact::csv(".scheme.csv", csv)])
}

fn cover(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let system = config.build_system()?;
    let c = system.as_cyclic()?;
    let spec = config
        .cover
        .as_ref()
        .ok_or_else(|| Error::Config("missing [cover] table".into()))?;
    let n = c.size();
    let seed = config.seed()?;
    let sets: Vec<Vec<u64>> = spec
        .masses
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let size = ((m * n as f64).round() as u64).clamp(1, n);
            let mut rng = trial_rng(seed, stream::COVER, k as u64);
            let mut s: Vec<u64> = index::sample(&mut rng, n as usize, size as usize)
                .into_iter()
                .map(|i| i as u64)
                .collect();
            s.sort_unstable();
            s
        })
        .collect();
    let steps = spec.steps.unwrap_or(sets.len());
    let plan = greedy_cover(c, &sets, steps)?;
    let mut csv = Csv::new(&["step", "shift", "set_mass", "leftover", "product_bound"]);
    for k in 0..steps {
        let mass = sets[k % sets.len()].len() as f64 / n as f64;
        csv.row(vec![
            (k + 1).into(),
            plan.shifts[k].into(),
            mass.into(),
            plan.leftover[k].into(),
            plan.product_bound[k].into(),
        ]);
    }
    let summary = json!({
        "size": n,
        "exhaustive": plan.exhaustive,
        "final_leftover": plan.leftover.last().copied().unwrap_or(1.0),
        "final_product_bound": plan.product_bound.last().copied().unwrap_or(1.0),
        "bound_holds": plan.exhaustive,
    });
    Ok(vec![Artifact::csv(".csv", csv), Artifact::json(".json", &summary)])
}

fn rates(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let system = config.build_system()?;
    let f = config.build_observable(&system)?;
    let spec = config
        .rates
        .as_ref()
        .ok_or_else(|| Error::Config("missing [rates] table".into()))?;
    let mut csv = Csv::new(&["n", "identity_error", "over_lhs", "over_rhs", "over_holds"]);
    for &n in &spec.ns {
        let under = rate_under_transfer(&system, &f, n)?;
        let over = rate_over_check(&system, &f, &Observable::Step(under.h), spec.r, n)?;
        csv.row(vec![
            n.into(),
            under.identity_error.into(),
            over.lhs.into(),
            over.rhs.into(),
            over.holds.into(),
        ]);
    }
    let mut out = vec![Artifact::csv(".csv", csv)];
    if let Some(n_max) = spec.harmonic_n {
        let h = harmonic_divergence_check(&system, &f, n_max)?;
        out.push(Artifact::json(
            ".json",
            &json!({ "harmonic_n": n_max, "lhs": h.lhs, "rhs": h.rhs, "holds": h.holds }),
        ));
    }
    Ok(out)
}
