//! Convergence study: particle ensembles against the kinetic reference.

use std::fmt::Write as _;

use log::info;
use rayon::prelude::*;

use crate::chaos::{
    cell_masses_on, chaos_defect, default_test_pairs, empirical_marginal, log_log_slope,
    marginal_distance, multinomial_l1_floor, prop1_bound, theorem1_bound, Estimator, Metric,
    PairMoments, TestPair,
};
use crate::config::StudyConfig;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::kinetic::{solve, DistributionFn};
use crate::rank::Configuration;
use crate::sim::{sample_initial, RngStream, SimState};

/// Stream index for run `run` of the ensemble with `n` particles.
pub fn run_stream(seed: u64, n: usize, run: usize) -> RngStream {
    RngStream::new(seed, ((n as u64) << 32) | run as u64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub t: f64,
    pub metric: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub prop1_bound: f64,
    pub theorem1_bound: f64,
    pub bound_vacuous: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeRow {
    pub t: f64,
    pub estimator: Estimator,
    pub pair: TestPair,
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyReport {
    pub config_json: String,
    pub rows: Vec<ReportRow>,
    pub slopes: Vec<SlopeRow>,
}

pub const REPORT_HEADER: &str =
    "N,t,metric,value,stderr,prop1_bound,theorem1_bound,bound_vacuous_flag";

impl StudyReport {
    pub fn row(&self, n: usize, t: f64, metric: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.t == t && r.metric == metric)
    }

    pub fn slope(&self, t: f64, estimator: Estimator, pair: TestPair) -> Option<f64> {
        self.slopes
            .iter()
            .find(|s| s.t == t && s.estimator == estimator && s.pair == pair)
            .and_then(|s| s.slope)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# config: {}", self.config_json).unwrap();
        writeln!(out, "{REPORT_HEADER}").unwrap();
        for r in &self.rows {
            let stderr = r.stderr.map(|s| s.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.n,
                r.t,
                r.metric,
                r.value,
                stderr,
                r.prop1_bound,
                r.theorem1_bound,
                r.bound_vacuous as u8
            )
            .unwrap();
        }
        out
    }

    pub fn slopes_csv(&self) -> String {
        let mut out = String::from("t,estimator,pair,slope\n");
        for s in &self.slopes {
            let slope = s.slope.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{}",
                s.t,
                s.estimator.name(),
                s.pair.label(),
                slope
            )
            .unwrap();
        }
        out
    }
}

pub fn defect_metric(estimator: Estimator, pair: TestPair) -> String {
    format!("defect_{}:{}", estimator.name(), pair.label())
}

/// Kinetic reference at the configured snapshot times.
pub fn kinetic_reference(cfg: &StudyConfig, spec: &KernelSpec) -> Result<Vec<DistributionFn>> {
    if cfg.geometry.dim != 1 || !cfg.geometry.periodic {
        return Err(Error::Config(
            "the kinetic solver needs a periodic geometry with dim = 1".into(),
        ));
    }
    let grid = cfg.solver_grid()?;
    let f0 = DistributionFn::from_law(cfg.initial_law, grid)?;
    solve(&f0, spec, cfg.t_end, cfg.solver.dt, &cfg.snapshot_times())
}

/// Snapshots of every run of the `n`-particle ensemble, in run order.
pub fn simulate_ensemble(
    cfg: &StudyConfig,
    spec: &KernelSpec,
    n: usize,
) -> Result<Vec<Vec<Configuration>>> {
    let times = cfg.snapshot_times();
    (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let mut state: SimState = sample_initial(
                n,
                cfg.initial_law,
                cfg.geometry,
                run_stream(cfg.seed, n, run),
            )?;
            let snaps = state.run_quiet(spec, cfg.t_end, &times)?;
            Ok(snaps.into_iter().map(|s| s.cfg).collect())
        })
        .collect()
}

pub fn convergence_study(cfg: &StudyConfig) -> Result<StudyReport> {
    if cfg.runs < 2 {
        return Err(Error::Config("a study needs runs >= 2".into()));
    }
    let spec = cfg.kernel_spec()?;
    let a = spec.compute_a();
    let alpha = cfg.alpha[0];
    let times = cfg.snapshot_times();
    let reference = kinetic_reference(cfg, &spec)?;
    let hist_grid = cfg.histogram_grid()?;
    let pairs = default_test_pairs();

    let mut rows = Vec::new();
    let mut defects: Vec<(f64, Estimator, TestPair, usize, f64)> = Vec::new();
    for &n in &cfg.n_values {
        info!("N = {n}: simulating {} runs", cfg.runs);
        let ensemble = simulate_ensemble(cfg, &spec, n)?;
        for (ti, &t) in times.iter().enumerate() {
            let cfgs: Vec<&Configuration> = ensemble.iter().map(|run| &run[ti]).collect();
            let f = &reference[ti];
            let expected = cell_masses_on(f, &hist_grid)?;

            let one = theorem1_bound(1, t, n, a, alpha)?;
            let two = theorem1_bound(2, t, n, a, alpha)?;
            let p1 = prop1_bound(1, n, a)?;
            let p2 = prop1_bound(2, n, a)?;
            let mut push = |metric: String, value: f64, stderr: Option<f64>, order: u32| {
                let (p, b) = if order == 1 { (p1, one) } else { (p2, two) };
                rows.push(ReportRow {
                    n,
                    t,
                    metric,
                    value,
                    stderr,
                    prop1_bound: p,
                    theorem1_bound: b.value,
                    bound_vacuous: b.vacuous,
                });
            };

            for estimator in [Estimator::Tagged, Estimator::Pooled] {
                let hist = empirical_marginal(&cfgs, hist_grid, estimator)?;
                for &metric in &cfg.metrics {
                    let value = marginal_distance(&hist, f, metric)?;
                    push(
                        format!("{}_{}", metric.name(), estimator.name()),
                        value,
                        None,
                        1,
                    );
                    if metric == Metric::L1 {
                        let floor = multinomial_l1_floor(&expected, hist.sample_count());
                        push(format!("l1_{}_floor", estimator.name()), floor, None, 1);
                        push(
                            format!("l1_{}_excess", estimator.name()),
                            value - floor,
                            None,
                            1,
                        );
                    }
                }
            }
            for estimator in [Estimator::Tagged, Estimator::Pooled] {
                for &pair in &pairs {
                    let moments: Vec<PairMoments> = cfgs
                        .iter()
                        .map(|c| PairMoments::measure(c, pair, estimator))
                        .collect();
                    let d = chaos_defect(&moments)?;
                    push(
                        defect_metric(estimator, pair),
                        d.value,
                        Some(d.std_error),
                        2,
                    );
                    defects.push((t, estimator, pair, n, d.value));
                }
            }
            for &alt in &cfg.alpha {
                let b = theorem1_bound(1, t, n, a, alt)?;
                push(format!("theorem1_bound:alpha={alt}"), b.value, None, 1);
            }
        }
    }

    let mut slopes = Vec::new();
    for &t in &times {
        for estimator in [Estimator::Tagged, Estimator::Pooled] {
            for &pair in &pairs {
                let (xs, ys): (Vec<f64>, Vec<f64>) = defects
                    .iter()
                    .filter(|d| d.0 == t && d.1 == estimator && d.2 == pair)
                    .map(|d| (d.3 as f64, d.4))
                    .unzip();
                slopes.push(SlopeRow {
                    t,
                    estimator,
                    pair,
                    slope: log_log_slope(&xs, &ys),
                });
            }
        }
    }

    Ok(StudyReport {
        config_json: cfg.to_json(),
        rows,
        slopes,
    })
}
