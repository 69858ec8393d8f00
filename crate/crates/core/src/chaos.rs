//! Propagation-of-chaos measurements and the analytic error bounds.
//!
//! Empirical one-particle laws are binned on a [`PhaseGrid`] and compared
//! with the kinetic solution; two-particle correlations are measured through
//! covariance defects of bounded test functions.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::kinetic::{DistributionFn, PhaseGrid};
use crate::rank::Configuration;

/// Which particles feed an estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Particle 0 (and particle 1 for pairs) of every run.
    Tagged,
    /// All particles (all ordered pairs) of every run.
    Pooled,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Tagged => "tagged",
            Estimator::Pooled => "pooled",
        }
    }
}

/// Probability masses on the cells of a phase grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    grid: PhaseGrid,
    probs: Vec<f64>,
    samples: usize,
}

impl Histogram {
    /// Bins `(x, v)` samples; velocities outside the grid are clamped to the edge cells.
    pub fn from_samples(
        grid: PhaseGrid,
        samples: impl IntoIterator<Item = (f64, f64)>,
    ) -> Result<Self> {
        let mut counts = vec![0u64; grid.nx() * grid.nv()];
        let mut total = 0usize;
        let (v_min, _) = grid.v_range();
        for (x, v) in samples {
            let l = grid
                .v_cell(v)
                .unwrap_or(if v < v_min { 0 } else { grid.nv() - 1 });
            counts[grid.x_cell(x) * grid.nv() + l] += 1;
            total += 1;
        }
        if total == 0 {
            return Err(Error::EmptySnapshots);
        }
        let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Ok(Histogram {
            grid,
            probs,
            samples: total,
        })
    }

    /// Cell masses of a distribution, as a histogram on its own grid.
    pub fn from_distribution(f: &DistributionFn) -> Self {
        let cell = f.grid().dx() * f.grid().dv();
        Histogram {
            grid: *f.grid(),
            probs: f.values().iter().map(|v| v * cell).collect(),
            samples: 0,
        }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample_count(&self) -> usize {
        self.samples
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// One-particle empirical law at a common time across runs.
///
/// Uses the first spatial coordinate and first velocity component.
pub fn empirical_marginal(
    snapshots: &[&Configuration],
    bins: PhaseGrid,
    estimator: Estimator,
) -> Result<Histogram> {
    if snapshots.is_empty() {
        return Err(Error::EmptySnapshots);
    }
    let samples = snapshots.iter().flat_map(|cfg| {
        let count = match estimator {
            Estimator::Tagged => 1,
            Estimator::Pooled => cfg.len(),
        };
        (0..count).map(move |i| (cfg.position(i)[0], cfg.velocity(i)[0]))
    });
    Histogram::from_samples(bins, samples)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `Σ |p - q|` over cells.
    L1,
    /// Mean over x-bins of the 1D Wasserstein-1 distance between velocity conditionals.
    W1v,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::L1 => "l1",
            Metric::W1v => "w1v",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" | "L1" => Ok(Metric::L1),
            "w1v" | "W1v" => Ok(Metric::W1v),
            other => Err(Error::Config(format!("unknown metric `{other}`"))),
        }
    }
}

/// Cell masses of `f` aggregated onto the (coarser or equal) histogram grid.
pub fn cell_masses_on(f: &DistributionFn, target: &PhaseGrid) -> Result<Vec<f64>> {
    let src = f.grid();
    if src.side() != target.side()
        || src.v_range() != target.v_range()
        || !src.nx().is_multiple_of(target.nx())
        || !src.nv().is_multiple_of(target.nv())
    {
        return Err(Error::IncompatibleBinning(format!(
            "histogram {}x{} cannot be aligned with solver grid {}x{}",
            target.nx(),
            target.nv(),
            src.nx(),
            src.nv()
        )));
    }
    let (rx, rv) = (src.nx() / target.nx(), src.nv() / target.nv());
    let cell = src.dx() * src.dv();
    let mut masses = vec![0.0; target.nx() * target.nv()];
    for k in 0..src.nx() {
        for l in 0..src.nv() {
            masses[(k / rx) * target.nv() + l / rv] += f.get(k, l) * cell;
        }
    }
    Ok(masses)
}

/// W1 between two discrete laws on equally spaced atoms (spacing `dv`),
/// each normalized by its own total.
pub fn w1_on_atoms(p: &[f64], q: &[f64], dv: f64) -> f64 {
    let (sp, sq) = (p.iter().sum::<f64>(), q.iter().sum::<f64>());
    let mut cp = 0.0;
    let mut cq = 0.0;
    let mut acc = 0.0;
    for (a, b) in p.iter().zip(q).take(p.len().saturating_sub(1)) {
        cp += a / sp;
        cq += b / sq;
        acc += (cp - cq).abs();
    }
    acc * dv
}

pub fn marginal_distance(hist: &Histogram, f: &DistributionFn, metric: Metric) -> Result<f64> {
    let q = cell_masses_on(f, hist.grid())?;
    let p = hist.probs();
    match metric {
        Metric::L1 => Ok(p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum()),
        Metric::W1v => {
            let nv = hist.grid().nv();
            let dv = hist.grid().dv();
            let mut total = 0.0;
            let mut used = 0usize;
            for (pr, qr) in p.chunks_exact(nv).zip(q.chunks_exact(nv)) {
                if pr.iter().sum::<f64>() > 0.0 && qr.iter().sum::<f64>() > 0.0 {
                    total += w1_on_atoms(pr, qr, dv);
                    used += 1;
                }
            }
            if used == 0 {
                return Err(Error::EmptySnapshots);
            }
            Ok(total / used as f64)
        }
    }
}

/// `E Σ_k |p̂_k - p_k|` for a multinomial histogram of `n` draws from `p`.
///
/// Uses the exact binomial mean absolute deviation per cell.
pub fn multinomial_l1_floor(p: &[f64], n: usize) -> f64 {
    p.iter().map(|&pk| binomial_mad(n, pk)).sum::<f64>() / n as f64
}

// E|X - np| for X ~ Bin(n, p), de Moivre's closed form.
fn binomial_mad(n: usize, p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 || n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let m = (nf * p).floor();
    let k = m + 1.0;
    if k > nf {
        return 0.0;
    }
    let ln_choose = ln_gamma(nf + 1.0) - ln_gamma(k + 1.0) - ln_gamma(nf - k + 1.0);
    2.0 * k * (ln_choose + k * p.ln() + (nf - m) * (1.0 - p).ln()).exp()
}

/// Bounded test functions of a single particle `(x, v)` on a domain of side `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFn {
    One,
    Velocity,
    SinX,
    VelocitySinX,
}

impl TestFn {
    pub fn eval(self, x: f64, v: f64, side: f64) -> f64 {
        let s = || (2.0 * PI * x / side).sin();
        match self {
            TestFn::One => 1.0,
            TestFn::Velocity => v,
            TestFn::SinX => s(),
            TestFn::VelocitySinX => v * s(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TestFn::One => "1",
            TestFn::Velocity => "v",
            TestFn::SinX => "sin2pix",
            TestFn::VelocitySinX => "v_sin2pix",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestPair {
    pub phi: TestFn,
    pub psi: TestFn,
}

impl TestPair {
    pub fn label(&self) -> String {
        format!("{}*{}", self.phi.name(), self.psi.name())
    }
}

impl fmt::Display for TestPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Velocity, spatial and mixed probes.
pub fn default_test_pairs() -> Vec<TestPair> {
    vec![
        TestPair {
            phi: TestFn::Velocity,
            psi: TestFn::Velocity,
        },
        TestPair {
            phi: TestFn::SinX,
            psi: TestFn::SinX,
        },
        TestPair {
            phi: TestFn::VelocitySinX,
            psi: TestFn::Velocity,
        },
    ]
}

/// Per-run estimates of `E[φ(z_1)]`, `E[ψ(z_2)]` and `E[φ(z_1) ψ(z_2)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairMoments {
    pub phi: f64,
    pub psi: f64,
    pub product: f64,
}

impl PairMoments {
    pub fn measure(cfg: &Configuration, pair: TestPair, estimator: Estimator) -> Self {
        let side = cfg.side();
        let eval = |f: TestFn, i: usize| f.eval(cfg.position(i)[0], cfg.velocity(i)[0], side);
        match estimator {
            Estimator::Tagged => {
                let (a, b) = (eval(pair.phi, 0), eval(pair.psi, 1));
                PairMoments {
                    phi: a,
                    psi: b,
                    product: a * b,
                }
            }
            Estimator::Pooled => {
                let n = cfg.len();
                let (mut sum_phi, mut sum_psi, mut diag) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    let (a, b) = (eval(pair.phi, i), eval(pair.psi, i));
                    sum_phi += a;
                    sum_psi += b;
                    diag += a * b;
                }
                let nf = n as f64;
                PairMoments {
                    phi: sum_phi / nf,
                    psi: sum_psi / nf,
                    product: (sum_phi * sum_psi - diag) / (nf * (nf - 1.0)),
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Defect {
    /// `|E[φψ] - E[φ] E[ψ]|`.
    pub value: f64,
    /// Jackknife standard error over runs.
    pub std_error: f64,
}

fn covariance_estimate(runs: &[PairMoments], skip: Option<usize>) -> f64 {
    let (mut a, mut b, mut ab, mut count) = (0.0, 0.0, 0.0, 0.0);
    for (r, m) in runs.iter().enumerate() {
        if Some(r) == skip {
            continue;
        }
        a += m.phi;
        b += m.psi;
        ab += m.product;
        count += 1.0;
    }
    ab / count - (a / count) * (b / count)
}

pub fn chaos_defect(runs: &[PairMoments]) -> Result<Defect> {
    let r = runs.len();
    if r < 2 {
        return Err(Error::Domain(format!(
            "chaos defect needs at least two runs, got {r}"
        )));
    }
    let full = covariance_estimate(runs, None);
    let leave_one_out: Vec<f64> = (0..r).map(|i| covariance_estimate(runs, Some(i))).collect();
    let mean = leave_one_out.iter().sum::<f64>() / r as f64;
    let spread: f64 = leave_one_out.iter().map(|t| (t - mean) * (t - mean)).sum();
    Ok(Defect {
        value: full.abs(),
        std_error: ((r as f64 - 1.0) / r as f64 * spread).sqrt(),
    })
}

/// `22 A² e^{A/(N-1)} s² / (N-1)`.
pub fn prop1_bound(s: u32, n: usize, a: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("need N >= 2, got {n}")));
    }
    let m = (n - 1) as f64;
    let s = s as f64;
    Ok(22.0 * a * a * (a / m).exp() * s * s / m)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundValue {
    pub value: f64,
    /// The bound is at (or within 1e-9 of) the trivial value `2^j`.
    pub vacuous: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > LN_2) {
        return Err(Error::Hypothesis(format!(
            "alpha must exceed log 2, got {alpha}"
        )));
    }
    Ok(())
}

/// `2^j (N-1)^{-e^{-α(8At+1)}}`.
pub fn theorem1_bound(j: u32, t: f64, n: usize, a: f64, alpha: f64) -> Result<BoundValue> {
    check_alpha(alpha)?;
    if n < 2 {
        return Err(Error::Domain(format!("need N >= 2, got {n}")));
    }
    let at = if t == 0.0 { 0.0 } else { a * t };
    let exponent = (-alpha * (8.0 * at + 1.0)).exp();
    let trivial = 2f64.powi(j as i32);
    let value = trivial * ((n - 1) as f64).powf(-exponent);
    Ok(BoundValue {
        value,
        vacuous: value >= trivial * (1.0 - 1e-9),
    })
}

/// `φ(k, N) = (N-1)^{-e^{-αk}}`.
pub fn phi_iteration(k: u32, n: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if n < 2 {
        return Err(Error::Domain(format!("need N >= 2, got {n}")));
    }
    Ok(((n - 1) as f64).powf(-(-alpha * k as f64).exp()))
}

/// Whether `(N-1)^{e^{-αk}} φ(k-1, N) <= φ(k, N) / 2` holds numerically.
pub fn phi_contraction_holds(k: u32, n: usize, alpha: f64) -> Result<bool> {
    if k == 0 {
        return Err(Error::Domain("contraction step needs k >= 1".into()));
    }
    let lhs = ((n - 1) as f64).powf((-alpha * k as f64).exp()) * phi_iteration(k - 1, n, alpha)?;
    Ok(lhs <= 0.5 * phi_iteration(k, n, alpha)?)
}

/// Smallest `N - 1` above which the contraction step holds:
/// `(N-1)^{e^{-αk}(e^α - 2)} >= 2`.
pub fn phi_contraction_threshold(k: u32, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let rate = (-alpha * k as f64).exp() * (alpha.exp() - 2.0);
    Ok((LN_2 / rate).exp())
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// usable (positive) points.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let points: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::InitialLaw;

    fn two_point_grid(nx: usize) -> PhaseGrid {
        PhaseGrid::new(nx, 2, 1.0, -2.0, 2.0).unwrap()
    }

    #[test]
    fn single_sample_fills_one_bin() {
        let h = Histogram::from_samples(two_point_grid(32), [(0.5, 1.0)]).unwrap();
        assert_eq!(h.probs()[16 * 2 + 1], 1.0);
        assert_eq!(h.total(), 1.0);
        assert!(matches!(
            Histogram::from_samples(two_point_grid(4), std::iter::empty()),
            Err(Error::EmptySnapshots)
        ));
        assert!(matches!(
            empirical_marginal(&[], two_point_grid(4), Estimator::Tagged),
            Err(Error::EmptySnapshots)
        ));
    }

    #[test]
    fn identical_inputs_have_zero_distance() {
        let g = two_point_grid(64);
        let f = DistributionFn::from_law(InitialLaw::CosineXTwoPointV, g).unwrap();
        let h = Histogram::from_distribution(&f);
        assert_eq!(marginal_distance(&h, &f, Metric::L1).unwrap(), 0.0);
        assert!(marginal_distance(&h, &f, Metric::W1v).unwrap() < 1e-15);
        // coarser histogram grid aggregates the solver cells
        let coarse = Histogram::from_samples(two_point_grid(32), [(0.1, 1.0)]).unwrap();
        assert!(marginal_distance(&coarse, &f, Metric::L1).is_ok());
        let bad = Histogram::from_samples(two_point_grid(48), [(0.1, 1.0)]).unwrap();
        assert!(matches!(
            marginal_distance(&bad, &f, Metric::L1),
            Err(Error::IncompatibleBinning(_))
        ));
    }

    #[test]
    fn disjoint_supports_are_at_distance_two() {
        let g = two_point_grid(4);
        let mut values = vec![0.0; 8];
        values[0] = 1.0;
        let f = DistributionFn::normalized(g, values).unwrap();
        let h = Histogram::from_samples(g, [(0.9, 1.0)]).unwrap();
        assert!((marginal_distance(&h, &f, Metric::L1).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn w1_between_two_point_laws() {
        let (p, q) = (0.3, 0.8);
        assert!(
            (w1_on_atoms(&[p, 1.0 - p], &[q, 1.0 - q], 2.0) - 2.0 * (p - q).abs()).abs() < 1e-15
        );
        let g = two_point_grid(4);
        let mut values = Vec::new();
        for _ in 0..4 {
            values.extend([q, 1.0 - q]);
        }
        let f = DistributionFn::normalized(g, values).unwrap();
        let samples: Vec<(f64, f64)> = (0..4)
            .flat_map(|k| {
                let x = (k as f64 + 0.5) / 4.0;
                [
                    (x, -1.0),
                    (x, -1.0),
                    (x, -1.0),
                    (x, 1.0),
                    (x, 1.0),
                    (x, 1.0),
                    (x, 1.0),
                    (x, 1.0),
                    (x, 1.0),
                    (x, 1.0),
                ]
            })
            .collect();
        let h = Histogram::from_samples(g, samples).unwrap();
        assert!((marginal_distance(&h, &f, Metric::W1v).unwrap() - 2.0 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn multinomial_floor_matches_enumeration() {
        // n = 3 draws over two cells with p = (0.25, 0.75), enumerated by hand:
        // X ~ Bin(3, 1/4): P = 27/64, 27/64, 9/64, 1/64 for X = 0..3
        let pmf = [27.0 / 64.0, 27.0 / 64.0, 9.0 / 64.0, 1.0 / 64.0];
        let expected: f64 = pmf
            .iter()
            .enumerate()
            .map(|(x, w)| w * 2.0 * (x as f64 / 3.0 - 0.25).abs())
            .sum();
        assert!((multinomial_l1_floor(&[0.25, 0.75], 3) - expected).abs() < 1e-12);
        assert_eq!(multinomial_l1_floor(&[1.0, 0.0], 10), 0.0);
    }

    #[test]
    fn constant_probes_have_no_defect() {
        let cfg = Configuration::new(1, 1.0, vec![0.1, 0.5, 0.9], vec![1.0, -1.0, 1.0]).unwrap();
        let one = TestPair {
            phi: TestFn::One,
            psi: TestFn::One,
        };
        for est in [Estimator::Tagged, Estimator::Pooled] {
            let runs = vec![PairMoments::measure(&cfg, one, est); 5];
            let d = chaos_defect(&runs).unwrap();
            assert_eq!(d.value, 0.0);
            assert_eq!(d.std_error, 0.0);
        }
        assert!(chaos_defect(&[PairMoments::measure(&cfg, one, Estimator::Tagged)]).is_err());
    }

    #[test]
    fn pooled_moments_match_pair_enumeration() {
        let cfg = Configuration::new(
            1,
            1.0,
            vec![0.1, 0.35, 0.8, 0.6],
            vec![1.0, -0.5, 0.25, 2.0],
        )
        .unwrap();
        let pair = TestPair {
            phi: TestFn::VelocitySinX,
            psi: TestFn::Velocity,
        };
        let m = PairMoments::measure(&cfg, pair, Estimator::Pooled);
        let f = |t: TestFn, i: usize| t.eval(cfg.position(i)[0], cfg.velocity(i)[0], 1.0);
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    acc += f(pair.phi, i) * f(pair.psi, j);
                }
            }
        }
        assert!((m.product - acc / 12.0).abs() < 1e-14);
    }

    #[test]
    fn jackknife_of_known_sample() {
        // with phi = psi = const the covariance is the spread of `product`
        let runs: Vec<PairMoments> = [1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&p| PairMoments {
                phi: 0.0,
                psi: 0.0,
                product: p,
            })
            .collect();
        let d = chaos_defect(&runs).unwrap();
        assert_eq!(d.value, 2.5);
        // jackknife SE of a mean equals s / sqrt(n)
        let s = (5.0f64 / 3.0).sqrt();
        assert!((d.std_error - s / 2.0).abs() < 1e-14);
    }

    #[test]
    fn bound_values() {
        // mpmath: 22 e^{0.01} 4/100 = 0.888844147034068
        assert!((prop1_bound(2, 101, 1.0).unwrap() - 0.888_844_147_034_068).abs() < 1e-12);
        assert_eq!(
            prop1_bound(4, 50, 2.0).unwrap(),
            4.0 * prop1_bound(2, 50, 2.0).unwrap()
        );
        // mpmath: 2 * 100^{-e^{-1}} = 0.367511652275150
        let b = theorem1_bound(1, 0.0, 101, f64::INFINITY, 1.0).unwrap();
        assert!((b.value - 0.367_511_652_275_150).abs() < 1e-12);
        assert!(!b.vacuous);
        let v = theorem1_bound(1, 5.0, 1000, 11_278.75, 1.0).unwrap();
        assert!(v.vacuous);
        assert!(matches!(
            theorem1_bound(1, 0.0, 10, 1.0, 0.5),
            Err(Error::Hypothesis(_))
        ));
        assert!(
            theorem1_bound(1, 1.0, 1_000_000_000, 1.0, 1.0)
                .unwrap()
                .value
                < theorem1_bound(1, 1.0, 10, 1.0, 1.0).unwrap().value
        );
    }

    #[test]
    fn phi_values() {
        assert!((phi_iteration(0, 11, 1.0).unwrap() - 0.1).abs() < 1e-15);
        // mpmath: 100^{-e^{-1}} = 0.183755826137575
        assert!((phi_iteration(1, 101, 1.0).unwrap() - 0.183_755_826_137_575).abs() < 1e-12);
        assert!(phi_iteration(60, 101, 1.0).unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn contraction_threshold_is_sharp() {
        for (k, alpha) in [(1, 1.0), (2, 0.8), (3, 1.5)] {
            let t = phi_contraction_threshold(k, alpha).unwrap();
            let above = (t * 1.01).ceil() as usize + 1;
            let below = (t * 0.99).floor() as usize + 1;
            assert!(phi_contraction_holds(k, above, alpha).unwrap());
            if below >= 2 {
                assert!(!phi_contraction_holds(k, below, alpha).unwrap());
            }
        }
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [50.0, 100.0, 200.0, 400.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.0)).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(log_log_slope(&[1.0], &[1.0]), None);
    }
}
