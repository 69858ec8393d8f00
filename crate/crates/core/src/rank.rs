//! Distances, neighbor ranks and interaction probabilities.
//!
//! Two routes to the interaction row `π_{i,·}` are provided. The rank route
//! sorts the other particles by distance from `x_i` and weights rank `s` by
//! `K(s/(N-1))`. The ball-count route counts, for each partner `j`, the
//! particles inside the closed ball `|x_i - y| <= |x_i - x_j|` and feeds that
//! count through `K` with the normalizer `α_N`. Both agree whenever the
//! distances from `x_i` are pairwise distinct.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

/// Positions and velocities of `N` particles in `d` dimensions.
///
/// Coordinates are stored flat, particle-major: particle `i` occupies
/// `[i*d, (i+1)*d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    dim: usize,
    side: f64,
    periodic: bool,
    positions: Vec<f64>,
    velocities: Vec<f64>,
}

impl Configuration {
    /// A configuration on the torus `[0, side)^dim`.
    pub fn new(dim: usize, side: f64, positions: Vec<f64>, velocities: Vec<f64>) -> Result<Self> {
        Self::build(dim, side, true, positions, velocities)
    }

    /// A configuration in open space; `side` is kept only as a length scale.
    pub fn nonperiodic(
        dim: usize,
        side: f64,
        positions: Vec<f64>,
        velocities: Vec<f64>,
    ) -> Result<Self> {
        Self::build(dim, side, false, positions, velocities)
    }

    pub(crate) fn build(
        dim: usize,
        side: f64,
        periodic: bool,
        positions: Vec<f64>,
        velocities: Vec<f64>,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Domain(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::Domain(format!(
                "domain side must be positive, got {side}"
            )));
        }
        if positions.len() != velocities.len() || !positions.len().is_multiple_of(dim) {
            return Err(Error::Domain(format!(
                "{} position and {} velocity coordinates do not form particles in d = {dim}",
                positions.len(),
                velocities.len()
            )));
        }
        if positions.len() / dim < 2 {
            return Err(Error::Domain("need at least two particles".into()));
        }
        if periodic {
            if let Some(x) = positions.iter().find(|x| !(0.0..side).contains(*x)) {
                return Err(Error::Domain(format!(
                    "position coordinate {x} outside [0, {side})"
                )));
            }
        }
        Ok(Configuration {
            dim,
            side,
            periodic,
            positions,
            velocities,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.dim..(i + 1) * self.dim]
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub(crate) fn velocities_mut(&mut self) -> &mut [f64] {
        &mut self.velocities
    }

    /// Moves every particle along `x + v τ`, wrapping onto the torus.
    pub fn transport(&mut self, tau: f64) {
        let side = self.side;
        let periodic = self.periodic;
        for (x, v) in self.positions.iter_mut().zip(&self.velocities) {
            *x += v * tau;
            if periodic {
                *x = wrap(*x, side);
            }
        }
    }

    /// Distance between particles `i` and `j` in this geometry.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if self.periodic {
            torus_distance(self.position(i), self.position(j), self.side)
        } else {
            euclidean_distance(self.position(i), self.position(j))
        }
    }

    /// Shifts all positions by `shift` (mod side on the torus).
    pub fn translated(&self, shift: &[f64]) -> Configuration {
        let mut out = self.clone();
        for (k, x) in out.positions.iter_mut().enumerate() {
            *x += shift[k % self.dim];
            if self.periodic {
                *x = wrap(*x, self.side);
            }
        }
        out
    }

    /// Relabels particles: new particle `k` is old particle `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Configuration {
        let d = self.dim;
        let mut out = self.clone();
        for (k, &old) in perm.iter().enumerate() {
            out.positions[k * d..(k + 1) * d].copy_from_slice(self.position(old));
            out.velocities[k * d..(k + 1) * d].copy_from_slice(self.velocity(old));
        }
        out
    }
}

/// Reduces `x` into `[0, side)`.
pub(crate) fn wrap(x: f64, side: f64) -> f64 {
    let mut y = x.rem_euclid(side);
    // rem_euclid can round up to `side` for tiny negative inputs
    if y >= side {
        y = 0.0;
    }
    y
}

/// Euclidean distance with per-coordinate wraparound `min(|Δ|, L - |Δ|)`.
pub fn torus_distance(a: &[f64], b: &[f64], side: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            let delta = (p - q).abs();
            let delta = delta.min(side - delta);
            delta * delta
        })
        .sum::<f64>()
        .sqrt()
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Neighbor ordering around one particle.
#[derive(Clone, Debug, PartialEq)]
pub struct RankTable {
    center: usize,
    order: Vec<usize>,
    ranks: Vec<usize>,
}

impl RankTable {
    pub fn center(&self) -> usize {
        self.center
    }

    /// Other particles, nearest first. Equal distances are ordered by index.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `R(i, j)` in `1..=N-1`; `None` for the center itself.
    pub fn rank(&self, j: usize) -> Option<usize> {
        match self.ranks[j] {
            0 => None,
            r => Some(r),
        }
    }

    /// `r(i, j) = R(i, j) / (N - 1)`.
    pub fn normalized_rank(&self, j: usize) -> Option<f64> {
        self.rank(j).map(|r| r as f64 / self.order.len() as f64)
    }
}

fn sorted_neighbors(cfg: &Configuration, i: usize) -> Vec<(f64, usize)> {
    let mut neighbors: Vec<(f64, usize)> = (0..cfg.len())
        .filter(|&j| j != i)
        .map(|j| (cfg.distance(i, j), j))
        .collect();
    neighbors.sort_unstable_by(|a, b| match a.0.total_cmp(&b.0) {
        Ordering::Equal => a.1.cmp(&b.1),
        other => other,
    });
    neighbors
}

fn check_center(cfg: &Configuration, i: usize) -> Result<()> {
    if i >= cfg.len() {
        return Err(Error::Domain(format!(
            "particle index {i} out of range for N = {}",
            cfg.len()
        )));
    }
    Ok(())
}

pub fn build_rank_table(cfg: &Configuration, i: usize) -> Result<RankTable> {
    check_center(cfg, i)?;
    let order: Vec<usize> = sorted_neighbors(cfg, i)
        .into_iter()
        .map(|(_, j)| j)
        .collect();
    let mut ranks = vec![0; cfg.len()];
    for (s, &j) in order.iter().enumerate() {
        ranks[j] = s + 1;
    }
    Ok(RankTable {
        center: i,
        order,
        ranks,
    })
}

/// `π_{i,j} = K(r(i,j)) / Σ_s K(s/(N-1))`, indexed by particle; entry `i` is zero.
pub fn interaction_probs_rank(
    cfg: &Configuration,
    i: usize,
    spec: &KernelSpec,
) -> Result<Vec<f64>> {
    check_center(cfg, i)?;
    let n = cfg.len();
    let m = (n - 1) as f64;
    let mut probs = vec![0.0; n];
    let mut denominator = 0.0;
    for (s, (_, j)) in sorted_neighbors(cfg, i).into_iter().enumerate() {
        let weight = spec.value((s + 1) as f64 / m);
        probs[j] = weight;
        denominator += weight;
    }
    if !(denominator > 0.0) {
        return Err(Error::DegenerateKernel(denominator));
    }
    probs.iter_mut().for_each(|p| *p /= denominator);
    Ok(probs)
}

/// `π_{i,j} = α_N K((1/(N-1)) Σ_{k≠i} χ(|x_i - x_k| <= |x_i - x_j|))`.
pub fn interaction_probs_chi(cfg: &Configuration, i: usize, spec: &KernelSpec) -> Result<Vec<f64>> {
    check_center(cfg, i)?;
    let n = cfg.len();
    let m = (n - 1) as f64;
    let denominator = spec.rank_sum(n)?;
    if !(denominator > 0.0) {
        return Err(Error::DegenerateKernel(denominator));
    }
    let alpha = 1.0 / denominator;
    let mut sorted: Vec<f64> = (0..n)
        .filter(|&k| k != i)
        .map(|k| cfg.distance(i, k))
        .collect();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut probs = vec![0.0; n];
    for (j, p) in probs.iter_mut().enumerate() {
        if j == i {
            continue;
        }
        let radius = cfg.distance(i, j);
        let count = sorted.partition_point(|&d| d <= radius);
        *p = alpha * spec.value(count as f64 / m);
    }
    Ok(probs)
}

/// Inverse-CDF draw from a probability row given `u ∈ [0, 1)`.
///
/// Zero entries are never returned; rounding slack at the top end falls to
/// the last positive entry.
pub fn sample_partner(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (j, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = j;
        if u < acc {
            return j;
        }
    }
    last
}
