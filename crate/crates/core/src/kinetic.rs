//! One-dimensional phase-space solver for the kinetic limit
//!
//! ```text
//! (∂_t + v ∂_x) f = -f + ρ(x) ∫ dy K(M_ρ(x, |x - y|)) f(y, v)
//! ```
//!
//! on the torus `[0, L)`, discretized by cell averages on an `Nx × Nv` grid.
//! Time stepping is Strang splitting: half-step semi-Lagrangian transport,
//! exponential relaxation toward the gain term, half-step transport.
//!
//! The gain integral is evaluated in mass coordinates. Around each cell the
//! other cells are grouped by distance and laid out along the cumulative
//! mass axis `m ∈ [0, 1]`; each group is weighted by the exact integral of
//! `K` over its mass interval. The weights therefore satisfy
//! `Σ_y w(x,y) ρ(y) Δx = 1` to rounding for every `x`, which makes the
//! scheme conserve mass and keeps homogeneous states fixed.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::sim::InitialLaw;

const MASS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    nx: usize,
    nv: usize,
    side: f64,
    v_min: f64,
    v_max: f64,
}

impl PhaseGrid {
    pub fn new(nx: usize, nv: usize, side: f64, v_min: f64, v_max: f64) -> Result<Self> {
        if nx < 2 || nv < 2 {
            return Err(Error::Domain(format!(
                "grid needs Nx, Nv >= 2, got {nx} x {nv}"
            )));
        }
        if !(side > 0.0) || !(v_max > v_min) {
            return Err(Error::Domain(format!(
                "bad grid extents: side {side}, velocity range [{v_min}, {v_max}]"
            )));
        }
        Ok(PhaseGrid {
            nx,
            nv,
            side,
            v_min,
            v_max,
        })
    }

    /// The natural grid for an initial law: two-point laws get the 2-cell
    /// velocity grid `[-2, 2]` whose centers are the atoms `±1`.
    pub fn for_law(law: InitialLaw, nx: usize, nv: usize, side: f64) -> Result<Self> {
        match law {
            InitialLaw::UniformXTwoPointV | InitialLaw::CosineXTwoPointV => {
                PhaseGrid::new(nx, 2, side, -2.0, 2.0)
            }
            InitialLaw::UniformXGaussV => PhaseGrid::new(nx, nv, side, -5.0, 5.0),
            InitialLaw::UniformXUniformV => PhaseGrid::new(nx, nv, side, -1.0, 1.0),
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn v_range(&self) -> (f64, f64) {
        (self.v_min, self.v_max)
    }

    pub fn dx(&self) -> f64 {
        self.side / self.nx as f64
    }

    pub fn dv(&self) -> f64 {
        (self.v_max - self.v_min) / self.nv as f64
    }

    pub fn x_center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.dx()
    }

    pub fn v_center(&self, l: usize) -> f64 {
        self.v_min + (l as f64 + 0.5) * self.dv()
    }

    /// Cell containing `x` (wrapped onto the torus).
    pub fn x_cell(&self, x: f64) -> usize {
        let k = (x.rem_euclid(self.side) / self.dx()) as usize;
        k.min(self.nx - 1)
    }

    /// Cell containing `v`, or `None` outside `[v_min, v_max]`.
    pub fn v_cell(&self, v: f64) -> Option<usize> {
        if !(v >= self.v_min && v <= self.v_max) {
            return None;
        }
        Some((((v - self.v_min) / self.dv()) as usize).min(self.nv - 1))
    }
}

/// Cell-averaged density `f(x, v)`, stored x-major: `values[k * Nv + l]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionFn {
    grid: PhaseGrid,
    values: Vec<f64>,
}

impl DistributionFn {
    /// Validates shape, nonnegativity and unit mass.
    pub fn new(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        let f = DistributionFn::unchecked(grid, values)?;
        if let Some(v) = f.values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::Domain(format!(
                "distribution value {v} is negative or NaN"
            )));
        }
        let mass = f.mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::Domain(format!("distribution mass {mass} is not 1")));
        }
        Ok(f)
    }

    fn unchecked(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nx * grid.nv {
            return Err(Error::Domain(format!(
                "{} values do not fill a {} x {} grid",
                values.len(),
                grid.nx,
                grid.nv
            )));
        }
        Ok(DistributionFn { grid, values })
    }

    /// Nonnegative table rescaled to unit mass.
    pub fn normalized(grid: PhaseGrid, mut values: Vec<f64>) -> Result<Self> {
        let cell = grid.dx() * grid.dv();
        let mass: f64 = values.iter().sum::<f64>() * cell;
        if !(mass > 0.0) {
            return Err(Error::Domain(
                "cannot normalize a table with zero mass".into(),
            ));
        }
        values.iter_mut().for_each(|v| *v /= mass);
        DistributionFn::new(grid, values)
    }

    /// `f(x, v) = 1 / (L (v_max - v_min))`.
    pub fn homogeneous(grid: PhaseGrid) -> Self {
        let value = 1.0 / (grid.side * (grid.v_max - grid.v_min));
        DistributionFn {
            grid,
            values: vec![value; grid.nx * grid.nv],
        }
    }

    /// Cell averages of a built-in initial law on `grid`.
    pub fn from_law(law: InitialLaw, grid: PhaseGrid) -> Result<Self> {
        let dx = grid.dx();
        let rho: Vec<f64> = (0..grid.nx)
            .map(|k| match law {
                InitialLaw::CosineXTwoPointV => {
                    let (lo, hi) = (k as f64 * dx, (k + 1) as f64 * dx);
                    let w = 2.0 * PI / grid.side;
                    let mean_cos = ((w * hi).sin() - (w * lo).sin()) / (w * dx);
                    1.0 + InitialLaw::COSINE_AMPLITUDE * mean_cos
                }
                _ => 1.0,
            })
            .collect();
        let cell_mass: Vec<f64> = (0..grid.nv)
            .map(|l| {
                let lo = grid.v_min + l as f64 * grid.dv();
                let hi = lo + grid.dv();
                match law {
                    InitialLaw::UniformXTwoPointV | InitialLaw::CosineXTwoPointV => {
                        let inside = |a: f64| a > lo && a < hi;
                        0.5 * (inside(-1.0) as u8 as f64) + 0.5 * (inside(1.0) as u8 as f64)
                    }
                    InitialLaw::UniformXGaussV => 0.5 * (erf(hi / SQRT_2) - erf(lo / SQRT_2)),
                    InitialLaw::UniformXUniformV => 0.5 * (hi.min(1.0) - lo.max(-1.0)).max(0.0),
                }
            })
            .collect();
        if law.has_two_point_velocities() && (cell_mass.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(
                "velocity atoms ±1 must lie strictly inside velocity cells".into(),
            ));
        }
        let mut values = Vec::with_capacity(grid.nx * grid.nv);
        for r in &rho {
            values.extend(cell_mass.iter().map(|m| r * m));
        }
        DistributionFn::normalized(grid, values)
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.values[k * self.grid.nv + l]
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx() * self.grid.dv()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `ρ(x_k) = Σ_l f(x_k, v_l) Δv`.
    pub fn density(&self) -> Vec<f64> {
        let dv = self.grid.dv();
        self.values
            .chunks_exact(self.grid.nv)
            .map(|row| row.iter().sum::<f64>() * dv)
            .collect()
    }

    /// `Σ |f - g| Δx Δv`.
    pub fn l1_distance(&self, other: &DistributionFn) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::IncompatibleBinning(
                "distributions live on different grids".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.dx()
            * self.grid.dv())
    }

    /// Max-norm distance on a shared grid.
    pub fn max_distance(&self, other: &DistributionFn) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `M_ρ(x_k, R)`: mass of the piecewise-constant profile `rho` on the torus
/// interval `[x_k - R, x_k + R]`, with `R` capped at `L/2`.
pub fn partial_mass(rho: &[f64], side: f64, k: usize, radius: f64) -> f64 {
    let nx = rho.len();
    let dx = side / nx as f64;
    let total: f64 = rho.iter().sum::<f64>() * dx;
    if radius >= side / 2.0 {
        return total;
    }
    if radius <= 0.0 {
        return 0.0;
    }
    let mut cumulative = Vec::with_capacity(nx + 1);
    cumulative.push(0.0);
    let mut acc = 0.0;
    for r in rho {
        acc += r * dx;
        cumulative.push(acc);
    }
    // antiderivative of ρ extended periodically
    let primitive = |y: f64| {
        let laps = (y / side).floor();
        let local = y - laps * side;
        let cell = ((local / dx) as usize).min(nx - 1);
        laps * total + cumulative[cell] + rho[cell] * (local - cell as f64 * dx)
    };
    let center = (k as f64 + 0.5) * dx;
    primitive(center + radius) - primitive(center - radius)
}

/// Gain weights `w(x_k, y_m)`, row-major `Nx × Nx`, built in mass coordinates.
pub fn gain_weights(rho: &[f64], dx: f64, spec: &KernelSpec) -> Vec<f64> {
    let nx = rho.len();
    let total: f64 = rho.iter().sum::<f64>() * dx;
    let mut weights = vec![0.0; nx * nx];
    weights
        .par_chunks_exact_mut(nx)
        .enumerate()
        .for_each(|(k, row)| fill_gain_row(rho, dx, total, spec, k, row));
    weights
}

fn fill_gain_row(rho: &[f64], dx: f64, total: f64, spec: &KernelSpec, k: usize, row: &mut [f64]) {
    let nx = rho.len();
    let half = nx / 2;
    let mut lower = 0.0;
    let mut lower_anti = spec.antiderivative(0.0);
    for j in 0..=half {
        let left = (k + nx - j) % nx;
        let right = (k + j) % nx;
        let group_mass = if left == right {
            rho[right] * dx
        } else {
            (rho[left] + rho[right]) * dx
        };
        let upper = if j == half {
            1.0
        } else {
            (lower + group_mass / total).min(1.0)
        };
        let upper_anti = spec.antiderivative(upper);
        let w = if group_mass > 0.0 {
            (upper_anti - lower_anti) / group_mass
        } else {
            spec.value(lower)
        };
        row[left] = w;
        row[right] = w;
        lower = upper;
        lower_anti = upper_anti;
    }
}

/// `G(x, v) = ρ(x) Σ_y w(x, y) f(y, v) Δx`.
pub fn collision_gain(f: &DistributionFn, spec: &KernelSpec) -> Vec<f64> {
    let grid = f.grid;
    let (nx, nv, dx) = (grid.nx, grid.nv, grid.dx());
    let rho = f.density();
    let weights = gain_weights(&rho, dx, spec);
    let mut gain = vec![0.0; nx * nv];
    gain.par_chunks_exact_mut(nv)
        .enumerate()
        .for_each(|(k, out)| {
            let w_row = &weights[k * nx..(k + 1) * nx];
            for (m, w) in w_row.iter().enumerate() {
                let f_row = &f.values[m * nv..(m + 1) * nv];
                for (o, fv) in out.iter_mut().zip(f_row) {
                    *o += w * fv;
                }
            }
            out.iter_mut().for_each(|o| *o *= rho[k] * dx);
        });
    gain
}

/// Exact-shift transport `f(x, v) <- f(x - v τ, v)` with periodic linear
/// interpolation between cells.
pub fn transport(f: &DistributionFn, tau: f64) -> DistributionFn {
    let grid = f.grid;
    let (nx, nv) = (grid.nx, grid.nv);
    let mut out = vec![0.0; nx * nv];
    for l in 0..nv {
        let mut shift = grid.v_center(l) * tau / grid.dx();
        if (shift - shift.round()).abs() < 1e-9 {
            shift = shift.round();
        }
        let whole = shift.floor();
        let theta = shift - whole;
        let whole = (whole as i64).rem_euclid(nx as i64) as usize;
        for k in 0..nx {
            let src = (k + nx - whole) % nx;
            let prev = (src + nx - 1) % nx;
            out[k * nv + l] =
                (1.0 - theta) * f.values[src * nv + l] + theta * f.values[prev * nv + l];
        }
    }
    DistributionFn { grid, values: out }
}

/// Exponential relaxation `f <- e^{-dt} f + (1 - e^{-dt}) G(f)`.
pub fn relax(f: &DistributionFn, spec: &KernelSpec, dt: f64) -> DistributionFn {
    let gain = collision_gain(f, spec);
    let keep = (-dt).exp();
    let values = f
        .values
        .iter()
        .zip(&gain)
        .map(|(v, g)| keep * v + (1.0 - keep) * g)
        .collect();
    DistributionFn {
        grid: f.grid,
        values,
    }
}

/// One Strang step: transport `dt/2`, relax `dt`, transport `dt/2`.
pub fn step(f: &DistributionFn, spec: &KernelSpec, dt: f64) -> Result<DistributionFn> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("time step {dt} must be positive")));
    }
    let half = transport(f, 0.5 * dt);
    let relaxed = relax(&half, spec, dt);
    Ok(transport(&relaxed, 0.5 * dt))
}

/// Integrates from `t = 0` and returns `f` at each of the sorted `output_times`.
///
/// The final step before an output time is shortened to land on it exactly.
pub fn solve(
    f0: &DistributionFn,
    spec: &KernelSpec,
    t_end: f64,
    dt: f64,
    output_times: &[f64],
) -> Result<Vec<DistributionFn>> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("time step {dt} must be positive")));
    }
    if output_times.windows(2).any(|w| !(w[0] <= w[1]))
        || output_times.iter().any(|&t| !(t >= 0.0 && t <= t_end))
    {
        return Err(Error::Domain(format!(
            "output times must be sorted within [0, {t_end}]"
        )));
    }
    let mut out = Vec::with_capacity(output_times.len());
    let mut f = f0.clone();
    let mut t = 0.0;
    for &target in output_times {
        let remaining = target - t;
        let steps = (remaining / dt - 1e-9).ceil().max(0.0) as usize;
        for s in 0..steps {
            let h = if s + 1 == steps {
                remaining - dt * s as f64
            } else {
                dt
            };
            f = step(&f, spec, h)?;
        }
        t = target;
        out.push(f.clone());
    }
    Ok(out)
}
