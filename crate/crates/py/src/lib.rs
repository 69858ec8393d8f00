//! Python module `topo_align`.

use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use topo_align::chaos;
use topo_align::config::StudyConfig;
use topo_align::kernel::KernelSpec;
use topo_align::kinetic::{self, DistributionFn, PhaseGrid};
use topo_align::rank::{self, Configuration};
use topo_align::sim::{self, Geometry, InitialLaw, RngStream, SimState, VelocityComponent};
use topo_align::study;

create_exception!(topo_align, TopoAlignError, PyValueError);

fn err(e: topo_align::Error) -> PyErr {
    match e {
        topo_align::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => TopoAlignError::new_err(e.to_string()),
    }
}

fn law(name: &str) -> PyResult<InitialLaw> {
    name.parse().map_err(err)
}

#[pyclass(name = "Kernel", frozen)]
struct Kernel {
    inner: KernelSpec,
}

#[pymethods]
impl Kernel {
    /// Builds a kernel by name: `uniform`, `linear`, `paper_example` or `series`.
    #[new]
    #[pyo3(signature = (name, coefficients = None, truncation = None))]
    fn new(
        name: &str,
        coefficients: Option<Vec<f64>>,
        truncation: Option<usize>,
    ) -> PyResult<Self> {
        let inner = KernelSpec::from_name(name, coefficients, truncation).map_err(err)?;
        Ok(Kernel { inner })
    }

    #[staticmethod]
    fn uniform() -> Self {
        Kernel {
            inner: KernelSpec::uniform(),
        }
    }

    #[staticmethod]
    fn linear() -> Self {
        Kernel {
            inner: KernelSpec::linear(),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (truncation = 20))]
    fn paper_example(truncation: usize) -> Self {
        Kernel {
            inner: KernelSpec::paper_example(truncation),
        }
    }

    #[staticmethod]
    fn series(coefficients: Vec<f64>) -> PyResult<Self> {
        Ok(Kernel {
            inner: KernelSpec::series(coefficients).map_err(err)?,
        })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.form().name()
    }

    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.inner.coefficients().to_vec()
    }

    fn __call__(&self, x: f64) -> PyResult<f64> {
        self.inner.eval(x).map_err(err)
    }

    fn eval_series(&self, x: f64) -> f64 {
        self.inner.eval_series(x)
    }

    fn normalization_residual(&self) -> f64 {
        self.inner.normalization_residual()
    }

    /// `Σ |a_m| 8^m`.
    fn compute_a(&self) -> f64 {
        self.inner.compute_a()
    }

    fn riemann_error(&self, n: usize) -> PyResult<f64> {
        self.inner.riemann_error(n).map_err(err)
    }

    fn alpha_n(&self, n: usize) -> PyResult<f64> {
        self.inner.alpha_n(n).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Kernel({:?}, order={})",
            self.name(),
            self.inner.truncation_order()
        )
    }
}

fn flatten(rows: &[Vec<f64>]) -> PyResult<(usize, Vec<f64>)> {
    let dim = rows.first().map_or(1, Vec::len);
    if rows.iter().any(|r| r.len() != dim) {
        return Err(PyValueError::new_err("all rows must have the same length"));
    }
    Ok((dim, rows.concat()))
}

fn rows(flat: &[f64], dim: usize) -> Vec<Vec<f64>> {
    flat.chunks(dim).map(<[f64]>::to_vec).collect()
}

#[pyclass(name = "Configuration", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyConfiguration {
    inner: Configuration,
}

#[pymethods]
impl PyConfiguration {
    /// Particles with `positions[i]` and `velocities[i]` (one list per particle).
    #[new]
    #[pyo3(signature = (positions, velocities, side = 1.0, periodic = true))]
    fn new(
        positions: Vec<Vec<f64>>,
        velocities: Vec<Vec<f64>>,
        side: f64,
        periodic: bool,
    ) -> PyResult<Self> {
        let (dim, x) = flatten(&positions)?;
        let (vdim, v) = flatten(&velocities)?;
        if vdim != dim {
            return Err(PyValueError::new_err(
                "positions and velocities differ in dimension",
            ));
        }
        let inner = if periodic {
            Configuration::new(dim, side, x, v)
        } else {
            Configuration::nonperiodic(dim, side, x, v)
        };
        Ok(PyConfiguration {
            inner: inner.map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn side(&self) -> f64 {
        self.inner.side()
    }

    #[getter]
    fn positions(&self) -> Vec<Vec<f64>> {
        rows(self.inner.positions(), self.inner.dim())
    }

    #[getter]
    fn velocities(&self) -> Vec<Vec<f64>> {
        rows(self.inner.velocities(), self.inner.dim())
    }

    fn distance(&self, i: usize, j: usize) -> PyResult<f64> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.inner.distance(i, j))
    }

    /// Ranks `R(i, j)` for every `j`; `None` at `j = i`.
    fn ranks(&self, i: usize) -> PyResult<Vec<Option<usize>>> {
        let table = rank::build_rank_table(&self.inner, i).map_err(err)?;
        Ok((0..self.inner.len()).map(|j| table.rank(j)).collect())
    }

    /// Other particles sorted by distance from `i`.
    fn neighbours(&self, i: usize) -> PyResult<Vec<usize>> {
        Ok(rank::build_rank_table(&self.inner, i)
            .map_err(err)?
            .order()
            .to_vec())
    }

    fn interaction_probs(&self, i: usize, kernel: &Kernel) -> PyResult<Vec<f64>> {
        rank::interaction_probs_rank(&self.inner, i, &kernel.inner).map_err(err)
    }

    fn interaction_probs_chi(&self, i: usize, kernel: &Kernel) -> PyResult<Vec<f64>> {
        rank::interaction_probs_chi(&self.inner, i, &kernel.inner).map_err(err)
    }

    fn translated(&self, shift: Vec<f64>) -> PyResult<Self> {
        if shift.len() != self.inner.dim() {
            return Err(PyValueError::new_err("shift has the wrong dimension"));
        }
        Ok(PyConfiguration {
            inner: self.inner.translated(&shift),
        })
    }

    fn permuted(&self, perm: Vec<usize>) -> PyResult<Self> {
        let mut seen = vec![false; self.inner.len()];
        for &p in &perm {
            if p >= seen.len() || std::mem::replace(&mut seen[p], true) {
                return Err(PyValueError::new_err(
                    "not a permutation of the particle indices",
                ));
            }
        }
        if perm.len() != seen.len() {
            return Err(PyValueError::new_err(
                "not a permutation of the particle indices",
            ));
        }
        Ok(PyConfiguration {
            inner: self.inner.permuted(&perm),
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Configuration(n={}, dim={}, side={})",
            self.inner.len(),
            self.inner.dim(),
            self.inner.side()
        )
    }
}

impl PyConfiguration {
    fn check(&self, i: usize) -> PyResult<()> {
        if i < self.inner.len() {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!(
                "particle index {i} out of range"
            )))
        }
    }
}

type Event = (f64, usize, usize, Vec<f64>);
type Timeline = (Vec<(f64, PyConfiguration)>, Vec<Event>);

fn event(e: sim::EventRecord) -> Event {
    (e.time, e.chooser, e.partner, e.velocity)
}

/// Event-driven particle system.
#[pyclass(name = "Simulation")]
struct Simulation {
    inner: SimState,
}

#[pymethods]
impl Simulation {
    #[new]
    #[pyo3(signature = (configuration, seed, index = 0))]
    fn new(configuration: &PyConfiguration, seed: u64, index: u64) -> Self {
        Simulation {
            inner: SimState::new(configuration.inner.clone(), RngStream::new(seed, index)),
        }
    }

    /// Draws `n` i.i.d. particles from a built-in initial law.
    #[staticmethod]
    #[pyo3(signature = (n, seed, law = "uniform_x_two_point_v", dim = 1, side = 1.0, index = 0))]
    fn sample(n: usize, seed: u64, law: &str, dim: usize, side: f64, index: u64) -> PyResult<Self> {
        let geometry = Geometry {
            dim,
            side,
            periodic: true,
        };
        let inner = sim::sample_initial(n, self::law(law)?, geometry, RngStream::new(seed, index))
            .map_err(err)?;
        Ok(Simulation { inner })
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time()
    }

    #[getter]
    fn jump_count(&self) -> u64 {
        self.inner.jump_count()
    }

    #[getter]
    fn configuration(&self) -> PyConfiguration {
        PyConfiguration {
            inner: self.inner.cfg().clone(),
        }
    }

    /// Flies to the next event time and returns the waiting time.
    fn advance(&mut self) -> f64 {
        self.inner.advance_to_next_event()
    }

    /// Executes one velocity copy; returns `(time, chooser, partner, velocity)`.
    fn jump(&mut self, kernel: &Kernel) -> PyResult<Event> {
        self.inner
            .execute_jump(&kernel.inner)
            .map(event)
            .map_err(err)
    }

    /// Runs to `t_end`, returning `(snapshots, events)`.
    #[pyo3(signature = (kernel, t_end, snapshot_times = None))]
    fn run(
        &mut self,
        py: Python<'_>,
        kernel: &Kernel,
        t_end: f64,
        snapshot_times: Option<Vec<f64>>,
    ) -> PyResult<Timeline> {
        let times = snapshot_times.unwrap_or_default();
        let state = &mut self.inner;
        let out = py
            .detach(|| state.run(&kernel.inner, t_end, &times))
            .map_err(err)?;
        let snapshots = out
            .snapshots
            .into_iter()
            .map(|s| (s.time, PyConfiguration { inner: s.cfg }))
            .collect();
        Ok((snapshots, out.events.into_iter().map(event).collect()))
    }

    /// Compares a Monte-Carlo generator estimate for `Φ = v_particle` with the exact value.
    ///
    /// Returns `(estimate, std_error, exact, residual)`.
    #[pyo3(signature = (kernel, particle = 0, h = 0.005, replicas = 10_000))]
    fn generator_check(
        &self,
        py: Python<'_>,
        kernel: &Kernel,
        particle: usize,
        h: f64,
        replicas: usize,
    ) -> PyResult<(f64, f64, f64, f64)> {
        let phi = VelocityComponent {
            particle,
            component: 0,
        };
        let state = &self.inner;
        let c = py
            .detach(|| sim::generator_consistency_check(&phi, state, &kernel.inner, h, replicas))
            .map_err(err)?;
        Ok((c.estimate, c.std_error, c.exact, c.residual))
    }
}

/// Phase-space density on the torus `[0, side) × [v_min, v_max]`.
#[pyclass(name = "Distribution", frozen)]
struct Distribution {
    inner: DistributionFn,
}

#[pymethods]
impl Distribution {
    /// Discretizes a built-in initial law; `nv` defaults to 2 for two-point velocities and 32 otherwise.
    #[staticmethod]
    #[pyo3(signature = (law, nx = 64, nv = None, side = 1.0))]
    fn from_law(law: &str, nx: usize, nv: Option<usize>, side: f64) -> PyResult<Self> {
        let law = self::law(law)?;
        let nv = nv.unwrap_or(if law.has_two_point_velocities() {
            2
        } else {
            32
        });
        let grid = PhaseGrid::for_law(law, nx, nv, side).map_err(err)?;
        Ok(Distribution {
            inner: DistributionFn::from_law(law, grid).map_err(err)?,
        })
    }

    /// Normalizes `values[k][l]` (x-cell `k`, v-cell `l`) to unit mass.
    #[staticmethod]
    #[pyo3(signature = (values, v_min, v_max, side = 1.0))]
    fn from_values(values: Vec<Vec<f64>>, v_min: f64, v_max: f64, side: f64) -> PyResult<Self> {
        let (nv, flat) = flatten(&values)?;
        let grid = PhaseGrid::new(values.len(), nv, side, v_min, v_max).map_err(err)?;
        Ok(Distribution {
            inner: DistributionFn::normalized(grid, flat).map_err(err)?,
        })
    }

    #[getter]
    fn values(&self) -> Vec<Vec<f64>> {
        rows(self.inner.values(), self.inner.grid().nv())
    }

    #[getter]
    fn x_centers(&self) -> Vec<f64> {
        let g = self.inner.grid();
        (0..g.nx()).map(|k| g.x_center(k)).collect()
    }

    #[getter]
    fn v_centers(&self) -> Vec<f64> {
        let g = self.inner.grid();
        (0..g.nv()).map(|l| g.v_center(l)).collect()
    }

    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    fn density(&self) -> Vec<f64> {
        self.inner.density()
    }

    fn min_value(&self) -> f64 {
        self.inner.min_value()
    }

    fn l1_distance(&self, other: &Distribution) -> PyResult<f64> {
        self.inner.l1_distance(&other.inner).map_err(err)
    }

    fn step(&self, kernel: &Kernel, dt: f64) -> PyResult<Self> {
        Ok(Distribution {
            inner: kinetic::step(&self.inner, &kernel.inner, dt).map_err(err)?,
        })
    }

    /// Integrates to `t_end` and returns the states at `output_times` (default `[t_end]`).
    #[pyo3(signature = (kernel, t_end, dt = 0.01, output_times = None))]
    fn solve(
        &self,
        py: Python<'_>,
        kernel: &Kernel,
        t_end: f64,
        dt: f64,
        output_times: Option<Vec<f64>>,
    ) -> PyResult<Vec<Distribution>> {
        let times = output_times.unwrap_or_else(|| vec![t_end]);
        let f0 = &self.inner;
        let out = py
            .detach(|| kinetic::solve(f0, &kernel.inner, t_end, dt, &times))
            .map_err(err)?;
        Ok(out
            .into_iter()
            .map(|inner| Distribution { inner })
            .collect())
    }

    fn __repr__(&self) -> String {
        let g = self.inner.grid();
        format!(
            "Distribution(nx={}, nv={}, mass={:.12})",
            g.nx(),
            g.nv(),
            self.inner.mass()
        )
    }
}

#[pyfunction]
fn prop1_bound(s: u32, n: usize, a: f64) -> PyResult<f64> {
    chaos::prop1_bound(s, n, a).map_err(err)
}

/// Returns `(value, vacuous)`.
#[pyfunction]
#[pyo3(signature = (j, t, n, a, alpha = 1.0))]
fn theorem1_bound(j: u32, t: f64, n: usize, a: f64, alpha: f64) -> PyResult<(f64, bool)> {
    let b = chaos::theorem1_bound(j, t, n, a, alpha).map_err(err)?;
    Ok((b.value, b.vacuous))
}

#[pyfunction]
#[pyo3(signature = (k, n, alpha = 1.0))]
fn phi_iteration(k: u32, n: usize, alpha: f64) -> PyResult<f64> {
    chaos::phi_iteration(k, n, alpha).map_err(err)
}

/// Runs a convergence study from a JSON config string.
///
/// Returns `(report_csv, slopes_csv)`.
#[pyfunction]
fn convergence_study(py: Python<'_>, config_json: &str) -> PyResult<(String, String)> {
    let cfg = StudyConfig::from_json(config_json).map_err(err)?;
    let report = py.detach(|| study::convergence_study(&cfg)).map_err(err)?;
    Ok((report.to_csv(), report.slopes_csv()))
}

#[pymodule]
#[pyo3(name = "topo_align")]
fn topo_align_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TopoAlignError", m.py().get_type::<TopoAlignError>())?;
    m.add_class::<Kernel>()?;
    m.add_class::<PyConfiguration>()?;
    m.add_class::<Simulation>()?;
    m.add_class::<Distribution>()?;
    m.add_function(wrap_pyfunction!(prop1_bound, m)?)?;
    m.add_function(wrap_pyfunction!(theorem1_bound, m)?)?;
    m.add_function(wrap_pyfunction!(phi_iteration, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_study, m)?)?;
    Ok(())
}
