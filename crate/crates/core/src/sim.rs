//! Exact event-driven simulation of the N-particle velocity-copy jump process.
//!
//! Between events every particle flies freely, `x_i + v_i t`. Events arrive
//! at total rate `N`; at each event a chooser `i` is drawn uniformly and a
//! partner `j` from the row `π_{i,·}`, after which `v_i <- v_j`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::rank::{interaction_probs_rank, sample_partner, Configuration};

/// Spatial setting shared by the simulator and the solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub dim: usize,
    #[serde(default = "unit_side")]
    pub side: f64,
    #[serde(default = "periodic_default")]
    pub periodic: bool,
}

fn unit_side() -> f64 {
    1.0
}

fn periodic_default() -> bool {
    true
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            dim: 1,
            side: 1.0,
            periodic: true,
        }
    }
}

/// Built-in product initial laws `f_0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialLaw {
    /// `x ~ U[0,L)^d`, each velocity component uniform on `{-1, +1}`.
    UniformXTwoPointV,
    /// `x ~ U[0,L)^d`, velocity components standard normal.
    UniformXGaussV,
    /// `x ~ U[0,L)^d`, velocity components `U[-1, 1]`.
    UniformXUniformV,
    /// First coordinate with density `∝ 1 + cos(2πx/L)/2`, others uniform;
    /// velocities as in `UniformXTwoPointV`.
    CosineXTwoPointV,
}

impl InitialLaw {
    pub fn name(self) -> &'static str {
        match self {
            InitialLaw::UniformXTwoPointV => "uniform_x_two_point_v",
            InitialLaw::UniformXGaussV => "uniform_x_gauss_v",
            InitialLaw::UniformXUniformV => "uniform_x_uniform_v",
            InitialLaw::CosineXTwoPointV => "cosine_x_two_point_v",
        }
    }

    pub fn has_two_point_velocities(self) -> bool {
        matches!(
            self,
            InitialLaw::UniformXTwoPointV | InitialLaw::CosineXTwoPointV
        )
    }

    /// Relative amplitude of the cosine bump in the spatial density.
    pub const COSINE_AMPLITUDE: f64 = 0.5;
}

impl FromStr for InitialLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_x_two_point_v" => Ok(InitialLaw::UniformXTwoPointV),
            "uniform_x_gauss_v" => Ok(InitialLaw::UniformXGaussV),
            "uniform_x_uniform_v" => Ok(InitialLaw::UniformXUniformV),
            "cosine_x_two_point_v" => Ok(InitialLaw::CosineXTwoPointV),
            other => Err(Error::UnknownLaw(other.to_string())),
        }
    }
}

impl fmt::Display for InitialLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Identifies a random stream: a study seed plus a per-run index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub index: u64,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        RngStream { seed, index }
    }

    fn substream(self, purpose: Purpose) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.index.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(purpose as u64);
        rng
    }
}

#[derive(Clone, Copy)]
enum Purpose {
    Initial = 0,
    Waiting = 1,
    Chooser = 2,
    Partner = 3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub chooser: usize,
    pub partner: usize,
    pub velocity: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub cfg: Configuration,
}

#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub snapshots: Vec<Snapshot>,
    pub events: Vec<EventRecord>,
}

#[derive(Clone, Debug)]
pub struct SimState {
    cfg: Configuration,
    time: f64,
    stream: RngStream,
    jump_count: u64,
    waiting: ChaCha8Rng,
    chooser: ChaCha8Rng,
    partner: ChaCha8Rng,
}

impl PartialEq for SimState {
    fn eq(&self, other: &Self) -> bool {
        self.cfg == other.cfg
            && self.time.to_bits() == other.time.to_bits()
            && self.stream == other.stream
            && self.jump_count == other.jump_count
    }
}

/// Draws `n` particles i.i.d. from `law` at time zero.
pub fn sample_initial(
    n: usize,
    law: InitialLaw,
    geometry: Geometry,
    stream: RngStream,
) -> Result<SimState> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "need at least two particles, got {n}"
        )));
    }
    let Geometry {
        dim,
        side,
        periodic,
    } = geometry;
    let mut rng = stream.substream(Purpose::Initial);
    let mut positions = Vec::with_capacity(n * dim);
    let mut velocities = Vec::with_capacity(n * dim);
    for _ in 0..n {
        for c in 0..dim {
            let x = if c == 0 && law == InitialLaw::CosineXTwoPointV {
                sample_cosine_coordinate(&mut rng, side)
            } else {
                rng.random::<f64>() * side
            };
            positions.push(x);
        }
        for _ in 0..dim {
            let v = match law {
                InitialLaw::UniformXTwoPointV | InitialLaw::CosineXTwoPointV => {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
                InitialLaw::UniformXGaussV => rng.sample(StandardNormal),
                InitialLaw::UniformXUniformV => rng.random_range(-1.0..1.0),
            };
            velocities.push(v);
        }
    }
    let cfg = Configuration::build(dim, side, periodic, positions, velocities)?;
    Ok(SimState::new(cfg, stream))
}

fn sample_cosine_coordinate(rng: &mut ChaCha8Rng, side: f64) -> f64 {
    let a = InitialLaw::COSINE_AMPLITUDE;
    loop {
        let x = rng.random::<f64>() * side;
        let accept = (1.0 + a * (2.0 * PI * x / side).cos()) / (1.0 + a);
        if rng.random::<f64>() < accept {
            return x;
        }
    }
}

impl SimState {
    pub fn new(cfg: Configuration, stream: RngStream) -> Self {
        SimState {
            cfg,
            time: 0.0,
            stream,
            jump_count: 0,
            waiting: stream.substream(Purpose::Waiting),
            chooser: stream.substream(Purpose::Chooser),
            partner: stream.substream(Purpose::Partner),
        }
    }

    pub fn cfg(&self) -> &Configuration {
        &self.cfg
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn stream(&self) -> RngStream {
        self.stream
    }

    pub fn jump_count(&self) -> u64 {
        self.jump_count
    }

    fn draw_waiting_time(&mut self) -> f64 {
        let rate = self.cfg.len() as f64;
        Exp::new(rate)
            .expect("positive rate")
            .sample(&mut self.waiting)
    }

    fn fly(&mut self, until: f64) {
        self.cfg.transport(until - self.time);
        self.time = until;
    }

    /// Draws `τ ~ Exp(N)`, transports all particles by `τ` and returns it.
    pub fn advance_to_next_event(&mut self) -> f64 {
        let tau = self.draw_waiting_time();
        self.fly(self.time + tau);
        tau
    }

    /// Chooses `i` uniformly, `j` from `π_{i,·}`, and copies `v_j` into `v_i`.
    pub fn execute_jump(&mut self, spec: &KernelSpec) -> Result<EventRecord> {
        let n = self.cfg.len();
        let chooser = self.chooser.random_range(0..n);
        let probs = interaction_probs_rank(&self.cfg, chooser, spec)?;
        let partner = sample_partner(&probs, self.partner.random::<f64>());
        let d = self.cfg.dim();
        let velocity = self.cfg.velocity(partner).to_vec();
        self.cfg.velocities_mut()[chooser * d..(chooser + 1) * d].copy_from_slice(&velocity);
        self.jump_count += 1;
        Ok(EventRecord {
            time: self.time,
            chooser,
            partner,
            velocity,
        })
    }

    /// Simulates up to `t_end`, recording the configuration at each of
    /// `snapshot_times` (which must be sorted and lie in `[time, t_end]`).
    pub fn run(
        &mut self,
        spec: &KernelSpec,
        t_end: f64,
        snapshot_times: &[f64],
    ) -> Result<RunOutput> {
        self.run_inner(spec, t_end, snapshot_times, true)
    }

    /// Like [`SimState::run`] but without keeping the event log.
    pub fn run_quiet(
        &mut self,
        spec: &KernelSpec,
        t_end: f64,
        snapshot_times: &[f64],
    ) -> Result<Vec<Snapshot>> {
        Ok(self
            .run_inner(spec, t_end, snapshot_times, false)?
            .snapshots)
    }

    fn run_inner(
        &mut self,
        spec: &KernelSpec,
        t_end: f64,
        snapshot_times: &[f64],
        log: bool,
    ) -> Result<RunOutput> {
        if !(t_end >= self.time) {
            return Err(Error::Domain(format!(
                "t_end {t_end} precedes current time {}",
                self.time
            )));
        }
        if snapshot_times.windows(2).any(|w| !(w[0] <= w[1]))
            || snapshot_times
                .iter()
                .any(|&s| !(s >= self.time && s <= t_end))
        {
            return Err(Error::Domain(format!(
                "snapshot times must be sorted within [{}, {t_end}]",
                self.time
            )));
        }
        let mut out = RunOutput::default();
        let mut pending = snapshot_times.iter().copied().peekable();
        loop {
            let next_event = self.time + self.draw_waiting_time();
            let horizon = next_event.min(t_end);
            while let Some(s) = pending.next_if(|&s| s <= horizon) {
                self.fly(s);
                out.snapshots.push(Snapshot {
                    time: s,
                    cfg: self.cfg.clone(),
                });
            }
            if next_event > t_end {
                self.fly(t_end);
                break;
            }
            self.fly(next_event);
            let event = self.execute_jump(spec)?;
            if log {
                out.events.push(event);
            }
        }
        Ok(out)
    }
}

/// A bounded test function of the whole configuration.
pub trait Observable: Sync {
    fn value(&self, cfg: &Configuration) -> f64;

    /// `Σ_i v_i · ∇_{x_i} Φ`, by default a central difference along the flow.
    fn transport_derivative(&self, cfg: &Configuration) -> f64 {
        let eps = 1e-6;
        let mut forward = cfg.clone();
        forward.transport(eps);
        let mut backward = cfg.clone();
        backward.transport(-eps);
        (self.value(&forward) - self.value(&backward)) / (2.0 * eps)
    }
}

pub struct Constant(pub f64);

impl Observable for Constant {
    fn value(&self, _: &Configuration) -> f64 {
        self.0
    }

    fn transport_derivative(&self, _: &Configuration) -> f64 {
        0.0
    }
}

/// `v_{particle}` component `component`.
pub struct VelocityComponent {
    pub particle: usize,
    pub component: usize,
}

impl Observable for VelocityComponent {
    fn value(&self, cfg: &Configuration) -> f64 {
        cfg.velocity(self.particle)[self.component]
    }

    fn transport_derivative(&self, _: &Configuration) -> f64 {
        0.0
    }
}

/// `x_{particle}` component `component` (unwrapped locally).
pub struct PositionComponent {
    pub particle: usize,
    pub component: usize,
}

impl Observable for PositionComponent {
    fn value(&self, cfg: &Configuration) -> f64 {
        cfg.position(self.particle)[self.component]
    }

    fn transport_derivative(&self, cfg: &Configuration) -> f64 {
        cfg.velocity(self.particle)[self.component]
    }
}

/// `L_N Φ` evaluated directly: transport term plus all `N(N-1)` jump terms.
pub fn generator_exact(
    phi: &dyn Observable,
    cfg: &Configuration,
    spec: &KernelSpec,
) -> Result<f64> {
    let n = cfg.len();
    let d = cfg.dim();
    let base = phi.value(cfg);
    let mut total = phi.transport_derivative(cfg);
    let mut jumped = cfg.clone();
    for i in 0..n {
        let probs = interaction_probs_rank(cfg, i, spec)?;
        for (j, &p) in probs.iter().enumerate() {
            if j == i {
                continue;
            }
            jumped.velocities_mut()[i * d..(i + 1) * d].copy_from_slice(cfg.velocity(j));
            total += p * (phi.value(&jumped) - base);
        }
        jumped.velocities_mut()[i * d..(i + 1) * d].copy_from_slice(cfg.velocity(i));
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorCheck {
    /// `(E[Φ(Z_h)] - Φ(Z_0)) / h` from the replicas.
    pub estimate: f64,
    /// Monte-Carlo standard error of `estimate`.
    pub std_error: f64,
    /// `L_N Φ(Z_0)`.
    pub exact: f64,
    pub residual: f64,
}

/// Compares a short-time Monte-Carlo difference quotient with `L_N Φ`.
///
/// Replica `r` uses the stream `(state.seed ^ 0x9e37_79b9_7f4a_7c15, r)`, so
/// the check never consumes the state's own randomness.
pub fn generator_consistency_check(
    phi: &dyn Observable,
    state: &SimState,
    spec: &KernelSpec,
    h: f64,
    replicas: usize,
) -> Result<GeneratorCheck> {
    if !(h > 0.0 && h <= 0.01) {
        return Err(Error::Domain(format!("step h = {h} must lie in (0, 0.01]")));
    }
    if state.cfg.len() > 5 {
        return Err(Error::Domain(format!(
            "generator check is for N <= 5, got {}",
            state.cfg.len()
        )));
    }
    if replicas < 2 {
        return Err(Error::Domain("need at least two replicas".into()));
    }
    let base = phi.value(&state.cfg);
    let exact = generator_exact(phi, &state.cfg, spec)?;
    let seed = state.stream.seed ^ 0x9e37_79b9_7f4a_7c15;
    let samples = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut replica = SimState::new(state.cfg.clone(), RngStream::new(seed, r));
            replica.time = state.time;
            replica.run_quiet(spec, state.time + h, &[])?;
            Ok(phi.value(&replica.cfg) - base)
        })
        .collect::<Result<Vec<f64>>>()?;
    let count = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / count;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (count - 1.0);
    let estimate = mean / h;
    Ok(GeneratorCheck {
        estimate,
        std_error: (var / count).sqrt() / h,
        exact,
        residual: (estimate - exact).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(v: [f64; 2]) -> SimState {
        let cfg = Configuration::new(1, 1.0, vec![0.2, 0.7], v.to_vec()).unwrap();
        SimState::new(cfg, RngStream::new(5, 0))
    }

    #[test]
    fn initial_sampling_is_deterministic() {
        let g = Geometry::default();
        let a = sample_initial(50, InitialLaw::UniformXGaussV, g, RngStream::new(42, 3)).unwrap();
        let b = sample_initial(50, InitialLaw::UniformXGaussV, g, RngStream::new(42, 3)).unwrap();
        assert_eq!(a, b);
        let c = sample_initial(50, InitialLaw::UniformXGaussV, g, RngStream::new(42, 4)).unwrap();
        assert_ne!(a.cfg, c.cfg);
    }

    #[test]
    fn two_point_mean_velocity_near_zero() {
        let s = sample_initial(
            1000,
            InitialLaw::UniformXTwoPointV,
            Geometry::default(),
            RngStream::new(42, 0),
        )
        .unwrap();
        let mean = s.cfg.velocities().iter().sum::<f64>() / 1000.0;
        assert!(mean.abs() <= 3.0 / 1000f64.sqrt(), "{mean}");
        assert!(s.cfg.velocities().iter().all(|v| v.abs() == 1.0));
    }

    #[test]
    fn sampling_edge_cases() {
        let g = Geometry {
            dim: 3,
            ..Geometry::default()
        };
        let s = sample_initial(2, InitialLaw::UniformXUniformV, g, RngStream::new(1, 0)).unwrap();
        assert_eq!(s.cfg.len(), 2);
        assert_eq!(s.time(), 0.0);
        assert_eq!(s.jump_count(), 0);
        assert!(sample_initial(1, InitialLaw::UniformXUniformV, g, RngStream::new(1, 0)).is_err());
        assert!(matches!(
            "gauss".parse::<InitialLaw>(),
            Err(Error::UnknownLaw(_))
        ));
    }

    #[test]
    fn zero_velocity_flight_keeps_positions() {
        let mut s = two_state([0.0, 0.0]);
        let before = s.cfg.positions().to_vec();
        let tau = s.advance_to_next_event();
        assert!(tau > 0.0);
        assert_eq!(s.time(), tau);
        assert_eq!(s.cfg.positions(), &before[..]);
    }

    #[test]
    fn waiting_time_mean_for_two_particles() {
        let mut s = two_state([0.0, 0.0]);
        let draws = 100_000;
        let mean = (0..draws).map(|_| s.advance_to_next_event()).sum::<f64>() / draws as f64;
        // Exp(2): mean 1/2, sd 1/2
        assert!(
            (mean - 0.5).abs() <= 3.0 * 0.5 / (draws as f64).sqrt(),
            "{mean}"
        );
    }

    #[test]
    fn one_jump_reaches_consensus_at_two_particles() {
        let mut s = two_state([-1.0, 1.0]);
        s.advance_to_next_event();
        let event = s.execute_jump(&KernelSpec::uniform()).unwrap();
        assert_ne!(event.chooser, event.partner);
        assert_eq!(s.cfg.velocity(0), s.cfg.velocity(1));
        assert_eq!(s.jump_count(), 1);
    }

    #[test]
    fn uniform_partner_frequencies() {
        let cfg = Configuration::new(1, 1.0, vec![0.1, 0.3, 0.8], vec![1.0, 2.0, 3.0]).unwrap();
        let mut s = SimState::new(cfg.clone(), RngStream::new(9, 0));
        let jumps = 100_000;
        let mut chose_nearer = 0usize;
        let mut total = 0usize;
        for _ in 0..jumps {
            s.cfg = cfg.clone();
            let e = s.execute_jump(&KernelSpec::uniform()).unwrap();
            if e.chooser == 0 {
                total += 1;
                if e.partner == 1 {
                    chose_nearer += 1;
                }
            }
        }
        let p = chose_nearer as f64 / total as f64;
        let sigma = (0.25 / total as f64).sqrt();
        assert!((p - 0.5).abs() <= 3.0 * sigma, "{p}");
    }

    #[test]
    fn run_with_zero_horizon() {
        let mut s = two_state([-1.0, 1.0]);
        let before = s.cfg.clone();
        let out = s.run(&KernelSpec::uniform(), 0.0, &[0.0]).unwrap();
        assert!(out.events.is_empty());
        assert_eq!(out.snapshots.len(), 1);
        assert_eq!(out.snapshots[0].cfg, before);
        assert_eq!(s.jump_count(), 0);
    }

    #[test]
    fn run_rejects_bad_snapshot_times() {
        let mut s = two_state([-1.0, 1.0]);
        assert!(s.run(&KernelSpec::uniform(), 1.0, &[0.5, 0.2]).is_err());
        assert!(s.run(&KernelSpec::uniform(), 1.0, &[1.5]).is_err());
    }

    #[test]
    fn snapshots_interpolate_free_flight() {
        let g = Geometry::default();
        let mut s =
            sample_initial(20, InitialLaw::UniformXTwoPointV, g, RngStream::new(3, 0)).unwrap();
        let times = [0.0, 0.013, 0.4, 1.0];
        let out = s.run(&KernelSpec::linear(), 1.0, &times).unwrap();
        assert_eq!(out.snapshots.len(), times.len());
        for (snap, t) in out.snapshots.iter().zip(times) {
            assert_eq!(snap.time, t);
            // between consecutive events velocities are fixed, so the snapshot
            // equals the pre-event configuration flown to `t`
            assert!(snap.cfg.positions().iter().all(|x| (0.0..1.0).contains(x)));
        }
        assert_eq!(s.time(), 1.0);
        assert_eq!(s.jump_count() as usize, out.events.len());
    }

    #[test]
    fn event_logs_are_reproducible() {
        let g = Geometry {
            dim: 2,
            ..Geometry::default()
        };
        let run = || {
            let mut s =
                sample_initial(10, InitialLaw::UniformXGaussV, g, RngStream::new(77, 1)).unwrap();
            s.run(&KernelSpec::paper_example(20), 2.0, &[1.0]).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.events, b.events);
        assert_eq!(a.snapshots, b.snapshots);
    }

    #[test]
    fn generator_exact_values() {
        let s = two_state([0.0, 1.0]);
        let u = KernelSpec::uniform();
        assert_eq!(generator_exact(&Constant(1.0), &s.cfg, &u).unwrap(), 0.0);
        let v1 = VelocityComponent {
            particle: 0,
            component: 0,
        };
        // particle 0 copies particle 1 at rate π_{0,1} = 1: L Φ = v_2 - v_1
        assert_eq!(generator_exact(&v1, &s.cfg, &u).unwrap(), 1.0);
        let x1 = PositionComponent {
            particle: 0,
            component: 0,
        };
        let moving = two_state([0.3, -0.2]);
        assert_eq!(generator_exact(&x1, &moving.cfg, &u).unwrap(), 0.3);
    }

    #[test]
    fn finite_difference_transport_derivative() {
        struct Sine;
        impl Observable for Sine {
            fn value(&self, cfg: &Configuration) -> f64 {
                (2.0 * PI * cfg.position(1)[0]).sin()
            }
        }
        let s = two_state([0.0, 0.5]);
        let exact = 0.5 * 2.0 * PI * (2.0 * PI * 0.7f64).cos();
        assert!((Sine.transport_derivative(&s.cfg) - exact).abs() < 1e-6);
    }

    #[test]
    fn generator_check_constant_has_no_residual() {
        let s = two_state([0.0, 1.0]);
        let c = generator_consistency_check(&Constant(1.0), &s, &KernelSpec::uniform(), 0.01, 100)
            .unwrap();
        assert_eq!(c.residual, 0.0);
        assert!(
            generator_consistency_check(&Constant(1.0), &s, &KernelSpec::uniform(), 0.1, 100)
                .is_err()
        );
    }
}
