//! The command implementations behind the `topo-align` binary.
//!
//! Each command writes into an output directory and returns the files it
//! produced. On failure everything the command wrote is removed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::info;

use crate::chaos::{prop1_bound, theorem1_bound};
use crate::config::StudyConfig;
use crate::error::{Error, Result};
use crate::io::{
    write_distribution_csv, write_events_csv, write_grid_binary, write_manifest,
    write_snapshot_csv, Manifest, OutputSet,
};
use crate::kernel::KernelSpec;
use crate::sim::sample_initial;
use crate::study::{convergence_study, kinetic_reference, run_stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Solve,
    Study,
    Bounds,
    KernelCheck,
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simulate" => Ok(Command::Simulate),
            "solve" => Ok(Command::Solve),
            "study" => Ok(Command::Study),
            "bounds" => Ok(Command::Bounds),
            "kernel-check" => Ok(Command::KernelCheck),
            other => Err(Error::Config(format!("unknown command `{other}`"))),
        }
    }
}

/// Runs `command` on a worker pool of `workers` threads (all cores if `None`).
pub fn execute(
    command: Command,
    cfg: &StudyConfig,
    out_dir: &Path,
    workers: Option<usize>,
) -> Result<Vec<PathBuf>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let mut outputs = OutputSet::new(out_dir)?;
    let result = pool.install(|| match command {
        Command::Simulate => cmd_simulate(cfg, &mut outputs),
        Command::Solve => cmd_solve(cfg, &mut outputs),
        Command::Study => cmd_study(cfg, &mut outputs),
        Command::Bounds => cmd_bounds(cfg, &mut outputs),
        Command::KernelCheck => cmd_kernel_check(cfg, &mut outputs),
    });
    match result {
        Ok(()) => Ok(outputs.files().to_vec()),
        Err(e) => {
            outputs.discard();
            Err(e)
        }
    }
}

fn write_text(outputs: &mut OutputSet, name: &str, text: &str) -> Result<()> {
    let path = outputs.path(name);
    std::fs::write(&path, text).map_err(|e| Error::io(path, e))
}

fn cmd_simulate(cfg: &StudyConfig, outputs: &mut OutputSet) -> Result<()> {
    let spec = cfg.kernel_spec()?;
    let times = cfg.snapshot_times();
    for &n in &cfg.n_values {
        info!("simulate: N = {n}, {} runs", cfg.runs);
        for run in 0..cfg.runs {
            let mut state = sample_initial(
                n,
                cfg.initial_law,
                cfg.geometry,
                run_stream(cfg.seed, n, run),
            )?;
            let result = state.run(&spec, cfg.t_end, &times)?;
            let stem = format!("N{n}_run{run}");
            let events = outputs.path(&format!("events_{stem}.csv"));
            write_events_csv(&events, &result.events, cfg.geometry.dim)?;
            let mut manifest = Manifest::default();
            for (idx, snap) in result.snapshots.iter().enumerate() {
                let name = format!("snapshot_{stem}_t{idx}.csv");
                write_snapshot_csv(&outputs.path(&name), &snap.cfg)?;
                manifest.times.push(snap.time);
                manifest.files.push(name);
            }
            write_manifest(&outputs.path(&format!("manifest_{stem}.json")), &manifest)?;
        }
    }
    Ok(())
}

fn cmd_solve(cfg: &StudyConfig, outputs: &mut OutputSet) -> Result<()> {
    let spec = cfg.kernel_spec()?;
    let solutions = kinetic_reference(cfg, &spec)?;
    let mut manifest = Manifest::default();
    for (idx, (f, &t)) in solutions.iter().zip(&cfg.snapshot_times()).enumerate() {
        let csv = format!("distribution_t{idx}.csv");
        let bin = format!("distribution_t{idx}.bin");
        write_distribution_csv(&outputs.path(&csv), f)?;
        write_grid_binary(&outputs.path(&bin), f)?;
        info!("solve: t = {t}, mass = {}", f.mass());
        manifest.times.push(t);
        manifest.files.push(bin);
    }
    write_manifest(&outputs.path("manifest.json"), &manifest)
}

fn cmd_study(cfg: &StudyConfig, outputs: &mut OutputSet) -> Result<()> {
    let report = convergence_study(cfg)?;
    write_text(outputs, "report.csv", &report.to_csv())?;
    write_text(outputs, "defect_slopes.csv", &report.slopes_csv())
}

/// Bound table over `N × t × j × α`.
pub fn bounds_table(cfg: &StudyConfig) -> Result<String> {
    let a = cfg.kernel_spec()?.compute_a();
    let mut out = String::from("N,t,j,alpha,A,prop1_bound,theorem1_bound,bound_vacuous_flag\n");
    let mut times = vec![0.0];
    times.extend(cfg.snapshot_times().into_iter().filter(|&t| t > 0.0));
    for &n in &cfg.n_values {
        for &t in &times {
            for &j in &cfg.bound_orders {
                for &alpha in &cfg.alpha {
                    let b = theorem1_bound(j, t, n, a, alpha)?;
                    let p = prop1_bound(j, n, a)?;
                    writeln!(
                        out,
                        "{n},{t},{j},{alpha},{a},{p},{},{}",
                        b.value, b.vacuous as u8
                    )
                    .unwrap();
                }
            }
        }
    }
    Ok(out)
}

fn cmd_bounds(cfg: &StudyConfig, outputs: &mut OutputSet) -> Result<()> {
    let table = bounds_table(cfg)?;
    print!("{table}");
    write_text(outputs, "bounds.csv", &table)
}

/// Normalization, `A`, `e_K(N)` and `α_N` diagnostics for one kernel.
pub fn kernel_diagnostics(spec: &KernelSpec, n_values: &[usize]) -> Result<String> {
    let a = spec.compute_a();
    let mut out = String::new();
    writeln!(
        out,
        "# kernel: {} (truncation {})",
        spec.form(),
        spec.truncation_order()
    )
    .unwrap();
    writeln!(
        out,
        "# normalization_residual: {:e}",
        spec.normalization_residual()
    )
    .unwrap();
    writeln!(out, "# A: {a}").unwrap();
    writeln!(out, "N,e_K,e_K_bound,e_K_bound_ok,alpha_N,alpha_N_bound").unwrap();
    let mut ns: Vec<usize> = n_values.iter().copied().chain([3, 10, 100, 1000]).collect();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        let e = spec.riemann_error(n)?;
        let bound = a / (n - 1) as f64;
        let alpha = spec.alpha_n(n)?;
        // the α_N estimate only applies above N = 2A + 1
        let alpha_bound = if (n as f64) > 2.0 * a + 1.0 {
            (4.0 * (a / (n - 1) as f64).exp() / (n - 1) as f64).to_string()
        } else {
            String::new()
        };
        writeln!(
            out,
            "{n},{e},{bound},{},{alpha},{alpha_bound}",
            (e.abs() <= bound) as u8
        )
        .unwrap();
    }
    Ok(out)
}

fn cmd_kernel_check(cfg: &StudyConfig, outputs: &mut OutputSet) -> Result<()> {
    let spec = cfg.kernel_spec()?;
    let text = kernel_diagnostics(&spec, &cfg.n_values)?;
    print!("{text}");
    write_text(outputs, "kernel_check.csv", &text)
}
