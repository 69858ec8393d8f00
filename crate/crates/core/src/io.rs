//! On-disk formats: event logs, snapshots, distribution dumps and manifests.
//!
//! Binary grid dump layout (all little-endian):
//!
//! | field   | type  |
//! |---------|-------|
//! | Nx      | u64   |
//! | Nv      | u64   |
//! | L       | f64   |
//! | v_min   | f64   |
//! | v_max   | f64   |
//! | values  | f64 × Nx·Nv, row-major (x outer, v inner) |

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetic::{DistributionFn, PhaseGrid};
use crate::rank::Configuration;
use crate::sim::EventRecord;

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

macro_rules! put {
    ($path:expr, $w:expr, $($arg:tt)*) => {
        write!($w, $($arg)*).map_err(|e| Error::io($path, e))?
    };
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn axis_header(prefix: &str, dim: usize) -> String {
    (0..dim)
        .map(|c| format!("{prefix}{c}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes one `time,i,j,v0[,v1,v2]` row per jump.
pub fn write_events_csv(path: &Path, events: &[EventRecord], dim: usize) -> Result<()> {
    let mut w = create(path)?;
    put!(path, w, "time,i,j,{}\n", axis_header("v", dim));
    for e in events {
        put!(
            path,
            w,
            "{},{},{},{}\n",
            e.time,
            e.chooser,
            e.partner,
            join(&e.velocity)
        );
    }
    finish(path, w)
}

/// Writes one `particle_index,x0..,v0..` row per particle.
pub fn write_snapshot_csv(path: &Path, cfg: &Configuration) -> Result<()> {
    let mut w = create(path)?;
    let d = cfg.dim();
    put!(
        path,
        w,
        "particle_index,{},{}\n",
        axis_header("x", d),
        axis_header("v", d)
    );
    for i in 0..cfg.len() {
        put!(
            path,
            w,
            "{},{},{}\n",
            i,
            join(cfg.position(i)),
            join(cfg.velocity(i))
        );
    }
    finish(path, w)
}

/// Reads a snapshot written by [`write_snapshot_csv`] back onto the torus of side `side`.
pub fn read_snapshot_csv(path: &Path, side: f64, periodic: bool) -> Result<Configuration> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Domain(format!("{} is empty", path.display())))?
        .map_err(|e| Error::io(path, e))?;
    let columns = header.split(',').count();
    if columns < 3 || (columns - 1) % 2 != 0 {
        return Err(Error::Domain(format!("bad snapshot header `{header}`")));
    }
    let dim = (columns - 1) / 2;
    let (mut positions, mut velocities) = (Vec::new(), Vec::new());
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        let fields: Vec<f64> = line
            .split(',')
            .skip(1)
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Domain(format!("bad snapshot row `{line}`: {e}")))?;
        if fields.len() != 2 * dim {
            return Err(Error::Domain(format!("bad snapshot row `{line}`")));
        }
        positions.extend_from_slice(&fields[..dim]);
        velocities.extend_from_slice(&fields[dim..]);
    }
    if periodic {
        Configuration::new(dim, side, positions, velocities)
    } else {
        Configuration::nonperiodic(dim, side, positions, velocities)
    }
}

/// `x,v,f` at cell centers.
pub fn write_distribution_csv(path: &Path, f: &DistributionFn) -> Result<()> {
    let mut w = create(path)?;
    let g = f.grid();
    put!(path, w, "x,v,f\n");
    for k in 0..g.nx() {
        for l in 0..g.nv() {
            put!(
                path,
                w,
                "{},{},{}\n",
                g.x_center(k),
                g.v_center(l),
                f.get(k, l)
            );
        }
    }
    finish(path, w)
}

pub fn write_grid_binary(path: &Path, f: &DistributionFn) -> Result<()> {
    let mut w = create(path)?;
    let g = f.grid();
    let (v_min, v_max) = g.v_range();
    let mut bytes = Vec::with_capacity(40 + 8 * f.values().len());
    bytes.extend_from_slice(&(g.nx() as u64).to_le_bytes());
    bytes.extend_from_slice(&(g.nv() as u64).to_le_bytes());
    for x in [g.side(), v_min, v_max] {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    for v in f.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    finish(path, w)
}

pub fn read_grid_binary(path: &Path) -> Result<DistributionFn> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let short = || Error::Domain(format!("{} is truncated", path.display()));
    let word = |i: usize| -> Result<[u8; 8]> {
        bytes
            .get(8 * i..8 * (i + 1))
            .map(|b| b.try_into().expect("8 bytes"))
            .ok_or_else(short)
    };
    let nx = u64::from_le_bytes(word(0)?) as usize;
    let nv = u64::from_le_bytes(word(1)?) as usize;
    let side = f64::from_le_bytes(word(2)?);
    let v_min = f64::from_le_bytes(word(3)?);
    let v_max = f64::from_le_bytes(word(4)?);
    let grid = PhaseGrid::new(nx, nv, side, v_min, v_max)?;
    if bytes.len() != 40 + 8 * nx * nv {
        return Err(short());
    }
    let values = (0..nx * nv)
        .map(|i| word(5 + i).map(f64::from_le_bytes))
        .collect::<Result<Vec<_>>>()?;
    DistributionFn::new(grid, values)
}

/// Lists the files produced for a sequence of times.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub times: Vec<f64>,
    pub files: Vec<String>,
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Tracks files written by a command so a failed command can remove them.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    written: Vec<PathBuf>,
    created_dir: bool,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            created_dir,
        })
    }

    /// Path for `name` inside the output directory, registered for cleanup.
    pub fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.written
    }

    /// Removes everything this set wrote (and the directory, if it created it).
    pub fn discard(self) {
        for p in &self.written {
            let _ = std::fs::remove_file(p);
        }
        if self.created_dir {
            let _ = std::fs::remove_dir(&self.dir);
        }
    }
}
