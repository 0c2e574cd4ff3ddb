//! Flag parsing and the sweep runner behind the `hetsim` binary.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::ops::RangeInclusive;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Parser;
use hetsim_core::report::{emit_round_csv, emit_summary_json, format_sig9};
use hetsim_core::{parse_config, run_simulation, ProtocolKind, RunSummary, ScenarioConfig};
use rayon::prelude::*;

#[derive(Debug, Clone, Parser)]
#[command(name = "hetsim", version, about = "Simulate LEACH, DEEC and Ad-LEACH on a heterogeneous sensor field")]
pub struct Cli {
    /// Flat `key = value` scenario file; flags override its values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Single protocol: leach, deec or adleach.
    #[arg(long, conflicts_with = "protocols")]
    pub protocol: Option<String>,

    /// Comma-separated protocols to sweep.
    #[arg(long, value_delimiter = ',')]
    pub protocols: Option<Vec<String>>,

    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,

    /// Seed range `A..B` (inclusive) or comma list.
    #[arg(long)]
    pub seeds: Option<String>,

    /// Advanced-node fraction; a comma list sweeps several values.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<f64>>,

    /// Advanced-node energy multiplier; a comma list sweeps several values.
    #[arg(long, value_delimiter = ',')]
    pub a: Option<Vec<f64>>,

    #[arg(long)]
    pub nodes: Option<usize>,

    /// Field size in meters, `WxH`.
    #[arg(long, value_name = "WxH")]
    pub field: Option<String>,

    #[arg(long)]
    pub clusters: Option<usize>,

    #[arg(long)]
    pub max_rounds: Option<u64>,

    #[arg(long, env = "HETSIM_OUT", default_value = "hetsim-out")]
    pub out: PathBuf,

    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Cartesian product of protocols × (m, a) grid points × seeds over a
/// base scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    pub protocols: Vec<ProtocolKind>,
    pub seeds: Vec<u64>,
    pub grid: Vec<(f64, f64)>,
}

/// One simulation of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub config: ScenarioConfig,
    /// Directory the cell's files go into.
    pub dir: PathBuf,
}

impl Cell {
    pub fn stem(&self) -> String {
        format!("{}_{}", self.config.protocol, self.config.seed)
    }

    pub fn csv_path(&self) -> PathBuf {
        self.dir.join(format!("{}.csv", self.stem()))
    }

    pub fn json_path(&self) -> PathBuf {
        self.dir.join(format!("{}.json", self.stem()))
    }

    fn label(&self) -> String {
        format!(
            "protocol={} seed={} m={} a={}",
            self.config.protocol, self.config.seed, self.config.m, self.config.a
        )
    }
}

pub fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let spec = spec.trim();
    if let Some((a, b)) = spec.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let lo: u64 = a.trim().parse().with_context(|| format!("bad seed range start `{a}`"))?;
        let hi: u64 = b.trim().parse().with_context(|| format!("bad seed range end `{b}`"))?;
        if lo > hi {
            bail!("empty seed range `{spec}`");
        }
        return Ok(RangeInclusive::new(lo, hi).collect());
    }
    spec.split(',')
        .map(|s| s.trim().parse().with_context(|| format!("bad seed `{s}`")))
        .collect()
}

fn parse_field(spec: &str) -> Result<(String, String)> {
    let (w, h) = spec
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("--field expects WxH, got `{spec}`"))?;
    Ok((w.trim().to_string(), h.trim().to_string()))
}

/// Resolves config file, flags and list arguments into a sweep.
pub fn build_sweep(cli: &Cli) -> Result<SweepSpec> {
    let text = match &cli.config {
        Some(path) => Some(fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?),
        None => None,
    };

    let mut overrides: Vec<(&str, String)> = Vec::new();
    if let Some(n) = cli.nodes {
        overrides.push(("nodes", n.to_string()));
    }
    if let Some(field) = &cli.field {
        let (w, h) = parse_field(field)?;
        overrides.push(("field_w", w));
        overrides.push(("field_h", h));
    }
    if let Some(q) = cli.clusters {
        overrides.push(("clusters", q.to_string()));
    }
    if let Some(r) = cli.max_rounds {
        overrides.push(("max_rounds", r.to_string()));
    }
    if let Some(p) = &cli.protocol {
        overrides.push(("protocol", p.clone()));
    }
    if let Some(s) = cli.seed {
        overrides.push(("seed", s.to_string()));
    }
    if let Some(m) = cli.m.as_ref().and_then(|v| v.first()) {
        overrides.push(("m", m.to_string()));
    }
    if let Some(a) = cli.a.as_ref().and_then(|v| v.first()) {
        overrides.push(("a", a.to_string()));
    }
    let base = parse_config(text.as_deref(), &overrides)?;

    let protocols = match &cli.protocols {
        Some(list) => list
            .iter()
            .map(|p| p.parse::<ProtocolKind>().map_err(anyhow::Error::from))
            .collect::<Result<Vec<_>>>()?,
        None => vec![base.protocol],
    };
    let seeds = match &cli.seeds {
        Some(spec) => parse_seeds(spec)?,
        None => vec![base.seed],
    };
    let ms = cli.m.clone().unwrap_or_else(|| vec![base.m]);
    let as_ = cli.a.clone().unwrap_or_else(|| vec![base.a]);
    let grid = ms.iter().flat_map(|&m| as_.iter().map(move |&a| (m, a))).collect();

    let spec = SweepSpec { base, protocols, seeds, grid };
    for cell in spec.cells(Path::new(".")) {
        cell.config.validate()?;
    }
    Ok(spec)
}

impl SweepSpec {
    pub fn single(config: ScenarioConfig) -> Self {
        Self {
            protocols: vec![config.protocol],
            seeds: vec![config.seed],
            grid: vec![(config.m, config.a)],
            base: config,
        }
    }

    pub fn len(&self) -> usize {
        self.protocols.len() * self.seeds.len() * self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cells in output order: grid point, then protocol, then seed. With
    /// more than one grid point each point gets its own subdirectory.
    pub fn cells(&self, out: &Path) -> Vec<Cell> {
        let mut cells = Vec::with_capacity(self.len());
        for &(m, a) in &self.grid {
            let dir = if self.grid.len() > 1 {
                out.join(format!("m{m}_a{a}"))
            } else {
                out.to_path_buf()
            };
            for &protocol in &self.protocols {
                for &seed in &self.seeds {
                    cells.push(Cell {
                        config: ScenarioConfig { protocol, seed, m, a, ..self.base.clone() },
                        dir: dir.clone(),
                    });
                }
            }
        }
        cells
    }
}

pub const SWEEP_SUMMARY_HEADER: &str =
    "protocol,seed,m,a,first_death_round,last_death_round,stable_region,unstable_region,total_packets_bs,rounds_simulated";

fn opt(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sweep_summary_csv(rows: &[(Cell, RunSummary)]) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_SUMMARY_HEADER);
    out.push('\n');
    for (cell, s) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            cell.config.protocol,
            cell.config.seed,
            format_sig9(cell.config.m),
            format_sig9(cell.config.a),
            opt(s.first_death_round),
            opt(s.last_death_round),
            opt(s.stable_region),
            opt(s.unstable_region),
            s.total_packets_bs,
            s.rounds_simulated
        );
    }
    out
}

fn run_cell(cell: &Cell) -> Result<RunSummary> {
    let output = run_simulation(&cell.config)?;
    fs::create_dir_all(&cell.dir).with_context(|| format!("creating {}", cell.dir.display()))?;
    let csv = cell.csv_path();
    let mut w = BufWriter::new(File::create(&csv).with_context(|| format!("creating {}", csv.display()))?);
    emit_round_csv(&output.trace, &mut w).with_context(|| format!("writing {}", csv.display()))?;
    let json = cell.json_path();
    let mut w = BufWriter::new(File::create(&json).with_context(|| format!("creating {}", json.display()))?);
    emit_summary_json(&output.summary, &mut w).with_context(|| format!("writing {}", json.display()))?;
    Ok(output.summary)
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".to_string())
}

/// Runs every cell on a pool of `jobs` workers and writes the per-cell
/// CSV and JSON files, plus `sweep_summary.csv` when there is more than
/// one cell. Returns the summaries in cell order.
pub fn run_command(spec: &SweepSpec, out: &Path, jobs: Option<usize>) -> Result<Vec<(Cell, RunSummary)>> {
    fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))?;
    let cells = spec.cells(out);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("building worker pool")?;

    let results: Vec<Result<RunSummary>> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                panic::catch_unwind(AssertUnwindSafe(|| run_cell(cell)))
                    .unwrap_or_else(|p| Err(anyhow!("panicked: {}", panic_message(p.as_ref()))))
                    .with_context(|| format!("cell {}", cell.label()))
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(cells.len());
    for (cell, result) in cells.into_iter().zip(results) {
        rows.push((cell, result?));
    }
    if rows.len() > 1 {
        let path = out.join("sweep_summary.csv");
        fs::write(&path, sweep_summary_csv(&rows)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::parse_from(std::iter::once("hetsim").chain(args.iter().copied()))
    }

    #[test]
    fn seed_specs() {
        assert_eq!(parse_seeds("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("4..=5").unwrap(), vec![4, 5]);
        assert_eq!(parse_seeds("7, 9").unwrap(), vec![7, 9]);
        assert!(parse_seeds("5..1").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn heterogeneity_flags() {
        let spec = build_sweep(&cli(&["--a", "4", "--m", "0.5"])).unwrap();
        assert_eq!((spec.base.m, spec.base.a), (0.5, 4.0));
        assert_eq!(spec.grid, vec![(0.5, 4.0)]);
        assert_eq!(spec.len(), 1);
    }

    #[test]
    fn cartesian_sweep() {
        let spec = build_sweep(&cli(&["--protocols", "leach,deec,adleach", "--seeds", "1..30"])).unwrap();
        assert_eq!(spec.len(), 90);
        let spec = build_sweep(&cli(&["--protocols", "leach,adleach", "--seeds", "1..2", "--m", "0.1,0.5", "--a", "0,4"])).unwrap();
        assert_eq!(spec.len(), 16);
        let cells = spec.cells(Path::new("o"));
        assert_eq!(cells[0].csv_path(), Path::new("o/m0.1_a0/leach_1.csv"));
    }

    #[test]
    fn field_and_scalars() {
        let spec = build_sweep(&cli(&["--field", "200x80", "--clusters", "6", "--nodes", "40", "--max-rounds", "9"])).unwrap();
        let b = &spec.base;
        assert_eq!((b.field_w, b.field_h, b.q, b.n, b.max_rounds), (200.0, 80.0, 6, 40, 9));
        assert!(build_sweep(&cli(&["--field", "200"])).is_err());
    }

    #[test]
    fn bad_values_are_rejected() {
        let err = build_sweep(&cli(&["--m", "1.5"])).unwrap_err();
        assert!(format!("{err:#}").contains("`m`"));
        assert!(build_sweep(&cli(&["--protocols", "leach,sep"])).is_err());
        assert!(build_sweep(&cli(&["--m", "0.1,2"])).is_err());
    }
}
