//! The `anchorlab` command-line surface.
//!
//! Every subcommand exits 0 on success and nonzero with a diagnostic on
//! stderr otherwise. Given the same flags and seed, output files are
//! byte-identical across runs (the `time` column of benchmark reports is the
//! one exception: it reports measured wall time).

use crate::experiments::{
    noise_sweep, rgap_study, run_traversal, spearman, ExperimentSpec, MethodSet, PlacementArea,
    RgapSpec,
};
use crate::field::{geo_to_local, replay, DEFAULT_GAP_THRESHOLD};
use crate::formats;
use anchorlab_core::geometry::{hilbert_trajectory, AnchorSet, Region, Trajectory};
use anchorlab_core::localizers::{GdmConfig, LsmConfig, Method};
use anchorlab_core::noise::{NoiseKind, NoiseModel};
use anchorlab_core::{lvt_grid, osap_map, region_score, trajectory_score};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "anchorlab",
    version,
    about = "Quantify anchor-placement impact on range-based localization and benchmark localizers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Hilbert traversal trajectory as CSV
    Hilbert(HilbertArgs),
    /// Rasterize the multi-anchor GDOP over a region (vulnerability map)
    Lvt(LvtArgs),
    /// Print the placement score of an anchor set over a region or trajectory
    Score(ScoreArgs),
    /// Map the winning anchor pair per grid node, optionally under noise
    Osap(OsapArgs),
    /// Benchmark localizers along a trajectory under noise
    Bench(BenchArgs),
    /// Sweep noise levels and models across anchor placements
    Sweep(SweepArgs),
    /// Random-anchor-placement study: scores vs localization error
    Rgap(RgapArgs),
    /// Replay a recorded range log through the localizers
    Replay(ReplayArgs),
    /// Apply a GPS-to-local transform to one coordinate
    Geo(GeoArgs),
}

fn parse_region(s: &str) -> std::result::Result<Region, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err("expected xmin,ymin,xmax,ymax".into());
    }
    let mut v = [0.0f64; 4];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.trim().parse::<f64>().map_err(|_| format!("bad number '{p}'"))?;
    }
    Region::from_bounds(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

fn parse_methods(s: &str) -> std::result::Result<MethodSet, String> {
    MethodSet::parse(s).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Gaussian,
    Uniform,
}

impl From<ModelArg> for NoiseKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Gaussian => NoiseKind::Gaussian,
            ModelArg::Uniform => NoiseKind::Uniform,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AreaArg {
    Full,
    Half,
}

#[derive(Args)]
struct AnchorInput {
    /// Anchor CSV: `id,x,y` in local meters (or `id,lon,lat` with --geo)
    #[arg(long)]
    anchors: PathBuf,
    /// Transform CSV `x0,y0,xf,yf,alpha`; anchor coordinates are then read
    /// as lon/lat and mapped to local meters
    #[arg(long)]
    geo: Option<PathBuf>,
}

impl AnchorInput {
    fn load(&self) -> Result<AnchorSet> {
        let text = fs::read_to_string(&self.anchors)
            .with_context(|| format!("reading {}", self.anchors.display()))?;
        let transform = match &self.geo {
            Some(path) => Some(
                formats::parse_transform_csv(
                    &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
                )
                .with_context(|| format!("parsing {}", path.display()))?,
            ),
            None => None,
        };
        formats::parse_anchors_csv(&text, transform.as_ref())
            .with_context(|| format!("parsing {}", self.anchors.display()))
    }
}

#[derive(Args)]
struct HilbertArgs {
    /// Curve order (4^order vertices before resampling)
    #[arg(long)]
    order: u32,
    #[arg(long, value_parser = parse_region, default_value = "0,0,100,100")]
    region: Region,
    /// Resample to exactly this many points
    #[arg(long)]
    points: usize,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LvtArgs {
    #[command(flatten)]
    anchors: AnchorInput,
    #[arg(long, value_parser = parse_region, default_value = "0,0,100,100")]
    region: Region,
    /// Grid resolution: NX NY nodes
    #[arg(long, num_args = 2, value_names = ["NX", "NY"], default_values_t = [101, 101])]
    grid: Vec<usize>,
    /// Also write an 8-bit PGM heightmap here
    #[arg(long)]
    pgm: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    anchors: AnchorInput,
    /// Score over a region (trapezium rule on 10,000 sub-areas)
    #[arg(long, value_parser = parse_region, conflicts_with = "trajectory", required_unless_present = "trajectory")]
    region: Option<Region>,
    /// Score over a trajectory CSV (mean over its points)
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

#[derive(Args)]
struct OsapArgs {
    #[command(flatten)]
    anchors: AnchorInput,
    #[arg(long, value_parser = parse_region, default_value = "0,0,100,100")]
    region: Region,
    #[arg(long, num_args = 2, value_names = ["NX", "NY"], default_values_t = [101, 101])]
    grid: Vec<usize>,
    /// Perturb distances once per node at this level before selection
    #[arg(long)]
    noise_level: Option<f64>,
    #[arg(long, value_enum, default_value = "gaussian")]
    model: ModelArg,
    #[arg(long, env = "ANCHORLAB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    pgm: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GdmArgs {
    /// Gradient-descent step size
    #[arg(long, default_value_t = 1e-5)]
    gdm_step: f64,
    /// Gradient-descent termination threshold on the step norm
    #[arg(long, default_value_t = 1e-3)]
    gdm_eps: f64,
    /// Gradient-descent iteration cap
    #[arg(long, default_value_t = 100)]
    gdm_iters: u32,
}

impl GdmArgs {
    fn config(&self) -> GdmConfig {
        GdmConfig {
            step: self.gdm_step,
            termination: self.gdm_eps,
            max_iters: self.gdm_iters,
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    anchors: AnchorInput,
    /// Trajectory CSV to traverse
    #[arg(long)]
    trajectory: PathBuf,
    #[arg(long)]
    noise_level: f64,
    #[arg(long, value_enum, default_value = "gaussian")]
    model: ModelArg,
    /// Traversal repetitions (fresh noise substream each)
    #[arg(long, default_value_t = 10)]
    reps: u32,
    #[arg(long, value_parser = parse_methods, default_value = "lsm,gdm,tplm")]
    methods: MethodSet,
    #[arg(long, env = "ANCHORLAB_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    gdm: GdmArgs,
    /// Also write the first repetition's restored trajectory here
    #[arg(long)]
    restored: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Anchor CSVs; each file becomes one labelled curve
    #[arg(long, required = true, num_args = 1..)]
    anchors: Vec<PathBuf>,
    #[arg(long)]
    geo: Option<PathBuf>,
    /// Trajectory CSV (defaults to the order-6, 8190-point Hilbert traversal
    /// of the region)
    #[arg(long)]
    trajectory: Option<PathBuf>,
    #[arg(long, value_parser = parse_region, default_value = "0,0,100,100")]
    region: Region,
    /// Comma list of noise levels
    #[arg(long, value_delimiter = ',', required = true)]
    levels: Vec<f64>,
    /// Noise families to sweep
    #[arg(long, value_enum, num_args = 1.., default_values = ["gaussian"])]
    models: Vec<ModelArg>,
    #[arg(long, default_value_t = 10)]
    reps: u32,
    #[arg(long, value_parser = parse_methods, default_value = "gdm,tplm")]
    methods: MethodSet,
    #[arg(long, env = "ANCHORLAB_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    gdm: GdmArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RgapArgs {
    /// Number of anchors per random placement
    #[arg(short, long)]
    m: usize,
    #[arg(long, value_enum, default_value = "full")]
    area: AreaArg,
    #[arg(long, default_value_t = 100)]
    placements: usize,
    #[arg(long, default_value_t = 0.3)]
    noise_level: f64,
    #[arg(long, value_enum, default_value = "gaussian")]
    model: ModelArg,
    #[arg(long, env = "ANCHORLAB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_region, default_value = "0,0,100,100")]
    region: Region,
    /// Trajectory CSV (defaults to the order-6, 8190-point Hilbert traversal)
    #[arg(long)]
    trajectory: Option<PathBuf>,
    #[arg(long, value_parser = parse_methods, default_value = "lsm,gdm,tplm")]
    methods: MethodSet,
    #[command(flatten)]
    gdm: GdmArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Range log CSV: `epoch,d1,...,dm[,x_true,y_true]`
    #[arg(long)]
    log: PathBuf,
    #[command(flatten)]
    anchors: AnchorInput,
    #[arg(long, value_parser = parse_methods, default_value = "lsm,gdm,tplm")]
    methods: MethodSet,
    /// Sampling-gap threshold in seconds
    #[arg(long, default_value_t = DEFAULT_GAP_THRESHOLD)]
    gap_threshold: f64,
    #[command(flatten)]
    gdm: GdmArgs,
    /// Directory for restored_<method>.csv files
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GeoArgs {
    /// Transform CSV `x0,y0,xf,yf,alpha`
    #[arg(long)]
    transform: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    lon: f64,
    #[arg(long, allow_negative_numbers = true)]
    lat: f64,
}

/// Entry point used by the binary: parse, run, report.
pub fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

fn write_output(out: &Option<PathBuf>, emit: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let mut file = fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            emit(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            emit(&mut lock)
        }
    }
}

fn load_trajectory(path: &Path) -> Result<Trajectory> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    formats::parse_trajectory_csv(&text).with_context(|| format!("parsing {}", path.display()))
}

fn default_traversal(region: &Region) -> Result<Trajectory> {
    hilbert_trajectory(6, region, 8190).map_err(Into::into)
}

fn grid_dims(grid: &[usize]) -> (usize, usize) {
    (grid[0], grid[1])
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Hilbert(args) => {
            let t = hilbert_trajectory(args.order, &args.region, args.points)?;
            write_output(&args.out, |w| {
                formats::write_trajectory_csv(w, &t).map_err(Into::into)
            })
        }
        Command::Lvt(args) => {
            let anchors = args.anchors.load()?;
            let (nx, ny) = grid_dims(&args.grid);
            let grid = lvt_grid(&anchors, &args.region, nx, ny)?;
            if let Some(path) = &args.pgm {
                let mut file = fs::File::create(path)
                    .with_context(|| format!("creating {}", path.display()))?;
                formats::write_lvt_pgm(&mut file, &grid)?;
            }
            write_output(&args.out, |w| {
                formats::write_lvt_csv(w, &grid).map_err(Into::into)
            })
        }
        Command::Score(args) => {
            let anchors = args.anchors.load()?;
            let score = match (&args.region, &args.trajectory) {
                (Some(region), None) => region_score(&anchors, region)?,
                (None, Some(path)) => trajectory_score(&anchors, &load_trajectory(path)?)?,
                _ => bail!("exactly one of --region and --trajectory is required"),
            };
            println!("{:.6}", score.value);
            if score.irregular > 0 {
                eprintln!("note: {} irregular samples", score.irregular);
            }
            Ok(())
        }
        Command::Osap(args) => {
            let anchors = args.anchors.load()?;
            let (nx, ny) = grid_dims(&args.grid);
            let noise = match args.noise_level {
                Some(level) => Some(NoiseModel::new(args.model.into(), level, args.seed)?),
                None => None,
            };
            let map = osap_map(&anchors, &args.region, nx, ny, noise.as_ref())?;
            if let Some(path) = &args.pgm {
                let mut file = fs::File::create(path)
                    .with_context(|| format!("creating {}", path.display()))?;
                formats::write_osap_pgm(&mut file, &map)?;
            }
            write_output(&args.out, |w| {
                formats::write_osap_csv(w, &map).map_err(Into::into)
            })
        }
        Command::Bench(args) => {
            let anchors = args.anchors.load()?;
            let trajectory = load_trajectory(&args.trajectory)?;
            let noise = NoiseModel::new(args.model.into(), args.noise_level, args.seed)?;
            let mut spec = ExperimentSpec::new(anchors, trajectory, noise);
            spec.repetitions = args.reps;
            spec.methods = args.methods;
            spec.gdm = args.gdm.config();
            spec.record_restored = args.restored.is_some();
            let outcome = run_traversal(&spec)?;
            if let Some(path) = &args.restored {
                let mut file = fs::File::create(path)
                    .with_context(|| format!("creating {}", path.display()))?;
                formats::write_restored_csv(&mut file, outcome.restored.as_deref().unwrap())?;
            }
            let ap = args
                .anchors
                .anchors
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "anchors".into());
            write_output(&args.out, |w| {
                formats::write_stats_csv(w, &ap, args.noise_level, &outcome.stats)
                    .map_err(Into::into)
            })
        }
        Command::Sweep(args) => {
            let mut sets = Vec::new();
            for path in &args.anchors {
                let input = AnchorInput { anchors: path.clone(), geo: args.geo.clone() };
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                sets.push((name, input.load()?));
            }
            let trajectory = match &args.trajectory {
                Some(path) => load_trajectory(path)?,
                None => default_traversal(&args.region)?,
            };
            let kinds: Vec<NoiseKind> = args.models.iter().map(|&m| m.into()).collect();
            let rows = noise_sweep(
                &sets,
                &trajectory,
                &args.levels,
                &kinds,
                args.methods,
                args.reps,
                args.seed,
                args.gdm.config(),
            )?;
            write_output(&args.out, |w| {
                formats::write_sweep_csv(w, &rows).map_err(Into::into)
            })
        }
        Command::Rgap(args) => {
            let trajectory = match &args.trajectory {
                Some(path) => load_trajectory(path)?,
                None => default_traversal(&args.region)?,
            };
            let spec = RgapSpec {
                anchor_count: args.m,
                area: match args.area {
                    AreaArg::Full => PlacementArea::Full,
                    AreaArg::Half => PlacementArea::UpperHalf,
                },
                placements: args.placements,
                noise_kind: args.model.into(),
                noise_level: args.noise_level,
                seed: args.seed,
                traversal_region: args.region,
                trajectory,
                methods: args.methods,
                gdm: args.gdm.config(),
            };
            let study = rgap_study(&spec)?;
            eprintln!(
                "mean score {:.6} over {} placements ({} collinear redraws)",
                study.mean_score(),
                study.rows.len(),
                study.redraws
            );
            for method in [Method::Lsm, Method::Gdm, Method::Tplm] {
                if let Some(mean) = study.mean_error(method) {
                    let rho = spearman(&study.scores(), &study.errors(method));
                    eprintln!(
                        "{}: mean error {:.6}, spearman(score, error) {:.3}",
                        method.name(),
                        mean,
                        rho
                    );
                }
            }
            write_output(&args.out, |w| {
                formats::write_rgap_csv(w, &study).map_err(Into::into)
            })
        }
        Command::Replay(args) => {
            let anchors = args.anchors.load()?;
            let text = fs::read_to_string(&args.log)
                .with_context(|| format!("reading {}", args.log.display()))?;
            let log = formats::parse_log_csv(&text, args.gap_threshold)?;
            if log.skipped_rows() > 0 {
                eprintln!("note: {} malformed rows skipped", log.skipped_rows());
            }
            if !log.gaps().is_empty() {
                eprintln!("note: {} sampling gaps marked", log.gaps().len());
            }
            let outcome = replay(
                &log,
                &anchors,
                args.methods,
                &args.gdm.config(),
                &LsmConfig::default(),
            )?;
            fs::create_dir_all(&args.out_dir)
                .with_context(|| format!("creating {}", args.out_dir.display()))?;
            for method in args.methods.iter() {
                let path = args.out_dir.join(format!("restored_{}.csv", method.name()));
                let mut file = fs::File::create(&path)
                    .with_context(|| format!("creating {}", path.display()))?;
                formats::write_replay_csv(&mut file, &outcome, method)?;
            }
            eprintln!(
                "failures: lsm {}, gdm {}, tplm {}",
                outcome.lsm_failures, outcome.gdm_failures, outcome.tplm_failures
            );
            Ok(())
        }
        Command::Geo(args) => {
            let transform = formats::parse_transform_csv(
                &fs::read_to_string(&args.transform)
                    .with_context(|| format!("reading {}", args.transform.display()))?,
            )?;
            let p = geo_to_local(&transform, args.lon, args.lat);
            println!("{:.6} {:.6}", p.x, p.y);
            Ok(())
        }
    }
}
