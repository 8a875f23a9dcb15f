//! `emospot` command-line tool.
//!
//! Exit codes: 0 success, 1 fatal error, 2 usage error.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use emospot::emerging::emerging_analysis;
use emospot::io::config::{GridSection, TimeSection};
use emospot::io::export::{write_emerging, write_spatial};
use emospot::io::{
    parse_config, parse_points, read_cube, synth_generate, write_cube, PointFormat, RawConfig, RunConfig, ScenarioSpec,
};
use emospot::{build_cube, fdr_correct, gi_star, local_ratio_series, ratio_field, BBox, RegionQuery, SpaceTimeCube};

const THREADS_ENV: &str = "EMOSPOT_THREADS";

#[derive(Parser)]
#[command(
    name = "emospot",
    version,
    about = "Spatial and emerging hotspot detection for labeled geotagged points"
)]
struct Cli {
    /// TOML run configuration; command-line flags override it.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bin points into a space-time cube file.
    Bin(BinArgs),
    /// Gi* hot/cold spots of one label as GeoJSON.
    Spatial(SpatialArgs),
    /// Emerging hotspot patterns per label as GeoJSON.
    Emerging(EmergingArgs),
    /// Yearly label ratio inside a box, as CSV.
    Local(LocalArgs),
    /// Generate a synthetic point CSV from a scenario file.
    Synth(SynthArgs),
}

#[derive(Args)]
struct BinArgs {
    /// Point file (CSV or GeoJSON); `-` reads standard input.
    #[arg(short, long)]
    input: String,
    /// Input format; guessed from the file extension when omitted.
    #[arg(long)]
    format: Option<PointFormat>,
    #[arg(short, long)]
    output: PathBuf,
    /// lon_min,lat_min,lon_max,lat_max
    #[arg(long, value_parser = parse_bbox, allow_hyphen_values = true)]
    bbox: Option<BBox>,
    #[arg(long)]
    nx: Option<u32>,
    #[arg(long)]
    ny: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    year_start: Option<i32>,
    #[arg(long)]
    year_count: Option<u16>,
    /// Comma-separated label names.
    #[arg(long, value_delimiter = ',')]
    vocab: Option<Vec<String>>,
}

#[derive(Args)]
struct StatArgs {
    #[arg(long)]
    alpha: Option<f64>,
    /// Benjamini-Hochberg correction of per-bin p-values.
    #[arg(long)]
    fdr: bool,
    /// band, knn or contiguity.
    #[arg(long)]
    scheme: Option<String>,
    /// Neighborhood radius in bins (band, contiguity).
    #[arg(long)]
    radius: Option<f64>,
    /// Neighbor count including the bin itself (knn).
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct SpatialArgs {
    #[arg(long)]
    cube: PathBuf,
    #[arg(long)]
    emotion: String,
    /// Calendar year; all years pooled when omitted.
    #[arg(long)]
    year: Option<i32>,
    #[command(flatten)]
    stats: StatArgs,
    /// Output GeoJSON; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EmergingArgs {
    #[arg(long)]
    cube: PathBuf,
    /// Single label; every label when omitted.
    #[arg(long)]
    emotion: Option<String>,
    #[command(flatten)]
    stats: StatArgs,
    #[arg(long)]
    min_years: Option<usize>,
    /// Also write bins with no detected pattern.
    #[arg(long)]
    include_no_pattern: bool,
    /// Output file with --emotion, otherwise a directory receiving
    /// `<label>.geojson` per label.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct LocalArgs {
    #[arg(long)]
    cube: PathBuf,
    /// lon_min,lat_min,lon_max,lat_max
    #[arg(long, value_parser = parse_bbox, allow_hyphen_values = true)]
    bbox: BBox,
    #[arg(long)]
    emotion: String,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Scenario TOML.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Ground-truth manifest; defaults to `<output>.manifest.json`.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

fn parse_bbox(raw: &str) -> Result<BBox, String> {
    let parts: Vec<f64> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, c, d] => BBox::new(a, b, c, d).map_err(|e| e.to_string()),
        _ => Err("expected lon_min,lat_min,lon_max,lat_max".into()),
    }
}

fn load_config(path: Option<&Path>) -> Result<RawConfig> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_config(&text).with_context(|| format!("in {}", p.display()))
        }
        None => Ok(RawConfig::default()),
    }
}

impl StatArgs {
    fn apply(&self, raw: &mut RawConfig) {
        if let Some(a) = self.alpha {
            raw.alpha = a;
        }
        if self.fdr {
            raw.fdr = true;
        }
        if let Some(s) = &self.scheme {
            raw.weights.scheme = s.clone();
        }
        if let Some(r) = self.radius {
            raw.weights.radius = r;
        }
        if let Some(k) = self.k {
            raw.weights.k = k;
        }
    }
}

fn output_writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run_bin(args: &BinArgs, mut raw: RawConfig) -> Result<()> {
    if let Some(b) = args.bbox {
        let g = raw.grid.get_or_insert(GridSection {
            bbox: b.as_array(),
            nx: 1000,
            ny: 1000,
        });
        g.bbox = b.as_array();
    }
    if let Some(g) = raw.grid.as_mut() {
        g.nx = args.nx.unwrap_or(g.nx);
        g.ny = args.ny.unwrap_or(g.ny);
    } else if args.nx.is_some() || args.ny.is_some() {
        bail!("--nx/--ny need a bounding box (--bbox or [grid] in the config)");
    }
    match (args.year_start, args.year_count, raw.time.as_mut()) {
        (s, c, Some(t)) => {
            t.year_start = s.unwrap_or(t.year_start);
            t.year_count = c.unwrap_or(t.year_count);
        }
        (Some(year_start), Some(year_count), None) => raw.time = Some(TimeSection { year_start, year_count }),
        (None, None, None) => {}
        _ => bail!("set both --year-start and --year-count, or a [time] section"),
    }
    if let Some(v) = &args.vocab {
        raw.vocab = v.clone();
    }
    let cfg = raw.resolve()?;
    let grid = cfg.require_grid()?;
    let time = cfg.require_time()?;

    let format = match args.format {
        Some(f) => f,
        None if args.input.ends_with(".geojson") || args.input.ends_with(".json") => PointFormat::GeoJson,
        None => PointFormat::Csv,
    };
    let reader: Box<dyn Read> = if args.input == "-" {
        Box::new(io::stdin().lock())
    } else {
        Box::new(BufReader::new(
            File::open(&args.input).with_context(|| format!("opening {}", args.input))?,
        ))
    };
    let (points, parsed) = parse_points(reader, format, &cfg.vocab)?;
    let (cube, built) = build_cube(&points, grid, time, cfg.vocab.clone())?;
    write_cube(&cube, &args.output)?;
    let report = parsed.then(built);
    eprintln!(
        "accepted {} of {} records (out_of_bbox {}, out_of_time {}, malformed {}); {} occupied cells",
        report.accepted,
        report.total(),
        report.out_of_bbox,
        report.out_of_time,
        report.malformed,
        cube.cell_count()
    );
    Ok(())
}

fn analysis_config(stats: &StatArgs, mut raw: RawConfig, min_years: Option<usize>) -> Result<RunConfig> {
    stats.apply(&mut raw);
    if let Some(m) = min_years {
        raw.min_years = m;
    }
    Ok(raw.resolve()?)
}

fn run_spatial(args: &SpatialArgs, raw: RawConfig) -> Result<()> {
    let cfg = analysis_config(&args.stats, raw, None)?;
    let cube = read_cube(&args.cube)?;
    let label = cube.vocab().require(&args.emotion)?;
    let year = args
        .year
        .map(|y| {
            cube.time()
                .index_of_year(y)
                .ok_or_else(|| anyhow!("year {y} is outside the cube's time axis"))
        })
        .transpose()?;
    let field = ratio_field(&cube, label, year)?;
    let gi = gi_star(&field, &cfg.weights, cfg.alpha)?;
    if gi.degenerate {
        eprintln!("warning: every occupied bin has the same ratio; all z-scores are 0");
    }
    let results = if cfg.fdr {
        fdr_correct(&gi.results, cfg.alpha)
    } else {
        gi.results
    };
    write_spatial(
        output_writer(args.output.as_deref())?,
        &results,
        cube.grid(),
        &args.emotion,
    )?;
    Ok(())
}

fn emerging_one(
    cube: &SpaceTimeCube,
    cfg: &RunConfig,
    name: &str,
    include_no_pattern: bool,
    path: &Path,
) -> Result<()> {
    let label = cube.vocab().require(name)?;
    let outcomes = emerging_analysis(cube, label, &cfg.emerging())?;
    write_emerging(
        output_writer(Some(path))?,
        &outcomes,
        cube.grid(),
        name,
        include_no_pattern,
    )?;
    Ok(())
}

fn run_emerging(args: &EmergingArgs, raw: RawConfig) -> Result<()> {
    let cfg = analysis_config(&args.stats, raw, args.min_years)?;
    let cube = read_cube(&args.cube)?;
    match &args.emotion {
        Some(name) => emerging_one(&cube, &cfg, name, args.include_no_pattern, &args.output),
        None => {
            fs::create_dir_all(&args.output).with_context(|| format!("creating {}", args.output.display()))?;
            for name in cube.vocab().names() {
                let path = args.output.join(format!("{name}.geojson"));
                emerging_one(&cube, &cfg, name, args.include_no_pattern, &path)?;
            }
            Ok(())
        }
    }
}

fn run_local(args: &LocalArgs) -> Result<()> {
    let cube = read_cube(&args.cube)?;
    let label = cube.vocab().require(&args.emotion)?;
    let series = local_ratio_series(&cube, &RegionQuery { bbox: args.bbox, label })?;
    let mut out = output_writer(args.output.as_deref())?;
    writeln!(out, "year,ratio,label_count,total")?;
    for k in 0..series.years.len() {
        let ratio = series.ratios[k].map(|r| r.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{ratio},{},{}",
            series.years[k], series.hits[k], series.denominators[k]
        )?;
    }
    out.flush()?;
    Ok(())
}

fn run_synth(args: &SynthArgs) -> Result<()> {
    let text = fs::read_to_string(&args.spec).with_context(|| format!("reading {}", args.spec.display()))?;
    let spec = ScenarioSpec::from_toml(&text)?;
    let out = synth_generate(&spec, args.seed)?;
    out.write_csv(output_writer(args.output.as_deref())?)?;
    let manifest = args.manifest.clone().or_else(|| {
        args.output.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    if let Some(path) = manifest {
        out.write_manifest(output_writer(Some(&path))?)?;
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .parse()
            .map_err(|_| anyhow!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    let raw = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Bin(a) => run_bin(a, raw),
        Command::Spatial(a) => run_spatial(a, raw),
        Command::Emerging(a) => run_emerging(a, raw),
        Command::Local(a) => run_local(a),
        Command::Synth(a) => run_synth(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
