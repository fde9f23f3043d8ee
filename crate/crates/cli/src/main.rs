use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use patchvoronoi::mesh_io::{load_patched_surface, load_tet_mesh, load_weights, write_cell_complex, OutputFormat};
use patchvoronoi::pipeline::{run, OrganicFilter, ProductOutput, RunStats};
use patchvoronoi::{BackendPolicy, CellComplex, Error, MetricVariant, PipelineConfig, Product, VariantKind};

#[derive(Parser, Debug)]
#[command(name = "patchvoronoi", version, about = "Patch Voronoi diagrams, medial axes and offsets over tet meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Voronoi diagram of the surface patches restricted to the tet mesh.
    Voronoi(Common),
    /// Medial axis of the volume bounded by the surface.
    MedialAxis {
        #[command(flatten)]
        common: Common,
        /// Drop facets between patches meeting at a dihedral angle of at least this many degrees.
        #[arg(long, value_name = "DEG")]
        organic_dihedral: Option<f64>,
        /// Drop connected pieces with less total area [default: 1e-4 * diagonal^2].
        #[arg(long, value_name = "AREA")]
        organic_min_area: Option<f64>,
    },
    /// Inward and outward offset layers, written as <stem>.inward.<ext> and <stem>.outward.<ext>.
    Offset {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "D")]
        offset_distance: f64,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Triangle surface (OBJ); groups define patches unless --labels is given.
    #[arg(long)]
    surface: PathBuf,
    /// One patch id per triangle.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Tetrahedral mesh (.msh v2 or legacy .vtk).
    #[arg(long)]
    tets: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Output format [default: from the --out extension, else obj].
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Cut with exact rational arithmetic.
    #[arg(long, conflicts_with = "exact_fallback")]
    exact: bool,
    /// Cut in floating point and redo failing tets exactly.
    #[arg(long)]
    exact_fallback: bool,
    /// Classification tolerance of floating-point cuts.
    #[arg(long, default_value = "1e-9")]
    epsilon: f64,
    /// Upper bound of the distance axis [default: derived from the domain size].
    #[arg(long)]
    d_max: Option<f64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "PATCHVORONOI_THREADS", default_value_t = 0)]
    threads: usize,
    #[arg(long, value_enum, default_value_t = Variant::Vd)]
    variant: Variant,
    /// Lines of `patch_id weight`; unlisted patches get the neutral weight.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Keep duplicated vertices shared between tets.
    #[arg(long)]
    no_weld: bool,
    /// Comma-separated patch ids to ignore as generators.
    #[arg(long, value_delimiter = ',')]
    exclude_patches: Vec<usize>,
    /// Write run statistics as one JSON line.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Obj,
    Ply,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Variant {
    Vd,
    Pd,
    Awvd,
    Mwvd,
}

impl From<Variant> for VariantKind {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Vd => VariantKind::Vd,
            Variant::Pd => VariantKind::Pd,
            Variant::Awvd => VariantKind::Awvd,
            Variant::Mwvd => VariantKind::Mwvd,
        }
    }
}

enum Failure {
    Input(Error),
    Numerical(Error),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e}");
            eprintln!("hint: rerun with --exact (or --exact-fallback) to use exact arithmetic");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let (common, mut cfg) = match cli.command {
        Command::Voronoi(c) => (c, PipelineConfig::new(Product::Voronoi)),
        Command::MedialAxis { common, organic_dihedral, organic_min_area } => {
            let mut cfg = PipelineConfig::new(Product::MedialAxis);
            if organic_dihedral.is_some() || organic_min_area.is_some() {
                let default = OrganicFilter::default();
                cfg.organic_filter = Some(OrganicFilter {
                    dihedral_threshold: organic_dihedral.unwrap_or(default.dihedral_threshold),
                    min_facet_area: organic_min_area,
                });
            }
            (common, cfg)
        }
        Command::Offset { common, offset_distance } => {
            let mut cfg = PipelineConfig::new(Product::Offset);
            cfg.offset_distance = Some(offset_distance);
            (common, cfg)
        }
    };
    let input = Failure::Input;
    let start = Instant::now();

    let mut surface = load_patched_surface(&common.surface, common.labels.as_deref()).map_err(input)?;
    surface.exclude_patches(common.exclude_patches.iter().copied()).map_err(input)?;
    let tets = load_tet_mesh(&common.tets).map_err(input)?;
    eprintln!(
        "stage=load patches={} triangles={} tets={} seconds={:.3}",
        surface.patch_count(),
        surface.triangles.len(),
        tets.len(),
        start.elapsed().as_secs_f64()
    );

    let kind = VariantKind::from(common.variant);
    let weights = match &common.weights {
        Some(path) => load_weights(path, surface.patch_count())
            .map_err(input)?
            .into_iter()
            .map(|w| w.unwrap_or(kind.neutral_weight()))
            .collect(),
        None => Vec::new(),
    };
    cfg.variant = MetricVariant::new(kind, weights);
    cfg.epsilon = common.epsilon;
    cfg.d_max = common.d_max;
    cfg.threads = common.threads;
    cfg.weld = !common.no_weld;
    cfg.backend = if common.exact {
        BackendPolicy::Exact
    } else if common.exact_fallback {
        BackendPolicy::FloatWithExactFallback
    } else {
        BackendPolicy::Float
    };
    cfg.validate().map_err(input)?;

    let result = run(&surface, &tets, &cfg).map_err(|e| {
        if e.is_numerical() && cfg.backend == BackendPolicy::Float {
            Failure::Numerical(e)
        } else {
            Failure::Input(e)
        }
    })?;
    report_progress(&result.stats);

    let format = common
        .format
        .map(|f| match f {
            Format::Obj => OutputFormat::Obj,
            Format::Ply => OutputFormat::Ply,
        })
        .or_else(|| OutputFormat::from_path(&common.out))
        .unwrap_or(OutputFormat::Obj);
    match &result.output {
        ProductOutput::Complex(cc) => write(cc, &common.out, format)?,
        ProductOutput::Offset(o) => {
            write(&o.inward, &layer_path(&common.out, "inward", format), format)?;
            write(&o.outward, &layer_path(&common.out, "outward", format), format)?;
        }
    }
    if let Some(path) = &common.stats {
        write_stats(&result.stats, path).map_err(input)?;
    }
    eprintln!("stage=done seconds={:.3}", start.elapsed().as_secs_f64());
    Ok(())
}

fn report_progress(stats: &RunStats) {
    let s = &stats.seconds;
    eprintln!("stage=setup threads={} seconds={:.3}", stats.threads, s.setup);
    eprintln!(
        "stage=propagation tets={} active_tets={} cuts={} exact_fallbacks={} seconds={:.3}",
        stats.tets, stats.active_tets, stats.cuts, stats.exact_fallbacks, s.propagation
    );
    eprintln!("stage=assembly seconds={:.3}", s.assembly);
    eprintln!("stage=filter facets={} seconds={:.3}", stats.facets, s.filter);
}

fn write(cc: &CellComplex, path: &Path, format: OutputFormat) -> Result<(), Failure> {
    write_cell_complex(cc, path, format).map_err(Failure::Input)?;
    eprintln!("stage=write path={} facets={}", path.display(), cc.len());
    Ok(())
}

fn layer_path(out: &Path, layer: &str, format: OutputFormat) -> PathBuf {
    let ext = out.extension().and_then(|e| e.to_str()).map(str::to_owned).unwrap_or_else(|| match format {
        OutputFormat::Obj => "obj".into(),
        OutputFormat::Ply => "ply".into(),
    });
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("offset");
    out.with_file_name(format!("{stem}.{layer}.{ext}"))
}

fn write_stats(stats: &RunStats, path: &Path) -> patchvoronoi::Result<()> {
    let io = |e| Error::Io { path: path.to_owned(), source: e };
    let line = serde_json::to_string(stats).map_err(|e| Error::Validation(format!("cannot encode stats: {e}")))?;
    let mut f = File::create(path).map_err(io)?;
    writeln!(f, "{line}").map_err(io)
}
