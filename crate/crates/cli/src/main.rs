use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use skelink_core::cli::{
    self, to_json, AnalyzeArgs, BoundingArgs, BoundingKind, GraphArgs, OracleArgs, RenderArgs, Renormalize,
    WeightsArgs,
};
use skelink_core::oracle::OracleParams;
use skelink_core::par::{configure_threads_from_env, Parallelism};
use skelink_core::pipeline::PipelineParams;
use skelink_core::proximity_graph::Variant;
use skelink_core::Error;

#[derive(Parser)]
#[command(name = "skelink", version, about = "Skeletal linking analysis of planar object configurations")]
struct Cli {
    /// Run every stage on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write a report.
    Analyze(AnalyzeCmd),
    /// Perron weights of a closeness matrix or report.
    Weights(WeightsCmd),
    /// Threshold the tiered graph of a report.
    Graph(GraphCmd),
    /// Draw SVG figures from a serialized structure or report.
    Render(RenderCmd),
    /// Brute-force grid volumes for cross-checking.
    Oracle(OracleCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Box,
    Hull,
    Threshold,
}

#[derive(Args)]
struct Bounding {
    /// Override the bounding region of the input.
    #[arg(long, value_enum)]
    bounding: Option<Kind>,
    /// Box corners x0,y0,x1,y1.
    #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true)]
    corners: Option<Vec<f64>>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
}

impl Bounding {
    fn args(&self) -> BoundingArgs {
        BoundingArgs {
            kind: self.bounding.map(|k| match k {
                Kind::Box => BoundingKind::Box,
                Kind::Hull => BoundingKind::Hull,
                Kind::Threshold => BoundingKind::Threshold,
            }),
            corners: self.corners.clone(),
            margin: self.margin,
            tau: self.tau,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    /// Product closeness c_ij.
    C,
    /// Additive closeness.
    Ca,
}

#[derive(Args)]
struct AnalyzeCmd {
    config: PathBuf,
    #[command(flatten)]
    bounding: Bounding,
    /// Boundary samples per object.
    #[arg(long, default_value_t = 512)]
    samples: usize,
    /// Corner and pruning angle in radians.
    #[arg(long, default_value_t = 0.15)]
    theta_min: f64,
    /// Angular step of corner fans in radians.
    #[arg(long)]
    fan_step: Option<f64>,
    #[arg(long)]
    tangency_tolerance: Option<f64>,
    #[arg(long, value_enum, default_value = "c")]
    variant: VariantArg,
    /// Also run the grid oracle at this resolution.
    #[arg(long)]
    oracle_resolution: Option<usize>,
    /// Report path; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Human-readable report path.
    #[arg(long)]
    text: Option<PathBuf>,
    /// Serialized linking structure path, for `render`.
    #[arg(long)]
    structure: Option<PathBuf>,
}

#[derive(Args)]
struct WeightsCmd {
    input: PathBuf,
    /// Object weights V for the renormalized vector.
    #[arg(long, value_delimiter = ',')]
    v: Option<Vec<f64>>,
    /// Renormalize with the v_vol or v_lk vector stored in the input.
    #[arg(long, value_enum)]
    renormalize: Option<RenormArg>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenormArg {
    Vol,
    Lk,
}

#[derive(Args)]
struct GraphCmd {
    input: PathBuf,
    #[arg(long)]
    edge_threshold: Option<f64>,
    #[arg(long)]
    vertex_threshold: Option<f64>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RenderCmd {
    input: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct OracleCmd {
    config: PathBuf,
    #[command(flatten)]
    bounding: Bounding,
    #[arg(long, default_value_t = 1024)]
    resolution: usize,
    #[arg(long, default_value_t = 0.15)]
    theta_min: f64,
    /// Label every cell instead of filling agreeing blocks.
    #[arg(long)]
    exhaustive: bool,
    /// Label raster (binary PGM) path.
    #[arg(long)]
    raster: Option<PathBuf>,
    /// Raster legend (JSON) path.
    #[arg(long)]
    legend: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Compare against the skeletal table of this report.
    #[arg(long)]
    diff: Option<PathBuf>,
    /// Add a seeded Monte-Carlo estimate with this many points.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let mode = if cli.sequential { Parallelism::Sequential } else { Parallelism::Auto };
    match cli.command {
        Command::Analyze(c) => {
            let mut pipeline = PipelineParams::with_samples(c.samples);
            pipeline.skeleton.theta_min = c.theta_min;
            if let Some(s) = c.fan_step {
                pipeline.skeleton.fan_step = s;
            }
            pipeline.tangency_tolerance = c.tangency_tolerance;
            if cli.sequential {
                pipeline = pipeline.sequential();
            }
            let args = AnalyzeArgs {
                config: c.config,
                bounding: c.bounding.args(),
                pipeline,
                variant: match c.variant {
                    VariantArg::C => Variant::C,
                    VariantArg::Ca => Variant::Ca,
                },
                oracle_resolution: c.oracle_resolution,
                output: c.output.clone(),
                text_output: c.text,
                structure: c.structure,
            };
            let out = cli::cmd_analyze(&args)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            if c.output.is_none() {
                print!("{}", to_json(&out.report));
            }
            if let Some(e) = out.hypothesis {
                eprintln!("error [{}]: {e}", e.module());
                return Ok(ExitCode::from(e.exit_code() as u8));
            }
        }
        Command::Weights(c) => {
            let out = cli::cmd_weights(&WeightsArgs {
                input: c.input,
                v: c.v,
                renormalize: c.renormalize.map(|r| match r {
                    RenormArg::Vol => Renormalize::Vol,
                    RenormArg::Lk => Renormalize::Lk,
                }),
            })?;
            print!("{}", if c.json { to_json(&out) } else { out.text() });
        }
        Command::Graph(c) => {
            let out = cli::cmd_graph(&GraphArgs {
                input: c.input,
                edge_threshold: c.edge_threshold,
                vertex_threshold: c.vertex_threshold,
                svg: c.svg,
            })?;
            print!("{}", if c.json { to_json(&out) } else { out.text() });
        }
        Command::Render(c) => {
            let out = cli::cmd_render(&RenderArgs { input: c.input, out_dir: c.out_dir })?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            for f in &out.files {
                println!("{}", f.display());
            }
        }
        Command::Oracle(c) => {
            let mut params = OracleParams { theta_min: c.theta_min, parallelism: mode, ..Default::default() };
            if c.exhaustive {
                params = params.exhaustive();
            }
            let args = OracleArgs {
                config: c.config,
                bounding: c.bounding.args(),
                resolution: c.resolution,
                params,
                raster: c.raster,
                legend: c.legend,
                output: c.output.clone(),
                diff: c.diff,
                samples: c.samples,
                seed: c.seed,
            };
            let (out, _) = cli::cmd_oracle(&args)?;
            if c.output.is_none() {
                print!("{}", to_json(&out));
            }
            if let Some(d) = &out.diff {
                eprintln!("max relative disagreement: {:.4}%", d.max_relative * 100.0);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads_from_env();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.module());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
