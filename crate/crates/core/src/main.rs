use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vortex_barcode::barcode::{read_barcode, shrink, BarcodeError, BarcodeFormat, ShrinkPlan};
use vortex_barcode::bench::bench_complexity;
use vortex_barcode::frame_ingest::{list_frames, load_frame, IngestError, ThresholdMethod};
use vortex_barcode::pipeline::{
    analyze_frame, apply_shrink, frame_overlay, run_pipeline, FrameStatus, MncPolicy, PipelineConfig, PipelineError,
};
use vortex_barcode::render::RenderStyle;

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_NO_NERVE: u8 = 3;

#[derive(Parser)]
#[command(name = "vortex-barcode", version, about = "Betti-number barcodes of vortex nerves in video frames")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline over a frame directory.
    Barcode(BarcodeArgs),
    /// Analyse a single frame and write its overlay SVG and report.
    Frame(FrameArgs),
    /// Copy the frames retained by a shrink plan.
    Shrink(ShrinkArgs),
    /// Measure runtime scaling on random point sets.
    Bench(BenchArgs),
}

#[derive(Args)]
struct AnalysisOpts {
    /// `otsu` or a fixed threshold in 0..=255.
    #[arg(long)]
    threshold: Option<ThresholdMethod>,
    #[arg(long)]
    min_hole_area: Option<usize>,
    #[arg(long)]
    max_rings: Option<usize>,
    /// `all` or `first`.
    #[arg(long)]
    mnc_policy: Option<String>,
}

#[derive(Args)]
struct BarcodeArgs {
    /// key=value file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    frames: Option<PathBuf>,
    #[arg(long)]
    pattern: Option<String>,
    #[command(flatten)]
    analysis: AnalysisOpts,
    /// Betti value to keep when writing plan.txt.
    #[arg(long)]
    betti: Option<usize>,
    #[arg(long)]
    min_run: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    render_barcode: bool,
    #[arg(long)]
    render_frames: bool,
}

#[derive(Args)]
struct FrameArgs {
    /// Image file to analyse.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    analysis: AnalysisOpts,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ShrinkArgs {
    #[arg(long)]
    frames: PathBuf,
    #[arg(long, default_value = vortex_barcode::pipeline::DEFAULT_PATTERN)]
    pattern: String,
    /// plan.txt written by `barcode --betti`.
    #[arg(long, conflicts_with = "barcode")]
    plan: Option<PathBuf>,
    /// barcode.csv or barcode.json to build the plan from.
    #[arg(long, requires = "betti")]
    barcode: Option<PathBuf>,
    #[arg(long)]
    betti: Option<usize>,
    #[arg(long, default_value_t = vortex_barcode::barcode::DEFAULT_MIN_RUN)]
    min_run: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Point counts, ascending.
    #[arg(long = "n", value_delimiter = ',', default_values_t = [200usize, 400, 800, 1600, 3200])]
    n_values: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    m_target: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = match &e {
            PipelineError::Config(_) => EXIT_USAGE,
            PipelineError::Ingest(IngestError::BadPattern { .. } | IngestError::BadThreshold(_)) => EXIT_USAGE,
            _ => EXIT_IO,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<BarcodeError> for Failure {
    fn from(e: BarcodeError) -> Self {
        Failure::io(e.to_string())
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        PipelineError::from(e).into()
    }
}

fn apply_analysis(cfg: &mut PipelineConfig, opts: &AnalysisOpts) -> Result<(), PipelineError> {
    if let Some(t) = opts.threshold {
        cfg.threshold = t;
    }
    if let Some(a) = opts.min_hole_area {
        cfg.min_hole_area = a;
    }
    if let Some(r) = opts.max_rings {
        cfg.max_rings = r;
    }
    if let Some(p) = &opts.mnc_policy {
        cfg.mnc_policy = p.parse::<MncPolicy>()?;
    }
    Ok(())
}

fn base_config(config: Option<&Path>) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = config {
        cfg.apply_config_file(path)?;
    }
    Ok(cfg)
}

fn cmd_barcode(args: BarcodeArgs) -> Result<(), Failure> {
    let mut cfg = base_config(args.config.as_deref())?;
    if let Some(f) = args.frames {
        cfg.frames_dir = f;
    }
    if let Some(p) = args.pattern {
        cfg.pattern = p;
    }
    apply_analysis(&mut cfg, &args.analysis)?;
    if args.betti.is_some() {
        cfg.betti_target = args.betti;
    }
    if let Some(r) = args.min_run {
        cfg.min_run = r;
    }
    if let Some(o) = args.out {
        cfg.out_dir = o;
    }
    cfg.render_barcode |= args.render_barcode;
    cfg.render_frames |= args.render_frames;

    let run = run_pipeline(&cfg)?;
    let ok = run.reports.iter().filter(|r| r.status == FrameStatus::Ok).count();
    println!(
        "{} frames, {} with a vortex nerve, Betti values {:?}; output in {}",
        run.reports.len(),
        ok,
        run.barcode.betti_domain(),
        cfg.out_dir.display()
    );
    if let Some(plan) = &run.plan {
        println!(
            "shrink plan: {} frames retained for Betti {}",
            plan.retained_frames.len(),
            plan.target_betti
        );
    }
    if !run.any_nerve() {
        return Err(Failure {
            code: EXIT_NO_NERVE,
            message: "no frame produced a vortex nerve".into(),
        });
    }
    Ok(())
}

fn cmd_frame(args: FrameArgs) -> Result<(), Failure> {
    let mut cfg = base_config(args.config.as_deref())?;
    apply_analysis(&mut cfg, &args.analysis)?;
    if cfg.max_rings == 0 {
        return Err(Failure::usage("max_rings must be at least 1"));
    }
    let frame = load_frame(&args.input, 0)?;
    let analysis = analyze_frame(&frame, &cfg);
    std::fs::create_dir_all(&args.out).map_err(|e| Failure::io(format!("{}: {e}", args.out.display())))?;
    let svg_path = args.out.join("overlay.svg");
    std::fs::write(&svg_path, frame_overlay(&analysis, &RenderStyle::default()))
        .map_err(|e| Failure::io(format!("{}: {e}", svg_path.display())))?;
    let report = serde_json::to_string_pretty(&analysis.report).expect("report serializes");
    let report_path = args.out.join("report.json");
    std::fs::write(&report_path, &report).map_err(|e| Failure::io(format!("{}: {e}", report_path.display())))?;
    println!("{report}");
    if analysis.report.betti.is_empty() {
        return Err(Failure {
            code: EXIT_NO_NERVE,
            message: format!(
                "no vortex nerve: {}",
                analysis.report.detail.as_deref().unwrap_or("unknown reason")
            ),
        });
    }
    Ok(())
}

fn cmd_shrink(args: ShrinkArgs) -> Result<(), Failure> {
    let plan = match (&args.plan, &args.barcode, args.betti) {
        (Some(path), _, _) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
            ShrinkPlan::from_text(&text, args.betti.unwrap_or(0), args.min_run)?
        }
        (None, Some(path), Some(betti)) => {
            let format = match path.extension().and_then(|e| e.to_str()) {
                Some("json") => BarcodeFormat::Json,
                _ => BarcodeFormat::Csv,
            };
            let bc = read_barcode(path, format)?;
            shrink(&bc, betti, args.min_run)
        }
        _ => return Err(Failure::usage("shrink needs --plan, or --barcode together with --betti")),
    };
    let frames = list_frames(&args.frames, &args.pattern)?;
    let copied = apply_shrink(&frames, &plan, &args.out)?;
    println!("copied {} of {} frames to {}", copied.len(), frames.len(), args.out.display());
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    let report = bench_complexity(&args.n_values, args.m_target, args.seed, args.repeats)
        .map_err(|e| Failure::usage(e.to_string()))?;
    std::fs::create_dir_all(&args.out).map_err(|e| Failure::io(format!("{}: {e}", args.out.display())))?;
    let path = args.out.join("timings.csv");
    report
        .write_csv(&path)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    print!("{}", report.to_csv());
    println!("{}", report.summary());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Barcode(a) => cmd_barcode(a),
        Command::Frame(a) => cmd_frame(a),
        Command::Shrink(a) => cmd_shrink(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
