use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use msiq_core::harness::{
    run_ablation, run_benchmark_dir, run_controlled_sr, run_exp1, run_exp2, verify_sanity, ExperimentReport,
    HarnessConfig,
};
use msiq_core::moments::descriptor;
use msiq_core::msiq::{msiq_rmse, msiq_weighted};
use msiq_core::testset::{load_directory, standard_set_sized, NamedImage, DEFAULT_SIZE};
use msiq_core::transforms::{degrade_with, DegradeConfig};
use msiq_core::vectors::TestVectors;
use msiq_core::{
    load_image, psnr, save_image, ssim, DegradationKind, DegradationSpec, MomentScheme, MomentWeights, MsiqError,
    PsnrValue, ResizeMethod, VariantChoice,
};

const SIZE_MISMATCH: &str = "n/a (size mismatch; MSIQ is resizing-free)";

/// Moment-based scale-invariant image quality.
#[derive(Parser)]
#[command(name = "msiq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a test image against a reference. MSIQ works across sizes;
    /// PSNR and SSIM are reported only when the sizes match.
    Compute {
        reference: PathBuf,
        test: PathBuf,
        #[command(flatten)]
        moments: MomentArgs,
    },
    /// Print the moment descriptor of an image as JSON.
    Descriptor {
        image: PathBuf,
        #[command(flatten)]
        moments: MomentArgs,
    },
    /// Apply one degradation and write the result (.png or .pgm).
    Degrade {
        input: PathBuf,
        /// anisotropic, shear, rotation, perspective or jpeg
        #[arg(long)]
        kind: DegradationKind,
        /// Strength in [0, 1).
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        warp: WarpArgs,
    },
    /// Run an experiment, write CSV/JSON reports, and print a summary.
    Experiment(ExperimentArgs),
    /// Export or verify the shared test-vector file.
    Vectors {
        #[command(subcommand)]
        action: VectorAction,
    },
}

#[derive(Args)]
struct MomentArgs {
    /// Maximum moment order N.
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// raw, pixel_center_delta or pixel_integrated_constant
    #[arg(long, default_value = "raw")]
    scheme: MomentScheme,
    /// rmse, weighted or both
    #[arg(long, default_value = "both")]
    variant: VariantChoice,
}

#[derive(Args)]
struct WarpArgs {
    /// Rotation angle in radians per unit lambda.
    #[arg(long, default_value_t = 1.0)]
    rotation_per_lambda: f64,
    /// Intensity for warp samples outside the source image.
    #[arg(long, default_value_t = 0.0)]
    border_fill: f64,
}

impl WarpArgs {
    fn config(&self) -> DegradeConfig {
        DegradeConfig {
            rotation_radians_per_lambda: self.rotation_per_lambda,
            border_fill: self.border_fill,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentName {
    Exp1,
    Exp2,
    Controlled,
    Benchmark,
    Ablation,
    Sanity,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Args)]
struct ExperimentArgs {
    name: ExperimentName,
    /// Directory of PNG/JPEG/PGM images; defaults to the generated standard set.
    #[arg(long)]
    images: Option<PathBuf>,
    /// Height of the generated standard images.
    #[arg(long, default_value_t = DEFAULT_SIZE)]
    size: usize,
    #[command(flatten)]
    moments: MomentArgs,
    /// Comma-separated degradation strengths; 0 is always included.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// Comma-separated scale factors (rescaling for exp1, super-resolution factors otherwise).
    #[arg(long, value_delimiter = ',')]
    scales: Option<Vec<f64>>,
    /// Comma-separated interpolators (rescaling methods for exp1, super-resolution methods otherwise).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<ResizeMethod>>,
    /// Comma-separated moment orders for the ablation.
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    /// Output directory for the report files.
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    warp: WarpArgs,
}

#[derive(Subcommand)]
enum VectorAction {
    /// Write freshly computed vectors.
    Export {
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute a vector file and report mismatches.
    Verify { path: PathBuf },
}

fn exit_code(e: &MsiqError) -> u8 {
    match e {
        MsiqError::Io { .. } | MsiqError::Decode { .. } => 2,
        MsiqError::DegenerateImage { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            if !e.render().to_string().contains("Usage:") {
                eprintln!("\n{}", usage_for(std::env::args().nth(1)));
            }
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Usage line of the named subcommand, or of the whole tool.
fn usage_for(subcommand: Option<String>) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    match subcommand.and_then(|name| cmd.find_subcommand_mut(&name).cloned()) {
        Some(mut sub) => sub.render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

fn run(command: Command) -> Result<ExitCode, MsiqError> {
    match command {
        Command::Compute { reference, test, moments } => compute(&reference, &test, &moments),
        Command::Descriptor { image, moments } => {
            let img = load_image(&image)?;
            println!("{}", descriptor(&img, moments.order, moments.scheme)?.to_json());
            Ok(ExitCode::SUCCESS)
        }
        Command::Degrade {
            input,
            kind,
            lambda,
            out,
            warp,
        } => {
            let cfg = warp.config();
            print_warp_config(&cfg);
            println!("  degradation: {kind} lambda={lambda}");
            let spec = DegradationSpec::new(kind, lambda)?;
            let img = load_image(&input)?;
            save_image(&degrade_with(&img, spec, &cfg)?, &out)?;
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment(args) => experiment(&args),
        Command::Vectors { action } => vectors(action),
    }
}

fn print_warp_config(cfg: &DegradeConfig) {
    println!("config:");
    println!("  rotation: theta = {} rad per unit lambda", cfg.rotation_radians_per_lambda);
    println!(
        "  border: warps fill with {}; resizing replicates edge pixels",
        cfg.border_fill
    );
    println!("  jpeg: q = max(1, round(100 - 80 lambda)), 8-bit grayscale baseline");
}

fn compute(reference: &Path, test: &Path, args: &MomentArgs) -> Result<ExitCode, MsiqError> {
    println!("config:");
    println!("  order: {}", args.order);
    println!("  scheme: {}", args.scheme);
    println!("  variant: {}", args.variant);
    println!("  weights: w_pq = 1/(1+p+q)");
    let a = load_image(reference)?;
    let b = load_image(test)?;
    let da = descriptor(&a, args.order, args.scheme)?;
    let db = descriptor(&b, args.order, args.scheme)?;
    if matches!(args.variant, VariantChoice::Rmse | VariantChoice::Both) {
        println!("msiq_rmse: {:e}", msiq_rmse(&da, &db)?);
    }
    if matches!(args.variant, VariantChoice::Weighted | VariantChoice::Both) {
        println!("msiq_w: {:e}", msiq_weighted(&da, &db, &MomentWeights::InverseOrder)?);
    }
    if a.dims() != b.dims() {
        println!("psnr: {SIZE_MISMATCH}");
        println!("ssim: {SIZE_MISMATCH}");
    } else {
        match psnr(&a, &b)? {
            PsnrValue::Infinite => println!("psnr: inf"),
            PsnrValue::Finite(db) => println!("psnr: {db:.6} dB"),
        }
        match ssim(&a, &b) {
            Ok(v) => println!("ssim: {v:.8}"),
            Err(MsiqError::Parameter(msg)) => println!("ssim: n/a ({msg})"),
            Err(e) => return Err(e),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn harness_config(args: &ExperimentArgs) -> HarnessConfig {
    let mut cfg = HarnessConfig {
        order: args.moments.order,
        scheme: args.moments.scheme,
        variants: args.moments.variant,
        degrade: args.warp.config(),
        jobs: args.jobs,
        ..HarnessConfig::default()
    };
    if let Some(l) = &args.lambdas {
        cfg.lambdas = l.clone();
    }
    if let Some(o) = &args.orders {
        cfg.ablation_orders = o.clone();
    }
    let sr = matches!(args.name, ExperimentName::Controlled | ExperimentName::Benchmark);
    if let Some(s) = &args.scales {
        if sr {
            cfg.sr_scales = s.clone();
        } else {
            cfg.scales = s.clone();
        }
    }
    if let Some(m) = &args.methods {
        if sr {
            cfg.sr_methods = m.clone();
        } else {
            cfg.interpolators = m.clone();
        }
    }
    cfg
}

fn print_harness_config(cfg: &HarnessConfig, images: &str) {
    let list = |xs: &[f64]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
    let names = |ms: &[ResizeMethod]| ms.iter().map(|m| m.name()).collect::<Vec<_>>().join(", ");
    println!("config:");
    println!("  images: {images}");
    println!("  order: {}", cfg.order);
    println!("  scheme: {}", cfg.scheme);
    println!("  variant: {}", cfg.variants);
    println!("  weights: w_pq = 1/(1+p+q)");
    println!("  lambdas: {}", list(&cfg.lambda_grid()));
    println!("  scales: {}", list(&cfg.scales));
    println!("  interpolators: {}", names(&cfg.interpolators));
    println!("  return methods: {}", names(&cfg.return_methods));
    println!("  sr methods: {}", names(&cfg.sr_methods));
    println!("  sr scales: {}", list(&cfg.sr_scales));
    println!(
        "  ablation orders: {}",
        cfg.ablation_orders.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ")
    );
    println!(
        "  rotation: theta = {} rad per unit lambda",
        cfg.degrade.rotation_radians_per_lambda
    );
    println!(
        "  border: warps fill with {}; resizing replicates edge pixels",
        cfg.degrade.border_fill
    );
    println!("  jpeg: q = max(1, round(100 - 80 lambda)), 8-bit grayscale baseline");
    println!(
        "  jobs: {}",
        if cfg.jobs == 0 { "all cores".to_string() } else { cfg.jobs.to_string() }
    );
}

fn write(path: &Path, contents: &str) -> Result<(), MsiqError> {
    fs::write(path, contents).map_err(|source| MsiqError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    println!("wrote {}", path.display());
    Ok(())
}

fn experiment(args: &ExperimentArgs) -> Result<ExitCode, MsiqError> {
    let cfg = harness_config(args);
    cfg.validate()?;
    let source = match (&args.images, args.name) {
        (Some(dir), _) => dir.display().to_string(),
        (None, ExperimentName::Benchmark) => {
            return Err(MsiqError::Parameter("benchmark needs --images <DIR>".into()));
        }
        (None, _) => format!("generated standard set, height {}", args.size),
    };
    print_harness_config(&cfg, &source);
    let images = || -> Result<Vec<NamedImage>, MsiqError> {
        match &args.images {
            Some(dir) => load_directory(dir),
            None => Ok(standard_set_sized(args.size)),
        }
    };
    fs::create_dir_all(&args.out).map_err(|source| MsiqError::Io {
        path: args.out.clone(),
        source,
    })?;
    let stem = match args.name {
        ExperimentName::Exp1 => "exp1",
        ExperimentName::Exp2 => "exp2",
        ExperimentName::Controlled => "controlled",
        ExperimentName::Benchmark => "benchmark",
        ExperimentName::Ablation => "ablation",
        ExperimentName::Sanity => "sanity",
    };
    let csv_path = args.out.join(format!("{stem}.csv"));
    let json_path = args.out.join(format!("{stem}.json"));
    let want_csv = args.format != Format::Json;
    let want_json = args.format != Format::Csv;

    if args.name == ExperimentName::Sanity {
        let report = verify_sanity(&images()?, cfg.order, cfg.scheme)?;
        println!();
        print!("{}", report.render());
        if want_csv {
            write(&csv_path, &report.to_csv_string())?;
        }
        if want_json {
            write(&json_path, &report.to_json())?;
        }
        let degenerate = report.failures().any(|c| c.check == "degenerate");
        return Ok(if degenerate { ExitCode::from(3) } else { ExitCode::SUCCESS });
    }

    let report: ExperimentReport = match args.name {
        ExperimentName::Exp1 => run_exp1(&images()?, &cfg)?,
        ExperimentName::Exp2 => run_exp2(&images()?, &cfg)?,
        ExperimentName::Controlled => run_controlled_sr(&images()?, &cfg)?,
        ExperimentName::Benchmark => run_benchmark_dir(args.images.as_ref().expect("checked above"), &cfg)?,
        ExperimentName::Ablation => run_ablation(&images()?, &cfg)?,
        ExperimentName::Sanity => unreachable!(),
    };
    println!();
    print!("{}", report.render());
    println!();
    if want_csv {
        write(&csv_path, &report.to_csv_string())?;
    }
    if want_json {
        write(&json_path, &report.to_json())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn vectors(action: VectorAction) -> Result<ExitCode, MsiqError> {
    match action {
        VectorAction::Export { out } => {
            write(&out, &TestVectors::generate()?.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        VectorAction::Verify { path } => {
            let text = fs::read_to_string(&path).map_err(|source| MsiqError::Io {
                path: path.clone(),
                source,
            })?;
            let problems = TestVectors::from_json(&text)?.verify()?;
            for p in &problems {
                println!("mismatch: {p}");
            }
            println!("{} mismatches", problems.len());
            Ok(if problems.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}
