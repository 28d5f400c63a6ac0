use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use typeprint::analysis::{analyze, AnalysisConfig, ClusterCount};
use typeprint::baseline::{classical_pipeline, BaselineConfig};
use typeprint::prep::knn_impute;
use typeprint::report::{self, to_canonical_json, AnalysisReport};
use typeprint::synthgen::{generate_dataset, DatasetSpec, Preset};
use typeprint::{Scale, SelectRule};

mod csvio;

#[derive(Parser)]
#[command(name = "typeprint", version, about = "Response types and group fingerprints for questionnaire data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic questionnaire dataset as CSV.
    Generate(GenerateArgs),
    /// Cluster questionnaires into response types and fingerprint the groups.
    Analyze(AnalyzeArgs),
    /// Run the classical PCA / Kruskal-Wallis pipeline.
    Baseline(BaselineArgs),
    /// Derive views from an analysis report.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Built-in dataset.
    #[arg(long, value_parser = ["d1", "d2", "d3"], required_unless_present = "spec", conflicts_with = "spec")]
    dataset: Option<String>,
    /// Dataset specification in JSON.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the preset's noise standard deviation.
    #[arg(long, conflicts_with = "spec")]
    noise_sd: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScaleArgs {
    /// Lowest answer on the response scale.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    scale_min: i32,
    /// Highest answer on the response scale.
    #[arg(long, default_value_t = 5, allow_negative_numbers = true)]
    scale_max: i32,
}

impl ScaleArgs {
    fn scale(&self) -> Result<Scale> {
        if self.scale_min >= self.scale_max {
            bail!("--scale-min must be below --scale-max");
        }
        Ok(Scale {
            min: self.scale_min,
            max: self.scale_max,
        })
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Questionnaire CSV.
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Neighbours used for imputation.
    #[arg(long, default_value_t = 5)]
    k_impute: usize,
    /// Standard deviation of the augmentation noise.
    #[arg(long, default_value_t = 0.1)]
    aug_sd: f64,
    #[arg(long, default_value_t = 20)]
    max_clusters: usize,
    /// Reference datasets for the gap statistic.
    #[arg(long, default_value_t = 10)]
    gap_refs: usize,
    /// `auto` or a fixed number of response types.
    #[arg(long, default_value = "auto")]
    clusters: ClusterCount,
    #[arg(long, default_value = "first-local-max")]
    select_rule: SelectRule,
    #[command(flatten)]
    scale: ScaleArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    /// Questionnaire CSV.
    input: PathBuf,
    /// Impute missing answers first instead of failing.
    #[arg(long)]
    impute: bool,
    #[arg(long, default_value_t = 5)]
    k_impute: usize,
    #[command(flatten)]
    scale: ScaleArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Newick,
    Scree,
    Spider,
    SvgScree,
    SvgDendrogram,
}

#[derive(Args)]
struct ReportArgs {
    /// Report JSON written by `analyze`.
    input: PathBuf,
    #[arg(long, value_enum)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its exit status: 1 for bad input, 2 for data the methods
/// cannot handle.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<typeprint::Error>() {
            Some(e) if e.is_computational() => 2,
            _ => 1,
        };
        Failure { code, error }
    }
}

impl From<typeprint::Error> for Failure {
    fn from(e: typeprint::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

/// Writes the whole output at once; files go through a temporary sibling so
/// a failed run never leaves a truncated file behind.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
        Some(path) => {
            let name = path.file_name().context("output path has no file name")?;
            let mut tmp_name = name.to_os_string();
            tmp_name.push(format!(".tmp{}", std::process::id()));
            let tmp = path.with_file_name(tmp_name);
            fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
            fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

fn read_csv(path: &Path, scale: Scale) -> Result<typeprint::QuestionnaireMatrix> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    csvio::read_matrix(io::BufReader::new(file), scale).with_context(|| format!("reading {}", path.display()))
}

fn generate(args: &GenerateArgs) -> Result<(), Failure> {
    let spec = match (&args.dataset, &args.spec) {
        (Some(name), _) => {
            let preset: Preset = name.parse()?;
            match args.noise_sd {
                Some(sd) => preset.spec_with_sd(args.seed, sd),
                None => preset.spec(args.seed),
            }
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let spec: DatasetSpec =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            spec.with_seed(args.seed)
        }
        (None, None) => return Err(anyhow::anyhow!("either --dataset or --spec is required").into()),
    };
    let m = generate_dataset(&spec)?;
    let mut buf = Vec::new();
    csvio::write_matrix(&m, &mut buf)?;
    emit(args.out.as_deref(), &buf)?;
    Ok(())
}

fn run_analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let m = read_csv(&args.input, args.scale.scale()?)?;
    let cfg = AnalysisConfig {
        seed: args.seed,
        k_impute: args.k_impute,
        augment_sd: args.aug_sd,
        max_clusters: args.max_clusters,
        gap_refs: args.gap_refs,
        clusters: args.clusters,
        rule: args.select_rule,
    };
    let report = analyze(&m, &cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    emit(args.out.as_deref(), report.to_json()?.as_bytes())?;
    Ok(())
}

fn run_baseline(args: &BaselineArgs) -> Result<(), Failure> {
    let mut m = read_csv(&args.input, args.scale.scale()?)?;
    if !m.is_complete() {
        if !args.impute {
            return Err(anyhow::anyhow!(
                "{} missing values; pass --impute to fill them by nearest neighbours first",
                m.missing_count()
            )
            .into());
        }
        let imputed = knn_impute(&m, args.k_impute)?;
        for w in &imputed.warnings {
            eprintln!(
                "warning: row {}, item {}: imputed from {} of {} requested neighbours",
                w.row + 1,
                w.item + 1,
                w.used,
                w.requested
            );
        }
        m = imputed.matrix;
    }
    let report = classical_pipeline(&m, &BaselineConfig::default())?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    emit(args.out.as_deref(), to_canonical_json(&report)?.as_bytes())?;
    Ok(())
}

fn run_report(args: &ReportArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let r = AnalysisReport::from_json(&text).with_context(|| format!("parsing {}", args.input.display()))?;
    let out = match args.format {
        Format::Newick => format!("{}\n", r.similarity.newick),
        Format::Scree => to_canonical_json(&report::scree(&r))?,
        Format::Spider => to_canonical_json(&report::spider(&r))?,
        Format::SvgScree => report::scree_svg(&r),
        Format::SvgDendrogram => report::dendrogram_svg(&r),
    };
    emit(args.out.as_deref(), out.as_bytes())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors are input errors; help and version are not errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Analyze(a) => run_analyze(a),
        Command::Baseline(a) => run_baseline(a),
        Command::Report(a) => run_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
