use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use migmine::ast;
use migmine::detect::RecentBaselineMode;
use migmine::diff::{tree_diff, DiffParams};
use migmine::lang::{detect_language, Language};
use migmine::report::{self, AnalysisConfig, DetectorSet, Formats};
use migmine::Ratio;

/// Mines a git history for Java-to-Kotlin code migration.
#[derive(Parser)]
#[command(name = "migmine", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a repository and emit the JSON report plus CSV series.
    Analyze(AnalyzeArgs),
    /// Print a file's unified syntax tree as indented text (fixture aid).
    DumpAst(DumpAstArgs),
    /// Diff two file versions and print the edit script as JSON lines.
    Diff(DiffArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Path to the git repository to analyze.
    #[arg(long, env = "MIGMINE_REPO")]
    repo: PathBuf,

    /// Branch to walk (default: the repository's default branch head).
    #[arg(long, env = "MIGMINE_BRANCH")]
    branch: Option<String>,

    /// Comma-separated detector subset: file,method,update_insert.
    #[arg(long, env = "MIGMINE_DETECTORS", default_value = "file,method,update_insert", value_delimiter = ',')]
    detectors: Vec<DetectorName>,

    /// Minimum itemset support, e.g. 0.004 or 1/250.
    #[arg(long, env = "MIGMINE_MIN_SUPPORT", default_value = "0.004")]
    min_support: Ratio,

    /// Largest itemset size mined.
    #[arg(long, env = "MIGMINE_MAX_ITEMSET_SIZE", default_value_t = 4)]
    max_itemset_size: usize,

    /// Keep IDE-generated test stubs in the metrics.
    #[arg(long, env = "MIGMINE_NO_EXCLUDE_GENERATED_TESTS")]
    no_exclude_generated_tests: bool,

    /// Require deleted/inserted method names to match in the method-level
    /// detector.
    #[arg(long, env = "MIGMINE_MATCH_METHOD_NAMES")]
    match_method_names: bool,

    /// Anchor of the "recent" trend baseline.
    #[arg(long, env = "MIGMINE_RECENT_BASELINE", value_enum, default_value_t = BaselineArg::KotlinEra)]
    recent_baseline: BaselineArg,

    /// Output directory.
    #[arg(long, env = "MIGMINE_OUT", default_value = ".")]
    out: PathBuf,

    /// Comma-separated output formats: json,csv.
    #[arg(long, env = "MIGMINE_FORMAT", default_value = "json,csv", value_delimiter = ',')]
    format: Vec<FormatName>,

    /// Analyze commits sequentially even when parallel support is built in.
    #[arg(long, env = "MIGMINE_SEQUENTIAL")]
    sequential: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DetectorName {
    File,
    Method,
    #[value(name = "update_insert")]
    UpdateInsert,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatName {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaselineArg {
    #[value(name = "kotlin_era")]
    KotlinEra,
    #[value(name = "all_commits")]
    AllCommits,
}

#[derive(Args)]
struct DumpAstArgs {
    /// Source file to parse.
    #[arg(long)]
    file: PathBuf,
    /// Parse as this language instead of inferring from the extension.
    #[arg(long, value_enum)]
    language: Option<LanguageArg>,
}

#[derive(Args)]
struct DiffArgs {
    /// Old version of the file.
    #[arg(long)]
    old: PathBuf,
    /// New version of the file.
    #[arg(long)]
    new: PathBuf,
    /// Parse as this language instead of inferring from the extension.
    #[arg(long, value_enum)]
    language: Option<LanguageArg>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LanguageArg {
    Java,
    Kotlin,
}

impl From<LanguageArg> for Language {
    fn from(arg: LanguageArg) -> Language {
        match arg {
            LanguageArg::Java => Language::Java,
            LanguageArg::Kotlin => Language::Kotlin,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze(args) => {
            let config = to_config(args);
            match report::run(&config) {
                Ok(report) => {
                    println!(
                        "analyzed {} commits: status {:?}, {} file-level / {} method-level / {} update-insert events, {} frequent itemsets",
                        report.summary.total_commits,
                        report.summary.app_status,
                        report.summary.event_counts.file_level,
                        report.summary.event_counts.method_level,
                        report.summary.event_counts.update_insert,
                        report.frequent_itemsets.len(),
                    );
                    ExitCode::SUCCESS
                }
                Err(err) => {
                    let record = serde_json::json!({
                        "error": { "kind": err.kind_name(), "message": err.to_string() }
                    });
                    let _ = writeln!(std::io::stderr(), "{record}");
                    ExitCode::from(err.exit_code() as u8)
                }
            }
        }
        Command::DumpAst(args) => exit_from(dump_ast(args)),
        Command::Diff(args) => exit_from(diff_files(args)),
    }
}

fn exit_from(result: Result<()>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let _ = writeln!(std::io::stderr(), "error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn to_config(args: AnalyzeArgs) -> AnalysisConfig {
    let mut config = AnalysisConfig::new(args.repo);
    config.branch = args.branch;
    config.detectors = DetectorSet {
        file: args.detectors.contains(&DetectorName::File),
        method: args.detectors.contains(&DetectorName::Method),
        update_insert: args.detectors.contains(&DetectorName::UpdateInsert),
    };
    config.min_support = args.min_support;
    config.max_itemset_size = args.max_itemset_size;
    config.exclude_generated_tests = !args.no_exclude_generated_tests;
    config.match_method_names = args.match_method_names;
    config.recent_baseline_mode = match args.recent_baseline {
        BaselineArg::KotlinEra => RecentBaselineMode::KotlinEra,
        BaselineArg::AllCommits => RecentBaselineMode::AllCommits,
    };
    config.output_dir = args.out;
    config.formats = Formats {
        json: args.format.contains(&FormatName::Json),
        csv: args.format.contains(&FormatName::Csv),
    };
    if args.sequential {
        config.parallel = false;
    }
    config
}

fn load_source(path: &PathBuf, language: Option<LanguageArg>) -> Result<(Vec<u8>, Language)> {
    let language = match language {
        Some(l) => l.into(),
        None => match detect_language(&path.display().to_string().replace('\\', "/")) {
            Language::Other => bail!(
                "cannot infer the language of {}; pass --language",
                path.display()
            ),
            l => l,
        },
    };
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok((bytes, language))
}

fn dump_ast(args: DumpAstArgs) -> Result<()> {
    let (bytes, language) = load_source(&args.file, args.language)?;
    let tree = ast::parse_bytes(&bytes, language)
        .with_context(|| format!("parsing {}", args.file.display()))?;
    let stdout = std::io::stdout();
    tree.dump(&mut stdout.lock())?;
    Ok(())
}

fn diff_files(args: DiffArgs) -> Result<()> {
    let (old_bytes, old_lang) = load_source(&args.old, args.language)?;
    let (new_bytes, new_lang) = load_source(&args.new, args.language)?;
    if old_lang != new_lang {
        bail!("both files must be the same language");
    }
    let old = ast::parse_bytes(&old_bytes, old_lang)
        .with_context(|| format!("parsing {}", args.old.display()))?;
    let new = ast::parse_bytes(&new_bytes, new_lang)
        .with_context(|| format!("parsing {}", args.new.display()))?;
    let script = tree_diff(&old, &new, &DiffParams::default());
    let stdout = std::io::stdout();
    script.to_json_lines(&mut stdout.lock())?;
    Ok(())
}
