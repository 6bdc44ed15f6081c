use clap::{Args, Parser, Subcommand};
use hcbell::bell::{violation_search, SearchConfig, SearchTemplate, SCAN_TOL};
use hcbell::forms::{build_forms, catalan, enumerate_groupings, GroupingTree};
use hcbell::hypercomplex::{square_identity_check, StructureTable};
use hcbell::problem::{left_fold_grouping, ProblemFile, ReportBody, ReportFile, SearchReportData};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Hypercomplex Bell-type inequalities: structure tables, grouped multilinear
/// forms, evaluation on quantum states, separability scans and violation
/// search.
#[derive(Parser)]
#[command(name = "hcbell", disable_version_flag = true)]
struct Cli {
    /// Print toolkit version and convention-table checksums.
    #[arg(long, global = true)]
    version: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct TableSelect {
    /// Algebra dimension (1, 2, 4 or 8); picks the default convention.
    #[arg(long)]
    algebra: Option<usize>,
    /// Convention name: real, complex, quaternion, table1 or degen.
    #[arg(long)]
    convention: Option<String>,
}

impl TableSelect {
    fn resolve(&self) -> Result<StructureTable, String> {
        match (&self.convention, self.algebra) {
            (Some(name), dim) => {
                let table = StructureTable::builtin(name).map_err(|e| e.to_string())?;
                if let Some(dim) = dim {
                    if dim != table.dim() {
                        return Err(format!(
                            "--algebra {dim} conflicts with --convention {name} (dimension {})",
                            table.dim()
                        ));
                    }
                }
                Ok(table)
            }
            (None, Some(dim)) => StructureTable::default_for_dim(dim).map_err(|e| e.to_string()),
            (None, None) => Err("one of --algebra or --convention is required".to_string()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print a structure-constant table.
    Table(TableSelect),
    /// Fuzz the square identity for one convention and report the worst
    /// relative deviation.
    Identities {
        #[command(flatten)]
        select: TableSelect,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Expand a grouped product into its coefficient tensor and forms.
    Expand {
        #[command(flatten)]
        select: TableSelect,
        /// Number of sites.
        #[arg(long, default_value_t = 2)]
        sites: usize,
        /// Grouping string, e.g. "((1 2) 3)"; defaults to the left fold.
        #[arg(long)]
        grouping: Option<String>,
    },
    /// Print the grouping count and all grouping strings for n sites.
    Catalan {
        #[arg(long)]
        n: usize,
    },
    /// Evaluate the inequality of a problem file on its state.
    Evaluate {
        #[arg(long)]
        problem: PathBuf,
        /// Violation tolerance.
        #[arg(long, default_value_t = SCAN_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append a flat (grouping, convention, lhs, rhs, ratio) CSV row.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Monte-Carlo scan of random separable states against the instance of a
    /// problem file.
    Scan {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 10000)]
        samples: usize,
        /// Number of terms in each sampled separable mixture.
        #[arg(long, default_value_t = 3)]
        rank: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a violating configuration by multi-restart hill climbing.
    Search {
        /// Per-site Hilbert-space dimensions, e.g. --dims 2,2,2.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[command(flatten)]
        select: TableSelect,
        #[arg(long)]
        grouping: Option<String>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Exit with status 1 unless the best configuration violates the
        /// inequality.
        #[arg(long)]
        require_violation: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.version {
        print_version();
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("no subcommand given; see --help");
        return ExitCode::from(2);
    };
    match run(command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn print_version() {
    println!("hcbell {}", env!("CARGO_PKG_VERSION"));
    for table in StructureTable::all_builtin() {
        let digest = Sha256::digest(table.render().as_bytes());
        println!("table {:<10} sha256 {:x}", table.name(), digest);
    }
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Table(select) => {
            let table = select.resolve()?;
            println!("convention: {} (dimension {})", table.name(), table.dim());
            print!("{}", table.render());
            Ok(ExitCode::SUCCESS)
        }
        Command::Identities { select, trials, seed } => {
            let table = select.resolve()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst: f64 = 0.0;
            for _ in 0..trials {
                let v1: Vec<f64> = (0..table.dim()).map(|_| rng.sample(StandardNormal)).collect();
                let v2: Vec<f64> = (0..table.dim()).map(|_| rng.sample(StandardNormal)).collect();
                let (lhs, rhs) = square_identity_check(&v1, &v2, &table)
                    .map_err(|e| e.to_string())?;
                worst = worst.max((lhs - rhs).abs() / rhs.max(f64::MIN_POSITIVE));
            }
            println!(
                "convention {}: {trials} trials, max relative deviation {worst:.3e}",
                table.name()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Expand { select, sites, grouping } => {
            let table = select.resolve()?;
            let grouping = parse_grouping(grouping.as_deref(), sites)?;
            let tensor =
                build_forms(&table, sites, &grouping).map_err(|e| e.to_string())?;
            println!("convention: {}, sites: {sites}, grouping: {}", table.name(), grouping.label());
            print!("{}", tensor.render_entries());
            print!("{}", tensor.render_forms());
            Ok(ExitCode::SUCCESS)
        }
        Command::Catalan { n } => {
            println!("{}", catalan(n));
            for g in enumerate_groupings(n).map_err(|e| e.to_string())? {
                println!("{}", g.label());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Evaluate { problem, tol, out, csv } => {
            let (file, hash) = load_problem(&problem)?;
            let (instance, state) = file.build().map_err(|e| e.to_string())?;
            let report = instance.evaluate(&state, tol).map_err(|e| e.to_string())?;
            if let Some(path) = csv {
                append_csv(&path, &report.grouping, &report.convention, report.lhs, report.rhs, report.ratio)?;
            }
            emit_report(
                ReportFile {
                    toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
                    timestamp: chrono::Utc::now().to_rfc3339(),
                    input_sha256: Some(hash),
                    seed: None,
                    body: ReportBody::Evaluate(report),
                },
                out.as_deref(),
                "evaluate",
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Scan { problem, samples, rank, seed, out } => {
            let (file, hash) = load_problem(&problem)?;
            let (instance, _) = file.build().map_err(|e| e.to_string())?;
            let report = instance
                .separable_scan(samples, rank, seed)
                .map_err(|e| e.to_string())?;
            emit_report(
                ReportFile {
                    toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
                    timestamp: chrono::Utc::now().to_rfc3339(),
                    input_sha256: Some(hash),
                    seed: Some(seed),
                    body: ReportBody::Scan(report),
                },
                out.as_deref(),
                "scan",
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Search {
            dims,
            select,
            grouping,
            restarts,
            iters,
            seed,
            out,
            csv,
            require_violation,
        } => {
            let table = select.resolve()?;
            let grouping = parse_grouping(grouping.as_deref(), dims.len())?;
            let template = SearchTemplate { table, site_dims: dims, grouping };
            let config = SearchConfig {
                restarts,
                iterations: iters,
                seed,
                ..SearchConfig::default()
            };
            let report = violation_search(&template, &config).map_err(|e| e.to_string())?;
            let violated = report.best.violated;
            if let Some(path) = csv {
                append_csv(
                    &path,
                    &report.best.grouping,
                    &report.best.convention,
                    report.best.lhs,
                    report.best.rhs,
                    report.best.ratio,
                )?;
            }
            emit_report(
                ReportFile {
                    toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
                    timestamp: chrono::Utc::now().to_rfc3339(),
                    input_sha256: None,
                    seed: Some(seed),
                    body: ReportBody::Search(SearchReportData::from_report(&report)),
                },
                out.as_deref(),
                "search",
            )?;
            if require_violation && !violated {
                Ok(ExitCode::from(1))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
    }
}

fn parse_grouping(text: Option<&str>, sites: usize) -> Result<GroupingTree, String> {
    match text {
        Some(text) => {
            let tree = GroupingTree::parse(text).map_err(|e| e.to_string())?;
            if tree.leaf_count() != sites {
                return Err(format!("grouping leaf count {} != {sites}", tree.leaf_count()));
            }
            Ok(tree)
        }
        None => Ok(left_fold_grouping(sites)),
    }
}

fn load_problem(path: &Path) -> Result<(ProblemFile, String), String> {
    let bytes = std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let hash = format!("{:x}", Sha256::digest(&bytes));
    let file = ProblemFile::load(path).map_err(|e| e.to_string())?;
    Ok((file, hash))
}

/// Prints the report to stdout and writes it to `out`, or to the directory
/// named by HCBELL_OUT_DIR when no explicit path is given.
fn emit_report(report: ReportFile, out: Option<&Path>, kind: &str) -> Result<(), String> {
    let text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    println!("{text}");
    let target = out.map(PathBuf::from).or_else(|| {
        std::env::var_os("HCBELL_OUT_DIR")
            .map(|dir| PathBuf::from(dir).join(format!("{kind}-report.json")))
    });
    if let Some(path) = target {
        std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn append_csv(
    path: &Path,
    grouping: &str,
    convention: &str,
    lhs: f64,
    rhs: f64,
    ratio: Option<f64>,
) -> Result<(), String> {
    use std::io::Write;
    let fresh = !path.exists();
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| format!("cannot open {}: {e}", path.display()))?;
    if fresh {
        writeln!(file, "grouping,convention,lhs,rhs,ratio").map_err(|e| e.to_string())?;
    }
    let ratio = ratio.map_or("undefined".to_string(), |r| format!("{r}"));
    writeln!(file, "\"{grouping}\",{convention},{lhs},{rhs},{ratio}")
        .map_err(|e| e.to_string())?;
    Ok(())
}
