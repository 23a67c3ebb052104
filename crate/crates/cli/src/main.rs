//! `hiersel`: best-subset selection under category hierarchies, from the shell.

mod manifest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hiersel::datakit::{
    drop_redundant, generate, load_csv, load_grouping, load_hierarchy, write_csv, write_grouping, write_hierarchy,
    CategoryLayout, Dataset, Hierarchy, Mode, SyntheticConfig,
};
use hiersel::evaluation::{compare, run_method, Comparison, CvConfig, Method, MethodRun};
use hiersel::linalg::{infer, r_squared, CoefficientStat};
use hiersel::Error;

use manifest::{RunManifest, Started};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

#[derive(Debug, Parser, Serialize)]
#[command(name = "hiersel", version, about = "Best-subset regression with category hierarchy constraints")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct GlobalArgs {
    /// Data CSV: a response column plus one column per explanatory variable.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Grouping file, one `name,group` line per variable (group C, L, M or S).
    #[arg(long, global = true)]
    groups: Option<PathBuf>,
    /// Hierarchy file, one `large,medium[,small]` chain per line.
    #[arg(long, global = true)]
    hierarchy: Option<PathBuf>,
    #[arg(long, global = true, default_value = "y")]
    y_col: String,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for cross-validation folds; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write machine-readable results here.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Write a synthetic scanner-panel dataset with a planted support.
    Generate(GenerateArgs),
    /// Run one method at one support size on the whole dataset.
    Select(SelectArgs),
    /// Cross-validate methods and print per-fold results.
    Cv(CvArgs),
    /// Cross-validate methods and print the comparison table.
    Compare(CvArgs),
}

#[derive(Debug, Args, Serialize)]
struct GenerateArgs {
    /// Output directory for data.csv, groups.txt, hierarchy.txt and truth.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    demographics: usize,
    #[arg(long, default_value_t = 5)]
    large: usize,
    #[arg(long, default_value_t = 10)]
    medium: usize,
    #[arg(long, default_value_t = 10)]
    small: usize,
    /// Small categories that get a large/medium parent chain.
    #[arg(long, default_value_t = 10)]
    chains: usize,
    #[arg(long, default_value_t = 6)]
    support_size: usize,
    /// Hierarchy mode the planted support satisfies.
    #[arg(long, default_value = "weak", value_parser = parse_mode)]
    mode: Mode,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    intercept: f64,
    /// Plant positive coefficients only.
    #[arg(long)]
    positive: bool,
    #[arg(long)]
    demographic_prob: Option<f64>,
    #[arg(long)]
    large_prob: Option<f64>,
    #[arg(long)]
    medium_prob: Option<f64>,
    #[arg(long)]
    small_prob: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct SelectArgs {
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Maximum number of selected variables.
    #[arg(long)]
    s: usize,
    /// Seconds; exact methods return their incumbent when it runs out.
    #[arg(long)]
    time_limit: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct CvArgs {
    #[arg(long, value_delimiter = ',', default_value = "stepwise,l1,basic,strong,weak", value_parser = parse_method)]
    methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "10,20")]
    s_list: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Seconds per fold, exact methods only.
    #[arg(long)]
    time_limit: Option<f64>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } | Error::Parse { .. } | Error::Validation(_) | Error::Dimension(_) => EXIT_DATA,
            Error::Infeasible(_) => EXIT_INFEASIBLE,
            Error::Config(_) => EXIT_USAGE,
            _ => EXIT_INTERNAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Generate(a) => cmd_generate(&cli, a),
        Command::Select(a) => cmd_select(&cli, a),
        Command::Cv(a) => cmd_cv(&cli, a, false),
        Command::Compare(a) => cmd_cv(&cli, a, true),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Loaded inputs after dropping all-zero columns.
struct Inputs {
    dataset: Dataset,
    hierarchy: Hierarchy,
    dropped: Vec<String>,
    files: Vec<(&'static str, PathBuf)>,
}

fn load_inputs(g: &GlobalArgs, need_hierarchy: bool) -> Result<Inputs, Failure> {
    let data = g.data.as_ref().ok_or_else(|| Failure::usage("--data is required"))?;
    let groups = g.groups.as_ref().ok_or_else(|| Failure::usage("--groups is required"))?;
    if need_hierarchy && g.hierarchy.is_none() {
        return Err(Failure::usage("--hierarchy is required for the strong and weak methods"));
    }
    let spec = load_grouping(groups)?;
    let full = load_csv(data, &spec, &g.y_col)?;
    let mut files = vec![("data", data.clone()), ("groups", groups.clone())];
    let hierarchy = match &g.hierarchy {
        Some(path) => {
            files.push(("hierarchy", path.clone()));
            load_hierarchy(path, &full)?
        }
        None => Hierarchy::empty(),
    };
    let reduced = drop_redundant(&full);
    if !reduced.dropped.is_empty() {
        eprintln!("dropped {} all-zero column(s): {}", reduced.dropped.len(), reduced.dropped.join(", "));
    }
    let hierarchy = hierarchy.remap(&reduced.kept, false)?;
    Ok(Inputs {
        dataset: reduced.dataset,
        hierarchy,
        dropped: reduced.dropped,
        files,
    })
}

fn time_limit(secs: Option<f64>) -> Result<Option<Duration>, Failure> {
    match secs {
        None => Ok(None),
        Some(t) if t.is_finite() && t > 0.0 => Ok(Some(Duration::from_secs_f64(t))),
        Some(t) => Err(Failure::usage(format!("--time-limit must be a positive number of seconds, got {t}"))),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Failure {
        code: EXIT_DATA,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

#[derive(Serialize)]
struct SelectOutput<'a> {
    manifest: &'a RunManifest,
    method: Method,
    s: usize,
    n: usize,
    p: usize,
    dropped: &'a [String],
    intercept: f64,
    /// Selected variables, descending by coefficient.
    coefficients: Vec<CoefficientStat>,
    inference_note: Option<String>,
    rss: f64,
    r2: Option<f64>,
    proven_optimal: Option<bool>,
    best_bound: Option<f64>,
    nodes: Option<u64>,
    lambda: Option<f64>,
    stop: Option<hiersel::baselines::StopReason>,
    warning: Option<String>,
    wall_time: f64,
}

fn cmd_select(cli: &Cli, a: &SelectArgs) -> CmdResult {
    let started = Started::now();
    let limit = time_limit(a.time_limit)?;
    let inputs = load_inputs(&cli.global, a.method.needs_hierarchy())?;
    let ds = &inputs.dataset;
    let run = run_method(ds, &inputs.hierarchy, a.method, a.s, limit)?;

    let (coefficients, inference_note) = coefficient_rows(ds, &run)?;
    print!("{}", render_select(ds, &run, &coefficients, inference_note.as_deref()));

    if let Some(path) = &cli.global.json {
        let manifest = started.finish("select", cli, &inputs.files)?;
        let out = SelectOutput {
            manifest: &manifest,
            method: run.method,
            s: run.s,
            n: ds.n(),
            p: ds.p(),
            dropped: &inputs.dropped,
            intercept: run.fit.intercept,
            coefficients,
            inference_note,
            rss: run.fit.rss,
            r2: r_squared(&run.fit, ds).ok(),
            proven_optimal: run.proven_optimal,
            best_bound: run.best_bound,
            nodes: run.nodes,
            lambda: run.lambda,
            stop: run.stop,
            warning: run.warning.clone(),
            wall_time: run.wall_time,
        };
        write_json(path, &out)?;
    }
    Ok(())
}

/// Selected coefficients sorted by descending estimate. Falls back to bare
/// estimates when t-tests are unavailable.
fn coefficient_rows(ds: &Dataset, run: &MethodRun) -> Result<(Vec<CoefficientStat>, Option<String>), Failure> {
    let (mut rows, note): (Vec<CoefficientStat>, _) = match infer(ds, &run.fit) {
        Ok(report) => (report.rows.into_iter().filter(|r| r.index.is_some()).collect(), None),
        Err(Error::InferenceUnavailable(msg)) => {
            let rows = run
                .fit
                .selected()
                .into_iter()
                .map(|j| CoefficientStat {
                    index: Some(j),
                    name: ds.name(j).to_string(),
                    estimate: run.fit.coefficients[j],
                    std_error: f64::NAN,
                    t_value: f64::NAN,
                    p_value: f64::NAN,
                    stars: String::new(),
                })
                .collect();
            (rows, Some(msg))
        }
        Err(e) => return Err(e.into()),
    };
    rows.sort_by(|a, b| b.estimate.total_cmp(&a.estimate).then(a.index.cmp(&b.index)));
    Ok((rows, note))
}

fn render_select(ds: &Dataset, run: &MethodRun, rows: &[CoefficientStat], note: Option<&str>) -> String {
    let mut out = String::new();
    let width = rows.iter().map(|r| r.name.chars().count()).max().unwrap_or(0).max("(intercept)".len());
    let _ = writeln!(out, "method {}, s = {}, {} selected of {}", run.method, run.s, rows.len(), ds.p());
    let _ = writeln!(out, "{:<width$}  {:>12}", "Variable", "Coefficient");
    let _ = writeln!(out, "{}", "-".repeat(width + 18));
    for r in rows {
        let _ = writeln!(out, "{:<width$}  {:>12.4}  {}", r.name, r.estimate, r.stars);
    }
    let _ = writeln!(out, "{:<width$}  {:>12.4}", "(intercept)", run.fit.intercept);
    let _ = writeln!(out, "{}", "-".repeat(width + 18));
    match note {
        Some(n) => {
            let _ = writeln!(out, "significance unavailable: {n}");
        }
        None => {
            let _ = writeln!(out, "*** p < 0.001");
        }
    }
    let r2 = r_squared(&run.fit, ds).map(|v| format!("{v:.4}")).unwrap_or_else(|_| "n/a".into());
    let _ = writeln!(out, "RSS {:.4}, R² {r2}, time {:.1} s", run.fit.rss, run.wall_time);
    if let Some(opt) = run.proven_optimal {
        let _ = writeln!(
            out,
            "{}",
            if opt {
                "proven optimal".to_string()
            } else {
                format!("time limit reached; lower bound on RSS {:.4}", run.best_bound.unwrap_or(f64::NAN))
            }
        );
    }
    if let Some(lambda) = run.lambda {
        let _ = writeln!(out, "lambda {lambda}");
    }
    if let Some(w) = &run.warning {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

fn cmd_cv(cli: &Cli, a: &CvArgs, table_only: bool) -> CmdResult {
    let started = Started::now();
    if a.k < 2 {
        return Err(Failure::usage(format!("--k must be at least 2, got {}", a.k)));
    }
    if a.methods.is_empty() || a.s_list.is_empty() {
        return Err(Failure::usage("--methods and --s-list must be non-empty"));
    }
    if cli.global.threads == Some(0) {
        return Err(Failure::usage("--threads must be at least 1"));
    }
    let mut cfg = CvConfig::new(a.k, cli.global.seed);
    cfg.time_limit = time_limit(a.time_limit)?;
    cfg.threads = cli.global.threads;
    let need_hierarchy = a.methods.iter().any(Method::needs_hierarchy);
    let inputs = load_inputs(&cli.global, need_hierarchy)?;
    let mut cmp = compare(&inputs.dataset, &inputs.hierarchy, &a.methods, &a.s_list, &cfg)?;

    if !table_only {
        print!("{}", render_folds(&cmp));
        println!();
    }
    print!("{}", cmp.render_text());

    if let Some(path) = &cli.global.json {
        let name = if table_only { "compare" } else { "cv" };
        let manifest = started.finish(name, cli, &inputs.files)?;
        cmp.manifest = Some(serde_json::to_value(&manifest).map_err(Error::from)?);
        write_json(path, &cmp)?;
    }
    Ok(())
}

fn render_folds(c: &Comparison) -> String {
    let mut out = String::new();
    for row in &c.rows {
        let _ = writeln!(out, "{} s={}", row.label, row.s);
        for f in &row.report.folds {
            let r2 = f.r2.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into());
            let opt = match f.proven_optimal {
                Some(false) => " (time limit)",
                _ => "",
            };
            let _ = writeln!(
                out,
                "  fold {}: R² {r2}, RMSE {:.4}, time {:.1} s, {} selected{opt}",
                f.fold + 1,
                f.rmse,
                f.time_s,
                f.selected.len()
            );
        }
    }
    out
}

#[derive(Serialize)]
struct TruthOutput<'a> {
    manifest: &'a RunManifest,
    mode: Mode,
    layout: CategoryLayout,
    n: usize,
    support: Vec<String>,
    #[serde(flatten)]
    truth: &'a hiersel::datakit::GroundTruth,
}

fn cmd_generate(cli: &Cli, a: &GenerateArgs) -> CmdResult {
    let started = Started::now();
    let layout = CategoryLayout {
        demographics: a.demographics,
        large: a.large,
        medium: a.medium,
        small: a.small,
        chains: a.chains,
    };
    let mut cfg = SyntheticConfig::new(a.n, layout, cli.global.seed);
    cfg.sigma = a.sigma;
    cfg.intercept = a.intercept;
    let probs = [
        (a.demographic_prob, &mut cfg.demographic_prob),
        (a.large_prob, &mut cfg.large_prob),
        (a.medium_prob, &mut cfg.medium_prob),
        (a.small_prob, &mut cfg.small_prob),
    ];
    for (given, slot) in probs {
        if let Some(q) = given {
            *slot = q;
        }
    }
    cfg.plant(a.mode, a.support_size, a.positive)?;
    let g = generate(&cfg)?;

    std::fs::create_dir_all(&a.out).map_err(|e| Failure {
        code: EXIT_DATA,
        message: format!("cannot create {}: {e}", a.out.display()),
    })?;
    let data = a.out.join("data.csv");
    write_csv(&g.dataset, &data, &cli.global.y_col)?;
    write_grouping(&g.dataset, a.out.join("groups.txt"))?;
    write_hierarchy(&g.hierarchy, &g.dataset, a.out.join("hierarchy.txt"))?;

    let manifest = started.finish("generate", cli, &[])?;
    let support: Vec<String> = g.truth.coefficients.keys().cloned().collect();
    let truth = TruthOutput {
        manifest: &manifest,
        mode: a.mode,
        layout,
        n: a.n,
        support,
        truth: &g.truth,
    };
    write_json(&a.out.join("truth.json"), &truth)?;
    if let Some(path) = &cli.global.json {
        write_json(path, &manifest)?;
    }

    println!(
        "wrote n = {}, p = {}, {} chains, support {} ({} mode) to {}",
        g.dataset.n(),
        g.dataset.p(),
        g.hierarchy.len(),
        g.truth.coefficients.len(),
        a.mode,
        a.out.display()
    );
    Ok(())
}
