//! Command-line interface.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 data error,
//! 4 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};
use qwk_core::embed::{entropy_series, kpca};
use qwk_core::finance::{network_at, window_count};
use qwk_core::kernels::kernel_1nn_cv;
use qwk_core::sparsify::SparsifyBranch;
use rayon::prelude::*;

use crate::config::{RunConfig, Settings};
use crate::export::{self, NetworkEntry, NetworkManifest};
use crate::prices::{load_prices, parse_date, DateSpan};
use crate::{json, load_input, parallel, InputFormat, NETWORK_WEIGHT_FLOOR};

#[derive(Debug, Parser)]
#[command(name = "qwk", version, about = "Quantum walk graph kernels over commute-time spanning trees")]
pub struct Cli {
    /// TOML file with default settings.
    #[arg(long, global = true, env = "QWK_CONFIG")]
    pub config: Option<PathBuf>,

    /// Worker threads for per-graph stages (0 = one per core).
    #[arg(long, global = true, env = "QWK_WORKERS")]
    pub workers: Option<usize>,

    /// More log output; repeat for debug level.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build sliding-window stock networks from a closing-price CSV.
    IngestPrices(IngestArgs),
    /// Compute the Gram matrix of a graph collection.
    Gram(GramArgs),
    /// Embed graphs with kernel PCA of a Gram matrix.
    Kpca(KpcaArgs),
    /// Entropy of each network's label distribution, in time order.
    Entropy(EntropyArgs),
    /// Write the sparsified walk graphs as JSON.
    Sparsify(SparsifyArgs),
    /// Cross-validated 1-nearest-neighbor accuracy from a Gram matrix.
    ClassifySmoke(SmokeArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Dataset directory, JSON graph file or network directory.
    #[arg(long, visible_alias = "nets")]
    pub input: PathBuf,

    /// auto, tu, json or nets.
    #[arg(long, default_value = "auto")]
    pub format: InputFormat,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    /// Walk horizon T.
    #[arg(long, env = "QWK_HORIZON")]
    pub horizon: Option<usize>,

    /// Refinement rounds, `min:max`.
    #[arg(long, env = "QWK_WL")]
    pub wl: Option<String>,

    /// Raise every off-diagonal weight to at least this value first.
    #[arg(long, env = "QWK_WEIGHT_FLOOR")]
    pub weight_floor: Option<f64>,
}

impl WalkArgs {
    fn settings(&self) -> Settings {
        Settings {
            horizon: self.horizon,
            wl: self.wl.clone(),
            weight_floor: self.weight_floor,
            ..Settings::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub csv: PathBuf,
    /// Price rows per window.
    #[arg(long, env = "QWK_WINDOW")]
    pub window: Option<usize>,
    /// euclidean or correlation.
    #[arg(long, env = "QWK_MODE")]
    pub mode: Option<String>,
    /// First date to keep (YYYY-MM-DD).
    #[arg(long)]
    pub from: Option<String>,
    /// Last date to keep (YYYY-MM-DD).
    #[arg(long)]
    pub to: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GramArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub walk: WalkArgs,
    /// dp or js.
    #[arg(long, env = "QWK_KERNEL")]
    pub kernel: Option<String>,
    /// Gram CSV output.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the precomputed-kernel SVM file.
    #[arg(long)]
    pub svm: Option<PathBuf>,
    /// Also write class labels, one per line.
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KpcaArgs {
    #[arg(long)]
    pub gram: PathBuf,
    #[arg(long, env = "QWK_DIMS")]
    pub dims: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Refinement round whose distribution is measured.
    #[arg(long, default_value_t = 0)]
    pub level: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SparsifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, env = "QWK_WEIGHT_FLOOR")]
    pub weight_floor: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SmokeArgs {
    #[arg(long)]
    pub gram: PathBuf,
    /// Class labels, one per line in Gram order.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, env = "QWK_FOLDS")]
    pub folds: Option<usize>,
    #[arg(long, env = "QWK_SEED")]
    pub seed: Option<u64>,
}

/// Error with the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Internal(_) => 4,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Data(e) | Failure::Internal(e) => e,
        }
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn data(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Data(e.into())
}

type CmdResult = Result<(), Failure>;

fn resolve(cli: &Cli, flags: Settings) -> Result<RunConfig, Failure> {
    let file = match &cli.config {
        Some(p) => Settings::from_toml_file(p).map_err(usage)?,
        None => Settings::default(),
    };
    let global = Settings { workers: cli.workers, ..Settings::default() };
    RunConfig::resolve(flags.or(global).or(file)).map_err(usage)
}

fn require_input(path: &Path) -> CmdResult {
    if path.exists() {
        Ok(())
    } else {
        Err(usage(anyhow!("input {} does not exist", path.display())))
    }
}

fn require_output(path: &Path) -> CmdResult {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if parent.is_dir() {
        Ok(())
    } else {
        Err(usage(anyhow!("output directory {} does not exist", parent.display())))
    }
}

fn header_version() -> String {
    format!("qwk {}", env!("CARGO_PKG_VERSION"))
}

fn ingest(cli: &Cli, a: &IngestArgs) -> CmdResult {
    let cfg = resolve(cli, Settings { window: a.window, mode: a.mode.clone(), ..Settings::default() })?;
    if cfg.window < 2 {
        return Err(usage(anyhow!("window must be at least 2, got {}", cfg.window)));
    }
    let date = |s: &Option<String>| -> Result<_, Failure> {
        s.as_deref()
            .map(|d| parse_date(d).ok_or_else(|| usage(anyhow!("bad date {d:?}, expected YYYY-MM-DD"))))
            .transpose()
    };
    let span = DateSpan { from: date(&a.from)?, to: date(&a.to)? };
    require_input(&a.csv)?;

    let loaded = load_prices(&a.csv, span).map_err(data)?;
    for t in &loaded.dropped {
        eprintln!("dropped ticker {t}: missing prices");
    }
    let pt = &loaded.table;
    let count = window_count(pt.dates().len(), cfg.window);
    if count == 0 {
        return Err(data(anyhow!("{} dates are fewer than the window {}", pt.dates().len(), cfg.window)));
    }
    let graphs = parallel::with_workers(cfg.workers, || {
        (cfg.window - 1..pt.dates().len())
            .into_par_iter()
            .map(|end| network_at(pt, end, cfg.window, cfg.mode))
            .collect::<qwk_core::Result<Vec<_>>>()
    })
    .map_err(data)?;
    let networks = graphs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let ts = g.graph_id().unwrap_or_default().to_string();
            NetworkEntry { file: export::network_file_name(i, &ts), graph_id: ts.clone(), timestamp: ts }
        })
        .collect();
    let manifest = NetworkManifest {
        source: a.csv.display().to_string(),
        window: cfg.window,
        mode: cfg.mode.to_string(),
        weight_floor: NETWORK_WEIGHT_FLOOR,
        tickers: pt.tickers().to_vec(),
        dropped: loaded.dropped.clone(),
        networks,
    };
    export::save_networks(&a.out, &manifest, &graphs).map_err(data)?;
    println!("{} networks on {} tickers written to {}", graphs.len(), pt.tickers().len(), a.out.display());
    Ok(())
}

fn gram_cmd(cli: &Cli, a: &GramArgs) -> CmdResult {
    let mut flags = a.walk.settings();
    flags.kernel = a.kernel.clone();
    let mut cfg = resolve(cli, flags)?;
    require_input(&a.input.input)?;
    for out in [Some(&a.out), a.svm.as_ref(), a.labels_out.as_ref()].into_iter().flatten() {
        require_output(out)?;
    }

    let input = load_input(&a.input.input, a.input.format).map_err(data)?;
    if cfg.weight_floor.is_none() {
        cfg.weight_floor = input.weight_floor;
    }
    let pipeline = cfg.pipeline();
    let gram = parallel::with_workers(cfg.workers, || {
        let features = parallel::extract_features(&input.graphs, &pipeline)?;
        parallel::gram(&features, cfg.kernel, &pipeline)
    })
    .map_err(data)?;

    let policy = &gram.meta.policy;
    let reduced: Vec<String> = policy.reduced.iter().map(|(id, n, k)| format!("{id}:{n}->{k}")).collect();
    let header = vec![
        header_version(),
        format!("input={} graphs={} {}", a.input.input.display(), gram.len(), cfg.describe()),
        format!(
            "spanning_tree={} commute_weighted={} reduced=[{}] non_canonical=[{}]",
            policy.spanning_tree,
            policy.commute_weighted,
            reduced.join(" "),
            policy.non_canonical.join(" ")
        ),
    ];
    export::write_gram_csv(&a.out, &header, &gram.graph_ids, &gram.values).map_err(data)?;
    if a.svm.is_some() || a.labels_out.is_some() {
        let labels: Vec<String> = input
            .graphs
            .iter()
            .map(|g| g.class_label().map(String::from))
            .collect::<Option<_>>()
            .ok_or_else(|| data(anyhow!("some graphs have no class label")))?;
        if let Some(p) = &a.svm {
            export::write_precomputed_kernel(p, &labels, &gram.values).map_err(data)?;
        }
        if let Some(p) = &a.labels_out {
            export::write_labels(p, &labels).map_err(data)?;
        }
    }
    eprintln!(
        "{}x{} {} Gram written to {} ({} spanning trees, {} commute-weighted, {} reduced)",
        gram.len(),
        gram.len(),
        gram.meta.kernel,
        a.out.display(),
        policy.spanning_tree,
        policy.commute_weighted,
        policy.reduced.len()
    );
    Ok(())
}

fn kpca_cmd(cli: &Cli, a: &KpcaArgs) -> CmdResult {
    let cfg = resolve(cli, Settings { dims: a.dims, ..Settings::default() })?;
    require_input(&a.gram)?;
    require_output(&a.out)?;
    let table = export::read_gram_csv(&a.gram).map_err(data)?;
    if cfg.dims == 0 || cfg.dims > table.ids.len() {
        return Err(usage(anyhow!("cannot embed {} graphs into {} dimensions", table.ids.len(), cfg.dims)));
    }
    let emb = kpca(&table.values, &table.ids, cfg.dims).map_err(data)?;
    export::write_embedding_csv(&a.out, &emb).map_err(data)?;
    let explained: Vec<String> = emb.explained.iter().map(|e| format!("{e:.4}")).collect();
    eprintln!("explained share per component: {}; clamped {:.3e}", explained.join(" "), emb.clamped_magnitude);
    Ok(())
}

fn entropy_cmd(cli: &Cli, a: &EntropyArgs) -> CmdResult {
    let mut flags = a.walk.settings();
    flags.wl = Some(format!("{0}:{0}", a.level));
    let mut cfg = resolve(cli, flags)?;
    require_input(&a.input.input)?;
    require_output(&a.out)?;
    let input = load_input(&a.input.input, a.input.format).map_err(data)?;
    if cfg.weight_floor.is_none() {
        cfg.weight_floor = input.weight_floor;
    }
    let stamps: Vec<String> = input
        .timestamps
        .clone()
        .unwrap_or_else(|| input.graphs.iter().map(|g| g.graph_id().unwrap_or_default().to_string()).collect());
    let pipeline = cfg.pipeline();
    let features =
        parallel::with_workers(cfg.workers, || parallel::extract_features(&input.graphs, &pipeline)).map_err(data)?;
    let points: Vec<(String, &qwk_core::LabelDistribution)> =
        stamps.into_iter().zip(features.iter().map(|f| &f.distributions[0])).collect();
    let series = entropy_series(&points).map_err(data)?;
    export::write_entropy_csv(&a.out, &series).map_err(data)?;
    eprintln!("{} entropies written to {}", series.len(), a.out.display());
    Ok(())
}

fn sparsify_cmd(cli: &Cli, a: &SparsifyArgs) -> CmdResult {
    let mut cfg = resolve(cli, Settings { weight_floor: a.weight_floor, ..Settings::default() })?;
    require_input(&a.input.input)?;
    require_output(&a.out)?;
    let input = load_input(&a.input.input, a.input.format).map_err(data)?;
    if cfg.weight_floor.is_none() {
        cfg.weight_floor = input.weight_floor;
    }
    let pipeline = cfg.pipeline();
    let prepared =
        parallel::with_workers(cfg.workers, || parallel::prepare_all(&input.graphs, &pipeline)).map_err(data)?;
    let mut trees = Vec::with_capacity(prepared.len());
    let mut spanning = 0;
    for p in &prepared {
        if p.walk.branch() == SparsifyBranch::SpanningTree {
            spanning += 1;
        }
        let mut g = p.walk.to_weighted_graph().map_err(data)?.with_id(p.id.clone());
        if let Some(c) = &p.class_label {
            g = g.with_class(c.clone());
        }
        trees.push(g);
    }
    json::save_weighted_json(&trees, &a.out).map_err(data)?;
    eprintln!(
        "{} graphs: {} spanning trees, {} commute-weighted; written to {}",
        trees.len(),
        spanning,
        trees.len() - spanning,
        a.out.display()
    );
    Ok(())
}

fn smoke_cmd(cli: &Cli, a: &SmokeArgs) -> CmdResult {
    let cfg = resolve(cli, Settings { folds: a.folds, seed: a.seed, ..Settings::default() })?;
    require_input(&a.gram)?;
    require_input(&a.labels)?;
    let table = export::read_gram_csv(&a.gram).map_err(data)?;
    let labels = export::read_labels(&a.labels).map_err(data)?;
    if labels.len() != table.ids.len() {
        return Err(data(anyhow!("{} labels for {} graphs", labels.len(), table.ids.len())));
    }
    let report = kernel_1nn_cv(&table.values, &labels, cfg.folds, cfg.seed).map_err(usage)?;
    for (i, acc) in report.fold_accuracies.iter().enumerate() {
        println!("fold {:>2}: {:.2}%", i + 1, 100.0 * acc);
    }
    println!(
        "1-NN accuracy: {:.2} ± {:.2}% ({} folds, seed {})",
        100.0 * report.mean,
        100.0 * report.std_error,
        cfg.folds,
        cfg.seed
    );
    Ok(())
}

pub fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::IngestPrices(a) => ingest(cli, a),
        Command::Gram(a) => gram_cmd(cli, a),
        Command::Kpca(a) => kpca_cmd(cli, a),
        Command::Entropy(a) => entropy_cmd(cli, a),
        Command::Sparsify(a) => sparsify_cmd(cli, a),
        Command::ClassifySmoke(a) => smoke_cmd(cli, a),
    }
}

/// Parses arguments, runs the command and reports failures on stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let outcome = std::panic::catch_unwind(|| run(&cli)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_default();
        Err(Failure::Internal(anyhow!("internal error: {msg}")))
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.exit_code())
        }
    }
}
