mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use ndarray::Array2;
use serde::Serialize;

use islandize::baseline::{run_strategy, Strategy, DEFAULT_BUFFER_WORDS};
use islandize::consumer::WindowPolicy;
use islandize::engine::{
    run_inference, seeded_layers, synthetic_features, CostReport, LayerSpec, Normalization,
};
use islandize::graph::{
    emit_spy, generate_sbm, load_edge_list, write_edge_list, CsrGraph, IngestOptions,
    NodePermutation, SbmParams, SpyOutput, DEFAULT_SPY_SIDE,
};
use islandize::locator::{islandize, Decay, IslandizationResult, LocatorMode};
use islandize::memory::MemoryReport;

use config::RunConfig;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Io(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Io(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
            Failure::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<islandize::Error> for Failure {
    fn from(e: islandize::Error) -> Self {
        use islandize::Error as E;
        let msg = e.to_string();
        match e {
            E::Argument(_) | E::Capacity(_) => Failure::Config(msg),
            E::Io { .. } | E::Parse { .. } | E::Range { .. } | E::InvalidGraph(_) => {
                Failure::Io(msg)
            }
            E::Shape(_) | E::Contract(_) => Failure::Internal(msg),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

#[derive(Parser)]
#[command(
    name = "islandize",
    version,
    about = "Hub/island graph restructuring and island-wise GCN inference"
)]
struct Cli {
    /// TOML file with [locator], [consumer] and [inference] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for the locator and consumer.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted hub/island graph.
    Gen(GenArgs),
    /// Restructure a graph into hubs and islands.
    Islandize(IslandizeArgs),
    /// Run a GCN layer stack through the island consumer.
    Infer(InferArgs),
    /// Count off-chip traffic of one aggregation order.
    Count(CountArgs),
    /// Plot the adjacency matrix, optionally permuted by an islandization.
    Spy(SpyArgs),
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    /// Ids in the file start at 1.
    #[arg(long)]
    one_indexed: bool,
    /// Declared node count (default: largest id + 1).
    #[arg(long)]
    num_nodes: Option<usize>,
}

impl InputArgs {
    fn load(&self) -> Outcome<CsrGraph> {
        let opts = IngestOptions {
            one_indexed: self.one_indexed,
            num_nodes: self.num_nodes,
        };
        let g = load_edge_list(&self.input, &opts)?;
        info!(
            "loaded {}: {} nodes, {} edges",
            self.input.display(),
            g.num_nodes(),
            g.num_edges()
        );
        Ok(g)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Seq,
    Par,
}

#[derive(Args)]
struct LocatorArgs {
    #[arg(long)]
    th_init: Option<usize>,
    /// Halve the threshold each round (the default decay).
    #[arg(long)]
    decay_halve: bool,
    #[arg(long)]
    c_max: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    seed: Option<u64>,
}

impl LocatorArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let l = &mut cfg.locator;
        if self.th_init.is_some() {
            l.th_init = self.th_init;
        }
        if self.decay_halve {
            l.decay = Decay::HALVE;
        }
        if let Some(c) = self.c_max {
            l.c_max = c;
        }
        if let Some(m) = self.mode {
            l.mode = match m {
                Mode::Seq => LocatorMode::Sequential,
                Mode::Par => LocatorMode::Parallel,
            };
        }
        if let Some(s) = self.seed {
            l.seed = s;
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Blocks and block size, e.g. `4x6`.
    #[arg(long, value_parser = parse_sbm)]
    sbm: (usize, usize),
    #[arg(long)]
    hubs: usize,
    #[arg(long, default_value_t = 1.0)]
    p_in: f64,
    /// Hubs wired to each block.
    #[arg(long, default_value_t = 1)]
    hub_attach: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the planted blocks and hubs as JSON.
    #[arg(long)]
    planted: Option<PathBuf>,
}

fn parse_sbm(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once('x')
        .ok_or_else(|| format!("expected BLOCKSxSIZE, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

#[derive(Args)]
struct IslandizeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    locator: LocatorArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// PGM spy plot of the permuted adjacency.
    #[arg(long)]
    spy: Option<PathBuf>,
    #[arg(long)]
    spy_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Sym,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    MinCost,
    PaperThreshold,
}

#[derive(Args)]
struct InferArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    locator: LocatorArgs,
    /// Comma-separated layer widths, input first.
    #[arg(long)]
    layers: String,
    #[arg(long, value_enum)]
    normalize: Option<NormArg>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    window_policy: Option<PolicyArg>,
    /// One CSV weight matrix per layer, comma-separated; seeded otherwise.
    #[arg(long, value_delimiter = ',')]
    weights: Vec<PathBuf>,
    /// CSV feature matrix; seeded synthetic features otherwise.
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    weight_seed: u64,
    /// Feed islands to the consumer as the locator finds them.
    #[arg(long)]
    streaming: bool,
    #[arg(long)]
    buffer_words: Option<u64>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// CSV of the final layer output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    locator: LocatorArgs,
    #[arg(long, value_parser = parse_strategy)]
    strategy: Strategy,
    #[arg(long, default_value_t = DEFAULT_BUFFER_WORDS)]
    buffer_words: u64,
    /// Width of the combined feature rows.
    #[arg(long, default_value_t = 16)]
    width: usize,
    #[arg(long, default_value_t = 0)]
    feature_seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: islandize::Error| e.to_string())
}

#[derive(Args)]
struct SpyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Islandization JSON giving the row/column order.
    #[arg(long)]
    result: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SPY_SIDE)]
    side: usize,
}

fn create(path: &Path) -> Outcome<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(format!("creating {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    let mut f = create(path)?;
    f.write_all(text.as_bytes())
        .and_then(|_| f.flush())
        .map_err(|e| Failure::Io(format!("writing {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Outcome {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

fn read_csv_matrix(path: &Path) -> Outcome<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        if *cols.get_or_insert(rec.len()) != rec.len() {
            return Err(Failure::Io(format!(
                "{}: row {} has {} fields",
                path.display(),
                i + 1,
                rec.len()
            )));
        }
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|_| {
                Failure::Io(format!(
                    "{}: row {}: bad number {field:?}",
                    path.display(),
                    i + 1
                ))
            })?;
            values.push(v);
        }
        rows += 1;
    }
    Array2::from_shape_vec((rows, cols.unwrap_or(0)), values)
        .map_err(|e| Failure::Internal(e.to_string()))
}

fn write_csv_matrix(path: &Path, m: &Array2<f64>) -> Outcome {
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in m.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    w.flush()
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn gen(args: &GenArgs) -> Outcome {
    let (num_islands, island_size) = args.sbm;
    let p = generate_sbm(&SbmParams {
        num_islands,
        island_size,
        num_hubs: args.hubs,
        p_in: args.p_in,
        hub_attach: args.hub_attach,
        seed: args.seed,
    })?;
    let mut out = create(&args.out)?;
    write_edge_list(&p.graph, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Io(format!("writing {}: {e}", args.out.display())))?;
    if let Some(path) = &args.planted {
        #[derive(Serialize)]
        struct Planted<'a> {
            blocks: &'a [Vec<usize>],
            hubs: &'a [usize],
            block_hubs: &'a [Vec<usize>],
        }
        write_json(
            path,
            &Planted {
                blocks: &p.planted.blocks,
                hubs: &p.planted.hubs,
                block_hubs: &p.planted.block_hubs,
            },
        )?;
    }
    println!(
        "generated {} nodes, {} edges ({} blocks of {}, {} hubs) -> {}",
        p.graph.num_nodes(),
        p.graph.num_edges(),
        num_islands,
        island_size,
        args.hubs,
        args.out.display()
    );
    Ok(())
}

fn summarize(r: &IslandizationResult) {
    println!(
        "{} hubs, {} islands covering {} nodes, {} inter-hub edges, {} rounds, {} adjacency reads",
        r.hubs.len(),
        r.islands.len(),
        r.num_island_nodes(),
        r.inter_hub_edges.len(),
        r.rounds.len(),
        r.adjacency_reads
    );
}

fn run_islandize(args: &IslandizeArgs, cfg: &RunConfig) -> Outcome {
    let g = args.input.load()?;
    let r = islandize(&g, &cfg.locator)?;
    summarize(&r);
    if let Some(path) = &args.out {
        write_text(path, &(r.to_json() + "\n"))?;
    }
    if args.spy.is_some() || args.spy_csv.is_some() {
        let out = SpyOutput {
            csv: args.spy_csv.clone(),
            pgm: args.spy.clone(),
            side: DEFAULT_SPY_SIDE,
        };
        emit_spy(&g, &r.permutation()?, &out)?;
    }
    Ok(())
}

fn parse_layers(s: &str) -> Outcome<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Failure::Config(format!("bad layer width {t:?} in {s:?}")))
        })
        .collect()
}

fn layer_specs(args: &InferArgs, dims: &[usize], norm: Normalization) -> Outcome<Vec<LayerSpec>> {
    let mut specs = seeded_layers(dims, norm, args.weight_seed)?;
    if args.weights.is_empty() {
        return Ok(specs);
    }
    if args.weights.len() != specs.len() {
        return Err(Failure::Config(format!(
            "{} weight files for {} layers",
            args.weights.len(),
            specs.len()
        )));
    }
    for (spec, path) in specs.iter_mut().zip(&args.weights) {
        let w = read_csv_matrix(path)?;
        if w.dim() != spec.weight.dim() {
            return Err(Failure::Config(format!(
                "{} is {}x{}, layer needs {}x{}",
                path.display(),
                w.nrows(),
                w.ncols(),
                spec.in_dim(),
                spec.out_dim()
            )));
        }
        spec.weight = w;
    }
    Ok(specs)
}

#[derive(Serialize)]
struct InferReport<'a> {
    input: String,
    num_nodes: usize,
    nnz: usize,
    layers: &'a [usize],
    normalize: Normalization,
    k: usize,
    window_policy: WindowPolicy,
    cost: &'a CostReport,
}

fn infer(args: &InferArgs, cfg: &mut RunConfig) -> Outcome {
    if let Some(k) = args.k {
        cfg.consumer.k = k;
    }
    if let Some(p) = args.window_policy {
        cfg.consumer.window_policy = match p {
            PolicyArg::MinCost => WindowPolicy::MinCost,
            PolicyArg::PaperThreshold => WindowPolicy::PaperThreshold,
        };
    }
    if args.streaming {
        cfg.inference.streaming = true;
    }
    if let Some(b) = args.buffer_words {
        cfg.inference.buffer_words = b;
    }
    cfg.validate()?;
    let norm = match args.normalize {
        Some(NormArg::None) => Normalization::None,
        _ => Normalization::Sym,
    };
    let dims = parse_layers(&args.layers)?;
    let g = args.input.load()?;
    let specs = layer_specs(args, &dims, norm)?;
    let x = match &args.features {
        Some(path) => read_csv_matrix(path)?,
        None => synthetic_features(g.num_nodes(), dims[0], args.weight_seed),
    };
    if x.dim() != (g.num_nodes(), dims[0]) {
        return Err(Failure::Config(format!(
            "features are {}x{}, expected {}x{}",
            x.nrows(),
            x.ncols(),
            g.num_nodes(),
            dims[0]
        )));
    }
    let inf = run_inference(
        &g,
        x.view(),
        &specs,
        &cfg.locator,
        &cfg.consumer,
        &cfg.inference,
    )?;
    summarize(&inf.islands);
    let r = &inf.report;
    for (l, layer) in r.layers.iter().enumerate() {
        let e = &layer.ledger;
        println!(
            "layer {l} {}->{}: {} baseline adds, {} adds + {} subs + {} formation, pruning {:.2}%, {} MACs",
            layer.in_dim,
            layer.out_dim,
            e.baseline_adds,
            e.actual_adds,
            e.actual_subs,
            e.preagg_formation_adds,
            100.0 * e.pruning_rate,
            e.combination_macs
        );
    }
    println!(
        "aggregation share {:.2}% (without reuse {:.2}%)",
        100.0 * r.aggregation_share,
        100.0 * r.baseline_aggregation_share
    );
    if let Some(path) = &args.report {
        write_json(
            path,
            &InferReport {
                input: args.input.input.display().to_string(),
                num_nodes: g.num_nodes(),
                nnz: g.nnz(),
                layers: &dims,
                normalize: norm,
                k: cfg.consumer.k,
                window_policy: cfg.consumer.window_policy,
                cost: r,
            },
        )?;
    }
    if let Some(path) = &args.output {
        write_csv_matrix(path, &inf.output)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CountReport<'a> {
    input: String,
    num_nodes: usize,
    nnz: usize,
    width: usize,
    memory: &'a MemoryReport,
}

fn count(args: &CountArgs, cfg: &RunConfig) -> Outcome {
    cfg.validate()?;
    let g = args.input.load()?;
    let xw = synthetic_features(g.num_nodes(), args.width, args.feature_seed);
    let islands = if args.strategy == Strategy::Island {
        let r = islandize(&g, &cfg.locator)?;
        summarize(&r);
        Some(r)
    } else {
        None
    };
    let ctx = islands
        .as_ref()
        .map(|r| (r, &cfg.consumer, cfg.locator.c_max));
    let (_, report) = run_strategy(&g, xw.view(), args.strategy, ctx, args.buffer_words)?;
    println!(
        "{}: {} words read, {} words written ({} word buffer)",
        report.strategy, report.reads_words, report.writes_words, report.buffer_capacity_words
    );
    for (m, c) in &report.breakdown {
        println!(
            "  {m:?}: read {} written {} misses {} hits {}",
            c.reads_words, c.writes_words, c.read_misses, c.hits
        );
    }
    if let Some(path) = &args.out {
        write_json(
            path,
            &CountReport {
                input: args.input.input.display().to_string(),
                num_nodes: g.num_nodes(),
                nnz: g.nnz(),
                width: args.width,
                memory: &report,
            },
        )?;
    }
    Ok(())
}

fn spy(args: &SpyArgs) -> Outcome {
    if args.out.is_none() && args.csv.is_none() {
        return Err(Failure::Config("spy needs --out or --csv".into()));
    }
    let g = args.input.load()?;
    let perm = match &args.result {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("reading {}: {e}", path.display())))?;
            IslandizationResult::from_json(&text)?.permutation()?
        }
        None => NodePermutation::identity(g.num_nodes()),
    };
    if perm.len() != g.num_nodes() {
        return Err(Failure::Config(format!(
            "ordering covers {} nodes, graph has {}",
            perm.len(),
            g.num_nodes()
        )));
    }
    emit_spy(
        &g,
        &perm,
        &SpyOutput {
            csv: args.csv.clone(),
            pgm: args.out.clone(),
            side: args.side,
        },
    )?;
    println!("{} non-zeros plotted", g.nnz());
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if let Some(t) = cfg.threads {
        cfg.locator.p1 = t;
        cfg.locator.p2 = t;
        cfg.consumer.num_workers = t;
    }
    match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Islandize(a) => {
            a.locator.apply(&mut cfg);
            cfg.validate()?;
            run_islandize(a, &cfg)
        }
        Command::Infer(a) => {
            a.locator.apply(&mut cfg);
            infer(a, &mut cfg)
        }
        Command::Count(a) => {
            a.locator.apply(&mut cfg);
            count(a, &cfg)
        }
        Command::Spy(a) => spy(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ISLANDIZE_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("islandize: {f}");
            ExitCode::from(f.code())
        }
    }
}
