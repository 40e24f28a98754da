use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use treemover::bound::{bound_curve, cumulative_accuracy, generalization_gap_bound, BoundParams};
use treemover::datagen::{generate, label_cycle_median, split, GenSpec, LabelSpec};
use treemover::io::{
    format_real, indexed_column_from_csv, indexed_column_to_csv, matrix_to_csv, parse_dataset,
    read_text, serialize_dataset, write_text, DatasetFormat,
};
use treemover::mpnn::{forward, lipschitz_bound, margin_loss, Architecture, MpnnModel};
use treemover::tmd::{cross_tmd, pairwise_tmd, set_distance, DepthWeights};
use treemover::transforms::{simulate, CountMode, ZetaSpec};
use treemover::wl::wl_distinguishes;
use treemover::{Error, Graph, GraphDataset};

#[derive(Parser)]
#[command(name = "treemover", version, about = "Tree Mover's Distance toolkit")]
struct Cli {
    /// Worker threads for parallel stages (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON object whose keys supply flags not given on the command line.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Suppress the per-stage log on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random dataset.
    Gen(GenArgs),
    /// Attach cycle-median labels.
    Label(LabelArgs),
    /// Split a dataset into train and test parts.
    Split(SplitArgs),
    /// Apply a graph transformation to every graph.
    Transform(TransformArgs),
    /// Report the first WL iteration that separates two graphs.
    Wl(WlArgs),
    /// Pairwise distance matrix of a dataset.
    Dist(DistArgs),
    /// Distance from each test graph to the training set.
    Xi(XiArgs),
    /// Run the reference network on a dataset.
    Mpnn(MpnnArgs),
    /// Evaluate the generalization bound.
    Bound(BoundArgs),
    /// Cumulative accuracy ordered by distance to the training set.
    Cumacc(CumaccArgs),
}

#[derive(Args)]
struct GenArgs {
    /// er:p=<p>, ba:m=<m> or sbm[:blocks=lo:hi,p_in=lo:hi,p_out=lo:hi].
    #[arg(long)]
    model: String,
    /// Inclusive node-count range lo:hi.
    #[arg(long, default_value = "35:55")]
    nodes: String,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long, default_value = "cycle-median")]
    task: String,
    /// hom, sub or basis.
    #[arg(long, default_value = "sub")]
    mode: String,
    #[arg(long, default_value = "3,4", value_delimiter = ',')]
    lengths: Vec<usize>,
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    seed: u64,
    /// Fraction of graphs placed in the training part.
    #[arg(long)]
    frac: f64,
    input: PathBuf,
    #[arg(long)]
    train_out: PathBuf,
    #[arg(long)]
    test_out: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    zeta: String,
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct WlArgs {
    #[arg(long)]
    iters: usize,
    a: PathBuf,
    b: PathBuf,
}

#[derive(Args)]
struct DistanceArgs {
    #[arg(long)]
    depth: usize,
    /// const:<w> or levels:<w2>,<w3>,...
    #[arg(long, default_value = "const:1.0")]
    weight: String,
    #[arg(long)]
    zeta: Option<String>,
}

#[derive(Args)]
struct DistArgs {
    #[command(flatten)]
    distance: DistanceArgs,
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct XiArgs {
    #[command(flatten)]
    distance: DistanceArgs,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Per-test minima as an indexed CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MpnnArgs {
    /// Weight file to load.
    #[arg(long, conflicts_with_all = ["seed", "arch"])]
    weights: Option<PathBuf>,
    /// Seed for generated weights.
    #[arg(long, requires = "arch")]
    seed: Option<u64>,
    /// T,width[,width...]: layer count and node width per layer.
    #[arg(long, requires = "seed")]
    arch: Option<String>,
    #[arg(long, default_value_t = 8)]
    hidden: usize,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Write the weights in use to this file.
    #[arg(long)]
    weights_out: Option<PathBuf>,
    #[arg(long)]
    graphs: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Report the margin loss at this margin (needs labels).
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    params: PathBuf,
    /// Indexed CSV of per-test minima; they are sorted before use.
    #[arg(long)]
    dist_file: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CumaccArgs {
    #[arg(long)]
    dist: PathBuf,
    /// Indexed CSV of 0/1 correctness flags.
    #[arg(long)]
    correct: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

struct Log {
    quiet: bool,
}

impl Log {
    fn stage(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("treemover: {}", msg.as_ref());
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 1,
        Error::Parse { .. } | Error::Validation { .. } | Error::Contract(_) => 3,
        Error::Resource(_) => 4,
    }
}

fn main() -> ExitCode {
    let argv = match apply_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("treemover: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("treemover: --threads must be positive");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool is configured once");
    }
    let log = Log { quiet: cli.quiet };
    match run(cli.command, &log) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("treemover: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Appends `--key value` for every config key whose flag is absent from
/// the command line.
fn apply_config(mut argv: Vec<OsString>) -> treemover::Result<Vec<OsString>> {
    let pos = argv.iter().position(|a| a == "--config");
    let path = match pos.and_then(|i| argv.get(i + 1)) {
        Some(p) => PathBuf::from(p),
        None => {
            let inline = argv
                .iter()
                .find_map(|a| a.to_str()?.strip_prefix("--config=").map(PathBuf::from));
            match inline {
                Some(p) => p,
                None => return Ok(argv),
            }
        }
    };
    let text = read_text(&path)?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let obj = doc.as_object().ok_or_else(|| Error::Parse {
        line: 1,
        message: "config must be a JSON object".into(),
    })?;
    let given: Vec<String> = argv
        .iter()
        .filter_map(|a| a.to_str())
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    for (key, value) in obj {
        let flag = key.replace('_', "-");
        if flag == "config" || given.contains(&flag) {
            continue;
        }
        let text = match value {
            Value::Bool(true) => {
                argv.push(format!("--{flag}").into());
                continue;
            }
            Value::Bool(false) | Value::Null => continue,
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            Value::Object(_) => {
                return Err(Error::Contract(format!("config key {key:?} has an object value")))
            }
        };
        argv.push(format!("--{flag}").into());
        argv.push(text.into());
    }
    Ok(argv)
}

fn load(path: &Path) -> treemover::Result<GraphDataset> {
    parse_dataset(path, DatasetFormat::from_path(path))
}

fn save(ds: &GraphDataset, path: &Path) -> treemover::Result<()> {
    serialize_dataset(ds, path, DatasetFormat::from_path(path))
}

fn single_graph(path: &Path) -> treemover::Result<Graph> {
    let ds = load(path)?;
    if ds.len() != 1 {
        return Err(Error::Contract(format!(
            "{} holds {} graphs, expected exactly one",
            path.display(),
            ds.len()
        )));
    }
    Ok(ds.into_graphs().remove(0))
}

fn parse_pair(s: &str) -> treemover::Result<(usize, usize)> {
    let bad = || Error::Contract(format!("expected lo:hi, got {s:?}"));
    match s.split_once(':') {
        Some((a, b)) => Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)),
        None => s.parse().map(|v| (v, v)).map_err(|_| bad()),
    }
}

fn distance_setup(a: &DistanceArgs) -> treemover::Result<(DepthWeights, Option<ZetaSpec>)> {
    let w: DepthWeights = a.weight.parse()?;
    let zeta = a.zeta.as_deref().map(str::parse).transpose()?;
    Ok((w, zeta))
}

fn parse_arch(s: &str, hidden: usize, classes: usize, sample: Option<&Graph>) -> treemover::Result<Architecture> {
    let bad = || Error::Contract(format!("expected T,width[,width...], got {s:?}"));
    let nums: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<treemover::Result<_>>()?;
    let (&layers, widths) = nums.split_first().ok_or_else(bad)?;
    let widths = match widths {
        [] if layers == 0 => vec![],
        [w] => vec![*w; layers],
        ws if ws.len() == layers => ws.to_vec(),
        _ => return Err(bad()),
    };
    Ok(Architecture {
        input_dim: sample.map_or(0, Graph::feature_dim),
        edge_dim: sample.and_then(Graph::edge_dim).unwrap_or(0),
        widths,
        hidden,
        classes,
    })
}

fn run(command: Command, log: &Log) -> treemover::Result<()> {
    match command {
        Command::Gen(a) => {
            let spec = GenSpec {
                model: a.model.parse()?,
                nodes: parse_pair(&a.nodes)?,
                count: a.count,
                seed: a.seed,
            };
            let ds = generate(&spec)?;
            save(&ds, &a.out)?;
            log.stage(format!("gen: wrote {} graphs to {}", ds.len(), a.out.display()));
        }
        Command::Label(a) => {
            if a.task != "cycle-median" {
                return Err(Error::Contract(format!("unknown labeling task {:?}", a.task)));
            }
            let mode: CountMode = a.mode.parse()?;
            let ds = load(&a.input)?;
            let labeled = label_cycle_median(&ds, &LabelSpec { mode, lengths: a.lengths })?;
            save(&labeled, &a.out)?;
            let ones = labeled.labels().map_or(0, |l| l.iter().filter(|&&y| y == 1).count());
            log.stage(format!("label: {ones} of {} graphs labeled 1", labeled.len()));
        }
        Command::Split(a) => {
            let ds = load(&a.input)?;
            let (train, test) = split(&ds, a.seed, a.frac)?;
            save(&train, &a.train_out)?;
            save(&test, &a.test_out)?;
            log.stage(format!("split: {} train, {} test", train.len(), test.len()));
        }
        Command::Transform(a) => {
            let zeta: ZetaSpec = a.zeta.parse()?;
            let ds = load(&a.input)?;
            let out = ds.map_graphs(|g| simulate(g, &zeta))?;
            save(&out, &a.out)?;
            log.stage(format!("transform: applied {zeta} to {} graphs", out.len()));
        }
        Command::Wl(a) => {
            let g = single_graph(&a.a)?;
            let h = single_graph(&a.b)?;
            match wl_distinguishes(&g, &h, a.iters) {
                Some(t) => println!("{t}"),
                None => println!("indistinguishable"),
            }
        }
        Command::Dist(a) => {
            let (w, zeta) = distance_setup(&a.distance)?;
            let ds = load(&a.input)?;
            let m = pairwise_tmd(&ds, a.distance.depth, &w, zeta.as_ref())?;
            write_text(&a.out, &matrix_to_csv(&m.values))?;
            log.stage(format!("dist: {0}x{0} matrix to {1}", ds.len(), a.out.display()));
        }
        Command::Xi(a) => {
            let (w, zeta) = distance_setup(&a.distance)?;
            let train = load(&a.train)?;
            let test = load(&a.test)?;
            let cross = cross_tmd(test.graphs(), train.graphs(), a.distance.depth, &w, zeta.as_ref())?;
            let sd = set_distance(&cross)?;
            println!("{}", format_real(sd.xi));
            if let Some(out) = &a.out {
                write_text(out, &indexed_column_to_csv("test,min_distance", &sd.minima))?;
            }
            log.stage(format!("xi: {} test graphs against {} train graphs", test.len(), train.len()));
        }
        Command::Mpnn(a) => run_mpnn(a, log)?,
        Command::Bound(a) => {
            let text = read_text(&a.params)?;
            let p: BoundParams = serde_json::from_str(&text).map_err(|e| Error::Parse {
                line: e.line(),
                message: e.to_string(),
            })?;
            match &a.dist_file {
                Some(dist) => {
                    let mut minima = indexed_column_from_csv(&read_text(dist)?)?;
                    minima.sort_by(f64::total_cmp);
                    let curve = bound_curve(&minima, &p)?;
                    let mut csv = String::from("distance,bound\n");
                    for (d, b) in minima.iter().zip(&curve) {
                        csv.push_str(&format!("{},{}\n", format_real(*d), format_real(*b)));
                    }
                    let out = a
                        .out
                        .as_ref()
                        .ok_or_else(|| Error::Contract("--dist-file needs --out".into()))?;
                    write_text(out, &csv)?;
                    log.stage(format!("bound: {} curve points to {}", curve.len(), out.display()));
                }
                None => {
                    let b = generalization_gap_bound(&p)?;
                    println!("{}", format_real(b));
                    if let Some(out) = &a.out {
                        write_text(out, &format!("xi,bound\n{},{}\n", format_real(p.xi), format_real(b)))?;
                    }
                }
            }
        }
        Command::Cumacc(a) => {
            let dist = indexed_column_from_csv(&read_text(&a.dist)?)?;
            let flags = indexed_column_from_csv(&read_text(&a.correct)?)?;
            let correct: Vec<bool> = flags.iter().map(|&f| f != 0.0).collect();
            let acc = cumulative_accuracy(&dist, &correct)?;
            write_text(&a.out, &indexed_column_to_csv("rank,accuracy", &acc))?;
            log.stage(format!("cumacc: {} points to {}", acc.len(), a.out.display()));
        }
    }
    Ok(())
}

fn run_mpnn(a: MpnnArgs, log: &Log) -> treemover::Result<()> {
    let ds = load(&a.graphs)?;
    let model = match (&a.weights, &a.arch, a.seed) {
        (Some(path), _, _) => MpnnModel::from_json(&read_text(path)?)?,
        (None, Some(arch), Some(seed)) => {
            let arch = parse_arch(arch, a.hidden, a.classes, ds.graphs().first())?;
            MpnnModel::random(&arch, seed)?
        }
        _ => return Err(Error::Contract("give --weights, or --seed with --arch".into())),
    };
    if let Some(path) = &a.weights_out {
        write_text(path, &model.to_json())?;
    }
    let logits = ds
        .graphs()
        .iter()
        .map(|g| forward(&model, g))
        .collect::<treemover::Result<Vec<_>>>()?;
    write_text(&a.out, &matrix_to_csv(&logits))?;
    log.stage(format!(
        "mpnn: {} graphs, lipschitz bound {}",
        ds.len(),
        format_real(lipschitz_bound(&model))
    ));
    if let Some(gamma) = a.gamma {
        let labels = ds
            .labels()
            .ok_or_else(|| Error::Contract("--gamma needs a labeled dataset".into()))?;
        println!("{}", format_real(margin_loss(&logits, labels, gamma)?));
    }
    Ok(())
}
