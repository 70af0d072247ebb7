//! The `trf` command line: simulate, observe, detect, estimate, fit,
//! logit, scc, sample and closure.
//!
//! Exit status is 0 on success, 1 on usage errors and 2 on data errors.
//! Every command writes a `manifest.json` next to its outputs recording the
//! inputs, seed and parameter values needed to replay it.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use trf_core::detect::{
    detect_from_snapshots, detect_trf, estimate_from_tally, estimate_p_endo, estimate_p_exo, qualifying_deliveries,
    retweet_groups, GroupOptions, GroupTally, Stratum,
};
use trf_core::infer::{fit_pq, logistic_fit, odds_ratios, FitInput, FitSemantics};
use trf_core::sim::{run_simulation, snapshot_observer, SimConfig};
use trf_core::topology::{scc_fraction_curve, tarjan_scc, trf_closure, SamplingMethod, DEFAULT_RESTART};
use trf_core::{EventLog, TemporalDigraph, UserId};

use crate::config::{build_sim_config, load_graph, parse_number, Entries};
use crate::jsonl::{fmt_f64, read_log, read_snapshots, write_log, write_snapshots};
use crate::tables::{
    read_estimates, read_features, write_curve, write_detections, write_estimates, write_features, write_fit,
    write_graph, write_ground_truth, write_odds,
};
use crate::FormatError;

#[derive(Parser, Debug)]
#[command(name = "trf", version, about = "Tweet/retweet/follow simulation and analysis")]
pub struct Cli {
    /// Run seed (overrides the config's `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grouping and follow window in seconds (overrides the config's `delta`).
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "trf-out")]
    pub out: PathBuf,
    /// Configuration file; unset keys fall back to the bundled defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Independent repetitions (simulate: runs with seeds seed, seed+1, ...;
    /// sample: samples per size).
    #[arg(long, global = true)]
    pub repetitions: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the simulator: event log, ground truth and graphs.
    Simulate,
    /// Poll follower lists from an event log.
    Observe(LogInput),
    /// Detect retweet-driven follows from a log (or from snapshots).
    Detect(DetectArgs),
    /// Retweet-group follow probabilities and the exogenous/endogenous
    /// estimators.
    Estimate(EstimateArgs),
    /// Fit the observation/follow model to an estimate table.
    Fit(FitArgs),
    /// Logistic regression odds ratios from a feature table.
    Logit(LogitArgs),
    /// Strongly connected components of a graph.
    Scc(GraphInput),
    /// Largest-SCC fraction of weakly connected samples by sample size.
    Sample(SampleArgs),
    /// Follow everything reachable: the closure fixed point.
    Closure(GraphInput),
}

#[derive(Args, Debug)]
pub struct LogInput {
    /// Event log (JSON Lines).
    #[arg(long)]
    pub log: PathBuf,
    /// Initial graph CSV.
    #[arg(long)]
    pub graph: PathBuf,
}

#[derive(Args, Debug)]
pub struct GraphInput {
    /// Graph CSV (`follower,followee,created_at`).
    #[arg(long)]
    pub graph: PathBuf,
}

#[derive(Args, Debug)]
pub struct DetectArgs {
    #[command(flatten)]
    pub input: LogInput,
    /// Detect from polled snapshots instead of follow events.
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: LogInput,
    /// One pooled row per stratum instead of one row per group size.
    #[arg(long)]
    pub pooled: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Semantics {
    /// Rows count truncated retweet groups (the `estimate` output).
    Truncated,
    /// Rows count follows after at most n retweets.
    AtMostN,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Estimate table CSV.
    #[arg(long)]
    pub estimates: PathBuf,
    #[arg(long, value_enum, default_value = "truncated")]
    pub semantics: Semantics,
}

#[derive(Args, Debug)]
pub struct LogitArgs {
    /// Feature table CSV whose last column is `label`.
    #[arg(long)]
    pub features: PathBuf,
    /// Confidence level of the intervals.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Method {
    RandomWalk,
    Snowball,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Ascending sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, value_enum, default_value = "random-walk")]
    pub method: Method,
    /// Random-walk restart probability.
    #[arg(long, default_value_t = DEFAULT_RESTART)]
    pub restart: f64,
}

/// Failure of a command run.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn data<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Data(format!("{context}: {e}"))
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            1
        }
        Err(CliError::Data(m)) => {
            eprintln!("error: {m}");
            2
        }
    }
}

struct Context {
    entries: Entries,
    base: PathBuf,
    config_path: Option<PathBuf>,
}

impl Context {
    fn load(cli: &Cli) -> Result<Self, CliError> {
        let (text, base) = match &cli.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(data(&p.display().to_string()))?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (text, base)
            }
            None => (String::new(), PathBuf::from(".")),
        };
        let mut entries = Entries::with_defaults(&text).map_err(|e| match &cli.config {
            Some(p) => CliError::Data(format!("{}: {e}", p.display())),
            None => CliError::Data(e.to_string()),
        })?;
        if let Some(seed) = cli.seed {
            entries.set("seed", seed.to_string());
        }
        if let Some(delta) = cli.delta {
            if !(delta > 0.0 && delta.is_finite()) {
                return Err(CliError::Usage("--delta must be a positive number of seconds".into()));
            }
            entries.set("delta", fmt_f64(delta));
        }
        Ok(Context { entries, base, config_path: cli.config.clone() })
    }

    fn number(&self, key: &str) -> Result<f64, CliError> {
        self.entries
            .get(key)
            .and_then(parse_number)
            .ok_or_else(|| CliError::Data(format!("config key `{key}` must be a number")))
    }

    fn seed(&self) -> Result<u64, CliError> {
        self.entries
            .get("seed")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CliError::Data("config key `seed` must be an unsigned integer".into()))
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    let f = File::create(&path).map_err(data(&path.display().to_string()))?;
    Ok(BufWriter::new(f))
}

fn open_log(path: &Path) -> Result<EventLog, CliError> {
    let f = File::open(path).map_err(data(&path.display().to_string()))?;
    let log = read_log(BufReader::new(f)).map_err(|e| e.in_file(path))?;
    log.validate().map_err(data(&path.display().to_string()))?;
    Ok(log)
}

fn open_graph(path: &Path) -> Result<TemporalDigraph, CliError> {
    Ok(load_graph(path)?)
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

struct Manifest {
    fields: Map<String, Value>,
}

impl Manifest {
    fn new(command: &str, ctx: &Context) -> Self {
        let mut fields = Map::new();
        fields.insert("tool".into(), json!("trf"));
        fields.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        fields.insert("command".into(), json!(command));
        let config: Map<String, Value> = ctx.entries.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        fields.insert("config".into(), Value::Object(config));
        fields.insert("config_file".into(), json!(ctx.config_path.as_deref().map(path_str)));
        Manifest { fields }
    }

    fn set(&mut self, key: &str, value: Value) -> &mut Self {
        self.fields.insert(key.into(), value);
        self
    }

    fn write(&self, dir: &Path) -> Result<(), CliError> {
        let mut w = create(dir, "manifest.json")?;
        let text = serde_json::to_string_pretty(&Value::Object(self.fields.clone())).expect("manifest serializes");
        writeln!(w, "{text}")?;
        w.flush()?;
        Ok(())
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let ctx = Context::load(cli)?;
    fs::create_dir_all(&cli.out).map_err(data(&path_str(&cli.out)))?;
    match &cli.command {
        Command::Simulate => simulate(cli, &ctx),
        Command::Observe(a) => observe(cli, &ctx, a),
        Command::Detect(a) => detect(cli, &ctx, a),
        Command::Estimate(a) => estimate(cli, &ctx, a),
        Command::Fit(a) => fit(cli, &ctx, a),
        Command::Logit(a) => logit(cli, &ctx, a),
        Command::Scc(a) => scc(cli, &ctx, a),
        Command::Sample(a) => sample(cli, &ctx, a),
        Command::Closure(a) => closure(cli, &ctx, a),
    }
}

fn simulate_one(cfg: &SimConfig, dir: &Path, ctx: &Context) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(data(&path_str(dir)))?;
    let out = run_simulation(cfg).map_err(data("simulate"))?;
    write_log(out.log.events(), create(dir, "events.jsonl")?)?;
    write_ground_truth(&out.truth, create(dir, "ground_truth.csv")?)?;
    write_graph(&cfg.initial_graph, create(dir, "initial_graph.csv")?)?;
    write_graph(&out.final_graph, create(dir, "final_graph.csv")?)?;
    let s = &out.stats;
    let mut m = Manifest::new("simulate", ctx);
    m.set("seed", json!(cfg.seed))
        .set(
            "outputs",
            json!(["events.jsonl", "ground_truth.csv", "initial_graph.csv", "final_graph.csv"]),
        )
        .set(
            "stats",
            json!({
                "tweets": s.tweets,
                "retweets": s.retweets,
                "deliveries": s.deliveries,
                "eligible_deliveries": s.eligible_deliveries,
                "groups_nonreciprocal": s.groups_opened[0],
                "groups_reciprocal": s.groups_opened[1],
                "trf_follows": s.trf_follows,
                "exo_follows": s.exo_follows,
                "exo_suppressed": s.exo_suppressed,
            }),
        );
    m.write(dir)
}

fn simulate(cli: &Cli, ctx: &Context) -> Result<(), CliError> {
    let base = build_sim_config(&ctx.entries, &ctx.base)?;
    let reps = cli.repetitions.unwrap_or(1);
    if reps == 0 {
        return Err(CliError::Usage("--repetitions must be positive".into()));
    }
    if reps == 1 {
        return simulate_one(&base, &cli.out, ctx);
    }
    // seeds seed, seed+1, ...; each run in its own directory
    let runs: Vec<(u64, PathBuf)> = (0..reps as u64)
        .map(|i| (base.seed.wrapping_add(i), cli.out.join(format!("run-{i:04}"))))
        .collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(reps);
    let results: Vec<Result<(), CliError>> = std::thread::scope(|scope| {
        let chunks: Vec<Vec<&(u64, PathBuf)>> = (0..workers)
            .map(|w| runs.iter().skip(w).step_by(workers).collect())
            .collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                scope.spawn(move || {
                    chunk
                        .into_iter()
                        .map(|(seed, dir)| {
                            let mut entries = ctx.entries.clone();
                            entries.set("seed", seed.to_string());
                            let cfg = build_sim_config(&entries, &ctx.base)?;
                            let sub = Context { entries, base: ctx.base.clone(), config_path: ctx.config_path.clone() };
                            simulate_one(&cfg, dir, &sub)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    for r in results {
        r?;
    }
    let mut m = Manifest::new("simulate", ctx);
    m.set("seed", json!(base.seed)).set("repetitions", json!(reps)).set(
        "runs",
        Value::Array(
            runs.iter()
                .map(|(s, d)| json!({"seed": s, "dir": d.file_name().map(|x| x.to_string_lossy().into_owned())}))
                .collect(),
        ),
    );
    m.write(&cli.out)
}

fn monitored(ctx: &Context, graph: &TemporalDigraph) -> Result<Vec<UserId>, CliError> {
    let spec = ctx.entries.get("monitored").unwrap_or("all");
    if spec == "all" {
        return Ok(graph.users());
    }
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || CliError::Data(format!("bad `monitored` entry `{part}`"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                out.extend((a..=b).map(UserId));
            }
            None => out.push(UserId(part.parse().map_err(|_| bad())?)),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn observe(cli: &Cli, ctx: &Context, a: &LogInput) -> Result<(), CliError> {
    let log = open_log(&a.log)?;
    let graph = open_graph(&a.graph)?;
    let users = monitored(ctx, &graph)?;
    let poll = ctx.number("poll_interval")?;
    let duration = ctx.number("duration")?;
    let snaps = snapshot_observer(&log, &graph, &users, poll, duration);
    write_snapshots(&snaps, create(&cli.out, "snapshots.jsonl")?)?;
    let mut m = Manifest::new("observe", ctx);
    m.set("inputs", json!({"log": path_str(&a.log), "graph": path_str(&a.graph)}))
        .set("outputs", json!(["snapshots.jsonl"]));
    m.write(&cli.out)
}

fn detect(cli: &Cli, ctx: &Context, a: &DetectArgs) -> Result<(), CliError> {
    let log = open_log(&a.input.log)?;
    let graph = open_graph(&a.input.graph)?;
    let delta = ctx.number("delta")?;
    let detections = match &a.snapshots {
        None => detect_trf(&log, &graph, delta).map_err(data(&path_str(&a.input.log)))?,
        Some(p) => {
            let f = File::open(p).map_err(data(&path_str(p)))?;
            let snaps = read_snapshots(BufReader::new(f)).map_err(|e| e.in_file(p))?;
            let deliveries = qualifying_deliveries(&log, &graph).map_err(data(&path_str(&a.input.log)))?;
            detect_from_snapshots(&snaps, &deliveries, delta)
        }
    };
    write_detections(&detections, create(&cli.out, "detections.csv")?)?;
    let mut m = Manifest::new("detect", ctx);
    let mut inputs = json!({"log": path_str(&a.input.log), "graph": path_str(&a.input.graph)});
    if let Some(p) = &a.snapshots {
        inputs["snapshots"] = json!(path_str(p));
    }
    m.set("inputs", inputs).set("delta", json!(delta)).set("outputs", json!(["detections.csv"]));
    m.write(&cli.out)
}

fn estimate(cli: &Cli, ctx: &Context, a: &EstimateArgs) -> Result<(), CliError> {
    let log = open_log(&a.input.log)?;
    let graph = open_graph(&a.input.graph)?;
    let delta = ctx.number("delta")?;
    let groups = retweet_groups(&log, &graph, delta, GroupOptions { detail: true })
        .map_err(data(&path_str(&a.input.log)))?;
    let tally = GroupTally::from_groups(&groups);
    let mut rows = Vec::new();
    for stratum in [Stratum::All, Stratum::Reciprocal, Stratum::NonReciprocal] {
        if let Ok(t) = estimate_from_tally(&tally, stratum, !a.pooled) {
            rows.extend(t.rows);
        }
    }
    write_estimates(&rows, create(&cli.out, "p_trf.csv")?)?;
    write_features(&groups, create(&cli.out, "features.csv")?)?;

    let mut w = csv::Writer::from_writer(create(&cli.out, "p_exo_endo.csv")?);
    w.write_record(["estimator", "probability", "std_error", "count"]).map_err(FormatError::from)?;
    for (name, r) in [
        ("p_exo", estimate_p_exo(&log, &graph, delta)),
        ("p_endo", estimate_p_endo(&log, &graph, delta)),
    ] {
        match r {
            Ok(e) => w
                .write_record([name.to_string(), fmt_f64(e.probability), fmt_f64(e.std_error), e.count.to_string()])
                .map_err(FormatError::from)?,
            Err(e) => eprintln!("note: {name} not estimated: {e}"),
        }
    }
    w.flush()?;

    let mut m = Manifest::new("estimate", ctx);
    m.set("inputs", json!({"log": path_str(&a.input.log), "graph": path_str(&a.input.graph)}))
        .set("delta", json!(delta))
        .set("groups", json!(groups.len()))
        .set("outputs", json!(["p_trf.csv", "features.csv", "p_exo_endo.csv"]));
    m.write(&cli.out)
}

fn fit(cli: &Cli, ctx: &Context, a: &FitArgs) -> Result<(), CliError> {
    let f = File::open(&a.estimates).map_err(data(&path_str(&a.estimates)))?;
    let rows = read_estimates(BufReader::new(f)).map_err(|e| e.in_file(&a.estimates))?;
    let delta = ctx.number("delta")?;
    let semantics = match a.semantics {
        Semantics::Truncated => FitSemantics::Truncated,
        Semantics::AtMostN => FitSemantics::AtMostN,
    };
    let mut fitted = Vec::new();
    for stratum in [Stratum::All, Stratum::Reciprocal, Stratum::NonReciprocal] {
        let data: Vec<(u32, u64, u64)> =
            rows.iter().filter(|r| r.0 == stratum && r.1 > 0).map(|r| (r.1, r.2, r.3)).collect();
        if data.is_empty() {
            continue;
        }
        match fit_pq(&FitInput::new(semantics, data)) {
            Ok(r) => fitted.push((stratum.name(), delta, r.params.p, r.params.q, r.nll)),
            Err(e) => eprintln!("note: {stratum} not fitted: {e}"),
        }
    }
    if fitted.is_empty() {
        return Err(CliError::Data(format!("{}: no class could be fitted", path_str(&a.estimates))));
    }
    write_fit(&fitted, create(&cli.out, "fit.csv")?)?;
    let mut m = Manifest::new("fit", ctx);
    m.set("inputs", json!({"estimates": path_str(&a.estimates)}))
        .set("delta", json!(delta))
        .set("semantics", json!(format!("{:?}", a.semantics).to_lowercase()))
        .set("outputs", json!(["fit.csv"]));
    m.write(&cli.out)
}

fn logit(cli: &Cli, ctx: &Context, a: &LogitArgs) -> Result<(), CliError> {
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(CliError::Usage("--level must lie in (0, 1)".into()));
    }
    let f = File::open(&a.features).map_err(data(&path_str(&a.features)))?;
    let table = read_features(BufReader::new(f)).map_err(|e| e.in_file(&a.features))?;
    let model = logistic_fit(&table.rows, &table.labels).map_err(data(&path_str(&a.features)))?;
    let odds = odds_ratios(&model, a.level).map_err(data(&path_str(&a.features)))?;
    write_odds(&table.names, &odds, create(&cli.out, "odds.csv")?)?;
    let mut m = Manifest::new("logit", ctx);
    m.set("inputs", json!({"features": path_str(&a.features)}))
        .set("level", json!(a.level))
        .set("iterations", json!(model.iterations))
        .set("outputs", json!(["odds.csv"]));
    m.write(&cli.out)
}

fn scc(cli: &Cli, ctx: &Context, a: &GraphInput) -> Result<(), CliError> {
    let g = open_graph(&a.graph)?;
    let r = tarjan_scc(&g);
    let mut w = csv::Writer::from_writer(create(&cli.out, "scc.csv")?);
    w.write_record(["user", "component"]).map_err(FormatError::from)?;
    for (u, c) in r.nodes.iter().zip(&r.component) {
        w.write_record([u.to_string(), c.to_string()]).map_err(FormatError::from)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_writer(create(&cli.out, "scc_summary.csv")?);
    w.write_record(["nodes", "components", "largest", "largest_fraction"]).map_err(FormatError::from)?;
    w.write_record([
        r.nodes.len().to_string(),
        r.sizes.len().to_string(),
        r.largest().to_string(),
        fmt_f64(r.largest_fraction),
    ])
    .map_err(FormatError::from)?;
    w.flush()?;
    let mut m = Manifest::new("scc", ctx);
    m.set("inputs", json!({"graph": path_str(&a.graph)}))
        .set("outputs", json!(["scc.csv", "scc_summary.csv"]));
    m.write(&cli.out)
}

fn sample(cli: &Cli, ctx: &Context, a: &SampleArgs) -> Result<(), CliError> {
    let g = open_graph(&a.graph)?;
    let seed = ctx.seed()?;
    let reps = cli.repetitions.unwrap_or(10);
    let method = match a.method {
        Method::RandomWalk => SamplingMethod::RandomWalk { restart: a.restart },
        Method::Snowball => SamplingMethod::Snowball,
    };
    let curve = scc_fraction_curve(&g, method, &a.sizes, reps, seed).map_err(data(&path_str(&a.graph)))?;
    write_curve(&curve, create(&cli.out, "curve.csv")?)?;
    let mut m = Manifest::new("sample", ctx);
    m.set("inputs", json!({"graph": path_str(&a.graph)}))
        .set("seed", json!(seed))
        .set("method", json!(format!("{:?}", a.method).to_lowercase()))
        .set("restart", json!(a.restart))
        .set("sizes", json!(a.sizes))
        .set("repetitions", json!(reps))
        .set("outputs", json!(["curve.csv"]));
    m.write(&cli.out)
}

fn closure(cli: &Cli, ctx: &Context, a: &GraphInput) -> Result<(), CliError> {
    let g = open_graph(&a.graph)?;
    let c = trf_closure(&g);
    write_graph(&c, create(&cli.out, "closure.csv")?)?;
    let mut m = Manifest::new("closure", ctx);
    m.set("inputs", json!({"graph": path_str(&a.graph)}))
        .set("edges_before", json!(g.edge_count()))
        .set("edges_after", json!(c.edge_count()))
        .set("outputs", json!(["closure.csv"]));
    m.write(&cli.out)
}
