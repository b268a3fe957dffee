mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anchored_core::generators::{percolation, truncate, LazyGraph};
use anchored_core::induced::build_induced_graph;
use anchored_core::io::{heat_csv, induced_header, read_wg, walk_csv, write_wg};
use anchored_core::par::Execution;
use anchored_core::spectral::{heat_series, speed_lower_bounds, HeatBoundParams};
use anchored_core::territories::{build_countries, countries_json};
use anchored_core::verify::{run_suite, SUITES};
use anchored_core::walker::{
    induced_speed_estimate, simulate_ensemble, speed_estimate, Source, WalkOptions,
};
use anchored_core::{cheeger_constant, compute_a_i, WeightedGraph};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::manifest::{sidecar, RunManifest};

/// Output directory used when no explicit output path is given.
const OUT_DIR_ENV: &str = "ANCHORED_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "anchored",
    version,
    about = "Island/ocean decompositions, induced chains and walk diagnostics"
)]
struct Cli {
    /// Worker threads for trajectories and per-graph work (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory for outputs written under default names; overrides $ANCHORED_OUT_DIR.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Truncate a generator family to a finite .wg graph.
    Gen(GenArgs),
    /// Compute A_i, its islands and the ocean (JSON).
    Decompose(DecomposeArgs),
    /// Induced chain on the ocean, as .wg.
    Chain(DecomposeArgs),
    /// Countries of the island decomposition (JSON array).
    Countries(CountriesArgs),
    /// Frontier-avoiding Cheeger constant, printed as JSON.
    Cheeger(InputArgs),
    /// Simulate walks; writes <prefix>.csv and <prefix>.summary.json.
    Walk(WalkArgs),
    /// Killed-walk heat kernel series from one vertex (CSV).
    Heat(HeatArgs),
    /// Run verification suites; exit 2 if any fails.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Family {
    BinaryTree,
    TrapTree,
    GeometricPipeTree,
    PipeTree,
    GaltonWatson,
}

#[derive(Args, Debug, Clone)]
struct FamilyArgs {
    /// Pipe lengths for pipe-tree, strictly increasing (default 4,16,64,...).
    #[arg(long, value_delimiter = ',')]
    lengths: Vec<u64>,
    /// Offspring distribution for galton-watson: P(0),P(1),...
    #[arg(long, value_delimiter = ',')]
    offspring: Vec<f64>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    radius: usize,
    #[command(flatten)]
    params: FamilyArgs,
    /// Keep each edge independently with this probability and return the root's cluster.
    #[arg(long)]
    percolate: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    i: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CountriesArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    i: f64,
    /// Vertex weight bound; defaults to the largest vertex weight of the input.
    #[arg(long)]
    w0: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(id = "source", required = true, multiple = false, args = ["family", "input"])]
struct WalkArgs {
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    params: FamilyArgs,
    /// Start vertex; defaults to the root "o" or the first interior vertex.
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    steps: u64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, required = true)]
    seed: Option<u64>,
    /// Isolation parameter: enables ocean tracking and the speed bounds.
    #[arg(long)]
    i: Option<f64>,
    #[arg(long)]
    w0: Option<f64>,
    #[arg(long, default_value_t = 1)]
    sample_every: u64,
    #[arg(long, default_value_t = 0.5)]
    tail_fraction: f64,
    #[arg(long, default_value = "walk")]
    out_prefix: PathBuf,
}

#[derive(Args, Debug)]
struct HeatArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    source: String,
    #[arg(long)]
    n_max: usize,
    /// Anchored expansion constant used in the reference column.
    #[arg(long)]
    i: f64,
    #[arg(long)]
    w0: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite name, or "all".
    #[arg(default_value = "all")]
    suite: String,
    /// Also write the reports (with counterexamples) as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(anchored_core::Error),
    Io(String, std::io::Error),
    Verification(Vec<String>),
}

impl From<anchored_core::Error> for Failure {
    fn from(e: anchored_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        use anchored_core::Error as E;
        match self {
            Failure::Verification(_) => 2,
            Failure::Core(E::NonConvergence { .. } | E::SingularSystem(_)) => 3,
            _ => 1,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Failure::Usage(m) => json!({"error": "usage", "message": m}),
            Failure::Core(e) => {
                let kind = format!("{e:?}");
                let kind = kind
                    .split(['(', ' ', '{'])
                    .next()
                    .unwrap_or("Error")
                    .to_string();
                json!({"error": kind, "message": e.to_string()})
            }
            Failure::Io(path, e) => json!({"error": "io", "path": path, "message": e.to_string()}),
            Failure::Verification(failed) => json!({"error": "verification", "failed": failed}),
        }
    }
}

type Outcome = Result<(), Failure>;

struct Ctx {
    out_dir: Option<PathBuf>,
    exec: Execution,
}

impl Ctx {
    /// Explicit path wins; otherwise `<out_dir>/<default_name>` if a directory
    /// is configured; otherwise standard output.
    fn target(&self, flag: Option<PathBuf>, default_name: &str) -> Option<PathBuf> {
        flag.or_else(|| self.out_dir.as_ref().map(|d| d.join(default_name)))
    }

    fn prefixed(&self, prefix: &Path) -> PathBuf {
        match &self.out_dir {
            Some(d) if prefix.is_relative() => d.join(prefix),
            _ => prefix.to_path_buf(),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Outcome {
    let io = |e| Failure::Io(path.display().to_string(), e);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    fs::write(path, text).map_err(io)
}

fn emit(target: Option<PathBuf>, text: &str, m: &mut RunManifest) -> Outcome {
    match target {
        Some(path) => {
            write_file(&path, text)?;
            m.outputs.push(path);
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finish(mut m: RunManifest, start: Instant) -> Outcome {
    m.wall_time_seconds = start.elapsed().as_secs_f64();
    if let Some(first) = m.outputs.first().cloned() {
        let text = serde_json::to_string_pretty(&m).expect("plain data") + "\n";
        write_file(&sidecar(&first), &text)?;
    }
    Ok(())
}

fn load(path: &Path, m: &mut RunManifest) -> Result<WeightedGraph, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Io(path.display().to_string(), e))?;
    m.input(path, &bytes);
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::Usage(format!("{} is not UTF-8", path.display())))?;
    Ok(read_wg(&text)?)
}

fn to_json_text<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data") + "\n"
}

/// JSON object output with the manifest digest as an extra field.
fn with_digest<T: Serialize>(value: &T, m: &RunManifest) -> String {
    let mut v = serde_json::to_value(value).expect("plain data");
    if let Some(obj) = v.as_object_mut() {
        obj.insert("manifest_digest".into(), json!(m.digest));
    }
    to_json_text(&v)
}

fn lazy_family(
    family: Family,
    params: &FamilyArgs,
    seed: Option<u64>,
) -> Result<LazyGraph, Failure> {
    Ok(match family {
        Family::BinaryTree => LazyGraph::binary_tree(),
        Family::TrapTree => LazyGraph::trap_tree(),
        Family::GeometricPipeTree => LazyGraph::geometric_pipe_tree(),
        Family::PipeTree if params.lengths.is_empty() => LazyGraph::pipe_tree_default(),
        Family::PipeTree => LazyGraph::pipe_tree(params.lengths.clone())?,
        Family::GaltonWatson => {
            let seed = seed.ok_or_else(|| Failure::Usage("galton-watson needs --seed".into()))?;
            if params.offspring.is_empty() {
                return Err(Failure::Usage("galton-watson needs --offspring".into()));
            }
            LazyGraph::galton_watson(params.offspring.clone(), seed)?
        }
    })
}

fn family_params(m: &mut RunManifest, family: Family, params: &FamilyArgs) {
    m.param(
        "family",
        family.to_possible_value().map(|v| v.get_name().to_string()),
    );
    if !params.lengths.is_empty() {
        m.param("lengths", &params.lengths);
    }
    if !params.offspring.is_empty() {
        m.param("offspring", &params.offspring);
    }
}

fn cmd_gen(ctx: &Ctx, a: GenArgs) -> Outcome {
    let start = Instant::now();
    let mut m = RunManifest::new("gen", a.seed);
    family_params(&mut m, a.family, &a.params);
    m.param("radius", a.radius);
    let lz = lazy_family(a.family, &a.params, a.seed)?;
    let mut g = truncate(&lz, a.radius)?;
    if let Some(p) = a.percolate {
        m.param("percolate", p);
        let seed = a
            .seed
            .ok_or_else(|| Failure::Usage("--percolate needs --seed".into()))?;
        g = percolation(&g, p, seed, "o")?;
    }
    let text = write_wg(&g, &m.header());
    emit(
        ctx.target(a.out, &format!("{}-r{}.wg", lz.name(), a.radius)),
        &text,
        &mut m,
    )?;
    finish(m, start)
}

fn cmd_decompose(ctx: &Ctx, a: DecomposeArgs) -> Outcome {
    let start = Instant::now();
    let mut m = RunManifest::new("decompose", None);
    m.param("i", a.i);
    let g = load(&a.input, &mut m)?;
    let dec = compute_a_i(&g, a.i)?;
    emit(
        ctx.target(a.out, "decomposition.json"),
        &with_digest(&dec.to_json(&g), &m),
        &mut m,
    )?;
    finish(m, start)
}

fn cmd_chain(ctx: &Ctx, a: DecomposeArgs) -> Outcome {
    let start = Instant::now();
    let mut m = RunManifest::new("chain", None);
    m.param("i", a.i);
    let g = load(&a.input, &mut m)?;
    let ind = build_induced_graph(&g, &compute_a_i(&g, a.i)?)?;
    let mut header = vec![induced_header(a.i)];
    header.extend(m.header());
    emit(
        ctx.target(a.out, "induced.wg"),
        &write_wg(&ind.graph, &header),
        &mut m,
    )?;
    finish(m, start)
}

fn w0_or_default(g: &WeightedGraph, w0: Option<f64>) -> Result<f64, Failure> {
    match w0 {
        Some(w) => Ok(w),
        None => Ok(g.geometry_summary()?.w0),
    }
}

fn cmd_countries(ctx: &Ctx, a: CountriesArgs) -> Outcome {
    let start = Instant::now();
    let mut m = RunManifest::new("countries", None);
    m.param("i", a.i);
    let g = load(&a.input, &mut m)?;
    let w0 = w0_or_default(&g, a.w0)?;
    m.param("w0", w0);
    let dec = compute_a_i(&g, a.i)?;
    let countries = build_countries(&g, &dec, w0)?;
    // a bare array has no room for the digest, so it lives in the sidecar
    emit(
        ctx.target(a.out, "countries.json"),
        &to_json_text(&countries_json(&g, &countries)),
        &mut m,
    )?;
    finish(m, start)
}

fn cmd_cheeger(a: InputArgs) -> Outcome {
    let start = Instant::now();
    let mut m = RunManifest::new("cheeger", None);
    let g = load(&a.input, &mut m)?;
    let report = cheeger_constant(&g)?;
    print!("{}", with_digest(&report.to_json(&g), &m));
    finish(m, start)
}

#[derive(Serialize)]
struct WalkSummary {
    speed_mean: f64,
    ci95: (f64, f64),
    bound_speedi: Option<f64>,
    bound_shape_thm1: Option<f64>,
    induced_speed_mean: Option<f64>,
    trajectories: u64,
    steps: u64,
    killed: usize,
    manifest_digest: String,
}

fn cmd_walk(ctx: &Ctx, a: WalkArgs) -> Outcome {
    let start = Instant::now();
    let seed = a.seed.expect("clap enforces --seed");
    let mut m = RunManifest::new("walk", Some(seed));
    m.param("steps", a.steps)
        .param("trials", a.trials)
        .param("sample_every", a.sample_every);
    m.param("tail_fraction", a.tail_fraction);
    if let Some(i) = a.i {
        m.param("i", i);
    }
    if a.sample_every == 0 {
        return Err(Failure::Usage("--sample-every must be at least 1".into()));
    }

    let lazy;
    let graph;
    let dec;
    let (source, x0, w0) = match (a.family, &a.input) {
        (Some(family), _) => {
            family_params(&mut m, family, &a.params);
            lazy = lazy_family(family, &a.params, Some(seed))?;
            // local weights repeat, so a moderate truncation shows the largest
            let w0 =
                a.w0.map(Ok)
                    .unwrap_or_else(|| truncate(&lazy, 8)?.geometry_summary().map(|s| s.w0))?;
            (
                Source::Lazy(&lazy),
                a.start.clone().unwrap_or_else(|| "o".into()),
                w0,
            )
        }
        (None, Some(path)) => {
            graph = load(path, &mut m)?;
            let w0 = w0_or_default(&graph, a.w0)?;
            let x0 = match &a.start {
                Some(s) => s.clone(),
                None => graph
                    .id(graph
                        .interior()
                        .first()
                        .ok_or(anchored_core::Error::NoInteriorVertex)?)
                    .to_string(),
            };
            let source = match a.i {
                Some(i) => {
                    dec = compute_a_i(&graph, i)?;
                    Source::with_decomposition(&graph, &dec)
                }
                None => Source::finite(&graph),
            };
            (source, x0, w0)
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    m.param("start", &x0).param("w0", w0);
    let opts = WalkOptions {
        sample_every: a.sample_every,
        track_ocean: a.i.is_some(),
    };
    let records = simulate_ensemble(source, &x0, a.steps, seed, a.trials, opts, ctx.exec)?;
    let speed = speed_estimate(&records, a.tail_fraction)?;
    let induced = match a.i {
        Some(_) => Some(induced_speed_estimate(&records, a.tail_fraction)?.mean),
        None => None,
    };
    let bounds = match a.i {
        Some(i) if w0 > 1.0 => Some(speed_lower_bounds(i, w0, 1.0)?),
        _ => None,
    };
    let summary = WalkSummary {
        speed_mean: speed.mean,
        ci95: speed.ci95,
        bound_speedi: bounds.map(|b| b.induced),
        bound_shape_thm1: bounds.map(|b| b.main_shape),
        induced_speed_mean: induced,
        trajectories: a.trials,
        steps: a.steps,
        killed: records.iter().filter(|r| r.killed_at.is_some()).count(),
        manifest_digest: m.digest.clone(),
    };
    let prefix = ctx.prefixed(&a.out_prefix);
    let csv_path = PathBuf::from(format!("{}.csv", prefix.display()));
    let json_path = PathBuf::from(format!("{}.summary.json", prefix.display()));
    emit(Some(csv_path), &walk_csv(&records, &m.header()), &mut m)?;
    emit(Some(json_path), &to_json_text(&summary), &mut m)?;
    finish(m, start)
}

fn cmd_heat(ctx: &Ctx, a: HeatArgs) -> Outcome {
    let start = Instant::now();
    let mut m = RunManifest::new("heat", None);
    m.param("source", &a.source)
        .param("n_max", a.n_max)
        .param("i", a.i);
    let g = load(&a.input, &mut m)?;
    let w0 = w0_or_default(&g, a.w0)?;
    m.param("w0", w0);
    let params = HeatBoundParams::new(a.i, w0)?;
    let steps = heat_series(&g, g.index_of(&a.source)?, a.n_max)?;
    emit(
        ctx.target(a.out, "heat.csv"),
        &heat_csv(&steps, &params, &m.header()),
        &mut m,
    )?;
    finish(m, start)
}

fn cmd_verify(ctx: &Ctx, a: VerifyArgs) -> Outcome {
    let start = Instant::now();
    let names: Vec<&str> = match a.suite.as_str() {
        "all" => SUITES.to_vec(),
        name if SUITES.contains(&name) => vec![name],
        other => {
            return Err(Failure::Usage(format!(
                "unknown suite {other:?}; expected all or one of {SUITES:?}"
            )))
        }
    };
    let mut m = RunManifest::new("verify", None);
    m.param("suites", &names);
    let mut reports = Vec::new();
    let mut failed = Vec::new();
    for name in names {
        let r = run_suite(name, ctx.exec)?;
        let mark = if r.passed { "PASS" } else { "FAIL" };
        println!(
            "[{mark}] {:<14} checked={} violations={} {:.2}s  {}",
            r.suite, r.checked, r.violations, r.seconds, r.summary
        );
        for c in &r.counterexamples {
            println!("       counterexample: {c}");
        }
        if !r.passed {
            failed.push(r.suite.clone());
        }
        reports.push(r);
    }
    if let Some(out) = ctx.target(a.out, "verify.json") {
        emit(
            Some(out),
            &with_digest(&json!({ "reports": reports }), &m),
            &mut m,
        )?;
    }
    finish(m, start)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(failed))
    }
}

fn run(cli: Cli) -> Outcome {
    let exec = match cli.jobs {
        Some(0) => return Err(Failure::Usage("--jobs must be at least 1".into())),
        Some(1) => Execution::Sequential,
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Failure::Usage(format!("cannot size the thread pool: {e}")))?;
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    let out_dir = cli.out_dir.or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    });
    let ctx = Ctx { out_dir, exec };
    match cli.command {
        Command::Gen(a) => cmd_gen(&ctx, a),
        Command::Decompose(a) => cmd_decompose(&ctx, a),
        Command::Chain(a) => cmd_chain(&ctx, a),
        Command::Countries(a) => cmd_countries(&ctx, a),
        Command::Cheeger(a) => cmd_cheeger(a),
        Command::Walk(a) => cmd_walk(&ctx, a),
        Command::Heat(a) => cmd_heat(&ctx, a),
        Command::Verify(a) => cmd_verify(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = Failure::Usage(e.render().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code())
        }
    }
}
