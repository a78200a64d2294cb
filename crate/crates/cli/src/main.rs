use std::fs::File;
use std::io::{BufReader, Read as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rdfgql::bench::{run_bench, BenchConfig, BenchLength};
use rdfgql::compare::{check_query, minimize, run_random, Case, Checks, CompareConfig};
use rdfgql::engine::{EngineConfig, Fault};
use rdfgql::query::DEFAULT_DEPTH_LIMIT;
use rdfgql::rdf::{parse_ntriples, TermTriple, TripleIndex, RDF_TYPE};
use rdfgql::schema::IdMode;
use rdfgql::{QueryFailure, Store, StoreOptions};
use rdfgql_cli::AppState;

const EXIT_OTHER: u8 = 1;
const EXIT_SYNTAX: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_SCHEMA: u8 = 4;
const EXIT_DATA: u8 = 5;

/// An error that carries its process exit status.
#[derive(Debug)]
struct Exit {
    code: u8,
    message: String,
}

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

fn exit(code: u8, message: impl Into<String>) -> anyhow::Error {
    Exit {
        code,
        message: message.into(),
    }
    .into()
}

#[derive(Parser)]
#[command(
    name = "rdfgql",
    version,
    about = "GraphQL queries evaluated natively over RDF data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and check a schema and a data set, then print a summary.
    Load(StoreArgs),
    /// Answer one query.
    Query(QueryArgs),
    /// Serve POST /graphql and GET /healthz.
    Serve(ServeArgs),
    /// Compare engine answers with the reference evaluator.
    Compare(CompareArgs),
    /// Stress-test a query mix and report QPS and pAvgQPS.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct ModeArgs {
    /// How fields of type ID are answered.
    #[arg(long, default_value = "direct")]
    id_mode: IdMode,
    /// IRI of the predicate that assigns types.
    #[arg(long, default_value = RDF_TYPE)]
    type_iri: String,
    /// Maximum nesting of selections in a query.
    #[arg(long, default_value_t = DEFAULT_DEPTH_LIMIT)]
    depth_limit: usize,
}

impl ModeArgs {
    fn options(&self) -> Result<StoreOptions> {
        if self.depth_limit == 0 {
            bail!("--depth-limit must be at least 1");
        }
        Ok(StoreOptions {
            id_mode: self.id_mode,
            type_iri: self.type_iri.clone(),
            depth_limit: self.depth_limit,
        })
    }
}

#[derive(Args)]
struct StoreArgs {
    /// GraphQL schema with @uri bindings.
    #[arg(long)]
    schema: PathBuf,
    /// N-Triples data.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    mode: ModeArgs,
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    store: StoreArgs,
    /// Query text; `-` reads standard input.
    #[arg(conflicts_with = "query_file")]
    query: Option<String>,
    /// File holding the query.
    #[arg(long)]
    query_file: Option<PathBuf>,
    /// Abort execution after this many seconds.
    #[arg(long, default_value_t = 180.0)]
    timeout_s: f64,
    /// Print execution statistics to standard error.
    #[arg(long)]
    stats: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    store: StoreArgs,
    #[arg(long, default_value = "127.0.0.1:8080")]
    listen: String,
    /// Per-request execution budget in seconds.
    #[arg(long, default_value_t = 180.0)]
    timeout_s: f64,
}

#[derive(Args)]
struct CompareArgs {
    /// Schema; a random one per case when omitted with --random.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Data; a random graph per case when omitted with --random.
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    mode: ModeArgs,
    /// Number of random cases.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Triples per random graph, at most.
    #[arg(long, default_value_t = 50)]
    max_triples: usize,
    /// Field nesting of random queries, at most.
    #[arg(long, default_value_t = 4)]
    max_depth: usize,
    /// Report failing cases as found, without shrinking their data.
    #[arg(long)]
    no_minimize: bool,
    /// Query files (or directories of .graphql files) to compare.
    queries: Vec<PathBuf>,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    store: StoreArgs,
    /// Query files or directories of .graphql files forming the mix.
    #[arg(long, required = true, num_args = 1..)]
    queries: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    clients: usize,
    /// Runs of the whole mix per client.
    #[arg(long, conflicts_with = "duration_s")]
    repetitions: Option<usize>,
    /// Keep clients busy for this many seconds instead.
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long, default_value_t = 180.0)]
    timeout_s: f64,
    /// Time charged for a failed or timed-out run.
    #[arg(long, default_value_t = 180.0)]
    penalty_s: f64,
    #[arg(long)]
    no_warmup: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = e.downcast_ref::<Exit>().map_or(EXIT_OTHER, |x| x.code);
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Load(args) => cmd_load(&args),
        Command::Query(args) => cmd_query(&args),
        Command::Serve(args) => cmd_serve(&args),
        Command::Compare(args) => cmd_compare(&args),
        Command::Bench(args) => cmd_bench(&args),
    }
}

fn seconds(value: f64, flag: &str) -> Result<Duration> {
    Duration::try_from_secs_f64(value)
        .map_err(|_| anyhow::anyhow!("{flag} must be a non-negative number of seconds"))
}

fn read_schema(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        exit(
            EXIT_SCHEMA,
            format!("cannot read schema {}: {e}", path.display()),
        )
    })
}

fn read_index(path: &Path) -> Result<TripleIndex> {
    let file = File::open(path).map_err(|e| {
        exit(
            EXIT_DATA,
            format!("cannot read data {}: {e}", path.display()),
        )
    })?;
    TripleIndex::load_ntriples(BufReader::new(file))
        .map_err(|e| exit(EXIT_DATA, format!("{}: {e}", path.display())))
}

fn read_triples(path: &Path) -> Result<Vec<TermTriple>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        exit(
            EXIT_DATA,
            format!("cannot read data {}: {e}", path.display()),
        )
    })?;
    parse_ntriples(&text).map_err(|e| exit(EXIT_DATA, format!("{}: {e}", path.display())))
}

fn open_store(schema: &str, index: TripleIndex, options: StoreOptions) -> Result<Store> {
    Store::open(schema, index, options).map_err(|errors| {
        let text: Vec<String> = errors.iter().map(ToString::to_string).collect();
        exit(
            EXIT_SCHEMA,
            format!("invalid schema:\n  {}", text.join("\n  ")),
        )
    })
}

fn load(args: &StoreArgs) -> Result<Store> {
    let options = args.mode.options()?;
    let schema = read_schema(&args.schema)?;
    let index = read_index(&args.data)?;
    open_store(&schema, index, options)
}

fn failure_exit(failure: &QueryFailure) -> anyhow::Error {
    let code = match failure {
        QueryFailure::Syntax(_) => EXIT_SYNTAX,
        QueryFailure::Invalid(_) | QueryFailure::Operands(_) => EXIT_VALIDATION,
        QueryFailure::Exec(_) => EXIT_OTHER,
    };
    exit(code, failure.messages().join("\n"))
}

fn cmd_load(args: &StoreArgs) -> Result<u8> {
    let store = load(args)?;
    let schema = store.schema();
    println!("triples {}", store.index().len());
    println!("terms {}", store.index().dictionary().len());
    println!(
        "types {} objects, {} interfaces, {} unions",
        schema.object_types().count(),
        schema.interface_types().count(),
        schema.union_types().count()
    );
    println!("fingerprint {:016x}", store.index().fingerprint());
    Ok(0)
}

fn query_text(args: &QueryArgs) -> Result<String> {
    match (&args.query, &args.query_file) {
        (Some(q), _) if q == "-" => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .context("reading the query from standard input")?;
            Ok(text)
        }
        (Some(q), _) => Ok(q.clone()),
        (None, Some(path)) => {
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
        }
        (None, None) => bail!("give the query as an argument or with --query-file"),
    }
}

fn cmd_query(args: &QueryArgs) -> Result<u8> {
    let text = query_text(args)?;
    let timeout = seconds(args.timeout_s, "--timeout-s")?;
    let store = load(&args.store)?;
    let cfg = EngineConfig {
        deadline: Some(Instant::now() + timeout),
        fault: None,
    };
    let exec = store.execute(&text, &cfg).map_err(|f| failure_exit(&f))?;
    println!("{}", exec.response.serialize());
    if args.stats {
        eprintln!(
            "operands {}  slices {}  mappings {}  peak buffer {}  recursion calls {}  objects {}",
            exec.operand_count,
            exec.engine.total_slices(),
            exec.engine.mappings,
            exec.engine.peak_buffer,
            exec.engine.recursion_calls,
            exec.build.materialized
        );
    }
    Ok(0)
}

fn cmd_serve(args: &ServeArgs) -> Result<u8> {
    let timeout = seconds(args.timeout_s, "--timeout-s")?;
    let store = load(&args.store)?;
    let state = Arc::new(AppState {
        store,
        timeout: Some(timeout),
    });
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting the async runtime")?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&args.listen)
            .await
            .with_context(|| format!("binding {}", args.listen))?;
        println!("listening on http://{}", listener.local_addr()?);
        rdfgql_cli::serve(listener, state).await.context("serving")
    })?;
    Ok(0)
}

/// `.graphql` files named directly or found in the given directories,
/// directory entries in name order.
fn query_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(path)
                .with_context(|| format!("listing {}", path.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "graphql"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(path.clone());
        }
    }
    Ok(out)
}

fn query_id(path: &Path) -> String {
    path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

fn cmd_compare(args: &CompareArgs) -> Result<u8> {
    let options = args.mode.options()?;
    let fault = args.inject_fault.then_some(Fault::SkipFirstCandidate);
    let schema = args.schema.as_deref().map(read_schema).transpose()?;
    let data = args.data.as_deref().map(read_triples).transpose()?;
    if let Some(text) = &schema {
        // Fail early with the schema diagnostics rather than per case.
        open_store(text, TripleIndex::default(), options.clone())?;
    }
    let mut failed = false;
    if let Some(cases) = args.random {
        let cfg = CompareConfig {
            cases,
            seed: args.seed,
            options: options.clone(),
            schema: schema.clone(),
            data: data.clone(),
            max_triples: args.max_triples,
            max_depth: args.max_depth,
            minimize: !args.no_minimize,
            fault,
            ..CompareConfig::default()
        };
        let report = run_random(&cfg);
        print!("{}", report.render());
        failed |= !report.passed();
    }
    if !args.queries.is_empty() {
        let (Some(schema), Some(data)) = (schema, data) else {
            bail!("comparing query files needs --schema and --data");
        };
        failed |= compare_files(args, &options, fault, &schema, data)?;
    } else if args.random.is_none() {
        bail!("give query files or --random N");
    }
    Ok(if failed { EXIT_OTHER } else { 0 })
}

fn compare_files(
    args: &CompareArgs,
    options: &StoreOptions,
    fault: Option<Fault>,
    schema: &str,
    data: Vec<TermTriple>,
) -> Result<bool> {
    let store = open_store(
        schema,
        TripleIndex::load(data.iter().cloned()),
        options.clone(),
    )?;
    let view = store.graph_view();
    let cfg = EngineConfig {
        deadline: None,
        fault,
    };
    let (mut mismatches, mut rejected, mut total) = (0, 0, 0);
    for path in query_files(&args.queries)? {
        total += 1;
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        let found = match check_query(&store, &view, &text, &cfg, Checks::default()) {
            Ok(found) => found,
            Err(failure) => {
                rejected += 1;
                println!(
                    "{}: rejected: {}",
                    path.display(),
                    failure.messages().join("; ")
                );
                continue;
            }
        };
        if found.is_empty() {
            println!("{}: ok", path.display());
            continue;
        }
        mismatches += 1;
        let case = Case {
            schema: schema.to_owned(),
            triples: data.clone(),
            query: text,
        };
        let case = if args.no_minimize || case.triples.len() > 2000 {
            case
        } else {
            let kinds: Vec<&str> = found.iter().map(|d| d.kind()).collect();
            minimize(&case, |c| {
                c.run(options, &cfg, Checks::default())
                    .is_some_and(|ds| ds.iter().any(|d| kinds.contains(&d.kind())))
            })
        };
        println!("{}: MISMATCH", path.display());
        for d in &found {
            println!("[{}]\n{}", d.kind(), d.detail());
        }
        println!(
            "--- reproducing data ({} triples)\n{}",
            case.triples.len(),
            case.ntriples()
        );
    }
    println!("queries {total}  mismatches {mismatches}  rejected {rejected}");
    if rejected > 0 && mismatches == 0 {
        return Err(exit(
            EXIT_VALIDATION,
            format!("{rejected} query file(s) were rejected"),
        ));
    }
    Ok(mismatches > 0)
}

fn cmd_bench(args: &BenchArgs) -> Result<u8> {
    let length = match (args.repetitions, args.duration_s) {
        (_, Some(d)) => BenchLength::Duration(seconds(d, "--duration-s")?),
        (r, None) => BenchLength::Repetitions(r.unwrap_or(1)),
    };
    let cfg = BenchConfig {
        clients: args.clients,
        length,
        timeout: seconds(args.timeout_s, "--timeout-s")?,
        penalty: seconds(args.penalty_s, "--penalty-s")?,
        warmup: !args.no_warmup,
    };
    cfg.validate().context("invalid bench configuration")?;
    let mut mix = Vec::new();
    for path in query_files(&args.queries)? {
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        mix.push((query_id(&path), text));
    }
    let store = load(&args.store)?;
    for (id, text) in &mix {
        store
            .prepare(text)
            .map_err(|f| failure_exit(&f))
            .with_context(|| format!("query {id}"))?;
    }
    let report = run_bench(&store, &mix, &cfg)?;
    print!("{}", report.table());
    print!("{}", report.tagged_lines());
    Ok(0)
}
