//! Differential testing: the engine against the direct evaluator, queries
//! against their normal forms, and normalization against itself.

pub mod gen;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{EngineConfig, Fault};
use crate::rdf::{TermTriple, TripleIndex};
use crate::response::GraphView;
use crate::schema::to_sdl;
use crate::store::{QueryFailure, Store, StoreOptions};

pub use gen::{random_graph, random_query, random_schema, GraphConfig, QueryConfig};

/// One way a query's answers disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Discrepancy {
    /// The engine's response differs from the direct evaluator's.
    Engine { engine: String, oracle: String },
    /// The query as written and its normal form answer differently.
    Normalization { raw: String, normalized: String },
    /// Normalizing the normal form again changed it.
    Idempotence { first: String, second: String },
    /// Execution failed or panicked.
    Failure(String),
}

impl Discrepancy {
    pub fn kind(&self) -> &'static str {
        match self {
            Discrepancy::Engine { .. } => "engine",
            Discrepancy::Normalization { .. } => "normalization",
            Discrepancy::Idempotence { .. } => "idempotence",
            Discrepancy::Failure(_) => "failure",
        }
    }

    pub fn detail(&self) -> String {
        match self {
            Discrepancy::Engine { engine, oracle } => format!("engine: {engine}\noracle: {oracle}"),
            Discrepancy::Normalization { raw, normalized } => {
                format!("as written: {raw}\nnormalized: {normalized}")
            }
            Discrepancy::Idempotence { first, second } => format!("once: {first}\ntwice: {second}"),
            Discrepancy::Failure(msg) => msg.clone(),
        }
    }
}

/// Which checks [`check_query`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Checks {
    pub engine: bool,
    pub normalization: bool,
    pub idempotence: bool,
}

impl Default for Checks {
    fn default() -> Self {
        Checks {
            engine: true,
            normalization: true,
            idempotence: true,
        }
    }
}

/// Runs the enabled checks on one query. A query the store rejects is
/// returned as `Err`; it cannot be compared.
pub fn check_query(
    store: &Store,
    view: &GraphView<'_>,
    text: &str,
    cfg: &EngineConfig,
    checks: Checks,
) -> Result<Vec<Discrepancy>, QueryFailure> {
    let ast = store.parse(text)?;
    let normal = store.normalize(&ast)?;
    let mut found = Vec::new();
    if checks.idempotence {
        let again = store.normalize(&normal.to_ast());
        match again {
            Ok(second) if second == normal => {}
            Ok(second) => found.push(Discrepancy::Idempotence {
                first: normal.to_ast().to_string(),
                second: second.to_ast().to_string(),
            }),
            Err(e) => found.push(Discrepancy::Idempotence {
                first: normal.to_ast().to_string(),
                second: e.to_string(),
            }),
        }
    }
    let oracle = store.oracle(view, &normal).serialize();
    if checks.engine {
        let run = catch_unwind(AssertUnwindSafe(|| store.execute_normalized(&normal, cfg)));
        match run {
            Ok(Ok(exec)) => {
                let engine = exec.response.serialize();
                if engine != oracle {
                    found.push(Discrepancy::Engine {
                        engine,
                        oracle: oracle.clone(),
                    });
                }
            }
            Ok(Err(e)) => found.push(Discrepancy::Failure(e.to_string())),
            Err(panic) => found.push(Discrepancy::Failure(panic_message(panic))),
        }
    }
    if checks.normalization {
        let raw = store.oracle_raw(view, &ast).serialize();
        if raw != oracle {
            found.push(Discrepancy::Normalization {
                raw,
                normalized: oracle,
            });
        }
    }
    Ok(found)
}

fn panic_message(panic: Box<dyn std::any::Any + Send>) -> String {
    let text = panic
        .downcast_ref::<&str>()
        .map(|s| (*s).to_owned())
        .or_else(|| panic.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".to_owned());
    format!("panic: {text}")
}

/// A self-contained differential case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case {
    pub schema: String,
    pub triples: Vec<TermTriple>,
    pub query: String,
}

impl Case {
    pub fn ntriples(&self) -> String {
        self.triples
            .iter()
            .map(|(s, p, o)| format!("{s} {p} {o} .\n"))
            .collect()
    }

    /// Opens the case as a store, or returns the schema errors as text.
    pub fn open(&self, options: &StoreOptions) -> Result<Store, String> {
        let index = TripleIndex::load(self.triples.iter().cloned());
        Store::open(&self.schema, index, options.clone()).map_err(|errors| {
            errors
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ")
        })
    }

    /// The discrepancies of this case, or `None` if it cannot be run.
    pub fn run(
        &self,
        options: &StoreOptions,
        cfg: &EngineConfig,
        checks: Checks,
    ) -> Option<Vec<Discrepancy>> {
        let store = self.open(options).ok()?;
        let view = store.graph_view();
        check_query(&store, &view, &self.query, cfg, checks).ok()
    }
}

/// Greedily deletes triples while `fails` still holds, until no single
/// deletion keeps it failing.
pub fn minimize(case: &Case, mut fails: impl FnMut(&Case) -> bool) -> Case {
    let mut best = case.clone();
    loop {
        let mut changed = false;
        let mut i = best.triples.len();
        while i > 0 {
            i -= 1;
            let mut candidate = best.clone();
            candidate.triples.remove(i);
            if fails(&candidate) {
                best = candidate;
                changed = true;
            }
        }
        if !changed {
            return best;
        }
    }
}

/// Settings for a randomized comparison run.
#[derive(Debug, Clone)]
pub struct CompareConfig {
    pub cases: usize,
    pub seed: u64,
    pub options: StoreOptions,
    /// Fixed schema text; a random schema per case when absent.
    pub schema: Option<String>,
    /// Fixed data; a random graph per case when absent.
    pub data: Option<Vec<TermTriple>>,
    pub max_triples: usize,
    pub max_depth: usize,
    pub checks: Checks,
    /// Shrink the data of failing cases before reporting them.
    pub minimize: bool,
    /// Keep at most this many failing cases in the report.
    pub keep_failures: usize,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            cases: 100,
            seed: 0,
            options: StoreOptions::default(),
            schema: None,
            data: None,
            max_triples: 50,
            max_depth: 4,
            checks: Checks::default(),
            minimize: true,
            keep_failures: 5,
            fault: None,
        }
    }
}

/// A failing case as reported, after optional minimization.
#[derive(Debug, Clone)]
pub struct CaseFailure {
    pub index: usize,
    pub case: Case,
    pub discrepancies: Vec<Discrepancy>,
}

#[derive(Debug, Clone, Default)]
pub struct CompareReport {
    pub cases: usize,
    /// Cases whose query or schema was rejected before evaluation.
    pub rejected: usize,
    pub engine_mismatches: usize,
    pub normalization_mismatches: usize,
    pub idempotence_failures: usize,
    pub execution_failures: usize,
    pub failing_cases: usize,
    pub failures: Vec<CaseFailure>,
    pub elapsed: Duration,
}

impl CompareReport {
    pub fn passed(&self) -> bool {
        self.failing_cases == 0
    }

    /// Human-readable summary followed by the kept failing cases.
    pub fn render(&self) -> String {
        let mut out = format!(
            "cases {}  rejected {}  engine mismatches {}  normalization mismatches {}  idempotence failures {}  execution failures {}  ({:.2?})\n",
            self.cases,
            self.rejected,
            self.engine_mismatches,
            self.normalization_mismatches,
            self.idempotence_failures,
            self.execution_failures,
            self.elapsed
        );
        for f in &self.failures {
            out.push_str(&format!("\n=== case {} ===\n", f.index));
            for d in &f.discrepancies {
                out.push_str(&format!("[{}]\n{}\n", d.kind(), d.detail()));
            }
            out.push_str(&format!(
                "--- query\n{}\n--- data\n{}--- schema\n{}",
                f.case.query,
                f.case.ntriples(),
                f.case.schema
            ));
        }
        out
    }
}

/// Seed of case `i` of a run, so a single case can be replayed.
pub fn case_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(i as u64)
}

/// Builds case `i` of a run.
pub fn generate_case(cfg: &CompareConfig, i: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(case_seed(cfg.seed, i));
    let (schema, binding, sdl) = match &cfg.schema {
        Some(text) => match crate::schema::parse_sdl(text) {
            Ok((s, b)) => (s, b, text.clone()),
            Err(_) => {
                return Case {
                    schema: text.clone(),
                    triples: Vec::new(),
                    query: "{}".into(),
                }
            }
        },
        None => {
            let (s, b) = random_schema(&mut rng);
            let sdl = to_sdl(&s, &b);
            (s, b, sdl)
        }
    };
    let triples = match &cfg.data {
        Some(data) => data.clone(),
        None => random_graph(
            &mut rng,
            &schema,
            &binding,
            &GraphConfig {
                max_triples: cfg.max_triples,
                multi_type: 0.0,
                type_iri: cfg.options.type_iri.clone(),
            },
        ),
    };
    let query = random_query(
        &mut rng,
        &schema,
        &binding,
        &triples,
        &QueryConfig {
            max_depth: cfg.max_depth,
            id_mode: cfg.options.id_mode,
        },
    );
    Case {
        schema: sdl,
        triples,
        query: query.to_string(),
    }
}

/// Runs `cfg.cases` random cases and tallies the discrepancies.
pub fn run_random(cfg: &CompareConfig) -> CompareReport {
    let start = Instant::now();
    let engine_cfg = EngineConfig {
        deadline: None,
        fault: cfg.fault,
    };
    let mut report = CompareReport::default();
    // A fixed schema and data set is loaded once.
    let fixed = match (&cfg.schema, &cfg.data) {
        (Some(_), Some(_)) => Some(generate_case(cfg, 0).open(&cfg.options)),
        _ => None,
    };
    for i in 0..cfg.cases {
        report.cases += 1;
        let case = generate_case(cfg, i);
        let outcome = match &fixed {
            Some(Ok(store)) => {
                let view = store.graph_view();
                check_query(store, &view, &case.query, &engine_cfg, cfg.checks).ok()
            }
            Some(Err(_)) => None,
            None => case.run(&cfg.options, &engine_cfg, cfg.checks),
        };
        let Some(found) = outcome else {
            report.rejected += 1;
            continue;
        };
        if found.is_empty() {
            continue;
        }
        report.failing_cases += 1;
        for d in &found {
            match d {
                Discrepancy::Engine { .. } => report.engine_mismatches += 1,
                Discrepancy::Normalization { .. } => report.normalization_mismatches += 1,
                Discrepancy::Idempotence { .. } => report.idempotence_failures += 1,
                Discrepancy::Failure(_) => report.execution_failures += 1,
            }
        }
        if report.failures.len() < cfg.keep_failures {
            let (case, discrepancies) = if cfg.minimize && case.triples.len() <= 500 {
                let kinds: Vec<&str> = found.iter().map(Discrepancy::kind).collect();
                let small = minimize(&case, |c| {
                    c.run(&cfg.options, &engine_cfg, cfg.checks)
                        .is_some_and(|ds| ds.iter().any(|d| kinds.contains(&d.kind())))
                });
                let ds = small
                    .run(&cfg.options, &engine_cfg, cfg.checks)
                    .unwrap_or_default();
                (small, ds)
            } else {
                (case, found)
            };
            report.failures.push(CaseFailure {
                index: i,
                case,
                discrepancies,
            });
        }
    }
    report.elapsed = start.elapsed();
    report
}

#[cfg(test)]
mod tests;
