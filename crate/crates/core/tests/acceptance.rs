//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use rdfgql::bench::{pavgqps, run_bench, BenchConfig, BenchLength, QueryRunner};
use rdfgql::compare::{run_random, CompareConfig, CompareReport};
use rdfgql::engine::{mwlj, EngineConfig};
use rdfgql::operands::{
    build_dependency_graph, generate_operands, OperandKind, OperandOptions, QueryOperands,
};
use rdfgql::query::NormalizedQuery;
use rdfgql::rdf::{parse_ntriples, Term, TermOverlay, TripleIndex};
use rdfgql::schema::IdMode;
use rdfgql::synth;
use rdfgql::{Store, StoreOptions};

const SCHEMA: &str = include_str!("fixtures/example.graphql");
const EXAMPLE_GRAPH: &str = include_str!("fixtures/example33.nt");
const GOLDEN: &str = include_str!("fixtures/example33_response.json");
const CORPUS_GRAPH: &str = include_str!("fixtures/corpus/data.nt");
const PHI1: &str = r#"{ people(lname: "Doe") { fname email } }"#;
const PHI2: &str = "{ companies { name employees { id lname } } }";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn store(schema: &str, data: &str, mode: IdMode) -> Store {
    let index = TripleIndex::load(parse_ntriples(data).expect("fixture parses"));
    let options = StoreOptions {
        id_mode: mode,
        ..StoreOptions::default()
    };
    Store::open(schema, index, options).expect("fixture schema is valid")
}

fn operands(store: &Store, query: &NormalizedQuery) -> (QueryOperands, Vec<String>) {
    let mut overlay = TermOverlay::new(store.index().dictionary());
    let options = OperandOptions {
        id_mode: store.options().id_mode,
        type_iri: store.options().type_iri.clone(),
    };
    let ops = generate_operands(
        store.schema(),
        store.binding(),
        query,
        &mut overlay,
        &options,
    )
    .expect("operands");
    let shown = ops
        .operands
        .iter()
        .map(|o| o.render(&overlay, ops.type_pred))
        .collect();
    (ops, shown)
}

fn check_operands() -> Outcome {
    let start = Instant::now();
    let s = store(SCHEMA, EXAMPLE_GRAPH, IdMode::Direct);
    let expected_phi1 = [
        "⟨?x, rdf:type, Person⟩",
        r#"⟨?x, lname, "Doe"⟩"#,
        "⟨?x, fname, ?y⟩",
        "⟨?x, email, ?z⟩",
    ];
    // Transcribed from the running example's operand listing.
    let expected_phi2 = [
        "⟨?x, rdf:type, Company⟩",
        "⟨?x, name, ?y⟩",
        "⟨?x, employees, ?z⟩",
        "⟨?z, rdf:type, Person⟩",
        "⟨?z, lname, ?w⟩",
        "⟨?z, id, ?v⟩",
    ];
    let (_, phi1) = operands(&s, &s.prepare(PHI1).unwrap());
    let (_, phi2) = operands(&s, &s.prepare(PHI2).unwrap());
    let elapsed = start.elapsed();
    let mut problems = Vec::new();
    if phi1 != expected_phi1 {
        problems.push(format!("phi1 {phi1:?}"));
    }
    if phi2 != expected_phi2 {
        let diff: Vec<String> = phi2
            .iter()
            .zip(expected_phi2)
            .enumerate()
            .filter(|(_, (got, want))| got.as_str() != *want)
            .map(|(i, (got, want))| format!("#{}: got {got}, expected {want}", i + 1))
            .collect();
        problems.push(format!("phi2 {}", diff.join("; ")));
    }
    if elapsed >= Duration::from_secs(1) {
        problems.push(format!("took {elapsed:.2?}"));
    }
    if problems.is_empty() {
        outcome(
            true,
            format!("phi1 4 operands, phi2 6 operands, {elapsed:.2?}"),
        )
    } else {
        outcome(false, problems.join(" | "))
    }
}

fn one_based(sets: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = sets
        .into_iter()
        .map(|s| s.into_iter().map(|v| v + 1).collect())
        .collect();
    out.iter_mut().for_each(|s| s.sort());
    out.sort();
    out
}

fn check_dependency_graphs() -> Outcome {
    let s = store(SCHEMA, EXAMPLE_GRAPH, IdMode::Direct);
    let (ops1, _) = operands(&s, &s.prepare(PHI1).unwrap());
    let g1 = build_dependency_graph(&ops1);
    let (ops2, _) = operands(&s, &s.prepare(PHI2).unwrap());
    let g2 = build_dependency_graph(&ops2);

    let scc1 = one_based(g1.strong_components());
    let ind1 = one_based(vec![g1.independent_strong_component().0]);
    let no_34 = !g1.has_edge(2, 3) && !g1.has_edge(3, 2);
    let ind2 = one_based(vec![g2.independent_strong_component().0]);
    let mutual_34 = g2.has_edge(2, 3) && g2.has_edge(3, 2);

    let pass = scc1 == vec![vec![1, 2], vec![3], vec![4]]
        && ind1 == vec![vec![1, 2]]
        && no_34
        && ind2 == vec![vec![1]]
        && mutual_34;
    outcome(
        pass,
        format!("phi1 SCs {scc1:?}, independent {ind1:?}, 3-4 edge absent {no_34}; phi2 independent {ind2:?}, 3<->4 {mutual_34}"),
    )
}

fn check_execution() -> Outcome {
    let s = store(SCHEMA, EXAMPLE_GRAPH, IdMode::Direct);
    let query = s.prepare(PHI1).unwrap();
    let (ops, _) = operands(&s, &query);
    let graph = build_dependency_graph(&ops);
    let mut mappings: Vec<String> = Vec::new();
    mwlj(
        s.index(),
        &ops,
        &graph,
        &EngineConfig::default(),
        &mut |m| {
            let parts: Vec<String> = m
                .bound()
                .map(|(label, term)| {
                    let text = match s.index().decode(term).unwrap() {
                        Term::Iri(iri) => iri.clone(),
                        Term::Literal(l) => format!("\"{}\"", l.lexical()),
                    };
                    format!("{}:{text}", label.display_name())
                })
                .collect();
            mappings.push(format!("{{{}}}", parts.join(",")));
        },
    )
    .expect("no deadline");
    let expected = [r#"{x:p1,y:"Jon"}"#, r#"{x:p1,z:"e1"}"#, r#"{x:p2,y:"Jan"}"#];
    let response = s
        .execute(PHI1, &EngineConfig::default())
        .unwrap()
        .response
        .serialize();
    let pass = mappings == expected && response == GOLDEN.trim();
    outcome(
        pass,
        format!("mappings {} response {response}", mappings.join(" ")),
    )
}

fn random_reports() -> (Vec<(u64, IdMode, CompareReport)>, Duration) {
    let start = Instant::now();
    let mut reports = Vec::new();
    for seed in 1..=5u64 {
        for mode in [IdMode::Direct, IdMode::Join] {
            let cfg = CompareConfig {
                cases: 1000,
                seed,
                options: StoreOptions {
                    id_mode: mode,
                    ..StoreOptions::default()
                },
                ..CompareConfig::default()
            };
            reports.push((seed, mode, run_random(&cfg)));
        }
    }
    (reports, start.elapsed())
}

fn check_oracle_equivalence(
    reports: &[(u64, IdMode, CompareReport)],
    elapsed: Duration,
) -> Outcome {
    let cases: usize = reports.iter().map(|r| r.2.cases).sum();
    let rejected: usize = reports.iter().map(|r| r.2.rejected).sum();
    let mismatches: usize = reports
        .iter()
        .map(|r| r.2.engine_mismatches + r.2.execution_failures)
        .sum();
    let pass =
        mismatches == 0 && rejected == 0 && cases == 10_000 && elapsed < Duration::from_secs(60);
    let mut detail = format!("{cases} cases (5 seeds x 1000 x 2 modes), {mismatches} mismatches, {rejected} rejected, {elapsed:.2?}");
    if let Some((seed, mode, r)) = reports.iter().find(|r| !r.2.failures.is_empty()) {
        detail.push_str(&format!(
            "\nfirst failure (seed {seed}, {mode:?}):\n{}",
            r.render()
        ));
    }
    outcome(pass, detail)
}

fn check_normalization(reports: &[(u64, IdMode, CompareReport)]) -> Outcome {
    let cases: usize = reports.iter().map(|r| r.2.cases - r.2.rejected).sum();
    let unsound: usize = reports.iter().map(|r| r.2.normalization_mismatches).sum();
    let not_idempotent: usize = reports.iter().map(|r| r.2.idempotence_failures).sum();
    outcome(
        unsound == 0 && not_idempotent == 0 && cases == 10_000,
        format!(
            "{cases} cases, {unsound} response differences, {not_idempotent} idempotence failures"
        ),
    )
}

fn check_linearity() -> Outcome {
    let mut rows = Vec::new();
    for facts in [8usize, 80, 800, 8000] {
        let f = synth::star(facts);
        let s = store(&f.schema, &f.ntriples(), IdMode::Direct);
        let query = s.prepare(&f.query).unwrap();
        let mut best = Duration::MAX;
        let mut last = None;
        for _ in 0..7 {
            let start = Instant::now();
            let exec = s
                .execute_normalized(&query, &EngineConfig::default())
                .unwrap();
            best = best.min(start.elapsed());
            last = Some(exec);
        }
        let exec = last.unwrap();
        rows.push((
            facts,
            exec.response.serialize().len(),
            best,
            exec.engine.peak_buffer,
        ));
    }
    let mut pass = true;
    let mut detail = Vec::new();
    for pair in rows.windows(2) {
        let bytes_ratio = pair[1].1 as f64 / pair[0].1 as f64;
        let time_ratio = pair[1].2.as_secs_f64() / pair[0].2.as_secs_f64();
        pass &= time_ratio <= 15.0;
        detail.push(format!("x{bytes_ratio:.1} bytes -> x{time_ratio:.1} time"));
    }
    let buffers: Vec<usize> = rows.iter().map(|r| r.3).collect();
    pass &= buffers.windows(2).all(|w| w[0] == w[1]);
    let largest = rows.last().unwrap().1;
    outcome(
        pass,
        format!(
            "{}; largest response {largest} bytes; peak buffer {buffers:?}",
            detail.join(", ")
        ),
    )
}

/// Objects in the `data` tree, the `data` object itself excluded.
fn json_objects(value: &serde_json::Value) -> usize {
    match value {
        serde_json::Value::Object(map) => 1 + map.values().map(json_objects).sum::<usize>(),
        serde_json::Value::Array(items) => items.iter().map(json_objects).sum(),
        _ => 0,
    }
}

fn check_prefix_merge() -> Outcome {
    let mut cases: Vec<(Store, String)> = Vec::new();
    let corpus_dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus");
    let mut files: Vec<_> = std::fs::read_dir(&corpus_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "graphql"))
        .collect();
    files.sort();
    for mode in [IdMode::Direct, IdMode::Join] {
        for data in [EXAMPLE_GRAPH, CORPUS_GRAPH] {
            for file in &files {
                cases.push((
                    store(SCHEMA, data, mode),
                    std::fs::read_to_string(file).unwrap(),
                ));
            }
        }
        let star = synth::star(200);
        cases.push((
            store(&star.schema, &star.ntriples(), mode),
            star.query.clone(),
        ));
        let items = synth::items(300);
        cases.push((
            store(&items.schema, &items.ntriples(), mode),
            items.query.clone(),
        ));
    }
    let mut bad = Vec::new();
    let mut total = 0;
    for (s, query) in &cases {
        let exec = s.execute(query, &EngineConfig::default()).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&exec.response.serialize()).unwrap();
        let distinct = json_objects(&doc["data"]) - 1;
        total += distinct;
        if exec.build.materialized != distinct {
            bad.push(format!(
                "{query}: materialized {} vs {distinct}",
                exec.build.materialized
            ));
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            format!(
                "{} runs, {total} response objects, counter equal on every run",
                cases.len()
            )
        } else {
            bad.join("; ")
        },
    )
}

fn check_id_modes() -> Outcome {
    let f = synth::items(10_000);
    let data = f.ntriples();
    let mut results = Vec::new();
    for mode in [IdMode::Direct, IdMode::Join] {
        let s = store(&f.schema, &data, mode);
        let query = s.prepare(&f.query).unwrap();
        let (ops, _) = operands(&s, &query);
        let id_ops: Vec<usize> = ops
            .operands
            .iter()
            .enumerate()
            .filter(|(_, o)| o.kind == OperandKind::Leaf && o.response_key.as_deref() == Some("id"))
            .map(|(i, _)| i)
            .collect();
        let exec = s
            .execute_normalized(&query, &EngineConfig::default())
            .unwrap();
        let slices: u64 = id_ops.iter().map(|&i| exec.engine.slices[i]).sum();
        results.push((slices, exec.response.serialize()));
    }
    let (direct, join) = (&results[0], &results[1]);
    let pass = direct.0 == 0 && join.0 >= 10_000 && direct.1 == join.1;
    outcome(
        pass,
        format!(
            "direct {} ID slices, join {} ID slices, responses identical: {} ({} bytes)",
            direct.0,
            join.0,
            direct.1 == join.1,
            direct.1.len()
        ),
    )
}

/// Sleeps past the timeout for one query of the mix.
struct Sleepy<'a> {
    store: &'a Store,
    slow: String,
    sleep: Duration,
}

impl QueryRunner for Sleepy<'_> {
    fn run(&self, query: &str, deadline: Instant) -> Result<String, String> {
        if query == self.slow {
            std::thread::sleep(self.sleep);
        }
        self.store.run(query, deadline)
    }
}

fn check_bench() -> Outcome {
    let corpus_dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus");
    let mut mix: Vec<(String, String)> = Vec::new();
    let mut files: Vec<_> = std::fs::read_dir(&corpus_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "graphql"))
        .collect();
    files.sort();
    for file in files {
        let id = file.file_stem().unwrap().to_string_lossy().into_owned();
        mix.push((id, std::fs::read_to_string(&file).unwrap()));
    }
    let s = store(SCHEMA, CORPUS_GRAPH, IdMode::Direct);
    let cfg = BenchConfig {
        clients: 1,
        length: BenchLength::Repetitions(5),
        ..BenchConfig::default()
    };
    let report = run_bench(&s, &mix, &cfg).unwrap();
    let all_ok = report
        .queries
        .iter()
        .all(|q| q.successes == q.executions && q.executions == 5 && q.consistent);
    let plain = report.pavgqps();

    let penalty = Duration::from_secs(180);
    let sleepy = Sleepy {
        store: &s,
        slow: mix[0].1.clone(),
        sleep: Duration::from_millis(60),
    };
    let cfg = BenchConfig {
        clients: 1,
        length: BenchLength::Repetitions(2),
        timeout: Duration::from_millis(20),
        penalty,
        warmup: false,
    };
    let report = run_bench(&sleepy, &mix, &cfg).unwrap();
    let slow = &report.queries[0];
    let penalized = slow.failures == slow.executions && slow.successes == 0;
    // Recompute the formula from the recorded runs.
    let means: Vec<f64> = report
        .queries
        .iter()
        .map(|q| {
            let total: f64 = q
                .runs
                .iter()
                .map(|r| if r.ok { r.time.as_secs_f64() } else { 180.0 })
                .sum();
            total / q.runs.len() as f64
        })
        .collect();
    let expected: f64 = means.iter().map(|t| 1.0 / t).sum::<f64>() / means.len() as f64;
    let got = report.pavgqps();
    let rel = ((got - expected) / expected).abs();
    let formula_ok =
        rel <= 1e-9 && (pavgqps(&means) - expected).abs() <= 1e-9 * expected && means[0] == 180.0;
    outcome(
        all_ok && plain > 0.0 && penalized && formula_ok,
        format!(
            "clean run: all successes {all_ok}, pAvgQPS {plain:.1}; slow query: {}/{} failed, mean {:.1} s, pAvgQPS {got:.6} vs {expected:.6} (rel err {rel:.1e})",
            slow.failures, slow.executions, means[0]
        ),
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("example operands", check_operands()),
        ("example dependency graphs", check_dependency_graphs()),
        ("example execution", check_execution()),
    ];
    let (reports, elapsed) = random_reports();
    results.push((
        "oracle equivalence",
        check_oracle_equivalence(&reports, elapsed),
    ));
    results.push(("normalization soundness", check_normalization(&reports)));
    results.push(("linearity", check_linearity()));
    results.push(("prefix merge", check_prefix_merge()));
    results.push(("id-mode differential", check_id_modes()));
    results.push(("bench sanity", check_bench()));

    let mut failed = 0;
    for (name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag}  {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
