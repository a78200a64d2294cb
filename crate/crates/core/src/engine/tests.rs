use super::*;
use crate::operands::{build_dependency_graph, generate_operands, OperandOptions};
use crate::query::{normalize, parse_query, validate_query};
use crate::rdf::{parse_ntriples, Term, TermOverlay};
use crate::schema::{parse_sdl, IdMode};

const SDL: &str = include_str!("../../tests/fixtures/example.graphql");
const EX33: &str = include_str!("../../tests/fixtures/example33.nt");
const PHI1: &str = r#"people(lname: "Doe") { fname email }"#;
const PHI2: &str = "companies { name employees { id lname } }";

type Rendered = Vec<Vec<(String, String)>>;

fn run_with(sdl: &str, data: &str, query: &str, cfg: &EngineConfig) -> (Rendered, ExecStats) {
    let (schema, binding) = parse_sdl(sdl).unwrap();
    let index = TripleIndex::load(parse_ntriples(data).unwrap());
    let ast = parse_query(query).unwrap();
    validate_query(&schema, &ast).unwrap();
    let nq = normalize(&schema, &ast).unwrap();
    let mut overlay = TermOverlay::new(index.dictionary());
    let options = OperandOptions {
        id_mode: IdMode::Direct,
        ..Default::default()
    };
    let ops = generate_operands(&schema, &binding, &nq, &mut overlay, &options).unwrap();
    let graph = build_dependency_graph(&ops);
    let mut out = Vec::new();
    let stats = mwlj(&index, &ops, &graph, cfg, &mut |m| {
        out.push(
            m.bound()
                .map(|(l, t)| {
                    let text = match overlay.decode(t).unwrap() {
                        Term::Iri(i) => i.clone(),
                        Term::Literal(l) => format!("\"{}\"", l.lexical()),
                    };
                    (l.display_name(), text)
                })
                .collect(),
        )
    })
    .unwrap();
    (out, stats)
}

fn run(data: &str, query: &str) -> Rendered {
    run_with(SDL, data, query, &EngineConfig::default()).0
}

fn m(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

#[test]
fn phi1_over_example_graph() {
    assert_eq!(
        run(EX33, PHI1),
        [
            m(&[("x", "p1"), ("y", "\"Jon\"")]),
            m(&[("x", "p1"), ("z", "\"e1\"")]),
            m(&[("x", "p2"), ("y", "\"Jan\"")]),
        ]
    );
}

#[test]
fn empty_results() {
    assert!(run("", PHI1).is_empty());
    assert!(run(EX33, PHI2).is_empty());
}

#[test]
fn failed_argument_drops_the_candidate() {
    let data = format!(
        "{EX33}<p3> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <Person> .\n<p3> <lname> \"Poe\" .\n<p3> <fname> \"Jim\" .\n"
    );
    let out = run(&data, PHI1);
    assert_eq!(out.len(), 3);
    assert!(out.iter().flatten().all(|(_, v)| v != "p3"));
}

#[test]
fn type_filter_joins_with_the_edge() {
    // employees {p1, p2}; Persons {p2, p3}: only p2 survives the filter.
    let data = "<c1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <Company> .
<c1> <employees> <p1> .
<c1> <employees> <p2> .
<p2> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <Person> .
<p3> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <Person> .
<p2> <lname> \"Doe\" .
";
    assert_eq!(
        run(data, "companies { employees { lname } }"),
        [m(&[("x", "c1"), ("y", "p2"), ("z", "\"Doe\"")])]
    );
    // A company whose employees all fail the filter still appears.
    let data = "<c1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <Company> .
<c1> <employees> <p1> .
<p1> <lname> \"Doe\" .
";
    assert_eq!(
        run(data, "companies { employees { lname } }"),
        [m(&[("x", "c1")])]
    );
}

#[test]
fn node_without_any_nested_value_is_emitted_once() {
    let data = "<p9> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <Person> .\n";
    assert_eq!(run(data, "people { fname email }"), [m(&[("x", "p9")])]);
}

#[test]
fn deterministic_and_counted() {
    let cfg = EngineConfig::default();
    let (a, sa) = run_with(SDL, EX33, PHI1, &cfg);
    let (b, sb) = run_with(SDL, EX33, PHI1, &cfg);
    assert_eq!(a, b);
    assert_eq!(sa, sb);
    assert_eq!(sa.mappings, 3);
    // x is resolved twice (p1, p2) in operands 1 and 2, once per candidate
    // in operands 3 and 4; y and z are then bound in the leaf joins.
    assert_eq!(sa.slices[0], 2);
    assert_eq!(sa.slices[3], 2 + 1);
}

#[test]
fn injected_fault_changes_output() {
    let cfg = EngineConfig {
        fault: Some(Fault::SkipFirstCandidate),
        ..Default::default()
    };
    let (out, _) = run_with(SDL, EX33, PHI1, &cfg);
    assert_ne!(out, run(EX33, PHI1));
}

#[test]
fn deadline_in_the_past_times_out() {
    let mut data = String::new();
    for i in 0..2000 {
        data.push_str(&format!(
            "<p{i}> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <Person> .\n<p{i}> <fname> \"n{i}\" .\n"
        ));
    }
    let (schema, binding) = parse_sdl(SDL).unwrap();
    let index = TripleIndex::load(parse_ntriples(&data).unwrap());
    let nq = normalize(&schema, &parse_query("people { fname }").unwrap()).unwrap();
    let mut overlay = TermOverlay::new(index.dictionary());
    let ops = generate_operands(
        &schema,
        &binding,
        &nq,
        &mut overlay,
        &OperandOptions::default(),
    )
    .unwrap();
    let graph = build_dependency_graph(&ops);
    let cfg = EngineConfig {
        deadline: Some(Instant::now()),
        ..Default::default()
    };
    assert_eq!(
        mwlj(&index, &ops, &graph, &cfg, &mut |_| {}),
        Err(ExecError::Timeout)
    );
}
