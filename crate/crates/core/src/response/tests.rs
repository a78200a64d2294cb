use crate::engine::EngineConfig;
use crate::rdf::{parse_ntriples, TripleIndex};
use crate::schema::IdMode;
use crate::{Store, StoreOptions};

const SDL: &str = include_str!("../../tests/fixtures/example.graphql");
const EX33: &str = include_str!("../../tests/fixtures/example33.nt");
const PHI1: &str = r#"people(lname: "Doe") { fname email }"#;

fn store(sdl: &str, data: &str, mode: IdMode) -> Store {
    let index = TripleIndex::load(parse_ntriples(data).unwrap());
    let options = StoreOptions {
        id_mode: mode,
        ..Default::default()
    };
    Store::open(sdl, index, options).unwrap()
}

/// Engine output, checked against both oracles and the materialization
/// counter before being returned.
fn answer(s: &Store, query: &str) -> String {
    let nq = s.prepare(query).unwrap();
    let exec = s.execute_normalized(&nq, &EngineConfig::default()).unwrap();
    let view = s.graph_view();
    let engine = exec.response.serialize();
    assert_eq!(
        engine,
        s.oracle(&view, &nq).serialize(),
        "oracle disagrees on {query}"
    );
    let raw = s.oracle_raw(&view, &s.parse(query).unwrap()).serialize();
    assert_eq!(engine, raw, "raw oracle disagrees on {query}");
    assert_eq!(
        exec.build.materialized + 1,
        exec.response.data.object_count()
    );
    engine
}

#[test]
fn example_response_matches_golden_file() {
    let s = store(SDL, EX33, IdMode::Direct);
    let golden = include_str!("../../tests/fixtures/example33_response.json");
    assert_eq!(answer(&s, PHI1), golden.trim_end());
}

#[test]
fn empty_list_and_null_cases() {
    let s = store(SDL, EX33, IdMode::Direct);
    assert_eq!(
        answer(&s, "companies { name }"),
        r#"{"data":{"companies":[]}}"#
    );
    let s = store(SDL, "", IdMode::Direct);
    assert_eq!(answer(&s, PHI1), r#"{"data":{"people":[]}}"#);
}

const ABSTRACT: &str = r#"
interface Entity @uri(value: "Entity") { id: ID email: String @uri(value: "email") }
type Person implements Entity @uri(value: "Person") {
  id: ID
  email: String
  age: Int @uri(value: "age")
  nick: [String] @uri(value: "nick")
  knows: [Entity] @uri(value: "knows")
  boss: Person @uri(value: "boss") @filter
  score: Float @uri(value: "score")
  ok: Boolean @uri(value: "ok")
}
type Company implements Entity @uri(value: "Company") { id: ID email: String name: String @uri(value: "name") }
type Query { entities: [Entity] people(age: Int, id: ID): [Person] boss: Person }
"#;

const ABSTRACT_DATA: &str = r#"
<p1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <Person> .
<p1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <Entity> .
<p1> <age> "30"^^<http://www.w3.org/2001/XMLSchema#integer> .
<p1> <nick> "b" .
<p1> <nick> "a" .
<p1> <knows> <c1> .
<p1> <knows> <p2> .
<p1> <boss> <p2> .
<p1> <score> "2.5"^^<http://www.w3.org/2001/XMLSchema#double> .
<p1> <ok> "true"^^<http://www.w3.org/2001/XMLSchema#boolean> .
<p2> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <Person> .
<p2> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <Entity> .
<p2> <email> "e2" .
<p2> <boss> <p1> .
<p2> <boss> <c1> .
<p2> <age> "x" .
<c1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <Company> .
<c1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <Entity> .
<c1> <name> "Acme" .
"#;

#[test]
fn fragments_contribute_only_on_matching_types() {
    let s = store(ABSTRACT, ABSTRACT_DATA, IdMode::Direct);
    let out = answer(
        &s,
        "entities { id ... on Person { age } ... on Company { name } }",
    );
    assert_eq!(
        out,
        r#"{"data":{"entities":[{"id":"p1","age":30},{"id":"c1","name":"Acme"},{"id":"p2","age":"x"}]}}"#
    );
}

#[test]
fn scalar_lists_and_typed_scalars() {
    let s = store(ABSTRACT, ABSTRACT_DATA, IdMode::Direct);
    let out = answer(&s, "people(age: 30) { nick score ok knows { id } }");
    assert_eq!(
        out,
        r#"{"data":{"people":[{"nick":["b","a"],"score":2.5,"ok":true,"knows":[{"id":"c1"},{"id":"p2"}]}]}}"#
    );
}

#[test]
fn non_list_cardinality_keeps_the_first_value() {
    let s = store(ABSTRACT, ABSTRACT_DATA, IdMode::Direct);
    // p2's boss edges go to p1 and c1, but only p1 passes the type filter.
    let out = answer(&s, "people { id boss { id } }");
    assert_eq!(
        out,
        r#"{"data":{"people":[{"id":"p1","boss":{"id":"p2"}},{"id":"p2","boss":{"id":"p1"}}]}}"#
    );
    let out = answer(&s, "boss { id }");
    assert!(out.starts_with(r#"{"data":{"boss":{"id":"p1"}},"errors":[{"message":"field \"boss\" has more than one value at the query root"}"#), "{out}");
}

#[test]
fn id_argument_and_leaf_modes() {
    let s = store(ABSTRACT, ABSTRACT_DATA, IdMode::Direct);
    assert_eq!(
        answer(&s, r#"people(id: "p2") { id email }"#),
        r#"{"data":{"people":[{"id":"p2","email":"e2"}]}}"#
    );
    assert_eq!(
        answer(&s, r#"people(id: "zz") { id }"#),
        r#"{"data":{"people":[]}}"#
    );
}
