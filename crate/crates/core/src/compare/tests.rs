use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::rdf::Term;
use crate::schema::{parse_sdl, validate_schema, IdMode};

fn config(cases: usize, seed: u64, mode: IdMode) -> CompareConfig {
    CompareConfig {
        cases,
        seed,
        options: StoreOptions {
            id_mode: mode,
            ..StoreOptions::default()
        },
        ..CompareConfig::default()
    }
}

#[test]
fn random_schemas_validate_in_both_modes() {
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (schema, binding) = random_schema(&mut rng);
        let sdl = to_sdl(&schema, &binding);
        let (reparsed, rebinding) = parse_sdl(&sdl).unwrap();
        assert_eq!(reparsed, schema, "{sdl}");
        for mode in [IdMode::Direct, IdMode::Join] {
            assert!(
                validate_schema(&reparsed, &rebinding, mode).is_ok(),
                "{sdl}"
            );
        }
    }
}

#[test]
fn generation_is_deterministic() {
    let cfg = config(1, 7, IdMode::Direct);
    for i in 0..20 {
        assert_eq!(generate_case(&cfg, i), generate_case(&cfg, i));
    }
    assert_ne!(generate_case(&cfg, 0), generate_case(&cfg, 1));
}

#[test]
fn random_cases_respect_size_limits() {
    let cfg = config(1, 3, IdMode::Join);
    for i in 0..200 {
        let case = generate_case(&cfg, i);
        assert!(case.triples.len() <= 50);
        let store = case.open(&cfg.options).unwrap();
        let ast = store.parse(&case.query).unwrap();
        assert!(depth(&ast.selection) <= 4, "{}", case.query);
    }
}

fn depth(sel: &[crate::query::Selection]) -> usize {
    use crate::query::Selection;
    sel.iter()
        .map(|s| match s {
            Selection::Field(f) => 1 + f.selection.as_deref().map_or(0, depth),
            Selection::Fragment(frag) => depth(&frag.selection),
        })
        .max()
        .unwrap_or(0)
}

#[test]
fn random_runs_agree_in_both_modes() {
    for mode in [IdMode::Direct, IdMode::Join] {
        let report = run_random(&config(300, 11, mode));
        assert_eq!(report.rejected, 0, "{}", report.render());
        assert!(report.passed(), "{}", report.render());
    }
}

#[test]
fn multi_typed_nodes_agree_with_the_oracle() {
    let checks = Checks {
        normalization: false,
        ..Checks::default()
    };
    for i in 0..300u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(i);
        let (schema, binding) = random_schema(&mut rng);
        let graph_cfg = GraphConfig {
            multi_type: 0.5,
            ..GraphConfig::default()
        };
        let triples = random_graph(&mut rng, &schema, &binding, &graph_cfg);
        let query = random_query(
            &mut rng,
            &schema,
            &binding,
            &triples,
            &QueryConfig::default(),
        );
        let case = Case {
            schema: to_sdl(&schema, &binding),
            triples,
            query: query.to_string(),
        };
        let found = case
            .run(&StoreOptions::default(), &EngineConfig::default(), checks)
            .unwrap();
        assert!(
            found.is_empty(),
            "{found:?}\n{}\n{}",
            case.query,
            case.ntriples()
        );
    }
}

#[test]
fn injected_fault_is_caught_and_minimized() {
    let mut cfg = config(200, 5, IdMode::Direct);
    cfg.fault = Some(Fault::SkipFirstCandidate);
    let report = run_random(&cfg);
    assert!(report.engine_mismatches > 0);
    let failure = &report.failures[0];
    assert!(failure.discrepancies.iter().any(|d| d.kind() == "engine"));
    let original = generate_case(&cfg, failure.index);
    assert!(failure.case.triples.len() <= original.triples.len());
    // Every remaining triple is needed for the failure.
    for i in 0..failure.case.triples.len() {
        let mut smaller = failure.case.clone();
        smaller.triples.remove(i);
        let engine_cfg = EngineConfig {
            deadline: None,
            fault: cfg.fault,
        };
        let still = smaller
            .run(&cfg.options, &engine_cfg, Checks::default())
            .is_some_and(|ds| ds.iter().any(|d| d.kind() == "engine"));
        assert!(!still);
    }
    assert!(report.render().contains("[engine]"));
}

#[test]
fn minimizer_keeps_only_needed_triples() {
    let t = |s: &str| (Term::iri(s), Term::iri("p"), Term::iri("o"));
    let case = Case {
        schema: String::new(),
        triples: vec![t("a"), t("b"), t("c"), t("d")],
        query: String::new(),
    };
    let small = minimize(&case, |c| {
        c.triples.contains(&t("b")) && c.triples.contains(&t("d"))
    });
    assert_eq!(small.triples, vec![t("b"), t("d")]);
}

#[test]
fn rejected_queries_are_counted() {
    let schema = include_str!("../../tests/fixtures/example.graphql");
    let store = Store::open(schema, TripleIndex::default(), StoreOptions::default()).unwrap();
    let view = store.graph_view();
    let cfg = EngineConfig::default();
    assert!(check_query(&store, &view, "{ nope }", &cfg, Checks::default()).is_err());
    assert_eq!(
        check_query(
            &store,
            &view,
            "{ people { fname } }",
            &cfg,
            Checks::default()
        )
        .unwrap(),
        Vec::new()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn normalization_is_idempotent(seed in any::<u64>()) {
        let cfg = config(1, seed, IdMode::Direct);
        let case = generate_case(&cfg, 0);
        let store = case.open(&cfg.options).unwrap();
        let normal = store.prepare(&case.query).unwrap();
        let again = store.normalize(&normal.to_ast()).unwrap();
        prop_assert_eq!(again, normal);
    }
}
