use std::collections::BTreeSet;
use std::path::PathBuf;

use closurekb::ablation::{ablate, window_retrieval, AblationConfig, RetrievalMode, RunStatus};
use closurekb::closure::closure;
use closurekb::corpus::{Corpus, KnowledgeSources};
use closurekb::par::Exec;
use closurekb::retrieval::SemanticIndex;

fn words(s: &str) -> BTreeSet<String> {
    s.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_lowercase).collect()
}

fn fixture(name: &str) -> Corpus {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    Corpus::load(&dir).unwrap()
}

#[test]
fn dispersed_fixture_shape() {
    let c = fixture("dispersed");
    let g = c.graph(KnowledgeSources::Heterogeneous).unwrap();
    let query = c.query.clone().unwrap();
    let q = words(&query);
    let deps: Vec<String> = closure(&g, "code:thermal_limit").unwrap().members.into_iter().filter(|m| m != "code:thermal_limit").collect();
    assert!(deps.len() >= 3, "{deps:?}");
    // no dependency, nor the card describing it, shares a word with the query
    for d in &deps {
        for e in g.entities().filter(|e| &e.id == d || g.has_edge(&e.id, d, closurekb::knowledge_graph::EdgeKind::AlignsTo)) {
            let w = words(&e.description);
            assert!(w.is_disjoint(&q), "{} shares {:?}", e.id, w.intersection(&q).collect::<Vec<_>>());
        }
    }
    let index = SemanticIndex::from_graph(&g).unwrap();
    let w = window_retrieval(&g, &index, &query, 3).unwrap();
    assert!(w.structural.contains("code:thermal_limit"), "{:?}", w.structural);
}

#[test]
fn closure_versus_window() {
    let c = fixture("dispersed");
    let closure = ablate(&AblationConfig { runs: 5, ..Default::default() }, &c, None, Exec::Parallel).unwrap();
    println!("{}", closure.to_text());
    assert_eq!(closure.summary.ok, 5);
    let cfg = AblationConfig { retrieval_mode: RetrievalMode::Window, window_k: 3, runs: 5, ..Default::default() };
    let window = ablate(&cfg, &c, None, Exec::Parallel).unwrap();
    println!("{}", window.to_text());
    assert_eq!(window.summary.ok, 0);
    assert!(window.rows.iter().all(|r| r.status == RunStatus::Failed && !r.missing_declarations.is_empty()));
}

#[test]
fn battery_fixture_matches_generator() {
    let inst = closurekb::battery::reference_instance();
    let generated = closurekb::battery::battery_corpus(&inst.data, inst.event.as_ref().unwrap()).unwrap();
    assert_eq!(fixture("battery"), generated);
}

const M01_QUERY: &str = "Explain the starvation constraints of machine m01";

fn sources_run(ks: KnowledgeSources) -> closurekb::ablation::RunRow {
    let cfg = AblationConfig { knowledge_sources: ks, runs: 1, ..Default::default() };
    ablate(&cfg, &fixture("battery"), Some(M01_QUERY), Exec::Sequential).unwrap().rows.remove(0)
}

#[test]
fn knowledge_source_contrast() {
    let papers = sources_run(KnowledgeSources::PapersOnly);
    assert_eq!(papers.status, RunStatus::GenerationFailed, "{papers:?}");
    assert!(papers.error.as_deref().unwrap().starts_with("no stored expression"), "{papers:?}");
    let code = sources_run(KnowledgeSources::CodeOnly);
    assert_eq!(code.status, RunStatus::Ok, "{code:?}");
    assert!(code.flags.iter().any(|f| f == "empty_snippets"));
    let het = sources_run(KnowledgeSources::Heterogeneous);
    assert_eq!(het.status, RunStatus::Ok, "{het:?}");
    assert!(!het.flags.iter().any(|f| f == "empty_snippets"));
    let ast = closurekb::model_dsl::parse_model(het.code.as_deref().unwrap()).unwrap();
    let lingo = closurekb::model_dsl::emit_model(&ast, closurekb::model_dsl::Dialect::LingoFlavored).unwrap();
    for b in ["B13", "B22", "B31"] {
        let line = format!("@for(timeSequence(i)|i#ge#2: m01(i) <= {b}(i-1));");
        assert!(lingo.contains(&line), "{line} not in\n{lingo}");
    }
}
