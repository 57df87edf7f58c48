//! Ablation harness: the same generator fed by closure retrieval or by a
//! plain top-k semantic window, over selectable knowledge sources.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::codegen::{
    assemble_context, repair_from, validate, CodegenError, Generator, Script, TemplateGenerator, ValidationReport,
};
use crate::corpus::{Corpus, KnowledgeSources};
use crate::knowledge_graph::{Direction, EdgeKind, KgError, KnowledgeGraph, Source};
use crate::par::{map_range, Exec};
use crate::retrieval::{retrieve, RetrievalResult, SemanticIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalMode {
    Closure,
    Window,
}

impl RetrievalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RetrievalMode::Closure => "closure",
            RetrievalMode::Window => "window",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorChoice {
    Template,
    /// Per-run scripted generator.
    Script { script: Script },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationConfig {
    pub knowledge_sources: KnowledgeSources,
    pub retrieval_mode: RetrievalMode,
    /// Semantic top-k: the whole context in window mode, the snippet
    /// budget in closure mode.
    pub window_k: usize,
    pub runs: usize,
    pub generator: GeneratorChoice,
    pub max_rounds: usize,
}

impl Default for AblationConfig {
    fn default() -> Self {
        AblationConfig {
            knowledge_sources: KnowledgeSources::Heterogeneous,
            retrieval_mode: RetrievalMode::Closure,
            window_k: 3,
            runs: 5,
            generator: GeneratorChoice::Template,
            max_rounds: crate::codegen::DEFAULT_MAX_ROUNDS,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AblationError {
    #[error("window_k must be at least 1 in window mode")]
    ZeroWindow,
    #[error("corpus has no query")]
    NoQuery,
    #[error(transparent)]
    Graph(#[from] KgError),
    #[error("index: {0}")]
    Index(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed,
    GenerationFailed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Failed => "failed",
            RunStatus::GenerationFailed => "generation_failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub run: usize,
    pub status: RunStatus,
    pub missing_declarations: Vec<String>,
    pub flags: Vec<String>,
    pub rounds: usize,
    pub error: Option<String>,
    #[serde(skip)]
    pub code: Option<String>,
    #[serde(skip)]
    pub report: Option<ValidationReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub ok: usize,
    pub failed: usize,
    pub generation_failed: usize,
    /// Runs whose report listed at least one missing declaration.
    pub with_missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub config: AblationConfig,
    pub query: String,
    pub rows: Vec<RunRow>,
    pub summary: Summary,
}

impl AblationReport {
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "knowledge_sources={}", c.knowledge_sources.as_str());
        let _ = writeln!(s, "retrieval_mode={}", c.retrieval_mode.as_str());
        let _ = writeln!(s, "window_k={}", c.window_k);
        let _ = writeln!(s, "query={}", self.query);
        for r in &self.rows {
            let _ = write!(
                s,
                "run={} status={} rounds={} missing={} flags={}",
                r.run,
                r.status.as_str(),
                r.rounds,
                r.missing_declarations.join(","),
                r.flags.join(",")
            );
            if let Some(e) = &r.error {
                let _ = write!(s, " error={}", e.replace('\n', " "));
            }
            s.push('\n');
        }
        let m = &self.summary;
        let _ = writeln!(
            s,
            "summary runs={} ok={} failed={} generation_failed={} with_missing={}",
            m.runs, m.ok, m.failed, m.generation_failed, m.with_missing
        );
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Entities of the first `k` distinct semantic hits, plus the code
/// entities paper hits align to. No closure is taken.
pub fn window_retrieval(graph: &KnowledgeGraph, index: &SemanticIndex, query: &str, k: usize) -> Result<RetrievalResult, KgError> {
    let hits = index.search(query, index.len());
    let mut seeds: Vec<String> = Vec::new();
    let mut snippets = Vec::new();
    for h in hits.into_iter().filter(|h| h.score > 0.0) {
        let id = h.entity_id().to_string();
        if !graph.contains(&id) {
            continue;
        }
        if !seeds.contains(&id) {
            if seeds.len() == k {
                break;
            }
            seeds.push(id);
        }
        snippets.push(h);
    }
    let mut structural: BTreeSet<String> = seeds.iter().cloned().collect();
    for s in &seeds {
        if graph.get(s)?.source == Source::Paper {
            structural.extend(graph.neighbors(s, &[EdgeKind::AlignsTo], Direction::Out)?);
        }
    }
    let seed_ids = structural.iter().cloned().collect();
    Ok(RetrievalResult { seed_ids, structural, snippets })
}

fn row(run: usize, out: Result<(String, ValidationReport, usize, Vec<String>), CodegenError>) -> RunRow {
    match out {
        Ok((code, report, rounds, flags)) => RunRow {
            run,
            status: if report.is_ok() { RunStatus::Ok } else { RunStatus::Failed },
            missing_declarations: report.missing_declarations.clone(),
            flags,
            rounds,
            error: report.parse_error.clone(),
            code: Some(code),
            report: Some(report),
        },
        Err(e) => RunRow {
            run,
            status: RunStatus::GenerationFailed,
            missing_declarations: Vec::new(),
            flags: Vec::new(),
            rounds: 1,
            error: Some(e.to_string()),
            code: None,
            report: None,
        },
    }
}

fn one_run(
    config: &AblationConfig,
    graph: &KnowledgeGraph,
    index: &SemanticIndex,
    query: &str,
    generator: &dyn Generator,
) -> Result<(String, ValidationReport, usize, Vec<String>), CodegenError> {
    match config.retrieval_mode {
        RetrievalMode::Closure => {
            let (_, r) = retrieve(query, graph, index, config.window_k)?;
            let o = repair_from(graph, r, query, generator, config.max_rounds)?;
            Ok((o.code, o.report, o.rounds, o.package.flags))
        }
        RetrievalMode::Window => {
            let r = window_retrieval(graph, index, query, config.window_k)?;
            let package = assemble_context(graph, &r, query)?;
            let code = generator.generate(&package, 1)?;
            let report = validate(&code, &KnowledgeGraph::new());
            Ok((code, report, 1, package.flags))
        }
    }
}

/// Run the configured pipeline `runs` times over the corpus. `query`
/// overrides the corpus query.
pub fn ablate(config: &AblationConfig, corpus: &Corpus, query: Option<&str>, exec: Exec) -> Result<AblationReport, AblationError> {
    if config.retrieval_mode == RetrievalMode::Window && config.window_k == 0 {
        return Err(AblationError::ZeroWindow);
    }
    let query = query.map(str::to_string).or_else(|| corpus.query.clone()).ok_or(AblationError::NoQuery)?;
    let graph = corpus.graph(config.knowledge_sources)?;
    let index = SemanticIndex::from_graph(&graph).map_err(|e| AblationError::Index(e.to_string()))?;
    let rows = map_range(exec, config.runs, |run| {
        let out = match &config.generator {
            GeneratorChoice::Template => one_run(config, &graph, &index, &query, &TemplateGenerator),
            GeneratorChoice::Script { script } => one_run(config, &graph, &index, &query, &script.run(run)),
        };
        row(run, out)
    });
    let count = |s: RunStatus| rows.iter().filter(|r| r.status == s).count();
    let summary = Summary {
        runs: rows.len(),
        ok: count(RunStatus::Ok),
        failed: count(RunStatus::Failed),
        generation_failed: count(RunStatus::GenerationFailed),
        with_missing: rows.iter().filter(|r| !r.missing_declarations.is_empty()).count(),
    };
    Ok(AblationReport { config: config.clone(), query, rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codegen::ScriptStep;
    use crate::knowledge_graph::{ConceptCard, EntityKind};

    fn corpus() -> Corpus {
        Corpus {
            models: vec![(
                "m.mm".into(),
                "set T = 1..3; param cap = 4; var y{T} continuous; con cover: sum{t in T}(y[t]) <= cap;".into(),
            )],
            cards: vec![
                ConceptCard::new("cover", EntityKind::Constraint, "cover bound on output", "output stays covered").hint("cover"),
                ConceptCard::new("noise", EntityKind::Concept, "unrelated words", ""),
            ],
            links: Vec::new(),
            query: Some("add the cover bound".into()),
        }
    }

    #[test]
    fn closure_ok_window_missing() {
        let c = corpus();
        let closure = ablate(&AblationConfig { runs: 2, ..Default::default() }, &c, None, Exec::Parallel).unwrap();
        assert_eq!(closure.summary.ok, 2, "{}", closure.to_text());
        let window = AblationConfig { retrieval_mode: RetrievalMode::Window, window_k: 1, runs: 2, ..Default::default() };
        let w = ablate(&window, &c, None, Exec::Sequential).unwrap();
        assert_eq!(w.summary.ok, 0, "{}", w.to_text());
        assert_eq!(w.summary.with_missing, 2);
        assert_eq!(w.rows[0].missing_declarations, vec!["T", "y", "cap"]);
    }

    #[test]
    fn source_degradations() {
        let c = corpus();
        let papers = AblationConfig { knowledge_sources: KnowledgeSources::PapersOnly, runs: 1, ..Default::default() };
        let r = ablate(&papers, &c, None, Exec::Sequential).unwrap();
        assert_eq!(r.rows[0].status, RunStatus::GenerationFailed);
        let code = AblationConfig { knowledge_sources: KnowledgeSources::CodeOnly, runs: 1, ..Default::default() };
        let r = ablate(&code, &c, None, Exec::Sequential).unwrap();
        assert_eq!(r.rows[0].status, RunStatus::Ok);
        assert!(r.rows[0].flags.contains(&"empty_snippets".to_string()));
    }

    #[test]
    fn scripted_runs_and_determinism() {
        let c = corpus();
        let script = Script {
            runs: vec![vec![ScriptStep::Template], vec![ScriptStep::Literal { text: "con bad: ghost >= 1;".into() }]],
        };
        let cfg = AblationConfig { runs: 4, max_rounds: 2, generator: GeneratorChoice::Script { script }, ..Default::default() };
        let a = ablate(&cfg, &c, None, Exec::Parallel).unwrap();
        assert_eq!(a.summary.ok, 2);
        assert_eq!(a.rows[1].missing_declarations, vec!["ghost"]);
        assert_eq!(a.rows[1].rounds, 2);
        let b = ablate(&cfg, &c, None, Exec::Sequential).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn config_errors() {
        let c = corpus();
        let cfg = AblationConfig { retrieval_mode: RetrievalMode::Window, window_k: 0, ..Default::default() };
        assert_eq!(ablate(&cfg, &c, None, Exec::Sequential).unwrap_err(), AblationError::ZeroWindow);
        let mut nq = c.clone();
        nq.query = None;
        assert_eq!(ablate(&AblationConfig::default(), &nq, None, Exec::Sequential).unwrap_err(), AblationError::NoQuery);
    }
}
