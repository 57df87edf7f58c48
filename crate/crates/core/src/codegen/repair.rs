use serde::{Deserialize, Serialize};

use super::{build_context, validate, CodegenError, ContextPackage, Generator, ValidationReport};
use crate::closure::closure;
use crate::knowledge_graph::KnowledgeGraph;
use crate::retrieval::{retrieve, RetrievalResult, SemanticIndex};

pub const DEFAULT_MAX_ROUNDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairOutcome {
    pub code: String,
    pub report: ValidationReport,
    pub rounds: usize,
    /// Structural set size entering each round.
    pub context_sizes: Vec<usize>,
    pub package: ContextPackage,
}

/// Generate, validate, and on missing declarations pull the closure of
/// each missing name (when the graph knows it) into the context before
/// trying again. Generated code must be self-contained, so validation runs
/// against an empty environment.
pub fn repair_from(
    graph: &KnowledgeGraph,
    mut retrieval: RetrievalResult,
    instruction: &str,
    generator: &dyn Generator,
    max_rounds: usize,
) -> Result<RepairOutcome, CodegenError> {
    let empty = KnowledgeGraph::new();
    let mut sizes = Vec::new();
    let mut round = 0;
    loop {
        round += 1;
        sizes.push(retrieval.structural.len());
        let package = build_context(graph, &retrieval, instruction)?;
        let code = generator.generate(&package, round)?;
        let report = validate(&code, &empty);
        if report.is_ok() || round >= max_rounds.max(1) {
            return Ok(RepairOutcome { code, report, rounds: round, context_sizes: sizes, package });
        }
        for name in &report.missing_declarations {
            if let Some(e) = graph.find_code_symbol(name).filter(|e| !e.is_unresolved()) {
                retrieval.structural.extend(closure(graph, &e.id)?.members);
            }
        }
    }
}

pub fn repair_loop(
    query: &str,
    graph: &KnowledgeGraph,
    index: &SemanticIndex,
    generator: &dyn Generator,
    max_rounds: usize,
    k: usize,
) -> Result<RepairOutcome, CodegenError> {
    let (_, retrieval) = retrieve(query, graph, index, k)?;
    repair_from(graph, retrieval, query, generator, max_rounds)
}
