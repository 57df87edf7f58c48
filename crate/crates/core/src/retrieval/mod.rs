//! Query understanding, lexical-semantic snippet search, structural
//! retrieval over the graph, and fusion of the two streams.

mod query;
mod semantic;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use query::{understand_query, ExtractedEntity, ExtractionKind, Intent, NumericPayload, ParsedQuery, TimeWindow};
pub use semantic::{graph_documents, Document, Embedder, SemanticIndex, Snippet, TfIdf, SNIPPET_SUFFIX};

use crate::closure::{closure_union, is_well_defined};
use crate::knowledge_graph::{Direction, EdgeKind, EntityKind, KgError, KnowledgeGraph, Source};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RetrievalError {
    #[error("empty query")]
    EmptyQuery,
    #[error(transparent)]
    Graph(#[from] KgError),
    #[error("structural set is not closed: {0:?}")]
    NotClosed(Vec<(String, String)>),
    #[error("duplicate document id `{0}`")]
    DuplicateDocument(String),
    #[error("embedder contract violated: {0}")]
    EmbedderContract(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Lowercased alphanumeric runs with their byte spans.
pub(crate) fn tokens(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(Token { text: text[s..i].to_lowercase(), start: s, end: i });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token { text: text[s..].to_lowercase(), start: s, end: text.len() });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub seed_ids: Vec<String>,
    pub structural: BTreeSet<String>,
    pub snippets: Vec<Snippet>,
}

impl RetrievalResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Seeds plus one aligns_to hop from paper seeds.
fn aligned_starts(graph: &KnowledgeGraph, seeds: &[String]) -> Result<Vec<String>, KgError> {
    let mut starts: Vec<String> = Vec::new();
    for s in seeds {
        let e = graph.get(s)?;
        starts.push(s.clone());
        if e.source == Source::Paper {
            starts.extend(graph.neighbors(s, &[EdgeKind::AlignsTo], Direction::Out)?);
        }
    }
    Ok(starts)
}

/// Union of closures, after following aligns_to one hop from paper seeds.
pub fn structural_retrieve(graph: &KnowledgeGraph, seeds: &[String]) -> Result<BTreeSet<String>, KgError> {
    closure_union(graph, &aligned_starts(graph, seeds)?)
}

/// For constraint-oriented intents, a variable seed also pulls in the
/// constraints that use it.
pub fn expand_seeds(parsed: &ParsedQuery, graph: &KnowledgeGraph, seeds: &[String]) -> Result<Vec<String>, KgError> {
    let mut out: Vec<String> = seeds.to_vec();
    if !(parsed.has_intent(Intent::ExplainConstraint) || parsed.has_intent(Intent::AddConstraint)) {
        return Ok(out);
    }
    for s in aligned_starts(graph, seeds)? {
        if graph.get(&s)?.kind != EntityKind::DecisionVariable {
            continue;
        }
        for user in graph.neighbors(&s, &[EdgeKind::UsedIn], Direction::In)? {
            if graph.get(&user)?.kind == EntityKind::Constraint && !out.contains(&user) {
                out.push(user);
            }
        }
    }
    Ok(out)
}

/// Combine the two streams. Snippets repeating a structural member's own
/// description are dropped before truncation to `k`.
pub fn fuse(
    seeds: Vec<String>,
    structural: BTreeSet<String>,
    snippets: Vec<Snippet>,
    graph: &KnowledgeGraph,
    k: usize,
) -> Result<RetrievalResult, RetrievalError> {
    let (ok, violations) = is_well_defined(graph, &structural);
    if !ok {
        return Err(RetrievalError::NotClosed(violations));
    }
    let own: BTreeSet<&str> = structural
        .iter()
        .filter_map(|id| graph.entity(id))
        .map(|e| e.description.as_str())
        .filter(|d| !d.is_empty())
        .collect();
    let mut kept: Vec<Snippet> = snippets.into_iter().filter(|s| !own.contains(s.text.as_str())).collect();
    kept.truncate(k);
    Ok(RetrievalResult { seed_ids: seeds, structural, snippets: kept })
}

/// Full pipeline: parse, seed, traverse, search, fuse. With no resolved
/// entity the best semantic hit becomes the seed.
pub fn retrieve(
    text: &str,
    graph: &KnowledgeGraph,
    index: &SemanticIndex,
    k: usize,
) -> Result<(ParsedQuery, RetrievalResult), RetrievalError> {
    let parsed = understand_query(text, graph)?;
    let hits = index.search(text, index.len());
    let mut seeds = parsed.resolved_ids();
    if seeds.is_empty() {
        if let Some(top) = hits.iter().find(|h| h.score > 0.0 && graph.contains(h.entity_id())) {
            seeds.push(top.entity_id().to_string());
        }
    }
    let seeds = expand_seeds(&parsed, graph, &seeds)?;
    let structural = structural_retrieve(graph, &seeds)?;
    let result = fuse(seeds, structural, hits, graph, k)?;
    Ok((parsed, result))
}
