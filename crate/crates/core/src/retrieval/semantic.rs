use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{tokens, RetrievalError};
use crate::knowledge_graph::{field, KnowledgeGraph};

/// Text to fixed-length real vector. The dimension must be constant for
/// the lifetime of an index and every component finite.
pub trait Embedder: Send + Sync {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Vec<f64>;
}

/// TF-IDF over lowercased alphanumeric tokens. Vocabulary is ordered, so
/// the fitted model does not depend on corpus order.
#[derive(Debug, Clone)]
pub struct TfIdf {
    vocab: BTreeMap<String, usize>,
    idf: Vec<f64>,
}

impl TfIdf {
    pub fn fit<'a>(corpus: impl IntoIterator<Item = &'a str>) -> TfIdf {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut n = 0usize;
        for text in corpus {
            n += 1;
            let mut seen: Vec<String> = tokens(text).into_iter().map(|t| t.text).collect();
            seen.sort();
            seen.dedup();
            for t in seen {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        let mut vocab = BTreeMap::new();
        let mut idf = Vec::with_capacity(df.len());
        for (i, (t, d)) in df.into_iter().enumerate() {
            vocab.insert(t, i);
            idf.push(((n as f64 + 1.0) / (d as f64 + 1.0)).ln() + 1.0);
        }
        TfIdf { vocab, idf }
    }
}

impl Embedder for TfIdf {
    fn dim(&self) -> usize {
        self.idf.len()
    }

    fn embed(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.idf.len()];
        for t in tokens(text) {
            if let Some(&i) = self.vocab.get(&t.text) {
                v[i] += 1.0;
            }
        }
        for (x, w) in v.iter_mut().zip(&self.idf) {
            *x *= w;
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document { id: id.into(), text: text.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snippet {
    pub id: String,
    pub score: f64,
    pub text: String,
}

impl Snippet {
    /// Entity id the snippet belongs to (card snippets carry a suffix).
    pub fn entity_id(&self) -> &str {
        self.id.strip_suffix(SNIPPET_SUFFIX).unwrap_or(&self.id)
    }
}

pub const SNIPPET_SUFFIX: &str = "#snippet";

pub struct SemanticIndex {
    docs: Vec<Document>,
    vectors: Vec<Vec<f64>>,
    embedder: Box<dyn Embedder>,
}

impl std::fmt::Debug for SemanticIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SemanticIndex").field("docs", &self.docs.len()).finish()
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Non-empty entity descriptions plus card snippets.
pub fn graph_documents(graph: &KnowledgeGraph) -> Vec<Document> {
    let mut docs = Vec::new();
    for e in graph.entities() {
        if !e.description.trim().is_empty() {
            docs.push(Document::new(e.id.clone(), e.description.clone()));
        }
        if let Some(s) = e.field(field::SNIPPET).filter(|s| !s.trim().is_empty()) {
            docs.push(Document::new(format!("{}{SNIPPET_SUFFIX}", e.id), s));
        }
    }
    docs
}

impl SemanticIndex {
    /// Index with a TF-IDF embedder fitted on the documents themselves.
    pub fn build(docs: Vec<Document>) -> Result<SemanticIndex, RetrievalError> {
        let mut docs = docs;
        docs.sort();
        let tfidf = TfIdf::fit(docs.iter().map(|d| d.text.as_str()));
        SemanticIndex::with_embedder(docs, Box::new(tfidf))
    }

    pub fn from_graph(graph: &KnowledgeGraph) -> Result<SemanticIndex, RetrievalError> {
        SemanticIndex::build(graph_documents(graph))
    }

    pub fn with_embedder(mut docs: Vec<Document>, embedder: Box<dyn Embedder>) -> Result<SemanticIndex, RetrievalError> {
        docs.sort();
        if let Some(w) = docs.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(RetrievalError::DuplicateDocument(w[0].id.clone()));
        }
        let mut vectors = Vec::with_capacity(docs.len());
        for d in &docs {
            vectors.push(checked(embedder.as_ref(), &d.text)?);
        }
        Ok(SemanticIndex { docs, vectors, embedder })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Top-k by cosine similarity, score descending, ties by smaller id.
    pub fn search(&self, text: &str, k: usize) -> Vec<Snippet> {
        let q = match checked(self.embedder.as_ref(), text) {
            Ok(q) => q,
            Err(_) => vec![0.0; self.embedder.dim()],
        };
        let mut scored: Vec<Snippet> = self
            .docs
            .iter()
            .zip(&self.vectors)
            .map(|(d, v)| Snippet { id: d.id.clone(), score: cosine(&q, v), text: d.text.clone() })
            .collect();
        scored.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
        scored.truncate(k);
        scored
    }
}

fn checked(embedder: &dyn Embedder, text: &str) -> Result<Vec<f64>, RetrievalError> {
    let v = embedder.embed(text);
    if v.len() != embedder.dim() || v.iter().any(|x| !x.is_finite()) {
        return Err(RetrievalError::EmbedderContract(format!(
            "expected {} finite components, got {}",
            embedder.dim(),
            v.len()
        )));
    }
    Ok(v)
}
