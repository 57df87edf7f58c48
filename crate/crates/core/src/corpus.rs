//! Knowledge-source bundles: MiniModel files, concept cards, extra
//! requirement links between code symbols, and an instruction.
//!
//! On disk a corpus is a directory holding `*.mm` model files,
//! `cards.json`, an optional `links.json` and an optional `query.txt`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::knowledge_graph::{parse_cards, ConceptCard, Edge, KgError, KnowledgeGraph, RelationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnowledgeSources {
    PapersOnly,
    CodeOnly,
    Heterogeneous,
}

impl KnowledgeSources {
    pub fn as_str(self) -> &'static str {
        match self {
            KnowledgeSources::PapersOnly => "papers_only",
            KnowledgeSources::CodeOnly => "code_only",
            KnowledgeSources::Heterogeneous => "heterogeneous",
        }
    }

    fn code(self) -> bool {
        self != KnowledgeSources::PapersOnly
    }

    fn papers(self) -> bool {
        self != KnowledgeSources::CodeOnly
    }
}

/// Requirement edge between two code symbols that no expression states,
/// e.g. a constraint whose qualification ties it to a rate parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Link {
    pub from: String,
    pub to: String,
    pub kind: RelationKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    /// (file name, source)
    pub models: Vec<(String, String)>,
    pub cards: Vec<ConceptCard>,
    pub links: Vec<Link>,
    pub query: Option<String>,
}

fn io(path: &Path, e: std::io::Error) -> KgError {
    KgError::Io(format!("{}: {e}", path.display()))
}

fn in_file(path: &Path, e: KgError) -> KgError {
    match e {
        KgError::Io(_) => e,
        other => KgError::SchemaViolation(format!("{}: {other}", path.display())),
    }
}

impl Corpus {
    pub fn load(dir: &Path) -> Result<Corpus, KgError> {
        let mut entries: Vec<_> = fs::read_dir(dir)
            .map_err(|e| io(dir, e))?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(|e| io(dir, e))?;
        entries.sort();
        let mut c = Corpus::default();
        for path in entries {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
            let read = || fs::read_to_string(&path).map_err(|e| io(&path, e));
            if name.ends_with(".mm") {
                c.models.push((name, read()?));
            } else if name == "cards.json" {
                c.cards = parse_cards(&read()?).map_err(|e| in_file(&path, e))?;
            } else if name == "links.json" {
                c.links = serde_json::from_str(&read()?)
                    .map_err(|e| KgError::SchemaViolation(format!("{}: {e}", path.display())))?;
            } else if name == "query.txt" {
                c.query = Some(read()?.trim().to_string());
            }
        }
        Ok(c)
    }

    pub fn write(&self, dir: &Path) -> Result<(), KgError> {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let put = |name: &str, text: String| {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| io(&p, e))
        };
        for (name, src) in &self.models {
            put(name, src.clone())?;
        }
        put("cards.json", serde_json::to_string_pretty(&self.cards).expect("serializable") + "\n")?;
        if !self.links.is_empty() {
            put("links.json", serde_json::to_string_pretty(&self.links).expect("serializable") + "\n")?;
        }
        if let Some(q) = &self.query {
            put("query.txt", format!("{q}\n"))?;
        }
        Ok(())
    }

    /// Graph from the selected sources: models, then links, then cards,
    /// then alignment.
    pub fn graph(&self, sources: KnowledgeSources) -> Result<KnowledgeGraph, KgError> {
        let mut g = KnowledgeGraph::new();
        if sources.code() {
            for (name, src) in &self.models {
                g.ingest_source(src).map_err(|e| match e {
                    KgError::Model(m) => KgError::SchemaViolation(format!("{name}: {m}")),
                    other => other,
                })?;
            }
            apply_links(&mut g, &self.links)?;
        }
        if sources.papers() {
            g.ingest_concept_cards(&self.cards)?;
        }
        g.align();
        Ok(g)
    }
}

pub fn apply_links(g: &mut KnowledgeGraph, links: &[Link]) -> Result<(), KgError> {
    for l in links {
        let resolve = |s: &str| {
            g.find_code_symbol(s)
                .filter(|e| !e.is_unresolved())
                .map(|e| e.id.clone())
                .ok_or_else(|| KgError::UnknownEntity(s.to_string()))
        };
        let (src, dst) = (resolve(&l.from)?, resolve(&l.to)?);
        g.add_edge(Edge::new(src, dst, l.kind.into()))?;
    }
    Ok(())
}
