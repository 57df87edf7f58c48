use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::entity::{Edge, EdgeKind, Entity, EntityKind, Source};
use super::{KgError, KnowledgeGraph};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    version: u32,
    entities: Vec<EntityRecord>,
    edges: Vec<EdgeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntityRecord {
    id: String,
    kind: EntityKind,
    name: String,
    description: String,
    source: Source,
    fields: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    src: String,
    dst: String,
    kind: EdgeKind,
}

impl KnowledgeGraph {
    /// Knowledge-unit JSON document. Entities are written in id order and
    /// edges in (src, dst, kind) order, so equal graphs give equal bytes.
    pub fn to_json(&self) -> String {
        let doc = Document {
            version: FORMAT_VERSION,
            entities: self
                .entities()
                .map(|e| EntityRecord {
                    id: e.id.clone(),
                    kind: e.kind,
                    name: e.name.clone(),
                    description: e.description.clone(),
                    source: e.source,
                    fields: e.fields.clone(),
                })
                .collect(),
            edges: self
                .edges()
                .into_iter()
                .map(|e| EdgeRecord { src: e.src, dst: e.dst, kind: e.kind })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<KnowledgeGraph, KgError> {
        let doc: Document = serde_json::from_str(text).map_err(|e| KgError::SchemaViolation(e.to_string()))?;
        if doc.version != FORMAT_VERSION {
            return Err(KgError::SchemaViolation(format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                doc.version
            )));
        }
        let mut g = KnowledgeGraph::new();
        for r in doc.entities {
            g.add_entity(Entity {
                id: r.id,
                kind: r.kind,
                name: r.name,
                description: r.description,
                source: r.source,
                fields: r.fields,
            })
            .map_err(|e| KgError::SchemaViolation(e.to_string()))?;
        }
        for r in doc.edges {
            let inserted = g
                .add_edge(Edge::new(r.src, r.dst, r.kind))
                .map_err(|e| KgError::SchemaViolation(e.to_string()))?;
            if !inserted {
                return Err(KgError::SchemaViolation("duplicate edge".into()));
            }
        }
        Ok(g)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), KgError> {
        std::fs::write(path, self.to_json()).map_err(|e| KgError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &std::path::Path) -> Result<KnowledgeGraph, KgError> {
        let text = std::fs::read_to_string(path).map_err(|e| KgError::Io(format!("{}: {e}", path.display())))?;
        KnowledgeGraph::from_json(&text)
    }
}
