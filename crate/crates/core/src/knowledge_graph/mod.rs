//! Typed knowledge graph over modeling entities.
//!
//! Entities come from two sources: parsed solver models (`source = code`)
//! and concept cards (`source = paper`). `used_in` and `depends_on` edges
//! are stored in requirement direction, from the entity that needs a symbol
//! to the symbol it needs; `aligns_to` links a paper concept to its code
//! realization.

mod align;
mod entity;
mod graph;
mod ingest;
mod persist;

use thiserror::Error;

pub use align::{normalize_name, AlignOutcome, Ambiguity};
pub use entity::{
    code_id, field, paper_id, ConceptCard, Edge, EdgeKind, Entity, EntityKind, Relation, RelationKind, Source,
};
pub use graph::{Direction, KnowledgeGraph};
pub use persist::FORMAT_VERSION;

use crate::model_dsl::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KgError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("entity `{0}` already exists")]
    DuplicateEntity(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("`{name}` is a {existing}, cannot re-ingest it as a {requested}")]
    ConflictingEntity { name: String, existing: EntityKind, requested: EntityKind },
    #[error("card `{card}` relates to unknown concept `{target}`")]
    DanglingRelation { card: String, target: String },
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o: {0}")]
    Io(String),
}

/// Parse a JSON array of concept cards.
pub fn parse_cards(text: &str) -> Result<Vec<ConceptCard>, KgError> {
    serde_json::from_str(text).map_err(|e| KgError::SchemaViolation(e.to_string()))
}
