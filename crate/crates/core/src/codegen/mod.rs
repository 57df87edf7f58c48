//! Context packages, generators, static validation and the corrective
//! re-retrieval loop.

mod generator;
mod package;
mod repair;
mod validate;

use thiserror::Error;

pub use generator::{
    template_code, ExternalGenerator, Generator, Script, ScriptStep, ScriptedGenerator, TemplateGenerator,
    ENDPOINT_ENV,
};
pub use package::{
    assemble_context, build_context, definition_line, ContextPackage, TypedEntity, FLAG_EMPTY_SNIPPETS, FLAG_NO_CODE,
    FLAG_PLACEHOLDERS,
};
pub use repair::{repair_from, repair_loop, RepairOutcome, DEFAULT_MAX_ROUNDS};
pub use validate::{validate, ArityMismatch, KindMismatch, Status, ValidationReport, EXPECT_INDEX, EXPECT_VALUE};

use crate::knowledge_graph::KgError;
use crate::retrieval::RetrievalError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodegenError {
    #[error("context set is not closed: {0:?}")]
    NotClosed(Vec<(String, String)>),
    #[error("no stored expression for `{0}`")]
    MissingExpression(String),
    #[error("generator unavailable: {0}")]
    GeneratorUnavailable(String),
    #[error("generator script: {0}")]
    Script(String),
    #[error(transparent)]
    Graph(#[from] KgError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}
