//! Typed knowledge graph, dependency closure and symbol-complete model
//! generation for MILP modeling knowledge.

pub mod ablation;
pub mod battery;
pub mod closure;
pub mod codegen;
pub mod corpus;
pub mod fjsp;
pub mod knowledge_graph;
pub mod model_dsl;
pub mod par;
pub mod retrieval;
pub mod synth;
