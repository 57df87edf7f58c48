use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model_dsl::DeclKind;

/// Structured-field keys used across the crate.
pub mod field {
    pub const SOLVER_SYMBOL: &str = "solver_symbol";
    pub const SOLVER_SYMBOL_HINT: &str = "solver_symbol_hint";
    pub const DOMAIN: &str = "domain";
    pub const BOUNDS: &str = "bounds";
    pub const INDEX_SETS: &str = "index_sets";
    pub const VALUE: &str = "value";
    pub const SET_DEF: &str = "set_def";
    pub const EXPRESSION: &str = "expression";
    pub const SNIPPET: &str = "snippet";
    pub const ALIASES: &str = "aliases";
    pub const UNRESOLVED: &str = "unresolved";
    pub const CATEGORY: &str = "category";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    DecisionVariable,
    Parameter,
    IndexSet,
    Constraint,
    Objective,
    AuxiliaryRule,
    Concept,
}

impl EntityKind {
    pub const ALL: [EntityKind; 7] = [
        EntityKind::DecisionVariable,
        EntityKind::Parameter,
        EntityKind::IndexSet,
        EntityKind::Constraint,
        EntityKind::Objective,
        EntityKind::AuxiliaryRule,
        EntityKind::Concept,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::DecisionVariable => "decision_variable",
            EntityKind::Parameter => "parameter",
            EntityKind::IndexSet => "index_set",
            EntityKind::Constraint => "constraint",
            EntityKind::Objective => "objective",
            EntityKind::AuxiliaryRule => "auxiliary_rule",
            EntityKind::Concept => "concept",
        }
    }

    pub fn from_decl(kind: DeclKind) -> EntityKind {
        match kind {
            DeclKind::Set => EntityKind::IndexSet,
            DeclKind::Param => EntityKind::Parameter,
            DeclKind::Var => EntityKind::DecisionVariable,
            DeclKind::Constraint => EntityKind::Constraint,
            DeclKind::Objective => EntityKind::Objective,
        }
    }

    /// Kinds that become declarations in generated code.
    pub fn is_declarable(self) -> bool {
        matches!(self, EntityKind::DecisionVariable | EntityKind::Parameter | EntityKind::IndexSet)
    }

    /// Kinds rendered as statements (constraints and objectives).
    pub fn is_statement(self) -> bool {
        matches!(self, EntityKind::Constraint | EntityKind::Objective)
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EntityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown entity kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Code,
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    UsedIn,
    DependsOn,
    AlignsTo,
}

impl EdgeKind {
    pub const EXECUTABILITY: [EdgeKind; 2] = [EdgeKind::UsedIn, EdgeKind::DependsOn];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::UsedIn => "used_in",
            EdgeKind::DependsOn => "depends_on",
            EdgeKind::AlignsTo => "aligns_to",
        }
    }

    pub fn is_executability(self) -> bool {
        matches!(self, EdgeKind::UsedIn | EdgeKind::DependsOn)
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub kind: EntityKind,
    pub name: String,
    pub description: String,
    pub source: Source,
    pub fields: BTreeMap<String, String>,
}

impl Entity {
    pub fn new(id: impl Into<String>, kind: EntityKind, name: impl Into<String>, source: Source) -> Self {
        Entity {
            id: id.into(),
            kind,
            name: name.into(),
            description: String::new(),
            source,
            fields: BTreeMap::new(),
        }
    }

    pub fn with_field(mut self, key: &str, value: impl Into<String>) -> Self {
        self.fields.insert(key.to_string(), value.into());
        self
    }

    pub fn with_description(mut self, d: impl Into<String>) -> Self {
        self.description = d.into();
        self
    }

    pub fn field(&self, key: &str) -> Option<&str> {
        self.fields.get(key).map(String::as_str)
    }

    pub fn solver_symbol(&self) -> Option<&str> {
        self.field(field::SOLVER_SYMBOL)
    }

    pub fn index_sets(&self) -> Vec<String> {
        split_list(self.field(field::INDEX_SETS))
    }

    pub fn aliases(&self) -> Vec<String> {
        split_list(self.field(field::ALIASES))
    }

    pub fn is_unresolved(&self) -> bool {
        self.field(field::UNRESOLVED) == Some("true")
    }
}

pub(crate) fn split_list(v: Option<&str>) -> Vec<String> {
    v.map(|s| s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect())
        .unwrap_or_default()
}

/// Executability edges point from the dependent entity to what it needs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub src: String,
    pub dst: String,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn new(src: impl Into<String>, dst: impl Into<String>, kind: EdgeKind) -> Self {
        Edge { src: src.into(), dst: dst.into(), kind }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -{}-> {}", self.src, self.kind, self.dst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    UsedIn,
    DependsOn,
}

impl From<RelationKind> for EdgeKind {
    fn from(r: RelationKind) -> Self {
        match r {
            RelationKind::UsedIn => EdgeKind::UsedIn,
            RelationKind::DependsOn => EdgeKind::DependsOn,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Relation {
    pub kind: RelationKind,
    pub target: String,
}

/// Structured stand-in for concepts extracted from the literature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConceptCard {
    pub name: String,
    pub kind: EntityKind,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_symbol_hint: Option<String>,
    pub snippet: String,
    #[serde(default)]
    pub relations: Vec<Relation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
}

impl ConceptCard {
    pub fn new(name: &str, kind: EntityKind, description: &str, snippet: &str) -> Self {
        ConceptCard {
            name: name.to_string(),
            kind,
            description: description.to_string(),
            solver_symbol_hint: None,
            snippet: snippet.to_string(),
            relations: Vec::new(),
            aliases: Vec::new(),
        }
    }

    pub fn hint(mut self, symbol: &str) -> Self {
        self.solver_symbol_hint = Some(symbol.to_string());
        self
    }

    pub fn relation(mut self, kind: RelationKind, target: &str) -> Self {
        self.relations.push(Relation { kind, target: target.to_string() });
        self
    }

    pub fn alias(mut self, alias: &str) -> Self {
        self.aliases.push(alias.to_string());
        self
    }

    /// Graph id of the entity this card becomes.
    pub fn entity_id(&self) -> String {
        paper_id(&self.name)
    }
}

pub fn code_id(name: &str) -> String {
    format!("code:{name}")
}

pub fn paper_id(name: &str) -> String {
    let mut slug = String::new();
    for ch in name.trim().chars().flat_map(char::to_lowercase) {
        if ch.is_alphanumeric() {
            slug.push(ch);
        } else if !slug.ends_with('_') {
            slug.push('_');
        }
    }
    format!("paper:{}", slug.trim_matches('_'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_ids_are_slugs() {
        assert_eq!(paper_id("Load-reduction constraint"), "paper:load_reduction_constraint");
        assert_eq!(paper_id("  machine  power "), "paper:machine_power");
    }

    #[test]
    fn kind_strings() {
        for k in EntityKind::ALL {
            assert_eq!(k.as_str().parse::<EntityKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.as_str()));
        }
        assert!("variabel".parse::<EntityKind>().is_err());
    }
}
