use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::CodegenError;
use crate::closure::{induced_subgraph, is_well_defined};
use crate::knowledge_graph::{field, Edge, Entity, EntityKind, KnowledgeGraph};
use crate::retrieval::{RetrievalResult, Snippet};

pub const FLAG_EMPTY_SNIPPETS: &str = "empty_snippets";
pub const FLAG_PLACEHOLDERS: &str = "placeholders";
pub const FLAG_NO_CODE: &str = "no_code_entities";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypedEntity {
    pub entity: Entity,
    pub definition: String,
}

/// Generator input: dependency-ordered entities, their induced subgraph,
/// background snippets and the instruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextPackage {
    pub instruction: String,
    pub targets: Vec<String>,
    pub typed_entities: Vec<TypedEntity>,
    pub subgraph: Vec<Edge>,
    pub snippets: Vec<Snippet>,
    pub flags: Vec<String>,
}

fn or_dash(s: Option<&str>) -> &str {
    s.filter(|s| !s.is_empty()).unwrap_or("-")
}

/// `NAME : KIND : DOMAIN : {INDEX SETS} : SOLVER_SYMBOL`
pub fn definition_line(e: &Entity) -> String {
    let domain = match e.kind {
        EntityKind::IndexSet => or_dash(e.field(field::SET_DEF)).to_string(),
        EntityKind::DecisionVariable => match e.field(field::BOUNDS) {
            Some(b) => format!("{} in {b}", or_dash(e.field(field::DOMAIN))),
            None => or_dash(e.field(field::DOMAIN)).to_string(),
        },
        EntityKind::Parameter => match e.field(field::VALUE) {
            Some(v) if v.starts_with('[') => "table".to_string(),
            Some(v) => v.to_string(),
            None => "-".to_string(),
        },
        _ => or_dash(e.field(field::DOMAIN)).to_string(),
    };
    let symbol = e.solver_symbol().or(e.field(field::SOLVER_SYMBOL_HINT));
    format!("{} : {} : {} : {{{}}} : {}", e.name, e.kind, domain, e.index_sets().join(", "), or_dash(symbol))
}

/// Post-order DFS over the subgraph, roots and neighbors in id order:
/// every entity comes after what it needs, cycles broken by the visited set.
fn dependency_order(members: &BTreeSet<String>, edges: &[Edge]) -> Vec<String> {
    let mut adj: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for e in edges {
        adj.entry(e.src.as_str()).or_default().insert(e.dst.as_str());
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut order = Vec::with_capacity(members.len());
    for root in members {
        if seen.contains(root.as_str()) {
            continue;
        }
        // explicit stack: (node, expanded?)
        let mut stack: Vec<(&str, bool)> = vec![(root.as_str(), false)];
        while let Some((n, expanded)) = stack.pop() {
            if expanded {
                order.push(n.to_string());
                continue;
            }
            if !seen.insert(n) {
                continue;
            }
            stack.push((n, true));
            if let Some(next) = adj.get(n) {
                for m in next.iter().rev() {
                    if !seen.contains(m) {
                        stack.push((m, false));
                    }
                }
            }
        }
    }
    order
}

impl ContextPackage {
    pub fn entity_ids(&self) -> Vec<&str> {
        self.typed_entities.iter().map(|t| t.entity.id.as_str()).collect()
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    /// Sectioned prompt text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("## TYPED ENTITIES\n");
        for t in &self.typed_entities {
            writeln!(out, "{}", t.definition).unwrap();
        }
        out.push_str("\n## DEPENDENCY SUBGRAPH\n");
        for e in &self.subgraph {
            writeln!(out, "{e}").unwrap();
        }
        out.push_str("\n## BACKGROUND SNIPPETS\n");
        for (i, s) in self.snippets.iter().enumerate() {
            writeln!(out, "[{}] {} ({:.4}): {}", i + 1, s.id, s.score, s.text).unwrap();
        }
        out.push_str("\n## INSTRUCTION\n");
        writeln!(out, "{}", self.instruction).unwrap();
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

pub fn build_context(
    graph: &KnowledgeGraph,
    retrieval: &RetrievalResult,
    instruction: &str,
) -> Result<ContextPackage, CodegenError> {
    let (ok, violations) = is_well_defined(graph, &retrieval.structural);
    if !ok {
        return Err(CodegenError::NotClosed(violations));
    }
    assemble_context(graph, retrieval, instruction)
}

/// Package assembly without the closedness check, for context-window
/// baselines that deliberately pass open entity sets.
pub fn assemble_context(
    graph: &KnowledgeGraph,
    retrieval: &RetrievalResult,
    instruction: &str,
) -> Result<ContextPackage, CodegenError> {
    let sub = induced_subgraph(graph, &retrieval.structural)?;
    let subgraph = sub.edges();
    let typed_entities: Vec<TypedEntity> = dependency_order(&retrieval.structural, &subgraph)
        .into_iter()
        .map(|id| {
            let entity = graph.get(&id).expect("member exists").clone();
            TypedEntity { definition: definition_line(&entity), entity }
        })
        .collect();
    let mut flags = Vec::new();
    if retrieval.snippets.is_empty() {
        flags.push(FLAG_EMPTY_SNIPPETS.to_string());
    }
    if typed_entities.iter().any(|t| t.entity.is_unresolved()) {
        flags.push(FLAG_PLACEHOLDERS.to_string());
    }
    if !typed_entities.iter().any(|t| t.entity.source == crate::knowledge_graph::Source::Code) {
        flags.push(FLAG_NO_CODE.to_string());
    }
    Ok(ContextPackage {
        instruction: instruction.to_string(),
        targets: retrieval.seed_ids.clone(),
        typed_entities,
        subgraph,
        snippets: retrieval.snippets.clone(),
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::closure;
    use crate::knowledge_graph::Source;

    fn result_for(g: &KnowledgeGraph, target: &str) -> RetrievalResult {
        RetrievalResult {
            seed_ids: vec![target.to_string()],
            structural: closure(g, target).unwrap().members,
            snippets: vec![],
        }
    }

    #[test]
    fn dependencies_first() {
        let mut g = KnowledgeGraph::new();
        g.ingest_source("set T = 1..3; param p{T} = [1, 2, 3]; var y{T} binary; con c{t in T}: y[t] <= p[t];")
            .unwrap();
        let pkg = build_context(&g, &result_for(&g, "code:c"), "explain").unwrap();
        assert_eq!(pkg.entity_ids(), vec!["code:T", "code:p", "code:y", "code:c"]);
        assert_eq!(pkg.typed_entities[2].definition, "y : decision_variable : binary : {T} : y");
        assert_eq!(pkg.typed_entities[1].definition, "p : parameter : table : {T} : p");
        assert!(pkg.has_flag(FLAG_EMPTY_SNIPPETS));
        let text = pkg.to_text();
        let pos: Vec<usize> = ["## TYPED", "## DEPENDENCY", "## BACKGROUND", "## INSTRUCTION"]
            .iter()
            .map(|h| text.find(h).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(build_context(&g, &result_for(&g, "code:c"), "explain").unwrap().to_text(), text);
    }

    #[test]
    fn cycles_are_broken_by_id() {
        let members: BTreeSet<String> = ["a", "b", "c"].map(String::from).into();
        let edges = vec![
            Edge::new("a", "b", crate::knowledge_graph::EdgeKind::UsedIn),
            Edge::new("b", "c", crate::knowledge_graph::EdgeKind::UsedIn),
            Edge::new("c", "a", crate::knowledge_graph::EdgeKind::UsedIn),
        ];
        assert_eq!(dependency_order(&members, &edges), vec!["c", "b", "a"]);
    }

    #[test]
    fn single_isolated_entity() {
        let mut g = KnowledgeGraph::new();
        g.add_entity(Entity::new("x", EntityKind::Concept, "x", Source::Paper)).unwrap();
        let pkg = build_context(&g, &result_for(&g, "x"), "").unwrap();
        assert_eq!(pkg.typed_entities.len(), 1);
        assert!(pkg.subgraph.is_empty());
        assert!(pkg.has_flag(FLAG_NO_CODE));
    }

    #[test]
    fn open_set_rejected() {
        let mut g = KnowledgeGraph::new();
        g.ingest_source("param a = 1; var x continuous; con c: x >= a;").unwrap();
        let r = RetrievalResult { seed_ids: vec![], structural: ["code:c".to_string()].into(), snippets: vec![] };
        assert!(matches!(build_context(&g, &r, ""), Err(CodegenError::NotClosed(_))));
    }
}
