use std::collections::{BTreeMap, BTreeSet};

use super::entity::{field, Edge, EdgeKind, Entity, EntityKind, Source};
use super::KgError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
}

/// Typed entities plus typed directed edges. Ordered maps keep every
/// traversal and serialization deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeGraph {
    entities: BTreeMap<String, Entity>,
    out: BTreeMap<String, BTreeSet<(String, EdgeKind)>>,
    inc: BTreeMap<String, BTreeSet<(String, EdgeKind)>>,
    edge_count: usize,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn get(&self, id: &str) -> Result<&Entity, KgError> {
        self.entities.get(id).ok_or_else(|| KgError::UnknownEntity(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entities.contains_key(id)
    }

    /// Entities in id order.
    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entities.keys().map(String::as_str)
    }

    /// All edges ordered by (src, dst, kind).
    pub fn edges(&self) -> Vec<Edge> {
        let mut v: Vec<Edge> = self
            .out
            .iter()
            .flat_map(|(src, set)| set.iter().map(move |(dst, k)| Edge::new(src.clone(), dst.clone(), *k)))
            .collect();
        v.sort();
        v
    }

    pub fn has_edge(&self, src: &str, dst: &str, kind: EdgeKind) -> bool {
        self.out.get(src).is_some_and(|s| s.contains(&(dst.to_string(), kind)))
    }

    pub fn add_entity(&mut self, entity: Entity) -> Result<(), KgError> {
        if self.entities.contains_key(&entity.id) {
            return Err(KgError::DuplicateEntity(entity.id));
        }
        self.entities.insert(entity.id.clone(), entity);
        Ok(())
    }

    /// Replace an entity's content. The kind may only change when the
    /// existing entity is an unresolved placeholder.
    pub(crate) fn replace_entity(&mut self, entity: Entity) -> Result<(), KgError> {
        let existing = self.get(&entity.id)?;
        if existing.kind != entity.kind && !existing.is_unresolved() {
            return Err(KgError::ConflictingEntity {
                name: entity.name,
                existing: existing.kind,
                requested: entity.kind,
            });
        }
        self.entities.insert(entity.id.clone(), entity);
        Ok(())
    }

    /// Insert an edge; returns false if it was already present.
    pub fn add_edge(&mut self, edge: Edge) -> Result<bool, KgError> {
        if edge.src == edge.dst {
            return Err(KgError::SelfLoop(edge.src));
        }
        for end in [&edge.src, &edge.dst] {
            if !self.entities.contains_key(end) {
                return Err(KgError::UnknownEntity(end.clone()));
            }
        }
        let inserted = self.out.entry(edge.src.clone()).or_default().insert((edge.dst.clone(), edge.kind));
        if inserted {
            self.inc.entry(edge.dst).or_default().insert((edge.src, edge.kind));
            self.edge_count += 1;
        }
        Ok(inserted)
    }

    /// Endpoint ids of matching edges, sorted and deduplicated.
    pub fn neighbors(&self, id: &str, kinds: &[EdgeKind], direction: Direction) -> Result<Vec<String>, KgError> {
        self.get(id)?;
        let adj = match direction {
            Direction::Out => &self.out,
            Direction::In => &self.inc,
        };
        let mut v: Vec<String> = adj
            .get(id)
            .into_iter()
            .flatten()
            .filter(|(_, k)| kinds.contains(k))
            .map(|(n, _)| n.clone())
            .collect();
        v.dedup();
        Ok(v)
    }

    /// Executability out-neighbors in sorted-id order (no existence check).
    pub(crate) fn exec_out(&self, id: &str) -> impl Iterator<Item = &str> {
        let mut last: Option<&str> = None;
        self.out.get(id).into_iter().flatten().filter_map(move |(n, k)| {
            if !k.is_executability() || last == Some(n.as_str()) {
                return None;
            }
            last = Some(n.as_str());
            Some(n.as_str())
        })
    }

    /// Resolve a solver symbol (or bare name) to a code entity.
    pub fn find_code_symbol(&self, symbol: &str) -> Option<&Entity> {
        let by_id = super::code_id(symbol);
        if let Some(e) = self.entities.get(&by_id) {
            return Some(e);
        }
        self.entities
            .values()
            .find(|e| e.source == Source::Code && e.solver_symbol() == Some(symbol))
    }

    pub fn find_by_name(&self, name: &str) -> Vec<&Entity> {
        self.entities.values().filter(|e| e.name == name).collect()
    }

    /// Subgraph restricted to entities satisfying `keep`; edges with both
    /// endpoints kept are retained.
    pub fn filtered(&self, keep: impl Fn(&Entity) -> bool) -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for e in self.entities.values().filter(|e| keep(e)) {
            g.entities.insert(e.id.clone(), e.clone());
        }
        for edge in self.edges() {
            if g.contains(&edge.src) && g.contains(&edge.dst) {
                g.add_edge(edge).expect("endpoints present");
            }
        }
        g
    }

    /// Check edge referential integrity and entity invariants.
    pub fn audit(&self) -> Result<(), Vec<String>> {
        let mut problems = Vec::new();
        let mut count = 0;
        for (src, set) in &self.out {
            for (dst, kind) in set {
                count += 1;
                if src == dst {
                    problems.push(format!("self-loop on {src}"));
                }
                if !self.contains(src) || !self.contains(dst) {
                    problems.push(format!("dangling edge {src} -{kind}-> {dst}"));
                }
                if !self.inc.get(dst).is_some_and(|s| s.contains(&(src.clone(), *kind))) {
                    problems.push(format!("missing reverse index for {src} -{kind}-> {dst}"));
                }
            }
        }
        if count != self.edge_count {
            problems.push(format!("edge count {} != {count}", self.edge_count));
        }
        for (id, e) in &self.entities {
            if id != &e.id {
                problems.push(format!("entity key {id} != id {}", e.id));
            }
            if e.source == Source::Code && e.solver_symbol().is_none() {
                problems.push(format!("code entity {id} lacks {}", field::SOLVER_SYMBOL));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }

    pub fn kinds_count(&self) -> BTreeMap<EntityKind, usize> {
        let mut m = BTreeMap::new();
        for e in self.entities.values() {
            *m.entry(e.kind).or_insert(0) += 1;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for id in ["a", "b", "c"] {
            g.add_entity(Entity::new(id, EntityKind::Parameter, id, Source::Paper)).unwrap();
        }
        g
    }

    #[test]
    fn edges_validated() {
        let mut g = g();
        assert!(matches!(g.add_edge(Edge::new("a", "a", EdgeKind::UsedIn)), Err(KgError::SelfLoop(_))));
        assert!(matches!(g.add_edge(Edge::new("a", "z", EdgeKind::UsedIn)), Err(KgError::UnknownEntity(_))));
        assert!(g.add_edge(Edge::new("a", "b", EdgeKind::UsedIn)).unwrap());
        assert!(!g.add_edge(Edge::new("a", "b", EdgeKind::UsedIn)).unwrap());
        assert!(g.add_edge(Edge::new("a", "b", EdgeKind::DependsOn)).unwrap());
        assert_eq!(g.edge_count(), 2);
        g.audit().unwrap();
    }

    #[test]
    fn neighbors_sorted_and_filtered() {
        let mut g = g();
        g.add_edge(Edge::new("a", "c", EdgeKind::UsedIn)).unwrap();
        g.add_edge(Edge::new("a", "b", EdgeKind::DependsOn)).unwrap();
        g.add_edge(Edge::new("a", "b", EdgeKind::UsedIn)).unwrap();
        assert_eq!(g.neighbors("a", &[EdgeKind::UsedIn], Direction::Out).unwrap(), vec!["b", "c"]);
        assert_eq!(g.neighbors("a", &EdgeKind::EXECUTABILITY, Direction::Out).unwrap(), vec!["b", "c"]);
        assert_eq!(g.neighbors("b", &EdgeKind::EXECUTABILITY, Direction::In).unwrap(), vec!["a"]);
        assert!(g.neighbors("a", &[], Direction::Out).unwrap().is_empty());
        assert!(matches!(g.neighbors("zz", &[], Direction::Out), Err(KgError::UnknownEntity(_))));
        assert_eq!(g.exec_out("a").collect::<Vec<_>>(), vec!["b", "c"]);
    }
}
