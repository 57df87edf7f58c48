//! Dependency closure over executability edges.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::knowledge_graph::{Edge, KgError, KnowledgeGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureResult {
    pub target: String,
    pub members: BTreeSet<String>,
    pub visit_order: Vec<String>,
    pub edge_count: usize,
}

fn bfs(graph: &KnowledgeGraph, starts: &[&str]) -> Result<(BTreeSet<String>, Vec<String>), KgError> {
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    for s in starts {
        graph.get(s)?;
        if seen.insert(s.to_string()) {
            order.push(s.to_string());
            queue.push_back(s.to_string());
        }
    }
    while let Some(id) = queue.pop_front() {
        for n in graph.exec_out(&id) {
            if seen.insert(n.to_string()) {
                order.push(n.to_string());
                queue.push_back(n.to_string());
            }
        }
    }
    Ok((seen, order))
}

/// Forward-reachable set from `target` over `used_in`/`depends_on`,
/// discovered breadth-first with neighbors in id order.
pub fn closure(graph: &KnowledgeGraph, target: &str) -> Result<ClosureResult, KgError> {
    let (members, visit_order) = bfs(graph, &[target])?;
    let edge_count = internal_edges(graph, &members).len();
    Ok(ClosureResult { target: target.to_string(), members, visit_order, edge_count })
}

/// Union of per-target closures.
pub fn closure_union(graph: &KnowledgeGraph, targets: &[String]) -> Result<BTreeSet<String>, KgError> {
    let starts: Vec<&str> = targets.iter().map(String::as_str).collect();
    Ok(bfs(graph, &starts)?.0)
}

fn internal_edges(graph: &KnowledgeGraph, members: &BTreeSet<String>) -> Vec<Edge> {
    let mut v = Vec::new();
    for m in members {
        for n in graph.exec_out(m) {
            if members.contains(n) {
                v.extend(exec_edges_between(graph, m, n));
            }
        }
    }
    v
}

fn exec_edges_between(graph: &KnowledgeGraph, src: &str, dst: &str) -> Vec<Edge> {
    crate::knowledge_graph::EdgeKind::EXECUTABILITY
        .iter()
        .filter(|k| graph.has_edge(src, dst, **k))
        .map(|k| Edge::new(src, dst, *k))
        .collect()
}

/// Entities in `members` plus the executability edges internal to them.
pub fn induced_subgraph(graph: &KnowledgeGraph, members: &BTreeSet<String>) -> Result<KnowledgeGraph, KgError> {
    let mut sub = KnowledgeGraph::new();
    for m in members {
        sub.add_entity(graph.get(m)?.clone())?;
    }
    for e in internal_edges(graph, members) {
        sub.add_edge(e)?;
    }
    Ok(sub)
}

/// Closedness check; lists every executability edge leaving `members`.
/// Ids absent from the graph have no out-edges and never violate.
pub fn is_well_defined(graph: &KnowledgeGraph, members: &BTreeSet<String>) -> (bool, Vec<(String, String)>) {
    let mut violations = Vec::new();
    for m in members {
        for n in graph.exec_out(m) {
            if !members.contains(n) {
                violations.push((m.clone(), n.to_string()));
            }
        }
    }
    (violations.is_empty(), violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge_graph::{EdgeKind, Entity, EntityKind, Source};
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(usize, usize, EdgeKind)]) -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for i in 0..n {
            g.add_entity(Entity::new(format!("n{i:02}"), EntityKind::Concept, format!("n{i}"), Source::Paper))
                .unwrap();
        }
        for &(a, b, k) in edges {
            if a != b {
                g.add_edge(Edge::new(format!("n{a:02}"), format!("n{b:02}"), k)).unwrap();
            }
        }
        g
    }

    /// Reachability by repeated relaxation until a fixpoint.
    fn relax(n: usize, edges: &[(usize, usize, EdgeKind)], t: usize) -> BTreeSet<String> {
        let mut r = vec![false; n];
        r[t] = true;
        loop {
            let mut changed = false;
            for &(a, b, k) in edges {
                if k.is_executability() && r[a] && !r[b] {
                    r[b] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        (0..n).filter(|&i| r[i]).map(|i| format!("n{i:02}")).collect()
    }

    fn kind_of(x: u8) -> EdgeKind {
        [EdgeKind::UsedIn, EdgeKind::DependsOn, EdgeKind::AlignsTo][x as usize % 3]
    }

    fn digraph() -> impl Strategy<Value = (usize, Vec<(usize, usize, EdgeKind)>)> {
        (1usize..=12).prop_flat_map(|n| {
            let e = (0..n, 0..n, any::<u8>()).prop_map(|(a, b, k)| (a, b, kind_of(k)));
            (Just(n), proptest::collection::vec(e, 0..40))
        })
    }

    #[test]
    fn isolated_node() {
        let g = graph(3, &[(1, 0, EdgeKind::UsedIn)]);
        let c = closure(&g, "n00").unwrap();
        assert_eq!(c.members, BTreeSet::from(["n00".to_string()]));
        assert_eq!(c.visit_order, vec!["n00"]);
        assert_eq!(c.edge_count, 0);
    }

    #[test]
    fn bfs_order_sorted_and_cycles_terminate() {
        let g = graph(
            5,
            &[
                (0, 3, EdgeKind::UsedIn),
                (0, 1, EdgeKind::DependsOn),
                (1, 4, EdgeKind::UsedIn),
                (3, 2, EdgeKind::UsedIn),
                (4, 0, EdgeKind::UsedIn),
                (2, 1, EdgeKind::AlignsTo),
            ],
        );
        let c = closure(&g, "n00").unwrap();
        assert_eq!(c.visit_order, vec!["n00", "n01", "n03", "n04", "n02"]);
        assert_eq!(c.edge_count, 5);
    }

    #[test]
    fn unknown_target() {
        assert!(matches!(closure(&graph(1, &[]), "zz"), Err(KgError::UnknownEntity(_))));
        let m = BTreeSet::from(["zz".to_string()]);
        assert!(matches!(induced_subgraph(&graph(1, &[]), &m), Err(KgError::UnknownEntity(_))));
    }

    #[test]
    fn induced_subgraph_excludes_alignment_and_escaping_edges() {
        let g = graph(3, &[(0, 1, EdgeKind::UsedIn), (0, 2, EdgeKind::UsedIn), (0, 1, EdgeKind::AlignsTo)]);
        let one = BTreeSet::from(["n00".to_string()]);
        let sub = induced_subgraph(&g, &one).unwrap();
        assert_eq!((sub.len(), sub.edge_count()), (1, 0));
        let all: BTreeSet<String> = g.ids().map(String::from).collect();
        let sub = induced_subgraph(&g, &all).unwrap();
        assert_eq!(sub.edge_count(), 2);
    }

    #[test]
    fn well_defined_reports_escapes() {
        let g = graph(3, &[(0, 1, EdgeKind::UsedIn), (1, 2, EdgeKind::DependsOn)]);
        assert_eq!(is_well_defined(&g, &BTreeSet::new()), (true, vec![]));
        let m = BTreeSet::from(["n00".to_string(), "n01".to_string()]);
        assert_eq!(is_well_defined(&g, &m), (false, vec![("n01".to_string(), "n02".to_string())]));
    }

    #[test]
    fn union_of_targets() {
        let g = graph(4, &[(0, 1, EdgeKind::UsedIn), (2, 3, EdgeKind::DependsOn)]);
        let u = closure_union(&g, &["n00".into(), "n02".into()]).unwrap();
        assert_eq!(u.len(), 4);
    }

    proptest! {
        #[test]
        fn matches_relaxation_oracle((n, edges) in digraph(), t in 0usize..12) {
            let t = t % n;
            let g = graph(n, &edges);
            let c = closure(&g, &format!("n{t:02}")).unwrap();
            prop_assert_eq!(&c.members, &relax(n, &edges, t));
            prop_assert!(is_well_defined(&g, &c.members).0);
            prop_assert_eq!(c.visit_order.len(), c.members.len());
            prop_assert_eq!(c.edge_count, induced_subgraph(&g, &c.members).unwrap().edge_count());
        }

        #[test]
        fn idempotent((n, edges) in digraph(), t in 0usize..12) {
            let t = format!("n{:02}", t % n);
            let g = graph(n, &edges);
            let c = closure(&g, &t).unwrap();
            let targets: Vec<String> = c.members.iter().cloned().collect();
            prop_assert_eq!(closure_union(&g, &targets).unwrap(), c.members.clone());
            prop_assert_eq!(closure(&g, &t).unwrap(), c);
        }

        #[test]
        fn monotone((n, edges) in digraph(), extra in (0usize..12, 0usize..12, any::<u8>()), t in 0usize..12) {
            let t = t % n;
            let before = closure(&graph(n, &edges), &format!("n{t:02}")).unwrap().members;
            let mut more = edges.clone();
            more.push((extra.0 % n, extra.1 % n, kind_of(extra.2)));
            let after = closure(&graph(n, &more), &format!("n{t:02}")).unwrap().members;
            prop_assert!(before.is_subset(&after));
        }

        #[test]
        fn minimal((n, edges) in digraph(), t in 0usize..12) {
            let t = t % n;
            let g = graph(n, &edges);
            let c = closure(&g, &format!("n{t:02}")).unwrap();
            // dropping any non-target member breaks closedness
            for m in c.members.iter().filter(|m| **m != c.target) {
                let mut fewer = c.members.clone();
                fewer.remove(m);
                prop_assert!(!is_well_defined(&g, &fewer).0);
            }
        }
    }
}
