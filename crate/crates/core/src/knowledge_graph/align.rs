use serde::{Deserialize, Serialize};

use super::entity::{field, Edge, EdgeKind, Entity, EntityKind, Source};
use super::KnowledgeGraph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ambiguity {
    pub paper_id: String,
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignOutcome {
    pub edges: Vec<Edge>,
    pub ambiguities: Vec<Ambiguity>,
}

/// Case-fold and drop separators and subscript punctuation.
pub fn normalize_name(s: &str) -> String {
    s.chars()
        .flat_map(char::to_lowercase)
        .filter(|c| !matches!(c, '_' | '{' | '}' | '^' | '-' | '.') && !c.is_whitespace())
        .collect()
}

fn strip_digits(s: &str) -> String {
    s.chars().filter(|c| !c.is_ascii_digit()).collect()
}

/// Does a normalized paper name match a code symbol? Digit runs in code
/// symbols are machine/branch subscripts; a digit-free paper name matches
/// every subscripted instance.
fn name_matches(paper_norm: &str, code_symbol: &str) -> bool {
    let code_norm = normalize_name(code_symbol);
    if paper_norm.chars().any(|c| c.is_ascii_digit()) {
        paper_norm == code_norm
    } else {
        paper_norm == strip_digits(&code_norm)
    }
}

fn kinds_compatible(paper: EntityKind, code: EntityKind) -> bool {
    paper == EntityKind::Concept || paper == code
}

impl KnowledgeGraph {
    /// Link paper concepts to their code realizations. A hint that names
    /// exactly one code symbol wins; otherwise the normalized name (or an
    /// alias) must match exactly one code entity. Two or more candidates are
    /// reported and left unlinked.
    pub fn align(&mut self) -> AlignOutcome {
        let code: Vec<&Entity> = self
            .entities()
            .filter(|e| e.source == Source::Code && !e.is_unresolved())
            .collect();
        let mut outcome = AlignOutcome::default();

        for p in self.entities().filter(|e| e.source == Source::Paper) {
            let mut candidates: Vec<String> = Vec::new();
            if let Some(hint) = p.field(field::SOLVER_SYMBOL_HINT) {
                candidates = code
                    .iter()
                    .filter(|c| c.solver_symbol() == Some(hint))
                    .map(|c| c.id.clone())
                    .collect();
            }
            if candidates.is_empty() {
                let mut names = vec![normalize_name(&p.name)];
                names.extend(p.aliases().iter().map(|a| normalize_name(a)));
                candidates = code
                    .iter()
                    .filter(|c| kinds_compatible(p.kind, c.kind))
                    .filter(|c| {
                        let sym = c.solver_symbol().unwrap_or(&c.name);
                        names.iter().any(|n| !n.is_empty() && name_matches(n, sym))
                    })
                    .map(|c| c.id.clone())
                    .collect();
            }
            match candidates.len() {
                0 => {}
                1 => outcome.edges.push(Edge::new(p.id.clone(), candidates.remove(0), EdgeKind::AlignsTo)),
                _ => outcome.ambiguities.push(Ambiguity { paper_id: p.id.clone(), candidates }),
            }
        }
        for e in &outcome.edges {
            self.add_edge(e.clone()).expect("endpoints exist");
        }
        outcome
    }
}

#[cfg(test)]
mod tests {
    use super::super::ConceptCard;
    use super::*;

    fn graph_with(cards: Vec<ConceptCard>, source: &str) -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        g.ingest_source(source).unwrap();
        g.ingest_concept_cards(&cards).unwrap();
        g
    }

    #[test]
    fn hint_alignment() {
        let mut g = graph_with(
            vec![ConceptCard::new("machine power", EntityKind::Parameter, "", "").hint("m11Power")],
            "param m11Power = 2; param m12Power = 3;",
        );
        let out = g.align();
        assert_eq!(
            out.edges,
            vec![Edge::new("paper:machine_power", "code:m11Power", EdgeKind::AlignsTo)]
        );
        assert!(out.ambiguities.is_empty());
    }

    #[test]
    fn ambiguous_name_is_reported_not_linked() {
        let mut g = graph_with(
            vec![ConceptCard::new("m_Power", EntityKind::Parameter, "", "")],
            "param m11Power = 2; param m12Power = 3;",
        );
        let out = g.align();
        assert!(out.edges.is_empty());
        assert_eq!(
            out.ambiguities,
            vec![Ambiguity {
                paper_id: "paper:m_power".into(),
                candidates: vec!["code:m11Power".into(), "code:m12Power".into()],
            }]
        );
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn digits_in_paper_name_require_exact_match() {
        let mut g = graph_with(
            vec![ConceptCard::new("M11 power", EntityKind::Parameter, "", "")],
            "param m11Power = 2; param m12Power = 3;",
        );
        assert_eq!(g.align().edges.len(), 1);
    }

    #[test]
    fn no_paper_entities() {
        let mut g = KnowledgeGraph::new();
        g.ingest_source("param a = 1;").unwrap();
        assert_eq!(g.align(), AlignOutcome::default());
    }
}
