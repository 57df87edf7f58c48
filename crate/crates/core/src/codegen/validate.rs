use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::knowledge_graph::{field, EntityKind, KnowledgeGraph, Source};
use crate::model_dsl::{extract_symbols, parse_model, Usage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KindMismatch {
    pub name: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArityMismatch {
    pub name: String,
    pub declared: usize,
    pub used: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub status: Status,
    pub missing_declarations: Vec<String>,
    pub kind_mismatches: Vec<KindMismatch>,
    pub arity_mismatches: Vec<ArityMismatch>,
    pub parse_error: Option<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    fn finish(mut self) -> Self {
        let clean = self.missing_declarations.is_empty()
            && self.kind_mismatches.is_empty()
            && self.arity_mismatches.is_empty()
            && self.parse_error.is_none();
        self.status = if clean { Status::Ok } else { Status::Failed };
        self
    }

    fn empty() -> Self {
        ValidationReport {
            status: Status::Ok,
            missing_declarations: Vec::new(),
            kind_mismatches: Vec::new(),
            arity_mismatches: Vec::new(),
            parse_error: None,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("status={}\n", if self.is_ok() { "ok" } else { "failed" });
        s += &format!("missing_declarations={}\n", self.missing_declarations.join(","));
        let km: Vec<String> =
            self.kind_mismatches.iter().map(|k| format!("{}:{}:{}", k.name, k.expected, k.actual)).collect();
        s += &format!("kind_mismatches={}\n", km.join(","));
        let am: Vec<String> =
            self.arity_mismatches.iter().map(|a| format!("{}:{}:{}", a.name, a.declared, a.used)).collect();
        s += &format!("arity_mismatches={}\n", am.join(","));
        if let Some(e) = &self.parse_error {
            s += &format!("parse_error={e}\n");
        }
        s
    }
}

pub const EXPECT_VALUE: &str = "parameter_or_variable";
pub const EXPECT_INDEX: &str = "set_member_or_parameter";

struct Known {
    kind: EntityKind,
    arity: usize,
}

fn members_of(set_def: &str) -> Vec<String> {
    set_def
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .map(|s| s.split(',').map(|m| m.trim().to_string()).filter(|m| !m.is_empty()).collect())
        .unwrap_or_default()
}

/// Static symbolic-completeness check of MiniModel code. Names resolve
/// against the code's own declarations first, then the resolved code
/// entities of `env`.
pub fn validate(code: &str, env: &KnowledgeGraph) -> ValidationReport {
    let mut report = ValidationReport::empty();
    let ast = match parse_model(code) {
        Ok(a) => a,
        Err(e) => {
            report.parse_error = Some(e.to_string());
            return report.finish();
        }
    };
    let table = extract_symbols(&ast);

    let lookup = |name: &str| -> Option<Known> {
        if let Some(d) = table.declarations.get(name) {
            return Some(Known { kind: EntityKind::from_decl(d.kind), arity: d.arity });
        }
        env.find_code_symbol(name)
            .filter(|e| e.source == Source::Code && !e.is_unresolved())
            .map(|e| Known { kind: e.kind, arity: e.index_sets().len() })
    };
    let mut members: BTreeSet<String> = table.set_members(&ast).into_iter().map(String::from).collect();
    for e in env.entities().filter(|e| e.source == Source::Code && e.kind == EntityKind::IndexSet) {
        members.extend(members_of(e.field(field::SET_DEF).unwrap_or("")));
    }

    let missing = |r: &mut ValidationReport, name: &str| {
        if !r.missing_declarations.iter().any(|m| m == name) {
            r.missing_declarations.push(name.to_string());
        }
    };
    let kind = |r: &mut ValidationReport, name: &str, expected: &str, actual: EntityKind| {
        let k = KindMismatch { name: name.into(), expected: expected.into(), actual: actual.as_str().into() };
        if !r.kind_mismatches.contains(&k) {
            r.kind_mismatches.push(k);
        }
    };

    // index sets named by declarations
    for decl in table.declarations.values() {
        for s in &decl.index_sets {
            match lookup(s) {
                None => missing(&mut report, s),
                Some(k) if k.kind != EntityKind::IndexSet => kind(&mut report, s, EntityKind::IndexSet.as_str(), k.kind),
                Some(_) => {}
            }
        }
    }

    for r in &table.references {
        match r.usage {
            Usage::Value => match lookup(&r.name) {
                None => missing(&mut report, &r.name),
                Some(k) if !matches!(k.kind, EntityKind::DecisionVariable | EntityKind::Parameter) => {
                    kind(&mut report, &r.name, EXPECT_VALUE, k.kind)
                }
                Some(k) if k.arity != r.arity => {
                    let a = ArityMismatch { name: r.name.clone(), declared: k.arity, used: r.arity };
                    if !report.arity_mismatches.contains(&a) {
                        report.arity_mismatches.push(a);
                    }
                }
                Some(_) => {}
            },
            Usage::Iteration => match lookup(&r.name) {
                None => missing(&mut report, &r.name),
                Some(k) if k.kind != EntityKind::IndexSet => kind(&mut report, &r.name, EntityKind::IndexSet.as_str(), k.kind),
                Some(_) => {}
            },
            Usage::Index => {
                if members.contains(&r.name) {
                    continue;
                }
                match lookup(&r.name) {
                    None => missing(&mut report, &r.name),
                    Some(k) if k.kind == EntityKind::Parameter && k.arity == 0 => {}
                    Some(k) => kind(&mut report, &r.name, EXPECT_INDEX, k.kind),
                }
            }
        }
    }
    report.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(code: &str) -> ValidationReport {
        validate(code, &KnowledgeGraph::new())
    }

    #[test]
    fn complete_code_is_ok() {
        let r = v("set T = 1..3; param p{T} = [1, 2, 3]; var y{T} binary; con c{t in T}: y[t] <= p[t]; max o: sum{t in T}(y[t]);");
        assert!(r.is_ok(), "{r:?}");
    }

    #[test]
    fn undeclared_upstream_buffer() {
        let r = v("set T = 1..3; var y{T} binary; con c{i in T : i >= 2}: y[i] <= B13[i-1];");
        assert_eq!(r.status, Status::Failed);
        assert_eq!(r.missing_declarations, vec!["B13"]);
    }

    #[test]
    fn env_graph_supplies_declarations() {
        let mut g = KnowledgeGraph::new();
        g.ingest_source("set T = 1..3; var B13{T} integer;").unwrap();
        let r = validate("var y{T} binary; con c{i in T : i >= 2}: y[i] <= B13[i-1];", &g);
        assert!(r.is_ok(), "{r:?}");
    }

    #[test]
    fn placeholders_do_not_count() {
        let mut g = KnowledgeGraph::new();
        g.ingest_source("set T = 1..3; var y{T} binary; con c{i in T : i >= 2}: y[i] <= B13[i-1];").unwrap();
        let r = validate("con d{i in T}: B13[i] >= 0;", &g);
        assert_eq!(r.missing_declarations, vec!["B13"]);
    }

    #[test]
    fn parameter_iterated_as_set() {
        let r = v("param n = 3; var y binary; con c{i in n}: y <= 1;");
        assert_eq!(
            r.kind_mismatches,
            vec![KindMismatch { name: "n".into(), expected: "index_set".into(), actual: "parameter".into() }]
        );
    }

    #[test]
    fn arity_and_value_kind() {
        let r = v("set T = 1..2; var y{T} binary; con c: y >= T;");
        assert_eq!(r.arity_mismatches, vec![ArityMismatch { name: "y".into(), declared: 1, used: 0 }]);
        assert_eq!(r.kind_mismatches[0].expected, EXPECT_VALUE);
    }

    #[test]
    fn index_positions() {
        assert!(v("set M = {a, b}; param k = 1; var y{M} binary; con c: y[a] + y[b] <= k;").is_ok());
        let r = v("set M = {a, b}; var y{M} binary; con c: y[q] <= 1;");
        assert_eq!(r.missing_declarations, vec!["q"]);
    }

    #[test]
    fn missing_index_set_in_declaration() {
        let r = v("var y{T} binary;");
        assert_eq!(r.missing_declarations, vec!["T"]);
    }

    #[test]
    fn syntax_error_reported() {
        let r = v("con c: x >= ;");
        assert!(r.parse_error.is_some());
        assert_eq!(r.status, Status::Failed);
    }
}
