use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclKind {
    Set,
    Param,
    Var,
    Constraint,
    Objective,
}

impl DeclKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DeclKind::Set => "set",
            DeclKind::Param => "param",
            DeclKind::Var => "var",
            DeclKind::Constraint => "constraint",
            DeclKind::Objective => "objective",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Declaration {
    pub kind: DeclKind,
    /// Variable domain (`binary`, `integer`, `continuous`); `None` otherwise.
    pub domain: Option<String>,
    pub arity: usize,
    /// Index sets named in the declaration (for constraints, the quantifier sets).
    pub index_sets: Vec<String>,
}

/// Where a name occurs inside an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Usage {
    /// Operand of arithmetic: must be a variable or a parameter.
    Value,
    /// Set iterated by a quantifier or sum.
    Iteration,
    /// Free name used inside `[...]`: a set member or scalar parameter.
    Index,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reference {
    pub name: String,
    pub arity: usize,
    /// Name of the constraint or objective containing the use.
    pub site: String,
    pub usage: Usage,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SymbolTable {
    pub declarations: BTreeMap<String, Declaration>,
    pub references: Vec<Reference>,
}

impl SymbolTable {
    pub fn value_references(&self) -> impl Iterator<Item = &Reference> {
        self.references.iter().filter(|r| r.usage == Usage::Value)
    }

    /// Members of every member-list set, for resolving free index names.
    pub fn set_members<'a>(&self, ast: &'a ModelAst) -> Vec<&'a str> {
        ast.sets
            .iter()
            .filter_map(|s| match &s.def {
                SetDef::Members(m) => Some(m.iter().map(String::as_str)),
                SetDef::Range(..) => None,
            })
            .flatten()
            .collect()
    }
}

pub fn extract_symbols(ast: &ModelAst) -> SymbolTable {
    let mut table = SymbolTable::default();
    for s in &ast.sets {
        table.declarations.insert(
            s.name.clone(),
            Declaration { kind: DeclKind::Set, domain: None, arity: 0, index_sets: Vec::new() },
        );
    }
    for p in &ast.params {
        table.declarations.insert(
            p.name.clone(),
            Declaration {
                kind: DeclKind::Param,
                domain: None,
                arity: p.index_sets.len(),
                index_sets: p.index_sets.clone(),
            },
        );
    }
    for v in &ast.vars {
        table.declarations.insert(
            v.name.clone(),
            Declaration {
                kind: DeclKind::Var,
                domain: Some(v.domain.as_str().to_string()),
                arity: v.index_sets.len(),
                index_sets: v.index_sets.clone(),
            },
        );
    }

    for c in &ast.constraints {
        let sets: Vec<String> = c
            .quantifier
            .iter()
            .flat_map(|q| q.bindings.iter().map(|b| b.set.clone()))
            .collect();
        table.declarations.insert(
            c.name.clone(),
            Declaration { kind: DeclKind::Constraint, domain: None, arity: sets.len(), index_sets: sets },
        );
        let mut walker = Walker { site: &c.name, scope: Vec::new(), out: &mut table.references };
        if let Some(q) = &c.quantifier {
            walker.enter(q);
        }
        walker.expr(&c.lhs);
        walker.expr(&c.rhs);
    }
    if let Some(o) = &ast.objective {
        table.declarations.insert(
            o.name.clone(),
            Declaration { kind: DeclKind::Objective, domain: None, arity: 0, index_sets: Vec::new() },
        );
        let mut walker = Walker { site: &o.name, scope: Vec::new(), out: &mut table.references };
        walker.expr(&o.expr);
    }
    table
}

struct Walker<'a> {
    site: &'a str,
    scope: Vec<String>,
    out: &'a mut Vec<Reference>,
}

impl Walker<'_> {
    fn push(&mut self, name: &str, arity: usize, usage: Usage) {
        self.out.push(Reference {
            name: name.to_string(),
            arity,
            site: self.site.to_string(),
            usage,
        });
    }

    fn bound(&self, name: &str) -> bool {
        self.scope.iter().any(|s| s == name)
    }

    /// Records the iterated sets, binds the dummies and walks the filter.
    /// Returns how many names were bound so the caller can unwind.
    fn enter(&mut self, q: &Quantifier) -> usize {
        for b in &q.bindings {
            self.push(&b.set, 0, Usage::Iteration);
            self.scope.push(b.index.clone());
        }
        if let Some(f) = &q.filter {
            for c in &f.clauses {
                self.expr(&c.lhs);
                self.expr(&c.rhs);
            }
        }
        q.bindings.len()
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Num(_) => {}
            Expr::Ref { name, indices } => {
                if !(indices.is_empty() && self.bound(name)) {
                    self.push(name, indices.len(), Usage::Value);
                }
                for ix in indices {
                    if let Some(n) = ix.name() {
                        if !self.bound(n) {
                            self.push(n, 0, Usage::Index);
                        }
                    }
                }
            }
            Expr::Neg(inner) => self.expr(inner),
            Expr::Binary { lhs, rhs, .. } => {
                self.expr(lhs);
                self.expr(rhs);
            }
            Expr::Sum { quantifier, body } => {
                let n = self.enter(quantifier);
                self.expr(body);
                self.scope.truncate(self.scope.len() - n);
            }
        }
    }
}
