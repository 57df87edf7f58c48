//! Random well-formed models and graphs for property sweeps and benches.
//!
//! Every generated model is symbolically complete: each reference names a
//! declared symbol of the right kind and arity.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::knowledge_graph::{ConceptCard, EntityKind, KnowledgeGraph, RelationKind};
use crate::model_dsl::*;

struct Ctx {
    sets: Vec<SetDecl>,
    symbols: Vec<(String, Vec<String>)>,
    next_dummy: usize,
}

fn number(rng: &mut impl Rng) -> f64 {
    f64::from(rng.gen_range(0..200)) / 4.0
}

fn signed(rng: &mut impl Rng) -> f64 {
    f64::from(rng.gen_range(-200..200)) / 4.0
}

impl Ctx {
    fn set_len(&self, name: &str) -> usize {
        self.sets.iter().find(|s| s.name == name).map_or(0, |s| s.def.len())
    }

    fn index_for(&self, rng: &mut impl Rng, set: &str, scope: &[(String, String)]) -> IndexExpr {
        let bound: Vec<&(String, String)> = scope.iter().filter(|(_, s)| s == set).collect();
        if let Some((dummy, _)) = bound.choose(rng) {
            if rng.gen_bool(0.25) {
                let k = *[-2i64, -1, 1, 2].choose(rng).unwrap();
                return IndexExpr::Offset(dummy.clone(), k);
            }
            return IndexExpr::Name(dummy.clone());
        }
        let decl = self.sets.iter().find(|s| s.name == set).unwrap();
        match &decl.def {
            SetDef::Members(m) => IndexExpr::Name(m.choose(rng).unwrap().clone()),
            SetDef::Range(lo, hi) => IndexExpr::Lit(rng.gen_range(*lo..=*hi)),
        }
    }

    fn reference(&self, rng: &mut impl Rng, scope: &[(String, String)]) -> Expr {
        let (name, sets) = self.symbols.choose(rng).unwrap();
        let indices = sets.iter().map(|s| self.index_for(rng, s, scope)).collect();
        Expr::Ref { name: name.clone(), indices }
    }

    fn quantifier(&mut self, rng: &mut impl Rng, scope: &mut Vec<(String, String)>, max_bindings: usize) -> Quantifier {
        let n = rng.gen_range(1..=max_bindings);
        let mut bindings = Vec::new();
        for _ in 0..n {
            let set = self.sets.choose(rng).unwrap().name.clone();
            let dummy = format!("i{}", self.next_dummy);
            self.next_dummy += 1;
            scope.push((dummy.clone(), set.clone()));
            bindings.push(Binding::new(dummy, set));
        }
        let filter = rng.gen_bool(0.3).then(|| {
            let clauses = (0..rng.gen_range(1..=2))
                .map(|_| {
                    let b = bindings.choose(rng).unwrap();
                    let op = *[CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne].choose(rng).unwrap();
                    let len = self.set_len(&b.set).max(1) as i64;
                    Comparison { lhs: Expr::scalar(b.index.clone()), op, rhs: Expr::Num(rng.gen_range(0..=len) as f64) }
                })
                .collect();
            Predicate { clauses }
        });
        Quantifier { bindings, filter }
    }

    fn expr(&mut self, rng: &mut impl Rng, scope: &mut Vec<(String, String)>, depth: usize) -> Expr {
        let leaf = depth == 0 || rng.gen_bool(0.35);
        if leaf {
            return if rng.gen_bool(0.3) { Expr::Num(number(rng)) } else { self.reference(rng, scope) };
        }
        match rng.gen_range(0..10) {
            0 => Expr::Neg(Box::new(self.expr(rng, scope, depth - 1))),
            1 | 2 => {
                let mark = scope.len();
                let quantifier = self.quantifier(rng, scope, 2);
                let body = self.expr(rng, scope, depth - 1);
                scope.truncate(mark);
                Expr::Sum { quantifier, body: Box::new(body) }
            }
            _ => {
                let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div].choose(rng).unwrap();
                let l = self.expr(rng, scope, depth - 1);
                let r = self.expr(rng, scope, depth - 1);
                Expr::bin(op, l, r)
            }
        }
    }
}

fn pick_sets(rng: &mut impl Rng, sets: &[SetDecl]) -> Vec<String> {
    let n = rng.gen_range(0..=2);
    (0..n).map(|_| sets.choose(rng).unwrap().name.clone()).collect()
}

/// Random symbolically complete model.
pub fn random_model(rng: &mut impl Rng) -> ModelAst {
    let mut ast = ModelAst::default();
    for i in 0..rng.gen_range(1..=3) {
        let def = if rng.gen_bool(0.25) {
            SetDef::Members((0..rng.gen_range(1..=3)).map(|k| format!("e{i}k{k}")).collect())
        } else {
            let lo = rng.gen_range(0..3);
            SetDef::Range(lo, lo + rng.gen_range(0..4))
        };
        ast.sets.push(SetDecl { name: format!("S{i}"), def });
    }
    let mut ctx = Ctx { sets: ast.sets.clone(), symbols: Vec::new(), next_dummy: 0 };
    for i in 0..rng.gen_range(0..=4) {
        let index_sets = pick_sets(rng, &ast.sets);
        let size: usize = index_sets.iter().map(|s| ctx.set_len(s)).product();
        let data = match rng.gen_range(0..3) {
            0 => None,
            _ if index_sets.is_empty() => Some(DataLiteral::Scalar(signed(rng))),
            _ => Some(DataLiteral::List((0..size).map(|_| signed(rng)).collect())),
        };
        let name = format!("p{i}");
        ctx.symbols.push((name.clone(), index_sets.clone()));
        ast.params.push(ParamDecl { name, index_sets, data });
    }
    for i in 0..rng.gen_range(1..=4) {
        let index_sets = pick_sets(rng, &ast.sets);
        let domain = *[VarDomain::Binary, VarDomain::Integer, VarDomain::Continuous].choose(rng).unwrap();
        let bounds = rng.gen_bool(0.3).then(|| {
            let lo = signed(rng);
            (lo, lo + number(rng))
        });
        let name = format!("x{i}");
        ctx.symbols.push((name.clone(), index_sets.clone()));
        ast.vars.push(VarDecl { name, index_sets, domain, bounds });
    }
    for i in 0..rng.gen_range(0..=4) {
        let mut scope = Vec::new();
        let quantifier = rng.gen_bool(0.6).then(|| ctx.quantifier(rng, &mut scope, 2));
        let lhs = ctx.expr(rng, &mut scope, 3);
        let rhs = ctx.expr(rng, &mut scope, 2);
        let relation = *[Relation::Le, Relation::Eq, Relation::Ge].choose(rng).unwrap();
        ast.constraints.push(ConstraintDecl { name: format!("c{i}"), quantifier, lhs, relation, rhs });
    }
    if rng.gen_bool(0.7) {
        let expr = ctx.expr(rng, &mut Vec::new(), 3);
        let sense = if rng.gen_bool(0.5) { Sense::Max } else { Sense::Min };
        ast.objective = Some(Objective { name: "obj".into(), sense, expr });
    }
    ast
}

/// Random well-formed graph: a random model plus concept cards aligned to
/// some of its symbols, with relations among the cards.
pub fn random_graph(rng: &mut impl Rng) -> (KnowledgeGraph, ModelAst) {
    let ast = random_model(rng);
    let mut g = KnowledgeGraph::new();
    let source = emit_model(&ast, Dialect::Canonical).expect("finite model");
    g.ingest_source(&source).expect("generated source parses");
    let names: Vec<String> = ast.declared_names().into_iter().map(String::from).collect();
    let mut cards: Vec<ConceptCard> = Vec::new();
    for i in 0..rng.gen_range(0..=3) {
        let mut card = ConceptCard::new(&format!("concept {i}"), EntityKind::Concept, &format!("about concept {i}"), "");
        if rng.gen_bool(0.7) {
            card = card.hint(names.choose(rng).unwrap());
        }
        if i > 0 && rng.gen_bool(0.5) {
            let kind = if rng.gen_bool(0.5) { RelationKind::UsedIn } else { RelationKind::DependsOn };
            card = card.relation(kind, &format!("concept {}", rng.gen_range(0..i)));
        }
        cards.push(card);
    }
    g.ingest_concept_cards(&cards).expect("relations point backwards");
    g.align();
    (g, ast)
}
