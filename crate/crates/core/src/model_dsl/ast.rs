use std::fmt;

use serde::{Deserialize, Serialize};

/// A parsed MiniModel program. Statements are grouped by kind; within a
/// group they keep source order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelAst {
    pub sets: Vec<SetDecl>,
    pub params: Vec<ParamDecl>,
    pub vars: Vec<VarDecl>,
    pub constraints: Vec<ConstraintDecl>,
    pub objective: Option<Objective>,
}

impl ModelAst {
    /// All declared names in emission order.
    pub fn declared_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        names.extend(self.sets.iter().map(|s| s.name.as_str()));
        names.extend(self.params.iter().map(|p| p.name.as_str()));
        names.extend(self.vars.iter().map(|v| v.name.as_str()));
        names.extend(self.constraints.iter().map(|c| c.name.as_str()));
        names.extend(self.objective.iter().map(|o| o.name.as_str()));
        names
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
            && self.params.is_empty()
            && self.vars.is_empty()
            && self.constraints.is_empty()
            && self.objective.is_none()
    }

    pub fn set(&self, name: &str) -> Option<&SetDecl> {
        self.sets.iter().find(|s| s.name == name)
    }

    pub fn param(&self, name: &str) -> Option<&ParamDecl> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn var(&self, name: &str) -> Option<&VarDecl> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn constraint(&self, name: &str) -> Option<&ConstraintDecl> {
        self.constraints.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetDecl {
    pub name: String,
    pub def: SetDef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SetDef {
    Range(i64, i64),
    Members(Vec<String>),
}

impl SetDef {
    pub fn len(&self) -> usize {
        match self {
            SetDef::Range(lo, hi) if hi >= lo => (hi - lo + 1) as usize,
            SetDef::Range(..) => 0,
            SetDef::Members(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DataLiteral {
    Scalar(f64),
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDecl {
    pub name: String,
    pub index_sets: Vec<String>,
    pub data: Option<DataLiteral>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarDomain {
    Binary,
    Integer,
    Continuous,
}

impl VarDomain {
    pub fn as_str(self) -> &'static str {
        match self {
            VarDomain::Binary => "binary",
            VarDomain::Integer => "integer",
            VarDomain::Continuous => "continuous",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "binary" => Some(VarDomain::Binary),
            "integer" => Some(VarDomain::Integer),
            "continuous" => Some(VarDomain::Continuous),
            _ => None,
        }
    }
}

impl fmt::Display for VarDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarDecl {
    pub name: String,
    pub index_sets: Vec<String>,
    pub domain: VarDomain,
    pub bounds: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binding {
    pub index: String,
    pub set: String,
}

/// `{i in I, j in J : pred}` as used by constraints and sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantifier {
    pub bindings: Vec<Binding>,
    pub filter: Option<Predicate>,
}

/// Conjunction of comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub clauses: Vec<Comparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn canonical(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
        }
    }

    pub fn lingo(self) -> &'static str {
        match self {
            CmpOp::Lt => "#lt#",
            CmpOp::Le => "#le#",
            CmpOp::Gt => "#gt#",
            CmpOp::Ge => "#ge#",
            CmpOp::Eq => "#eq#",
            CmpOp::Ne => "#ne#",
        }
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDecl {
    pub name: String,
    pub quantifier: Option<Quantifier>,
    pub lhs: Expr,
    pub relation: Relation,
    pub rhs: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Max,
    Min,
}

impl Sense {
    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Max => "max",
            Sense::Min => "min",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub name: String,
    pub sense: Sense,
    pub expr: Expr,
}

/// Index position inside `name[...]`: a literal, a bare name, or `name +/- k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IndexExpr {
    Lit(i64),
    Name(String),
    Offset(String, i64),
}

impl IndexExpr {
    pub fn name(&self) -> Option<&str> {
        match self {
            IndexExpr::Lit(_) => None,
            IndexExpr::Name(n) | IndexExpr::Offset(n, _) => Some(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Num(f64),
    Ref { name: String, indices: Vec<IndexExpr> },
    Neg(Box<Expr>),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Sum { quantifier: Quantifier, body: Box<Expr> },
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn scalar(name: impl Into<String>) -> Expr {
        Expr::Ref { name: name.into(), indices: Vec::new() }
    }

    pub fn indexed(name: impl Into<String>, indices: Vec<IndexExpr>) -> Expr {
        Expr::Ref { name: name.into(), indices }
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn add(lhs: Expr, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Add, lhs, rhs)
    }

    pub fn sub(lhs: Expr, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Sub, lhs, rhs)
    }

    pub fn mul(lhs: Expr, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Mul, lhs, rhs)
    }

    /// Left-folded sum of the given terms; `0` when empty.
    pub fn sum_of(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut it = terms.into_iter();
        match it.next() {
            None => Expr::Num(0.0),
            Some(first) => it.fold(first, Expr::add),
        }
    }

    pub fn sum_over(bindings: Vec<Binding>, filter: Option<Predicate>, body: Expr) -> Expr {
        Expr::Sum { quantifier: Quantifier { bindings, filter }, body: Box::new(body) }
    }
}

impl Binding {
    pub fn new(index: impl Into<String>, set: impl Into<String>) -> Self {
        Binding { index: index.into(), set: set.into() }
    }
}
