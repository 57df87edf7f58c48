//! Numeric evaluation of MiniModel constraints and objectives against a
//! candidate assignment. Used to check emitted models against independent
//! evaluators; it is not a solver.

use std::collections::HashMap;

use thiserror::Error;

use super::ast::*;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("unknown set `{0}`")]
    UnknownSet(String),
    #[error("no value for `{0}`")]
    Unbound(String),
    #[error("index {index:?} out of range for `{name}`")]
    OutOfRange { name: String, index: Vec<i64> },
    #[error("parameter `{name}` has {found} data values, expected {expected}")]
    DataLength { name: String, expected: usize, found: usize },
    #[error("model has no objective")]
    NoObjective,
}

/// Values of variables (and of parameters declared without data), keyed by
/// symbol name then index tuple. Missing variable entries read as zero.
pub type Assignment = HashMap<String, HashMap<Vec<i64>, f64>>;

#[derive(Debug, Clone)]
struct SetInfo {
    lo: i64,
    values: Vec<i64>,
}

#[derive(Debug, Clone)]
struct ParamInfo {
    dims: Vec<SetInfo>,
    data: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: String,
    pub binding: Vec<i64>,
    pub lhs: f64,
    pub rhs: f64,
}

pub struct Evaluator<'a> {
    ast: &'a ModelAst,
    sets: HashMap<&'a str, SetInfo>,
    members: HashMap<&'a str, i64>,
    params: HashMap<&'a str, ParamInfo>,
    vars: HashMap<&'a str, ()>,
}

impl<'a> Evaluator<'a> {
    pub fn new(ast: &'a ModelAst) -> Result<Self, EvalError> {
        let mut sets = HashMap::new();
        let mut members = HashMap::new();
        for s in &ast.sets {
            let info = match &s.def {
                SetDef::Range(lo, hi) => SetInfo { lo: *lo, values: (*lo..=*hi).collect() },
                SetDef::Members(m) => {
                    for (i, name) in m.iter().enumerate() {
                        members.insert(name.as_str(), i as i64 + 1);
                    }
                    SetInfo { lo: 1, values: (1..=m.len() as i64).collect() }
                }
            };
            sets.insert(s.name.as_str(), info);
        }
        let mut params = HashMap::new();
        for p in &ast.params {
            let dims = p
                .index_sets
                .iter()
                .map(|s| sets.get(s.as_str()).cloned().ok_or_else(|| EvalError::UnknownSet(s.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            let data = match &p.data {
                None => None,
                Some(DataLiteral::Scalar(v)) => {
                    let n: usize = dims.iter().map(|d| d.values.len()).product();
                    Some(vec![*v; n])
                }
                Some(DataLiteral::List(vs)) => {
                    let n: usize = dims.iter().map(|d| d.values.len()).product();
                    if vs.len() != n {
                        return Err(EvalError::DataLength {
                            name: p.name.clone(),
                            expected: n,
                            found: vs.len(),
                        });
                    }
                    Some(vs.clone())
                }
            };
            params.insert(p.name.as_str(), ParamInfo { dims, data });
        }
        let vars = ast.vars.iter().map(|v| (v.name.as_str(), ())).collect();
        Ok(Evaluator { ast, sets, members, params, vars })
    }

    pub fn objective(&self, values: &Assignment) -> Result<f64, EvalError> {
        let o = self.ast.objective.as_ref().ok_or(EvalError::NoObjective)?;
        self.expr(&o.expr, &mut Vec::new(), values)
    }

    /// Every constraint instance violated by more than `tol`.
    pub fn violations(&self, values: &Assignment, tol: f64) -> Result<Vec<Violation>, EvalError> {
        let mut out = Vec::new();
        for c in &self.ast.constraints {
            let bindings: Vec<Binding> =
                c.quantifier.as_ref().map(|q| q.bindings.clone()).unwrap_or_default();
            let filter = c.quantifier.as_ref().and_then(|q| q.filter.as_ref());
            let mut env = Vec::new();
            self.for_each(&bindings, filter, &mut env, values, &mut |env, this| {
                let lhs = this.expr(&c.lhs, env, values)?;
                let rhs = this.expr(&c.rhs, env, values)?;
                let ok = match c.relation {
                    Relation::Le => lhs <= rhs + tol,
                    Relation::Ge => lhs + tol >= rhs,
                    Relation::Eq => (lhs - rhs).abs() <= tol,
                };
                if !ok {
                    out.push(Violation {
                        constraint: c.name.clone(),
                        binding: env.iter().map(|(_, v)| *v).collect(),
                        lhs,
                        rhs,
                    });
                }
                Ok(())
            })?;
        }
        Ok(out)
    }

    fn for_each(
        &self,
        bindings: &[Binding],
        filter: Option<&Predicate>,
        env: &mut Vec<(String, i64)>,
        values: &Assignment,
        f: &mut dyn FnMut(&mut Vec<(String, i64)>, &Self) -> Result<(), EvalError>,
    ) -> Result<(), EvalError> {
        match bindings.split_first() {
            None => {
                if let Some(p) = filter {
                    for c in &p.clauses {
                        let a = self.expr(&c.lhs, env, values)?;
                        let b = self.expr(&c.rhs, env, values)?;
                        if !c.op.holds(a, b) {
                            return Ok(());
                        }
                    }
                }
                f(env, self)
            }
            Some((b, rest)) => {
                let set = self.sets.get(b.set.as_str()).ok_or_else(|| EvalError::UnknownSet(b.set.clone()))?;
                for &v in &set.values {
                    env.push((b.index.clone(), v));
                    self.for_each(rest, filter, env, values, f)?;
                    env.pop();
                }
                Ok(())
            }
        }
    }

    fn lookup_bound(env: &[(String, i64)], name: &str) -> Option<i64> {
        env.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    fn index_value(&self, ix: &IndexExpr, env: &[(String, i64)], values: &Assignment) -> Result<i64, EvalError> {
        let base = |n: &str| -> Result<i64, EvalError> {
            if let Some(v) = Self::lookup_bound(env, n) {
                return Ok(v);
            }
            if let Some(v) = self.members.get(n) {
                return Ok(*v);
            }
            Ok(self.symbol(n, &[], values)? as i64)
        };
        match ix {
            IndexExpr::Lit(v) => Ok(*v),
            IndexExpr::Name(n) => base(n),
            IndexExpr::Offset(n, k) => Ok(base(n)? + k),
        }
    }

    fn symbol(&self, name: &str, index: &[i64], values: &Assignment) -> Result<f64, EvalError> {
        if let Some(p) = self.params.get(name) {
            if let Some(data) = &p.data {
                if index.len() != p.dims.len() {
                    return Err(EvalError::OutOfRange { name: name.into(), index: index.to_vec() });
                }
                let mut flat = 0usize;
                for (d, &v) in p.dims.iter().zip(index) {
                    let pos = v - d.lo;
                    if pos < 0 || pos as usize >= d.values.len() {
                        return Err(EvalError::OutOfRange { name: name.into(), index: index.to_vec() });
                    }
                    flat = flat * d.values.len() + pos as usize;
                }
                return Ok(data[flat]);
            }
        }
        match values.get(name).and_then(|m| m.get(index)) {
            Some(v) => Ok(*v),
            None if self.vars.contains_key(name) => Ok(0.0),
            None => Err(EvalError::Unbound(format!("{name}{index:?}"))),
        }
    }

    fn expr(&self, e: &Expr, env: &mut Vec<(String, i64)>, values: &Assignment) -> Result<f64, EvalError> {
        Ok(match e {
            Expr::Num(v) => *v,
            Expr::Ref { name, indices } => {
                if indices.is_empty() {
                    if let Some(v) = Self::lookup_bound(env, name) {
                        return Ok(v as f64);
                    }
                }
                let index = indices
                    .iter()
                    .map(|ix| self.index_value(ix, env, values))
                    .collect::<Result<Vec<_>, _>>()?;
                self.symbol(name, &index, values)?
            }
            Expr::Neg(inner) => -self.expr(inner, env, values)?,
            Expr::Binary { op, lhs, rhs } => {
                let a = self.expr(lhs, env, values)?;
                let b = self.expr(rhs, env, values)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Sum { quantifier, body } => {
                let mut total = 0.0;
                self.for_each(&quantifier.bindings, quantifier.filter.as_ref(), env, values, &mut |env, this| {
                    total += this.expr(body, env, values)?;
                    Ok(())
                })?;
                total
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_model;
    use super::*;

    fn assign(entries: &[(&str, &[i64], f64)]) -> Assignment {
        let mut a = Assignment::new();
        for (n, ix, v) in entries {
            a.entry(n.to_string()).or_default().insert(ix.to_vec(), *v);
        }
        a
    }

    #[test]
    fn filtered_quantifier_and_offsets() {
        let ast = parse_model(
            "set T = 1..3; var y{T} binary; var B{T} integer;\
             con c{t in T : t >= 2}: y[t] <= B[t-1];",
        )
        .unwrap();
        let ev = Evaluator::new(&ast).unwrap();
        let ok = assign(&[("y", &[2], 1.0), ("B", &[1], 1.0)]);
        assert!(ev.violations(&ok, 0.0).unwrap().is_empty());
        let bad = assign(&[("y", &[3], 1.0), ("B", &[1], 1.0)]);
        let v = ev.violations(&bad, 0.0).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].binding, vec![3]);
    }

    #[test]
    fn param_data_row_major() {
        let ast = parse_model(
            "set A = 1..2; set B = {u, v, w}; param p{A, B} = [1, 2, 3, 4, 5, 6];\
             max o: p[2, v] + sum{a in A, b in B : a = 1}(p[a, b]);",
        )
        .unwrap();
        let ev = Evaluator::new(&ast).unwrap();
        assert_eq!(ev.objective(&Assignment::new()).unwrap(), 5.0 + 6.0);
    }

    #[test]
    fn offset_ranges() {
        let ast = parse_model("set S = 91..93; param b{S} = [1, 2, 4]; max o: sum{t in S}(b[t]) + b[93];").unwrap();
        let ev = Evaluator::new(&ast).unwrap();
        assert_eq!(ev.objective(&Assignment::new()).unwrap(), 11.0);
    }

    #[test]
    fn data_length_checked() {
        let ast = parse_model("set A = 1..2; param p{A} = [1];").unwrap();
        assert!(matches!(Evaluator::new(&ast), Err(EvalError::DataLength { .. })));
    }

    #[test]
    fn unbound_parameter_reported() {
        let ast = parse_model("param q; max o: q;").unwrap();
        let ev = Evaluator::new(&ast).unwrap();
        assert!(matches!(ev.objective(&Assignment::new()), Err(EvalError::Unbound(_))));
        assert_eq!(ev.objective(&assign(&[("q", &[], 2.5)])).unwrap(), 2.5);
    }
}
