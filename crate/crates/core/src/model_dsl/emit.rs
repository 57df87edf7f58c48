use std::fmt::Write as _;

use super::ast::*;
use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dialect {
    /// MiniModel itself; re-parses to the same AST.
    #[default]
    Canonical,
    /// LINGO-style rendering (`@for`, `@sum`, `#ge#`). Emission only.
    LingoFlavored,
}

impl std::str::FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "canonical" | "minimodel" => Ok(Dialect::Canonical),
            "lingo" | "lingo_flavored" | "lingo-flavored" => Ok(Dialect::LingoFlavored),
            other => Err(format!("unknown dialect `{other}` (expected canonical or lingo)")),
        }
    }
}

/// Render a model. Statement order is sets, params, vars, constraints,
/// objective, each in declaration order.
pub fn emit_model(ast: &ModelAst, dialect: Dialect) -> Result<String, ModelError> {
    match dialect {
        Dialect::Canonical => Canonical.model(ast),
        Dialect::LingoFlavored => Lingo.model(ast),
    }
}

/// Canonical text of a single constraint statement.
pub fn emit_constraint(c: &ConstraintDecl) -> Result<String, ModelError> {
    let mut out = String::new();
    Canonical.constraint(&mut out, c)?;
    Ok(out.trim_end().to_string())
}

/// Canonical text of an objective statement.
pub fn emit_objective(o: &Objective) -> Result<String, ModelError> {
    let mut out = String::new();
    Canonical.objective(&mut out, o)?;
    Ok(out.trim_end().to_string())
}

pub fn emit_expr(e: &Expr) -> Result<String, ModelError> {
    let mut out = String::new();
    Canonical.expr(&mut out, e, 0)?;
    Ok(out)
}

fn number(v: f64) -> Result<String, ModelError> {
    if !v.is_finite() {
        return Err(ModelError::UnsupportedConstruct(format!("non-finite number {v}")));
    }
    Ok(format!("{v}"))
}

fn expr_precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary { op, .. } => op.precedence(),
        Expr::Neg(_) => 3,
        Expr::Num(v) if *v < 0.0 => 0,
        _ => 4,
    }
}

/// Shared expression printer; dialects differ in index brackets, sums and
/// comparison operators.
trait Printer {
    fn index_open(&self) -> char;
    fn index_close(&self) -> char;
    fn sum(&self, out: &mut String, q: &Quantifier, body: &Expr) -> Result<(), ModelError>;

    fn expr(&self, out: &mut String, e: &Expr, parent: u8) -> Result<(), ModelError> {
        let mine = expr_precedence(e);
        let wrap = mine < parent;
        if wrap {
            out.push('(');
        }
        match e {
            Expr::Num(v) => out.push_str(&number(*v)?),
            Expr::Ref { name, indices } => {
                out.push_str(name);
                if !indices.is_empty() {
                    out.push(self.index_open());
                    for (i, ix) in indices.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        match ix {
                            IndexExpr::Lit(v) => write!(out, "{v}").unwrap(),
                            IndexExpr::Name(n) => out.push_str(n),
                            IndexExpr::Offset(n, k) if *k < 0 => write!(out, "{n}-{}", -k).unwrap(),
                            IndexExpr::Offset(n, k) => write!(out, "{n}+{k}").unwrap(),
                        }
                    }
                    out.push(self.index_close());
                }
            }
            Expr::Neg(inner) => {
                out.push('-');
                self.expr(out, inner, 3)?;
            }
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                self.expr(out, lhs, p)?;
                match op {
                    BinOp::Add | BinOp::Sub => write!(out, " {} ", op.symbol()).unwrap(),
                    _ => out.push_str(op.symbol()),
                }
                // right operand of equal precedence needs parentheses to keep
                // the tree shape under left associativity
                self.expr(out, rhs, p + 1)?;
            }
            Expr::Sum { quantifier, body } => self.sum(out, quantifier, body)?,
        }
        if wrap {
            out.push(')');
        }
        Ok(())
    }
}

struct Canonical;

impl Printer for Canonical {
    fn index_open(&self) -> char {
        '['
    }

    fn index_close(&self) -> char {
        ']'
    }

    fn sum(&self, out: &mut String, q: &Quantifier, body: &Expr) -> Result<(), ModelError> {
        out.push_str("sum");
        self.quantifier(out, q)?;
        out.push('(');
        self.expr(out, body, 0)?;
        out.push(')');
        Ok(())
    }
}

impl Canonical {
    fn quantifier(&self, out: &mut String, q: &Quantifier) -> Result<(), ModelError> {
        out.push('{');
        for (i, b) in q.bindings.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write!(out, "{} in {}", b.index, b.set).unwrap();
        }
        if let Some(f) = &q.filter {
            out.push_str(" : ");
            for (i, c) in f.clauses.iter().enumerate() {
                if i > 0 {
                    out.push_str(" and ");
                }
                self.expr(out, &c.lhs, 0)?;
                write!(out, " {} ", c.op.canonical()).unwrap();
                self.expr(out, &c.rhs, 0)?;
            }
        }
        out.push('}');
        Ok(())
    }

    fn model(&self, ast: &ModelAst) -> Result<String, ModelError> {
        let mut out = String::new();
        for s in &ast.sets {
            match &s.def {
                SetDef::Range(lo, hi) => writeln!(out, "set {} = {lo}..{hi};", s.name).unwrap(),
                SetDef::Members(m) => writeln!(out, "set {} = {{{}}};", s.name, m.join(", ")).unwrap(),
            }
        }
        for p in &ast.params {
            write!(out, "param {}", p.name).unwrap();
            index_sets(&mut out, &p.index_sets);
            match &p.data {
                None => {}
                Some(DataLiteral::Scalar(v)) => write!(out, " = {}", number(*v)?).unwrap(),
                Some(DataLiteral::List(vs)) => {
                    let items = vs.iter().map(|v| number(*v)).collect::<Result<Vec<_>, _>>()?;
                    write!(out, " = [{}]", items.join(", ")).unwrap();
                }
            }
            out.push_str(";\n");
        }
        for v in &ast.vars {
            write!(out, "var {}", v.name).unwrap();
            index_sets(&mut out, &v.index_sets);
            write!(out, " {}", v.domain).unwrap();
            if let Some((lo, hi)) = v.bounds {
                write!(out, " in [{}, {}]", number(lo)?, number(hi)?).unwrap();
            }
            out.push_str(";\n");
        }
        for c in &ast.constraints {
            self.constraint(&mut out, c)?;
        }
        if let Some(o) = &ast.objective {
            self.objective(&mut out, o)?;
        }
        Ok(out)
    }

    fn constraint(&self, out: &mut String, c: &ConstraintDecl) -> Result<(), ModelError> {
        write!(out, "con {}", c.name).unwrap();
        if let Some(q) = &c.quantifier {
            self.quantifier(out, q)?;
        }
        out.push_str(": ");
        self.expr(out, &c.lhs, 0)?;
        write!(out, " {} ", c.relation.as_str()).unwrap();
        self.expr(out, &c.rhs, 0)?;
        out.push_str(";\n");
        Ok(())
    }

    fn objective(&self, out: &mut String, o: &Objective) -> Result<(), ModelError> {
        write!(out, "{} {}: ", o.sense.as_str(), o.name).unwrap();
        self.expr(out, &o.expr, 0)?;
        out.push_str(";\n");
        Ok(())
    }
}

fn index_sets(out: &mut String, sets: &[String]) {
    if !sets.is_empty() {
        write!(out, "{{{}}}", sets.join(", ")).unwrap();
    }
}

struct Lingo;

impl Printer for Lingo {
    fn index_open(&self) -> char {
        '('
    }

    fn index_close(&self) -> char {
        ')'
    }

    fn sum(&self, out: &mut String, q: &Quantifier, body: &Expr) -> Result<(), ModelError> {
        self.nest(out, "@sum", q, &mut |out| self.expr(out, body, 0))
    }
}

impl Lingo {
    fn predicate(&self, out: &mut String, p: &Predicate) -> Result<(), ModelError> {
        let several = p.clauses.len() > 1;
        for (i, c) in p.clauses.iter().enumerate() {
            if i > 0 {
                out.push_str("#and#");
            }
            if several {
                out.push('(');
            }
            self.expr(out, &c.lhs, 0)?;
            out.push_str(c.op.lingo());
            self.expr(out, &c.rhs, 0)?;
            if several {
                out.push(')');
            }
        }
        Ok(())
    }

    /// `@fn(S1(i): @fn(S2(j)|filter: body))`; the filter sits on the innermost level.
    fn nest(
        &self,
        out: &mut String,
        func: &str,
        q: &Quantifier,
        body: &mut dyn FnMut(&mut String) -> Result<(), ModelError>,
    ) -> Result<(), ModelError> {
        let n = q.bindings.len();
        for (i, b) in q.bindings.iter().enumerate() {
            write!(out, "{func}({}({})", b.set, b.index).unwrap();
            if i + 1 == n {
                if let Some(f) = &q.filter {
                    out.push('|');
                    self.predicate(out, f)?;
                }
            }
            out.push_str(": ");
        }
        body(out)?;
        for _ in 0..n {
            out.push(')');
        }
        Ok(())
    }

    fn model(&self, ast: &ModelAst) -> Result<String, ModelError> {
        let mut out = String::new();
        if !ast.sets.is_empty() {
            out.push_str("SETS:\n");
            for s in &ast.sets {
                match &s.def {
                    SetDef::Range(lo, hi) => {
                        if *lo < 1 {
                            return Err(ModelError::UnsupportedConstruct(format!(
                                "set {} starts at {lo}; LINGO numeric sets start at 1",
                                s.name
                            )));
                        }
                        writeln!(out, "  {} /{lo}..{hi}/;", s.name).unwrap();
                    }
                    SetDef::Members(m) => writeln!(out, "  {} /{}/;", s.name, m.join(" ")).unwrap(),
                }
            }
            out.push_str("ENDSETS\n");
        }
        let with_data: Vec<&ParamDecl> = ast.params.iter().filter(|p| p.data.is_some()).collect();
        for p in ast.params.iter().filter(|p| p.data.is_none()) {
            write!(out, "! param {}", p.name).unwrap();
            index_sets(&mut out, &p.index_sets);
            out.push_str(" supplied externally;\n");
        }
        if !with_data.is_empty() {
            out.push_str("DATA:\n");
            for p in with_data {
                match p.data.as_ref().unwrap() {
                    DataLiteral::Scalar(v) => writeln!(out, "  {} = {};", p.name, number(*v)?).unwrap(),
                    DataLiteral::List(vs) => {
                        let items = vs.iter().map(|v| number(*v)).collect::<Result<Vec<_>, _>>()?;
                        writeln!(out, "  {} = {};", p.name, items.join(" ")).unwrap();
                    }
                }
            }
            out.push_str("ENDDATA\n");
        }
        for v in &ast.vars {
            let dummies: Vec<String> = (0..v.index_sets.len()).map(dummy).collect();
            let target = if dummies.is_empty() {
                v.name.clone()
            } else {
                format!("{}({})", v.name, dummies.join(","))
            };
            let mut stmts = Vec::new();
            match v.domain {
                VarDomain::Binary => stmts.push(format!("@BIN({target})")),
                VarDomain::Integer => stmts.push(format!("@GIN({target})")),
                VarDomain::Continuous => {}
            }
            if let Some((lo, hi)) = v.bounds {
                stmts.push(format!("@BND({}, {target}, {})", number(lo)?, number(hi)?));
            } else if v.domain == VarDomain::Continuous {
                stmts.push(format!("@FREE({target})"));
            }
            for stmt in stmts {
                let q = Quantifier {
                    bindings: v
                        .index_sets
                        .iter()
                        .zip(&dummies)
                        .map(|(s, d)| Binding::new(d.clone(), s.clone()))
                        .collect(),
                    filter: None,
                };
                self.nest(&mut out, "@for", &q, &mut |out| {
                    out.push_str(&stmt);
                    Ok(())
                })?;
                out.push_str(";\n");
            }
        }
        for c in &ast.constraints {
            writeln!(out, "! {};", c.name).unwrap();
            let mut body = |out: &mut String| -> Result<(), ModelError> {
                self.expr(out, &c.lhs, 0)?;
                write!(out, " {} ", c.relation.as_str()).unwrap();
                self.expr(out, &c.rhs, 0)
            };
            match &c.quantifier {
                Some(q) => self.nest(&mut out, "@for", q, &mut body)?,
                None => body(&mut out)?,
            }
            out.push_str(";\n");
        }
        if let Some(o) = &ast.objective {
            write!(out, "{} = ", o.sense.as_str()).unwrap();
            self.expr(&mut out, &o.expr, 0)?;
            out.push_str(";\n");
        }
        Ok(out)
    }
}

fn dummy(i: usize) -> String {
    const NAMES: [&str; 4] = ["i", "j", "k", "l"];
    NAMES.get(i).map(|s| s.to_string()).unwrap_or_else(|| format!("i{}", i + 1))
}

#[cfg(test)]
mod tests {
    use super::super::parse_model;
    use super::*;

    const LISTING6: &str = "set T = 1..4;\nvar y{T} binary;\nvar B13{T} integer in [0, 5];\n\
                            con c{i in T : i >= 2}: y[i] <= B13[i-1];\n";

    #[test]
    fn canonical_round_trip_listing6() {
        let ast = parse_model(LISTING6).unwrap();
        let text = emit_model(&ast, Dialect::Canonical).unwrap();
        assert_eq!(parse_model(&text).unwrap(), ast);
        assert_eq!(text, LISTING6);
    }

    #[test]
    fn lingo_quantified_constraint() {
        let ast = parse_model(LISTING6).unwrap();
        let text = emit_model(&ast, Dialect::LingoFlavored).unwrap();
        assert!(text.contains("@for(T(i)|i#ge#2: y(i) <= B13(i-1));"), "{text}");
        assert!(text.contains("@for(T(i): @BIN(y(i)));"));
        assert!(text.contains("@for(T(i): @GIN(B13(i)));"));
        assert!(text.contains("@for(T(i): @BND(0, B13(i), 5));"));
    }

    #[test]
    fn lingo_objective_form() {
        let ast = parse_model("max obj: 5*x;").unwrap();
        let text = emit_model(&ast, Dialect::LingoFlavored).unwrap();
        assert!(text.starts_with("max = 5*x"), "{text}");
    }

    #[test]
    fn lingo_sum_with_window() {
        let ast = parse_model("con h: sum{t in T : t > 90 and t <= 96}(y[t]*P) >= 1;").unwrap();
        let text = emit_model(&ast, Dialect::LingoFlavored).unwrap();
        assert!(text.contains("@sum(T(t)|(t#gt#90)#and#(t#le#96): y(t)*P) >= 1;"), "{text}");
    }

    #[test]
    fn lingo_rejects_zero_based_range() {
        let ast = parse_model("set T = 0..3;").unwrap();
        assert!(matches!(
            emit_model(&ast, Dialect::LingoFlavored),
            Err(ModelError::UnsupportedConstruct(_))
        ));
        assert!(emit_model(&ast, Dialect::Canonical).is_ok());
    }

    #[test]
    fn parenthesization_preserves_shape() {
        for src in [
            "max o: a - (b - c);",
            "max o: a/(b*c);",
            "max o: -(a + b)*c;",
            "max o: a - -b;",
            "max o: --a;",
            "max o: (a + b)*(c - d)/2;",
        ] {
            let ast = parse_model(src).unwrap();
            let text = emit_model(&ast, Dialect::Canonical).unwrap();
            assert_eq!(parse_model(&text).unwrap(), ast, "{src} -> {text}");
        }
    }

    #[test]
    fn deterministic() {
        let ast = parse_model(LISTING6).unwrap();
        assert_eq!(
            emit_model(&ast, Dialect::LingoFlavored).unwrap(),
            emit_model(&parse_model(LISTING6).unwrap(), Dialect::LingoFlavored).unwrap()
        );
    }

    #[test]
    fn random_models_round_trip() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let ast = crate::synth::random_model(&mut rng);
            let text = emit_model(&ast, Dialect::Canonical).unwrap();
            let back = parse_model(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
            assert_eq!(back, ast, "{text}");
            assert_eq!(emit_model(&back, Dialect::Canonical).unwrap(), text);
        }
    }
}
