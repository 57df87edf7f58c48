use std::collections::HashSet;

use super::ast::*;
use super::lexer::{tokenize, Spanned, Tok};
use super::{ModelError, ParseError};

const KEYWORDS: &[&str] = &[
    "set", "param", "var", "con", "max", "min", "in", "sum", "and", "binary", "integer",
    "continuous",
];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Parse MiniModel source into an AST.
pub fn parse_model(source: &str) -> Result<ModelAst, ModelError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut ast = ModelAst::default();
    let mut seen: HashSet<String> = HashSet::new();

    while !parser.at(&Tok::Eof) {
        let (kw, line, col) = {
            let t = parser.peek();
            match &t.tok {
                Tok::Ident(s) => (s.clone(), t.line, t.col),
                _ => return Err(parser.unexpected(&["set", "param", "var", "con", "max", "min"]).into()),
            }
        };
        let name = match kw.as_str() {
            "set" => {
                let d = parser.set_decl()?;
                let n = d.name.clone();
                ast.sets.push(d);
                n
            }
            "param" => {
                let d = parser.param_decl()?;
                let n = d.name.clone();
                ast.params.push(d);
                n
            }
            "var" => {
                let d = parser.var_decl()?;
                let n = d.name.clone();
                ast.vars.push(d);
                n
            }
            "con" => {
                let d = parser.constraint_decl()?;
                let n = d.name.clone();
                ast.constraints.push(d);
                n
            }
            "max" | "min" => {
                let o = parser.objective()?;
                if ast.objective.is_some() {
                    return Err(ModelError::MultipleObjectives { line, col });
                }
                let n = o.name.clone();
                ast.objective = Some(o);
                n
            }
            _ => return Err(parser.unexpected(&["set", "param", "var", "con", "max", "min"]).into()),
        };
        if !seen.insert(name.clone()) {
            return Err(ModelError::DuplicateDeclaration(name));
        }
    }
    Ok(ast)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn at(&self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError {
            line: t.line,
            col: t.col,
            found: t.tok.describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.at(&tok) {
            self.advance();
            Ok(())
        } else {
            Err(self.unexpected(&[tok.symbol()]))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.at_keyword(kw) {
            self.advance();
            Ok(())
        } else {
            Err(self.unexpected(&[kw]))
        }
    }

    /// A non-keyword identifier.
    fn name(&mut self) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        match self.peek().tok {
            Tok::Number { value, is_int: true } => {
                self.advance();
                Ok(value as i64)
            }
            _ => Err(self.unexpected(&["integer"])),
        }
    }

    fn signed_number(&mut self) -> Result<f64, ParseError> {
        let negative = if self.at(&Tok::Minus) {
            self.advance();
            true
        } else {
            false
        };
        match self.peek().tok {
            Tok::Number { value, .. } => {
                self.advance();
                Ok(if negative { -value } else { value })
            }
            _ => Err(self.unexpected(&["number"])),
        }
    }

    fn set_decl(&mut self) -> Result<SetDecl, ParseError> {
        self.expect_keyword("set")?;
        let name = self.name()?;
        self.expect(Tok::Eq)?;
        let def = if self.at(&Tok::LBrace) {
            self.advance();
            let mut members = vec![self.name()?];
            while self.at(&Tok::Comma) {
                self.advance();
                members.push(self.name()?);
            }
            self.expect(Tok::RBrace)?;
            SetDef::Members(members)
        } else {
            let lo = self.integer().map_err(|_| self.unexpected(&["integer", "{"]))?;
            self.expect(Tok::DotDot)?;
            let hi = self.integer()?;
            SetDef::Range(lo, hi)
        };
        self.expect(Tok::Semi)?;
        Ok(SetDecl { name, def })
    }

    fn index_set_list(&mut self) -> Result<Vec<String>, ParseError> {
        if !self.at(&Tok::LBrace) {
            return Ok(Vec::new());
        }
        self.advance();
        let mut sets = vec![self.name()?];
        while self.at(&Tok::Comma) {
            self.advance();
            sets.push(self.name()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(sets)
    }

    fn param_decl(&mut self) -> Result<ParamDecl, ParseError> {
        self.expect_keyword("param")?;
        let name = self.name()?;
        let index_sets = self.index_set_list()?;
        let data = if self.at(&Tok::Eq) {
            self.advance();
            if self.at(&Tok::LBracket) {
                self.advance();
                let mut values = vec![self.signed_number()?];
                while self.at(&Tok::Comma) {
                    self.advance();
                    values.push(self.signed_number()?);
                }
                self.expect(Tok::RBracket)?;
                Some(DataLiteral::List(values))
            } else {
                Some(DataLiteral::Scalar(
                    self.signed_number().map_err(|_| self.unexpected(&["number", "["]))?,
                ))
            }
        } else {
            None
        };
        if !self.at(&Tok::Semi) {
            let expected: &[&str] = if data.is_some() { &[";"] } else { &["=", ";"] };
            return Err(self.unexpected(expected));
        }
        self.advance();
        Ok(ParamDecl { name, index_sets, data })
    }

    fn var_decl(&mut self) -> Result<VarDecl, ParseError> {
        self.expect_keyword("var")?;
        let name = self.name()?;
        let index_sets = self.index_set_list()?;
        let domain = match &self.peek().tok {
            Tok::Ident(s) => VarDomain::parse(s),
            _ => None,
        }
        .ok_or_else(|| self.unexpected(&["binary", "integer", "continuous"]))?;
        self.advance();
        let bounds = if self.at_keyword("in") {
            self.advance();
            self.expect(Tok::LBracket)?;
            let lo = self.signed_number()?;
            self.expect(Tok::Comma)?;
            let hi = self.signed_number()?;
            self.expect(Tok::RBracket)?;
            Some((lo, hi))
        } else {
            None
        };
        if !self.at(&Tok::Semi) {
            let expected: &[&str] = if bounds.is_some() { &[";"] } else { &["in", ";"] };
            return Err(self.unexpected(expected));
        }
        self.advance();
        Ok(VarDecl { name, index_sets, domain, bounds })
    }

    fn quantifier(&mut self) -> Result<Quantifier, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut bindings = vec![self.binding()?];
        while self.at(&Tok::Comma) {
            self.advance();
            bindings.push(self.binding()?);
        }
        let filter = if self.at(&Tok::Colon) {
            self.advance();
            Some(self.predicate()?)
        } else {
            None
        };
        if !self.at(&Tok::RBrace) {
            let expected: &[&str] = if filter.is_some() { &["and", "}"] } else { &[",", ":", "}"] };
            return Err(self.unexpected(expected));
        }
        self.advance();
        Ok(Quantifier { bindings, filter })
    }

    fn binding(&mut self) -> Result<Binding, ParseError> {
        let index = self.name()?;
        self.expect_keyword("in")?;
        let set = self.name()?;
        Ok(Binding { index, set })
    }

    fn predicate(&mut self) -> Result<Predicate, ParseError> {
        let mut clauses = vec![self.comparison()?];
        while self.at_keyword("and") {
            self.advance();
            clauses.push(self.comparison()?);
        }
        Ok(Predicate { clauses })
    }

    fn comparison(&mut self) -> Result<Comparison, ParseError> {
        let lhs = self.expr()?;
        let op = match self.peek().tok {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            _ => return Err(self.unexpected(&["<", "<=", ">", ">=", "=", "<>"])),
        };
        self.advance();
        let rhs = self.expr()?;
        Ok(Comparison { lhs, op, rhs })
    }

    fn constraint_decl(&mut self) -> Result<ConstraintDecl, ParseError> {
        self.expect_keyword("con")?;
        let name = self.name()?;
        let quantifier = if self.at(&Tok::LBrace) { Some(self.quantifier()?) } else { None };
        if !self.at(&Tok::Colon) {
            let expected: &[&str] = if quantifier.is_some() { &[":"] } else { &["{", ":"] };
            return Err(self.unexpected(expected));
        }
        self.advance();
        let lhs = self.expr()?;
        let relation = match self.peek().tok {
            Tok::Le => Relation::Le,
            Tok::Eq => Relation::Eq,
            Tok::Ge => Relation::Ge,
            _ => return Err(self.unexpected(&["+", "-", "*", "/", "<=", "=", ">="])),
        };
        self.advance();
        let rhs = self.expr()?;
        if !self.at(&Tok::Semi) {
            return Err(self.unexpected(&["+", "-", "*", "/", ";"]));
        }
        self.advance();
        Ok(ConstraintDecl { name, quantifier, lhs, relation, rhs })
    }

    fn objective(&mut self) -> Result<Objective, ParseError> {
        let sense = if self.at_keyword("max") { Sense::Max } else { Sense::Min };
        self.advance();
        let name = self.name()?;
        self.expect(Tok::Colon)?;
        let expr = self.expr()?;
        if !self.at(&Tok::Semi) {
            return Err(self.unexpected(&["+", "-", "*", "/", ";"]));
        }
        self.advance();
        Ok(Objective { name, sense, expr })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.at(&Tok::Minus) {
            self.advance();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().tok.clone() {
            Tok::Number { value, .. } => {
                self.advance();
                Ok(Expr::Num(value))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if s == "sum" => {
                self.advance();
                let quantifier = self.quantifier()?;
                self.expect(Tok::LParen)?;
                let body = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Sum { quantifier, body: Box::new(body) })
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.advance();
                let mut indices = Vec::new();
                if self.at(&Tok::LBracket) {
                    self.advance();
                    indices.push(self.index()?);
                    while self.at(&Tok::Comma) {
                        self.advance();
                        indices.push(self.index()?);
                    }
                    self.expect(Tok::RBracket)?;
                }
                Ok(Expr::Ref { name: s, indices })
            }
            _ => Err(self.unexpected(&["number", "identifier", "(", "-", "sum"])),
        }
    }

    fn index(&mut self) -> Result<IndexExpr, ParseError> {
        match self.peek().tok.clone() {
            Tok::Number { value, is_int: true } => {
                self.advance();
                Ok(IndexExpr::Lit(value as i64))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.advance();
                let sign = match self.peek().tok {
                    Tok::Plus => 1,
                    Tok::Minus => -1,
                    _ => return Ok(IndexExpr::Name(s)),
                };
                // only `name +/- integer` is allowed inside brackets
                if !matches!(self.peek_at(1), Tok::Number { is_int: true, .. }) {
                    self.advance();
                    return Err(self.unexpected(&["integer"]));
                }
                self.advance();
                let k = self.integer()?;
                Ok(IndexExpr::Offset(s, sign * k))
            }
            _ => Err(self.unexpected(&["integer", "identifier"])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_model() {
        let ast = parse_model("set T = 1..2; var y{T} binary; max obj: y[1];").unwrap();
        assert_eq!(ast.sets.len(), 1);
        assert_eq!(ast.vars.len(), 1);
        assert_eq!(ast.vars[0].domain, VarDomain::Binary);
        assert_eq!(ast.vars[0].index_sets.len(), 1);
        assert_eq!(ast.objective.as_ref().unwrap().sense, Sense::Max);
    }

    #[test]
    fn starvation_pattern_filter() {
        let ast = parse_model("con c{t in T : t >= 2}: y[t] <= B13[t-1];").unwrap();
        let c = &ast.constraints[0];
        let q = c.quantifier.as_ref().unwrap();
        assert_eq!(q.bindings, vec![Binding::new("t", "T")]);
        let filter = q.filter.as_ref().unwrap();
        assert_eq!(
            filter.clauses,
            vec![Comparison { lhs: Expr::scalar("t"), op: CmpOp::Ge, rhs: Expr::Num(2.0) }]
        );
        assert_eq!(
            c.rhs,
            Expr::indexed("B13", vec![IndexExpr::Offset("t".into(), -1)])
        );
    }

    #[test]
    fn duplicate_declaration() {
        let err = parse_model("var y binary; var y binary; min obj: y;").unwrap_err();
        assert_eq!(err, ModelError::DuplicateDeclaration("y".into()));
    }

    #[test]
    fn second_objective_rejected() {
        let err = parse_model("max a: 1; min b: 2;").unwrap_err();
        assert!(matches!(err, ModelError::MultipleObjectives { line: 1, col: 11 }));
    }

    #[test]
    fn error_carries_position_and_expected_set() {
        let err = parse_model("set T = 1..2;\nvar y{T} bool;").unwrap_err();
        let ModelError::Parse(p) = err else { panic!("{err:?}") };
        assert_eq!((p.line, p.col), (2, 10));
        assert_eq!(p.expected, vec!["binary", "integer", "continuous"]);
    }

    #[test]
    fn rich_index_arithmetic_rejected() {
        assert!(parse_model("con c: y[t*2] <= 1;").is_err());
        assert!(parse_model("con c: y[t-s] <= 1;").is_err());
        assert!(parse_model("con c: y[1.5] <= 1;").is_err());
    }

    #[test]
    fn data_and_bounds() {
        let ast = parse_model("param p{T} = [1, -2.5, 3]; param q = -4; var x continuous in [-1, 10];")
            .unwrap();
        assert_eq!(ast.params[0].data, Some(DataLiteral::List(vec![1.0, -2.5, 3.0])));
        assert_eq!(ast.params[1].data, Some(DataLiteral::Scalar(-4.0)));
        assert_eq!(ast.vars[0].bounds, Some((-1.0, 10.0)));
    }

    #[test]
    fn precedence_and_sum() {
        let ast = parse_model("max o: 1 + 2 * sum{t in T : t >= 2 and t <= 3}(y[t]) - -x;").unwrap();
        let Expr::Binary { op: BinOp::Sub, lhs, rhs } = &ast.objective.as_ref().unwrap().expr else {
            panic!()
        };
        assert_eq!(**rhs, Expr::Neg(Box::new(Expr::scalar("x"))));
        let Expr::Binary { op: BinOp::Add, rhs: prod, .. } = &**lhs else { panic!() };
        let Expr::Binary { op: BinOp::Mul, rhs: sum, .. } = &**prod else { panic!() };
        let Expr::Sum { quantifier, .. } = &**sum else { panic!() };
        assert_eq!(quantifier.filter.as_ref().unwrap().clauses.len(), 2);
    }

    #[test]
    fn member_sets() {
        let ast = parse_model("set M = {m11, m12, m01};").unwrap();
        assert_eq!(
            ast.sets[0].def,
            SetDef::Members(vec!["m11".into(), "m12".into(), "m01".into()])
        );
    }

    #[test]
    fn empty_source() {
        assert!(parse_model("").unwrap().is_empty());
        assert!(parse_model("  ! only a comment\n").unwrap().is_empty());
    }
}
