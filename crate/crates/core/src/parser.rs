//! Recursive-descent parser for `.stl` specification files.
//!
//! ```text
//! spec      := decl* rule*
//! decl      := "signal" IDENT ":" ( "real" | "bool" | "enum" "{" IDENT ("," IDENT)* "}" )
//! rule      := "rule" IDENT ":" formula
//! formula   := or ( "->" formula )?
//! or        := and ( "||" and )*
//! and       := until ( "&&" until )*
//! until     := unary ( "U" interval unary )*
//! unary     := "!" unary | "G" interval? unary | "F" interval? unary | atom
//! atom      := "(" formula ")" | predicate
//! predicate := expr cmp expr | ENUM ("==" | "!=") VARIANT | BOOL ( ("==" | "!=") bool )?
//! interval  := "[" NUMBER "," ( NUMBER | "inf" ) "]"
//! expr      := term ( ("+" | "-") term )*
//! term      := factor ( ("*" | "/") factor )*
//! factor    := "-" factor | NUMBER | IDENT | "abs" "(" expr ")" | "deriv" "(" IDENT ")" | "(" expr ")"
//! ```

use std::fmt;

use thiserror::Error;

use crate::ast::{
    validate, BinOp, CmpOp, Formula, Interval, Rule, SignalDecl, SignalExpr, SignalKind,
    Specification,
};
use crate::lexer::{tokenize, Token, TokenKind};

const MAX_NESTING: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(span: SourceSpan, message: impl Into<String>, expected: Vec<String>) -> Self {
        Self { span, message: message.into(), expected }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

/// Parses and validates a complete specification.
pub fn parse_spec(source: &str) -> Result<Specification, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, pos: 0, decls: Vec::new(), depth: 0 };
    let (spec, rule_spans) = parser.spec()?;

    if let Some(diag) = validate(&spec).into_iter().next() {
        let span = diag
            .rule
            .as_ref()
            .and_then(|name| spec.rules.iter().position(|r| &r.name == name))
            .map(|idx| rule_spans[idx])
            .unwrap_or(SourceSpan { line: 1, column: 1, length: 1 });
        return Err(ParseError::new(span, diag.to_string(), vec![]));
    }
    Ok(spec)
}

/// Parses a single formula against the given declarations.
pub fn parse_formula(source: &str, declarations: &[SignalDecl]) -> Result<Formula, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, pos: 0, decls: declarations.to_vec(), depth: 0 };
    let formula = parser.formula()?;
    parser.expect(TokenKind::Eof, "end of input")?;
    Ok(formula)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    decls: Vec<SignalDecl>,
    depth: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_kind(&self) -> &TokenKind {
        &self.peek().kind
    }

    fn nth_kind(&self, n: usize) -> &TokenKind {
        let idx = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if tok.kind != TokenKind::Eof {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek_kind() == kind {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error_here(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        ParseError::new(self.peek().span, message, expected.iter().map(|s| s.to_string()).collect())
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let found = self.peek_kind().describe();
        self.error_here(format!("unexpected {found}"), expected)
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> PResult<Token> {
        if *self.peek_kind() == kind {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&[what]))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek_kind().clone() {
            TokenKind::Ident(name) => {
                let span = self.advance().span;
                Ok((name, span))
            }
            _ => Err(self.unexpected(&[what])),
        }
    }

    fn number(&mut self) -> PResult<f64> {
        match *self.peek_kind() {
            TokenKind::Number(n) => {
                self.advance();
                Ok(n)
            }
            _ => Err(self.unexpected(&["number"])),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(self.error_here("formula nesting too deep", &[]));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn declaration(&self, name: &str) -> Option<&SignalDecl> {
        self.decls.iter().find(|d| d.name == name)
    }

    fn spec(&mut self) -> PResult<(Specification, Vec<SourceSpan>)> {
        while *self.peek_kind() == TokenKind::Signal {
            self.advance();
            let (name, span) = self.ident("signal name")?;
            if self.declaration(&name).is_some() {
                return Err(ParseError::new(span, format!("duplicate signal `{name}`"), vec![]));
            }
            self.expect(TokenKind::Colon, "`:`")?;
            let decl = match self.peek_kind() {
                TokenKind::Real => {
                    self.advance();
                    SignalDecl::real(name)
                }
                TokenKind::Bool => {
                    self.advance();
                    SignalDecl::boolean(name)
                }
                TokenKind::Enum => {
                    self.advance();
                    self.expect(TokenKind::LBrace, "`{`")?;
                    let mut variants: Vec<String> = Vec::new();
                    loop {
                        let (variant, vspan) = self.ident("variant name")?;
                        if variants.contains(&variant) {
                            let msg = format!("duplicate variant `{variant}`");
                            return Err(ParseError::new(vspan, msg, vec![]));
                        }
                        variants.push(variant);
                        if !self.eat(&TokenKind::Comma) || *self.peek_kind() == TokenKind::RBrace {
                            break;
                        }
                    }
                    self.expect(TokenKind::RBrace, "`}`")?;
                    SignalDecl::enumeration(name, variants)
                }
                _ => return Err(self.unexpected(&["`real`", "`bool`", "`enum`"])),
            };
            self.decls.push(decl);
        }

        let mut rules: Vec<Rule> = Vec::new();
        let mut spans = Vec::new();
        loop {
            match self.peek_kind() {
                TokenKind::Rule => {
                    self.advance();
                }
                TokenKind::Eof => break,
                TokenKind::Signal => {
                    return Err(self.error_here("signal declarations must precede rules", &["`rule`"]));
                }
                _ => return Err(self.unexpected(&["`rule`", "end of input"])),
            }
            let (name, span) = self.ident("rule name")?;
            if rules.iter().any(|r| r.name == name) {
                return Err(ParseError::new(span, format!("duplicate rule `{name}`"), vec![]));
            }
            self.expect(TokenKind::Colon, "`:`")?;
            let formula = self.formula()?;
            rules.push(Rule { name, formula });
            spans.push(span);
        }

        let spec = Specification { declarations: std::mem::take(&mut self.decls), rules };
        Ok((spec, spans))
    }

    fn formula(&mut self) -> PResult<Formula> {
        self.enter()?;
        let lhs = self.or()?;
        let out = if self.eat(&TokenKind::Arrow) {
            let rhs = self.formula()?;
            Formula::implies(lhs, rhs)
        } else {
            lhs
        };
        self.leave();
        Ok(out)
    }

    fn or(&mut self) -> PResult<Formula> {
        let mut lhs = self.and()?;
        while self.eat(&TokenKind::OrOr) {
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Formula> {
        let mut lhs = self.until()?;
        while self.eat(&TokenKind::AndAnd) {
            let rhs = self.until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> PResult<Formula> {
        let mut lhs = self.unary()?;
        while self.eat(&TokenKind::Until) {
            if *self.peek_kind() != TokenKind::LBracket {
                return Err(self.unexpected(&["`[` (until requires an explicit interval)"]));
            }
            let start = self.peek().span;
            let interval = self.interval()?;
            if interval.hi.is_none() {
                return Err(ParseError::new(start, "until requires a bounded interval", vec!["number".into()]));
            }
            let rhs = self.unary()?;
            lhs = Formula::until(interval, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        self.enter()?;
        let out = match self.peek_kind() {
            TokenKind::Bang => {
                self.advance();
                Formula::not(self.unary()?)
            }
            TokenKind::Globally | TokenKind::Eventually => {
                let is_globally = *self.peek_kind() == TokenKind::Globally;
                self.advance();
                let interval = if *self.peek_kind() == TokenKind::LBracket {
                    self.interval()?
                } else {
                    Interval::UNBOUNDED
                };
                let arg = self.unary()?;
                if is_globally {
                    Formula::globally(interval, arg)
                } else {
                    Formula::eventually(interval, arg)
                }
            }
            _ => self.atom()?,
        };
        self.leave();
        Ok(out)
    }

    fn interval(&mut self) -> PResult<Interval> {
        let start = self.expect(TokenKind::LBracket, "`[`")?.span;
        let lo = self.number()?;
        self.expect(TokenKind::Comma, "`,`")?;
        let hi = if self.eat(&TokenKind::Inf) {
            None
        } else {
            match self.number() {
                Ok(n) => Some(n),
                Err(_) => return Err(self.unexpected(&["number", "`inf`"])),
            }
        };
        self.expect(TokenKind::RBracket, "`]`")?;
        let interval = Interval { lo, hi };
        if let Some(msg) = interval.check() {
            return Err(ParseError::new(start, msg, vec![]));
        }
        Ok(interval)
    }

    fn atom(&mut self) -> PResult<Formula> {
        if *self.peek_kind() != TokenKind::LParen {
            return self.predicate();
        }
        // `(` opens either a grouped formula or an arithmetic operand of a
        // comparison; try the comparison first and keep the deeper error.
        let (start, depth) = (self.pos, self.depth);
        let pred_err = match self.predicate() {
            Ok(f) => return Ok(f),
            Err(e) => e,
        };
        self.pos = start;
        self.depth = depth;
        self.advance();
        let grouped = self.formula().and_then(|f| {
            self.expect(TokenKind::RParen, "`)`")?;
            Ok(f)
        });
        match grouped {
            Ok(f) => Ok(f),
            Err(group_err) => {
                if (pred_err.span.line, pred_err.span.column) > (group_err.span.line, group_err.span.column) {
                    Err(pred_err)
                } else {
                    Err(group_err)
                }
            }
        }
    }

    fn predicate(&mut self) -> PResult<Formula> {
        if let TokenKind::Ident(name) = self.peek_kind().clone() {
            let is_call = *self.nth_kind(1) == TokenKind::LParen;
            match self.declaration(&name).map(|d| d.kind) {
                Some(SignalKind::Enum) => return self.enum_predicate(name),
                Some(SignalKind::Bool) => return self.bool_predicate(name),
                None if !is_call => {
                    return Err(self.error_here(format!("unknown signal `{name}`"), &[]));
                }
                _ => {}
            }
        }
        let lhs = self.expr()?;
        let op = match self.peek_kind() {
            TokenKind::Lt => CmpOp::Lt,
            TokenKind::Le => CmpOp::Le,
            TokenKind::Gt => CmpOp::Gt,
            TokenKind::Ge => CmpOp::Ge,
            _ => return Err(self.unexpected(&["`<`", "`<=`", "`>`", "`>=`"])),
        };
        self.advance();
        let rhs = self.expr()?;
        Ok(Formula::compare(lhs, op, rhs))
    }

    fn equality(&mut self) -> PResult<bool> {
        match self.peek_kind() {
            TokenKind::EqEq => {
                self.advance();
                Ok(false)
            }
            TokenKind::NotEq => {
                self.advance();
                Ok(true)
            }
            _ => Err(self.unexpected(&["`==`", "`!=`"])),
        }
    }

    fn enum_predicate(&mut self, signal: String) -> PResult<Formula> {
        self.advance();
        let negated = self.equality()?;
        let (variant, span) = self.ident("variant name")?;
        let decl = self.declaration(&signal).expect("enum signal resolved by caller");
        if decl.variant_index(&variant).is_none() {
            let msg = format!("undeclared variant `{variant}` for enum `{signal}`");
            return Err(ParseError::new(span, msg, decl.variants.clone()));
        }
        Ok(Formula::enum_eq(signal, variant, negated))
    }

    fn bool_predicate(&mut self, signal: String) -> PResult<Formula> {
        self.advance();
        if !matches!(self.peek_kind(), TokenKind::EqEq | TokenKind::NotEq) {
            return Ok(Formula::bool_is(signal, true));
        }
        let negated = self.equality()?;
        let value = match self.peek_kind() {
            TokenKind::True => true,
            TokenKind::False => false,
            _ => return Err(self.unexpected(&["`true`", "`false`"])),
        };
        self.advance();
        Ok(Formula::bool_is(signal, value != negated))
    }

    fn expr(&mut self) -> PResult<SignalExpr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.term()?;
            lhs = SignalExpr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<SignalExpr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.factor()?;
            lhs = SignalExpr::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> PResult<SignalExpr> {
        self.enter()?;
        let out = self.factor_inner();
        self.leave();
        out
    }

    fn factor_inner(&mut self) -> PResult<SignalExpr> {
        match self.peek_kind().clone() {
            TokenKind::Minus => {
                self.advance();
                if let TokenKind::Number(n) = *self.peek_kind() {
                    self.advance();
                    return Ok(SignalExpr::Constant(-n));
                }
                let inner = self.factor()?;
                Ok(SignalExpr::binary(BinOp::Sub, SignalExpr::Constant(0.0), inner))
            }
            TokenKind::Number(n) => {
                self.advance();
                Ok(SignalExpr::Constant(n))
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(inner)
            }
            TokenKind::Ident(name) if *self.nth_kind(1) == TokenKind::LParen && name == "abs" => {
                self.advance();
                self.advance();
                let inner = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(SignalExpr::abs(inner))
            }
            TokenKind::Ident(name) if *self.nth_kind(1) == TokenKind::LParen && name == "deriv" => {
                self.advance();
                self.advance();
                let (signal, span) = self.ident("signal name")?;
                self.require_real(&signal, span)?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(SignalExpr::deriv(signal))
            }
            TokenKind::Ident(name) => {
                if *self.nth_kind(1) == TokenKind::LParen {
                    return Err(self.error_here(format!("unknown function `{name}`"), &["`abs`", "`deriv`"]));
                }
                let span = self.advance().span;
                self.require_real(&name, span)?;
                Ok(SignalExpr::Signal(name))
            }
            _ => Err(self.unexpected(&["number", "signal", "`(`"])),
        }
    }

    fn require_real(&self, name: &str, span: SourceSpan) -> PResult<()> {
        match self.declaration(name) {
            None => Err(ParseError::new(span, format!("unknown signal `{name}`"), vec![])),
            Some(d) if d.kind != SignalKind::Real => Err(ParseError::new(
                span,
                format!("signal `{name}` is {}, expected real", d.kind),
                vec![],
            )),
            Some(_) => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::pretty_print;

    const MARIO: &str = "
        signal speed : real
        signal surface : enum {track, offroad}
        signal finished_lap : bool
        rule r: G[0, inf] ((surface != track) -> F[0,60] (surface == track))
    ";

    #[test]
    fn stay_on_track() {
        let spec = parse_spec(MARIO).unwrap();
        let expected = Formula::globally(
            Interval::UNBOUNDED,
            Formula::implies(
                Formula::enum_eq("surface", "track", true),
                Formula::eventually(Interval::bounded(0.0, 60.0), Formula::enum_eq("surface", "track", false)),
            ),
        );
        assert_eq!(spec.rules[0].formula, expected);
        assert_eq!(spec.declarations.len(), 3);
    }

    #[test]
    fn sharp_turn_rule() {
        let src = "signal phi : real
            rule r: G[0, inf] ((abs(deriv(phi)) > 0.2) -> F[0,50] (G[0,5] (abs(deriv(phi)) <= 0.2)))";
        let spec = parse_spec(src).unwrap();
        let rate = || SignalExpr::abs(SignalExpr::deriv("phi"));
        let expected = Formula::globally(
            Interval::UNBOUNDED,
            Formula::implies(
                Formula::compare(rate(), CmpOp::Gt, SignalExpr::Constant(0.2)),
                Formula::eventually(
                    Interval::bounded(0.0, 50.0),
                    Formula::globally(
                        Interval::bounded(0.0, 5.0),
                        Formula::compare(rate(), CmpOp::Le, SignalExpr::Constant(0.2)),
                    ),
                ),
            ),
        );
        assert_eq!(spec.rules[0].formula, expected);
    }

    fn bools() -> Vec<SignalDecl> {
        ["a", "b", "c"].into_iter().map(SignalDecl::boolean).collect()
    }

    #[test]
    fn implication_is_right_associative() {
        let f = parse_formula("a -> b -> c", &bools()).unwrap();
        let atom = |s| Formula::bool_is(s, true);
        assert_eq!(f, Formula::implies(atom("a"), Formula::implies(atom("b"), atom("c"))));
    }

    #[test]
    fn precedence_ladder() {
        let atom = |s| Formula::bool_is(s, true);
        let f = parse_formula("a || b && c", &bools()).unwrap();
        assert_eq!(f, Formula::or(atom("a"), Formula::and(atom("b"), atom("c"))));

        let f = parse_formula("a && b U[0, 2] c", &bools()).unwrap();
        let until = Formula::until(Interval::bounded(0.0, 2.0), atom("b"), atom("c"));
        assert_eq!(f, Formula::and(atom("a"), until));

        let f = parse_formula("!a U[0, 2] G b", &bools()).unwrap();
        let expected = Formula::until(
            Interval::bounded(0.0, 2.0),
            Formula::not(atom("a")),
            Formula::globally(Interval::UNBOUNDED, atom("b")),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn bool_comparisons() {
        let f = parse_formula("a == false || b != false || c != true", &bools()).unwrap();
        let expected = Formula::or(
            Formula::or(Formula::bool_is("a", false), Formula::bool_is("b", true)),
            Formula::bool_is("c", false),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn arithmetic_and_negative_constants() {
        let decls = [SignalDecl::real("x"), SignalDecl::real("y")];
        let f = parse_formula("(x + y) * 2 >= -3 - -x", &decls).unwrap();
        let text = pretty_print(&f);
        assert_eq!(text, "((x + y) * 2) >= (-3 - (0 - x))");
        assert_eq!(parse_formula(&text, &decls).unwrap(), f);
    }

    #[test]
    fn until_needs_bounded_interval() {
        let err = parse_formula("a U b", &bools()).unwrap_err();
        assert!(err.message.contains("unexpected"), "{err}");
        let err = parse_formula("a U[0, inf] b", &bools()).unwrap_err();
        assert!(err.message.contains("bounded"), "{err}");
    }

    #[test]
    fn errors_point_at_offenders() {
        let err = parse_spec("signal speed : real\nrule r: G (velocity < 3)").unwrap_err();
        assert_eq!((err.span.line, err.span.column), (2, 12));
        assert!(err.message.contains("unknown signal `velocity`"));

        let err = parse_spec("signal x : real\nrule r: F[5, 2] (x > 0)").unwrap_err();
        assert_eq!(err.message, "interval hi < lo");
        assert_eq!((err.span.line, err.span.column), (2, 10));

        let err = parse_spec("rule r: G (x > 0)\nsignal x : real").unwrap_err();
        assert!(err.message.contains("unknown signal"));

        let err = parse_spec("signal x : real\nrule r: x > 0\nsignal y : real").unwrap_err();
        assert!(err.message.contains("precede"));

        let err = parse_spec("signal s : enum {a, b}\nrule r: s == c").unwrap_err();
        assert!(err.message.contains("undeclared variant"));

        let err = parse_spec("signal x : real\nrule r: x > 0\nrule r: x < 1").unwrap_err();
        assert!(err.message.contains("duplicate rule"));
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = format!("signal a : bool\nrule r: {}a{}", "(".repeat(100_000), ")".repeat(100_000));
        assert!(parse_spec(&src).unwrap_err().message.contains("too deep"));
        let src = format!("signal a : bool\nrule r: {}a", "!".repeat(100_000));
        assert!(parse_spec(&src).is_err());
    }

    #[test]
    fn empty_source_is_empty_spec() {
        assert_eq!(parse_spec("  # nothing\n").unwrap(), Specification::default());
    }
}
