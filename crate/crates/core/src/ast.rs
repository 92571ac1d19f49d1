//! Formula representation shared by the parser and the robustness engine.
//!
//! A [`Specification`] is a list of signal declarations followed by named
//! rules. Interval bounds are stored in the trace's time unit; the engine
//! converts them to sample offsets.

use std::collections::HashSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalKind {
    Real,
    Bool,
    Enum,
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignalKind::Real => "real",
            SignalKind::Bool => "bool",
            SignalKind::Enum => "enum",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalDecl {
    pub name: String,
    pub kind: SignalKind,
    /// Declared variants, in order. Empty unless `kind` is [`SignalKind::Enum`].
    pub variants: Vec<String>,
}

impl SignalDecl {
    pub fn real(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: SignalKind::Real, variants: Vec::new() }
    }

    pub fn boolean(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: SignalKind::Bool, variants: Vec::new() }
    }

    pub fn enumeration<I, S>(name: impl Into<String>, variants: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            name: name.into(),
            kind: SignalKind::Enum,
            variants: variants.into_iter().map(Into::into).collect(),
        }
    }

    pub fn variant_index(&self, variant: &str) -> Option<usize> {
        self.variants.iter().position(|v| v == variant)
    }
}

/// Closed time interval `[lo, hi]`; `hi = None` is the unbounded `inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: Option<f64>,
}

impl Interval {
    pub const UNBOUNDED: Interval = Interval { lo: 0.0, hi: None };

    pub fn bounded(lo: f64, hi: f64) -> Self {
        Self { lo, hi: Some(hi) }
    }

    pub fn from(lo: f64) -> Self {
        Self { lo, hi: None }
    }

    /// Describes the first broken invariant, if any.
    pub fn check(&self) -> Option<&'static str> {
        if !self.lo.is_finite() {
            return Some("interval lo is not finite");
        }
        if self.lo < 0.0 {
            return Some("interval lo < 0");
        }
        match self.hi {
            Some(hi) if !hi.is_finite() => Some("interval hi is not finite (use `inf`)"),
            Some(hi) if hi < self.lo => Some("interval hi < lo"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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
}

/// Real-valued expression over trace signals.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalExpr {
    Signal(String),
    Constant(f64),
    Abs(Box<SignalExpr>),
    /// Backward difference of a real signal.
    Deriv(String),
    Binary(BinOp, Box<SignalExpr>, Box<SignalExpr>),
}

impl SignalExpr {
    pub fn signal(name: impl Into<String>) -> Self {
        SignalExpr::Signal(name.into())
    }

    pub fn abs(inner: SignalExpr) -> Self {
        SignalExpr::Abs(Box::new(inner))
    }

    pub fn deriv(name: impl Into<String>) -> Self {
        SignalExpr::Deriv(name.into())
    }

    pub fn binary(op: BinOp, lhs: SignalExpr, rhs: SignalExpr) -> Self {
        SignalExpr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Signal names referenced anywhere in the expression.
    pub fn signals(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_signals(&mut out);
        out
    }

    fn collect_signals<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            SignalExpr::Signal(name) | SignalExpr::Deriv(name) => out.push(name),
            SignalExpr::Constant(_) => {}
            SignalExpr::Abs(inner) => inner.collect_signals(out),
            SignalExpr::Binary(_, lhs, rhs) => {
                lhs.collect_signals(out);
                rhs.collect_signals(out);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Compare { lhs: SignalExpr, op: CmpOp, rhs: SignalExpr },
    EnumEq { signal: String, variant: String, negated: bool },
    BoolIs { signal: String, expected: bool },
}

impl Predicate {
    /// Signals read by the predicate.
    pub fn signals(&self) -> Vec<&str> {
        match self {
            Predicate::Compare { lhs, rhs, .. } => {
                let mut out = lhs.signals();
                out.extend(rhs.signals());
                out
            }
            Predicate::EnumEq { signal, .. } | Predicate::BoolIs { signal, .. } => vec![signal],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(Predicate),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Globally(Interval, Box<Formula>),
    Eventually(Interval, Box<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn compare(lhs: SignalExpr, op: CmpOp, rhs: SignalExpr) -> Self {
        Formula::Atom(Predicate::Compare { lhs, op, rhs })
    }

    pub fn enum_eq(signal: impl Into<String>, variant: impl Into<String>, negated: bool) -> Self {
        Formula::Atom(Predicate::EnumEq { signal: signal.into(), variant: variant.into(), negated })
    }

    pub fn bool_is(signal: impl Into<String>, expected: bool) -> Self {
        Formula::Atom(Predicate::BoolIs { signal: signal.into(), expected })
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Self {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Self {
        Formula::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn globally(interval: Interval, f: Formula) -> Self {
        Formula::Globally(interval, Box::new(f))
    }

    pub fn eventually(interval: Interval, f: Formula) -> Self {
        Formula::Eventually(interval, Box::new(f))
    }

    pub fn until(interval: Interval, lhs: Formula, rhs: Formula) -> Self {
        Formula::Until(interval, Box::new(lhs), Box::new(rhs))
    }

    /// Direct subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) => vec![],
            Formula::Not(f) | Formula::Globally(_, f) | Formula::Eventually(_, f) => vec![f],
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Until(_, l, r) => {
                vec![l, r]
            }
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().into_iter().map(Formula::node_count).sum::<usize>()
    }

    /// Depth of the tree; an atom has depth 1.
    pub fn depth(&self) -> usize {
        1 + self.children().into_iter().map(Formula::depth).max().unwrap_or(0)
    }

    pub fn is_unary(&self) -> bool {
        matches!(self, Formula::Not(_) | Formula::Globally(..) | Formula::Eventually(..))
    }
}

/// Position of a node inside a formula, as child indices from the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn child(&self, index: usize) -> Self {
        let mut steps = self.0.clone();
        steps.push(index);
        Self(steps)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("$")?;
        for step in &self.0 {
            write!(f, ".{step}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub name: String,
    pub formula: Formula,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Specification {
    pub declarations: Vec<SignalDecl>,
    pub rules: Vec<Rule>,
}

impl Specification {
    pub fn declaration(&self, name: &str) -> Option<&SignalDecl> {
        self.declarations.iter().find(|d| d.name == name)
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// `None` for problems in the declaration section.
    pub rule: Option<String>,
    pub path: NodePath,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rule {
            Some(rule) => write!(f, "rule `{rule}` at {}: {}", self.path, self.message),
            None => write!(f, "declarations: {}", self.message),
        }
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Checks every structural and kind rule. Returns diagnostics in declaration
/// order, then rule order, then pre-order within each formula.
pub fn validate(spec: &Specification) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut decl_error = |message: String| {
        out.push(Diagnostic { rule: None, path: NodePath::root(), message });
    };

    let mut seen = HashSet::new();
    for decl in &spec.declarations {
        if !is_identifier(&decl.name) {
            decl_error(format!("invalid signal name `{}`", decl.name));
        }
        if !seen.insert(decl.name.as_str()) {
            decl_error(format!("duplicate signal `{}`", decl.name));
        }
        match decl.kind {
            SignalKind::Enum => {
                if decl.variants.is_empty() {
                    decl_error(format!("enum signal `{}` has no variants", decl.name));
                }
                let mut variants = HashSet::new();
                for v in &decl.variants {
                    if !variants.insert(v.as_str()) {
                        decl_error(format!("duplicate variant `{v}` in enum `{}`", decl.name));
                    }
                }
            }
            _ if !decl.variants.is_empty() => {
                decl_error(format!("{} signal `{}` cannot have variants", decl.kind, decl.name));
            }
            _ => {}
        }
    }

    let mut rule_names = HashSet::new();
    for rule in &spec.rules {
        if !is_identifier(&rule.name) {
            out.push(Diagnostic {
                rule: Some(rule.name.clone()),
                path: NodePath::root(),
                message: "invalid rule name".into(),
            });
        }
        if !rule_names.insert(rule.name.as_str()) {
            out.push(Diagnostic {
                rule: Some(rule.name.clone()),
                path: NodePath::root(),
                message: format!("duplicate rule `{}`", rule.name),
            });
        }
        let mut checker = Checker { spec, rule: &rule.name, out: &mut out };
        checker.formula(&rule.formula, NodePath::root());
    }
    out
}

struct Checker<'a> {
    spec: &'a Specification,
    rule: &'a str,
    out: &'a mut Vec<Diagnostic>,
}

impl Checker<'_> {
    fn report(&mut self, path: &NodePath, message: String) {
        self.out.push(Diagnostic { rule: Some(self.rule.to_string()), path: path.clone(), message });
    }

    fn expect_kind(&mut self, path: &NodePath, name: &str, kind: SignalKind) -> Option<&SignalDecl> {
        match self.spec.declaration(name) {
            None => {
                self.report(path, format!("unknown signal `{name}`"));
                None
            }
            Some(decl) if decl.kind != kind => {
                let found = decl.kind;
                self.report(path, format!("signal `{name}` is {found}, expected {kind}"));
                None
            }
            Some(decl) => Some(decl),
        }
    }

    fn formula(&mut self, f: &Formula, path: NodePath) {
        match f {
            Formula::Atom(p) => self.predicate(p, &path),
            Formula::Globally(i, _) | Formula::Eventually(i, _) | Formula::Until(i, _, _) => {
                if let Some(msg) = i.check() {
                    self.report(&path, msg.to_string());
                } else if matches!(f, Formula::Until(..)) && i.hi.is_none() {
                    self.report(&path, "until requires a bounded interval".into());
                }
            }
            _ => {}
        }
        for (idx, child) in f.children().into_iter().enumerate() {
            self.formula(child, path.child(idx));
        }
    }

    fn predicate(&mut self, p: &Predicate, path: &NodePath) {
        match p {
            Predicate::Compare { lhs, rhs, .. } => {
                self.expr(lhs, path);
                self.expr(rhs, path);
            }
            Predicate::EnumEq { signal, variant, .. } => {
                if let Some(decl) = self.expect_kind(path, signal, SignalKind::Enum) {
                    if decl.variant_index(variant).is_none() {
                        let msg = format!("undeclared variant `{variant}` for enum `{signal}`");
                        self.report(path, msg);
                    }
                }
            }
            Predicate::BoolIs { signal, .. } => {
                self.expect_kind(path, signal, SignalKind::Bool);
            }
        }
    }

    fn expr(&mut self, e: &SignalExpr, path: &NodePath) {
        match e {
            SignalExpr::Signal(name) | SignalExpr::Deriv(name) => {
                self.expect_kind(path, name, SignalKind::Real);
            }
            SignalExpr::Constant(c) => {
                if !c.is_finite() {
                    self.report(path, "constant is not finite".into());
                }
            }
            SignalExpr::Abs(inner) => self.expr(inner, path),
            SignalExpr::Binary(_, lhs, rhs) => {
                self.expr(lhs, path);
                self.expr(rhs, path);
            }
        }
    }
}

// Canonical concrete syntax. Binary operands and atoms are parenthesized,
// unary operands are printed bare, so the output re-parses to the same tree.

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(hi) => write!(f, "[{}, {}]", self.lo, hi),
            None => write!(f, "[{}, inf]", self.lo),
        }
    }
}

impl fmt::Display for SignalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalExpr::Signal(name) => f.write_str(name),
            SignalExpr::Constant(c) => write!(f, "{c}"),
            SignalExpr::Abs(inner) => write!(f, "abs({inner})"),
            SignalExpr::Deriv(name) => write!(f, "deriv({name})"),
            SignalExpr::Binary(op, lhs, rhs) => write!(f, "({lhs} {} {rhs})", op.symbol()),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Compare { lhs, op, rhs } => write!(f, "{lhs} {} {rhs}", op.symbol()),
            Predicate::EnumEq { signal, variant, negated } => {
                let op = if *negated { "!=" } else { "==" };
                write!(f, "{signal} {op} {variant}")
            }
            Predicate::BoolIs { signal, expected: true } => f.write_str(signal),
            Predicate::BoolIs { signal, expected: false } => write!(f, "{signal} == false"),
        }
    }
}

struct Operand<'a>(&'a Formula);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_unary() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(p) => write!(f, "{p}"),
            Formula::Not(inner) => write!(f, "!({inner})"),
            Formula::And(l, r) => write!(f, "{} && {}", Operand(l), Operand(r)),
            Formula::Or(l, r) => write!(f, "{} || {}", Operand(l), Operand(r)),
            Formula::Implies(l, r) => write!(f, "{} -> {}", Operand(l), Operand(r)),
            Formula::Globally(i, inner) => write!(f, "G{i} ({inner})"),
            Formula::Eventually(i, inner) => write!(f, "F{i} ({inner})"),
            Formula::Until(i, l, r) => write!(f, "{} U{i} {}", Operand(l), Operand(r)),
        }
    }
}

impl fmt::Display for Specification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for decl in &self.declarations {
            write!(f, "signal {} : {}", decl.name, decl.kind)?;
            if decl.kind == SignalKind::Enum {
                write!(f, " {{{}}}", decl.variants.join(", "))?;
            }
            writeln!(f)?;
        }
        for rule in &self.rules {
            writeln!(f, "rule {}: {}", rule.name, rule.formula)?;
        }
        Ok(())
    }
}

pub fn pretty_print(f: &Formula) -> String {
    f.to_string()
}
