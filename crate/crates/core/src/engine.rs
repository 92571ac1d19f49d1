//! Quantitative and boolean STL semantics over finite, uniformly sampled traces.
//!
//! Every node is evaluated to a full time series by structural recursion.
//! Temporal windows `[t + a, min(t + b, n - 1)]` are clipped at the end of the
//! trace; when `t + a` lies past the last sample the window is the singleton
//! `{n - 1}`. Interval bounds must be integer multiples of the trace's `dt`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::ast::{CmpOp, Formula, Interval, NodePath, Predicate, Rule, Specification};
use crate::trace::{eval_expr, Series, Trace, TraceError};
use crate::window::{windowed_extremum, Extremum};

/// Largest accepted distance, in samples, between a bound and the nearest
/// whole sample offset.
pub const ALIGNMENT_TOLERANCE: f64 = 1e-6;

/// Robustness magnitude of boolean and categorical atoms.
pub const DISCRETE_MARGIN: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("signal `{signal}` is missing from the trace")]
    MissingSignal { signal: String },
    #[error("interval bound {bound} is not an integer multiple of the sampling period {dt}")]
    MisalignedBound { bound: f64, dt: f64 },
    #[error("enum signal `{signal}` has no variant `{variant}` in this trace")]
    UnknownVariant { signal: String, variant: String },
    #[error(transparent)]
    Trace(TraceError),
    #[error("rule `{rule}`: {source}")]
    InRule {
        rule: String,
        #[source]
        source: Box<EngineError>,
    },
}

impl From<TraceError> for EngineError {
    fn from(err: TraceError) -> Self {
        match err {
            TraceError::MissingSignal { name } => EngineError::MissingSignal { signal: name },
            other => EngineError::Trace(other),
        }
    }
}

impl EngineError {
    fn in_rule(self, rule: &str) -> Self {
        EngineError::InRule { rule: rule.to_string(), source: Box::new(self) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Verdict {
    Satisfied,
    ExactlySatisfied,
    Violated,
}

impl Verdict {
    pub fn from_rho(rho: f64) -> Self {
        if rho > 0.0 {
            Verdict::Satisfied
        } else if rho == 0.0 {
            Verdict::ExactlySatisfied
        } else {
            Verdict::Violated
        }
    }

    /// Satisfied or exactly satisfied.
    pub fn is_compliant(self) -> bool {
        self != Verdict::Violated
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Satisfied => "satisfied",
            Verdict::ExactlySatisfied => "exactly-satisfied",
            Verdict::Violated => "violated",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessResult {
    pub rule_name: String,
    /// Robustness at the first sample.
    pub rho: f64,
    pub verdict: Verdict,
}

/// Per-node robustness series, keyed by position in the formula.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RobustnessProfile {
    pub series: BTreeMap<NodePath, Vec<f64>>,
}

impl RobustnessProfile {
    pub fn root(&self) -> &[f64] {
        &self.series[&NodePath::root()]
    }

    pub fn get(&self, path: &NodePath) -> Option<&[f64]> {
        self.series.get(path).map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, Copy)]
struct Offsets {
    lo: usize,
    /// `None` reaches the end of the trace.
    hi: Option<usize>,
}

impl Offsets {
    fn new(interval: &Interval, dt: f64) -> Result<Self, EngineError> {
        let lo = to_samples(interval.lo, dt)?;
        let hi = interval.hi.map(|hi| to_samples(hi, dt)).transpose()?;
        Ok(Offsets { lo, hi: hi.map(|hi| hi.max(lo)) })
    }

    fn width(&self) -> usize {
        self.hi.map_or(usize::MAX, |hi| hi - self.lo)
    }

    /// Inclusive window for time `t` under the clipping rule.
    fn window(&self, t: usize, n: usize) -> (usize, usize) {
        let last = n - 1;
        let start = t.saturating_add(self.lo);
        if start > last {
            return (last, last);
        }
        let end = self.hi.map_or(last, |hi| t.saturating_add(hi).min(last));
        (start, end)
    }
}

fn to_samples(bound: f64, dt: f64) -> Result<usize, EngineError> {
    let exact = bound / dt;
    let rounded = exact.round();
    if !exact.is_finite() || (exact - rounded).abs() > ALIGNMENT_TOLERANCE {
        return Err(EngineError::MisalignedBound { bound, dt });
    }
    // Saturating float-to-int conversion; huge bounds behave as unbounded.
    Ok(rounded as usize)
}

fn discrete(truth: bool) -> f64 {
    if truth {
        DISCRETE_MARGIN
    } else {
        -DISCRETE_MARGIN
    }
}

fn enum_matches(trace: &Trace, signal: &str, variant: &str) -> Result<Vec<bool>, EngineError> {
    match trace.series(signal)? {
        Series::Enum { variants, values } => {
            let wanted = variants.iter().position(|v| v == variant).ok_or_else(|| {
                EngineError::UnknownVariant { signal: signal.to_string(), variant: variant.to_string() }
            })?;
            Ok(values.iter().map(|&v| v == wanted).collect())
        }
        other => Err(TraceError::KindMismatch {
            name: signal.to_string(),
            expected: crate::ast::SignalKind::Enum,
            found: other.kind(),
        }
        .into()),
    }
}

fn bool_values<'a>(trace: &'a Trace, signal: &str) -> Result<&'a [bool], EngineError> {
    match trace.series(signal)? {
        Series::Bool(v) => Ok(v),
        other => Err(TraceError::KindMismatch {
            name: signal.to_string(),
            expected: crate::ast::SignalKind::Bool,
            found: other.kind(),
        }
        .into()),
    }
}

struct Quantitative<'a> {
    trace: &'a Trace,
    profile: Option<BTreeMap<NodePath, Vec<f64>>>,
}

impl Quantitative<'_> {
    fn eval(&mut self, f: &Formula, path: &NodePath) -> Result<Vec<f64>, EngineError> {
        let out = self.eval_node(f, path)?;
        if let Some(profile) = self.profile.as_mut() {
            profile.insert(path.clone(), out.clone());
        }
        Ok(out)
    }

    fn eval_node(&mut self, f: &Formula, path: &NodePath) -> Result<Vec<f64>, EngineError> {
        let n = self.trace.len();
        Ok(match f {
            Formula::Atom(p) => self.atom(p)?,
            Formula::Not(arg) => {
                let mut v = self.eval(arg, &path.child(0))?;
                v.iter_mut().for_each(|x| *x = -*x);
                v
            }
            Formula::And(l, r) => {
                let (l, r) = (self.eval(l, &path.child(0))?, self.eval(r, &path.child(1))?);
                l.iter().zip(&r).map(|(a, b)| a.min(*b)).collect()
            }
            Formula::Or(l, r) => {
                let (l, r) = (self.eval(l, &path.child(0))?, self.eval(r, &path.child(1))?);
                l.iter().zip(&r).map(|(a, b)| a.max(*b)).collect()
            }
            Formula::Implies(l, r) => {
                let (l, r) = (self.eval(l, &path.child(0))?, self.eval(r, &path.child(1))?);
                l.iter().zip(&r).map(|(a, b)| (-a).max(*b)).collect()
            }
            Formula::Globally(interval, arg) | Formula::Eventually(interval, arg) => {
                let mode = if matches!(f, Formula::Globally(..)) { Extremum::Min } else { Extremum::Max };
                let offsets = Offsets::new(interval, self.trace.dt())?;
                let child = self.eval(arg, &path.child(0))?;
                let swept = windowed_extremum(&child, offsets.width(), mode);
                (0..n)
                    .map(|t| match t.checked_add(offsets.lo) {
                        Some(start) if start < n => swept[start],
                        _ => child[n - 1],
                    })
                    .collect()
            }
            Formula::Until(interval, l, r) => {
                let offsets = Offsets::new(interval, self.trace.dt())?;
                let lhs = self.eval(l, &path.child(0))?;
                let rhs = self.eval(r, &path.child(1))?;
                // min of lhs over [t, t + lo], clipped
                let guard = windowed_extremum(&lhs, offsets.lo, Extremum::Min);
                (0..n)
                    .map(|t| {
                        let (start, end) = offsets.window(t, n);
                        let mut running = guard[t];
                        let mut best = f64::NEG_INFINITY;
                        for s in start..=end {
                            running = running.min(lhs[s]);
                            best = best.max(rhs[s].min(running));
                        }
                        best
                    })
                    .collect()
            }
        })
    }

    fn atom(&self, p: &Predicate) -> Result<Vec<f64>, EngineError> {
        Ok(match p {
            Predicate::Compare { lhs, op, rhs } => {
                let lhs = eval_expr(lhs, self.trace)?;
                let rhs = eval_expr(rhs, self.trace)?;
                let (lhs, rhs) = (lhs.values(), rhs.values());
                match op {
                    CmpOp::Lt | CmpOp::Le => rhs.iter().zip(lhs).map(|(r, l)| r - l).collect(),
                    CmpOp::Gt | CmpOp::Ge => lhs.iter().zip(rhs).map(|(l, r)| l - r).collect(),
                }
            }
            Predicate::EnumEq { signal, variant, negated } => enum_matches(self.trace, signal, variant)?
                .into_iter()
                .map(|eq| discrete(eq != *negated))
                .collect(),
            Predicate::BoolIs { signal, expected } => bool_values(self.trace, signal)?
                .iter()
                .map(|&b| discrete(b == *expected))
                .collect(),
        })
    }
}

/// Robustness series of the root node, one value per sample.
pub fn robustness_series(f: &Formula, trace: &Trace) -> Result<Vec<f64>, EngineError> {
    Quantitative { trace, profile: None }.eval(f, &NodePath::root())
}

/// Robustness of `rule` at the first sample, with its verdict.
pub fn robustness(rule: &Rule, trace: &Trace) -> Result<RobustnessResult, EngineError> {
    let series = robustness_series(&rule.formula, trace).map_err(|e| e.in_rule(&rule.name))?;
    let rho = series[0];
    Ok(RobustnessResult { rule_name: rule.name.clone(), rho, verdict: Verdict::from_rho(rho) })
}

/// Like [`robustness_series`], but keeps the series of every node.
pub fn robustness_profile(f: &Formula, trace: &Trace) -> Result<RobustnessProfile, EngineError> {
    let mut eval = Quantitative { trace, profile: Some(BTreeMap::new()) };
    eval.eval(f, &NodePath::root())?;
    Ok(RobustnessProfile { series: eval.profile.unwrap_or_default() })
}

/// Evaluates every rule of `spec`, in rule order.
pub fn evaluate_spec(spec: &Specification, trace: &Trace) -> Result<Vec<RobustnessResult>, EngineError> {
    spec.rules.iter().map(|rule| robustness(rule, trace)).collect()
}

fn count_prefix(values: &[bool]) -> Vec<usize> {
    let mut acc = Vec::with_capacity(values.len() + 1);
    acc.push(0);
    for &v in values {
        acc.push(acc.last().unwrap() + usize::from(v));
    }
    acc
}

fn boolean_eval(f: &Formula, trace: &Trace) -> Result<Vec<bool>, EngineError> {
    let n = trace.len();
    Ok(match f {
        Formula::Atom(Predicate::Compare { lhs, op, rhs }) => {
            let lhs = eval_expr(lhs, trace)?;
            let rhs = eval_expr(rhs, trace)?;
            lhs.values().iter().zip(rhs.values()).map(|(&l, &r)| op.holds(l, r)).collect()
        }
        Formula::Atom(Predicate::EnumEq { signal, variant, negated }) => {
            enum_matches(trace, signal, variant)?.into_iter().map(|eq| eq != *negated).collect()
        }
        Formula::Atom(Predicate::BoolIs { signal, expected }) => {
            bool_values(trace, signal)?.iter().map(|&b| b == *expected).collect()
        }
        Formula::Not(arg) => boolean_eval(arg, trace)?.into_iter().map(|b| !b).collect(),
        Formula::And(l, r) => zip_bools(boolean_eval(l, trace)?, boolean_eval(r, trace)?, |a, b| a && b),
        Formula::Or(l, r) => zip_bools(boolean_eval(l, trace)?, boolean_eval(r, trace)?, |a, b| a || b),
        Formula::Implies(l, r) => zip_bools(boolean_eval(l, trace)?, boolean_eval(r, trace)?, |a, b| !a || b),
        Formula::Globally(interval, arg) | Formula::Eventually(interval, arg) => {
            let offsets = Offsets::new(interval, trace.dt())?;
            let child = boolean_eval(arg, trace)?;
            let ones = count_prefix(&child);
            let all = matches!(f, Formula::Globally(..));
            (0..n)
                .map(|t| {
                    let (s, e) = offsets.window(t, n);
                    let hits = ones[e + 1] - ones[s];
                    if all {
                        hits == e + 1 - s
                    } else {
                        hits > 0
                    }
                })
                .collect()
        }
        Formula::Until(interval, l, r) => {
            let offsets = Offsets::new(interval, trace.dt())?;
            let lhs = boolean_eval(l, trace)?;
            let rhs = boolean_eval(r, trace)?;
            let rhs_ones = count_prefix(&rhs);
            // first index >= t where lhs fails (n if none)
            let mut first_false = vec![n; n + 1];
            for t in (0..n).rev() {
                first_false[t] = if lhs[t] { first_false[t + 1] } else { t };
            }
            (0..n)
                .map(|t| {
                    let (s, e) = offsets.window(t, n);
                    let e = e.min(first_false[t].wrapping_sub(1));
                    first_false[t] > s && rhs_ones[e + 1] > rhs_ones[s]
                })
                .collect()
        }
    })
}

fn zip_bools(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

/// Classical boolean satisfaction at the first sample, under the same
/// windowing rule as the quantitative semantics.
pub fn boolean_monitor(f: &Formula, trace: &Trace) -> Result<bool, EngineError> {
    Ok(boolean_eval(f, trace)?[0])
}

pub fn boolean_series(f: &Formula, trace: &Trace) -> Result<Vec<bool>, EngineError> {
    boolean_eval(f, trace)
}

#[cfg(test)]
mod tests {
    use indexmap::IndexMap;

    use super::*;
    use crate::ast::SignalDecl;
    use crate::parser::parse_formula;

    fn decls() -> Vec<SignalDecl> {
        vec![
            SignalDecl::real("speed"),
            SignalDecl::real("x"),
            SignalDecl::real("a"),
            SignalDecl::real("b"),
            SignalDecl::boolean("goal_reached"),
            SignalDecl::enumeration("surface", ["track", "offroad"]),
        ]
    }

    fn trace(dt: f64, cols: Vec<(&str, Series)>) -> Trace {
        let n = cols[0].1.len();
        let channels: IndexMap<_, _> = cols.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        Trace::new("t", (0..n).map(|i| i as f64 * dt).collect(), channels).unwrap()
    }

    fn reals(name: &str, v: &[f64]) -> Trace {
        trace(1.0, vec![(name, Series::Real(v.to_vec()))])
    }

    fn rho(src: &str, t: &Trace) -> f64 {
        robustness_series(&parse_formula(src, &decls()).unwrap(), t).unwrap()[0]
    }

    fn holds(src: &str, t: &Trace) -> bool {
        boolean_monitor(&parse_formula(src, &decls()).unwrap(), t).unwrap()
    }

    #[test]
    fn speed_limit_margin() {
        let t = reals("speed", &[850.0, 870.0, 860.0]);
        let rule = Rule { name: "speed".into(), formula: parse_formula("G[0, inf] (speed < 900)", &decls()).unwrap() };
        let res = robustness(&rule, &t).unwrap();
        assert_eq!(res.rho, 30.0);
        assert_eq!(res.verdict, Verdict::Satisfied);
    }

    #[test]
    fn eventually_violated() {
        let t = reals("x", &[-1.0, -2.0, -3.0]);
        assert_eq!(rho("F[0, 2] (x > 0)", &t), -1.0);
        assert_eq!(rho("!(x > 0)", &t), 1.0);
    }

    #[test]
    fn until_expansion() {
        let t = trace(
            1.0,
            vec![("a", Series::Real(vec![1.0, 1.0, -1.0])), ("b", Series::Real(vec![-1.0, 2.0, 3.0]))],
        );
        // max(min(-1, 1), min(2, 1, 1), min(3, 1, 1, -1)) = 1
        assert_eq!(rho("(a > 0) U[0, 2] (b > 0)", &t), 1.0);
    }

    #[test]
    fn truncation_uses_last_sample() {
        let t = reals("x", &[5.0, 4.0, 3.0]);
        let series = robustness_series(&parse_formula("G[2, 4] (x > 0)", &decls()).unwrap(), &t).unwrap();
        assert_eq!(series, [3.0, 3.0, 3.0]);
        let series = robustness_series(&parse_formula("F[1, 1] (x > 0)", &decls()).unwrap(), &t).unwrap();
        assert_eq!(series, [4.0, 3.0, 3.0]);
    }

    #[test]
    fn profile_keeps_every_node() {
        let t = reals("speed", &[850.0, 950.0, 860.0]);
        let f = parse_formula("G[0, inf] (speed < 900)", &decls()).unwrap();
        let profile = robustness_profile(&f, &t).unwrap();
        assert_eq!(profile.get(&NodePath::root().child(0)).unwrap(), [50.0, -50.0, 40.0]);
        assert_eq!(profile.root()[0], robustness_series(&f, &t).unwrap()[0]);

        let x = reals("x", &[1.0, -2.0, 3.0]);
        let g0 = robustness_series(&parse_formula("G[0, 0] (x > 0)", &decls()).unwrap(), &x).unwrap();
        assert_eq!(g0, [1.0, -2.0, 3.0]);
    }

    #[test]
    fn boolean_monitor_respects_strictness() {
        assert!(holds("G[0, inf] (speed < 900)", &reals("speed", &[850.0, 870.0])));
        assert!(!holds("G[0, inf] (speed < 900)", &reals("speed", &[850.0, 900.0])));
        assert!(holds("G[0, inf] (speed <= 900)", &reals("speed", &[850.0, 900.0])));
        let t = trace(1.0, vec![("goal_reached", Series::Bool(vec![false; 4]))]);
        assert!(!holds("F[0, 800] (goal_reached)", &t));
        assert_eq!(rho("F[0, 800] (goal_reached)", &t), -1.0);
    }

    #[test]
    fn boolean_until() {
        let t = trace(
            1.0,
            vec![("a", Series::Real(vec![1.0, 1.0, -1.0])), ("b", Series::Real(vec![-1.0, 2.0, 3.0]))],
        );
        assert!(holds("(a > 0) U[0, 2] (b > 0)", &t));
        assert!(!holds("(a > 0) U[2, 2] (b > 0)", &t));
        assert!(!holds("(b > 0) U[0, 2] (a > 0)", &t));
    }

    #[test]
    fn discrete_atoms() {
        let surface = Series::Enum { variants: vec!["track".into(), "offroad".into()], values: vec![1, 1, 0] };
        let t = trace(1.0, vec![("surface", surface)]);
        assert_eq!(rho("surface == track", &t), -1.0);
        assert_eq!(rho("surface != track", &t), 1.0);
        assert_eq!(rho("(surface != track) -> F[0, 2] (surface == track)", &t), 1.0);
        assert_eq!(rho("(surface != track) -> F[0, 1] (surface == track)", &t), -1.0);
    }

    #[test]
    fn bounds_follow_dt() {
        let t = trace(0.5, vec![("x", Series::Real(vec![1.0, 2.0, -3.0, 4.0]))]);
        assert_eq!(rho("G[0, 0.5] (x > 0)", &t), 1.0);
        assert_eq!(rho("G[0, 1] (x > 0)", &t), -3.0);
        let f = parse_formula("G[0, 0.3] (x > 0)", &decls()).unwrap();
        let err = robustness_series(&f, &t).unwrap_err();
        assert!(matches!(err, EngineError::MisalignedBound { .. }));
    }

    #[test]
    fn missing_signal_names_rule() {
        let t = reals("x", &[1.0, 2.0]);
        let rule = Rule { name: "limit".into(), formula: parse_formula("speed < 1", &decls()).unwrap() };
        let err = robustness(&rule, &t).unwrap_err();
        assert_eq!(err.to_string(), "rule `limit`: signal `speed` is missing from the trace");
    }

    #[test]
    fn verdicts() {
        assert_eq!(Verdict::from_rho(0.1), Verdict::Satisfied);
        assert_eq!(Verdict::from_rho(0.0), Verdict::ExactlySatisfied);
        assert_eq!(Verdict::from_rho(-0.0), Verdict::ExactlySatisfied);
        assert_eq!(Verdict::from_rho(-1e-12), Verdict::Violated);
        assert!(Verdict::ExactlySatisfied.is_compliant());
    }
}
