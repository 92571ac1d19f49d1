//! Random inputs and slow reference implementations for cross-checking the
//! monitor. Nothing here shares code with the engine beyond the AST types.

use indexmap::IndexMap;
use rand::Rng;
use stlmon_core::ast::{BinOp, CmpOp, Formula, Interval, Predicate, SignalDecl, SignalExpr, Specification};
use stlmon_core::trace::{Series, Trace};

pub const ENUM_VARIANTS: [&str; 3] = ["p", "q", "r"];

/// Signals used by every generated formula and trace.
pub fn test_decls() -> Vec<SignalDecl> {
    vec![
        SignalDecl::real("x"),
        SignalDecl::real("y"),
        SignalDecl::boolean("b"),
        SignalDecl::enumeration("e", ENUM_VARIANTS),
    ]
}

pub fn test_spec() -> Specification {
    Specification { declarations: test_decls(), rules: vec![] }
}

/// Values on a coarse grid so that ties and exact zeros show up.
fn grid_value<R: Rng>(rng: &mut R) -> f64 {
    if rng.random_bool(0.5) {
        f64::from(rng.random_range(-12..=12)) / 4.0
    } else {
        rng.random_range(-3.0..3.0)
    }
}

fn random_constant<R: Rng>(rng: &mut R) -> f64 {
    match rng.random_range(0..4) {
        0 => 0.0,
        1 => f64::from(rng.random_range(-5..=5)),
        2 => grid_value(rng),
        _ => rng.random_range(-1e3..1e3),
    }
}

pub fn random_expr<R: Rng>(rng: &mut R, depth: usize) -> SignalExpr {
    let leaf = depth == 0 || rng.random_bool(0.5);
    if leaf {
        return match rng.random_range(0..4) {
            0 => SignalExpr::signal("x"),
            1 => SignalExpr::signal("y"),
            2 => SignalExpr::Constant(random_constant(rng)),
            _ => SignalExpr::deriv(if rng.random_bool(0.5) { "x" } else { "y" }),
        };
    }
    if rng.random_bool(0.25) {
        return SignalExpr::abs(random_expr(rng, depth - 1));
    }
    let op = [BinOp::Add, BinOp::Sub, BinOp::Mul][rng.random_range(0..3)];
    SignalExpr::binary(op, random_expr(rng, depth - 1), random_expr(rng, depth - 1))
}

fn random_atom<R: Rng>(rng: &mut R) -> Formula {
    match rng.random_range(0..6) {
        0 => Formula::bool_is("b", rng.random_bool(0.5)),
        1 => {
            let variant = ENUM_VARIANTS[rng.random_range(0..3)];
            Formula::enum_eq("e", variant, rng.random_bool(0.5))
        }
        _ => {
            let op = [CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge][rng.random_range(0..4)];
            Formula::compare(random_expr(rng, 2), op, random_expr(rng, 1))
        }
    }
}

/// Interval whose bounds are multiples of `dt`; `allow_unbounded` permits an
/// infinite upper bound.
pub fn random_interval<R: Rng>(rng: &mut R, dt: f64, allow_unbounded: bool) -> Interval {
    let lo = f64::from(rng.random_range(0..=6)) * dt;
    if allow_unbounded && rng.random_bool(0.3) {
        return Interval::from(lo);
    }
    Interval::bounded(lo, lo + f64::from(rng.random_range(0..=10)) * dt)
}

/// Random formula with `depth() <= max_depth` (an atom has depth 1).
pub fn random_formula<R: Rng>(rng: &mut R, max_depth: usize, dt: f64) -> Formula {
    if max_depth <= 1 || rng.random_bool(0.2) {
        return random_atom(rng);
    }
    let d = max_depth - 1;
    match rng.random_range(0..7) {
        0 => Formula::not(random_formula(rng, d, dt)),
        1 => Formula::and(random_formula(rng, d, dt), random_formula(rng, d, dt)),
        2 => Formula::or(random_formula(rng, d, dt), random_formula(rng, d, dt)),
        3 => Formula::implies(random_formula(rng, d, dt), random_formula(rng, d, dt)),
        4 => Formula::globally(random_interval(rng, dt, true), random_formula(rng, d, dt)),
        5 => Formula::eventually(random_interval(rng, dt, true), random_formula(rng, d, dt)),
        _ => Formula::until(random_interval(rng, dt, false), random_formula(rng, d, dt), random_formula(rng, d, dt)),
    }
}

/// Random trace over [`test_decls`] with `len` samples spaced `dt` apart.
pub fn random_trace<R: Rng>(rng: &mut R, len: usize, dt: f64) -> Trace {
    let mut channels = IndexMap::new();
    channels.insert("x".to_string(), Series::Real((0..len).map(|_| grid_value(rng)).collect()));
    channels.insert("y".to_string(), Series::Real((0..len).map(|_| grid_value(rng)).collect()));
    channels.insert("b".to_string(), Series::Bool((0..len).map(|_| rng.random_bool(0.5)).collect()));
    channels.insert(
        "e".to_string(),
        Series::Enum {
            variants: ENUM_VARIANTS.iter().map(|v| v.to_string()).collect(),
            values: (0..len).map(|_| rng.random_range(0..3)).collect(),
        },
    );
    Trace::new("random", (0..len).map(|i| i as f64 * dt).collect(), channels).expect("valid random trace")
}

fn real<'a>(trace: &'a Trace, name: &str) -> &'a [f64] {
    match trace.series(name).expect("signal present") {
        Series::Real(v) => v,
        _ => panic!("`{name}` is not real"),
    }
}

/// Pointwise value of `expr` at sample `t`.
pub fn naive_expr(expr: &SignalExpr, trace: &Trace, t: usize) -> f64 {
    match expr {
        SignalExpr::Signal(s) => real(trace, s)[t],
        SignalExpr::Constant(c) => *c,
        SignalExpr::Abs(inner) => naive_expr(inner, trace, t).abs(),
        SignalExpr::Deriv(s) => {
            if t == 0 {
                0.0
            } else {
                let v = real(trace, s);
                (v[t] - v[t - 1]) / trace.dt()
            }
        }
        SignalExpr::Binary(op, l, r) => {
            let (a, b) = (naive_expr(l, trace, t), naive_expr(r, trace, t));
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
            }
        }
    }
}

/// Inclusive sample window `[t + a, min(t + b, n - 1)]`, or `{n - 1}` when
/// `t + a` is past the end.
pub fn naive_window(interval: &Interval, dt: f64, t: usize, n: usize) -> (usize, usize) {
    let lo = (interval.lo / dt).round() as usize;
    let start = t + lo;
    if start > n - 1 {
        return (n - 1, n - 1);
    }
    let end = match interval.hi {
        Some(hi) => (t + (hi / dt).round() as usize).min(n - 1),
        None => n - 1,
    };
    (start, end)
}

fn atom_rho(p: &Predicate, trace: &Trace, t: usize) -> f64 {
    match p {
        Predicate::Compare { lhs, op, rhs } => {
            let (l, r) = (naive_expr(lhs, trace, t), naive_expr(rhs, trace, t));
            match op {
                CmpOp::Lt | CmpOp::Le => r - l,
                CmpOp::Gt | CmpOp::Ge => l - r,
            }
        }
        _ => {
            if atom_holds(p, trace, t) {
                1.0
            } else {
                -1.0
            }
        }
    }
}

fn atom_holds(p: &Predicate, trace: &Trace, t: usize) -> bool {
    match p {
        Predicate::Compare { lhs, op, rhs } => {
            let (l, r) = (naive_expr(lhs, trace, t), naive_expr(rhs, trace, t));
            match op {
                CmpOp::Lt => l < r,
                CmpOp::Le => l <= r,
                CmpOp::Gt => l > r,
                CmpOp::Ge => l >= r,
            }
        }
        Predicate::EnumEq { signal, variant, negated } => match trace.series(signal).expect("signal present") {
            Series::Enum { variants, values } => (variants[values[t]] == *variant) != *negated,
            _ => panic!("`{signal}` is not an enum"),
        },
        Predicate::BoolIs { signal, expected } => match trace.series(signal).expect("signal present") {
            Series::Bool(v) => v[t] == *expected,
            _ => panic!("`{signal}` is not bool"),
        },
    }
}

/// Robustness at sample `t`, straight from the recursive definition.
pub fn naive_rho_at(f: &Formula, trace: &Trace, t: usize) -> f64 {
    let n = trace.len();
    let dt = trace.dt();
    match f {
        Formula::Atom(p) => atom_rho(p, trace, t),
        Formula::Not(g) => -naive_rho_at(g, trace, t),
        Formula::And(l, r) => naive_rho_at(l, trace, t).min(naive_rho_at(r, trace, t)),
        Formula::Or(l, r) => naive_rho_at(l, trace, t).max(naive_rho_at(r, trace, t)),
        Formula::Implies(l, r) => (-naive_rho_at(l, trace, t)).max(naive_rho_at(r, trace, t)),
        Formula::Globally(i, g) => {
            let (s, e) = naive_window(i, dt, t, n);
            (s..=e).map(|k| naive_rho_at(g, trace, k)).fold(f64::INFINITY, f64::min)
        }
        Formula::Eventually(i, g) => {
            let (s, e) = naive_window(i, dt, t, n);
            (s..=e).map(|k| naive_rho_at(g, trace, k)).fold(f64::NEG_INFINITY, f64::max)
        }
        Formula::Until(i, l, r) => {
            let (s, e) = naive_window(i, dt, t, n);
            (s..=e)
                .map(|k| {
                    let guard = (t..=k).map(|j| naive_rho_at(l, trace, j)).fold(f64::INFINITY, f64::min);
                    naive_rho_at(r, trace, k).min(guard)
                })
                .fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

/// Boolean satisfaction at sample `t`, straight from the recursive definition.
pub fn naive_holds_at(f: &Formula, trace: &Trace, t: usize) -> bool {
    let n = trace.len();
    let dt = trace.dt();
    match f {
        Formula::Atom(p) => atom_holds(p, trace, t),
        Formula::Not(g) => !naive_holds_at(g, trace, t),
        Formula::And(l, r) => naive_holds_at(l, trace, t) && naive_holds_at(r, trace, t),
        Formula::Or(l, r) => naive_holds_at(l, trace, t) || naive_holds_at(r, trace, t),
        Formula::Implies(l, r) => !naive_holds_at(l, trace, t) || naive_holds_at(r, trace, t),
        Formula::Globally(i, g) => {
            let (s, e) = naive_window(i, dt, t, n);
            (s..=e).all(|k| naive_holds_at(g, trace, k))
        }
        Formula::Eventually(i, g) => {
            let (s, e) = naive_window(i, dt, t, n);
            (s..=e).any(|k| naive_holds_at(g, trace, k))
        }
        Formula::Until(i, l, r) => {
            let (s, e) = naive_window(i, dt, t, n);
            (s..=e).any(|k| naive_holds_at(r, trace, k) && (t..=k).all(|j| naive_holds_at(l, trace, j)))
        }
    }
}

/// Full robustness series, memoised per node so deep formulas stay tractable.
pub fn naive_robustness(f: &Formula, trace: &Trace) -> Vec<f64> {
    let n = trace.len();
    let dt = trace.dt();
    let window = |i: &Interval, t| naive_window(i, dt, t, n);
    match f {
        Formula::Atom(p) => (0..n).map(|t| atom_rho(p, trace, t)).collect(),
        Formula::Not(g) => naive_robustness(g, trace).iter().map(|v| -v).collect(),
        Formula::And(l, r) => zip(naive_robustness(l, trace), naive_robustness(r, trace), f64::min),
        Formula::Or(l, r) => zip(naive_robustness(l, trace), naive_robustness(r, trace), f64::max),
        Formula::Implies(l, r) => zip(naive_robustness(l, trace), naive_robustness(r, trace), |a, b| (-a).max(b)),
        Formula::Globally(i, g) => {
            let c = naive_robustness(g, trace);
            (0..n)
                .map(|t| {
                    let (s, e) = window(i, t);
                    c[s..=e].iter().copied().fold(f64::INFINITY, f64::min)
                })
                .collect()
        }
        Formula::Eventually(i, g) => {
            let c = naive_robustness(g, trace);
            (0..n)
                .map(|t| {
                    let (s, e) = window(i, t);
                    c[s..=e].iter().copied().fold(f64::NEG_INFINITY, f64::max)
                })
                .collect()
        }
        Formula::Until(i, l, r) => {
            let (lv, rv) = (naive_robustness(l, trace), naive_robustness(r, trace));
            (0..n)
                .map(|t| {
                    let (s, e) = window(i, t);
                    (s..=e)
                        .map(|k| rv[k].min(lv[t..=k].iter().copied().fold(f64::INFINITY, f64::min)))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect()
        }
    }
}

fn zip(a: Vec<f64>, b: Vec<f64>, op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

/// Min or max of `series[t..=min(t + width, n - 1)]` by direct scan.
pub fn naive_windowed(series: &[f64], width: usize, max: bool) -> Vec<f64> {
    let n = series.len();
    (0..n)
        .map(|t| {
            let w = series[t..=t.saturating_add(width).min(n - 1)].iter().copied();
            if max {
                w.fold(f64::NEG_INFINITY, f64::max)
            } else {
                w.fold(f64::INFINITY, f64::min)
            }
        })
        .collect()
}

/// Two-sided exact Mann-Whitney p-value by enumerating every split of the
/// pooled sample. Assumes no ties.
pub fn brute_force_mwu_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let u_of = |mask: u32| {
        let mut u = 0u64;
        for i in (0..n).filter(|i| mask >> i & 1 == 1) {
            for j in (0..n).filter(|j| mask >> j & 1 == 0) {
                if pooled[i] > pooled[j] {
                    u += 1;
                }
            }
        }
        u
    };
    let observed = u_of((1u32 << a.len()) - 1);
    let (mut total, mut le, mut ge) = (0u64, 0u64, 0u64);
    for mask in 0..(1u32 << n) {
        if mask.count_ones() as usize != a.len() {
            continue;
        }
        let u = u_of(mask);
        total += 1;
        le += u64::from(u <= observed);
        ge += u64::from(u >= observed);
    }
    (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
}
