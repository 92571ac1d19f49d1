//! Offline Signal Temporal Logic monitoring for robot fleets.
//!
//! Parse a specification, load traces, compute quantitative robustness per
//! rule, aggregate over a fleet and compare two fleets. A small kinematic
//! simulator produces traces for experiments.

pub mod ast;
pub mod engine;
pub mod lexer;
pub mod metrics;
pub mod parser;
pub mod sim;
pub mod stats;
pub mod trace;
pub mod window;

pub use ast::{
    pretty_print, validate, BinOp, CmpOp, Diagnostic, Formula, Interval, NodePath, Predicate, Rule, SignalDecl,
    SignalExpr, SignalKind, Specification,
};
pub use engine::{
    boolean_monitor, evaluate_spec, robustness, robustness_profile, robustness_series, EngineError,
    RobustnessProfile, RobustnessResult, Verdict,
};
pub use metrics::{compare_fleets, fleet_report, format_percent_change, percent_change, CompareReport, FleetReport, MetricsError};
pub use parser::{parse_formula, parse_spec, ParseError, SourceSpan};
pub use stats::{mann_whitney_u, MannWhitney, Method, StatsError};
pub use trace::{load_trace_csv, load_trace_file, load_trace_json, write_trace_csv, write_trace_json, Series, Trace, TraceError};
pub use window::{windowed_extremum, Extremum};
