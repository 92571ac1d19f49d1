//! Rollout traces: loading, validation and signal-expression evaluation.
//!
//! A trace is uniformly sampled. Channels are stored in file order so that a
//! load/write cycle reproduces the original column layout.

use std::fmt::Write as _;
use std::path::Path;

use indexmap::IndexMap;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::ast::{BinOp, SignalDecl, SignalExpr, SignalKind, Specification};

/// Largest tolerated relative deviation of a sampling gap from `dt`.
pub const SAMPLING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("trace has {found} sample(s); at least 2 are required")]
    TooFewSamples { found: usize },
    #[error("first column must be `time`, found `{found}`")]
    MissingTimeColumn { found: String },
    #[error("unknown column `{column}` (column {index}) is not a declared signal")]
    UnknownColumn { column: String, index: usize },
    #[error("duplicate column `{column}`")]
    DuplicateColumn { column: String },
    #[error("row {row}: expected {expected} fields, found {found}")]
    RowLength { row: u64, expected: usize, found: usize },
    #[error("row {row}, column `{column}`: cannot parse `{value}` as {kind}")]
    BadValue { row: u64, column: String, value: String, kind: SignalKind },
    #[error("row {row}, column `{column}`: undeclared variant `{variant}`")]
    UndeclaredVariant { row: u64, column: String, variant: String },
    #[error("row {row}, column `{column}`: value is not finite")]
    NonFinite { row: u64, column: String },
    #[error("row {row}: time does not strictly increase")]
    NonIncreasingTime { row: u64 },
    #[error("row {row}: non-uniform sampling (gap {gap}, expected {dt})")]
    NonUniformSampling { row: u64, gap: f64, dt: f64 },
    #[error("nonpositive dt {dt}")]
    NonPositiveDt { dt: f64 },
    #[error("ragged signals: `{signal}` has {found} samples, expected {expected}")]
    RaggedSignals { signal: String, expected: usize, found: usize },
    #[error("malformed JSON trace: {0}")]
    Json(String),
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("unsupported trace file extension for `{path}` (expected .csv or .json)")]
    UnsupportedFormat { path: String },
    #[error("signal `{name}` is not present in the trace")]
    MissingSignal { name: String },
    #[error("signal `{name}` is {found}, expected {expected}")]
    KindMismatch { name: String, expected: SignalKind, found: SignalKind },
    #[error("division by zero at sample {index}")]
    DivisionByZero { index: usize },
    #[error("expression is not finite at sample {index}")]
    NonFiniteResult { index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Series {
    Real(Vec<f64>),
    Bool(Vec<bool>),
    /// Variant indices into `variants`.
    Enum { variants: Vec<String>, values: Vec<usize> },
}

impl Series {
    pub fn kind(&self) -> SignalKind {
        match self {
            Series::Real(_) => SignalKind::Real,
            Series::Bool(_) => SignalKind::Bool,
            Series::Enum { .. } => SignalKind::Enum,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Series::Real(v) => v.len(),
            Series::Bool(v) => v.len(),
            Series::Enum { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn format_cell(&self, i: usize, out: &mut String) {
        match self {
            Series::Real(v) => write!(out, "{}", v[i]).unwrap(),
            Series::Bool(v) => out.push_str(if v[i] { "true" } else { "false" }),
            Series::Enum { variants, values } => out.push_str(&variants[values[i]]),
        }
    }

    fn json_values(&self) -> Value {
        match self {
            Series::Real(v) => Value::from(v.clone()),
            Series::Bool(v) => Value::from(v.clone()),
            Series::Enum { variants, values } => {
                Value::from(values.iter().map(|&i| variants[i].clone()).collect::<Vec<_>>())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    id: String,
    dt: f64,
    times: Vec<f64>,
    channels: IndexMap<String, Series>,
}

impl Trace {
    /// Builds a trace, enforcing length, sampling and value invariants.
    pub fn new(
        id: impl Into<String>,
        times: Vec<f64>,
        channels: IndexMap<String, Series>,
    ) -> Result<Self, TraceError> {
        if times.len() < 2 {
            return Err(TraceError::TooFewSamples { found: times.len() });
        }
        if let Some(i) = times.iter().position(|t| !t.is_finite()) {
            return Err(TraceError::NonFinite { row: i as u64, column: "time".into() });
        }
        let dt = times[1] - times[0];
        check_sampling(&times, dt, |i| i as u64)?;
        let trace = Trace { id: id.into(), dt, times, channels };
        trace.check_channels()?;
        Ok(trace)
    }

    fn check_channels(&self) -> Result<(), TraceError> {
        let n = self.times.len();
        for (name, series) in &self.channels {
            if series.len() != n {
                return Err(TraceError::RaggedSignals { signal: name.clone(), expected: n, found: series.len() });
            }
            match series {
                Series::Real(v) => {
                    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                        return Err(TraceError::NonFinite { row: i as u64, column: name.clone() });
                    }
                }
                Series::Enum { variants, values } => {
                    if let Some(i) = values.iter().position(|&v| v >= variants.len()) {
                        return Err(TraceError::UndeclaredVariant {
                            row: i as u64,
                            column: name.clone(),
                            variant: values[i].to_string(),
                        });
                    }
                }
                Series::Bool(_) => {}
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn channels(&self) -> impl Iterator<Item = (&str, &Series)> {
        self.channels.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn series(&self, name: &str) -> Result<&Series, TraceError> {
        self.channels.get(name).ok_or_else(|| TraceError::MissingSignal { name: name.to_string() })
    }

    pub fn real(&self, name: &str) -> Result<&[f64], TraceError> {
        match self.series(name)? {
            Series::Real(v) => Ok(v),
            other => Err(TraceError::KindMismatch {
                name: name.to_string(),
                expected: SignalKind::Real,
                found: other.kind(),
            }),
        }
    }
}

fn check_sampling(times: &[f64], dt: f64, row_of: impl Fn(usize) -> u64) -> Result<(), TraceError> {
    if !(dt > 0.0) {
        return Err(TraceError::NonIncreasingTime { row: row_of(1) });
    }
    for (i, pair) in times.windows(2).enumerate() {
        let gap = pair[1] - pair[0];
        if !(gap > 0.0) {
            return Err(TraceError::NonIncreasingTime { row: row_of(i + 1) });
        }
        if ((gap - dt) / dt).abs() > SAMPLING_TOLERANCE {
            return Err(TraceError::NonUniformSampling { row: row_of(i + 1), gap, dt });
        }
    }
    Ok(())
}

fn declared<'a>(spec: &'a Specification, column: &str, index: usize) -> Result<&'a SignalDecl, TraceError> {
    spec.declaration(column)
        .ok_or_else(|| TraceError::UnknownColumn { column: column.to_string(), index })
}

fn parse_bool(cell: &str) -> Option<bool> {
    match cell {
        "true" | "1" => Some(true),
        "false" | "0" => Some(false),
        _ => None,
    }
}

enum Column {
    Real(Vec<f64>),
    Bool(Vec<bool>),
    Enum(Vec<usize>),
}

/// Loads a CSV trace with header `time,<signal>...`. Row numbers in errors
/// are 1-based file lines (the header is line 1).
pub fn load_trace_csv(bytes: &[u8], spec: &Specification) -> Result<Trace, TraceError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = reader.headers().map_err(|e| TraceError::Csv(e.to_string()))?.clone();

    match headers.get(0) {
        Some("time") => {}
        other => return Err(TraceError::MissingTimeColumn { found: other.unwrap_or("").to_string() }),
    }
    let mut decls = Vec::new();
    for (index, column) in headers.iter().enumerate().skip(1) {
        if decls.iter().any(|d: &&SignalDecl| d.name == column) {
            return Err(TraceError::DuplicateColumn { column: column.to_string() });
        }
        decls.push(declared(spec, column, index + 1)?);
    }

    let mut times = Vec::new();
    let mut rows = Vec::new();
    let mut columns: Vec<Column> = decls
        .iter()
        .map(|d| match d.kind {
            SignalKind::Real => Column::Real(Vec::new()),
            SignalKind::Bool => Column::Bool(Vec::new()),
            SignalKind::Enum => Column::Enum(Vec::new()),
        })
        .collect();

    for record in reader.records() {
        let record = record.map_err(|e| TraceError::Csv(e.to_string()))?;
        let row = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(TraceError::RowLength { row, expected: headers.len(), found: record.len() });
        }
        let time_cell = &record[0];
        let t: f64 = time_cell.parse().map_err(|_| TraceError::BadValue {
            row,
            column: "time".into(),
            value: time_cell.to_string(),
            kind: SignalKind::Real,
        })?;
        if !t.is_finite() {
            return Err(TraceError::NonFinite { row, column: "time".into() });
        }
        times.push(t);
        rows.push(row);

        for ((decl, column), cell) in decls.iter().zip(columns.iter_mut()).zip(record.iter().skip(1)) {
            let bad = || TraceError::BadValue {
                row,
                column: decl.name.clone(),
                value: cell.to_string(),
                kind: decl.kind,
            };
            match column {
                Column::Real(v) => {
                    let x: f64 = cell.parse().map_err(|_| bad())?;
                    if !x.is_finite() {
                        return Err(TraceError::NonFinite { row, column: decl.name.clone() });
                    }
                    v.push(x);
                }
                Column::Bool(v) => v.push(parse_bool(cell).ok_or_else(bad)?),
                Column::Enum(v) => {
                    let idx = decl.variant_index(cell).ok_or_else(|| TraceError::UndeclaredVariant {
                        row,
                        column: decl.name.clone(),
                        variant: cell.to_string(),
                    })?;
                    v.push(idx);
                }
            }
        }
    }

    if times.len() < 2 {
        return Err(TraceError::TooFewSamples { found: times.len() });
    }
    let dt = times[1] - times[0];
    check_sampling(&times, dt, |i| rows[i])?;

    let channels = decls
        .into_iter()
        .zip(columns)
        .map(|(decl, column)| {
            let series = match column {
                Column::Real(v) => Series::Real(v),
                Column::Bool(v) => Series::Bool(v),
                Column::Enum(v) => Series::Enum { variants: decl.variants.clone(), values: v },
            };
            (decl.name.clone(), series)
        })
        .collect();
    Trace::new("", times, channels)
}

/// Loads a JSON trace `{"id": .., "dt": .., "signals": {name: [..]}}`.
/// Sample `i` is placed at time `i * dt`.
pub fn load_trace_json(bytes: &[u8], spec: &Specification) -> Result<Trace, TraceError> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| TraceError::Json(e.to_string()))?;
    let obj = doc.as_object().ok_or_else(|| TraceError::Json("top level must be an object".into()))?;
    let id = match obj.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(TraceError::Json("`id` must be a string".into())),
        None => String::new(),
    };
    let dt = obj
        .get("dt")
        .and_then(Value::as_f64)
        .ok_or_else(|| TraceError::Json("missing numeric field `dt`".into()))?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(TraceError::NonPositiveDt { dt });
    }
    let signals = obj
        .get("signals")
        .and_then(Value::as_object)
        .ok_or_else(|| TraceError::Json("missing object field `signals`".into()))?;

    let mut n = None;
    let mut channels = IndexMap::new();
    for (index, (name, values)) in signals.iter().enumerate() {
        let decl = declared(spec, name, index + 1)?;
        let values = values
            .as_array()
            .ok_or_else(|| TraceError::Json(format!("signal `{name}` must be an array")))?;
        let expected = *n.get_or_insert(values.len());
        if values.len() != expected {
            return Err(TraceError::RaggedSignals { signal: name.clone(), expected, found: values.len() });
        }
        channels.insert(name.clone(), json_series(decl, values)?);
    }

    let n = n.unwrap_or(0);
    if n < 2 {
        return Err(TraceError::TooFewSamples { found: n });
    }
    let times = (0..n).map(|i| i as f64 * dt).collect();
    Trace::new(id, times, channels)
}

fn json_series(decl: &SignalDecl, values: &[Value]) -> Result<Series, TraceError> {
    let bad = |row: usize, v: &Value| TraceError::BadValue {
        row: row as u64,
        column: decl.name.clone(),
        value: v.to_string(),
        kind: decl.kind,
    };
    Ok(match decl.kind {
        SignalKind::Real => Series::Real(
            values
                .iter()
                .enumerate()
                .map(|(i, v)| v.as_f64().ok_or_else(|| bad(i, v)))
                .collect::<Result<_, _>>()?,
        ),
        SignalKind::Bool => Series::Bool(
            values
                .iter()
                .enumerate()
                .map(|(i, v)| match v {
                    Value::Bool(b) => Ok(*b),
                    Value::Number(x) if x.as_u64() == Some(1) => Ok(true),
                    Value::Number(x) if x.as_u64() == Some(0) => Ok(false),
                    _ => Err(bad(i, v)),
                })
                .collect::<Result<_, _>>()?,
        ),
        SignalKind::Enum => Series::Enum {
            variants: decl.variants.clone(),
            values: values
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let s = v.as_str().ok_or_else(|| bad(i, v))?;
                    decl.variant_index(s).ok_or_else(|| TraceError::UndeclaredVariant {
                        row: i as u64,
                        column: decl.name.clone(),
                        variant: s.to_string(),
                    })
                })
                .collect::<Result<_, _>>()?,
        },
    })
}

/// Loads a `.csv` or `.json` trace; the trace id defaults to the file stem.
pub fn load_trace_file(path: &Path, spec: &Specification) -> Result<Trace, TraceError> {
    let display = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| TraceError::Io { path: display.clone(), message: e.to_string() })?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let trace = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => load_trace_csv(&bytes, spec)?,
        Some("json") => load_trace_json(&bytes, spec)?,
        _ => return Err(TraceError::UnsupportedFormat { path: display }),
    };
    Ok(if trace.id.is_empty() { trace.with_id(stem) } else { trace })
}

/// Serializes a trace as CSV; reals use the shortest round-trip decimal form.
pub fn write_trace_csv(trace: &Trace) -> String {
    let mut out = String::from("time");
    for (name, _) in trace.channels() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, t) in trace.times.iter().enumerate() {
        write!(out, "{t}").unwrap();
        for series in trace.channels.values() {
            out.push(',');
            series.format_cell(i, &mut out);
        }
        out.push('\n');
    }
    out
}

pub fn write_trace_json(trace: &Trace) -> String {
    let signals: Map<String, Value> =
        trace.channels.iter().map(|(name, s)| (name.clone(), s.json_values())).collect();
    let mut doc = Map::new();
    doc.insert("id".into(), Value::from(trace.id.clone()));
    doc.insert("dt".into(), Value::from(trace.dt));
    doc.insert("signals".into(), Value::Object(signals));
    serde_json::to_string(&Value::Object(doc)).expect("trace JSON is always serializable")
}

/// Real-valued samples of an expression, one per trace sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedSignal(Vec<f64>);

impl EvaluatedSignal {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

/// Evaluates an expression pointwise. `deriv(s)[i] = (s[i] - s[i-1]) / dt`
/// with `deriv(s)[0] = 0`.
pub fn eval_expr(expr: &SignalExpr, trace: &Trace) -> Result<EvaluatedSignal, TraceError> {
    let values = eval_values(expr, trace)?;
    if let Some(index) = values.iter().position(|x| !x.is_finite()) {
        return Err(TraceError::NonFiniteResult { index });
    }
    Ok(EvaluatedSignal(values))
}

fn eval_values(expr: &SignalExpr, trace: &Trace) -> Result<Vec<f64>, TraceError> {
    Ok(match expr {
        SignalExpr::Signal(name) => trace.real(name)?.to_vec(),
        SignalExpr::Constant(c) => vec![*c; trace.len()],
        SignalExpr::Abs(inner) => {
            let mut v = eval_values(inner, trace)?;
            v.iter_mut().for_each(|x| *x = x.abs());
            v
        }
        SignalExpr::Deriv(name) => {
            let s = trace.real(name)?;
            let dt = trace.dt;
            std::iter::once(0.0).chain(s.windows(2).map(|w| (w[1] - w[0]) / dt)).collect()
        }
        SignalExpr::Binary(op, lhs, rhs) => {
            let lhs = eval_values(lhs, trace)?;
            let rhs = eval_values(rhs, trace)?;
            if *op == BinOp::Div {
                if let Some(index) = rhs.iter().position(|&x| x == 0.0) {
                    return Err(TraceError::DivisionByZero { index });
                }
            }
            lhs.iter()
                .zip(&rhs)
                .map(|(&a, &b)| match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                })
                .collect()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_spec;

    fn spec() -> Specification {
        parse_spec(
            "signal speed : real
             signal surface : enum {track, offroad}
             signal done : bool
             signal x : real
             signal y : real
             signal phi : real",
        )
        .unwrap()
    }

    fn real_trace(dt: f64, cols: &[(&str, Vec<f64>)]) -> Trace {
        let n = cols[0].1.len();
        let channels = cols.iter().map(|(k, v)| (k.to_string(), Series::Real(v.clone()))).collect();
        Trace::new("t", (0..n).map(|i| i as f64 * dt).collect(), channels).unwrap()
    }

    #[test]
    fn loads_csv() {
        let t = load_trace_csv(b"time,speed\n0,850\n1,870\n2,860\n", &spec()).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.dt(), 1.0);
        assert_eq!(t.real("speed").unwrap(), [850.0, 870.0, 860.0]);
    }

    #[test]
    fn csv_mixed_kinds_and_crlf() {
        let csv = b"time,surface,done\r\n0,track,false\r\n0.5,offroad,0\r\n1.0,track,1\r\n";
        let t = load_trace_csv(csv, &spec()).unwrap();
        assert_eq!(t.dt(), 0.5);
        assert_eq!(t.series("done").unwrap(), &Series::Bool(vec![false, false, true]));
        match t.series("surface").unwrap() {
            Series::Enum { values, .. } => assert_eq!(values, &[0, 1, 0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_errors() {
        let s = spec();
        let err = load_trace_csv(b"time,surface\n0,track\n1,grass\n", &s).unwrap_err();
        assert_eq!(
            err,
            TraceError::UndeclaredVariant { row: 3, column: "surface".into(), variant: "grass".into() }
        );
        let err = load_trace_csv(b"time,speed\n0,1\n1,2\n5,3\n", &s).unwrap_err();
        assert!(matches!(err, TraceError::NonUniformSampling { row: 4, .. }), "{err}");
        let err = load_trace_csv(b"time,velocity\n0,1\n1,2\n", &s).unwrap_err();
        assert!(matches!(err, TraceError::UnknownColumn { index: 2, .. }));
        let err = load_trace_csv(b"time,speed\n0,1\n1\n", &s).unwrap_err();
        assert_eq!(err, TraceError::RowLength { row: 3, expected: 2, found: 1 });
        let err = load_trace_csv(b"time,speed\n0,1\n", &s).unwrap_err();
        assert_eq!(err, TraceError::TooFewSamples { found: 1 });
        let err = load_trace_csv(b"t,speed\n0,1\n1,1\n", &s).unwrap_err();
        assert!(matches!(err, TraceError::MissingTimeColumn { .. }));
        let err = load_trace_csv(b"time,speed\n0,1\n1,nan\n", &s).unwrap_err();
        assert!(matches!(err, TraceError::NonFinite { row: 3, .. }));
        let err = load_trace_csv(b"time,done\n0,yes\n1,no\n", &s).unwrap_err();
        assert!(matches!(err, TraceError::BadValue { row: 2, .. }));
        let err = load_trace_csv(b"time,speed\n1,1\n0,1\n", &s).unwrap_err();
        assert!(matches!(err, TraceError::NonIncreasingTime { .. }));
    }

    #[test]
    fn loads_json() {
        let t = load_trace_json(br#"{"id":"t1","dt":0.1,"signals":{"x":[0,0.1,0.2]}}"#, &spec()).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.id(), "t1");
        assert_eq!(t.dt(), 0.1);
    }

    #[test]
    fn json_errors() {
        let s = spec();
        let err = load_trace_json(br#"{"id":"t","dt":1,"signals":{"x":[0,1,2],"y":[0,1]}}"#, &s).unwrap_err();
        assert!(matches!(err, TraceError::RaggedSignals { .. }));
        assert!(err.to_string().contains("ragged signals"));
        let err = load_trace_json(br#"{"id":"t","dt":0,"signals":{"x":[0,1]}}"#, &s).unwrap_err();
        assert!(err.to_string().contains("nonpositive dt"));
        let err = load_trace_json(br#"{"id":"t","dt":1,"signals":{"surface":["track","grass"]}}"#, &s).unwrap_err();
        assert!(matches!(err, TraceError::UndeclaredVariant { row: 1, .. }));
        let err = load_trace_json(br#"{"dt":1,"signals":{"x":[0]}}"#, &s).unwrap_err();
        assert_eq!(err, TraceError::TooFewSamples { found: 1 });
    }

    #[test]
    fn writers_round_trip() {
        let csv = b"time,speed,surface,done\n0,850.25,track,true\n0.1,0.30000000000000004,offroad,false\n0.2,-1,track,true\n";
        let t = load_trace_csv(csv, &spec()).unwrap();
        let again = load_trace_csv(write_trace_csv(&t).as_bytes(), &spec()).unwrap();
        assert_eq!(again, t);
        let from_json = load_trace_json(write_trace_json(&t.clone().with_id("a")).as_bytes(), &spec()).unwrap();
        assert_eq!(from_json.series("speed").unwrap(), t.series("speed").unwrap());
        assert_eq!(from_json.series("surface").unwrap(), t.series("surface").unwrap());
    }

    #[test]
    fn derivative_is_backward_difference() {
        let t = real_trace(0.5, &[("phi", vec![0.0, 0.1, 0.3])]);
        let d = eval_expr(&SignalExpr::deriv("phi"), &t).unwrap();
        let v = d.values();
        assert_eq!(v[0], 0.0);
        assert!((v[1] - 0.2).abs() < 1e-12);
        assert!((v[2] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn abs_of_constant() {
        let t = real_trace(1.0, &[("x", vec![5.0, 6.0])]);
        let v = eval_expr(&SignalExpr::abs(SignalExpr::Constant(-3.0)), &t).unwrap();
        assert_eq!(v.values(), [3.0, 3.0]);
    }

    #[test]
    fn division_by_zero_names_sample() {
        let t = real_trace(1.0, &[("x", vec![1.0, 2.0, 3.0]), ("y", vec![1.0, 0.0, 2.0])]);
        let e = SignalExpr::binary(BinOp::Div, SignalExpr::signal("x"), SignalExpr::signal("y"));
        assert_eq!(eval_expr(&e, &t).unwrap_err(), TraceError::DivisionByZero { index: 1 });
    }

    #[test]
    fn kind_errors() {
        let t = load_trace_csv(b"time,done\n0,true\n1,false\n", &spec()).unwrap();
        let err = eval_expr(&SignalExpr::signal("done"), &t).unwrap_err();
        assert!(matches!(err, TraceError::KindMismatch { .. }));
        let err = eval_expr(&SignalExpr::signal("speed"), &t).unwrap_err();
        assert_eq!(err, TraceError::MissingSignal { name: "speed".into() });
    }

    #[test]
    fn overflow_is_reported() {
        let t = real_trace(1.0, &[("x", vec![1e308, 1.0])]);
        let e = SignalExpr::binary(BinOp::Mul, SignalExpr::signal("x"), SignalExpr::Constant(10.0));
        assert_eq!(eval_expr(&e, &t).unwrap_err(), TraceError::NonFiniteResult { index: 0 });
    }
}
