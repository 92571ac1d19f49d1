use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use stlmon_core::metrics::{format_percent_change, CompareReport, FleetReport};

use crate::commands::Evaluated;

fn to_text(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    text
}

pub fn check_json(evaluated: &[Evaluated]) -> String {
    let rows: Vec<Value> = evaluated
        .iter()
        .flat_map(|e| {
            e.results.iter().map(|r| {
                json!({
                    "trace": e.path.display().to_string(),
                    "rule": r.rule_name,
                    "rho": r.rho,
                    "verdict": r.verdict.to_string(),
                })
            })
        })
        .collect();
    to_text(&Value::Array(rows))
}

pub fn check_table(evaluated: &[Evaluated]) -> String {
    let rows: Vec<[String; 4]> = evaluated
        .iter()
        .flat_map(|e| {
            e.results.iter().map(|r| {
                [e.path.display().to_string(), r.rule_name.clone(), r.rho.to_string(), r.verdict.to_string()]
            })
        })
        .collect();
    let header = ["trace", "rule", "rho", "verdict"].map(String::from);
    let mut widths = [0; 4];
    for row in std::iter::once(&header).chain(&rows) {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(&header).chain(&rows) {
        let line = format!("{:<w0$}  {:<w1$}  {:>w2$}  {}", row[0], row[1], row[2], row[3], w0 = widths[0], w1 = widths[1], w2 = widths[2]);
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn fleet_value(r: &FleetReport) -> Value {
    json!({
        "n": r.n_traces,
        "satisfaction_pct": r.satisfaction_pct,
        "trv": r.trv,
        "lrv": r.lrv,
        "rho": r.rho_values,
    })
}

pub fn report_json(reports: &[FleetReport]) -> String {
    let doc: Map<String, Value> = reports.iter().map(|r| (r.rule_name.clone(), fleet_value(r))).collect();
    to_text(&Value::Object(doc))
}

const ROW_LABELS: [&str; 3] = ["Satisfaction Percentage", "TRV (average performance)", "LRV (worst violation)"];

fn metric_cells(r: &FleetReport) -> [String; 3] {
    [format!("{:.1}%", r.satisfaction_pct), format!("{:.3}", r.trv), format!("{:.3}", r.lrv)]
}

pub fn report_table(reports: &[FleetReport]) -> String {
    let mut out = String::new();
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "{} (n = {})", r.rule_name, r.n_traces).unwrap();
        for (label, cell) in ROW_LABELS.iter().zip(metric_cells(r)) {
            writeln!(out, "  {label:<27}{cell:>12}").unwrap();
        }
    }
    out
}

pub fn compare_json(rows: &[(FleetReport, FleetReport, CompareReport)]) -> String {
    let doc: Map<String, Value> = rows
        .iter()
        .map(|(pre, post, cmp)| {
            let entry = json!({
                "pre": fleet_value(pre),
                "post": fleet_value(post),
                "u": cmp.u_statistic,
                "p_value": cmp.p_value,
                "method": cmp.method,
                "alpha": cmp.alpha,
                "significant": cmp.significant,
                "satisfaction_change_pct": cmp.satisfaction_change_pct,
                "satisfaction_change": format_percent_change(cmp.satisfaction_change_pct),
            });
            (cmp.rule_name.clone(), entry)
        })
        .collect();
    to_text(&Value::Object(doc))
}

pub fn compare_table(rows: &[(FleetReport, FleetReport, CompareReport)]) -> String {
    let mut out = String::new();
    for (i, (pre, post, cmp)) in rows.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "{} (n = {} vs {})", cmp.rule_name, pre.n_traces, post.n_traces).unwrap();
        writeln!(out, "  {:<27}{:>14}{:>15}", "", "Pre-Analysis", "Post-Analysis").unwrap();
        for ((label, a), b) in ROW_LABELS.iter().zip(metric_cells(pre)).zip(metric_cells(post)) {
            writeln!(out, "  {label:<27}{a:>14}{b:>15}").unwrap();
        }
        writeln!(out, "  change in satisfaction: {}", format_percent_change(cmp.satisfaction_change_pct)).unwrap();
        let verdict = if cmp.significant { "significant" } else { "not significant" };
        writeln!(out, "  Mann-Whitney U = {}, p = {:.3e} ({verdict} at alpha = {})", cmp.u_statistic, cmp.p_value, cmp.alpha)
            .unwrap();
    }
    out
}
