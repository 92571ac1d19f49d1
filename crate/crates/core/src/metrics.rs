//! Fleet-level robustness metrics and pre/post comparison.
//!
//! * TRV is the sum of per-trace robustness values.
//! * LRV is the smallest per-trace robustness value.
//! * Satisfaction counts traces with `rho >= 0`.

use serde::Serialize;
use thiserror::Error;

use crate::engine::RobustnessResult;
use crate::stats::{mann_whitney_u, Method, StatsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("rule `{0}`: no traces")]
    NoTraces(String),
    #[error("expected results for rule `{expected}`, found `{found}`")]
    RuleMismatch { expected: String, found: String },
    #[error("significance level {0} must lie strictly between 0 and 1")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FleetReport {
    pub rule_name: String,
    pub n_traces: usize,
    pub satisfaction_pct: f64,
    pub trv: f64,
    pub lrv: f64,
    /// Per-trace robustness, in input order.
    pub rho_values: Vec<f64>,
}

impl FleetReport {
    pub fn from_rho(rule_name: impl Into<String>, rho_values: Vec<f64>) -> Result<Self, MetricsError> {
        let rule_name = rule_name.into();
        if rho_values.is_empty() {
            return Err(MetricsError::NoTraces(rule_name));
        }
        let n = rho_values.len();
        let satisfied = rho_values.iter().filter(|&&r| r >= 0.0).count();
        Ok(FleetReport {
            rule_name,
            n_traces: n,
            satisfaction_pct: 100.0 * satisfied as f64 / n as f64,
            trv: rho_values.iter().sum(),
            lrv: rho_values.iter().copied().fold(f64::INFINITY, f64::min),
            rho_values,
        })
    }

    /// Report over the concatenation of both trace sets.
    pub fn merge(&self, other: &FleetReport) -> Result<FleetReport, MetricsError> {
        check_rule(&self.rule_name, &other.rule_name)?;
        let mut rho = self.rho_values.clone();
        rho.extend_from_slice(&other.rho_values);
        FleetReport::from_rho(self.rule_name.clone(), rho)
    }

    pub fn satisfied_count(&self) -> usize {
        self.rho_values.iter().filter(|&&r| r >= 0.0).count()
    }
}

fn check_rule(expected: &str, found: &str) -> Result<(), MetricsError> {
    if expected != found {
        return Err(MetricsError::RuleMismatch { expected: expected.to_string(), found: found.to_string() });
    }
    Ok(())
}

pub fn fleet_report(rule: &str, results: &[RobustnessResult]) -> Result<FleetReport, MetricsError> {
    for r in results {
        check_rule(rule, &r.rule_name)?;
    }
    FleetReport::from_rho(rule, results.iter().map(|r| r.rho).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub rule_name: String,
    /// U statistic of the pre-analysis sample.
    pub u_statistic: f64,
    /// Two-sided.
    pub p_value: f64,
    pub method: Method,
    pub alpha: f64,
    pub significant: bool,
    /// Relative change in satisfaction percentage; `None` when the
    /// pre-analysis satisfaction is zero.
    pub satisfaction_change_pct: Option<f64>,
}

/// `100 * (post - pre) / pre`, or `None` when `pre` is zero.
pub fn percent_change(pre_pct: f64, post_pct: f64) -> Option<f64> {
    if pre_pct == 0.0 {
        None
    } else {
        Some(100.0 * (post_pct - pre_pct) / pre_pct)
    }
}

/// Whole-percent rendering with sign, e.g. `+177%`; `n/a` when undefined.
pub fn format_percent_change(change: Option<f64>) -> String {
    match change {
        Some(c) => format!("{c:+.0}%"),
        None => "n/a".to_string(),
    }
}

pub fn compare_fleets(
    rule: &str,
    pre: &FleetReport,
    post: &FleetReport,
    alpha: f64,
) -> Result<CompareReport, MetricsError> {
    check_rule(rule, &pre.rule_name)?;
    check_rule(rule, &post.rule_name)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MetricsError::InvalidAlpha(alpha));
    }
    let test = mann_whitney_u(&pre.rho_values, &post.rho_values)?;
    Ok(CompareReport {
        rule_name: rule.to_string(),
        u_statistic: test.u,
        p_value: test.p_value,
        method: test.method,
        alpha,
        significant: test.p_value < alpha,
        satisfaction_change_pct: percent_change(pre.satisfaction_pct, post.satisfaction_pct),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Verdict;

    fn results(rule: &str, rho: &[f64]) -> Vec<RobustnessResult> {
        rho.iter()
            .map(|&r| RobustnessResult { rule_name: rule.into(), rho: r, verdict: Verdict::from_rho(r) })
            .collect()
    }

    #[test]
    fn three_trace_fleet() {
        let report = fleet_report("r", &results("r", &[1.5, -0.5, 2.0])).unwrap();
        assert_eq!(report.trv, 3.0);
        assert_eq!(report.lrv, -0.5);
        assert!((report.satisfaction_pct - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(format!("{:.1}", report.satisfaction_pct), "66.7");
        assert_eq!(report.rho_values, [1.5, -0.5, 2.0]);
    }

    #[test]
    fn all_satisfied_fleet() {
        let report = FleetReport::from_rho("timed_loop", vec![1.0; 100]).unwrap();
        assert_eq!((report.trv, report.lrv, report.satisfaction_pct), (100.0, 1.0, 100.0));
    }

    #[test]
    fn exact_satisfaction_counts() {
        let report = FleetReport::from_rho("r", vec![0.0]).unwrap();
        assert_eq!((report.trv, report.lrv, report.satisfaction_pct), (0.0, 0.0, 100.0));
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        assert_eq!(fleet_report("r", &[]).unwrap_err(), MetricsError::NoTraces("r".into()));
        assert!(matches!(fleet_report("r", &results("s", &[1.0])), Err(MetricsError::RuleMismatch { .. })));
        let a = FleetReport::from_rho("a", vec![1.0]).unwrap();
        let b = FleetReport::from_rho("b", vec![1.0]).unwrap();
        assert!(compare_fleets("a", &a, &b, 0.05).is_err());
        assert!(matches!(compare_fleets("a", &a, &a, 1.0), Err(MetricsError::InvalidAlpha(_))));
    }

    #[test]
    fn percent_change_follows_pre_relative_convention() {
        let change = percent_change(30.0, 83.0).unwrap();
        assert!((change - 176.666_666_666_666_66).abs() < 1e-9);
        assert_eq!(format!("{change:.1}"), "176.7");
        assert_eq!(format_percent_change(Some(change)), "+177%");

        assert_eq!(percent_change(8.0, 99.0), Some(1137.5));
        assert_eq!(format_percent_change(percent_change(8.0, 99.0)), "+1138%");

        assert_eq!(percent_change(0.0, 50.0), None);
        assert_eq!(format_percent_change(None), "n/a");
    }

    #[test]
    fn identical_fleets_compare_null() {
        let fleet = FleetReport::from_rho("r", vec![0.5, -1.0, 2.0, 3.5, 0.25, 1.0]).unwrap();
        let cmp = compare_fleets("r", &fleet, &fleet, 0.05).unwrap();
        assert_eq!(cmp.satisfaction_change_pct, Some(0.0));
        assert!(cmp.p_value > 0.99);
        assert!(!cmp.significant);
    }

    #[test]
    fn separated_fleets_are_significant() {
        let pre = FleetReport::from_rho("r", (0..40).map(|i| -1.0 - i as f64).collect()).unwrap();
        let post = FleetReport::from_rho("r", (0..40).map(|i| 1.0 + i as f64).collect()).unwrap();
        let cmp = compare_fleets("r", &pre, &post, 0.05).unwrap();
        assert!(cmp.significant);
        assert_eq!(cmp.u_statistic, 0.0);
        assert_eq!(cmp.satisfaction_change_pct, None);
    }

    #[test]
    fn merge_is_concatenation() {
        let a = FleetReport::from_rho("r", vec![1.0, -2.0]).unwrap();
        let b = FleetReport::from_rho("r", vec![0.5]).unwrap();
        let m = a.merge(&b).unwrap();
        assert_eq!(m.trv, a.trv + b.trv);
        assert_eq!(m.lrv, a.lrv.min(b.lrv));
        assert_eq!(m.n_traces, 3);
    }
}
