//! Structured run reports.

use serde::Serialize;

use crate::miner::{MiningConfig, MiningMetrics, Variant};
use crate::model::{PatternTerm, TrajectoryPattern};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigReport {
    pub k: usize,
    pub variant: Option<String>,
    pub ti: bool,
    pub tu: bool,
    pub width_prune: bool,
    pub depth_prune: bool,
    pub backend: String,
    pub id_base: u32,
}

impl ConfigReport {
    pub fn new(config: &MiningConfig, variant: Option<Variant>, backend: &str, id_base: u32) -> Self {
        Self {
            k: config.k,
            variant: variant.map(|v| v.name().to_string()),
            ti: config.ti,
            tu: config.tu,
            width_prune: config.width_prune,
            depth_prune: config.depth_prune,
            backend: backend.to_string(),
            id_base,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TermReport {
    pub cells: Vec<u64>,
    pub activities: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatternReport {
    pub rank: usize,
    pub pattern: String,
    pub terms: Vec<TermReport>,
    /// Exact text (`n/d` for rationals).
    pub score: String,
    pub score_f64: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub recursive_calls: u64,
    pub candidates_generated: u64,
    pub insertions: u64,
    pub width_pruned: u64,
    pub depth_pruned: u64,
    pub preinserted: u64,
    /// `[call index, threshold]` change points.
    pub threshold_trace: Vec<(u64, String)>,
}

impl MetricsReport {
    pub fn new<S: Scalar>(m: &MiningMetrics<S>) -> Self {
        Self {
            recursive_calls: m.recursive_calls,
            candidates_generated: m.candidates_generated,
            insertions: m.insertions,
            width_pruned: m.width_pruned,
            depth_pruned: m.depth_pruned,
            preinserted: m.preinserted,
            threshold_trace: m.threshold_trace.iter().map(|(c, t)| (*c, t.render())).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub config: ConfigReport,
    pub results: Vec<PatternReport>,
    pub metrics: MetricsReport,
    pub elapsed_ms: f64,
}

fn render_term(t: &PatternTerm, id_base: u32) -> String {
    let cells: Vec<String> = t
        .cells()
        .iter()
        .map(|c| format!("p{}", u64::from(c.0) + u64::from(id_base)))
        .collect();
    format!("({{{}}},{{{}}})", cells.join(","), t.activities().join(","))
}

/// Pattern text with cell ids shifted by `id_base`.
pub fn render_pattern(p: &TrajectoryPattern, id_base: u32) -> String {
    let terms: String = p.terms().iter().map(|t| render_term(t, id_base)).collect();
    format!("<{terms}>")
}

pub fn results_report<S: Scalar>(results: &[(TrajectoryPattern, S)], id_base: u32) -> Vec<PatternReport> {
    results
        .iter()
        .enumerate()
        .map(|(i, (p, s))| PatternReport {
            rank: i + 1,
            pattern: render_pattern(p, id_base),
            terms: p
                .terms()
                .iter()
                .map(|t| TermReport {
                    cells: t.cells().iter().map(|c| u64::from(c.0) + u64::from(id_base)).collect(),
                    activities: t.activities().to_vec(),
                })
                .collect(),
            score: s.render(),
            score_f64: s.to_f64(),
        })
        .collect()
}

impl RunReport {
    pub fn new<S: Scalar>(
        config: ConfigReport,
        results: &[(TrajectoryPattern, S)],
        metrics: &MiningMetrics<S>,
        elapsed_ms: f64,
    ) -> Self {
        Self {
            results: results_report(results, config.id_base),
            config,
            metrics: MetricsReport::new(metrics),
            elapsed_ms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;

    #[test]
    fn renders_with_id_base() {
        let p = t_example();
        assert_eq!(render_pattern(&p, 0), "<({p1,p2},{a,b})({p5},{g})>");
        assert_eq!(render_pattern(&p, 1), "<({p2,p3},{a,b})({p6},{g})>");
        assert_eq!(render_pattern(&p, 0), p.to_string());
    }

    #[test]
    fn report_serializes_scores_exactly() {
        let config = MiningConfig::full(1);
        let mut metrics = MiningMetrics::<Q>::default();
        metrics.threshold_trace.push((0, q(0, 1)));
        metrics.threshold_trace.push((3, q(17, 10)));
        let report = RunReport::new(
            ConfigReport::new(&config, Some(Variant::Full), "exact", 0),
            &[(t_example(), q(17, 10))],
            &metrics,
            1.5,
        );
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(json["results"][0]["score"], "17/10");
        assert_eq!(json["results"][0]["rank"], 1);
        assert_eq!(json["results"][0]["terms"][0]["cells"][1], 2);
        assert_eq!(json["metrics"]["threshold_trace"][1][1], "17/10");
        assert_eq!(json["config"]["variant"], "full");
    }
}
