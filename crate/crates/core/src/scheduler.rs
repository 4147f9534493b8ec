//! The equality-saturation loop.

use serde::Serialize;

use crate::egraph::EGraph;
use crate::error::{Error, Result};
use crate::rules::{apply_matches, search_rule, Rule};

pub const DEFAULT_NODE_LIMIT: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    /// Maximum number of e-nodes the graph may hold.
    pub node_limit: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            node_limit: DEFAULT_NODE_LIMIT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleMatches {
    pub rule: String,
    pub matches: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationReport {
    pub rules: Vec<RuleMatches>,
    pub new_nodes: usize,
    pub merges: usize,
    pub classes_after: usize,
    pub nodes_after: usize,
}

impl IterationReport {
    pub fn changed(&self) -> bool {
        self.new_nodes > 0 || self.merges > 0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub iterations_run: usize,
    pub saturated: bool,
    pub per_iteration: Vec<IterationReport>,
}

fn check_budget(egraph: &EGraph, config: &RunConfig) -> Result<()> {
    let nodes = egraph.node_count();
    if nodes > config.node_limit {
        return Err(Error::NodeBudgetExceeded {
            limit: config.node_limit,
            nodes,
        });
    }
    Ok(())
}

/// Runs up to `limit` iterations of match-all, apply-all, rebuild. Stops
/// early once an iteration creates no node and performs no merge.
pub fn run(
    egraph: &mut EGraph,
    rules: &[Rule],
    limit: usize,
    config: &RunConfig,
) -> Result<RunReport> {
    if limit == 0 {
        return Err(Error::InvalidRunLimit);
    }
    egraph.rebuild();
    let mut report = RunReport::default();
    for iteration in 0..limit {
        let nodes_before = egraph.nodes_created();
        let merges_before = egraph.merge_count();

        let matches: Vec<_> = rules.iter().map(|r| search_rule(egraph, r)).collect();
        let in_iteration = |e: Error| Error::Iteration {
            iteration: iteration + 1,
            source: Box::new(e),
        };
        for (rule, found) in rules.iter().zip(&matches) {
            apply_matches(egraph, rule, found).map_err(in_iteration)?;
            check_budget(egraph, config).map_err(in_iteration)?;
        }
        egraph.rebuild();

        let stats = IterationReport {
            rules: rules
                .iter()
                .zip(&matches)
                .map(|(rule, found)| RuleMatches {
                    rule: rule.name.clone(),
                    matches: found.len(),
                })
                .collect(),
            new_nodes: egraph.nodes_created() - nodes_before,
            merges: egraph.merge_count() - merges_before,
            classes_after: egraph.class_count(),
            nodes_after: egraph.node_count(),
        };
        let changed = stats.changed();
        report.per_iteration.push(stats);
        report.iterations_run = iteration + 1;
        if !changed {
            report.saturated = true;
            break;
        }
    }
    Ok(report)
}
