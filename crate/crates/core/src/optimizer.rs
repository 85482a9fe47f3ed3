//! Maximizing the success probability over the transmission roots of a given
//! ancilla photon-number set.
//!
//! The gate condition only holds where the coefficient matrix is singular, so
//! the feasible transmissions form a finite set: every root is evaluated and
//! the largest probability is reported.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::determinants::NodeSet;
use crate::error::{Error, Result};
use crate::gate::{check_size, find_transmission, solve_with, GateSolution, SearchConfig, SolutionRecord};

/// A root at which no gate could be built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRoot {
    #[serde(rename = "T_re")]
    pub t_re: f64,
    #[serde(rename = "T_im")]
    pub t_im: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub nodes: Vec<u32>,
    pub config: SearchConfig,
    /// One solution per usable root, ordered by transmission.
    pub entries: Vec<SolutionRecord>,
    /// Index into `entries` of the largest probability; first wins on ties.
    pub best: Option<usize>,
    pub skipped: Vec<SkippedRoot>,
}

impl ScanReport {
    pub fn best_entry(&self) -> Option<&SolutionRecord> {
        self.best.map(|i| &self.entries[i])
    }
}

fn solutions(nodes: &NodeSet, config: &SearchConfig) -> Result<(Vec<GateSolution>, Vec<SkippedRoot>)> {
    check_size(nodes.len())?;
    let roots = find_transmission(nodes, config)?;
    let outcomes: Vec<_> = roots
        .par_iter()
        .map(|root| (root, solve_with(nodes, &root.beam_splitter, config.det_tolerance)))
        .collect();

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (root, outcome) in outcomes {
        match outcome {
            Ok(sol) => entries.push(sol),
            Err(e @ (Error::DegenerateCofactors { .. } | Error::NotAGate { .. })) => {
                skipped.push(SkippedRoot {
                    t_re: root.t.re,
                    t_im: root.t.im,
                    reason: e.to_string(),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok((entries, skipped))
}

/// Index of the largest `p`; the first wins on ties.
fn argmax_p(ps: impl Iterator<Item = f64>) -> Option<usize> {
    ps.enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, p)| match best {
            Some((_, q)) if q >= p => best,
            _ => Some((i, p)),
        })
        .map(|(i, _)| i)
}

/// Evaluates the success probability at every transmission root of `nodes`.
pub fn scan_nodes(nodes: &NodeSet, config: &SearchConfig) -> Result<ScanReport> {
    let (solved, skipped) = solutions(nodes, config)?;
    let entries: Vec<SolutionRecord> = solved.iter().map(GateSolution::record).collect();
    Ok(ScanReport {
        nodes: nodes.values().to_vec(),
        config: *config,
        best: argmax_p(entries.iter().map(|e| e.p)),
        entries,
        skipped,
    })
}

/// The full solution at the best root of `nodes`, if any.
pub fn best_solution(nodes: &NodeSet, config: &SearchConfig) -> Result<Option<GateSolution>> {
    let (mut solved, _) = solutions(nodes, config)?;
    Ok(argmax_p(solved.iter().map(|s| s.p)).map(|i| solved.swap_remove(i)))
}

/// How the ancilla photon numbers are chosen for each `N` in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStrategy {
    /// `n_l = 0..N-1`.
    Minimal,
    /// `n_l = s..s+N-1`.
    Shifted(u32),
}

impl NodeStrategy {
    pub fn nodes(&self, n: usize) -> NodeSet {
        match *self {
            NodeStrategy::Minimal => NodeSet::minimal(n),
            NodeStrategy::Shifted(s) => {
                NodeSet::new((s..s + n as u32).collect()).expect("consecutive values are increasing")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub roots: usize,
    pub best: Option<SolutionRecord>,
}

/// Best solution for each `N` in `n_min..=n_max`.
pub fn sweep(n_min: usize, n_max: usize, strategy: NodeStrategy, config: &SearchConfig) -> Result<Vec<SweepRow>> {
    if n_min == 0 || n_min > n_max {
        return Err(Error::InvalidArgument(format!(
            "sweep range {n_min}..={n_max} needs 1 <= n_min <= n_max"
        )));
    }
    check_size(n_max)?;
    (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            let report = scan_nodes(&strategy.nodes(n), config)?;
            Ok(SweepRow {
                n,
                roots: report.entries.len() + report.skipped.len(),
                best: report.best_entry().cloned(),
            })
        })
        .collect()
}
