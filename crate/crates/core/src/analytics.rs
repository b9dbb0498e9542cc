//! Measurements over a corpus and its citation graph: the e-print share
//! of the top-cited works, and mean cites/reads split by e-print status.

use serde::Serialize;

use crate::corpus::{CorpusSnapshot, RecordId};
use crate::readstats::CoReadStats;
use crate::refgraph::CitationGraph;
use crate::{Error, Result};

/// Aggregate statistics over identity groups. Means are absent when the
/// corresponding partition is empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConcordanceStats {
    pub n_top: usize,
    pub fraction_eprinted: f64,
    pub mean_cites_eprinted: Option<f64>,
    pub mean_cites_not: Option<f64>,
    pub mean_reads_eprinted: Option<f64>,
    pub mean_reads_not: Option<f64>,
}

/// One row per identity group for external plotting.
#[derive(Debug, Clone, Serialize)]
pub struct GroupRow {
    pub group: RecordId,
    pub cites: usize,
    pub reads: u32,
    pub eprinted: bool,
}

/// Groups ranked by citation count (ties by id ascending).
fn ranked_groups(corpus: &CorpusSnapshot, graph: &CitationGraph) -> Vec<RecordId> {
    let mut reps = corpus.group_reps();
    reps.sort_by(|a, b| graph.in_count(b).cmp(&graph.in_count(a)).then_with(|| a.cmp(b)));
    reps
}

/// Fraction of the top-n most cited groups whose identity group contains
/// an e-print. Errors when the corpus has fewer than n groups.
pub fn eprint_fraction_top_cited(
    corpus: &CorpusSnapshot,
    graph: &CitationGraph,
    n: usize,
) -> Result<ConcordanceStats> {
    if n == 0 {
        return Err(Error::Validation("top-n must be at least 1".to_string()));
    }
    let ranked = ranked_groups(corpus, graph);
    if ranked.len() < n {
        return Err(Error::Validation(format!(
            "corpus has {} groups, need at least {n}",
            ranked.len()
        )));
    }
    let eprinted = ranked[..n]
        .iter()
        .filter(|rep| corpus.group_has_eprint(rep).unwrap_or(false))
        .count();
    Ok(ConcordanceStats {
        n_top: n,
        fraction_eprinted: eprinted as f64 / n as f64,
        ..ConcordanceStats::default()
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Mean citation count and mean distinct-session reads per group,
/// partitioned by whether the group contains an e-print.
pub fn reads_cites_by_eprint_status(
    corpus: &CorpusSnapshot,
    graph: &CitationGraph,
    stats: &CoReadStats,
) -> ConcordanceStats {
    let mut cites_eprinted = Vec::new();
    let mut cites_not = Vec::new();
    let mut reads_eprinted = Vec::new();
    let mut reads_not = Vec::new();
    for rep in corpus.group_reps() {
        let cites = graph.in_count(&rep) as f64;
        let reads = f64::from(stats.read_count(&rep));
        if corpus.group_has_eprint(&rep).unwrap_or(false) {
            cites_eprinted.push(cites);
            reads_eprinted.push(reads);
        } else {
            cites_not.push(cites);
            reads_not.push(reads);
        }
    }
    ConcordanceStats {
        n_top: 0,
        fraction_eprinted: 0.0,
        mean_cites_eprinted: mean(&cites_eprinted),
        mean_cites_not: mean(&cites_not),
        mean_reads_eprinted: mean(&reads_eprinted),
        mean_reads_not: mean(&reads_not),
    }
}

/// Both measurements in one document.
pub fn concordance_stats(
    corpus: &CorpusSnapshot,
    graph: &CitationGraph,
    stats: &CoReadStats,
    n: usize,
) -> Result<ConcordanceStats> {
    let fraction = eprint_fraction_top_cited(corpus, graph, n)?;
    let means = reads_cites_by_eprint_status(corpus, graph, stats);
    Ok(ConcordanceStats {
        n_top: fraction.n_top,
        fraction_eprinted: fraction.fraction_eprinted,
        ..means
    })
}

/// Per-group rows for the optional CSV export, ordered by group id.
pub fn group_rows(
    corpus: &CorpusSnapshot,
    graph: &CitationGraph,
    stats: &CoReadStats,
) -> Vec<GroupRow> {
    corpus
        .group_reps()
        .into_iter()
        .map(|rep| GroupRow {
            cites: graph.in_count(&rep),
            reads: stats.read_count(&rep),
            eprinted: corpus.group_has_eprint(&rep).unwrap_or(false),
            group: rep,
        })
        .collect()
}
