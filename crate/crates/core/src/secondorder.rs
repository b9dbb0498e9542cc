//! Second-order operators: derived ranked lists over query results.
//!
//! `recent` filters newly added e-prints, `most_popular` walks the
//! also-read statistics of the top matching papers, and `most_cited`
//! counts citations from recently added matching papers. All three are
//! pure functions over immutable snapshots.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Days, NaiveDate};

use crate::corpus::{CorpusSnapshot, Kind, RecordId};
use crate::index::IndexSnapshot;
use crate::query::{evaluate_query, QueryAst};
use crate::readstats::CoReadStats;
use crate::refgraph::{count_citations, CitationGraph};
use crate::{Error, Result, SeedOrder, Thresholds};

/// The "previous three months" window for most_cited, in days.
pub const MOST_CITED_WINDOW_DAYS: u64 = 91;

/// Nominal start of the all-time window reported by `most_popular`.
const CORPUS_EPOCH: NaiveDate = match NaiveDate::from_ymd_opt(1900, 1, 1) {
    Some(d) => d,
    None => unreachable!(),
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ListKind {
    Recent,
    MostPopular,
    MostCited,
}

impl ListKind {
    pub fn heading(&self) -> &'static str {
        match self {
            ListKind::Recent => "RECENT",
            ListKind::MostPopular => "MOST POPULAR",
            ListKind::MostCited => "MOST CITED",
        }
    }
}

/// A capped, ordered result list produced by one operator.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub kind: ListKind,
    pub entries: Vec<(RecordId, f64)>,
    pub generated_at: NaiveDate,
    pub window: (NaiveDate, NaiveDate),
}

/// Newly added e-prints matching the query: records with
/// since < date_added <= now and kind = e-print, sorted by
/// (date_added desc, relevance desc, id asc), capped.
pub fn recent(
    q: &QueryAst,
    corpus: &CorpusSnapshot,
    idx: &IndexSnapshot,
    since: NaiveDate,
    now: NaiveDate,
    thresholds: &Thresholds,
) -> Result<RankedList> {
    if since > now {
        return Err(Error::InvalidWindow { start: since, end: now });
    }
    let scored: BTreeMap<RecordId, f64> = evaluate_query(q, idx).into_iter().collect();
    let mut hits: Vec<(NaiveDate, f64, RecordId)> = scored
        .iter()
        .filter_map(|(id, score)| {
            let record = corpus.get(id).ok()?;
            (record.kind == Kind::Eprint && record.date_added > since && record.date_added <= now)
                .then(|| (record.date_added, *score, id.clone()))
        })
        .collect();
    hits.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then_with(|| b.1.total_cmp(&a.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    hits.truncate(thresholds.list_cap);
    Ok(RankedList {
        kind: ListKind::Recent,
        entries: hits.into_iter().map(|(_, score, id)| (id, score)).collect(),
        generated_at: now,
        window: (since, now),
    })
}

/// Papers most read alongside the query's top matches.
///
/// The seed set is the top `seed_cap` matching papers (by distinct-session
/// reads, or by recency when configured), collapsed to identity groups.
/// Each seed's also-read pair counts accumulate into candidate scores;
/// the seeds themselves are removed from the result. Candidates need not
/// match the query.
pub fn most_popular(
    q: &QueryAst,
    corpus: &CorpusSnapshot,
    idx: &IndexSnapshot,
    stats: &CoReadStats,
    now: NaiveDate,
    thresholds: &Thresholds,
) -> RankedList {
    let matches = evaluate_query(q, idx);

    let mut seed_records: Vec<&RecordId> = matches.iter().map(|(id, _)| id).collect();
    match thresholds.seed_order {
        SeedOrder::Reads => seed_records.sort_by(|a, b| {
            let (ra, rb) = (stats.read_count(a), stats.read_count(b));
            rb.cmp(&ra)
                .then_with(|| date_added(corpus, b).cmp(&date_added(corpus, a)))
                .then_with(|| a.cmp(b))
        }),
        SeedOrder::Recency => seed_records.sort_by(|a, b| {
            date_added(corpus, b).cmp(&date_added(corpus, a)).then_with(|| a.cmp(b))
        }),
    }

    let mut seed_groups: Vec<RecordId> = Vec::new();
    for id in seed_records {
        let Ok(rep) = corpus.group_rep(id) else { continue };
        if !seed_groups.contains(&rep) {
            seed_groups.push(rep);
        }
        if seed_groups.len() == thresholds.seed_cap {
            break;
        }
    }
    let seed_set: BTreeSet<&RecordId> = seed_groups.iter().collect();

    let mut scores: BTreeMap<RecordId, u64> = BTreeMap::new();
    for ((a, b), count) in stats.pairs() {
        if seed_set.contains(a) {
            *scores.entry(b.clone()).or_insert(0) += u64::from(*count);
        }
        if seed_set.contains(b) {
            *scores.entry(a.clone()).or_insert(0) += u64::from(*count);
        }
    }
    for seed in &seed_groups {
        scores.remove(seed);
    }

    let mut entries: Vec<(RecordId, f64)> =
        scores.into_iter().map(|(id, score)| (id, score as f64)).collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries.truncate(thresholds.list_cap);
    RankedList {
        kind: ListKind::MostPopular,
        entries,
        generated_at: now,
        window: (CORPUS_EPOCH, now),
    }
}

/// Works cited by query-matching papers added in the previous three
/// months. Cited works need not match the query; concordant pairs count
/// once on both sides.
pub fn most_cited(
    q: &QueryAst,
    corpus: &CorpusSnapshot,
    idx: &IndexSnapshot,
    graph: &CitationGraph,
    now: NaiveDate,
    thresholds: &Thresholds,
) -> RankedList {
    let start = now - Days::new(MOST_CITED_WINDOW_DAYS);
    let matches = evaluate_query(q, idx);
    let citing: Vec<RecordId> = matches
        .into_iter()
        .filter_map(|(id, _)| {
            let record = corpus.get(&id).ok()?;
            (record.date_added > start && record.date_added <= now).then_some(id)
        })
        .collect();

    let mut entries: Vec<(RecordId, f64)> = count_citations(corpus, graph, citing.iter(), None)
        .into_iter()
        .map(|(id, count)| (id, count as f64))
        .collect();
    entries.truncate(thresholds.list_cap);
    RankedList {
        kind: ListKind::MostCited,
        entries,
        generated_at: now,
        window: (start, now),
    }
}

fn date_added(corpus: &CorpusSnapshot, id: &RecordId) -> NaiveDate {
    corpus.get(id).map(|r| r.date_added).unwrap_or(CORPUS_EPOCH)
}
