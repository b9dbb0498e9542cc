//! Readership logs and also-read (co-read) statistics.
//!
//! Reads are counted per distinct session, and both reads and co-read
//! pairs aggregate over identity groups so an e-print read and a journal
//! read of the same work pool together.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusSnapshot, IngestReport, RecordId};
use crate::{Error, Result, Thresholds};

/// One readership event: a session touched a record at a point in time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ReadEvent {
    pub session: String,
    pub record: RecordId,
    pub at: DateTime<Utc>,
}

/// Parse a reads log: UTF-8 lines `session_id,record_id,ISO8601-timestamp`,
/// optional header detected by the literal "session". Events naming unknown
/// record ids are rejected per-line; duplicate (session, record) pairs keep
/// the first timestamp. An unreadable file is fatal.
pub fn ingest_reads(
    path: impl AsRef<Path>,
    corpus: &CorpusSnapshot,
) -> Result<(Vec<ReadEvent>, IngestReport)> {
    let file = fs::File::open(path)?;
    Ok(ingest_reads_from(BufReader::new(file), corpus)?)
}

pub fn ingest_reads_from<R: BufRead>(
    reader: R,
    corpus: &CorpusSnapshot,
) -> std::io::Result<(Vec<ReadEvent>, IngestReport)> {
    let mut events: Vec<ReadEvent> = Vec::new();
    let mut seen: BTreeSet<(String, RecordId)> = BTreeSet::new();
    let mut report = IngestReport::default();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if line_no == 1 && trimmed.contains("session") {
            continue; // header
        }
        let mut parts = trimmed.splitn(3, ',');
        let (session, id_str, ts_str) = match (parts.next(), parts.next(), parts.next()) {
            (Some(s), Some(i), Some(t)) => (s.trim(), i.trim(), t.trim()),
            _ => {
                report.rejected.push((line_no, "expected session,record,timestamp".to_string()));
                continue;
            }
        };
        if session.is_empty() {
            report.rejected.push((line_no, "empty session id".to_string()));
            continue;
        }
        let record = match RecordId::new(id_str) {
            Ok(id) => id,
            Err(err) => {
                report.rejected.push((line_no, err.to_string()));
                continue;
            }
        };
        if !corpus.contains(&record) {
            report.rejected.push((line_no, format!("unknown record id {record}")));
            continue;
        }
        let at = match DateTime::parse_from_rfc3339(ts_str) {
            Ok(dt) => dt.with_timezone(&Utc),
            Err(err) => {
                report.rejected.push((line_no, format!("invalid timestamp: {err}")));
                continue;
            }
        };
        if seen.insert((session.to_string(), record.clone())) {
            events.push(ReadEvent { session: session.to_string(), record, at });
            report.added += 1;
        }
        // repeat reads by the same session are counted once
    }
    Ok((events, report))
}

/// Canonical CSV form of an event list: header line, then events sorted by
/// (session, record, timestamp). Writing and re-ingesting round-trips.
pub fn canonical_reads_csv(events: &[ReadEvent]) -> String {
    let mut sorted: Vec<&ReadEvent> = events.iter().collect();
    sorted.sort();
    let mut out = String::from("session,record,timestamp\n");
    for e in sorted {
        out.push_str(&format!(
            "{},{},{}\n",
            e.session,
            e.record,
            e.at.to_rfc3339_opts(SecondsFormat::Secs, true)
        ));
    }
    out
}

/// Aggregated also-read statistics over identity groups.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoReadStats {
    /// Unordered group pair (smaller id first) -> distinct sessions reading both.
    pair_counts: BTreeMap<(RecordId, RecordId), u32>,
    /// Group -> distinct sessions that read any member.
    read_counts: BTreeMap<RecordId, u32>,
    rep_of: BTreeMap<RecordId, RecordId>,
}

impl CoReadStats {
    pub fn pair_count(&self, a: &RecordId, b: &RecordId) -> u32 {
        let (Some(ra), Some(rb)) = (self.rep_of.get(a), self.rep_of.get(b)) else { return 0 };
        let key = if ra <= rb { (ra.clone(), rb.clone()) } else { (rb.clone(), ra.clone()) };
        self.pair_counts.get(&key).copied().unwrap_or(0)
    }

    /// Distinct-session read count of an id's group.
    pub fn read_count(&self, id: &RecordId) -> u32 {
        self.rep_of
            .get(id)
            .and_then(|rep| self.read_counts.get(rep))
            .copied()
            .unwrap_or(0)
    }

    pub fn pairs(&self) -> &BTreeMap<(RecordId, RecordId), u32> {
        &self.pair_counts
    }

    pub fn read_counts(&self) -> &BTreeMap<RecordId, u32> {
        &self.read_counts
    }

    /// Top-k groups co-read with `x`'s group, by (count desc, id asc);
    /// `x`'s own group is excluded.
    pub fn also_read_neighbors(&self, x: &RecordId, k: usize) -> Result<Vec<(RecordId, u32)>> {
        let rep = self.rep_of.get(x).ok_or_else(|| Error::NotFound(x.to_string()))?;
        let mut neighbors: Vec<(RecordId, u32)> = self
            .pair_counts
            .iter()
            .filter_map(|((a, b), count)| {
                if a == rep {
                    Some((b.clone(), *count))
                } else if b == rep {
                    Some((a.clone(), *count))
                } else {
                    None
                }
            })
            .collect();
        neighbors.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
        neighbors.truncate(k);
        Ok(neighbors)
    }

    pub fn to_doc(&self) -> CoReadDoc {
        CoReadDoc {
            pairs: self.pair_counts.iter().map(|((a, b), c)| (a.clone(), b.clone(), *c)).collect(),
            reads: self.read_counts.iter().map(|(id, c)| (id.clone(), *c)).collect(),
            groups: self.rep_of.iter().map(|(id, rep)| (id.clone(), rep.clone())).collect(),
        }
    }

    pub fn from_doc(doc: CoReadDoc) -> Self {
        CoReadStats {
            pair_counts: doc.pairs.into_iter().map(|(a, b, c)| ((a, b), c)).collect(),
            read_counts: doc.reads.into_iter().collect(),
            rep_of: doc.groups.into_iter().collect(),
        }
    }
}

/// Serializable form of [`CoReadStats`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoReadDoc {
    pub pairs: Vec<(RecordId, RecordId, u32)>,
    pub reads: Vec<(RecordId, u32)>,
    pub groups: Vec<(RecordId, RecordId)>,
}

/// Compute co-read statistics. Every unordered pair of distinct groups a
/// session read increments that pair once; sessions reading more than
/// `s_max` records are discarded as robots.
pub fn compute_coread(
    events: &[ReadEvent],
    corpus: &CorpusSnapshot,
    thresholds: &Thresholds,
) -> CoReadStats {
    let mut stats = CoReadStats::default();
    for id in corpus.ids() {
        stats.rep_of.insert(id.clone(), corpus.group_rep(id).expect("record exists"));
    }

    let mut sessions: BTreeMap<&str, (BTreeSet<&RecordId>, BTreeSet<RecordId>)> = BTreeMap::new();
    for event in events {
        let Some(rep) = stats.rep_of.get(&event.record) else { continue };
        let entry = sessions.entry(&event.session).or_default();
        entry.0.insert(&event.record);
        entry.1.insert(rep.clone());
    }

    for (_, (records, groups)) in sessions {
        if records.len() > thresholds.s_max {
            continue; // robot
        }
        for group in &groups {
            *stats.read_counts.entry(group.clone()).or_insert(0) += 1;
        }
        let ordered: Vec<&RecordId> = groups.iter().collect();
        for i in 0..ordered.len() {
            for j in i + 1..ordered.len() {
                let key = (ordered[i].clone(), ordered[j].clone());
                *stats.pair_counts.entry(key).or_insert(0) += 1;
            }
        }
    }
    stats
}
