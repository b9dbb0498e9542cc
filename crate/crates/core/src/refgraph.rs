//! Reference-string parsing, resolution against the corpus, and the
//! citation graph with windowed citation counts.
//!
//! Reference grammar: `<AuthorList> <Year>, <Venue>, <Volume>, <Page>`
//! with tolerant separators. `et al.` sets the truncation flag. Parsing
//! is total: in the worst case only `trailing_title` is set and the year
//! is the invalid sentinel 0.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorName, BibRecord, CorpusSnapshot, Kind, RecordId};
use crate::index::{Field, IndexSnapshot};
use crate::text;
use crate::{Error, Result, Thresholds};

/// Component weights of the resolution score.
const W_FIRST_AUTHOR: f64 = 0.4;
const W_YEAR: f64 = 0.2;
const W_VENUE: f64 = 0.2;
const W_VOLPAGE: f64 = 0.2;

/// A reference string decomposed by the tolerant grammar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedReference {
    pub authors: Vec<AuthorName>,
    /// True when the author list was truncated with "et al."
    pub et_al: bool,
    /// Publication year; 0 when no year could be parsed.
    pub year: i32,
    /// Normalized venue tokens.
    pub venue: Vec<String>,
    pub volume: Option<u32>,
    pub page: Option<String>,
    pub trailing_title: Option<String>,
}

impl ParsedReference {
    pub fn year_is_valid(&self) -> bool {
        (1900..=2100).contains(&self.year)
    }
}

fn is_initials_part(part: &str) -> bool {
    let alpha: Vec<char> = part.chars().filter(|c| c.is_alphabetic()).collect();
    !part.is_empty()
        && part.len() <= 6
        && part.chars().all(|c| c.is_alphabetic() || c == '.')
        && (1..=3).contains(&alpha.len())
        && (part.contains('.') || alpha.len() == 1 || alpha.iter().all(|c| c.is_uppercase()))
}

/// Locate the first standalone 4-digit year in [1900, 2100].
fn find_year(raw: &str) -> Option<(usize, usize, i32)> {
    let bytes = raw.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let bounded_left = start == 0 || !bytes[start - 1].is_ascii_alphanumeric();
            let bounded_right = i == bytes.len() || !bytes[i].is_ascii_alphanumeric();
            if i - start == 4 && bounded_left && bounded_right {
                if let Ok(year) = raw[start..i].parse::<i32>() {
                    if (1900..=2100).contains(&year) {
                        return Some((start, i, year));
                    }
                }
            }
        } else {
            i += 1;
        }
    }
    None
}

/// Remove the first ASCII case-insensitive occurrence of "et al" (and a
/// trailing dot) from the author segment.
fn strip_et_al(head: &str) -> (String, bool) {
    let bytes = head.as_bytes();
    let pat = b"et al";
    for start in 0..bytes.len().saturating_sub(pat.len() - 1) {
        if bytes[start..start + pat.len()].eq_ignore_ascii_case(pat) {
            let standalone = (start == 0 || !bytes[start - 1].is_ascii_alphanumeric())
                && (start + pat.len() == bytes.len()
                    || !bytes[start + pat.len()].is_ascii_alphanumeric());
            if standalone {
                let mut rest = head[start + pat.len()..].to_string();
                if rest.starts_with('.') {
                    rest.remove(0);
                }
                return (format!("{}{}", &head[..start], rest), true);
            }
        }
    }
    (head.to_string(), false)
}

fn parse_authors(head: &str) -> Vec<AuthorName> {
    // "A and B" / "A & B" / "A; B" all separate authors
    let mut unified = String::with_capacity(head.len());
    let bytes = head.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if i + 5 <= bytes.len() && bytes[i..i + 5].eq_ignore_ascii_case(b" and ") {
            unified.push(';');
            i += 5;
        } else {
            unified.push(bytes[i] as char);
            i += 1;
        }
    }

    let mut authors: Vec<AuthorName> = Vec::new();
    for segment in unified.split(|c| c == ';' || c == '&') {
        for part in segment.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            if is_initials_part(part) {
                let initials: String = part.chars().filter(|c| c.is_alphabetic()).collect();
                if let Some(last) = authors.last_mut() {
                    if last.first_initials.is_empty() {
                        last.first_initials = initials;
                    }
                }
                // stray initials with no preceding last name are dropped
            } else {
                let last = part.trim_matches('.').trim();
                if !last.is_empty() {
                    authors.push(AuthorName::new(last, ""));
                }
            }
        }
    }
    authors
}

/// Parse a raw reference string. Total function; never fails.
pub fn parse_reference(raw: &str) -> ParsedReference {
    let trimmed = raw.trim();
    let mut parsed = ParsedReference {
        authors: vec![],
        et_al: false,
        year: 0,
        venue: vec![],
        volume: None,
        page: None,
        trailing_title: None,
    };
    if trimmed.is_empty() {
        return parsed;
    }

    let Some((year_start, year_end, year)) = find_year(trimmed) else {
        parsed.trailing_title = Some(trimmed.to_string());
        return parsed;
    };
    parsed.year = year;

    let (head, et_al) = strip_et_al(&trimmed[..year_start]);
    parsed.et_al = et_al;
    parsed.authors = parse_authors(&head);

    let tail = trimmed[year_end..].trim_start_matches(|c: char| c == ',' || c.is_whitespace());
    let fields: Vec<&str> = tail.split(',').map(str::trim).filter(|f| !f.is_empty()).collect();

    let all_digits = |f: &str| !f.is_empty() && f.chars().all(|c| c.is_ascii_digit());
    let mut venue_words: Vec<&str> = Vec::new();
    let mut rest: Vec<&str> = Vec::new();
    let mut iter = fields.into_iter().peekable();
    while let Some(field) = iter.peek() {
        if all_digits(field) {
            break;
        }
        venue_words.push(iter.next().expect("peeked"));
    }
    if let Some(vol_field) = iter.next() {
        parsed.volume = vol_field.parse().ok();
        if let Some(page_field) = iter.next() {
            parsed.page = Some(page_field.to_string());
        }
        rest.extend(iter);
    }
    parsed.venue = text::venue_tokens(&venue_words.join(" "));
    if !rest.is_empty() {
        parsed.trailing_title = Some(rest.join(", "));
    }

    // keep something resolvable when the author segment yielded nothing
    if parsed.authors.is_empty() && parsed.trailing_title.is_none() {
        parsed.trailing_title = Some(trimmed.to_string());
    }
    parsed
}

// ---------------------------------------------------------------------------
// Resolution

fn journal_volume(record: &BibRecord) -> Option<u32> {
    (record.kind == Kind::Journal).then(|| record.id.volume()).flatten()
}

fn journal_page(record: &BibRecord) -> Option<&str> {
    if record.kind == Kind::Journal {
        record.id.page()
    } else {
        None
    }
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        0.0
    } else {
        a.intersection(b).count() as f64 / union as f64
    }
}

/// Score one candidate record against a parsed reference.
pub fn resolution_score(pr: &ParsedReference, record: &BibRecord) -> f64 {
    let first_author = match (pr.authors.first(), record.authors.first()) {
        (Some(a), Some(b)) if a.normalized_last() == b.normalized_last() => 1.0,
        _ => 0.0,
    };
    let year_exact = if pr.year_is_valid() && record.published_year() == pr.year { 1.0 } else { 0.0 };
    let venue = jaccard(
        &pr.venue.iter().cloned().collect(),
        &record.venue_tokens().into_iter().collect(),
    );
    let volpage = match (pr.volume, pr.page.as_deref(), journal_volume(record), journal_page(record)) {
        (Some(v), Some(p), Some(rv), Some(rp)) if v == rv && p.eq_ignore_ascii_case(rp) => 1.0,
        _ => 0.0,
    };
    W_FIRST_AUTHOR * first_author + W_YEAR * year_exact + W_VENUE * venue + W_VOLPAGE * volpage
}

fn candidate_ids(pr: &ParsedReference, corpus: &CorpusSnapshot, idx: &IndexSnapshot) -> Vec<RecordId> {
    if pr.year_is_valid() && !pr.authors.is_empty() {
        let first_last = pr.authors[0].normalized_last();
        corpus
            .records()
            .filter(|r| (r.published_year() - pr.year).abs() <= 1)
            .filter(|r| r.authors.first().map(|a| a.normalized_last()) == Some(first_last.clone()))
            .map(|r| r.id.clone())
            .collect()
    } else if let Some(title) = &pr.trailing_title {
        let mut ids = BTreeSet::new();
        for token in text::tokenize(title) {
            for posting in idx.postings(&token, Field::Title) {
                ids.insert(posting.id.clone());
            }
        }
        ids.into_iter()
            .filter(|id| {
                !pr.year_is_valid()
                    || corpus.get(id).map(|r| (r.published_year() - pr.year).abs() <= 1).unwrap_or(false)
            })
            .collect()
    } else {
        Vec::new()
    }
}

/// Resolve a parsed reference to a record id with its score. The best
/// candidate is accepted when its score reaches `theta_ref` and leads the
/// runner-up by at least `ref_margin`; otherwise the reference stays
/// unresolved.
pub fn resolve_reference_scored(
    pr: &ParsedReference,
    corpus: &CorpusSnapshot,
    idx: &IndexSnapshot,
    thresholds: &Thresholds,
) -> Option<(RecordId, f64)> {
    let mut scored: Vec<(RecordId, f64)> = candidate_ids(pr, corpus, idx)
        .into_iter()
        .map(|id| {
            let score = resolution_score(pr, corpus.get(&id).expect("candidate exists"));
            (id, score)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let best = scored.first()?;
    if best.1 < thresholds.theta_ref {
        return None;
    }
    if let Some(runner) = scored.get(1) {
        if best.1 - runner.1 < thresholds.ref_margin {
            return None;
        }
    }
    Some(best.clone())
}

pub fn resolve_reference(
    pr: &ParsedReference,
    corpus: &CorpusSnapshot,
    idx: &IndexSnapshot,
    thresholds: &Thresholds,
) -> Option<RecordId> {
    resolve_reference_scored(pr, corpus, idx, thresholds).map(|(id, _)| id)
}

/// One audit row per reference string processed in a resolution pass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolutionAudit {
    pub citing: RecordId,
    pub raw: String,
    pub parsed: ParsedReference,
    pub resolved: Option<RecordId>,
    pub score: Option<f64>,
}

/// Resolution results for a whole corpus snapshot.
#[derive(Debug, Clone, Default)]
pub struct ResolutionRun {
    /// Resolved targets per citing record, deduplicated, self-references dropped.
    pub resolved: BTreeMap<RecordId, Vec<RecordId>>,
    pub audit: Vec<ResolutionAudit>,
}

/// Parse and resolve every reference string of every record.
pub fn resolve_references(
    corpus: &CorpusSnapshot,
    idx: &IndexSnapshot,
    thresholds: &Thresholds,
) -> ResolutionRun {
    let mut run = ResolutionRun::default();
    for record in corpus.records() {
        let mut targets: Vec<RecordId> = Vec::new();
        for raw in &record.reference_strings {
            let parsed = parse_reference(raw);
            let hit = resolve_reference_scored(&parsed, corpus, idx, thresholds);
            run.audit.push(ResolutionAudit {
                citing: record.id.clone(),
                raw: raw.clone(),
                parsed,
                resolved: hit.as_ref().map(|(id, _)| id.clone()),
                score: hit.as_ref().map(|(_, s)| *s),
            });
            if let Some((id, _)) = hit {
                if id != record.id && !targets.contains(&id) {
                    targets.push(id);
                }
            }
        }
        if !targets.is_empty() {
            run.resolved.insert(record.id.clone(), targets);
        }
    }
    run
}

// ---------------------------------------------------------------------------
// Citation graph

/// Directed citing -> cited adjacency over identity groups, with per-group
/// citation counts. Concordant pairs count as one work on both sides; no
/// self-edges survive the collapse.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CitationGraph {
    edges: BTreeMap<RecordId, BTreeSet<RecordId>>,
    in_counts: BTreeMap<RecordId, usize>,
    rep_of: BTreeMap<RecordId, RecordId>,
}

impl CitationGraph {
    /// Citing group -> cited groups adjacency.
    pub fn edges(&self) -> &BTreeMap<RecordId, BTreeSet<RecordId>> {
        &self.edges
    }

    /// Identity-group representative for a record id.
    pub fn rep(&self, id: &RecordId) -> Option<&RecordId> {
        self.rep_of.get(id)
    }

    /// Number of distinct citing groups with an edge into this id's group.
    pub fn in_count(&self, id: &RecordId) -> usize {
        self.rep(id).and_then(|rep| self.in_counts.get(rep)).copied().unwrap_or(0)
    }

    pub fn in_counts(&self) -> &BTreeMap<RecordId, usize> {
        &self.in_counts
    }

    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            edges: self
                .edges
                .iter()
                .map(|(citing, cited)| (citing.clone(), cited.iter().cloned().collect()))
                .collect(),
            groups: self.rep_of.iter().map(|(id, rep)| (id.clone(), rep.clone())).collect(),
        }
    }

    pub fn from_doc(doc: GraphDoc) -> Self {
        let mut graph = CitationGraph {
            edges: doc
                .edges
                .into_iter()
                .map(|(citing, cited)| (citing, cited.into_iter().collect()))
                .collect(),
            in_counts: BTreeMap::new(),
            rep_of: doc.groups.into_iter().collect(),
        };
        for cited_set in graph.edges.values() {
            for cited in cited_set {
                *graph.in_counts.entry(cited.clone()).or_insert(0) += 1;
            }
        }
        graph
    }
}

/// Serializable form of [`CitationGraph`]; in-counts are recomputed on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDoc {
    pub edges: Vec<(RecordId, Vec<RecordId>)>,
    pub groups: Vec<(RecordId, RecordId)>,
}

/// Build the citation graph from a snapshot whose `resolved_refs` have
/// been filled. Pure function of the snapshot; repeated runs are identical.
pub fn build_citation_graph(corpus: &CorpusSnapshot) -> CitationGraph {
    let mut graph = CitationGraph::default();
    for record in corpus.records() {
        graph
            .rep_of
            .insert(record.id.clone(), corpus.group_rep(&record.id).expect("record exists"));
    }
    for record in corpus.records() {
        let citing_rep = graph.rep_of[&record.id].clone();
        for target in &record.resolved_refs {
            let Some(cited_rep) = graph.rep_of.get(target) else { continue };
            if *cited_rep == citing_rep {
                continue; // a concordance pair is one work
            }
            graph.edges.entry(citing_rep.clone()).or_default().insert(cited_rep.clone());
        }
    }
    for cited_set in graph.edges.values() {
        for cited in cited_set {
            *graph.in_counts.entry(cited.clone()).or_insert(0) += 1;
        }
    }
    graph
}

/// Count citations from an explicit set of citing records, collapsing both
/// sides through identity groups; returns (cited group rep, distinct citing
/// group count) sorted by (count desc, id asc).
pub fn count_citations<'a>(
    corpus: &CorpusSnapshot,
    graph: &CitationGraph,
    citing_records: impl Iterator<Item = &'a RecordId>,
    cited_filter: Option<&BTreeSet<RecordId>>,
) -> Vec<(RecordId, usize)> {
    let filter_reps: Option<BTreeSet<RecordId>> = cited_filter.map(|filter| {
        filter.iter().filter_map(|id| graph.rep(id).cloned()).collect()
    });

    let mut citing_groups: BTreeMap<RecordId, BTreeSet<RecordId>> = BTreeMap::new();
    for citing_id in citing_records {
        let Ok(record) = corpus.get(citing_id) else { continue };
        let Some(citing_rep) = graph.rep(citing_id) else { continue };
        for target in &record.resolved_refs {
            let Some(cited_rep) = graph.rep(target) else { continue };
            if cited_rep == citing_rep {
                continue;
            }
            if let Some(reps) = &filter_reps {
                if !reps.contains(cited_rep) {
                    continue;
                }
            }
            citing_groups.entry(cited_rep.clone()).or_default().insert(citing_rep.clone());
        }
    }

    let mut counts: Vec<(RecordId, usize)> =
        citing_groups.into_iter().map(|(cited, citers)| (cited, citers.len())).collect();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    counts
}

/// Citations whose citing record was added in the half-open window
/// (start, end], restricted to `cited_filter` when given.
pub fn citations_in_window(
    graph: &CitationGraph,
    corpus: &CorpusSnapshot,
    cited_filter: Option<&BTreeSet<RecordId>>,
    window: (NaiveDate, NaiveDate),
) -> Result<Vec<(RecordId, usize)>> {
    let (start, end) = window;
    if start > end {
        return Err(Error::InvalidWindow { start, end });
    }
    let citing: Vec<RecordId> = corpus
        .records()
        .filter(|r| r.date_added > start && r.date_added <= end)
        .map(|r| r.id.clone())
        .collect();
    Ok(count_citations(corpus, graph, citing.iter(), cited_filter))
}
