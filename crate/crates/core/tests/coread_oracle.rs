//! Quadratic brute-force oracle for co-read statistics.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vjournal::corpus::{AuthorName, BibRecord, CorpusSnapshot, CorpusStore, Kind, RecordId};
use vjournal::readstats::{compute_coread, ReadEvent};
use vjournal::Thresholds;

fn date(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

/// A corpus of `n` records where some adjacent e-print/journal pairs are
/// concordance-linked, so grouping matters.
fn linked_corpus(n: usize, seed: u64) -> CorpusStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = CorpusStore::new();
    let mut i = 0;
    while store.len() < n {
        let twin = store.len() + 1 < n && rng.gen_bool(0.3);
        let journal_id = RecordId::new(format!("2004ApJ...{:03}.{:04}K", 100 + i % 900, i)).unwrap();
        let make = |id: RecordId, kind: Kind, concordance: Option<RecordId>| BibRecord {
            id,
            kind,
            title: format!("work {i}"),
            abstract_text: String::new(),
            authors: vec![AuthorName::new("Kurtz", "M")],
            categories: Default::default(),
            date_added: date("2005-02-01"),
            date_published: date("2005-01-01"),
            reference_strings: vec![],
            resolved_refs: vec![],
            concordance,
        };
        if twin {
            let eprint_id = RecordId::new(format!("2004arXiv{:07}..K", i + 1)).unwrap();
            store.insert(make(eprint_id.clone(), Kind::Eprint, Some(journal_id.clone()))).unwrap();
            store.insert(make(journal_id, Kind::Journal, Some(eprint_id))).unwrap();
        } else {
            store.insert(make(journal_id, Kind::Journal, None)).unwrap();
        }
        i += 1;
    }
    store
}

fn random_events(ids: &[RecordId], n_events: usize, n_sessions: usize, rng: &mut ChaCha8Rng) -> Vec<ReadEvent> {
    let mut events = Vec::new();
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    for _ in 0..n_events {
        let s = rng.gen_range(0..n_sessions);
        let r = rng.gen_range(0..ids.len());
        if !seen.insert((s, r)) {
            continue; // distinct (session, record) semantics
        }
        events.push(ReadEvent {
            session: format!("s{s}"),
            record: ids[r].clone(),
            at: "2005-03-14T12:00:00Z".parse().unwrap(),
        });
    }
    events
}

/// Quadratic oracle: enumerate sessions, apply the robot cutoff, count
/// every group pair directly.
fn brute_force(
    events: &[ReadEvent],
    snap: &CorpusSnapshot,
    s_max: usize,
) -> (BTreeMap<(RecordId, RecordId), u32>, BTreeMap<RecordId, u32>) {
    let mut by_session: BTreeMap<&str, BTreeSet<&RecordId>> = BTreeMap::new();
    for e in events {
        by_session.entry(&e.session).or_default().insert(&e.record);
    }
    let mut pairs: BTreeMap<(RecordId, RecordId), u32> = BTreeMap::new();
    let mut reads: BTreeMap<RecordId, u32> = BTreeMap::new();
    for (_, records) in by_session {
        if records.len() > s_max {
            continue;
        }
        let groups: BTreeSet<RecordId> =
            records.iter().map(|r| snap.group_rep(r).unwrap()).collect();
        for g in &groups {
            *reads.entry(g.clone()).or_insert(0) += 1;
        }
        let list: Vec<&RecordId> = groups.iter().collect();
        for a in 0..list.len() {
            for b in a + 1..list.len() {
                *pairs.entry((list[a].clone(), list[b].clone())).or_insert(0) += 1;
            }
        }
    }
    (pairs, reads)
}

#[test]
fn coread_equals_quadratic_oracle() {
    for seed in 0..60u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0FFEE);
        let store = linked_corpus(5 + (seed as usize * 7) % 95, seed);
        let snap = store.snapshot();
        let ids: Vec<RecordId> = snap.ids().cloned().collect();
        let n_events = rng.gen_range(1..=500);
        let n_sessions = rng.gen_range(1..=40);
        let events = random_events(&ids, n_events, n_sessions, &mut rng);

        let thresholds = Thresholds::default();
        let stats = compute_coread(&events, &snap, &thresholds);
        let (pairs, reads) = brute_force(&events, &snap, thresholds.s_max);

        assert_eq!(stats.pairs(), &pairs, "seed {seed}");
        assert_eq!(stats.read_counts(), &reads, "seed {seed}");
    }
}

#[test]
fn adversarial_robot_and_duplicate_sessions() {
    // 201 distinct records read by one robot plus a normal session; the
    // robot must leave no trace, and repeat reads must not double-count.
    let store = linked_corpus(205, 17);
    let snap = store.snapshot();
    let ids: Vec<RecordId> = snap.ids().cloned().collect();
    let thresholds = Thresholds::default();

    let mut events = Vec::new();
    for id in ids.iter().take(thresholds.s_max + 1) {
        events.push(ReadEvent {
            session: "robot".into(),
            record: id.clone(),
            at: "2005-03-14T12:00:00Z".parse().unwrap(),
        });
    }
    for _ in 0..3 {
        for id in ids.iter().take(2) {
            events.push(ReadEvent {
                session: "human".into(),
                record: id.clone(),
                at: "2005-03-14T13:00:00Z".parse().unwrap(),
            });
        }
    }

    let stats = compute_coread(&events, &snap, &thresholds);
    let (pairs, reads) = brute_force(&events, &snap, thresholds.s_max);
    assert_eq!(stats.pairs(), &pairs);
    assert_eq!(stats.read_counts(), &reads);

    // the only counted session is the human one
    let g0 = snap.group_rep(&ids[0]).unwrap();
    let g1 = snap.group_rep(&ids[1]).unwrap();
    if g0 != g1 {
        assert_eq!(stats.pair_count(&ids[0], &ids[1]), 1);
    }
    assert_eq!(stats.read_count(&ids[0]), 1);

    // boundary: a session reading exactly s_max records still counts
    let mut boundary = Vec::new();
    for id in ids.iter().take(thresholds.s_max) {
        boundary.push(ReadEvent {
            session: "busy".into(),
            record: id.clone(),
            at: "2005-03-14T14:00:00Z".parse().unwrap(),
        });
    }
    let stats = compute_coread(&boundary, &snap, &thresholds);
    assert!(stats.read_count(&ids[0]) > 0, "s_max itself is not a robot");
}
