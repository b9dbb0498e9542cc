//! Brute-force aggregation oracles for the second-order operators.
//!
//! The match set comes from the (separately verified) query evaluator;
//! the aggregation under test is recomputed here directly from records,
//! identity groups, and raw read events.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Days, NaiveDate};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vjournal::corpus::{AuthorName, BibRecord, CorpusSnapshot, CorpusStore, Kind, RecordId};
use vjournal::index::{build_index, IndexSnapshot};
use vjournal::query::{evaluate_set, parse_query, QueryAst};
use vjournal::readstats::{compute_coread, ReadEvent};
use vjournal::refgraph::build_citation_graph;
use vjournal::secondorder::{most_cited, most_popular, MOST_CITED_WINDOW_DAYS};
use vjournal::synth::random_query;
use vjournal::{SeedOrder, Thresholds};

const NOW: &str = "2005-03-14";

fn date(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

struct Fixture {
    snap: CorpusSnapshot,
    idx: IndexSnapshot,
    events: Vec<ReadEvent>,
}

/// Random corpus with twins, random resolved references, random reads.
fn fixture(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 10 + (seed as usize * 11) % 190;
    let mut store = CorpusStore::new();

    let vocab = ["survey", "dark", "energy", "lensing", "cluster", "quasar", "stellar", "halo"];
    let title = |rng: &mut ChaCha8Rng| -> String {
        let k = rng.gen_range(2..=4);
        (0..k).map(|_| vocab[rng.gen_range(0..vocab.len())]).collect::<Vec<_>>().join(" ")
    };

    let mut i = 0usize;
    while store.len() < n {
        let twin = store.len() + 1 < n && rng.gen_bool(0.25);
        let year = rng.gen_range(2004..=2005);
        let added = NaiveDate::from_ymd_opt(year, rng.gen_range(1..=12), rng.gen_range(1..=28)).unwrap();
        let journal_id = RecordId::new(format!("{year}ApJ...{:03}.{:04}K", 100 + i % 900, i)).unwrap();
        let text = title(&mut rng);
        let make = |id: RecordId, kind: Kind, concordance: Option<RecordId>, added: NaiveDate, text: &str| BibRecord {
            id,
            kind,
            title: text.to_string(),
            abstract_text: String::new(),
            authors: vec![AuthorName::new("Kurtz", "M")],
            categories: ["astro-ph".to_string()].into_iter().collect(),
            date_added: added,
            date_published: added,
            reference_strings: vec![],
            resolved_refs: vec![],
            concordance,
        };
        if twin {
            let eprint_id = RecordId::new(format!("{year}arXiv{:07}..K", i + 1)).unwrap();
            store
                .insert(make(eprint_id.clone(), Kind::Eprint, Some(journal_id.clone()), added, &text))
                .unwrap();
            store
                .insert(make(
                    journal_id,
                    Kind::Journal,
                    Some(eprint_id),
                    added + Days::new(rng.gen_range(0..=40)),
                    &text,
                ))
                .unwrap();
        } else {
            let kind = if rng.gen_bool(0.35) { Kind::Eprint } else { Kind::Journal };
            let id = if kind == Kind::Eprint {
                RecordId::new(format!("{year}arXiv{:07}..K", i + 1)).unwrap()
            } else {
                journal_id
            };
            store.insert(make(id, kind, None, added, &text)).unwrap();
        }
        i += 2;
    }

    let ids: Vec<RecordId> = store.records().map(|r| r.id.clone()).collect();
    for id in &ids {
        let n_refs = rng.gen_range(0..=4);
        let targets: Vec<RecordId> =
            (0..n_refs).map(|_| ids[rng.gen_range(0..ids.len())].clone()).collect();
        store.set_resolved_refs(id, targets).unwrap();
    }

    let mut events = Vec::new();
    for s in 0..rng.gen_range(1..=30) {
        let reads = rng.gen_range(1..=6);
        for _ in 0..reads {
            events.push(ReadEvent {
                session: format!("s{s}"),
                record: ids[rng.gen_range(0..ids.len())].clone(),
                at: "2005-03-10T12:00:00Z".parse().unwrap(),
            });
        }
    }

    let snap = store.snapshot();
    let idx = build_index(&snap);
    Fixture { snap, idx, events }
}

fn rep(snap: &CorpusSnapshot, id: &RecordId) -> RecordId {
    snap.merged_identity(id).unwrap().into_iter().next().unwrap()
}

fn oracle_most_cited(
    ast: &QueryAst,
    snap: &CorpusSnapshot,
    idx: &IndexSnapshot,
    now: NaiveDate,
    t: &Thresholds,
) -> Vec<(RecordId, f64)> {
    let start = now - Days::new(MOST_CITED_WINDOW_DAYS);
    let matches = evaluate_set(ast, idx);
    let mut citers_of: BTreeMap<RecordId, BTreeSet<RecordId>> = BTreeMap::new();
    for citing in snap.records() {
        if !(matches.contains(&citing.id) && citing.date_added > start && citing.date_added <= now) {
            continue;
        }
        let citing_group = rep(snap, &citing.id);
        for target in &citing.resolved_refs {
            let target_group = rep(snap, target);
            if target_group != citing_group {
                citers_of.entry(target_group).or_default().insert(citing_group.clone());
            }
        }
    }
    let mut out: Vec<(RecordId, f64)> =
        citers_of.into_iter().map(|(g, c)| (g, c.len() as f64)).collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out.truncate(t.list_cap);
    out
}

fn oracle_most_popular(
    ast: &QueryAst,
    snap: &CorpusSnapshot,
    idx: &IndexSnapshot,
    events: &[ReadEvent],
    t: &Thresholds,
) -> Vec<(RecordId, f64)> {
    // session group sets, robot rule applied to distinct records
    let mut session_records: BTreeMap<&str, BTreeSet<&RecordId>> = BTreeMap::new();
    for e in events {
        session_records.entry(&e.session).or_default().insert(&e.record);
    }
    let sessions: Vec<BTreeSet<RecordId>> = session_records
        .values()
        .filter(|records| records.len() <= t.s_max)
        .map(|records| records.iter().map(|r| rep(snap, r)).collect())
        .collect();
    let group_reads = |g: &RecordId| sessions.iter().filter(|s| s.contains(g)).count();
    let pair_reads =
        |a: &RecordId, b: &RecordId| sessions.iter().filter(|s| s.contains(a) && s.contains(b)).count();

    // seed = top matching records by group reads, deduplicated by group
    let mut matched: Vec<RecordId> = evaluate_set(ast, idx).into_iter().collect();
    matched.sort_by(|a, b| {
        group_reads(&rep(snap, b))
            .cmp(&group_reads(&rep(snap, a)))
            .then_with(|| {
                let da = snap.get(a).unwrap().date_added;
                let db = snap.get(b).unwrap().date_added;
                db.cmp(&da)
            })
            .then_with(|| a.cmp(b))
    });
    let mut seeds: Vec<RecordId> = Vec::new();
    for id in matched {
        let g = rep(snap, &id);
        if !seeds.contains(&g) {
            seeds.push(g);
        }
        if seeds.len() == t.seed_cap {
            break;
        }
    }

    let all_groups: BTreeSet<RecordId> = snap.ids().map(|id| rep(snap, id)).collect();
    let mut scores: BTreeMap<RecordId, u64> = BTreeMap::new();
    for seed in &seeds {
        for candidate in &all_groups {
            if candidate == seed {
                continue;
            }
            let c = pair_reads(seed, candidate) as u64;
            if c > 0 {
                *scores.entry(candidate.clone()).or_insert(0) += c;
            }
        }
    }
    for seed in &seeds {
        scores.remove(seed);
    }
    let mut out: Vec<(RecordId, f64)> =
        scores.into_iter().map(|(g, s)| (g, s as f64)).collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out.truncate(t.list_cap);
    out
}

#[test]
fn most_cited_matches_brute_force() {
    let t = Thresholds::default();
    for seed in 0..60u64 {
        let fx = fixture(seed);
        let graph = build_citation_graph(&fx.snap);
        let ast = parse_query(&random_query(seed + 10_000)).unwrap();
        let got = most_cited(&ast, &fx.snap, &fx.idx, &graph, date(NOW), &t);
        let want = oracle_most_cited(&ast, &fx.snap, &fx.idx, date(NOW), &t);
        assert_eq!(got.entries, want, "seed {seed}");
    }
}

#[test]
fn most_popular_matches_brute_force() {
    let t = Thresholds::default();
    for seed in 0..60u64 {
        let fx = fixture(seed);
        let stats = compute_coread(&fx.events, &fx.snap, &t);
        let ast = parse_query(&random_query(seed + 20_000)).unwrap();
        let got = most_popular(&ast, &fx.snap, &fx.idx, &stats, date(NOW), &t);
        let want = oracle_most_popular(&ast, &fx.snap, &fx.idx, &fx.events, &t);
        assert_eq!(got.entries, want, "seed {seed}");
    }
}

#[test]
fn most_popular_matches_brute_force_with_recency_seeds() {
    let t = Thresholds { seed_order: SeedOrder::Recency, seed_cap: 5, ..Thresholds::default() };
    for seed in 0..20u64 {
        let fx = fixture(seed);
        let stats = compute_coread(&fx.events, &fx.snap, &t);
        let ast = parse_query(&random_query(seed + 30_000)).unwrap();
        let got = most_popular(&ast, &fx.snap, &fx.idx, &stats, date(NOW), &t);

        // recency ordering oracle: replace the seed ranking
        let mut matched: Vec<RecordId> = evaluate_set(&ast, &fx.idx).into_iter().collect();
        matched.sort_by(|a, b| {
            let da = fx.snap.get(a).unwrap().date_added;
            let db = fx.snap.get(b).unwrap().date_added;
            db.cmp(&da).then_with(|| a.cmp(b))
        });
        let mut seeds: Vec<RecordId> = Vec::new();
        for id in matched {
            let g = rep(&fx.snap, &id);
            if !seeds.contains(&g) {
                seeds.push(g);
            }
            if seeds.len() == t.seed_cap {
                break;
            }
        }
        let mut scores: BTreeMap<RecordId, u64> = BTreeMap::new();
        for ((a, b), c) in stats.pairs() {
            if seeds.contains(a) {
                *scores.entry(b.clone()).or_insert(0) += u64::from(*c);
            }
            if seeds.contains(b) {
                *scores.entry(a.clone()).or_insert(0) += u64::from(*c);
            }
        }
        for s in &seeds {
            scores.remove(s);
        }
        let mut want: Vec<(RecordId, f64)> =
            scores.into_iter().map(|(g, s)| (g, s as f64)).collect();
        want.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        want.truncate(t.list_cap);
        assert_eq!(got.entries, want, "seed {seed}");
    }
}

#[test]
fn most_cited_monotone_under_new_citer() {
    let t = Thresholds { list_cap: usize::MAX, ..Thresholds::default() };
    let fx = fixture(7);
    let graph = build_citation_graph(&fx.snap);
    let ast = parse_query("survey").unwrap();
    let before = most_cited(&ast, &fx.snap, &fx.idx, &graph, date(NOW), &t);

    // add a matching, in-window citer of the first record
    let target = fx.snap.ids().next().unwrap().clone();
    let mut store = CorpusStore::new();
    for r in fx.snap.records() {
        store.insert(r.clone()).unwrap();
    }
    store
        .insert(BibRecord {
            id: RecordId::new("2005ApJ...999..999N").unwrap(),
            kind: Kind::Journal,
            title: "brand new survey".to_string(),
            abstract_text: String::new(),
            authors: vec![AuthorName::new("Murray", "S")],
            categories: Default::default(),
            date_added: date("2005-03-13"),
            date_published: date("2005-03-13"),
            reference_strings: vec![],
            resolved_refs: vec![target.clone()],
            concordance: None,
        })
        .unwrap();
    let snap = store.snapshot();
    let idx = build_index(&snap);
    let graph = build_citation_graph(&snap);
    let after = most_cited(&ast, &snap, &idx, &graph, date(NOW), &t);

    let target_group = rep(&fx.snap, &target);
    let score_of = |list: &[(RecordId, f64)]| {
        list.iter().find(|(id, _)| *id == target_group).map(|(_, s)| *s).unwrap_or(0.0)
    };
    assert!(score_of(&after.entries) >= score_of(&before.entries) + 1.0 - 1e-9);
}
