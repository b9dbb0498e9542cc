use std::collections::BTreeSet;

use super::record::{BibRecord, Kind, RecordId};
use super::store::CorpusStore;
use crate::text;
use crate::Thresholds;

/// Score component weights and the ambiguity tolerance.
const W_TITLE: f64 = 0.6;
const W_AUTHORS: f64 = 0.3;
const W_DATE: f64 = 0.1;
const TIE_EPSILON: f64 = 1e-6;

/// Result of a concordance pass.
#[derive(Debug, Clone, Default)]
pub struct ConcordanceOutcome {
    /// Newly linked (eprint_id, journal_id, score) triples.
    pub linked: Vec<(RecordId, RecordId, f64)>,
    /// E-prints whose best candidates tied; left unlinked for review.
    pub ambiguous: Vec<AmbiguousPair>,
}

#[derive(Debug, Clone)]
pub struct AmbiguousPair {
    pub eprint: RecordId,
    /// The tied best-scoring journal candidates.
    pub candidates: Vec<(RecordId, f64)>,
}

/// Pair score: weighted title token overlap, author last-name overlap,
/// and publication-date proximity (linear falloff over two years).
pub fn concordance_score(eprint: &BibRecord, journal: &BibRecord) -> f64 {
    let title_a: BTreeSet<String> = text::tokenize(&eprint.title).into_iter().collect();
    let title_b: BTreeSet<String> = text::tokenize(&journal.title).into_iter().collect();
    let union = title_a.union(&title_b).count();
    let title_sim = if union == 0 {
        0.0
    } else {
        title_a.intersection(&title_b).count() as f64 / union as f64
    };

    let last_a: BTreeSet<String> = eprint.authors.iter().map(|a| a.normalized_last()).collect();
    let last_b: BTreeSet<String> = journal.authors.iter().map(|a| a.normalized_last()).collect();
    let longest = eprint.authors.len().max(journal.authors.len());
    let author_overlap = if longest == 0 {
        0.0
    } else {
        last_a.intersection(&last_b).count() as f64 / longest as f64
    };

    let delta_days = (eprint.date_published - journal.date_published).num_days().abs() as f64;
    let date_prox = (1.0 - delta_days / 730.0).max(0.0);

    W_TITLE * title_sim + W_AUTHORS * author_overlap + W_DATE * date_prox
}

/// Link each unlinked e-print to its best-scoring unlinked journal
/// candidate with score >= theta_conc, symmetrically. When the top two
/// candidates are within 1e-6 of each other the e-print is reported as
/// ambiguous and nothing is linked. Idempotent: a second run over an
/// unchanged store links nothing new.
pub fn match_concordance(store: &mut CorpusStore, thresholds: &Thresholds) -> ConcordanceOutcome {
    let mut outcome = ConcordanceOutcome::default();

    let eprint_ids: Vec<RecordId> = store
        .records()
        .filter(|r| r.kind == Kind::Eprint && r.concordance.is_none())
        .map(|r| r.id.clone())
        .collect();

    for eprint_id in eprint_ids {
        let eprint = store.get(&eprint_id).expect("collected above").clone();
        let mut scored: Vec<(RecordId, f64)> = store
            .records()
            .filter(|r| r.kind == Kind::Journal && r.concordance.is_none())
            .map(|j| (j.id.clone(), concordance_score(&eprint, j)))
            .filter(|(_, score)| *score >= thresholds.theta_conc)
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        match scored.len() {
            0 => {}
            1 => link(store, &eprint_id, &scored[0].0, scored[0].1, &mut outcome),
            _ => {
                let (best, runner) = (&scored[0], &scored[1]);
                if (best.1 - runner.1).abs() < TIE_EPSILON {
                    let tied: Vec<(RecordId, f64)> = scored
                        .iter()
                        .take_while(|(_, s)| (best.1 - s).abs() < TIE_EPSILON)
                        .cloned()
                        .collect();
                    outcome.ambiguous.push(AmbiguousPair { eprint: eprint_id.clone(), candidates: tied });
                } else {
                    link(store, &eprint_id, &best.0, best.1, &mut outcome);
                }
            }
        }
    }

    outcome
}

fn link(
    store: &mut CorpusStore,
    eprint: &RecordId,
    journal: &RecordId,
    score: f64,
    outcome: &mut ConcordanceOutcome,
) {
    store.get_mut(eprint).expect("eprint exists").concordance = Some(journal.clone());
    store.get_mut(journal).expect("journal exists").concordance = Some(eprint.clone());
    outcome.linked.push((eprint.clone(), journal.clone(), score));
}

#[cfg(test)]
mod tests {
    use chrono::NaiveDate;

    use super::*;
    use crate::corpus::AuthorName;

    fn date(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn record(id: &str, kind: Kind, title: &str, authors: &[(&str, &str)], published: &str) -> BibRecord {
        BibRecord {
            id: RecordId::new(id).unwrap(),
            kind,
            title: title.to_string(),
            abstract_text: String::new(),
            authors: authors.iter().map(|(l, f)| AuthorName::new(*l, *f)).collect(),
            categories: Default::default(),
            date_added: date(published),
            date_published: date(published),
            reference_strings: vec![],
            resolved_refs: vec![],
            concordance: None,
        }
    }

    fn store_of(records: Vec<BibRecord>) -> CorpusStore {
        let mut store = CorpusStore::new();
        for r in records {
            store.insert(r).unwrap();
        }
        store
    }

    #[test]
    fn identical_pair_ninety_days_apart_links() {
        let mut store = store_of(vec![
            record(
                "2005arXiv0501001..K",
                Kind::Eprint,
                "Dark energy in clusters",
                &[("Kurtz", "M"), ("Eichhorn", "G")],
                "2005-01-01",
            ),
            record(
                "2005ApJ...123..456K",
                Kind::Journal,
                "Dark energy in clusters",
                &[("Kurtz", "M"), ("Eichhorn", "G")],
                "2005-04-01",
            ),
        ]);
        let outcome = match_concordance(&mut store, &Thresholds::default());
        assert_eq!(outcome.linked.len(), 1);
        let (e, j, score) = &outcome.linked[0];
        assert_eq!(e.as_str(), "2005arXiv0501001..K");
        assert_eq!(j.as_str(), "2005ApJ...123..456K");
        // 0.6 + 0.3 + 0.1 * (1 - 90/730)
        let expected = 0.6 + 0.3 + 0.1 * (1.0 - 90.0 / 730.0);
        assert!((score - expected).abs() < 1e-12, "score {score} expected {expected}");
        assert!((score - 0.988).abs() < 1e-3);

        // symmetric link, kinds differ
        let e_rec = store.get(e).unwrap();
        let j_rec = store.get(j).unwrap();
        assert_eq!(e_rec.concordance.as_ref(), Some(j));
        assert_eq!(j_rec.concordance.as_ref(), Some(e));
    }

    #[test]
    fn no_shared_tokens_no_link() {
        let mut store = store_of(vec![
            record("2005arXiv0501001..K", Kind::Eprint, "Quasar spectra", &[("Kurtz", "M")], "2005-01-01"),
            record("2005ApJ...123..456H", Kind::Journal, "Galactic dust maps", &[("Henneken", "E")], "2005-02-01"),
        ]);
        let outcome = match_concordance(&mut store, &Thresholds::default());
        assert!(outcome.linked.is_empty());
        assert!(outcome.ambiguous.is_empty());
    }

    #[test]
    fn tied_candidates_are_ambiguous_not_linked() {
        let mut store = store_of(vec![
            record("2005arXiv0501001..K", Kind::Eprint, "Dark energy in clusters", &[("Kurtz", "M")], "2005-01-01"),
            record("2005ApJ...123..456K", Kind::Journal, "Dark energy in clusters", &[("Kurtz", "M")], "2005-03-01"),
            record("2005MNRAS.360..100K", Kind::Journal, "Dark energy in clusters", &[("Kurtz", "M")], "2005-03-01"),
        ]);
        let outcome = match_concordance(&mut store, &Thresholds::default());
        assert!(outcome.linked.is_empty());
        assert_eq!(outcome.ambiguous.len(), 1);
        assert_eq!(outcome.ambiguous[0].candidates.len(), 2);
        let eprint_id = RecordId::new("2005arXiv0501001..K").unwrap();
        assert!(store.get(&eprint_id).unwrap().concordance.is_none());
    }

    #[test]
    fn idempotent_second_run_links_nothing() {
        let mut store = store_of(vec![
            record("2005arXiv0501001..K", Kind::Eprint, "Dark energy", &[("Kurtz", "M")], "2005-01-01"),
            record("2005ApJ...123..456K", Kind::Journal, "Dark energy", &[("Kurtz", "M")], "2005-02-01"),
        ]);
        let first = match_concordance(&mut store, &Thresholds::default());
        assert_eq!(first.linked.len(), 1);
        let second = match_concordance(&mut store, &Thresholds::default());
        assert!(second.linked.is_empty());
        assert!(second.ambiguous.is_empty());
    }

    #[test]
    fn groups_partition_corpus() {
        let mut store = store_of(vec![
            record("2005arXiv0501001..K", Kind::Eprint, "Dark energy", &[("Kurtz", "M")], "2005-01-01"),
            record("2005ApJ...123..456K", Kind::Journal, "Dark energy", &[("Kurtz", "M")], "2005-02-01"),
            record("2005MNRAS.360..100H", Kind::Journal, "Unrelated dust", &[("Henneken", "E")], "2005-02-01"),
        ]);
        match_concordance(&mut store, &Thresholds::default());
        let snap = store.snapshot();
        let mut seen = std::collections::BTreeSet::new();
        let mut covered = 0usize;
        for id in snap.ids() {
            let group = snap.merged_identity(id).unwrap();
            assert!(group.len() <= 2);
            assert!(group.contains(id));
            if seen.insert(group.iter().min().unwrap().clone()) {
                covered += group.len();
            }
        }
        assert_eq!(covered, snap.len());
    }
}
