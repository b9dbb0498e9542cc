//! Resolution precision/recall on a ground-truth-labeled synthetic corpus.

use vjournal::index::build_index;
use vjournal::refgraph::{parse_reference, resolve_reference_scored};
use vjournal::synth::resolution_corpus;
use vjournal::Thresholds;

#[test]
fn precision_and_recall_on_labeled_corpus() {
    let corpus = resolution_corpus(400, 1200, 0.10, 2005);
    let snap = corpus.store.snapshot();
    let idx = build_index(&snap);
    let thresholds = Thresholds::default();

    let mut resolved = 0usize;
    let mut correct = 0usize;
    for labeled in &corpus.references {
        let parsed = parse_reference(&labeled.raw);
        if let Some((id, _)) = resolve_reference_scored(&parsed, &snap, &idx, &thresholds) {
            resolved += 1;
            if id == labeled.truth {
                correct += 1;
            }
        }
    }

    let precision = correct as f64 / resolved as f64;
    let recall = correct as f64 / corpus.references.len() as f64;
    assert!(precision >= 0.98, "precision {precision:.4} ({correct}/{resolved})");
    assert!(recall >= 0.90, "recall {recall:.4} ({correct}/{})", corpus.references.len());
}
