//! On-disk pipeline state: the corpus directory layout and the derived
//! snapshot files written by `build`.

use std::fs;
use std::path::{Path, PathBuf};

use vjournal::readstats::{
    canonical_reads_csv, compute_coread, ingest_reads_from, CoReadDoc, CoReadStats, ReadEvent,
};
use vjournal::refgraph::{build_citation_graph, CitationGraph, GraphDoc};
use vjournal::{CorpusSnapshot, CorpusStore, Error, Result, Thresholds};

pub const READS_FILE: &str = "reads.csv";
pub const DERIVED_DIR: &str = "derived";
pub const GRAPH_FILE: &str = "graph.json";
pub const COREAD_FILE: &str = "coread.json";
pub const AUDIT_FILE: &str = "resolution_audit.jsonl";

pub struct State {
    pub corpus_dir: PathBuf,
    pub store: CorpusStore,
    pub reads: Vec<ReadEvent>,
}

impl State {
    /// Load the store and read log from the corpus directory; both may be
    /// absent on first use.
    pub fn load(corpus_dir: &Path) -> Result<State> {
        let store = if corpus_dir.join("records.jsonl").exists() {
            CorpusStore::load(corpus_dir)?
        } else {
            CorpusStore::new()
        };
        let reads_path = corpus_dir.join(READS_FILE);
        let reads = if reads_path.exists() {
            let snap = store.snapshot();
            let file = fs::File::open(&reads_path)?;
            let (events, _) = ingest_reads_from(std::io::BufReader::new(file), &snap)?;
            events
        } else {
            Vec::new()
        };
        Ok(State { corpus_dir: corpus_dir.to_path_buf(), store, reads })
    }

    pub fn save(&self) -> Result<()> {
        self.store.save(&self.corpus_dir)?;
        fs::write(self.corpus_dir.join(READS_FILE), canonical_reads_csv(&self.reads))?;
        Ok(())
    }

    /// Add newly ingested events, keeping the first observation of each
    /// (session, record) pair. Returns how many events were new.
    pub fn merge_reads(&mut self, events: Vec<ReadEvent>) -> usize {
        let mut known: std::collections::BTreeSet<(String, String)> = self
            .reads
            .iter()
            .map(|e| (e.session.clone(), e.record.to_string()))
            .collect();
        let mut added = 0;
        for event in events {
            if known.insert((event.session.clone(), event.record.to_string())) {
                self.reads.push(event);
                added += 1;
            }
        }
        added
    }

    pub fn derived_dir(&self) -> PathBuf {
        self.corpus_dir.join(DERIVED_DIR)
    }

    /// Write the derived graph and co-read snapshots. Deterministic bytes
    /// for a given store state.
    pub fn save_derived(&self, graph: &CitationGraph, coread: &CoReadStats) -> Result<()> {
        let dir = self.derived_dir();
        fs::create_dir_all(&dir)?;
        let graph_json =
            serde_json::to_string_pretty(&graph.to_doc()).expect("graph doc serializes");
        fs::write(dir.join(GRAPH_FILE), graph_json + "\n")?;
        let coread_json =
            serde_json::to_string_pretty(&coread.to_doc()).expect("coread doc serializes");
        fs::write(dir.join(COREAD_FILE), coread_json + "\n")?;
        Ok(())
    }

    /// Load derived snapshots, or recompute them from the store when the
    /// files are missing (identical by determinism).
    pub fn load_derived(
        &self,
        snap: &CorpusSnapshot,
        thresholds: &Thresholds,
    ) -> Result<(CitationGraph, CoReadStats)> {
        let dir = self.derived_dir();
        let graph = match fs::read_to_string(dir.join(GRAPH_FILE)) {
            Ok(body) => {
                let doc: GraphDoc = serde_json::from_str(&body)
                    .map_err(|e| Error::Validation(format!("corrupt {GRAPH_FILE}: {e}")))?;
                CitationGraph::from_doc(doc)
            }
            Err(_) => build_citation_graph(snap),
        };
        let coread = match fs::read_to_string(dir.join(COREAD_FILE)) {
            Ok(body) => {
                let doc: CoReadDoc = serde_json::from_str(&body)
                    .map_err(|e| Error::Validation(format!("corrupt {COREAD_FILE}: {e}")))?;
                CoReadStats::from_doc(doc)
            }
            Err(_) => compute_coread(&self.reads, snap, thresholds),
        };
        Ok((graph, coread))
    }
}
