//! Canonical record store: ingestion, identity, e-print/journal
//! concordance, persistence.

mod concordance;
mod record;
mod store;

pub use concordance::{match_concordance, AmbiguousPair, ConcordanceOutcome};
pub use record::{AuthorName, BibRecord, Kind, RecordId};
pub use store::{CorpusSnapshot, CorpusStore, IngestReport};
