//! Desk-scale virtual-journal pipeline.
//!
//! The library ingests bibliographic records and readership logs, links
//! e-prints to their published journal versions, resolves free-text
//! reference strings into a citation graph, and evaluates subscriber
//! profiles through second-order operators (recent / most popular /
//! most cited) to produce weekly newsletters and daily alerts.
//!
//! The main pieces:
//!
//! - [`corpus`] — canonical record store, ingestion, e-print/journal
//!   concordance, persistence.
//! - [`index`] — tokenization and the inverted index over
//!   title/abstract/authors/categories.
//! - [`query`] — the boolean subject/author query language: parsing and
//!   evaluation against an index snapshot.
//! - [`refgraph`] — reference-string parsing, resolution against the
//!   corpus, and the citation graph.
//! - [`readstats`] — readership logs and also-read (co-read) statistics.
//! - [`secondorder`] — operators over query result lists.
//! - [`profile`] / [`newsletter`] — subscriber profiles, weekly/daily
//!   document generation, and HTML/plain-text rendering.
//! - [`analytics`] — e-print fraction and reads/cites measurements over
//!   a corpus and its citation graph.
//! - [`synth`] — deterministic synthetic corpora, reference strings, and
//!   read logs for experiments and tests.

use chrono::NaiveDate;
use thiserror::Error;

pub mod analytics;
pub mod config;
pub mod corpus;
pub mod index;
pub mod newsletter;
pub mod profile;
pub mod query;
pub mod readstats;
pub mod refgraph;
pub mod secondorder;
pub mod synth;
pub mod text;

pub use config::{SeedOrder, Thresholds};
pub use corpus::{AuthorName, BibRecord, CorpusSnapshot, CorpusStore, IngestReport, Kind, RecordId};
pub use index::{build_index, Field, IndexSnapshot};
pub use query::{evaluate_query, match_author, parse_query, QueryAst};

/// A specialized Result type for pipeline operations.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the pipeline.
#[derive(Error, Debug)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("record not found: {0}")]
    NotFound(String),

    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Parse(#[from] query::ParseError),

    #[error("invalid window: start {start} is after end {end}")]
    InvalidWindow { start: NaiveDate, end: NaiveDate },
}

impl Error {
    /// True for errors caused by unreadable or unwritable files.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}
