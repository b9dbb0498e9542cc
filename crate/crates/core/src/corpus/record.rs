use std::collections::BTreeSet;
use std::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::text;
use crate::{Error, Result};

/// Fixed-width record identifier, 19 characters:
/// `YYYY` + 5-character source code + 9-character locator + 1 initial,
/// padded with dots (e.g. `2005ApJ...123..456K`, `2005arXiv0501001..H`).
///
/// For journal records the locator encodes volume (4 chars), a qualifier
/// (1 char), and page (4 chars).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RecordId(String);

impl RecordId {
    pub const LEN: usize = 19;

    pub fn new(value: impl Into<String>) -> Result<Self> {
        let value = value.into();
        if value.len() != Self::LEN {
            return Err(Error::Validation(format!(
                "invalid id {value:?}: expected {} characters, got {}",
                Self::LEN,
                value.len()
            )));
        }
        if !value
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '&' | '-' | '+' | '_'))
        {
            return Err(Error::Validation(format!(
                "invalid id {value:?}: contains characters outside [A-Za-z0-9.&-+_]"
            )));
        }
        let year: i32 = value[..4]
            .parse()
            .map_err(|_| Error::Validation(format!("invalid id {value:?}: first 4 characters must be a year")))?;
        if !(1900..=2100).contains(&year) {
            return Err(Error::Validation(format!(
                "invalid id {value:?}: year {year} outside [1900, 2100]"
            )));
        }
        Ok(RecordId(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Year from the first four characters. Valid by construction.
    pub fn year(&self) -> i32 {
        self.0[..4].parse().expect("validated at construction")
    }

    /// Source code (characters 4..9) with pad dots stripped.
    pub fn source_code(&self) -> &str {
        self.0[4..9].trim_matches('.')
    }

    /// Volume encoded in the locator (characters 9..13), when numeric.
    pub fn volume(&self) -> Option<u32> {
        let v = self.0[9..13].trim_matches('.');
        if v.is_empty() {
            None
        } else {
            v.parse().ok()
        }
    }

    /// Page encoded in the locator (characters 14..18), when present.
    pub fn page(&self) -> Option<&str> {
        let p = self.0[14..18].trim_matches('.');
        if p.is_empty() {
            None
        } else {
            Some(p)
        }
    }
}

impl fmt::Display for RecordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for RecordId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        RecordId::new(value)
    }
}

impl From<RecordId> for String {
    fn from(id: RecordId) -> String {
        id.0
    }
}

impl std::str::FromStr for RecordId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RecordId::new(s)
    }
}

/// Whether a record is an arXiv-style e-print or a published journal paper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Eprint,
    Journal,
}

/// One author of a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorName {
    pub last: String,
    #[serde(default)]
    pub first_initials: String,
}

impl AuthorName {
    pub fn new(last: impl Into<String>, first_initials: impl Into<String>) -> Self {
        AuthorName { last: last.into(), first_initials: first_initials.into() }
    }

    /// Case-folded, diacritic-stripped last name used for matching.
    pub fn normalized_last(&self) -> String {
        text::normalize_last_name(&self.last)
    }

    /// Normalized initials: "M.J." -> "mj".
    pub fn normalized_initials(&self) -> String {
        text::normalize_initials(&self.first_initials)
    }
}

impl fmt::Display for AuthorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.first_initials.is_empty() {
            f.write_str(&self.last)
        } else {
            write!(f, "{}, {}", self.last, self.first_initials)
        }
    }
}

/// One bibliographic item (e-print or journal paper).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BibRecord {
    pub id: RecordId,
    pub kind: Kind,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    pub authors: Vec<AuthorName>,
    #[serde(default)]
    pub categories: BTreeSet<String>,
    /// Ingestion date; drives "recent".
    pub date_added: NaiveDate,
    pub date_published: NaiveDate,
    #[serde(default)]
    pub reference_strings: Vec<String>,
    /// Resolved reference targets, filled by the reference resolver.
    #[serde(default)]
    pub resolved_refs: Vec<RecordId>,
    /// The other half of an e-print/journal pair, when linked.
    #[serde(default)]
    pub concordance: Option<RecordId>,
}

impl BibRecord {
    /// Publication year.
    pub fn published_year(&self) -> i32 {
        self.date_published.year()
    }

    /// Venue tokens used for reference matching: the id source code for
    /// journal papers, "arxiv" for e-prints.
    pub fn venue_tokens(&self) -> Vec<String> {
        match self.kind {
            Kind::Journal => text::venue_tokens(self.id.source_code()),
            Kind::Eprint => vec!["arxiv".to_string()],
        }
    }
}

/// A record as it appears on an input line: `date_added` may be missing
/// and is stamped with the ingestion date.
#[derive(Debug, Deserialize)]
pub(crate) struct RawRecord {
    pub id: RecordId,
    pub kind: Kind,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    pub authors: Vec<AuthorName>,
    #[serde(default)]
    pub categories: BTreeSet<String>,
    #[serde(default)]
    pub date_added: Option<NaiveDate>,
    pub date_published: NaiveDate,
    #[serde(default)]
    pub reference_strings: Vec<String>,
    #[serde(default)]
    pub resolved_refs: Vec<RecordId>,
    #[serde(default)]
    pub concordance: Option<RecordId>,
}

impl RawRecord {
    pub(crate) fn into_record(self, as_of: NaiveDate) -> BibRecord {
        BibRecord {
            id: self.id,
            kind: self.kind,
            title: self.title,
            abstract_text: self.abstract_text,
            authors: self.authors,
            categories: self.categories,
            date_added: self.date_added.unwrap_or(as_of),
            date_published: self.date_published,
            reference_strings: self.reference_strings,
            resolved_refs: self.resolved_refs,
            concordance: self.concordance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_round_trip_and_fields() {
        let id = RecordId::new("2005ApJ...123..456K").unwrap();
        assert_eq!(id.year(), 2005);
        assert_eq!(id.source_code(), "ApJ");
        assert_eq!(id.volume(), Some(123));
        assert_eq!(id.page(), Some("456"));
    }

    #[test]
    fn eprint_id_fields() {
        let id = RecordId::new("2005arXiv0501001..H").unwrap();
        assert_eq!(id.source_code(), "arXiv");
        assert_eq!(id.year(), 2005);
    }

    #[test]
    fn id_rejects_bad_length_and_year() {
        assert!(RecordId::new("2005ApJ").is_err());
        assert!(RecordId::new("1850ApJ...123..456K").is_err());
        assert!(RecordId::new("20x5ApJ...123..456K").is_err());
        assert!(RecordId::new("2005ApJ ..123..456K").is_err());
    }

    #[test]
    fn author_normalization() {
        let a = AuthorName::new("Kürtz", "M.J.");
        assert_eq!(a.normalized_last(), "kurtz");
        assert_eq!(a.normalized_initials(), "mj");
    }
}
