//! Inverted index over title, abstract, authors, and categories.
//!
//! Token positions are stored for title and abstract so phrases can be
//! matched by adjacency; author and category postings carry no positions.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{BibRecord, CorpusSnapshot, RecordId};
use crate::text::tokenize;

/// Indexed field. `Any` is only meaningful in queries and denotes the
/// union of the four concrete fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Field {
    Title,
    Abstract,
    Author,
    Category,
    Any,
}

impl Field {
    pub const CONCRETE: [Field; 4] = [Field::Title, Field::Abstract, Field::Author, Field::Category];

    pub fn name(&self) -> &'static str {
        match self {
            Field::Title => "title",
            Field::Abstract => "abstract",
            Field::Author => "author",
            Field::Category => "category",
            Field::Any => "any",
        }
    }

    pub fn parse(name: &str) -> Option<Field> {
        match name {
            "title" => Some(Field::Title),
            "abstract" => Some(Field::Abstract),
            "author" => Some(Field::Author),
            "category" => Some(Field::Category),
            "any" => Some(Field::Any),
            _ => None,
        }
    }
}

/// One document entry in a posting list. Positions are indices into the
/// filtered token stream (after stopword and short-token removal) and are
/// empty for fields that do not store positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Posting {
    pub id: RecordId,
    pub positions: Vec<u32>,
}

/// Normalized author entry kept alongside the postings so author-prefix
/// queries can be answered from the index alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedAuthor {
    pub last: String,
    pub initials: String,
}

/// Immutable index built from a corpus snapshot. Rebuilding from the same
/// snapshot yields an identical value.
#[derive(Debug, Clone, Default)]
pub struct IndexSnapshot {
    doc_ids: Vec<RecordId>,
    postings: BTreeMap<String, BTreeMap<Field, Vec<Posting>>>,
    token_doc_freq: BTreeMap<String, usize>,
    authors_norm: BTreeMap<RecordId, Vec<NormalizedAuthor>>,
}

impl IndexSnapshot {
    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    /// All indexed record ids, ascending.
    pub fn doc_ids(&self) -> &[RecordId] {
        &self.doc_ids
    }

    /// Posting list for a token in one concrete field.
    pub fn postings(&self, token: &str, field: Field) -> &[Posting] {
        debug_assert_ne!(field, Field::Any);
        self.postings
            .get(token)
            .and_then(|fields| fields.get(&field))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Ids containing the token in the given field (`Any` = union).
    pub fn ids_with_token(&self, token: &str, field: Field) -> BTreeSet<RecordId> {
        match field {
            Field::Any => {
                let mut out = BTreeSet::new();
                for f in Field::CONCRETE {
                    out.extend(self.postings(token, f).iter().map(|p| p.id.clone()));
                }
                out
            }
            f => self.postings(token, f).iter().map(|p| p.id.clone()).collect(),
        }
    }

    /// Number of distinct records containing the token in any field.
    pub fn token_doc_freq(&self, token: &str) -> usize {
        self.token_doc_freq.get(token).copied().unwrap_or(0)
    }

    pub fn normalized_authors(&self, id: &RecordId) -> &[NormalizedAuthor] {
        self.authors_norm.get(id).map(Vec::as_slice).unwrap_or(&[])
    }
}

fn push_posting(
    postings: &mut BTreeMap<String, BTreeMap<Field, Vec<Posting>>>,
    token: String,
    field: Field,
    id: &RecordId,
    position: Option<u32>,
) {
    let list = postings.entry(token).or_default().entry(field).or_default();
    match list.last_mut() {
        Some(last) if last.id == *id => {
            if let Some(pos) = position {
                last.positions.push(pos);
            }
        }
        _ => list.push(Posting { id: id.clone(), positions: position.into_iter().collect() }),
    }
}

fn index_record(idx: &mut IndexSnapshot, record: &BibRecord) {
    let mut seen: BTreeSet<String> = BTreeSet::new();

    for (field, body) in [(Field::Title, &record.title), (Field::Abstract, &record.abstract_text)] {
        for (pos, token) in tokenize(body).into_iter().enumerate() {
            seen.insert(token.clone());
            push_posting(&mut idx.postings, token, field, &record.id, Some(pos as u32));
        }
    }

    let mut author_tokens = BTreeSet::new();
    for author in &record.authors {
        let text = format!("{} {}", author.last, author.first_initials);
        author_tokens.extend(tokenize(&text));
    }
    for token in author_tokens {
        seen.insert(token.clone());
        push_posting(&mut idx.postings, token, Field::Author, &record.id, None);
    }

    let mut category_tokens = BTreeSet::new();
    for tag in &record.categories {
        category_tokens.extend(tokenize(tag));
    }
    for token in category_tokens {
        seen.insert(token.clone());
        push_posting(&mut idx.postings, token, Field::Category, &record.id, None);
    }

    for token in seen {
        *idx.token_doc_freq.entry(token).or_insert(0) += 1;
    }

    idx.authors_norm.insert(
        record.id.clone(),
        record
            .authors
            .iter()
            .map(|a| NormalizedAuthor { last: a.normalized_last(), initials: a.normalized_initials() })
            .collect(),
    );
}

/// Build the inverted index from a corpus snapshot. Posting lists come out
/// sorted by id because snapshot iteration is id-ordered.
pub fn build_index(corpus: &CorpusSnapshot) -> IndexSnapshot {
    let mut idx = IndexSnapshot::default();
    for record in corpus.records() {
        idx.doc_ids.push(record.id.clone());
        index_record(&mut idx, record);
    }
    idx
}
