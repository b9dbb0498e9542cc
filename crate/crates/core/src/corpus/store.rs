use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use chrono::NaiveDate;

use super::record::{BibRecord, RawRecord, RecordId};
use crate::{Error, Result};

const RECORDS_FILE: &str = "records.jsonl";

/// Outcome of an ingestion pass: how many items were added and which
/// lines were rejected, with a reason per line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub added: usize,
    /// (1-based line number, reason)
    pub rejected: Vec<(usize, String)>,
}

/// Single-writer record store. Readers take immutable [`CorpusSnapshot`]s.
#[derive(Debug, Default, Clone)]
pub struct CorpusStore {
    records: BTreeMap<RecordId, BibRecord>,
}

impl CorpusStore {
    pub fn new() -> Self {
        CorpusStore::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Ingest a line-delimited JSON record file. Records missing
    /// `date_added` are stamped with `as_of`. Malformed lines are rejected
    /// individually; an unreadable file is fatal.
    pub fn ingest_records(&mut self, path: impl AsRef<Path>, as_of: NaiveDate) -> Result<IngestReport> {
        let file = fs::File::open(path)?;
        Ok(self.ingest_from(BufReader::new(file), as_of)?)
    }

    /// Ingest from any reader; used by `ingest_records` and tests.
    pub fn ingest_from<R: BufRead>(&mut self, reader: R, as_of: NaiveDate) -> std::io::Result<IngestReport> {
        let mut report = IngestReport::default();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<RawRecord>(&line) {
                Ok(raw) => {
                    let record = raw.into_record(as_of);
                    if let Err(reason) = self.validate_new(&record) {
                        report.rejected.push((line_no, reason));
                    } else {
                        self.records.insert(record.id.clone(), record);
                        report.added += 1;
                    }
                }
                Err(err) => report.rejected.push((line_no, format!("invalid record: {err}"))),
            }
        }
        Ok(report)
    }

    fn validate_new(&self, record: &BibRecord) -> std::result::Result<(), String> {
        if self.records.contains_key(&record.id) {
            return Err("duplicate id".to_string());
        }
        if record.title.trim().is_empty() {
            return Err("empty title".to_string());
        }
        if record.authors.is_empty() {
            return Err("empty author list".to_string());
        }
        if record.resolved_refs.iter().any(|r| *r == record.id) {
            return Err("self-reference in resolved_refs".to_string());
        }
        Ok(())
    }

    /// Insert a record directly, rejecting invariant violations. Meant for
    /// fixtures and generators; file ingestion goes through `ingest_records`.
    pub fn insert(&mut self, record: BibRecord) -> Result<()> {
        self.validate_new(&record).map_err(Error::Validation)?;
        self.records.insert(record.id.clone(), record);
        Ok(())
    }

    pub fn get(&self, id: &RecordId) -> Result<&BibRecord> {
        self.records.get(id).ok_or_else(|| Error::NotFound(id.to_string()))
    }

    pub fn contains(&self, id: &RecordId) -> bool {
        self.records.contains_key(id)
    }

    pub fn records(&self) -> impl Iterator<Item = &BibRecord> {
        self.records.values()
    }

    pub(crate) fn get_mut(&mut self, id: &RecordId) -> Option<&mut BibRecord> {
        self.records.get_mut(id)
    }

    /// Replace a record's resolved references. Self-references are dropped.
    pub fn set_resolved_refs(&mut self, id: &RecordId, refs: Vec<RecordId>) -> Result<()> {
        if !self.records.contains_key(id) {
            return Err(Error::NotFound(id.to_string()));
        }
        let known: Vec<RecordId> = refs
            .into_iter()
            .filter(|r| *r != *id && self.records.contains_key(r))
            .collect();
        let mut deduped = Vec::with_capacity(known.len());
        for r in known {
            if !deduped.contains(&r) {
                deduped.push(r);
            }
        }
        self.records.get_mut(id).expect("checked above").resolved_refs = deduped;
        Ok(())
    }

    /// The identity group an id belongs to: the id itself plus its
    /// concordance partner, if linked.
    pub fn merged_identity(&self, id: &RecordId) -> Result<BTreeSet<RecordId>> {
        let record = self.get(id)?;
        let mut group = BTreeSet::new();
        group.insert(record.id.clone());
        if let Some(partner) = &record.concordance {
            group.insert(partner.clone());
        }
        Ok(group)
    }

    /// Immutable snapshot safe to hand across threads.
    pub fn snapshot(&self) -> CorpusSnapshot {
        CorpusSnapshot { records: Arc::new(self.records.clone()) }
    }

    /// Persist the store into `dir` as snapshot files. The layout is an
    /// internal contract; save/load round-trips byte-identically.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        for record in self.records.values() {
            serde_json::to_writer(&mut out, record).expect("record serialization cannot fail");
            out.push(b'\n');
        }
        let mut file = fs::File::create(dir.join(RECORDS_FILE))?;
        file.write_all(&out)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let path = dir.as_ref().join(RECORDS_FILE);
        let file = fs::File::open(&path)?;
        let mut records = BTreeMap::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: BibRecord = serde_json::from_str(&line).map_err(|err| {
                Error::Validation(format!("corrupt store at {}:{}: {err}", path.display(), idx + 1))
            })?;
            records.insert(record.id.clone(), record);
        }
        Ok(CorpusStore { records })
    }
}

/// Immutable view of the corpus taken between ingestions.
#[derive(Debug, Clone)]
pub struct CorpusSnapshot {
    records: Arc<BTreeMap<RecordId, BibRecord>>,
}

impl CorpusSnapshot {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &RecordId) -> Result<&BibRecord> {
        self.records.get(id).ok_or_else(|| Error::NotFound(id.to_string()))
    }

    pub fn contains(&self, id: &RecordId) -> bool {
        self.records.contains_key(id)
    }

    /// Records in ascending id order.
    pub fn records(&self) -> impl Iterator<Item = &BibRecord> {
        self.records.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &RecordId> {
        self.records.keys()
    }

    pub fn merged_identity(&self, id: &RecordId) -> Result<BTreeSet<RecordId>> {
        let record = self.get(id)?;
        let mut group = BTreeSet::new();
        group.insert(record.id.clone());
        if let Some(partner) = &record.concordance {
            group.insert(partner.clone());
        }
        Ok(group)
    }

    /// Canonical representative of an id's identity group (smallest id).
    pub fn group_rep(&self, id: &RecordId) -> Result<RecordId> {
        let record = self.get(id)?;
        match &record.concordance {
            Some(partner) if partner < &record.id => Ok(partner.clone()),
            _ => Ok(record.id.clone()),
        }
    }

    /// True when the group containing `rep` includes an e-print.
    pub fn group_has_eprint(&self, id: &RecordId) -> Result<bool> {
        let group = self.merged_identity(id)?;
        for member in &group {
            if self.get(member)?.kind == super::Kind::Eprint {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// All identity-group representatives, ascending.
    pub fn group_reps(&self) -> Vec<RecordId> {
        let mut reps = BTreeSet::new();
        for record in self.records.values() {
            reps.insert(self.group_rep(&record.id).expect("record exists"));
        }
        reps.into_iter().collect()
    }
}
