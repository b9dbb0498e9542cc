//! Subscriber profiles: limits, eager query validation, persistence.
//!
//! Queries are parsed at save time so bad syntax fails when the profile
//! is stored, not when a newsletter is sent.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::query::{parse_query, AuthorQuery};
use crate::{Error, Result};

pub const MAX_SUBJECT_QUERIES: usize = 2;
pub const MAX_AUTHOR_QUERIES: usize = 1;

/// A validated subscriber profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub profile_id: String,
    /// At most two subject queries, all parseable.
    pub subject_queries: Vec<String>,
    /// At most one author query in "Last, F" form.
    pub author_query: Option<String>,
    pub daily_categories: BTreeSet<String>,
    pub daily_sort_query: Option<String>,
    pub last_run: Option<NaiveDate>,
}

/// Unvalidated profile as it appears on disk. Author queries are stored
/// as an array so over-limit inputs are representable and rejectable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileDraft {
    pub profile_id: String,
    #[serde(default)]
    pub subject_queries: Vec<String>,
    #[serde(default)]
    pub author_queries: Vec<String>,
    #[serde(default)]
    pub daily_categories: BTreeSet<String>,
    #[serde(default)]
    pub daily_sort_query: Option<String>,
    #[serde(default)]
    pub last_run: Option<NaiveDate>,
}

impl Profile {
    /// Validate a draft: enforce the 2-subject / 1-author limits and parse
    /// every stored query eagerly.
    pub fn validate(draft: ProfileDraft) -> Result<Profile> {
        if draft.profile_id.is_empty()
            || !draft.profile_id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_'))
        {
            return Err(Error::Validation(format!(
                "profile id {:?} must be nonempty and use only [A-Za-z0-9_-]",
                draft.profile_id
            )));
        }
        if draft.subject_queries.len() > MAX_SUBJECT_QUERIES {
            return Err(Error::Validation(format!(
                "maximum of {MAX_SUBJECT_QUERIES} subject queries, got {}",
                draft.subject_queries.len()
            )));
        }
        if draft.author_queries.len() > MAX_AUTHOR_QUERIES {
            return Err(Error::Validation(format!(
                "maximum of {MAX_AUTHOR_QUERIES} author query, got {}",
                draft.author_queries.len()
            )));
        }
        for q in &draft.subject_queries {
            parse_query(q)?;
        }
        if let Some(q) = &draft.daily_sort_query {
            parse_query(q)?;
        }
        if let Some(a) = draft.author_queries.first() {
            AuthorQuery::parse(a)?;
        }
        Ok(Profile {
            profile_id: draft.profile_id,
            subject_queries: draft.subject_queries,
            author_query: draft.author_queries.into_iter().next(),
            daily_categories: draft.daily_categories,
            daily_sort_query: draft.daily_sort_query,
            last_run: draft.last_run,
        })
    }

    fn to_draft(&self) -> ProfileDraft {
        ProfileDraft {
            profile_id: self.profile_id.clone(),
            subject_queries: self.subject_queries.clone(),
            author_queries: self.author_query.iter().cloned().collect(),
            daily_categories: self.daily_categories.clone(),
            daily_sort_query: self.daily_sort_query.clone(),
            last_run: self.last_run,
        }
    }
}

/// One JSON document per profile in a directory.
#[derive(Debug, Clone)]
pub struct ProfileStore {
    dir: PathBuf,
}

impl ProfileStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(&dir)?;
        Ok(ProfileStore { dir: dir.as_ref().to_path_buf() })
    }

    fn path_of(&self, profile_id: &str) -> PathBuf {
        self.dir.join(format!("{profile_id}.json"))
    }

    /// Validate and persist a profile.
    pub fn save(&self, draft: ProfileDraft) -> Result<Profile> {
        let profile = Profile::validate(draft)?;
        let json = serde_json::to_string_pretty(&profile.to_draft()).expect("profile serializes");
        fs::write(self.path_of(&profile.profile_id), json + "\n")?;
        Ok(profile)
    }

    pub fn load(&self, profile_id: &str) -> Result<Profile> {
        let path = self.path_of(profile_id);
        if !path.exists() {
            return Err(Error::NotFound(format!("profile {profile_id}")));
        }
        let body = fs::read_to_string(&path)?;
        let draft: ProfileDraft = serde_json::from_str(&body)
            .map_err(|err| Error::Validation(format!("invalid profile {}: {err}", path.display())))?;
        Profile::validate(draft)
    }

    /// All stored profiles, ordered by profile id.
    pub fn load_all(&self) -> Result<Vec<Profile>> {
        let mut names: Vec<String> = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().to_string();
            if let Some(stem) = name.strip_suffix(".json") {
                names.push(stem.to_string());
            }
        }
        names.sort();
        names.into_iter().map(|id| self.load(&id)).collect()
    }

    /// Record a successful newsletter run.
    pub fn set_last_run(&self, profile_id: &str, date: NaiveDate) -> Result<()> {
        let mut profile = self.load(profile_id)?;
        profile.last_run = Some(date);
        self.save(profile.to_draft())?;
        Ok(())
    }
}
