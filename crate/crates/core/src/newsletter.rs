//! Weekly newsletter and daily alert generation, plus HTML and
//! plain-text rendering.
//!
//! Documents carry their own display data, so rendering needs no corpus
//! access and serving needs no state beyond the stored bytes.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Days, NaiveDate};
use sha2::{Digest, Sha256};

use crate::corpus::{CorpusSnapshot, Kind, RecordId};
use crate::index::IndexSnapshot;
use crate::profile::Profile;
use crate::query::{evaluate_query, match_author, parse_query, AuthorQuery};
use crate::readstats::CoReadStats;
use crate::refgraph::CitationGraph;
use crate::secondorder::{most_cited, most_popular, recent, RankedList};
use crate::{Result, Thresholds};

/// Default window when a profile has never been run.
const DEFAULT_WINDOW_DAYS: u64 = 7;

/// Immutable inputs for newsletter generation, all built from the same
/// corpus state.
#[derive(Clone, Copy)]
pub struct Snapshots<'a> {
    pub corpus: &'a CorpusSnapshot,
    pub index: &'a IndexSnapshot,
    pub graph: &'a CitationGraph,
    pub coread: &'a CoReadStats,
}

/// Display data for one record, captured at generation time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryView {
    pub id: RecordId,
    pub title: String,
    /// Formatted author names ("Last, F."), in record order.
    pub authors: Vec<String>,
    pub date_added: NaiveDate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectSection {
    pub query: String,
    pub recent: RankedList,
    pub most_popular: RankedList,
    pub most_cited: RankedList,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorSection {
    pub query: String,
    /// Recent papers by the queried author, newest first.
    pub entries: Vec<RecordId>,
}

/// A rendered-ready weekly newsletter.
#[derive(Debug, Clone, PartialEq)]
pub struct NewsletterDoc {
    pub profile_id: String,
    pub generated_at: NaiveDate,
    pub window: (NaiveDate, NaiveDate),
    pub subject_sections: Vec<SubjectSection>,
    pub author_section: Option<AuthorSection>,
    /// (citing, cited) pairs where the cited work is by the queried author.
    pub citations_section: Option<Vec<(RecordId, RecordId)>>,
    pub public_token: String,
    views: BTreeMap<RecordId, EntryView>,
}

impl NewsletterDoc {
    pub fn view(&self, id: &RecordId) -> Option<&EntryView> {
        self.views.get(id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlertEntry {
    pub id: RecordId,
    pub starred: bool,
    pub score: f64,
}

/// A daily alert: new e-prints in the subscriber's categories.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyAlert {
    pub profile_id: String,
    pub date: NaiveDate,
    pub entries: Vec<AlertEntry>,
    views: BTreeMap<RecordId, EntryView>,
}

impl DailyAlert {
    pub fn view(&self, id: &RecordId) -> Option<&EntryView> {
        self.views.get(id)
    }
}

/// Collision-resistant public token for a newsletter: unguessable but
/// reproducible from (profile id, generation date).
pub fn public_token(profile_id: &str, generated_at: NaiveDate) -> String {
    let mut hasher = Sha256::new();
    hasher.update(profile_id.as_bytes());
    hasher.update([0x1f]);
    hasher.update(generated_at.to_string().as_bytes());
    hex::encode(hasher.finalize())
}

/// True for strings shaped like a public token (64 lowercase hex chars).
pub fn is_public_token(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

fn view_of(corpus: &CorpusSnapshot, id: &RecordId) -> Option<EntryView> {
    let record = corpus.get(id).ok()?;
    Some(EntryView {
        id: record.id.clone(),
        title: record.title.clone(),
        authors: record.authors.iter().map(|a| a.to_string()).collect(),
        date_added: record.date_added,
    })
}

/// Generate the weekly newsletter for a profile.
///
/// Pure function of (profile, snapshots, now); the caller records the run
/// in the profile store only after generation succeeds. The window opens
/// at `last_run` when that lies strictly before `now`, else seven days
/// before `now`, so a rerun with the same pinned clock reproduces the
/// same document.
pub fn generate_weekly(
    profile: &Profile,
    snapshots: Snapshots<'_>,
    now: NaiveDate,
    thresholds: &Thresholds,
) -> Result<NewsletterDoc> {
    let since = match profile.last_run {
        Some(last) if last < now => last,
        _ => now - Days::new(DEFAULT_WINDOW_DAYS),
    };

    let mut doc = NewsletterDoc {
        profile_id: profile.profile_id.clone(),
        generated_at: now,
        window: (since, now),
        subject_sections: Vec::new(),
        author_section: None,
        citations_section: None,
        public_token: public_token(&profile.profile_id, now),
        views: BTreeMap::new(),
    };

    for raw_query in &profile.subject_queries {
        let ast = parse_query(raw_query)?;
        let section = SubjectSection {
            query: raw_query.clone(),
            recent: recent(&ast, snapshots.corpus, snapshots.index, since, now, thresholds)?,
            most_popular: most_popular(&ast, snapshots.corpus, snapshots.index, snapshots.coread, now, thresholds),
            most_cited: most_cited(&ast, snapshots.corpus, snapshots.index, snapshots.graph, now, thresholds),
        };
        for list in [&section.recent, &section.most_popular, &section.most_cited] {
            for (id, _) in &list.entries {
                if let Some(view) = view_of(snapshots.corpus, id) {
                    doc.views.insert(id.clone(), view);
                }
            }
        }
        doc.subject_sections.push(section);
    }

    if let Some(raw_author) = &profile.author_query {
        let author_q = AuthorQuery::parse(raw_author)?;

        let mut recent_by_author: Vec<(NaiveDate, RecordId)> = snapshots
            .corpus
            .records()
            .filter(|r| r.date_added > since && r.date_added <= now && match_author(&author_q, r))
            .map(|r| (r.date_added, r.id.clone()))
            .collect();
        recent_by_author.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        recent_by_author.truncate(thresholds.list_cap);
        let entries: Vec<RecordId> = recent_by_author.into_iter().map(|(_, id)| id).collect();
        for id in &entries {
            if let Some(view) = view_of(snapshots.corpus, id) {
                doc.views.insert(id.clone(), view);
            }
        }
        doc.author_section = Some(AuthorSection { query: raw_author.clone(), entries });

        // citations to any of the author's papers from records added in the window
        let author_groups: BTreeSet<RecordId> = snapshots
            .corpus
            .records()
            .filter(|r| match_author(&author_q, r))
            .filter_map(|r| snapshots.graph.rep(&r.id).cloned())
            .collect();
        let mut pairs: BTreeSet<(RecordId, RecordId)> = BTreeSet::new();
        for citing in snapshots.corpus.records() {
            if !(citing.date_added > since && citing.date_added <= now) {
                continue;
            }
            let citing_rep = snapshots.graph.rep(&citing.id);
            for target in &citing.resolved_refs {
                let Some(target_rep) = snapshots.graph.rep(target) else { continue };
                if author_groups.contains(target_rep) && citing_rep != Some(target_rep) {
                    pairs.insert((citing.id.clone(), target.clone()));
                }
            }
        }
        for (citing, cited) in &pairs {
            for id in [citing, cited] {
                if let Some(view) = view_of(snapshots.corpus, id) {
                    doc.views.insert(id.clone(), view);
                }
            }
        }
        doc.citations_section = Some(pairs.into_iter().collect());
    }

    Ok(doc)
}

/// Generate the daily alert: e-prints added on `date` in the profile's
/// categories, starred and sorted by the daily sort query when present,
/// otherwise in ascending id order.
pub fn generate_daily(
    profile: &Profile,
    corpus: &CorpusSnapshot,
    idx: &IndexSnapshot,
    date: NaiveDate,
    _thresholds: &Thresholds,
) -> Result<DailyAlert> {
    let mut candidates: Vec<RecordId> = corpus
        .records()
        .filter(|r| {
            r.kind == Kind::Eprint
                && r.date_added == date
                && r.categories.iter().any(|c| profile.daily_categories.contains(c))
        })
        .map(|r| r.id.clone())
        .collect();
    candidates.sort();

    let mut entries: Vec<AlertEntry> = match &profile.daily_sort_query {
        Some(raw) => {
            let ast = parse_query(raw)?;
            let scored: BTreeMap<RecordId, f64> = evaluate_query(&ast, idx).into_iter().collect();
            let mut entries: Vec<AlertEntry> = candidates
                .into_iter()
                .map(|id| {
                    let score = scored.get(&id).copied();
                    AlertEntry { id, starred: score.is_some(), score: score.unwrap_or(0.0) }
                })
                .collect();
            entries.sort_by(|a, b| {
                b.starred
                    .cmp(&a.starred)
                    .then_with(|| b.score.total_cmp(&a.score))
                    .then_with(|| a.id.cmp(&b.id))
            });
            entries
        }
        None => candidates
            .into_iter()
            .map(|id| AlertEntry { id, starred: false, score: 0.0 })
            .collect(),
    };
    entries.dedup_by(|a, b| a.id == b.id);

    let mut views = BTreeMap::new();
    for entry in &entries {
        if let Some(view) = view_of(corpus, &entry.id) {
            views.insert(entry.id.clone(), view);
        }
    }
    Ok(DailyAlert { profile_id: profile.profile_id.clone(), date, entries, views })
}

// ---------------------------------------------------------------------------
// Rendering

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Html,
    Text,
}

const TEXT_WIDTH: usize = 80;

fn wrap_into(out: &mut String, text: &str, indent: usize) {
    let prefix = " ".repeat(indent);
    let mut line = prefix.clone();
    let mut line_empty = true;
    for word in text.split_whitespace() {
        if !line_empty && line.len() + 1 + word.len() > TEXT_WIDTH {
            out.push_str(&line);
            out.push('\n');
            line = prefix.clone();
            line_empty = true;
        }
        if !line_empty {
            line.push(' ');
        }
        line.push_str(word);
        line_empty = false;
    }
    if !line_empty {
        out.push_str(&line);
        out.push('\n');
    }
}

fn author_line(authors: &[String]) -> String {
    let shown: Vec<&str> = authors.iter().take(3).map(String::as_str).collect();
    let line = shown.join("; ");
    if authors.len() > 3 {
        format!("{line} et al.")
    } else {
        line
    }
}

fn push_text_entry(out: &mut String, view: Option<&EntryView>, id: &RecordId, date: NaiveDate, starred: bool) {
    let marker = if starred { "* " } else { "  " };
    out.push_str(&format!("{marker}{id}  {date}\n"));
    if let Some(view) = view {
        wrap_into(out, &view.title, 4);
        wrap_into(out, &author_line(&view.authors), 4);
    }
}

fn push_text_list(out: &mut String, doc: &NewsletterDoc, list: &RankedList) {
    out.push_str(list.kind.heading());
    out.push('\n');
    if list.entries.is_empty() {
        out.push_str("  (none)\n");
        return;
    }
    for (id, _) in &list.entries {
        let view = doc.view(id);
        let date = view.map(|v| v.date_added).unwrap_or(list.generated_at);
        push_text_entry(out, view, id, date, false);
    }
}

fn render_newsletter_text(doc: &NewsletterDoc) -> String {
    let mut out = String::new();
    out.push_str("VIRTUAL JOURNAL WEEKLY\n");
    out.push_str(&format!("Profile: {}\n", doc.profile_id));
    out.push_str(&format!("Generated: {}\n", doc.generated_at));
    out.push_str(&format!("Window: {} .. {}\n", doc.window.0, doc.window.1));
    out.push_str(&"=".repeat(TEXT_WIDTH));
    out.push('\n');

    for section in &doc.subject_sections {
        out.push('\n');
        out.push_str(&format!("SUBJECT: {}\n", section.query));
        out.push_str(&"-".repeat(TEXT_WIDTH));
        out.push('\n');
        for list in [&section.recent, &section.most_popular, &section.most_cited] {
            push_text_list(&mut out, doc, list);
        }
    }

    if let Some(author) = &doc.author_section {
        out.push('\n');
        out.push_str(&format!("AUTHOR: {}\n", author.query));
        out.push_str(&"-".repeat(TEXT_WIDTH));
        out.push('\n');
        if author.entries.is_empty() {
            out.push_str("  (none)\n");
        }
        for id in &author.entries {
            let view = doc.view(id);
            let date = view.map(|v| v.date_added).unwrap_or(doc.generated_at);
            push_text_entry(&mut out, view, id, date, false);
        }
    }

    if let Some(pairs) = &doc.citations_section {
        out.push('\n');
        out.push_str("CITATIONS TO AUTHOR\n");
        out.push_str(&"-".repeat(TEXT_WIDTH));
        out.push('\n');
        if pairs.is_empty() {
            out.push_str("  (none)\n");
        }
        for (citing, cited) in pairs {
            out.push_str(&format!("  {citing} cites {cited}\n"));
        }
    }
    out
}

fn escape_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

const HTML_STYLE: &str = "body{font-family:Georgia,serif;margin:2em auto;max-width:48em;color:#222}\
h1{border-bottom:2px solid #333}h2{margin-top:1.5em}h3{color:#444}\
ul{list-style:none;padding-left:0}li{margin:0.6em 0}\
.id{font-family:monospace;color:#666}.title{font-weight:bold}\
.authors{color:#555}.date{color:#888}.none{color:#999;font-style:italic}\
.star{color:#b50}";

fn push_html_entry(out: &mut String, view: Option<&EntryView>, id: &RecordId, starred: bool) {
    out.push_str("<li>");
    if starred {
        out.push_str("<span class=\"star\">* </span>");
    }
    out.push_str(&format!("<span class=\"id\">{}</span> ", escape_html(id.as_str())));
    if let Some(view) = view {
        out.push_str(&format!("<span class=\"title\">{}</span> ", escape_html(&view.title)));
        out.push_str(&format!(
            "<span class=\"authors\">{}</span> ",
            escape_html(&author_line(&view.authors))
        ));
        out.push_str(&format!("<span class=\"date\">{}</span>", view.date_added));
    }
    out.push_str("</li>\n");
}

fn push_html_list(out: &mut String, doc: &NewsletterDoc, list: &RankedList) {
    out.push_str(&format!("<h3>{}</h3>\n", list.kind.heading()));
    if list.entries.is_empty() {
        out.push_str("<p class=\"none\">(none)</p>\n");
        return;
    }
    out.push_str("<ul>\n");
    for (id, _) in &list.entries {
        push_html_entry(out, doc.view(id), id, false);
    }
    out.push_str("</ul>\n");
}

fn html_document(title: &str, body: &str) -> String {
    format!(
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\"/>\n\
         <title>{}</title>\n<style>{}</style>\n</head>\n<body>\n{}</body>\n</html>\n",
        escape_html(title),
        HTML_STYLE,
        body
    )
}

fn render_newsletter_html(doc: &NewsletterDoc) -> String {
    let mut body = String::new();
    body.push_str("<h1>Virtual Journal Weekly</h1>\n");
    body.push_str(&format!(
        "<p class=\"date\">Profile: {} | Generated: {} | Window: {} .. {}</p>\n",
        escape_html(&doc.profile_id),
        doc.generated_at,
        doc.window.0,
        doc.window.1
    ));
    for section in &doc.subject_sections {
        body.push_str(&format!("<h2>Subject: {}</h2>\n", escape_html(&section.query)));
        for list in [&section.recent, &section.most_popular, &section.most_cited] {
            push_html_list(&mut body, doc, list);
        }
    }
    if let Some(author) = &doc.author_section {
        body.push_str(&format!("<h2>Author: {}</h2>\n", escape_html(&author.query)));
        if author.entries.is_empty() {
            body.push_str("<p class=\"none\">(none)</p>\n");
        } else {
            body.push_str("<ul>\n");
            for id in &author.entries {
                push_html_entry(&mut body, doc.view(id), id, false);
            }
            body.push_str("</ul>\n");
        }
    }
    if let Some(pairs) = &doc.citations_section {
        body.push_str("<h2>Citations to author</h2>\n");
        if pairs.is_empty() {
            body.push_str("<p class=\"none\">(none)</p>\n");
        } else {
            body.push_str("<ul>\n");
            for (citing, cited) in pairs {
                body.push_str(&format!(
                    "<li><span class=\"id\">{}</span> cites <span class=\"id\">{}</span></li>\n",
                    escape_html(citing.as_str()),
                    escape_html(cited.as_str())
                ));
            }
            body.push_str("</ul>\n");
        }
    }
    html_document(&format!("Weekly: {}", doc.profile_id), &body)
}

fn render_daily_text(alert: &DailyAlert) -> String {
    let mut out = String::new();
    out.push_str("DAILY ALERT\n");
    out.push_str(&format!("Profile: {}\n", alert.profile_id));
    out.push_str(&format!("Date: {}\n", alert.date));
    out.push_str(&"=".repeat(TEXT_WIDTH));
    out.push('\n');
    if alert.entries.is_empty() {
        out.push_str("  (none)\n");
    }
    for entry in &alert.entries {
        push_text_entry(&mut out, alert.view(&entry.id), &entry.id, alert.date, entry.starred);
    }
    out
}

fn render_daily_html(alert: &DailyAlert) -> String {
    let mut body = String::new();
    body.push_str("<h1>Daily Alert</h1>\n");
    body.push_str(&format!(
        "<p class=\"date\">Profile: {} | Date: {}</p>\n",
        escape_html(&alert.profile_id),
        alert.date
    ));
    if alert.entries.is_empty() {
        body.push_str("<p class=\"none\">(none)</p>\n");
    } else {
        body.push_str("<ul>\n");
        for entry in &alert.entries {
            push_html_entry(&mut body, alert.view(&entry.id), &entry.id, entry.starred);
        }
        body.push_str("</ul>\n");
    }
    html_document(&format!("Daily: {}", alert.profile_id), &body)
}

/// Render a newsletter. Deterministic; HTML output is self-contained.
pub fn render_newsletter(doc: &NewsletterDoc, format: RenderFormat) -> Vec<u8> {
    match format {
        RenderFormat::Text => render_newsletter_text(doc).into_bytes(),
        RenderFormat::Html => render_newsletter_html(doc).into_bytes(),
    }
}

/// Render a daily alert. Starred entries get a leading `* ` in text form.
pub fn render_daily(alert: &DailyAlert, format: RenderFormat) -> Vec<u8> {
    match format {
        RenderFormat::Text => render_daily_text(alert).into_bytes(),
        RenderFormat::Html => render_daily_html(alert).into_bytes(),
    }
}
