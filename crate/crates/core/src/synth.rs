//! Deterministic synthetic corpora, reference strings, and read logs.
//!
//! Used for experiments at desk scale and by the test suites: every
//! generator is a pure function of its seed.

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{AuthorName, BibRecord, CorpusStore, Kind, RecordId};
use crate::readstats::ReadEvent;

const VENUES: [&str; 12] =
    ["ApJ", "MNRAS", "AJ", "PhRvD", "Natur", "A&A", "NuPhB", "PASP", "ApJS", "Icar", "JCAP", "PhLB"];

const CATEGORIES: [&str; 5] = ["astro-ph", "hep-th", "gr-qc", "cond-mat", "math-ph"];

const VOCAB: [&str; 48] = [
    "galaxy", "cluster", "dark", "energy", "matter", "survey", "spectra", "quasar", "lensing",
    "redshift", "stellar", "neutrino", "cosmic", "microwave", "background", "supernova", "binary",
    "pulsar", "accretion", "disk", "formation", "evolution", "dynamics", "halo", "dust",
    "emission", "absorption", "spectrum", "photometry", "variability", "magnetic", "field",
    "turbulence", "plasma", "relativistic", "jets", "merger", "population", "synthesis",
    "abundance", "metallicity", "rotation", "curve", "velocity", "dispersion", "luminosity",
    "infrared", "ultraviolet",
];

const SYL_A: [&str; 20] = [
    "Bar", "Den", "Fel", "Gor", "Hal", "Jin", "Kor", "Lam", "Mor", "Nev", "Pol", "Quin", "Rav",
    "Sol", "Tur", "Ulm", "Ven", "Wex", "Yor", "Zel",
];
const SYL_B: [&str; 5] = ["a", "e", "i", "o", "u"];
const SYL_C: [&str; 10] = ["ck", "d", "l", "m", "n", "r", "s", "t", "v", "z"];

fn journal_record_id(year: i32, venue: &str, volume: u32, page: u32, initial: char) -> RecordId {
    let id = format!("{year}{venue:.<5}{volume:.>4}.{page:.>4}{initial}");
    RecordId::new(id).expect("well-formed synthetic id")
}

fn eprint_record_id(year: i32, seq: u32, initial: char) -> RecordId {
    RecordId::new(format!("{year}arXiv{seq:07}..{initial}")).expect("well-formed synthetic id")
}

/// Unique last names drawn from a syllable pool of 1000 combinations.
fn name_pool(rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut names = Vec::with_capacity(SYL_A.len() * SYL_B.len() * SYL_C.len());
    for a in SYL_A {
        for b in SYL_B {
            for c in SYL_C {
                names.push(format!("{a}{b}{c}"));
            }
        }
    }
    names.shuffle(rng);
    names
}

fn title(rng: &mut ChaCha8Rng, words: usize) -> String {
    (0..words)
        .map(|_| VOCAB[rng.gen_range(0..VOCAB.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

/// A reference string and the record it was generated from.
#[derive(Debug, Clone)]
pub struct LabeledReference {
    pub raw: String,
    pub truth: RecordId,
}

/// A synthetic corpus with ground-truth-labeled reference strings.
pub struct SynthCorpus {
    pub store: CorpusStore,
    pub references: Vec<LabeledReference>,
}

struct Generated {
    store: CorpusStore,
    /// (record id, work index) for every record, in generation order.
    record_ids: Vec<RecordId>,
}

/// Records: `twin_pairs` e-print/journal pairs, then standalone e-prints
/// for `eprint_share` of the remainder, journals for the rest.
fn generate_records(n_records: usize, twin_pairs: usize, eprint_share: f64, rng: &mut ChaCha8Rng) -> Generated {
    assert!(twin_pairs * 2 <= n_records, "too many twin pairs");
    let n_works = n_records - twin_pairs;
    let names = name_pool(rng);
    assert!(n_works <= names.len(), "name pool exhausted: {n_works} works");

    let mut store = CorpusStore::new();
    let mut record_ids = Vec::new();
    let mut eprint_seq = 1u32;

    for (w, last_name) in names.iter().take(n_works).enumerate() {
        let initial = last_name.chars().next().expect("nonempty").to_ascii_uppercase();
        let year = rng.gen_range(1996..=2004);
        let is_twin = w < twin_pairs;
        let is_eprint_only = !is_twin && rng.gen_bool(eprint_share);

        let journal_id = if is_eprint_only {
            None
        } else {
            let venue = VENUES[rng.gen_range(0..VENUES.len())];
            // resample page until the id is unused
            let mut volume = rng.gen_range(100..=999);
            let mut id = journal_record_id(year, venue, volume, rng.gen_range(1..=1499), initial);
            while store.contains(&id) {
                volume = rng.gen_range(100..=999);
                id = journal_record_id(year, venue, volume, rng.gen_range(1..=1499), initial);
            }
            Some(id)
        };
        let eprint_id = (is_twin || is_eprint_only).then(|| {
            let seq = eprint_seq;
            eprint_seq += 1;
            eprint_record_id(year, seq, initial)
        });

        let published =
            NaiveDate::from_ymd_opt(year, rng.gen_range(1..=12), rng.gen_range(1..=28))
                .expect("valid synthetic date");
        let title_words = rng.gen_range(4..=8);
        let work_title = title(rng, title_words);
        let abstract_words = rng.gen_range(8..=20);
        let abstract_text = title(rng, abstract_words);
        let author = AuthorName::new(last_name.clone(), format!("{initial}."));
        let categories: std::collections::BTreeSet<String> =
            [CATEGORIES[rng.gen_range(0..CATEGORIES.len())].to_string()].into_iter().collect();

        if let Some(eid) = &eprint_id {
            let record = BibRecord {
                id: eid.clone(),
                kind: Kind::Eprint,
                title: work_title.clone(),
                abstract_text: abstract_text.clone(),
                authors: vec![author.clone()],
                categories: categories.clone(),
                date_added: published,
                date_published: published,
                reference_strings: vec![],
                resolved_refs: vec![],
                concordance: journal_id.clone(),
            };
            store.insert(record).expect("unique synthetic id");
            record_ids.push(eid.clone());
        }
        if let Some(jid) = &journal_id {
            let journal_published = if eprint_id.is_some() {
                published + Days::new(rng.gen_range(30..=300))
            } else {
                published
            };
            let record = BibRecord {
                id: jid.clone(),
                kind: Kind::Journal,
                title: work_title,
                abstract_text,
                authors: vec![author],
                categories,
                date_added: journal_published + Days::new(rng.gen_range(0..=30)),
                date_published: journal_published,
                reference_strings: vec![],
                resolved_refs: vec![],
                concordance: eprint_id.clone(),
            };
            store.insert(record).expect("unique synthetic id");
            record_ids.push(jid.clone());
        }
    }
    Generated { store, record_ids }
}

/// Format a clean reference string pointing at `record`.
fn reference_for(record: &BibRecord) -> String {
    let author = &record.authors[0];
    let name = format!("{}, {}", author.last, author.first_initials);
    match record.kind {
        Kind::Journal => format!(
            "{name} {}, {}, {}, {}",
            record.published_year(),
            record.id.source_code(),
            record.id.volume().expect("synthetic journal ids carry volume"),
            record.id.page().expect("synthetic journal ids carry page"),
        ),
        Kind::Eprint => {
            let number = &record.id.as_str()[9..16];
            format!("{name} {}, arXiv, {number}", record.published_year())
        }
    }
}

/// Shift the first standalone 4-digit year in the string by `delta`.
fn shift_year(raw: &str, delta: i32) -> String {
    let bytes = raw.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let bounded = (start == 0 || !bytes[start - 1].is_ascii_alphanumeric())
                && (i == bytes.len() || !bytes[i].is_ascii_alphanumeric());
            if i - start == 4 && bounded {
                if let Ok(year) = raw[start..i].parse::<i32>() {
                    if (1900..=2100).contains(&year) {
                        return format!("{}{}{}", &raw[..start], year + delta, &raw[i..]);
                    }
                }
            }
        } else {
            i += 1;
        }
    }
    raw.to_string()
}

fn perturb(raw: &str, rng: &mut ChaCha8Rng) -> String {
    let mut fields: Vec<String> = raw.split(", ").map(str::to_string).collect();
    match rng.gen_range(0..5u8) {
        // year off by one
        0 => return shift_year(raw, if rng.gen_bool(0.5) { 1 } else { -1 }),
        // drop volume and page
        1 => fields.truncate(3),
        // venue typo
        2 => {
            if let Some(venue) = fields.get_mut(2) {
                venue.push('x');
            }
        }
        // author list truncated
        3 => fields[0].push_str(" et al."),
        // bare author + year
        _ => fields.truncate(2),
    }
    fields.join(", ")
}

/// A labeled corpus for resolution experiments: `n_records` records and
/// `n_refs` reference strings of which a `noise` fraction carry one
/// perturbation each. The truth label is the record each string was
/// generated from.
pub fn resolution_corpus(n_records: usize, n_refs: usize, noise: f64, seed: u64) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let generated = generate_records(n_records, n_records / 10, 0.2, &mut rng);

    let mut references = Vec::with_capacity(n_refs);
    for _ in 0..n_refs {
        let target_id = &generated.record_ids[rng.gen_range(0..generated.record_ids.len())];
        let target = generated.store.get(target_id).expect("generated id");
        let mut raw = reference_for(target);
        if rng.gen_bool(noise) {
            raw = perturb(&raw, &mut rng);
        }
        references.push(LabeledReference { raw, truth: target_id.clone() });
    }
    SynthCorpus { store: generated.store, references }
}

/// A full pipeline fixture: records with reference strings attached to
/// random citing records, plus a synthetic read log.
pub struct PipelineFixture {
    pub store: CorpusStore,
    pub reads: Vec<ReadEvent>,
}

pub fn pipeline_fixture(n_records: usize, n_refs: usize, n_sessions: usize, seed: u64) -> PipelineFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let generated = generate_records(n_records, n_records / 10, 0.2, &mut rng);
    let ids = generated.record_ids.clone();
    let mut store = generated.store;

    for _ in 0..n_refs {
        let citing = &ids[rng.gen_range(0..ids.len())];
        let target = &ids[rng.gen_range(0..ids.len())];
        if citing == target {
            continue;
        }
        let raw = reference_for(store.get(target).expect("generated id"));
        if let Some(record) = store.get_mut(citing) {
            record.reference_strings.push(raw);
        }
    }

    let mut reads = Vec::new();
    for s in 0..n_sessions {
        let session = format!("session-{s:04}");
        let n_reads = rng.gen_range(2..=8);
        for _ in 0..n_reads {
            let record = ids[rng.gen_range(0..ids.len())].clone();
            let minute = rng.gen_range(0..60);
            reads.push(ReadEvent {
                session: session.clone(),
                record,
                at: format!("2005-03-10T12:{minute:02}:00Z").parse().expect("valid timestamp"),
            });
        }
    }
    PipelineFixture { store, reads }
}

// ---------------------------------------------------------------------------
// Random fixtures for property tests

const QUERY_AUTHORS: [(&str, &str); 8] = [
    ("Kurtz", "M.J."),
    ("Henneken", "E."),
    ("Accomazzi", "A."),
    ("Eichhorn", "G."),
    ("Grant", "C.S."),
    ("Thompson", "D."),
    ("Bohlen", "E."),
    ("Murray", "S.S."),
];

/// A small random corpus with overlapping vocabulary, suitable for
/// comparing query evaluation against a linear scan.
pub fn random_corpus(n_records: usize, seed: u64) -> CorpusStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = CorpusStore::new();
    for i in 0..n_records {
        let year = rng.gen_range(2003..=2005);
        let is_eprint = rng.gen_bool(0.4);
        let initial = char::from(b'A' + (i % 26) as u8);
        let id = if is_eprint {
            eprint_record_id(year, i as u32 + 1, initial)
        } else {
            journal_record_id(year, VENUES[rng.gen_range(0..VENUES.len())], (100 + i) as u32, i as u32 % 1400 + 1, initial)
        };
        if store.contains(&id) {
            continue;
        }
        let n_authors = rng.gen_range(1..=3);
        let authors: Vec<AuthorName> = (0..n_authors)
            .map(|_| {
                let (last, initials) = QUERY_AUTHORS[rng.gen_range(0..QUERY_AUTHORS.len())];
                AuthorName::new(last, initials)
            })
            .collect();
        let title_words = rng.gen_range(2..=6);
        let abstract_words = rng.gen_range(4..=10);
        let added = NaiveDate::from_ymd_opt(year, rng.gen_range(1..=12), rng.gen_range(1..=28))
            .expect("valid synthetic date");
        let record = BibRecord {
            id,
            kind: if is_eprint { Kind::Eprint } else { Kind::Journal },
            title: title(&mut rng, title_words),
            abstract_text: title(&mut rng, abstract_words),
            authors,
            categories: (0..rng.gen_range(1..=2))
                .map(|_| CATEGORIES[rng.gen_range(0..CATEGORIES.len())].to_string())
                .collect(),
            date_added: added,
            date_published: added - Days::new(rng.gen_range(0..=60)),
            reference_strings: vec![],
            resolved_refs: vec![],
            concordance: None,
        };
        store.insert(record).expect("fresh id");
    }
    store
}

const QUERY_FIELDS: [&str; 5] = ["title", "abstract", "author", "category", "any"];

fn random_primary(rng: &mut ChaCha8Rng, depth: usize) -> String {
    let word = |rng: &mut ChaCha8Rng| VOCAB[rng.gen_range(0..VOCAB.len())].to_string();
    match rng.gen_range(0..if depth == 0 { 4 } else { 6 }) {
        0 | 1 => word(rng),
        2 => format!("\"{} {}\"", word(rng), word(rng)),
        3 => {
            if rng.gen_bool(0.5) {
                format!("{}:{}", QUERY_FIELDS[rng.gen_range(0..QUERY_FIELDS.len())], word(rng))
            } else {
                let (last, initials) = QUERY_AUTHORS[rng.gen_range(0..QUERY_AUTHORS.len())];
                if rng.gen_bool(0.5) {
                    format!("author:\"{last}, {}\"", &initials[..1])
                } else {
                    format!("author:\"{last}\"")
                }
            }
        }
        4 => format!("({})", random_query_text(rng, depth - 1)),
        _ => format!(
            "{}:({})",
            QUERY_FIELDS[rng.gen_range(0..QUERY_FIELDS.len())],
            random_query_text(rng, depth - 1)
        ),
    }
}

fn random_query_text(rng: &mut ChaCha8Rng, depth: usize) -> String {
    let n_clauses = rng.gen_range(1..=3);
    let clauses: Vec<String> = (0..n_clauses)
        .map(|_| {
            let n_terms = rng.gen_range(1..=3);
            (0..n_terms)
                .map(|_| {
                    let negate = rng.gen_bool(0.15);
                    let primary = random_primary(rng, depth);
                    if negate {
                        format!("NOT {primary}")
                    } else {
                        primary
                    }
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    clauses.join(" OR ")
}

/// A random query string drawn from the documented grammar. Regenerates
/// until the string parses (pure negations are discarded), so the result
/// is always valid.
pub fn random_query(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let text = random_query_text(&mut rng, 2);
        if crate::query::parse_query(&text).is_ok() {
            return text;
        }
    }
}
