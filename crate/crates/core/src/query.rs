//! The boolean subject/author query language.
//!
//! Grammar: implicit AND between adjacent terms, infix OR, prefix NOT,
//! parentheses, double-quoted phrases, `field:term` and `field:(...)`
//! scoping, and the `author:"Last, F"` prefix form. Keywords are
//! case-insensitive. Fields: title, abstract, author, category, any.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use crate::corpus::{BibRecord, RecordId};
use crate::index::{Field, IndexSnapshot};
use crate::text;

/// Author prefix query: equal normalized last name, and when initials are
/// given the record author's initials must start with them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorQuery {
    /// Normalized last name.
    pub last: String,
    /// Normalized initials prefix, when given.
    pub initials: Option<String>,
}

impl AuthorQuery {
    /// Parse the `Last, F` form used for stored author queries.
    pub fn parse(raw: &str) -> Result<AuthorQuery, ParseError> {
        let (last_part, initials_part) = match raw.split_once(',') {
            Some((l, i)) => (l, Some(i)),
            None => (raw, None),
        };
        let last = text::normalize_last_name(last_part);
        if last.is_empty() {
            return Err(ParseError { kind: ParseErrorKind::MissingAuthorName, span: 0..raw.len() });
        }
        let initials = initials_part
            .map(text::normalize_initials)
            .filter(|i| !i.is_empty());
        Ok(AuthorQuery { last, initials })
    }
}

/// Parsed query. Term and phrase tokens are stored normalized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryAst {
    Term { field: Field, token: String },
    Phrase { field: Field, tokens: Vec<String> },
    And(Vec<QueryAst>),
    Or(Vec<QueryAst>),
    Not(Box<QueryAst>),
    AuthorPrefix(AuthorQuery),
}

/// Parse failure with the byte span of the offending input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    EmptyQuery,
    UnbalancedParen,
    UnclosedQuote,
    UnknownField(String),
    PureNegation,
    /// Term reduced to no tokens (stopword or too short).
    EmptyTerm(String),
    EmptyPhrase,
    ExpectedTerm,
    MissingAuthorName,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match &self.kind {
            ParseErrorKind::EmptyQuery => "empty query".to_string(),
            ParseErrorKind::UnbalancedParen => "unbalanced parenthesis".to_string(),
            ParseErrorKind::UnclosedQuote => "unclosed quote".to_string(),
            ParseErrorKind::UnknownField(name) => format!("unknown field {name:?}"),
            ParseErrorKind::PureNegation => "pure negation: query needs at least one positive term".to_string(),
            ParseErrorKind::EmptyTerm(word) => {
                format!("term {word:?} reduces to no tokens (stopword or too short)")
            }
            ParseErrorKind::EmptyPhrase => "phrase reduces to no tokens".to_string(),
            ParseErrorKind::ExpectedTerm => "expected a term".to_string(),
            ParseErrorKind::MissingAuthorName => "author query needs a last name".to_string(),
        };
        write!(f, "{msg} at {}..{}", self.span.start, self.span.end)
    }
}

impl std::error::Error for ParseError {}

// ---------------------------------------------------------------------------
// Lexing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Quoted(String),
    Word(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    span: Range<usize>,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = src[i..].chars().next().expect("in bounds");
        match c {
            c if c.is_whitespace() => i += c.len_utf8(),
            '(' => {
                toks.push(Spanned { tok: Tok::LParen, span: i..i + 1 });
                i += 1;
            }
            ')' => {
                toks.push(Spanned { tok: Tok::RParen, span: i..i + 1 });
                i += 1;
            }
            '"' => {
                let start = i;
                match src[i + 1..].find('"') {
                    Some(rel) => {
                        let end = i + 1 + rel;
                        toks.push(Spanned {
                            tok: Tok::Quoted(src[i + 1..end].to_string()),
                            span: start..end + 1,
                        });
                        i = end + 1;
                    }
                    None => {
                        return Err(ParseError { kind: ParseErrorKind::UnclosedQuote, span: start..src.len() })
                    }
                }
            }
            _ => {
                let start = i;
                let mut end = i;
                for ch in src[i..].chars() {
                    if ch.is_whitespace() || matches!(ch, '(' | ')' | '"') {
                        break;
                    }
                    end += ch.len_utf8();
                }
                // a word ending in ':' binds to a following group or quote
                toks.push(Spanned { tok: Tok::Word(src[start..end].to_string()), span: start..end });
                i = end;
            }
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parsing

struct Parser {
    toks: Vec<Spanned>,
    i: usize,
    src_len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.i)
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.i].clone();
        self.i += 1;
        t
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Spanned { tok: Tok::Word(w), .. }) if w.eq_ignore_ascii_case(kw))
    }

    fn end_span(&self) -> Range<usize> {
        self.src_len..self.src_len
    }

    fn parse_or(&mut self) -> Result<QueryAst, ParseError> {
        let mut children = vec![self.parse_and()?];
        while self.peek_keyword("or") {
            self.bump();
            children.push(self.parse_and()?);
        }
        Ok(if children.len() == 1 { children.pop().expect("one child") } else { QueryAst::Or(children) })
    }

    fn parse_and(&mut self) -> Result<QueryAst, ParseError> {
        let mut children = Vec::new();
        loop {
            match self.peek() {
                None => break,
                Some(Spanned { tok: Tok::RParen, .. }) => break,
                Some(Spanned { tok: Tok::Word(w), .. }) if w.eq_ignore_ascii_case("or") => break,
                Some(Spanned { tok: Tok::Word(w), .. }) if w.eq_ignore_ascii_case("and") => {
                    self.bump();
                }
                _ => children.push(self.parse_unary()?),
            }
        }
        match children.len() {
            0 => Err(ParseError {
                kind: ParseErrorKind::ExpectedTerm,
                span: self.peek().map(|t| t.span.clone()).unwrap_or_else(|| self.end_span()),
            }),
            1 => Ok(children.pop().expect("one child")),
            _ => Ok(QueryAst::And(children)),
        }
    }

    fn parse_unary(&mut self) -> Result<QueryAst, ParseError> {
        if self.peek_keyword("not") {
            self.bump();
            return Ok(QueryAst::Not(Box::new(self.parse_unary()?)));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<QueryAst, ParseError> {
        let next = match self.peek() {
            Some(t) => t.clone(),
            None => return Err(ParseError { kind: ParseErrorKind::ExpectedTerm, span: self.end_span() }),
        };
        match next.tok {
            Tok::LParen => {
                self.bump();
                let inner = self.parse_or()?;
                match self.peek() {
                    Some(Spanned { tok: Tok::RParen, .. }) => {
                        self.bump();
                        Ok(inner)
                    }
                    _ => Err(ParseError { kind: ParseErrorKind::UnbalancedParen, span: next.span }),
                }
            }
            Tok::RParen => Err(ParseError { kind: ParseErrorKind::UnbalancedParen, span: next.span }),
            Tok::Quoted(content) => {
                self.bump();
                phrase_node(&content, Field::Any, next.span)
            }
            Tok::Word(word) => {
                self.bump();
                self.word_primary(&word, next.span)
            }
        }
    }

    fn word_primary(&mut self, word: &str, span: Range<usize>) -> Result<QueryAst, ParseError> {
        let Some(colon) = word.find(':') else {
            return term_node(word, Field::Any, span);
        };
        let (fname, rest) = (&word[..colon], &word[colon + 1..]);
        let field_span = span.start..span.start + colon;
        let field = Field::parse(&text::fold(fname))
            .ok_or_else(|| ParseError { kind: ParseErrorKind::UnknownField(fname.to_string()), span: field_span })?;

        if !rest.is_empty() {
            return term_node(rest, field, span.start + colon + 1..span.end);
        }

        match self.peek().cloned() {
            Some(Spanned { tok: Tok::LParen, span: lp_span }) => {
                self.bump();
                let inner = self.parse_or()?;
                match self.peek() {
                    Some(Spanned { tok: Tok::RParen, .. }) => {
                        self.bump();
                        Ok(scope_fields(inner, field))
                    }
                    _ => Err(ParseError { kind: ParseErrorKind::UnbalancedParen, span: lp_span }),
                }
            }
            Some(Spanned { tok: Tok::Quoted(content), span: q_span }) => {
                self.bump();
                if field == Field::Author {
                    author_prefix_node(&content, q_span)
                } else {
                    phrase_node(&content, field, q_span)
                }
            }
            _ => Err(ParseError { kind: ParseErrorKind::ExpectedTerm, span }),
        }
    }
}

fn term_node(word: &str, field: Field, span: Range<usize>) -> Result<QueryAst, ParseError> {
    let tokens = text::tokenize(word);
    match tokens.len() {
        0 => Err(ParseError { kind: ParseErrorKind::EmptyTerm(word.to_string()), span }),
        1 => Ok(QueryAst::Term { field, token: tokens.into_iter().next().expect("one token") }),
        _ => Ok(QueryAst::And(tokens.into_iter().map(|token| QueryAst::Term { field, token }).collect())),
    }
}

fn phrase_node(content: &str, field: Field, span: Range<usize>) -> Result<QueryAst, ParseError> {
    let tokens = text::tokenize(content);
    if tokens.is_empty() {
        return Err(ParseError { kind: ParseErrorKind::EmptyPhrase, span });
    }
    Ok(QueryAst::Phrase { field, tokens })
}

fn author_prefix_node(content: &str, span: Range<usize>) -> Result<QueryAst, ParseError> {
    let q = AuthorQuery::parse(content).map_err(|e| ParseError { kind: e.kind, span })?;
    Ok(QueryAst::AuthorPrefix(q))
}

/// Rewrite unscoped (`any`) terms and phrases inside a `field:(...)` group.
fn scope_fields(ast: QueryAst, field: Field) -> QueryAst {
    match ast {
        QueryAst::Term { field: Field::Any, token } => QueryAst::Term { field, token },
        QueryAst::Phrase { field: Field::Any, tokens } => QueryAst::Phrase { field, tokens },
        QueryAst::And(children) => QueryAst::And(children.into_iter().map(|c| scope_fields(c, field)).collect()),
        QueryAst::Or(children) => QueryAst::Or(children.into_iter().map(|c| scope_fields(c, field)).collect()),
        QueryAst::Not(child) => QueryAst::Not(Box::new(scope_fields(*child, field))),
        other => other,
    }
}

fn has_positive_leaf(ast: &QueryAst, negated: bool) -> bool {
    match ast {
        QueryAst::Term { .. } | QueryAst::Phrase { .. } | QueryAst::AuthorPrefix(_) => !negated,
        QueryAst::And(children) | QueryAst::Or(children) => {
            children.iter().any(|c| has_positive_leaf(c, negated))
        }
        QueryAst::Not(child) => has_positive_leaf(child, !negated),
    }
}

/// Parse a query string into an AST. Total over the grammar; everything
/// else is rejected with a span-carrying error.
pub fn parse_query(src: &str) -> Result<QueryAst, ParseError> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(ParseError { kind: ParseErrorKind::EmptyQuery, span: 0..src.len() });
    }
    let mut parser = Parser { toks, i: 0, src_len: src.len() };
    let ast = parser.parse_or()?;
    if let Some(extra) = parser.peek() {
        return Err(ParseError { kind: ParseErrorKind::UnbalancedParen, span: extra.span.clone() });
    }
    if !has_positive_leaf(&ast, false) {
        return Err(ParseError { kind: ParseErrorKind::PureNegation, span: 0..src.len() });
    }
    Ok(ast)
}

// ---------------------------------------------------------------------------
// Evaluation

/// True iff some record author has an equal normalized last name and,
/// when the query gives initials, initials starting with them.
pub fn match_author(q: &AuthorQuery, record: &BibRecord) -> bool {
    record.authors.iter().any(|a| {
        a.normalized_last() == q.last
            && q.initials
                .as_ref()
                .map_or(true, |qi| a.normalized_initials().starts_with(qi.as_str()))
    })
}

fn phrase_adjacency(idx: &IndexSnapshot, tokens: &[String], field: Field) -> BTreeSet<RecordId> {
    debug_assert!(matches!(field, Field::Title | Field::Abstract));
    let mut candidates: Option<BTreeSet<RecordId>> = None;
    for token in tokens {
        let ids = idx.ids_with_token(token, field);
        candidates = Some(match candidates {
            None => ids,
            Some(prev) => prev.intersection(&ids).cloned().collect(),
        });
        if candidates.as_ref().is_some_and(BTreeSet::is_empty) {
            return BTreeSet::new();
        }
    }
    let candidates = candidates.unwrap_or_default();

    let mut out = BTreeSet::new();
    'docs: for id in candidates {
        let position_sets: Vec<BTreeSet<u32>> = tokens
            .iter()
            .map(|t| {
                idx.postings(t, field)
                    .iter()
                    .find(|p| p.id == id)
                    .map(|p| p.positions.iter().copied().collect())
                    .unwrap_or_default()
            })
            .collect();
        for &start in &position_sets[0] {
            if position_sets
                .iter()
                .enumerate()
                .skip(1)
                .all(|(k, set)| set.contains(&(start + k as u32)))
            {
                out.insert(id);
                continue 'docs;
            }
        }
    }
    out
}

fn all_tokens_in_field(idx: &IndexSnapshot, tokens: &[String], field: Field) -> BTreeSet<RecordId> {
    let mut result: Option<BTreeSet<RecordId>> = None;
    for token in tokens {
        let ids = idx.ids_with_token(token, field);
        result = Some(match result {
            None => ids,
            Some(prev) => prev.intersection(&ids).cloned().collect(),
        });
    }
    result.unwrap_or_default()
}

fn phrase_set(idx: &IndexSnapshot, tokens: &[String], field: Field) -> BTreeSet<RecordId> {
    match field {
        Field::Title | Field::Abstract => phrase_adjacency(idx, tokens, field),
        // no positions stored for these fields; phrases degrade to AND
        Field::Author | Field::Category => all_tokens_in_field(idx, tokens, field),
        Field::Any => {
            let mut out = phrase_adjacency(idx, tokens, Field::Title);
            out.extend(phrase_adjacency(idx, tokens, Field::Abstract));
            out.extend(all_tokens_in_field(idx, tokens, Field::Author));
            out.extend(all_tokens_in_field(idx, tokens, Field::Category));
            out
        }
    }
}

fn author_prefix_set(idx: &IndexSnapshot, q: &AuthorQuery) -> BTreeSet<RecordId> {
    idx.doc_ids()
        .iter()
        .filter(|id| {
            idx.normalized_authors(id).iter().any(|a| {
                a.last == q.last
                    && q.initials.as_ref().map_or(true, |qi| a.initials.starts_with(qi.as_str()))
            })
        })
        .cloned()
        .collect()
}

fn eval_set(ast: &QueryAst, idx: &IndexSnapshot, all: &BTreeSet<RecordId>) -> BTreeSet<RecordId> {
    match ast {
        QueryAst::Term { field, token } => idx.ids_with_token(token, *field),
        QueryAst::Phrase { field, tokens } => phrase_set(idx, tokens, *field),
        QueryAst::And(children) => {
            let mut result: Option<BTreeSet<RecordId>> = None;
            for child in children {
                let s = eval_set(child, idx, all);
                result = Some(match result {
                    None => s,
                    Some(prev) => prev.intersection(&s).cloned().collect(),
                });
                if result.as_ref().is_some_and(BTreeSet::is_empty) {
                    break;
                }
            }
            result.unwrap_or_default()
        }
        QueryAst::Or(children) => {
            let mut result = BTreeSet::new();
            for child in children {
                result.extend(eval_set(child, idx, all));
            }
            result
        }
        QueryAst::Not(child) => {
            let inner = eval_set(child, idx, all);
            all.difference(&inner).cloned().collect()
        }
        QueryAst::AuthorPrefix(q) => author_prefix_set(idx, q),
    }
}

/// The set of records matching a query. Exactly the set a linear scan
/// with the same semantics would produce.
pub fn evaluate_set(ast: &QueryAst, idx: &IndexSnapshot) -> BTreeSet<RecordId> {
    let all: BTreeSet<RecordId> = idx.doc_ids().iter().cloned().collect();
    eval_set(ast, idx, &all)
}

fn positive_leaves<'a>(ast: &'a QueryAst, negated: bool, out: &mut Vec<&'a QueryAst>) {
    match ast {
        QueryAst::Term { .. } | QueryAst::Phrase { .. } | QueryAst::AuthorPrefix(_) => {
            if !negated {
                out.push(ast);
            }
        }
        QueryAst::And(children) | QueryAst::Or(children) => {
            for child in children {
                positive_leaves(child, negated, out);
            }
        }
        QueryAst::Not(child) => positive_leaves(child, !negated, out),
    }
}

/// Evaluate a query against an index snapshot.
///
/// Each matched record scores the sum over matched positive terms of
/// ln(1 + doc_count / token_doc_freq); a phrase scores as one term using
/// the document frequency of its rarest token, and an author prefix uses
/// the size of its own match set. Results are sorted by (score desc,
/// id asc).
pub fn evaluate_query(ast: &QueryAst, idx: &IndexSnapshot) -> Vec<(RecordId, f64)> {
    let all: BTreeSet<RecordId> = idx.doc_ids().iter().cloned().collect();
    let matched = eval_set(ast, idx, &all);
    let n = idx.doc_count() as f64;

    let mut scores: BTreeMap<RecordId, f64> = matched.iter().map(|id| (id.clone(), 0.0)).collect();
    let mut leaves = Vec::new();
    positive_leaves(ast, false, &mut leaves);
    for leaf in leaves {
        let leaf_matches = eval_set(leaf, idx, &all);
        let df = match leaf {
            QueryAst::Term { token, .. } => idx.token_doc_freq(token),
            QueryAst::Phrase { tokens, .. } => {
                tokens.iter().map(|t| idx.token_doc_freq(t)).min().unwrap_or(0)
            }
            QueryAst::AuthorPrefix(_) => leaf_matches.len(),
            _ => unreachable!("leaves only"),
        };
        if df == 0 {
            continue;
        }
        let weight = (1.0 + n / df as f64).ln();
        for id in leaf_matches.intersection(&matched) {
            *scores.get_mut(id).expect("matched id") += weight;
        }
    }

    let mut out: Vec<(RecordId, f64)> = scores.into_iter().collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(field: Field, token: &str) -> QueryAst {
        QueryAst::Term { field, token: token.to_string() }
    }

    #[test]
    fn implicit_and_between_terms() {
        let ast = parse_query("dark energy").unwrap();
        assert_eq!(ast, QueryAst::And(vec![term(Field::Any, "dark"), term(Field::Any, "energy")]));
    }

    #[test]
    fn scoped_group_with_or_and_not() {
        let ast = parse_query("title:(weak OR strong) lensing NOT cluster").unwrap();
        assert_eq!(
            ast,
            QueryAst::And(vec![
                QueryAst::Or(vec![term(Field::Title, "weak"), term(Field::Title, "strong")]),
                term(Field::Any, "lensing"),
                QueryAst::Not(Box::new(term(Field::Any, "cluster"))),
            ])
        );
    }

    #[test]
    fn pure_negation_rejected() {
        let err = parse_query("NOT cluster").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::PureNegation);
    }

    #[test]
    fn unbalanced_paren_rejected_with_span() {
        let err = parse_query("((dark").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnbalancedParen);
        let err = parse_query("dark)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnbalancedParen);
        assert_eq!(err.span, 4..5);
    }

    #[test]
    fn unclosed_quote_rejected() {
        let err = parse_query("\"dark energy").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnclosedQuote);
    }

    #[test]
    fn unknown_field_rejected_with_span() {
        let err = parse_query("venue:apj").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownField("venue".to_string()));
        assert_eq!(err.span, 0..5);
    }

    #[test]
    fn field_term_and_phrase() {
        assert_eq!(parse_query("title:lensing").unwrap(), term(Field::Title, "lensing"));
        assert_eq!(
            parse_query("abstract:\"dark energy\"").unwrap(),
            QueryAst::Phrase { field: Field::Abstract, tokens: vec!["dark".into(), "energy".into()] }
        );
    }

    #[test]
    fn author_prefix_form() {
        let ast = parse_query("author:\"Kurtz, M\"").unwrap();
        assert_eq!(
            ast,
            QueryAst::AuthorPrefix(AuthorQuery { last: "kurtz".into(), initials: Some("m".into()) })
        );
        let ast = parse_query("author:\"Kurtz\"").unwrap();
        assert_eq!(ast, QueryAst::AuthorPrefix(AuthorQuery { last: "kurtz".into(), initials: None }));
    }

    #[test]
    fn stopword_only_term_rejected() {
        let err = parse_query("the").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::EmptyTerm(_)));
    }

    #[test]
    fn keywords_case_insensitive() {
        assert_eq!(parse_query("dark or energy").unwrap(), parse_query("dark OR energy").unwrap());
        assert_eq!(parse_query("dark and energy").unwrap(), parse_query("dark energy").unwrap());
    }

    #[test]
    fn hyphenated_word_becomes_and_of_terms() {
        let ast = parse_query("dark-energy").unwrap();
        assert_eq!(ast, QueryAst::And(vec![term(Field::Any, "dark"), term(Field::Any, "energy")]));
    }

    mod eval {
        use chrono::NaiveDate;

        use super::*;
        use crate::corpus::{AuthorName, BibRecord, CorpusSnapshot, CorpusStore, Kind};
        use crate::index::build_index;

        fn date(s: &str) -> NaiveDate {
            s.parse().unwrap()
        }

        fn record(id: &str, title: &str, abstract_text: &str, authors: &[(&str, &str)]) -> BibRecord {
            BibRecord {
                id: RecordId::new(id).unwrap(),
                kind: Kind::Journal,
                title: title.to_string(),
                abstract_text: abstract_text.to_string(),
                authors: authors.iter().map(|(l, f)| AuthorName::new(*l, *f)).collect(),
                categories: ["astro-ph".to_string()].into_iter().collect(),
                date_added: date("2005-02-01"),
                date_published: date("2005-01-01"),
                reference_strings: vec![],
                resolved_refs: vec![],
                concordance: None,
            }
        }

        fn snapshot_of(records: Vec<BibRecord>) -> CorpusSnapshot {
            let mut store = CorpusStore::new();
            for r in records {
                store.insert(r).unwrap();
            }
            store.snapshot()
        }

        fn ids(v: &[(RecordId, f64)]) -> Vec<&str> {
            v.iter().map(|(id, _)| id.as_str()).collect()
        }

        #[test]
        fn field_scoped_conjunction() {
            let snap = snapshot_of(vec![
                record("2005ApJ...123..456A", "dark energy survey", "", &[("Kurtz", "M")]),
                record("2005ApJ...123..457B", "dark matter", "energy budget", &[("Kurtz", "M")]),
                record("2005ApJ...123..458C", "galaxy counts", "", &[("Kurtz", "M")]),
            ]);
            let idx = build_index(&snap);
            let ast = parse_query("title:(dark energy)").unwrap();
            let results = evaluate_query(&ast, &idx);
            assert_eq!(ids(&results), vec!["2005ApJ...123..456A"]);
        }

        #[test]
        fn no_match_is_empty() {
            let snap = snapshot_of(vec![record("2005ApJ...123..456A", "dark energy", "", &[("Kurtz", "M")])]);
            let idx = build_index(&snap);
            let ast = parse_query("neutrino").unwrap();
            assert!(evaluate_query(&ast, &idx).is_empty());
        }

        #[test]
        fn or_is_union() {
            let snap = snapshot_of(vec![
                record("2005ApJ...123..456A", "alpha topic", "", &[("Kurtz", "M")]),
                record("2005ApJ...123..457B", "beta topic", "", &[("Kurtz", "M")]),
                record("2005ApJ...123..458C", "gamma topic", "", &[("Kurtz", "M")]),
            ]);
            let idx = build_index(&snap);
            let ast = parse_query("alpha OR beta").unwrap();
            let got: BTreeSet<RecordId> = evaluate_set(&ast, &idx);
            let want: BTreeSet<RecordId> = ["2005ApJ...123..456A", "2005ApJ...123..457B"]
                .into_iter()
                .map(|s| RecordId::new(s).unwrap())
                .collect();
            assert_eq!(got, want);
        }

        #[test]
        fn phrase_requires_adjacency_in_title() {
            let snap = snapshot_of(vec![
                record("2005ApJ...123..456A", "dark energy survey", "", &[("Kurtz", "M")]),
                record("2005ApJ...123..457B", "dark and cold energy", "", &[("Kurtz", "M")]),
            ]);
            let idx = build_index(&snap);
            // "and" is a stopword, so record B tokenizes to [dark, cold, energy]
            let ast = parse_query("title:\"dark energy\"").unwrap();
            let results = evaluate_query(&ast, &idx);
            assert_eq!(ids(&results), vec!["2005ApJ...123..456A"]);
        }

        #[test]
        fn author_phrase_degrades_to_and() {
            let snap = snapshot_of(vec![
                record("2005ApJ...123..456A", "x-ray binaries", "", &[("Kurtz", "M"), ("Eichhorn", "G")]),
                record("2005ApJ...123..457B", "x-ray pulsars", "", &[("Eichhorn", "G")]),
            ]);
            let idx = build_index(&snap);
            let ast = QueryAst::Phrase { field: Field::Author, tokens: vec!["eichhorn".into(), "kurtz".into()] };
            let got = evaluate_set(&ast, &idx);
            assert_eq!(got.len(), 1);
            assert!(got.contains(&RecordId::new("2005ApJ...123..456A").unwrap()));
        }

        #[test]
        fn de_morgan_consistency() {
            let snap = snapshot_of(vec![
                record("2005ApJ...123..456A", "alpha beta", "", &[("Kurtz", "M")]),
                record("2005ApJ...123..457B", "alpha gamma", "", &[("Kurtz", "M")]),
                record("2005ApJ...123..458C", "delta gamma", "", &[("Kurtz", "M")]),
            ]);
            let idx = build_index(&snap);
            let a = term(Field::Any, "beta");
            let b = term(Field::Any, "gamma");
            let not_or = QueryAst::Not(Box::new(QueryAst::Or(vec![a.clone(), b.clone()])));
            let and_nots = QueryAst::And(vec![
                QueryAst::Not(Box::new(a)),
                QueryAst::Not(Box::new(b)),
            ]);
            assert_eq!(evaluate_set(&not_or, &idx), evaluate_set(&and_nots, &idx));
        }

        #[test]
        fn deterministic_ordering() {
            let snap = snapshot_of(vec![
                record("2005ApJ...123..457B", "alpha", "", &[("Kurtz", "M")]),
                record("2005ApJ...123..456A", "alpha", "", &[("Kurtz", "M")]),
            ]);
            let idx = build_index(&snap);
            let ast = parse_query("alpha").unwrap();
            let r1 = evaluate_query(&ast, &idx);
            let r2 = evaluate_query(&ast, &idx);
            assert_eq!(r1, r2);
            // equal scores break ties by id ascending
            assert_eq!(ids(&r1), vec!["2005ApJ...123..456A", "2005ApJ...123..457B"]);
        }

        #[test]
        fn match_author_prefix_rules() {
            let rec = record("2005ApJ...123..456A", "t", "", &[("Kurtz", "M.J.")]);
            assert!(match_author(&AuthorQuery::parse("Kurtz, M").unwrap(), &rec));
            assert!(!match_author(&AuthorQuery::parse("Kurtz, E").unwrap(), &rec));

            let rec2 = record("2005ApJ...123..457B", "t", "", &[("Kurtzman", "A")]);
            assert!(!match_author(&AuthorQuery::parse("Kurtz").unwrap(), &rec2));

            let rec3 =
                record("2005ApJ...123..458C", "t", "", &[("Accomazzi", "A"), ("Henneken", "E")]);
            assert!(match_author(&AuthorQuery::parse("Henneken, E").unwrap(), &rec3));
        }
    }
}
