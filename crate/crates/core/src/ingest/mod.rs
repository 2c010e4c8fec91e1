//! Tweet parsing, seed-account selection and construction of account-week
//! documents and their document-term matrix.

mod porter;
mod tokenize;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use chrono::{DateTime, Datelike, Duration, NaiveDate, Utc};
use log::warn;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use porter::stem;
pub use tokenize::{extract_hashtags, normalize_tokens, Normalizer};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tweet {
    pub account_id: String,
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub lang: Option<String>,
}

#[derive(Deserialize)]
struct RawTweet {
    account_id: String,
    created_at: String,
    text: String,
    #[serde(default)]
    lang: Option<String>,
}

/// Parses an ISO-8601 timestamp and converts it to UTC.
pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("bad timestamp {s:?}: {e}"))
}

impl Tweet {
    fn from_json_line(line: &str) -> Result<Tweet, String> {
        let raw: RawTweet = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if raw.account_id.is_empty() {
            return Err("empty account_id".into());
        }
        Ok(Tweet {
            account_id: raw.account_id,
            created_at: parse_timestamp(&raw.created_at)?,
            text: raw.text,
            lang: raw.lang.map(|l| l.to_lowercase()),
        })
    }

    /// Serializes to one `tweets.jsonl` line.
    pub fn to_json_line(&self) -> String {
        let mut obj = serde_json::Map::new();
        obj.insert("account_id".into(), self.account_id.clone().into());
        obj.insert(
            "created_at".into(),
            self.created_at
                .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
                .into(),
        );
        obj.insert("text".into(), self.text.clone().into());
        if let Some(lang) = &self.lang {
            obj.insert("lang".into(), lang.clone().into());
        }
        serde_json::Value::Object(obj).to_string()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedTweets {
    pub tweets: Vec<Tweet>,
    /// (1-based line number, reason) for every skipped line.
    pub skipped: Vec<(usize, String)>,
}

/// Parses a `tweets.jsonl` stream. Blank lines are ignored; malformed lines
/// are skipped and recorded unless `strict` is set.
pub fn parse_tweet_stream<R: BufRead>(source: R, strict: bool) -> Result<ParsedTweets> {
    let mut out = ParsedTweets::default();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io("<tweet stream>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        match Tweet::from_json_line(&line) {
            Ok(t) => out.tweets.push(t),
            Err(message) if strict => {
                return Err(Error::Parse {
                    line: line_no,
                    message,
                })
            }
            Err(message) => out.skipped.push((line_no, message)),
        }
    }
    if !out.skipped.is_empty() {
        warn!("skipped {} malformed tweet lines", out.skipped.len());
    }
    Ok(out)
}

pub fn read_tweets(path: &Path, strict: bool) -> Result<ParsedTweets> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_tweet_stream(std::io::BufReader::new(file), strict).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn filter_language(
    tweets: &[Tweet],
    allowed: &BTreeSet<String>,
    keep_unlabeled: bool,
) -> Vec<Tweet> {
    tweets
        .iter()
        .filter(|t| match &t.lang {
            Some(lang) => allowed.contains(lang),
            None => keep_unlabeled,
        })
        .cloned()
        .collect()
}

/// Drops exact repeats of (account, timestamp, text), keeping the first.
pub fn dedupe_exact(tweets: &[Tweet]) -> Vec<Tweet> {
    let mut seen = BTreeSet::new();
    tweets
        .iter()
        .filter(|t| seen.insert((t.account_id.clone(), t.created_at, t.text.clone())))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedConfig {
    /// Lowercase seeds. Entries starting with `#` match hashtags exactly; all
    /// others match as case-insensitive substrings of the tweet text.
    pub seed_hashtags: BTreeSet<String>,
    pub activity_threshold: u32,
    pub date_range: (DateTime<Utc>, DateTime<Utc>),
}

impl SeedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seed_hashtags.is_empty() {
            return Err(Error::config("seed set is empty"));
        }
        if self.activity_threshold < 1 {
            return Err(Error::config("activity threshold must be at least 1"));
        }
        if self.date_range.0 > self.date_range.1 {
            return Err(Error::config("seed date range start is after end"));
        }
        Ok(())
    }

    pub fn matches(&self, text: &str) -> bool {
        let tags = extract_hashtags(text);
        let lower = text.to_lowercase();
        self.seed_hashtags.iter().any(|seed| {
            if seed.starts_with('#') {
                tags.iter().any(|t| t == seed)
            } else {
                lower.contains(seed.as_str())
            }
        })
    }
}

/// Tweets whose timestamp lies in the inclusive range.
pub fn tweets_in_range(tweets: &[Tweet], range: (DateTime<Utc>, DateTime<Utc>)) -> Vec<Tweet> {
    tweets
        .iter()
        .filter(|t| t.created_at >= range.0 && t.created_at <= range.1)
        .cloned()
        .collect()
}

/// Accounts with at least `activity_threshold` seed-matching tweets.
pub fn select_accounts(tweets: &[Tweet], seeds: &SeedConfig) -> Result<BTreeSet<String>> {
    seeds.validate()?;
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    for t in tweets.iter().filter(|t| seeds.matches(&t.text)) {
        *counts.entry(t.account_id.as_str()).or_default() += 1;
    }
    Ok(counts
        .into_iter()
        .filter(|&(_, c)| c >= seeds.activity_threshold)
        .map(|(a, _)| a.to_string())
        .collect())
}

/// The Monday that starts a Monday-Sunday week.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WeekKey(NaiveDate);

impl WeekKey {
    pub fn from_monday(date: NaiveDate) -> Result<Self> {
        if date.weekday() != chrono::Weekday::Mon {
            return Err(Error::contract(format!("{date} is not a Monday")));
        }
        Ok(WeekKey(date))
    }

    pub fn monday(self) -> NaiveDate {
        self.0
    }

    pub fn start(self) -> DateTime<Utc> {
        self.0.and_hms_opt(0, 0, 0).expect("midnight").and_utc()
    }

    pub fn next(self) -> WeekKey {
        WeekKey(self.0 + Duration::days(7))
    }
}

impl fmt::Display for WeekKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format("%Y-%m-%d"))
    }
}

pub fn week_of(timestamp: DateTime<Utc>) -> WeekKey {
    let date = timestamp.date_naive();
    WeekKey(date - Duration::days(date.weekday().num_days_from_monday() as i64))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocId {
    pub account_id: String,
    pub week: WeekKey,
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.account_id, self.week)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub account_id: String,
    pub week: WeekKey,
    pub term_counts: BTreeMap<String, u32>,
    /// Number of tweets that contributed at least one token.
    pub tweet_count: usize,
}

impl Document {
    pub fn id(&self) -> DocId {
        DocId {
            account_id: self.account_id.clone(),
            week: self.week,
        }
    }

    pub fn token_total(&self) -> u64 {
        self.term_counts.values().map(|&c| c as u64).sum()
    }
}

/// Groups tweets of `accounts` into account-week documents, ordered by
/// (account, week).
pub fn build_documents(
    tweets: &[Tweet],
    accounts: &BTreeSet<String>,
    normalizer: &Normalizer,
) -> Vec<Document> {
    let mut grouped: BTreeMap<(String, WeekKey), Document> = BTreeMap::new();
    for t in tweets.iter().filter(|t| accounts.contains(&t.account_id)) {
        let tokens = normalizer.normalize(&t.text);
        if tokens.is_empty() {
            continue;
        }
        let week = week_of(t.created_at);
        let doc = grouped
            .entry((t.account_id.clone(), week))
            .or_insert_with(|| Document {
                account_id: t.account_id.clone(),
                week,
                term_counts: BTreeMap::new(),
                tweet_count: 0,
            });
        doc.tweet_count += 1;
        for tok in tokens {
            *doc.term_counts.entry(tok).or_default() += 1;
        }
    }
    grouped.into_values().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from (term, doc_freq) pairs; terms are sorted.
    pub fn from_terms(mut entries: Vec<(String, usize)>) -> Result<Self> {
        entries.sort();
        entries.dedup_by(|a, b| a.0 == b.0);
        if entries.is_empty() {
            return Err(Error::config("vocabulary is empty"));
        }
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.clone(), i))
            .collect();
        let (terms, doc_freq) = entries.into_iter().unzip();
        Ok(Vocabulary {
            terms,
            doc_freq,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, i: usize) -> &str {
        &self.terms[i]
    }

    pub fn doc_freq(&self, i: usize) -> usize {
        self.doc_freq[i]
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }
}

/// Keeps terms with `min_df <= df <= max_df_ratio * |documents|`.
pub fn build_vocabulary(
    documents: &[Document],
    min_df: usize,
    max_df_ratio: f64,
) -> Result<Vocabulary> {
    if min_df < 1 {
        return Err(Error::config("min_df must be at least 1"));
    }
    if !(max_df_ratio > 0.0 && max_df_ratio <= 1.0) {
        return Err(Error::config("max_df_ratio must be in (0, 1]"));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for d in documents {
        for term in d.term_counts.keys() {
            *df.entry(term.as_str()).or_default() += 1;
        }
    }
    let max_df = max_df_ratio * documents.len() as f64 + 1e-9;
    let kept = df
        .into_iter()
        .filter(|&(_, f)| f >= min_df && f as f64 <= max_df)
        .map(|(t, f)| (t.to_string(), f))
        .collect();
    Vocabulary::from_terms(kept)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Raw,
    #[default]
    Tfidf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixEntry {
    pub term: usize,
    /// Number of occurrences of the term in the document.
    pub count: u32,
    pub weight: f64,
}

impl MatrixEntry {
    /// Weight carried by each single occurrence.
    pub fn unit_weight(&self) -> f64 {
        self.weight / self.count as f64
    }
}

#[derive(Debug, Clone)]
pub struct DocTermMatrix {
    pub rows: Vec<Vec<MatrixEntry>>,
    pub mode: Weighting,
    pub doc_ids: Vec<DocId>,
    pub vocab: Vocabulary,
}

impl DocTermMatrix {
    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.vocab.len()
    }
}

/// Smoothed inverse document frequency, `ln((1+N)/(1+df)) + 1`.
pub fn idf(n_docs: usize, doc_freq: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + doc_freq as f64)).ln() + 1.0
}

/// Builds the weighted matrix. Out-of-vocabulary terms are dropped, and so
/// are documents left with no in-vocabulary term.
pub fn build_matrix(
    documents: &[Document],
    vocab: &Vocabulary,
    mode: Weighting,
) -> Result<DocTermMatrix> {
    if documents.is_empty() {
        return Err(Error::Empty("no documents to build a matrix from".into()));
    }
    let n = documents.len();
    let mut rows = Vec::with_capacity(n);
    let mut doc_ids = Vec::with_capacity(n);
    for d in documents {
        let row: Vec<MatrixEntry> = d
            .term_counts
            .iter()
            .filter_map(|(term, &count)| {
                let idx = vocab.index_of(term)?;
                let weight = match mode {
                    Weighting::Raw => count as f64,
                    Weighting::Tfidf => count as f64 * idf(n, vocab.doc_freq(idx)),
                };
                Some(MatrixEntry {
                    term: idx,
                    count,
                    weight,
                })
            })
            .collect();
        if row.is_empty() {
            continue;
        }
        rows.push(row);
        doc_ids.push(d.id());
    }
    if rows.is_empty() {
        return Err(Error::Empty(
            "every document is empty after vocabulary filtering".into(),
        ));
    }
    Ok(DocTermMatrix {
        rows,
        mode,
        doc_ids,
        vocab: vocab.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(s: &str) -> DateTime<Utc> {
        parse_timestamp(s).unwrap()
    }

    fn tweet(account: &str, at: &str, text: &str, lang: Option<&str>) -> Tweet {
        Tweet {
            account_id: account.into(),
            created_at: ts(at),
            text: text.into(),
            lang: lang.map(String::from),
        }
    }

    fn seeds(threshold: u32) -> SeedConfig {
        SeedConfig {
            seed_hashtags: ["#covid19", "covid-19"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            activity_threshold: threshold,
            date_range: (ts("2020-01-01T00:00:00Z"), ts("2020-12-31T00:00:00Z")),
        }
    }

    fn doc(terms: &[&str]) -> Document {
        Document {
            account_id: "x".into(),
            week: week_of(ts("2020-01-06T00:00:00Z")),
            term_counts: terms.iter().map(|t| (t.to_string(), 1)).collect(),
            tweet_count: 1,
        }
    }

    #[test]
    fn parse_single_line() {
        let line = r##"{"account_id":"a1","created_at":"2020-01-08T12:00:00Z","text":"#covid19 news","lang":"en"}"##;
        let parsed = parse_tweet_stream(line.as_bytes(), true).unwrap();
        assert_eq!(
            parsed.tweets,
            vec![tweet(
                "a1",
                "2020-01-08T12:00:00Z",
                "#covid19 news",
                Some("en")
            )]
        );
    }

    #[test]
    fn parse_empty_stream() {
        let parsed = parse_tweet_stream(&b""[..], true).unwrap();
        assert!(parsed.tweets.is_empty());
        assert!(parsed.skipped.is_empty());
    }

    #[test]
    fn malformed_lines_skip_or_fail() {
        let src = [
            r#"{"account_id":"a","created_at":"2020-01-08T12:00:00Z","text":"x"}"#,
            r#"{"account_id":"b","created_at":"2020-01-08T12:00:00Z","text":"y","lang":"en"}"#,
            r#"{"account_id":"c","created_at":"not a date","text":"z"}"#,
            "",
            r#"{"account_id":"d","created_at":"2020-01-09T00:00:00+02:00","text":"w"}"#,
        ]
        .join("\n");
        let parsed = parse_tweet_stream(src.as_bytes(), false).unwrap();
        assert_eq!(parsed.tweets.len(), 3);
        assert_eq!(parsed.skipped.len(), 1);
        assert_eq!(parsed.skipped[0].0, 3);
        assert_eq!(parsed.tweets[2].created_at, ts("2020-01-08T22:00:00Z"));

        match parse_tweet_stream(src.as_bytes(), true) {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("expected parse error on line 3, got {other:?}"),
        }
    }

    #[test]
    fn empty_account_is_malformed() {
        let line = r#"{"account_id":"","created_at":"2020-01-08T12:00:00Z","text":"x"}"#;
        assert_eq!(
            parse_tweet_stream(line.as_bytes(), false)
                .unwrap()
                .skipped
                .len(),
            1
        );
    }

    #[test]
    fn json_line_round_trip() {
        let t = tweet("a\"1", "2020-01-08T12:00:00Z", "line\nbreak 🙏", None);
        let parsed = parse_tweet_stream(t.to_json_line().as_bytes(), true).unwrap();
        assert_eq!(parsed.tweets, vec![t]);
    }

    #[test]
    fn language_filter() {
        let tweets = vec![
            tweet("a", "2020-01-08T12:00:00Z", "x", Some("en")),
            tweet("b", "2020-01-08T12:00:00Z", "x", Some("es")),
            tweet("c", "2020-01-08T12:00:00Z", "x", Some("en")),
        ];
        let en: BTreeSet<String> = ["en".to_string()].into();
        assert_eq!(filter_language(&tweets, &en, false).len(), 2);
        let all: BTreeSet<String> = ["en".to_string(), "es".to_string()].into();
        assert_eq!(filter_language(&tweets, &all, false), tweets);
    }

    #[test]
    fn language_filter_unlabeled_fixture() {
        let tweets: Vec<Tweet> = (0..100)
            .map(|i| {
                let lang = match i % 5 {
                    0 | 1 => Some("en"),
                    2 => Some("fr"),
                    _ => None,
                };
                tweet(&format!("a{i}"), "2020-01-08T12:00:00Z", "x", lang)
            })
            .collect();
        let en: BTreeSet<String> = ["en".to_string()].into();
        let kept = filter_language(&tweets, &en, false);
        assert_eq!(kept.len(), 40);
        assert!(kept.iter().all(|t| t.lang.as_deref() == Some("en")));
        assert_eq!(filter_language(&tweets, &en, true).len(), 80);
    }

    #[test]
    fn dedupe_keeps_first() {
        let t = tweet("a", "2020-01-08T12:00:00Z", "x", None);
        let u = tweet("a", "2020-01-08T12:00:01Z", "x", None);
        assert_eq!(dedupe_exact(&[t.clone(), t.clone(), u.clone()]), vec![t, u]);
    }

    #[test]
    fn select_by_threshold() {
        let mut tweets = Vec::new();
        for _ in 0..3 {
            tweets.push(tweet(
                "three",
                "2020-01-08T12:00:00Z",
                "news #COVID19",
                None,
            ));
        }
        for _ in 0..2 {
            tweets.push(tweet(
                "two",
                "2020-01-08T12:00:00Z",
                "the COVID-19 crisis",
                None,
            ));
        }
        tweets.push(tweet("one", "2020-01-08T12:00:00Z", "#covid19", None));
        tweets.push(tweet("none", "2020-01-08T12:00:00Z", "#covid", None));

        let at3 = select_accounts(&tweets, &seeds(3)).unwrap();
        assert_eq!(at3, ["three".to_string()].into());
        let at1 = select_accounts(&tweets, &seeds(1)).unwrap();
        assert_eq!(
            at1,
            ["one", "three", "two"]
                .iter()
                .map(|s| s.to_string())
                .collect()
        );
    }

    #[test]
    fn hashtag_seed_does_not_match_prefix() {
        let s = seeds(1);
        assert!(!s.matches("#covid19data"));
        assert!(s.matches("#covid19."));
    }

    #[test]
    fn empty_seed_set_is_config_error() {
        let mut s = seeds(1);
        s.seed_hashtags.clear();
        assert!(matches!(select_accounts(&[], &s), Err(Error::Config(_))));
    }

    #[test]
    fn week_boundaries() {
        let monday = week_of(ts("2020-01-06T00:00:00Z"));
        assert_eq!(monday.to_string(), "2020-01-06");
        assert_eq!(week_of(ts("2020-01-08T12:00:00Z")), monday);
        assert_eq!(week_of(ts("2020-01-12T23:59:59Z")), monday);
        assert_eq!(week_of(ts("2020-01-13T00:00:00Z")), monday.next());
        assert!(WeekKey::from_monday(NaiveDate::from_ymd_opt(2020, 1, 7).unwrap()).is_err());
    }

    #[test]
    fn documents_group_by_account_week() {
        let accounts: BTreeSet<String> = ["a".to_string()].into();
        let n = Normalizer::default();
        let same_week = [
            tweet("a", "2020-01-06T10:00:00Z", "covid news", None),
            tweet("a", "2020-01-09T10:00:00Z", "covid update", None),
        ];
        let docs = build_documents(&same_week, &accounts, &n);
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].term_counts["covid"], 2);
        assert_eq!(docs[0].tweet_count, 2);

        let adjacent = [
            tweet("a", "2020-01-12T10:00:00Z", "covid", None),
            tweet("a", "2020-01-13T10:00:00Z", "covid", None),
        ];
        assert_eq!(build_documents(&adjacent, &accounts, &n).len(), 2);

        let outsider = [tweet("b", "2020-01-06T10:00:00Z", "covid", None)];
        assert!(build_documents(&outsider, &accounts, &n).is_empty());

        let empty = [tweet("a", "2020-01-06T10:00:00Z", "the and of", None)];
        assert!(build_documents(&empty, &accounts, &n).is_empty());
    }

    #[test]
    fn vocabulary_thresholds() {
        let mut docs: Vec<Document> = (0..10).map(|_| doc(&["common"])).collect();
        docs[0].term_counts.insert("rare".into(), 1);
        docs[1].term_counts.insert("pair".into(), 1);
        docs[2].term_counts.insert("pair".into(), 1);
        let v = build_vocabulary(&docs, 2, 0.9).unwrap();
        assert_eq!(v.terms(), ["pair"]);
        assert!(build_vocabulary(&docs, 20, 1.0).is_err());
        assert!(build_vocabulary(&docs, 0, 1.0).is_err());
        assert!(build_vocabulary(&docs, 1, 0.0).is_err());
    }

    #[test]
    fn vocabulary_hand_count() {
        let docs = vec![doc(&["a", "b"]), doc(&["b", "c"]), doc(&["b"])];
        let v = build_vocabulary(&docs, 1, 1.0).unwrap();
        assert_eq!(v.terms(), ["a", "b", "c"]);
        assert_eq!(v.doc_freq(v.index_of("b").unwrap()), 3);
        assert_eq!(v.doc_freq(v.index_of("a").unwrap()), 1);
    }

    #[test]
    fn matrix_raw_and_tfidf() {
        let mut d1 = doc(&[]);
        d1.term_counts.insert("qanon".into(), 2);
        d1.term_counts.insert("covid".into(), 1);
        let mut d2 = doc(&[]);
        d2.term_counts.insert("covid".into(), 1);
        d2.term_counts.insert("ghost".into(), 4);
        let docs = vec![d1, d2];
        let vocab = Vocabulary::from_terms(vec![("covid".into(), 2), ("qanon".into(), 1)]).unwrap();

        let raw = build_matrix(&docs, &vocab, Weighting::Raw).unwrap();
        assert_eq!(
            raw.rows[1],
            vec![MatrixEntry {
                term: 0,
                count: 1,
                weight: 1.0
            }]
        );

        let tfidf = build_matrix(&docs, &vocab, Weighting::Tfidf).unwrap();
        let q = tfidf.rows[0].iter().find(|e| e.term == 1).unwrap();
        assert!((q.weight - 2.0 * ((3.0f64 / 2.0).ln() + 1.0)).abs() < 1e-12);
        assert!((q.weight - 2.81093).abs() < 1e-5);
        let c = tfidf.rows[0].iter().find(|e| e.term == 0).unwrap();
        assert!((c.weight - 1.0).abs() < 1e-12);
        assert!((q.unit_weight() - (1.5f64.ln() + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn matrix_drops_emptied_documents() {
        let docs = vec![doc(&["a"]), doc(&["zzz"])];
        let vocab = Vocabulary::from_terms(vec![("a".into(), 1)]).unwrap();
        let m = build_matrix(&docs, &vocab, Weighting::Raw).unwrap();
        assert_eq!(m.n_docs(), 1);
        assert!(build_matrix(&[], &vocab, Weighting::Raw).is_err());
    }

    fn arb_tweets() -> impl Strategy<Value = Vec<Tweet>> {
        let texts = prop::sample::select(vec![
            "#covid19 stay home",
            "covid-19 update",
            "nothing here",
            "the and",
            "#COVID19 #covid19",
            "vaccines working",
        ]);
        prop::collection::vec((0u8..6, 0i64..40, texts), 0..60).prop_map(|v| {
            v.into_iter()
                .map(|(a, day, text)| Tweet {
                    account_id: format!("acct{a}"),
                    created_at: ts("2020-01-01T08:00:00Z") + Duration::days(day),
                    text: text.to_string(),
                    lang: None,
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn selection_is_monotone(tweets in arb_tweets(), hi in 1u32..6) {
            let strict = select_accounts(&tweets, &seeds(hi)).unwrap();
            let loose = select_accounts(&tweets, &seeds((hi - 1).max(1))).unwrap();
            prop_assert!(strict.is_subset(&loose));
        }

        #[test]
        fn documents_partition_tweets(tweets in arb_tweets()) {
            let n = Normalizer::default();
            let accounts: BTreeSet<String> = tweets.iter().map(|t| t.account_id.clone()).collect();
            let docs = build_documents(&tweets, &accounts, &n);
            let contributing = tweets.iter().filter(|t| !n.normalize(&t.text).is_empty()).count();
            prop_assert_eq!(docs.iter().map(|d| d.tweet_count).sum::<usize>(), contributing);
            let ids: BTreeSet<DocId> = docs.iter().map(Document::id).collect();
            prop_assert_eq!(ids.len(), docs.len());
            prop_assert!(docs.iter().all(|d| d.term_counts.values().all(|&c| c >= 1)));
        }

        #[test]
        fn raw_row_sums_match_token_totals(tweets in arb_tweets()) {
            let n = Normalizer::default();
            let accounts: BTreeSet<String> = tweets.iter().map(|t| t.account_id.clone()).collect();
            let docs = build_documents(&tweets, &accounts, &n);
            prop_assume!(!docs.is_empty());
            let vocab = build_vocabulary(&docs, 1, 1.0).unwrap();
            let m = build_matrix(&docs, &vocab, Weighting::Raw).unwrap();
            for (row, d) in m.rows.iter().zip(&docs) {
                let sum: f64 = row.iter().map(|e| e.weight).sum();
                prop_assert_eq!(sum, d.token_total() as f64);
            }
        }

        #[test]
        fn idf_bounds_and_monotonicity(n in 1usize..1000, df in 1usize..1000) {
            prop_assume!(df < n);
            prop_assert!(idf(n, df) >= 1.0);
            prop_assert!(idf(n, df + 1) < idf(n, df));
            prop_assert!((idf(n, n) - 1.0).abs() < 1e-15);
        }

        #[test]
        fn week_of_brackets_timestamp(secs in 1_500_000_000i64..1_700_000_000) {
            let t = DateTime::from_timestamp(secs, 0).unwrap();
            let w = week_of(t);
            prop_assert!(w.start() <= t);
            prop_assert!(t < w.next().start());
            prop_assert_eq!(week_of(w.start()), w);
        }
    }
}
