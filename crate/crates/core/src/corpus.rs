//! OLID-format tweet loading and the two text preprocessing regimes.
//!
//! `normalize_social` prepares text for an external sentence encoder: it
//! keeps the tweet readable and only collapses social markup.
//! `tokenize_clean` prepares text for word-vector lookup: everything that is
//! not a word is dropped, the rest is lowercased and stopwords are removed.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;

use crate::error::{Error, Result};

pub const HASHTAG_TOKEN: &str = "#TAG";
pub const MENTION_TOKEN: &str = "@MENTION";
pub const URL_TOKEN: &str = "URLS";

/// OLID replaces every link with this literal placeholder.
const OLID_URL_PLACEHOLDER: &str = "URL";

const ENGLISH_STOPWORDS: &str = include_str!("../assets/stopwords_en.txt");

static WORD_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\p{L}+(?:['’]\p{L}+)*").expect("valid regex"));
static EMBEDDED_URL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").expect("valid regex"));
static EMBEDDED_TAG_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[#@][\p{L}\p{N}_]+").expect("valid regex"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Off,
    Not,
}

impl Label {
    /// OFF maps to +1, NOT to -1.
    pub fn sign(self) -> f64 {
        match self {
            Label::Off => 1.0,
            Label::Not => -1.0,
        }
    }

    pub fn from_score(score: f64) -> Label {
        if score > 0.0 {
            Label::Off
        } else {
            Label::Not
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Off => "OFF",
            Label::Not => "NOT",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "OFF" => Ok(Label::Off),
            "NOT" => Ok(Label::Not),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TweetRecord {
    pub id: String,
    pub text: String,
    pub label: Option<Label>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorpus {
    pub records: Vec<TweetRecord>,
    pub split: Split,
}

impl LabeledCorpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Returns `(off, not)` counts over the labeled records.
    pub fn label_counts(&self) -> (usize, usize) {
        self.records
            .iter()
            .fold((0, 0), |(off, not), r| match r.label {
                Some(Label::Off) => (off + 1, not),
                Some(Label::Not) => (off, not + 1),
                None => (off, not),
            })
    }

    /// Every label in record order, or an error naming the first unlabeled id.
    pub fn labels(&self) -> Result<Vec<Label>> {
        self.records
            .iter()
            .map(|r| r.label.ok_or_else(|| Error::Unlabeled(r.id.clone())))
            .collect()
    }
}

/// Loads an OLID tab-separated file.
///
/// The header row must name an `id` and a `tweet` column; `subtask_a`, when
/// present, supplies labels. `labels`, when given, is an `id,label` CSV without
/// header whose entries override the TSV labels.
pub fn load_olid_tsv<R: Read, L: Read>(
    tweets: R,
    labels: Option<L>,
    split: Split,
) -> Result<LabeledCorpus> {
    let mut lines = BufReader::new(tweets).lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => {
            return Ok(LabeledCorpus {
                records: Vec::new(),
                split,
            })
        }
    };
    let header = header.trim_end_matches('\r');
    let columns: Vec<&str> = header.split('\t').collect();
    let position = |name: &str| columns.iter().position(|c| c.trim() == name);
    let id_col = position("id").ok_or_else(|| Error::parse(1, "header has no `id` column"))?;
    let tweet_col =
        position("tweet").ok_or_else(|| Error::parse(1, "header has no `tweet` column"))?;
    let label_col = position("subtask_a");

    let mut records = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != columns.len() {
            return Err(Error::parse(
                line_no,
                format!("expected {} columns, found {}", columns.len(), fields.len()),
            ));
        }
        let id = fields[id_col].trim();
        if id.is_empty() {
            return Err(Error::parse(line_no, "empty id"));
        }
        let label = match label_col {
            Some(c) => Some(parse_label(fields[c].trim(), line_no)?),
            None => None,
        };
        if index.insert(id.to_string(), records.len()).is_some() {
            return Err(Error::DuplicateId(id.to_string()));
        }
        records.push(TweetRecord {
            id: id.to_string(),
            text: fields[tweet_col].to_string(),
            label,
        });
    }

    if let Some(labels) = labels {
        let mut seen = HashSet::new();
        for (i, line) in BufReader::new(labels).lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (id, label) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(line_no, "expected `id,label`"))?;
            let id = id.trim();
            let label = parse_label(label.trim(), line_no)?;
            if !seen.insert(id.to_string()) {
                return Err(Error::DuplicateId(id.to_string()));
            }
            let &pos = index
                .get(id)
                .ok_or_else(|| Error::MissingId(id.to_string()))?;
            records[pos].label = Some(label);
        }
    }

    Ok(LabeledCorpus { records, split })
}

fn parse_label(s: &str, line: usize) -> Result<Label> {
    s.parse().map_err(|_| Error::UnknownLabel {
        line,
        label: s.to_string(),
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Markup {
    Url,
    Hashtag,
    Mention,
}

fn is_url(token: &str) -> bool {
    let lower = token.get(..8).unwrap_or(token).to_ascii_lowercase();
    token == OLID_URL_PLACEHOLDER
        || lower.starts_with("http://")
        || lower.starts_with("https://")
        || lower.starts_with("www.")
}

fn classify(token: &str) -> Option<Markup> {
    if is_url(token) {
        Some(Markup::Url)
    } else if token.len() > 1 && token.starts_with('#') {
        Some(Markup::Hashtag)
    } else if token.len() > 1 && token.starts_with('@') {
        Some(Markup::Mention)
    } else {
        None
    }
}

/// Collapses runs of hashtags to `#TAG`, runs of mentions to `@MENTION`, and
/// replaces each URL with `URLS`. Whitespace between surviving tokens is kept.
pub fn normalize_social(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last_end = 0;
    let mut previous: Option<Markup> = None;
    for (start, token) in whitespace_tokens(text) {
        let gap = &text[last_end..start];
        last_end = start + token.len();
        let kind = classify(token);
        match kind {
            Some(k @ (Markup::Hashtag | Markup::Mention)) if previous == Some(k) => {}
            Some(Markup::Hashtag) => {
                out.push_str(gap);
                out.push_str(HASHTAG_TOKEN);
            }
            Some(Markup::Mention) => {
                out.push_str(gap);
                out.push_str(MENTION_TOKEN);
            }
            Some(Markup::Url) => {
                out.push_str(gap);
                out.push_str(URL_TOKEN);
            }
            None => {
                out.push_str(gap);
                out.push_str(token);
            }
        }
        previous = kind;
    }
    out.push_str(&text[last_end..]);
    out
}

fn whitespace_tokens(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split(char::is_whitespace)
        .filter(|t| !t.is_empty())
        .map(move |t| (t.as_ptr() as usize - text.as_ptr() as usize, t))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSeq {
    pub tokens: Vec<String>,
}

impl TokenSeq {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSeq {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenSeq {
            tokens: iter.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords {
    words: HashSet<String>,
}

impl Stopwords {
    /// The shipped 179-entry English list.
    pub fn english() -> Self {
        Self::parse(ENGLISH_STOPWORDS)
    }

    /// One token per line; blank lines are ignored.
    pub fn from_reader<R: Read>(mut source: R) -> Result<Self> {
        let mut text = String::new();
        source.read_to_string(&mut text)?;
        Ok(Self::parse(&text))
    }

    fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_lowercase)
            .collect();
        Stopwords { words }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Drops URLs, hashtags, mentions, numbers, punctuation and symbols, then
/// returns the remaining words lowercased with stopwords removed.
///
/// A word is a maximal run of letters, optionally joined by internal
/// apostrophes (`don't`, `o'neil`).
pub fn tokenize_clean(text: &str, stopwords: &Stopwords) -> TokenSeq {
    let mut tokens = Vec::new();
    for (_, raw) in whitespace_tokens(text) {
        if classify(raw).is_some() {
            continue;
        }
        let no_urls = EMBEDDED_URL_RE.replace_all(raw, " ");
        let stripped = EMBEDDED_TAG_RE.replace_all(&no_urls, " ");
        for m in WORD_RE.find_iter(&stripped) {
            let word: String = m
                .as_str()
                .to_lowercase()
                .chars()
                .map(|c| if c == '’' { '\'' } else { c })
                .filter(|&c| c == '\'' || c.is_alphabetic())
                .collect();
            if !word.is_empty() && !stopwords.contains(&word) {
                tokens.push(word);
            }
        }
    }
    TokenSeq { tokens }
}
