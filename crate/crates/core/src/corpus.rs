//! Tab-separated tweet datasets.
//!
//! Files are UTF-8 TSV with a header row. Column positions are resolved by
//! header name through a [`ColumnMap`], so extra columns (topic, tweet URL)
//! in the source files are ignored. Text fields may carry `\t`, `\n`, `\r`
//! and `\\` escape sequences; they are decoded on load and re-encoded by
//! [`write_dataset`].

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    No,
    Yes,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Yes => "Yes",
            Label::No => "No",
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::Yes => Label::No,
            Label::No => Label::Yes,
        }
    }

    /// +1 for the check-worthy class, -1 otherwise.
    pub fn sign(self) -> f64 {
        match self {
            Label::Yes => 1.0,
            Label::No => -1.0,
        }
    }

    /// Parses `Yes`/`No` (any case) and the numeric forms `1`/`0`.
    pub fn parse(s: &str) -> Option<Label> {
        match s.trim() {
            "1" => Some(Label::Yes),
            "0" => Some(Label::No),
            t if t.eq_ignore_ascii_case("yes") => Some(Label::Yes),
            t if t.eq_ignore_ascii_case("no") => Some(Label::No),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Language {
    Dutch,
    English,
    Spanish,
}

impl Language {
    pub const ALL: [Language; 3] = [Language::Dutch, Language::English, Language::Spanish];

    pub fn name(self) -> &'static str {
        match self {
            Language::Dutch => "dutch",
            Language::English => "english",
            Language::Spanish => "spanish",
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Language::Dutch => "nl",
            Language::English => "en",
            Language::Spanish => "es",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dutch" | "nl" => Ok(Language::Dutch),
            "english" | "en" => Ok(Language::English),
            "spanish" | "es" => Ok(Language::Spanish),
            other => Err(Error::Usage(format!("unknown language {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Dev,
    Test,
    Merged,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
            Split::Merged => "merged",
        }
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            "merged" => Ok(Split::Merged),
            other => Err(Error::Usage(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTweet {
    pub id: String,
    pub text: String,
    pub label: Option<Label>,
}

impl LabeledTweet {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<Label>) -> Self {
        LabeledTweet {
            id: id.into(),
            text: text.into(),
            label,
        }
    }
}

/// Header names of the columns the loader reads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub id: String,
    pub text: String,
    /// Rows are unlabeled when this is `None` or the header lacks the column.
    pub label: Option<String>,
    /// Treat the text column as everything between the columns before it and
    /// the columns after it, so raw tabs inside tweets survive.
    pub greedy_text: bool,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            id: "tweet_id".into(),
            text: "tweet_text".into(),
            label: Some("class_label".into()),
            greedy_text: false,
        }
    }
}

/// A header plus records, with each record's source line number.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub records: Vec<(usize, Vec<String>)>,
    text_col: usize,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn text_column(&self) -> usize {
        self.text_col
    }
}

/// Splits a TSV stream into records according to `columns`.
pub fn read_table<R: Read>(reader: R, source: &str, columns: &ColumnMap) -> Result<Table> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| Error::io(source, e))?,
        None => return Err(Error::parse(source, 1, "missing header row")),
    };
    let header: Vec<String> = header
        .trim_start_matches('\u{feff}')
        .trim_end_matches('\r')
        .split('\t')
        .map(|h| h.trim().to_string())
        .collect();
    let width = header.len();
    let text_col = header
        .iter()
        .position(|h| *h == columns.text)
        .ok_or_else(|| Error::parse(source, 1, format!("no {:?} column", columns.text)))?;

    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields: Vec<String> = line.split('\t').map(str::to_string).collect();
        if fields.len() != width {
            if columns.greedy_text && fields.len() > width {
                let trailing = width - text_col - 1;
                let tail = fields.split_off(fields.len() - trailing);
                let text = fields.split_off(text_col).join("\t");
                fields.push(text);
                fields.extend(tail);
            } else {
                return Err(Error::parse(
                    source,
                    line_no,
                    format!("expected {width} columns, found {}", fields.len()),
                ));
            }
        }
        records.push((line_no, fields));
    }
    Ok(Table {
        header,
        records,
        text_col,
    })
}

/// An ordered, single-language set of tweets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub language: Language,
    pub split: Split,
    rows: Vec<LabeledTweet>,
}

impl Dataset {
    /// Builds a dataset, rejecting empty or duplicate ids.
    pub fn new(language: Language, split: Split, rows: Vec<LabeledTweet>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(rows.len());
        for row in &rows {
            if row.id.is_empty() {
                return Err(Error::Integrity("empty tweet id".into()));
            }
            if !seen.insert(row.id.as_str()) {
                return Err(Error::Integrity(format!("duplicate tweet id {:?}", row.id)));
            }
        }
        Ok(Dataset {
            language,
            split,
            rows,
        })
    }

    pub fn rows(&self) -> &[LabeledTweet] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        self.rows.iter().all(|r| r.label.is_some())
    }

    /// Gold labels, or a usage error when any row lacks one.
    pub fn labels(&self) -> Result<Vec<Label>> {
        self.rows
            .iter()
            .map(|r| {
                r.label
                    .ok_or_else(|| Error::Usage(format!("tweet {:?} has no label", r.id)))
            })
            .collect()
    }

    pub fn from_reader<R: Read>(
        reader: R,
        source: &str,
        language: Language,
        split: Split,
        columns: &ColumnMap,
    ) -> Result<Self> {
        let table = read_table(reader, source, columns)?;
        let id_col = table
            .column(&columns.id)
            .ok_or_else(|| Error::parse(source, 1, format!("no {:?} column", columns.id)))?;
        let label_col = columns.label.as_deref().and_then(|l| table.column(l));

        let mut rows = Vec::with_capacity(table.records.len());
        let mut seen = HashSet::with_capacity(table.records.len());
        for (line, fields) in &table.records {
            let id = fields[id_col].trim().to_string();
            if id.is_empty() {
                return Err(Error::parse(source, *line, "empty tweet id"));
            }
            if !seen.insert(id.clone()) {
                return Err(Error::Integrity(format!(
                    "{source}: line {line}: duplicate tweet id {id:?}"
                )));
            }
            let label = match label_col {
                Some(c) => Some(Label::parse(&fields[c]).ok_or_else(|| Error::Label {
                    path: source.to_string(),
                    line: *line,
                    label: fields[c].clone(),
                })?),
                None => None,
            };
            rows.push(LabeledTweet {
                id,
                text: unescape(&fields[table.text_col]),
                label,
            });
        }
        Ok(Dataset {
            language,
            split,
            rows,
        })
    }
}

/// Reads a dataset file.
pub fn load_dataset(
    path: &Path,
    language: Language,
    split: Split,
    columns: &ColumnMap,
) -> Result<Dataset> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Dataset::from_reader(file, &path.display().to_string(), language, split, columns)
}

/// Writes `tweet_id`, `tweet_text` and (when labeled) `class_label` columns.
pub fn write_dataset<W: Write>(dataset: &Dataset, mut out: W) -> std::io::Result<()> {
    let labeled = dataset.rows.iter().any(|r| r.label.is_some());
    if labeled {
        writeln!(out, "tweet_id\ttweet_text\tclass_label")?;
    } else {
        writeln!(out, "tweet_id\ttweet_text")?;
    }
    for row in &dataset.rows {
        write!(out, "{}\t{}", row.id, escape(&row.text))?;
        if labeled {
            write!(out, "\t{}", row.label.map(Label::as_str).unwrap_or(""))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Concatenates train then dev into a `Merged` dataset.
pub fn merge(train: &Dataset, dev: &Dataset) -> Result<Dataset> {
    if train.language != dev.language {
        return Err(Error::Usage(format!(
            "cannot merge {} with {} data",
            train.language, dev.language
        )));
    }
    if !train.is_labeled() || !dev.is_labeled() {
        return Err(Error::Usage("merge requires labeled datasets".into()));
    }
    let ids: HashSet<&str> = train.rows.iter().map(|r| r.id.as_str()).collect();
    let collisions: Vec<&str> = dev
        .rows
        .iter()
        .map(|r| r.id.as_str())
        .filter(|id| ids.contains(id))
        .collect();
    if !collisions.is_empty() {
        return Err(Error::Integrity(format!(
            "ids present in both splits: {}",
            collisions.join(", ")
        )));
    }
    let mut rows = train.rows.clone();
    rows.extend(dev.rows.iter().cloned());
    Ok(Dataset {
        language: train.language,
        split: Split::Merged,
        rows,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub yes: usize,
    pub no: usize,
}

impl ClassCounts {
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a Label>) -> Self {
        let mut counts = ClassCounts::default();
        for l in labels {
            match l {
                Label::Yes => counts.yes += 1,
                Label::No => counts.no += 1,
            }
        }
        counts
    }

    pub fn get(&self, label: Label) -> usize {
        match label {
            Label::Yes => self.yes,
            Label::No => self.no,
        }
    }

    pub fn total(&self) -> usize {
        self.yes + self.no
    }
}

impl std::ops::Add for ClassCounts {
    type Output = ClassCounts;

    fn add(self, rhs: Self) -> Self {
        ClassCounts {
            yes: self.yes + rhs.yes,
            no: self.no + rhs.no,
        }
    }
}

pub fn class_distribution(dataset: &Dataset) -> Result<ClassCounts> {
    let labels = dataset.labels()?;
    Ok(ClassCounts::from_labels(&labels))
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape(text: &str) -> String {
    if !text.contains('\\') {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}
