//! The sense lexicon: homograph/sense entries with part-of-speech labels,
//! optional domain codes, and definition glosses.
//!
//! # File format
//!
//! ```text
//! # version: 1
//!
//! @price
//! h1.s1 noun dom=COMMERCE :: amount of money for which a thing is sold
//! h1.s2 noun :: value or worth
//! h2.s1 verb :: fix the amount a thing is sold for
//!
//! @unemployment
//! h0.s1 noun :: the condition of lacking a job
//! ```
//!
//! `@word` opens an entry; each sense line is `h<k>.s<m> <pos> [dom=<code>]
//! :: <gloss>`; a blank line terminates the entry; `#` starts a comment.
//! A `# version:` line anywhere records a lexicon version string.
//!
//! Headwords are lowercased and stemmed on load, so `@prices` and text
//! token "Prices" meet at the key `price`. Gloss text is tokenized,
//! stop-filtered and stemmed the same way input text is, so overlap
//! comparisons happen in one key space.
//!
//! # Homograph numbering
//!
//! Internally homographs are always dense and 1-based. In display form and
//! in files, an entry with exactly one homograph uses `h0` (`h0.s1`); an
//! entry with several uses `h1`, `h2`, ... . Parsers accept either `h0` or
//! `h1` for single-homograph entries.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::textprep::{stem, tokenize, StopList};

/// Coarse part-of-speech category attached to senses and used to filter
/// candidate senses. `Wildcard` matches every category, in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoarsePos {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Other,
    Wildcard,
}

impl CoarsePos {
    pub const ALL: [CoarsePos; 6] = [
        CoarsePos::Noun,
        CoarsePos::Verb,
        CoarsePos::Adjective,
        CoarsePos::Adverb,
        CoarsePos::Other,
        CoarsePos::Wildcard,
    ];

    /// True when a sense of category `self` is compatible with a token of
    /// category `other`. Wildcard on either side matches everything.
    pub fn matches(self, other: CoarsePos) -> bool {
        self == CoarsePos::Wildcard || other == CoarsePos::Wildcard || self == other
    }

    pub fn name(self) -> &'static str {
        match self {
            CoarsePos::Noun => "noun",
            CoarsePos::Verb => "verb",
            CoarsePos::Adjective => "adjective",
            CoarsePos::Adverb => "adverb",
            CoarsePos::Other => "other",
            CoarsePos::Wildcard => "wildcard",
        }
    }
}

impl fmt::Display for CoarsePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown part-of-speech category '{0}'")]
pub struct UnknownPosError(pub String);

impl FromStr for CoarsePos {
    type Err = UnknownPosError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "noun" => Ok(CoarsePos::Noun),
            "verb" => Ok(CoarsePos::Verb),
            "adjective" => Ok(CoarsePos::Adjective),
            "adverb" => Ok(CoarsePos::Adverb),
            "other" => Ok(CoarsePos::Other),
            "wildcard" => Ok(CoarsePos::Wildcard),
            other => Err(UnknownPosError(other.to_string())),
        }
    }
}

/// One sense of an entry: a (homograph, sense) pair with its category,
/// optional domain code, and processed gloss tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sense {
    /// Internal homograph id, 1-based and dense within the entry.
    pub homograph: usize,
    /// Sense id, 1-based and dense within the homograph.
    pub sense: usize,
    pub pos: CoarsePos,
    pub domain: Option<String>,
    /// Gloss tokens after tokenization, stop filtering and stemming.
    pub gloss: Vec<String>,
}

/// A lexicon entry: one headword key and all its senses, sorted by
/// (homograph, sense).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    /// The stemmed, lowercased headword.
    pub lemma: String,
    senses: Vec<Sense>,
    homograph_count: usize,
}

impl Entry {
    pub fn senses(&self) -> &[Sense] {
        &self.senses
    }

    pub fn sense_count(&self) -> usize {
        self.senses.len()
    }

    pub fn homograph_count(&self) -> usize {
        self.homograph_count
    }

    /// More than one sense in total, counting all homographs.
    pub fn is_ambiguous(&self) -> bool {
        self.senses.len() > 1
    }

    pub fn has_multiple_homographs(&self) -> bool {
        self.homograph_count > 1
    }

    pub fn find(&self, homograph: usize, sense: usize) -> Option<&Sense> {
        self.senses
            .iter()
            .find(|s| s.homograph == homograph && s.sense == sense)
    }

    /// The homograph id shown in output: 0 for single-homograph entries,
    /// the internal id otherwise.
    pub fn display_homograph(&self, internal: usize) -> usize {
        if self.homograph_count == 1 {
            0
        } else {
            internal
        }
    }

    /// Map a display homograph id (`h0` or dense 1-based) to the internal
    /// id. Single-homograph entries accept both 0 and 1.
    pub fn resolve_homograph(&self, display: usize) -> Option<usize> {
        if self.homograph_count == 1 {
            (display <= 1).then_some(1)
        } else {
            (1..=self.homograph_count)
                .contains(&display)
                .then_some(display)
        }
    }

    /// Resolve a display label pair to internal ids, checking existence.
    pub fn resolve_label(&self, display_h: usize, sense: usize) -> Option<(usize, usize)> {
        let h = self.resolve_homograph(display_h)?;
        self.find(h, sense).map(|s| (s.homograph, s.sense))
    }

    /// Format internal ids as a display label, e.g. `h0.s1` or `h2.s1`.
    pub fn format_label(&self, homograph: usize, sense: usize) -> String {
        format!("h{}.s{}", self.display_homograph(homograph), sense)
    }
}

/// Summary counts over a lexicon, as reported by the `lexstat` tooling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LexiconStats {
    pub entries: usize,
    pub senses: usize,
    /// Total homographs summed over entries.
    pub homographs: usize,
    /// Entries with more than one sense in total.
    pub ambiguous_entries: usize,
    /// Entries with more than one homograph.
    pub multi_homograph_entries: usize,
    pub max_senses_in_entry: usize,
    pub domain_coded_senses: usize,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("lexicon parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid entry '{lemma}': {message}")]
    Validation { lemma: String, message: String },
}

/// An in-memory lexicon: stemmed headword keys mapped to entries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, Entry>,
    pub version: Option<String>,
}

impl Lexicon {
    /// Load from a file, processing glosses with the default stop list.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        Self::load_with_stops(path, StopList::default_list())
    }

    pub fn load_with_stops(
        path: impl AsRef<Path>,
        stops: &StopList,
    ) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, stops)
    }

    pub fn parse(text: &str, stops: &StopList) -> Result<Self, LexiconError> {
        let mut lexicon = Lexicon::default();
        let mut pending: Option<PendingEntry> = None;

        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() {
                if let Some(entry) = pending.take() {
                    lexicon.insert_entry(entry, stops)?;
                }
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if lexicon.version.is_none() {
                    if let Some(v) = comment.trim().strip_prefix("version:") {
                        lexicon.version = Some(v.trim().to_string());
                    }
                }
                continue;
            }
            if let Some(head) = line.strip_prefix('@') {
                if let Some(open) = &pending {
                    return Err(LexiconError::Parse {
                        line: line_no,
                        message: format!(
                            "new entry header before blank line terminating '{}'",
                            open.headword
                        ),
                    });
                }
                let headword = head.trim().to_lowercase();
                if headword.is_empty() || headword.chars().any(char::is_whitespace) {
                    return Err(LexiconError::Parse {
                        line: line_no,
                        message: "entry header must be '@' followed by one word".to_string(),
                    });
                }
                pending = Some(PendingEntry {
                    headword,
                    senses: Vec::new(),
                });
                continue;
            }
            let Some(entry) = pending.as_mut() else {
                return Err(LexiconError::Parse {
                    line: line_no,
                    message: "sense line outside an entry (missing '@word' header)".to_string(),
                });
            };
            entry.senses.push(parse_sense_line(line, line_no)?);
        }
        if let Some(entry) = pending.take() {
            lexicon.insert_entry(entry, stops)?;
        }
        Ok(lexicon)
    }

    fn insert_entry(&mut self, pending: PendingEntry, stops: &StopList) -> Result<(), LexiconError> {
        let key = stem(&pending.headword);
        let entry = build_entry(key.clone(), pending, stops)?;
        if self.entries.contains_key(&key) {
            return Err(LexiconError::Validation {
                lemma: key.clone(),
                message: "duplicate entry (headwords collide after stemming)".to_string(),
            });
        }
        self.entries.insert(key, entry);
        Ok(())
    }

    /// Look up an entry by stemmed key.
    pub fn lookup(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Entry> {
        self.entries.values()
    }

    /// Render in canonical form: entries sorted by key, senses sorted by
    /// (homograph, sense), single-homograph ids written as `h0`. Parsing
    /// the result reproduces this lexicon exactly.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        if let Some(v) = &self.version {
            out.push_str(&format!("# version: {v}\n\n"));
        }
        for entry in self.entries.values() {
            out.push_str(&format!("@{}\n", entry.lemma));
            for sense in &entry.senses {
                out.push_str(&format!(
                    "h{}.s{} {}",
                    entry.display_homograph(sense.homograph),
                    sense.sense,
                    sense.pos
                ));
                if let Some(code) = &sense.domain {
                    out.push_str(&format!(" dom={code}"));
                }
                out.push_str(" ::");
                if !sense.gloss.is_empty() {
                    out.push(' ');
                    out.push_str(&sense.gloss.join(" "));
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }

    pub fn stats(&self) -> LexiconStats {
        let mut stats = LexiconStats {
            entries: self.entries.len(),
            ..LexiconStats::default()
        };
        for entry in self.entries.values() {
            stats.senses += entry.sense_count();
            stats.homographs += entry.homograph_count();
            if entry.is_ambiguous() {
                stats.ambiguous_entries += 1;
            }
            if entry.has_multiple_homographs() {
                stats.multi_homograph_entries += 1;
            }
            stats.max_senses_in_entry = stats.max_senses_in_entry.max(entry.sense_count());
            stats.domain_coded_senses +=
                entry.senses.iter().filter(|s| s.domain.is_some()).count();
        }
        stats
    }
}

struct PendingEntry {
    headword: String,
    senses: Vec<PendingSense>,
}

struct PendingSense {
    display_h: usize,
    sense: usize,
    pos: CoarsePos,
    domain: Option<String>,
    gloss_text: String,
    line: usize,
}

/// Parse a display label like `h2.s1` into its two numbers.
pub fn parse_label(text: &str) -> Option<(usize, usize)> {
    let rest = text.strip_prefix('h')?;
    let (h_str, s_part) = rest.split_once('.')?;
    let s_str = s_part.strip_prefix('s')?;
    let h = h_str.parse().ok()?;
    let s: usize = s_str.parse().ok()?;
    (s >= 1).then_some((h, s))
}

fn parse_sense_line(line: &str, line_no: usize) -> Result<PendingSense, LexiconError> {
    let err = |message: String| LexiconError::Parse {
        line: line_no,
        message,
    };
    let (head, gloss) = line
        .split_once("::")
        .ok_or_else(|| err("sense line missing '::' separator".to_string()))?;
    let mut parts = head.split_whitespace();
    let label = parts
        .next()
        .ok_or_else(|| err("sense line missing 'h<k>.s<m>' label".to_string()))?;
    let (display_h, sense) = parse_label(label)
        .ok_or_else(|| err(format!("malformed sense label '{label}'")))?;
    let pos_token = parts
        .next()
        .ok_or_else(|| err("sense line missing part-of-speech category".to_string()))?;
    let pos: CoarsePos = pos_token
        .parse()
        .map_err(|e: UnknownPosError| err(e.to_string()))?;
    let mut domain = None;
    if let Some(extra) = parts.next() {
        let code = extra
            .strip_prefix("dom=")
            .ok_or_else(|| err(format!("unexpected token '{extra}' before '::'")))?;
        if code.is_empty() {
            return Err(err("empty domain code in 'dom='".to_string()));
        }
        domain = Some(code.to_string());
    }
    if let Some(extra) = parts.next() {
        return Err(err(format!("unexpected token '{extra}' before '::'")));
    }
    Ok(PendingSense {
        display_h,
        sense,
        pos,
        domain,
        gloss_text: gloss.trim().to_string(),
        line: line_no,
    })
}

fn process_gloss(text: &str, stops: &StopList) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter_map(|t| {
            let stemmed = stem(&t.surface);
            if stops.blocks(&t.surface, &stemmed) {
                None
            } else {
                Some(stemmed)
            }
        })
        .collect()
}

fn build_entry(
    lemma: String,
    pending: PendingEntry,
    stops: &StopList,
) -> Result<Entry, LexiconError> {
    let invalid = |message: String| LexiconError::Validation {
        lemma: lemma.clone(),
        message,
    };
    if pending.senses.is_empty() {
        return Err(invalid("entry has no senses".to_string()));
    }
    let any_zero = pending.senses.iter().any(|s| s.display_h == 0);
    let all_zero = pending.senses.iter().all(|s| s.display_h == 0);
    if any_zero && !all_zero {
        return Err(invalid(
            "h0 (single-homograph form) cannot be mixed with numbered homographs".to_string(),
        ));
    }

    let mut seen = HashSet::new();
    let mut senses = Vec::with_capacity(pending.senses.len());
    for p in pending.senses {
        let homograph = if all_zero { 1 } else { p.display_h };
        if !seen.insert((homograph, p.sense)) {
            return Err(invalid(format!(
                "duplicate sense h{}.s{} (line {})",
                p.display_h, p.sense, p.line
            )));
        }
        senses.push(Sense {
            homograph,
            sense: p.sense,
            pos: p.pos,
            domain: p.domain,
            gloss: process_gloss(&p.gloss_text, stops),
        });
    }

    let homograph_count = senses.iter().map(|s| s.homograph).max().unwrap_or(0);
    for h in 1..=homograph_count {
        let mut numbers: Vec<usize> = senses
            .iter()
            .filter(|s| s.homograph == h)
            .map(|s| s.sense)
            .collect();
        numbers.sort_unstable();
        if numbers.is_empty() {
            return Err(invalid(format!(
                "homograph numbers must be dense: h{h} is missing"
            )));
        }
        if numbers != (1..=numbers.len()).collect::<Vec<_>>() {
            return Err(invalid(format!(
                "sense numbers within h{h} must be dense starting at s1"
            )));
        }
    }
    if senses.iter().any(|s| s.homograph == 0) {
        return Err(invalid("homograph ids must be 1-based".to_string()));
    }

    senses.sort_by_key(|s| (s.homograph, s.sense));
    Ok(Entry {
        lemma,
        senses,
        homograph_count,
    })
}
