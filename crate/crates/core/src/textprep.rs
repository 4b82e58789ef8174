//! Text preparation: sentence splitting, tokenization, stemming and
//! stop-word filtering.
//!
//! The stemmer is a deliberately small suffix-rule cascade, not a full
//! lemmatizer. It exists so that input text and lexicon glosses live in the
//! same key space; both sides are always normalized through [`stem`]. The
//! cascade tries an irregular-form table first, then the first matching
//! suffix rule:
//!
//! | rule | example |
//! |------|---------|
//! | `-sses` -> `-ss` | classes -> class |
//! | `-ies` -> `-y` (length > 4, else `-ie`) | parties -> party, ties -> tie |
//! | `-es` -> `` after ch/sh/ss/x/z/o | churches -> church |
//! | `-s` -> `` (not after s/u/i) | prices -> price |
//! | `-ied` -> `-y` (length > 4, else `-ie`) | carried -> carry, died -> die |
//! | `-iest`, `-ier` -> `-y` | happiest -> happy, easier -> easy |
//! | `-ed`, `-ing` -> `` + repair | offered -> offer, making -> make |
//! | `-ly` -> `` | rapidly -> rapid, easily -> easy |
//! | `-est`, `-er` -> `` + repair | greatest -> great, bigger -> big |
//!
//! The repair step after stripping `-ed`/`-ing` restores a dropped final
//! `e` when the remainder ends in `-uat`/`-iat` (eventuated -> eventuate),
//! a stop consonant plus `l` (doubled -> double), or `-iz`
//! (organized -> organize); after any of `-ed`/`-ing`/`-er`/`-est` it
//! undoes consonant doubling (stopped -> stop, bigger -> big) and restores
//! `e` on one-syllable consonant–vowel–consonant remainders
//! (making -> make, finer -> fine). Every stripping rule requires the
//! remainder to keep a vowel, so short function-like words (string, best,
//! ring) pass through untouched. The result is idempotent: stemming a stem
//! changes nothing.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const DEFAULT_IRREGULAR_STEMS: &str = include_str!("../data/irregular_stems.tsv");

/// Default abbreviations that suppress a sentence boundary after `.`.
const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "vs.", "etc.", "e.g.", "i.e.",
    "inc.", "ltd.", "co.", "no.", "fig.", "al.",
];

#[derive(Debug, Error)]
pub enum PrepError {
    /// A POS tag list was supplied but its length differs from the number
    /// of raw tokens in the text.
    #[error("POS tag alignment mismatch: {tokens} raw tokens but {tags} tags")]
    TagMismatch { tokens: usize, tags: usize },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// A token as produced by [`tokenize`]: lowercased, punctuation stripped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawToken {
    pub surface: String,
    /// Char offset of the token start within its sentence.
    pub char_offset: usize,
    pub sentence_index: usize,
}

/// A content token that survived stop-word filtering, carrying its stem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreppedToken {
    pub surface: String,
    pub stem: String,
    /// External POS tag (Penn style) when the input was pre-tagged.
    pub pos_tag: Option<String>,
    pub sentence_index: usize,
    /// Position among the sentence's raw tokens, before stop filtering.
    pub token_index: usize,
}

/// Set of words removed before definition overlap is computed.
///
/// A token is discarded when either its surface form or its stem is on the
/// list, so no surviving token ever has a stop-word stem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopList {
    words: HashSet<String>,
}

impl StopList {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(words: I) -> Self {
        StopList {
            words: words.into_iter().map(|w| w.into()).collect(),
        }
    }

    /// Empty list: nothing is filtered.
    pub fn empty() -> Self {
        StopList {
            words: HashSet::new(),
        }
    }

    /// The built-in default list (articles, prepositions, pronouns,
    /// determiners, conjunctions, auxiliaries).
    pub fn default_list() -> &'static StopList {
        static DEFAULT: OnceLock<StopList> = OnceLock::new();
        DEFAULT.get_or_init(|| StopList::parse(DEFAULT_STOPWORDS))
    }

    /// Parse a stop-word file: one token per line, `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        StopList::new(data_lines(text))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PrepError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PrepError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(StopList::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    /// True when the surface form or its stem is on the list.
    pub fn blocks(&self, surface: &str, stem: &str) -> bool {
        self.contains(surface) || self.contains(stem)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(|s| s.as_str())
    }
}

/// Non-comment, non-blank lines of a data file.
fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn default_irregular_table() -> &'static HashMap<String, String> {
    static TABLE: OnceLock<HashMap<String, String>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut map = HashMap::new();
        for line in data_lines(DEFAULT_IRREGULAR_STEMS) {
            if let Some((form, root)) = line.split_once('\t') {
                map.insert(form.trim().to_string(), root.trim().to_string());
            }
        }
        map
    })
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn has_vowel(s: &str) -> bool {
    s.chars().any(is_vowel)
}

/// Number of maximal vowel runs, a cheap syllable estimate.
fn vowel_groups(s: &str) -> usize {
    let mut groups = 0;
    let mut in_vowels = false;
    for c in s.chars() {
        if is_vowel(c) {
            if !in_vowels {
                groups += 1;
            }
            in_vowels = true;
        } else {
            in_vowels = false;
        }
    }
    groups
}

/// Ends consonant–vowel–consonant with a one-syllable body: the pattern of
/// a word that dropped a final silent `e` (mak-, ris-, fin-).
fn lost_final_e(stem: &str) -> bool {
    let chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    if n < 3 || vowel_groups(stem) != 1 {
        return false;
    }
    let (a, b, c) = (chars[n - 3], chars[n - 2], chars[n - 1]);
    !is_vowel(a) && is_vowel(b) && !is_vowel(c) && !matches!(c, 'w' | 'x' | 'y')
}

/// Undo consonant doubling left by `-ed`/`-ing`/`-er`/`-est` stripping.
/// `l` is undoubled only on polysyllabic stems (controll -> control) so
/// one-syllable lemmas keep theirs (fall, roll); `s`/`z` never are.
fn undouble(stem: &str) -> Option<String> {
    let chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    if n < 2 || chars[n - 1] != chars[n - 2] {
        return None;
    }
    let c = chars[n - 1];
    if !c.is_ascii_alphabetic() || is_vowel(c) || matches!(c, 's' | 'z') {
        return None;
    }
    if c == 'l' && vowel_groups(stem) < 2 {
        return None;
    }
    Some(chars[..n - 1].iter().collect())
}

/// Repair after stripping `-ed`/`-ing`: restore a dropped final `e` or
/// undo consonant doubling.
fn repair_ed_ing(stem: String) -> String {
    if stem.ends_with("uat") || stem.ends_with("iat") || stem.ends_with("iz") {
        return stem + "e";
    }
    // Stop consonant + l: doubl- -> double, handl- -> handle. Liquids and
    // glides before l (curl, crawl) are complete words and stay put.
    let chars: Vec<char> = stem.chars().collect();
    if chars.len() >= 2
        && chars[chars.len() - 1] == 'l'
        && matches!(chars[chars.len() - 2], 'b' | 'c' | 'd' | 'f' | 'g' | 'k' | 'p' | 't')
    {
        return stem + "e";
    }
    if let Some(undoubled) = undouble(&stem) {
        return undoubled;
    }
    if lost_final_e(&stem) {
        return stem + "e";
    }
    stem
}

/// Repair after stripping `-er`/`-est`: undoubling and `e`-restoration
/// only (bigg -> big, fin -> fine).
fn repair_er_est(stem: String) -> String {
    if let Some(undoubled) = undouble(&stem) {
        return undoubled;
    }
    if lost_final_e(&stem) {
        return stem + "e";
    }
    stem
}

fn strip_suffix_checked(word: &str, suffix: &str, min_remaining: usize) -> Option<String> {
    let rest = word.strip_suffix(suffix)?;
    if rest.chars().count() >= min_remaining && has_vowel(rest) {
        Some(rest.to_string())
    } else {
        None
    }
}

/// Reduce a lowercase word to its morphological root.
///
/// Deterministic and idempotent; see the module docs for the rule table.
pub fn stem(word: &str) -> String {
    stem_with(word, default_irregular_table())
}

/// [`stem`] with a caller-supplied irregular-form table.
pub fn stem_with(word: &str, irregulars: &HashMap<String, String>) -> String {
    // Stacked suffixes need one pass each ("workers" -> "worker" -> "work"),
    // so run the rule table to a fixpoint. Termination: every rule strictly
    // shortens its input (repairs restore at most one character of a longer
    // strip), and the exception table maps straight to roots.
    let mut current = word.to_string();
    loop {
        let next = stem_pass(&current, irregulars);
        if next == current {
            return next;
        }
        current = next;
    }
}

fn stem_pass(word: &str, irregulars: &HashMap<String, String>) -> String {
    if let Some(root) = irregulars.get(word) {
        return root.clone();
    }
    if word.chars().count() < 3 {
        return word.to_string();
    }

    if let Some(rest) = word.strip_suffix("sses") {
        return format!("{rest}ss");
    }
    if let Some(rest) = word.strip_suffix("ies") {
        if !rest.is_empty() {
            return if word.chars().count() > 4 {
                format!("{rest}y")
            } else {
                format!("{rest}ie")
            };
        }
    }
    if let Some(rest) = word.strip_suffix("es") {
        let sibilant = rest.ends_with("ch")
            || rest.ends_with("sh")
            || rest.ends_with("ss")
            || rest.ends_with('x')
            || rest.ends_with('z')
            || rest.ends_with('o');
        if sibilant && has_vowel(rest) {
            return rest.to_string();
        }
    }
    if word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us") && !word.ends_with("is")
    {
        let rest = &word[..word.len() - 1];
        if rest.chars().count() >= 2 && has_vowel(rest) {
            return rest.to_string();
        }
    }
    if let Some(rest) = word.strip_suffix("ied") {
        if !rest.is_empty() {
            return if word.chars().count() > 4 {
                format!("{rest}y")
            } else {
                format!("{rest}ie")
            };
        }
    }
    if let Some(rest) = word.strip_suffix("iest") {
        if !rest.is_empty() {
            return format!("{rest}y");
        }
    }
    if let Some(rest) = word.strip_suffix("ier") {
        if !rest.is_empty() && word.chars().count() > 4 {
            return format!("{rest}y");
        }
    }
    if let Some(rest) = strip_suffix_checked(word, "ed", 3) {
        return repair_ed_ing(rest);
    }
    if let Some(rest) = strip_suffix_checked(word, "ing", 3) {
        return repair_ed_ing(rest);
    }
    if let Some(rest) = strip_suffix_checked(word, "ly", 3) {
        if let Some(trimmed) = rest.strip_suffix("ll") {
            return format!("{trimmed}l");
        }
        if let Some(trimmed) = rest.strip_suffix('i') {
            return format!("{trimmed}y");
        }
        return rest;
    }
    if let Some(rest) = strip_suffix_checked(word, "est", 3) {
        return repair_er_est(rest);
    }
    if let Some(rest) = strip_suffix_checked(word, "er", 3) {
        return repair_er_est(rest);
    }
    word.to_string()
}

/// Split text into sentences.
///
/// A boundary is a `.`, `!` or `?` followed by whitespace and a capital
/// letter, unless the dot closes a known abbreviation. Uses the built-in
/// abbreviation list.
pub fn split_sentences(text: &str) -> Vec<String> {
    let abbrevs: HashSet<String> = DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()).collect();
    split_sentences_with(text, &abbrevs)
}

/// [`split_sentences`] with an explicit abbreviation set (entries include
/// the trailing dot, matched case-insensitively: `"mr."`).
pub fn split_sentences_with(text: &str, abbreviations: &HashSet<String>) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;

    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        if c == '.' || c == '!' || c == '?' {
            // Treat a run of terminators as one candidate boundary.
            let mut end = i;
            while end + 1 < chars.len() && matches!(chars[end + 1], '.' | '!' | '?') {
                end += 1;
            }
            let mut boundary = true;
            if chars[end] == '.' && end == i {
                // The word ending at this dot, e.g. "mr." or "e.g."
                let mut w = i;
                while w > start && (chars[w - 1].is_alphanumeric() || chars[w - 1] == '.') {
                    w -= 1;
                }
                let token: String = chars[w..=i].iter().collect::<String>().to_lowercase();
                if abbreviations.contains(&token) {
                    boundary = false;
                }
            }
            if boundary {
                // Require whitespace then an uppercase letter, or end of text.
                let mut j = end + 1;
                let mut saw_space = false;
                while j < chars.len() && chars[j].is_whitespace() {
                    saw_space = true;
                    j += 1;
                }
                if j < chars.len() && !(saw_space && chars[j].is_uppercase()) {
                    boundary = false;
                }
            }
            if boundary {
                let sentence: String = chars[start..=end].iter().collect();
                let trimmed = sentence.trim();
                if !trimmed.is_empty() {
                    sentences.push(trimmed.to_string());
                }
                start = end + 1;
            }
            i = end + 1;
        } else {
            i += 1;
        }
    }
    let tail: String = chars[start.min(chars.len())..].iter().collect();
    let tail = tail.trim();
    if !tail.is_empty() {
        sentences.push(tail.to_string());
    }
    sentences
}

/// Split one sentence into lowercase alphanumeric tokens; punctuation is
/// discarded ("don't" becomes `don`, `t`).
pub fn tokenize(sentence: &str) -> Vec<RawToken> {
    tokenize_indexed(sentence, 0)
}

fn tokenize_indexed(sentence: &str, sentence_index: usize) -> Vec<RawToken> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0usize;
    for (offset, c) in sentence.chars().enumerate() {
        if c.is_alphanumeric() {
            if current.is_empty() {
                start = offset;
            }
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(RawToken {
                surface: std::mem::take(&mut current),
                char_offset: start,
                sentence_index,
            });
        }
    }
    if !current.is_empty() {
        tokens.push(RawToken {
            surface: current,
            char_offset: start,
            sentence_index,
        });
    }
    tokens
}

/// Full preparation: split into sentences, tokenize, drop stop words,
/// stem what remains.
///
/// `pos_tags`, when given, must align one-to-one with the raw tokens of
/// the whole text (before stop filtering), in order.
pub fn prepare(
    text: &str,
    stop_words: &StopList,
    pos_tags: Option<&[String]>,
) -> Result<Vec<PreppedToken>, PrepError> {
    let mut raw = Vec::new();
    for (s_idx, sentence) in split_sentences(text).iter().enumerate() {
        raw.extend(tokenize_indexed(sentence, s_idx));
    }
    if let Some(tags) = pos_tags {
        if tags.len() != raw.len() {
            return Err(PrepError::TagMismatch {
                tokens: raw.len(),
                tags: tags.len(),
            });
        }
    }

    let mut out = Vec::new();
    let mut sent = usize::MAX;
    let mut tok_idx = 0usize;
    for (i, token) in raw.iter().enumerate() {
        if token.sentence_index != sent {
            sent = token.sentence_index;
            tok_idx = 0;
        }
        let index_in_sentence = tok_idx;
        tok_idx += 1;
        let stemmed = stem(&token.surface);
        if stop_words.blocks(&token.surface, &stemmed) {
            continue;
        }
        out.push(PreppedToken {
            surface: token.surface.clone(),
            stem: stemmed,
            pos_tag: pos_tags.map(|tags| tags[i].clone()),
            sentence_index: token.sentence_index,
            token_index: index_in_sentence,
        });
    }
    Ok(out)
}
