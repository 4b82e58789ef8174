//! Part-of-speech support: mapping fine-grained tagger output (Penn
//! Treebank tags) onto the coarse categories senses carry, plus the two
//! ways a token acquires a category — an external tag or the naive
//! majority vote over its entry — and the candidate filter they feed.
//!
//! Filtering never empties a candidate list: when no sense matches the
//! token's category, all senses are kept, so a bad tag degrades to "no
//! filter" rather than to an unanswerable token.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

use crate::lexicon::{CoarsePos, Entry, Sense};

const DEFAULT_PENN_MAP: &str = include_str!("../data/penn_tags.tsv");

/// The 36 standard Penn Treebank word-level tags.
pub const STANDARD_PENN_TAGS: [&str; 36] = [
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN", "NNS", "NNP",
    "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM", "TO", "UH", "VB",
    "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT", "WP", "WP$", "WRB",
];

#[derive(Debug, Error)]
pub enum PosError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("tag map parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("tag map is missing standard tags: {}", missing.join(", "))]
    Incomplete { missing: Vec<String> },
}

/// Mapping from fine-grained tag strings to coarse categories.
///
/// Unknown tags map to [`CoarsePos::Wildcard`], which disables filtering
/// for that token rather than guessing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosMapping {
    map: HashMap<String, CoarsePos>,
}

impl PosMapping {
    /// The built-in Penn Treebank mapping, total on the 36 standard tags.
    pub fn default_mapping() -> &'static PosMapping {
        static DEFAULT: OnceLock<PosMapping> = OnceLock::new();
        DEFAULT.get_or_init(|| {
            let mapping = PosMapping::parse(DEFAULT_PENN_MAP)
                .expect("built-in tag map must parse");
            mapping
                .validate_standard()
                .expect("built-in tag map must cover the standard tags");
            mapping
        })
    }

    /// Parse a tag map: one `TAG<TAB>category` per line, `#` comments.
    pub fn parse(text: &str) -> Result<Self, PosError> {
        let mut map = HashMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (tag, category) = line.split_once('\t').ok_or_else(|| PosError::Parse {
                line: line_no,
                message: "expected 'TAG<TAB>category'".to_string(),
            })?;
            let tag = tag.trim().to_string();
            let pos: CoarsePos = category.trim().parse().map_err(|e| PosError::Parse {
                line: line_no,
                message: format!("{e}"),
            })?;
            if map.insert(tag.clone(), pos).is_some() {
                return Err(PosError::Parse {
                    line: line_no,
                    message: format!("duplicate mapping for tag '{tag}'"),
                });
            }
        }
        Ok(PosMapping { map })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PosError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PosError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Map a tag to its coarse category; unknown tags become `Wildcard`.
    /// Lookup is tried verbatim, then uppercased.
    pub fn map_tag(&self, tag: &str) -> CoarsePos {
        if let Some(pos) = self.map.get(tag) {
            return *pos;
        }
        self.map
            .get(&tag.to_uppercase())
            .copied()
            .unwrap_or(CoarsePos::Wildcard)
    }

    /// Check the mapping assigns a category to every standard Penn tag.
    pub fn validate_standard(&self) -> Result<(), PosError> {
        let missing: Vec<String> = STANDARD_PENN_TAGS
            .iter()
            .filter(|t| !self.map.contains_key(**t))
            .map(|t| t.to_string())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(PosError::Incomplete { missing })
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Keep the senses compatible with `pos`; if none are, keep everything
/// (filtering must never make a token unanswerable).
pub fn filter_senses(senses: &[Sense], pos: CoarsePos) -> Vec<&Sense> {
    let kept: Vec<&Sense> = senses.iter().filter(|s| s.pos.matches(pos)).collect();
    if kept.is_empty() {
        senses.iter().collect()
    } else {
        kept
    }
}

/// Guess a token's category from its entry alone: the category held by
/// the most senses. Ties break in the fixed order noun, verb, adjective,
/// adverb, other; entries whose senses are all wildcard get `Wildcard`.
pub fn naive_tag(entry: &Entry) -> CoarsePos {
    const ORDER: [CoarsePos; 5] = [
        CoarsePos::Noun,
        CoarsePos::Verb,
        CoarsePos::Adjective,
        CoarsePos::Adverb,
        CoarsePos::Other,
    ];
    let mut counts = [0usize; 5];
    for sense in entry.senses() {
        if let Some(i) = ORDER.iter().position(|p| *p == sense.pos) {
            counts[i] += 1;
        }
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    if best == 0 {
        return CoarsePos::Wildcard;
    }
    ORDER[counts.iter().position(|c| *c == best).unwrap()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Lexicon;
    use crate::textprep::StopList;

    fn entry_with(pos_list: &[&str]) -> Entry {
        let mut text = String::from("@word\n");
        for (i, pos) in pos_list.iter().enumerate() {
            text.push_str(&format!("h1.s{} {} :: filler gloss\n", i + 1, pos));
        }
        let lex = Lexicon::parse(&text, &StopList::empty()).unwrap();
        lex.lookup("word").unwrap().clone()
    }

    #[test]
    fn default_mapping_covers_standard_tags() {
        let mapping = PosMapping::default_mapping();
        assert!(mapping.validate_standard().is_ok());
        assert_eq!(mapping.len(), 36);
    }

    #[test]
    fn default_mapping_spot_checks() {
        let m = PosMapping::default_mapping();
        assert_eq!(m.map_tag("NN"), CoarsePos::Noun);
        assert_eq!(m.map_tag("NNS"), CoarsePos::Noun);
        assert_eq!(m.map_tag("NNP"), CoarsePos::Noun);
        assert_eq!(m.map_tag("VB"), CoarsePos::Verb);
        assert_eq!(m.map_tag("VBD"), CoarsePos::Verb);
        assert_eq!(m.map_tag("MD"), CoarsePos::Verb);
        assert_eq!(m.map_tag("JJ"), CoarsePos::Adjective);
        assert_eq!(m.map_tag("JJS"), CoarsePos::Adjective);
        assert_eq!(m.map_tag("RB"), CoarsePos::Adverb);
        assert_eq!(m.map_tag("WRB"), CoarsePos::Adverb);
        assert_eq!(m.map_tag("DT"), CoarsePos::Other);
        assert_eq!(m.map_tag("CC"), CoarsePos::Other);
        assert_eq!(m.map_tag("CD"), CoarsePos::Other);
    }

    #[test]
    fn unknown_tags_map_to_wildcard() {
        let m = PosMapping::default_mapping();
        assert_eq!(m.map_tag("XYZ"), CoarsePos::Wildcard);
        assert_eq!(m.map_tag(""), CoarsePos::Wildcard);
    }

    #[test]
    fn lowercase_tags_are_accepted() {
        let m = PosMapping::default_mapping();
        assert_eq!(m.map_tag("nn"), CoarsePos::Noun);
        assert_eq!(m.map_tag("vbd"), CoarsePos::Verb);
    }

    #[test]
    fn parse_rejects_missing_tab() {
        let err = PosMapping::parse("NN noun\n").unwrap_err();
        assert!(matches!(err, PosError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn parse_rejects_unknown_category() {
        let err = PosMapping::parse("NN\tnominal\n").unwrap_err();
        assert!(err.to_string().contains("nominal"), "{err}");
    }

    #[test]
    fn parse_rejects_duplicate_tag() {
        let err = PosMapping::parse("NN\tnoun\nNN\tverb\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn validate_reports_missing_tags() {
        let m = PosMapping::parse("NN\tnoun\n").unwrap();
        let err = m.validate_standard().unwrap_err();
        match err {
            PosError::Incomplete { missing } => {
                assert_eq!(missing.len(), 35);
                assert!(missing.contains(&"VBD".to_string()));
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn filter_keeps_matching_senses() {
        let entry = entry_with(&["noun", "noun", "verb"]);
        let kept = filter_senses(entry.senses(), CoarsePos::Noun);
        assert_eq!(kept.len(), 2);
        assert!(kept.iter().all(|s| s.pos == CoarsePos::Noun));
    }

    #[test]
    fn filter_falls_back_to_all_when_nothing_matches() {
        let entry = entry_with(&["noun", "noun", "verb"]);
        let kept = filter_senses(entry.senses(), CoarsePos::Adverb);
        assert_eq!(kept.len(), 3);
    }

    #[test]
    fn filter_with_wildcard_token_keeps_all() {
        let entry = entry_with(&["noun", "verb", "adjective"]);
        let kept = filter_senses(entry.senses(), CoarsePos::Wildcard);
        assert_eq!(kept.len(), 3);
    }

    #[test]
    fn wildcard_senses_survive_any_filter() {
        let entry = entry_with(&["wildcard", "verb"]);
        let kept = filter_senses(entry.senses(), CoarsePos::Noun);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].pos, CoarsePos::Wildcard);
    }

    #[test]
    fn naive_tag_takes_majority() {
        assert_eq!(naive_tag(&entry_with(&["noun", "noun", "verb"])), CoarsePos::Noun);
        assert_eq!(
            naive_tag(&entry_with(&["verb", "adverb", "verb"])),
            CoarsePos::Verb
        );
    }

    #[test]
    fn naive_tag_breaks_ties_in_fixed_order() {
        assert_eq!(naive_tag(&entry_with(&["verb", "noun"])), CoarsePos::Noun);
        assert_eq!(
            naive_tag(&entry_with(&["adverb", "adjective"])),
            CoarsePos::Adjective
        );
        assert_eq!(naive_tag(&entry_with(&["other", "adverb"])), CoarsePos::Adverb);
    }

    #[test]
    fn naive_tag_ignores_wildcard_senses() {
        assert_eq!(
            naive_tag(&entry_with(&["wildcard", "wildcard", "verb"])),
            CoarsePos::Verb
        );
        assert_eq!(
            naive_tag(&entry_with(&["wildcard", "wildcard"])),
            CoarsePos::Wildcard
        );
    }
}
