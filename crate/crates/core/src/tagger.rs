//! The end-to-end tagging pipeline: prepared tokens in, tagged tokens out.
//!
//! For each sentence the tagger looks every stem up in the lexicon,
//! filters each entry's senses by part of speech, builds a candidate
//! space, and lets the optimizer pick one sense per token. Tokens whose
//! stem the lexicon lacks come back untagged. Sentences are independent:
//! each gets its own derived seed, so results do not change with the
//! number of worker threads.

use thiserror::Error;

use crate::annealer::{
    anneal, brute_force_optimum, AnnealError, CandidateSense, CandidateSpace, Schedule,
    SlotCandidates,
};
use crate::domaincodes::DomainTree;
use crate::lexicon::Lexicon;
use crate::overlap::{EnergyParams, OverlapMode, Score};
use crate::pos::{filter_senses, naive_tag, PosMapping};
use crate::textprep::{prepare, PrepError, PreppedToken, StopList};

#[derive(Debug, Error)]
pub enum TagError {
    #[error(transparent)]
    Prep(#[from] PrepError),
    #[error(transparent)]
    Anneal(#[from] AnnealError),
    #[error(
        "token '{surface}' (sentence {sentence_index}, token {token_index}) \
         has no part-of-speech tag but tagging was asked to use provided tags"
    )]
    MissingPosTag {
        surface: String,
        sentence_index: usize,
        token_index: usize,
    },
    #[error("sense {label} of '{lemma}' carries domain code '{code}' missing from the domain tree")]
    UnknownDomainCode {
        lemma: String,
        label: String,
        code: String,
    },
    #[error("failed to start worker pool: {0}")]
    Pool(String),
}

/// Where part-of-speech information comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosSource {
    /// Use the tag carried on each token (error if one is missing).
    Provided,
    /// Derive a tag per word from the majority category of its senses.
    Naive,
    /// Skip the filter; every sense stays a candidate.
    Off,
}

/// Everything configurable about a tagging run.
#[derive(Debug, Clone)]
pub struct TagOptions<'a> {
    pub pos: PosSource,
    pub mode: OverlapMode,
    /// Weight on the domain-cohesion term; zero leaves domains out.
    pub domain_weight: Score,
    pub domain_tree: Option<&'a DomainTree>,
    /// Mapping for provided tags; `None` means the built-in Penn set.
    pub pos_mapping: Option<&'a PosMapping>,
    pub schedule: Schedule,
    /// Global seed; each sentence derives its own from this.
    pub seed: u64,
    /// Replace annealing with exhaustive search (small sentences only).
    pub exact: bool,
    /// Configuration cap for exhaustive search.
    pub exact_cap: Option<u128>,
    /// Worker threads: 1 = in-thread, 0 = one per core, n = exactly n.
    /// Builds without the `parallel` feature always run in-thread.
    pub jobs: usize,
}

impl Default for TagOptions<'static> {
    fn default() -> Self {
        TagOptions {
            pos: PosSource::Naive,
            mode: OverlapMode::Normalized,
            domain_weight: Score::from_integer(0),
            domain_tree: None,
            pos_mapping: None,
            schedule: Schedule::default(),
            seed: 0,
            exact: false,
            exact_cap: None,
            jobs: 1,
        }
    }
}

/// The sense chosen for a token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SenseTag {
    pub homograph: usize,
    pub sense: usize,
    /// Label in display form, e.g. `h0.s2` or `h3.s1`.
    pub display: String,
    /// The full stored gloss of the chosen sense.
    pub gloss: Vec<String>,
}

/// One token of output. `tag` is `None` when the lexicon has no entry for
/// the token's stem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub sentence_index: usize,
    /// Raw-token position within the sentence, before stop-word removal.
    pub token_index: usize,
    pub surface: String,
    pub stem: String,
    pub tag: Option<SenseTag>,
    /// Senses the entry offered before part-of-speech filtering.
    pub candidates_before: usize,
    /// Senses left after filtering (what the optimizer chose among).
    pub candidates_after: usize,
}

impl TaggedToken {
    /// Serialize as one tab-separated line:
    /// `sentence  token  surface  stem  label  gloss words`
    /// with `UNKNOWN` and an empty gloss field for untagged tokens.
    pub fn to_record(&self) -> String {
        let (label, gloss) = match &self.tag {
            Some(t) => (t.display.clone(), t.gloss.join(" ")),
            None => ("UNKNOWN".to_string(), String::new()),
        };
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.sentence_index, self.token_index, self.surface, self.stem, label, gloss
        )
    }
}

/// SplitMix64 finalizer; used to spread seeds across sentences.
pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one sentence of a run. Mixing the sentence index through
/// SplitMix64 keeps per-sentence streams decorrelated, and keeping the
/// derivation explicit here makes runs reproducible no matter how the
/// sentences are scheduled across threads.
pub(crate) fn sentence_seed(global: u64, sentence_index: usize) -> u64 {
    splitmix64(global ^ splitmix64(sentence_index as u64))
}

/// Tag the tokens of a single sentence. `seed` drives this sentence's
/// optimizer run; callers batching whole texts should derive it with the
/// same per-sentence rule [`tag_prepared`] uses.
pub fn tag_sentence(
    tokens: &[PreppedToken],
    lexicon: &Lexicon,
    options: &TagOptions,
    seed: u64,
) -> Result<Vec<TaggedToken>, TagError> {
    let mut output: Vec<TaggedToken> = Vec::with_capacity(tokens.len());
    let mut slots: Vec<SlotCandidates> = Vec::new();

    for (position, token) in tokens.iter().enumerate() {
        let Some(entry) = lexicon.lookup(&token.stem) else {
            output.push(TaggedToken {
                sentence_index: token.sentence_index,
                token_index: token.token_index,
                surface: token.surface.clone(),
                stem: token.stem.clone(),
                tag: None,
                candidates_before: 0,
                candidates_after: 0,
            });
            continue;
        };

        let senses = entry.senses();
        let filtered = match options.pos {
            PosSource::Off => senses.iter().collect(),
            PosSource::Naive => filter_senses(senses, naive_tag(entry)),
            PosSource::Provided => {
                let tag = token.pos_tag.as_deref().ok_or_else(|| {
                    TagError::MissingPosTag {
                        surface: token.surface.clone(),
                        sentence_index: token.sentence_index,
                        token_index: token.token_index,
                    }
                })?;
                let mapping = options.pos_mapping.unwrap_or(PosMapping::default_mapping());
                filter_senses(senses, mapping.map_tag(tag))
            }
        };

        if let Some(tree) = options.domain_tree {
            for sense in &filtered {
                if let Some(code) = &sense.domain {
                    if !tree.contains(code) {
                        return Err(TagError::UnknownDomainCode {
                            lemma: entry.lemma.clone(),
                            label: entry.format_label(sense.homograph, sense.sense),
                            code: code.clone(),
                        });
                    }
                }
            }
        }

        let candidates = filtered
            .iter()
            .map(|sense| CandidateSense {
                homograph: sense.homograph,
                sense: sense.sense,
                // A sense must not score overlap against its own headword;
                // drop gloss tokens equal to the token's stem.
                gloss: sense
                    .gloss
                    .iter()
                    .filter(|w| *w != &token.stem)
                    .cloned()
                    .collect(),
                domain: sense.domain.clone(),
            })
            .collect();

        slots.push(SlotCandidates {
            token_index: position,
            lemma: token.stem.clone(),
            candidates,
        });
        output.push(TaggedToken {
            sentence_index: token.sentence_index,
            token_index: token.token_index,
            surface: token.surface.clone(),
            stem: token.stem.clone(),
            tag: None,
            candidates_before: senses.len(),
            candidates_after: filtered.len(),
        });
    }

    if slots.is_empty() {
        return Ok(output);
    }

    let space = CandidateSpace::new(slots);
    let params = EnergyParams {
        mode: options.mode,
        domain_weight: options.domain_weight,
        domains: options.domain_tree,
    };
    let config = if options.exact {
        brute_force_optimum(&space, &params, options.exact_cap)?.0
    } else {
        anneal(&space, &params, &options.schedule, seed)?.config
    };

    for (slot_index, slot) in space.slots().iter().enumerate() {
        let chosen = &slot.candidates[config.choice[slot_index]];
        let entry = lexicon
            .lookup(&slot.lemma)
            .expect("slot lemma came from a lookup");
        let sense = entry
            .find(chosen.homograph, chosen.sense)
            .expect("candidate identity came from the entry");
        output[slot.token_index].tag = Some(SenseTag {
            homograph: chosen.homograph,
            sense: chosen.sense,
            display: entry.format_label(chosen.homograph, chosen.sense),
            gloss: sense.gloss.clone(),
        });
    }

    Ok(output)
}

fn sentence_ranges(tokens: &[PreppedToken]) -> Vec<std::ops::Range<usize>> {
    let mut ranges = Vec::new();
    let mut start = 0;
    for i in 1..=tokens.len() {
        if i == tokens.len() || tokens[i].sentence_index != tokens[start].sentence_index {
            ranges.push(start..i);
            start = i;
        }
    }
    ranges
}

/// Tag a full prepared text, sentence by sentence. With the `parallel`
/// feature and `jobs != 1`, sentences run on a worker pool; output order
/// and content are identical either way.
pub fn tag_prepared(
    tokens: &[PreppedToken],
    lexicon: &Lexicon,
    options: &TagOptions,
) -> Result<Vec<TaggedToken>, TagError> {
    let ranges = sentence_ranges(tokens);
    let run_one = |range: &std::ops::Range<usize>| {
        let chunk = &tokens[range.clone()];
        let seed = sentence_seed(options.seed, chunk[0].sentence_index);
        tag_sentence(chunk, lexicon, options, seed)
    };

    #[cfg(feature = "parallel")]
    let per_sentence: Vec<Vec<TaggedToken>> = if options.jobs != 1 {
        use rayon::prelude::*;
        let mut builder = rayon::ThreadPoolBuilder::new();
        if options.jobs > 0 {
            builder = builder.num_threads(options.jobs);
        }
        let pool = builder.build().map_err(|e| TagError::Pool(e.to_string()))?;
        pool.install(|| ranges.par_iter().map(run_one).collect::<Result<_, _>>())?
    } else {
        ranges.iter().map(run_one).collect::<Result<_, _>>()?
    };

    #[cfg(not(feature = "parallel"))]
    let per_sentence: Vec<Vec<TaggedToken>> =
        ranges.iter().map(run_one).collect::<Result<_, _>>()?;

    Ok(per_sentence.into_iter().flatten().collect())
}

/// Convenience wrapper: prepare raw text and tag it. `pos_tags`, when
/// given, must align one-to-one with the raw token stream.
pub fn tag_text(
    text: &str,
    lexicon: &Lexicon,
    stops: &StopList,
    pos_tags: Option<&[String]>,
    options: &TagOptions,
) -> Result<Vec<TaggedToken>, TagError> {
    let tokens = prepare(text, stops, pos_tags)?;
    tag_prepared(&tokens, lexicon, options)
}
