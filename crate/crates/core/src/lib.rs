//! Word sense tagging over a machine-readable lexicon.
//!
//! The pipeline assigns one (homograph, sense) pair from a lexicon to each
//! content word of a text. It combines two independent knowledge sources:
//! a part-of-speech filter that discards senses inconsistent with a word's
//! syntactic category, and a stochastic search (simulated annealing) that
//! picks the sense configuration whose pooled dictionary definitions
//! overlap the most. An optional third source scores configurations by
//! closeness of their domain codes in a thesaural hierarchy.
//!
//! Modules follow the processing order:
//!
//! * [`textprep`] — sentence splitting, tokenization, stemming, stop-word
//!   removal.
//! * [`lexicon`] — the dictionary model (entries, homographs, senses) and
//!   its file format.
//! * [`pos`] — Penn-tag mapping and candidate-sense filtering.
//! * [`overlap`] — the raw and length-normalized overlap scores and the
//!   energy function the optimizer minimizes.
//! * [`annealer`] — seeded simulated annealing plus an exhaustive oracle.
//! * [`domaincodes`] — tree distance between domain codes.
//! * [`tagger`] — the end-to-end pipeline producing tagged tokens.
//! * [`eval`] — scoring against a gold standard and mode comparisons.

pub mod annealer;
pub mod domaincodes;
pub mod eval;
pub mod lexicon;
pub mod overlap;
pub mod pos;
pub mod tagger;
pub mod textprep;

pub use annealer::{anneal, brute_force_optimum, CandidateSpace, Schedule};
pub use lexicon::{CoarsePos, Entry, Lexicon, Sense};
pub use overlap::{energy, normalized_overlap, raw_overlap, Configuration, OverlapMode, Score};
pub use pos::PosMapping;
pub use tagger::{tag_sentence, tag_text, TagOptions, TaggedToken};
pub use textprep::{prepare, split_sentences, stem, tokenize, PreppedToken, StopList};
