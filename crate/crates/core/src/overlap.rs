//! Definition-overlap scoring and the energy function the optimizer
//! minimizes.
//!
//! All chosen senses' gloss tokens are pooled. In **raw** mode every word
//! type occurring `c >= 2` times contributes `c - 1` to the overlap. In
//! **normalized** mode an occurrence coming from a gloss of `L` tokens
//! contributes `1/L`, and each word type with two or more pooled
//! occurrences contributes the sum of its occurrence weights minus the
//! single smallest one (the analogue of raw mode's `- 1`); types seen once
//! contribute nothing. When every gloss has the same length `L`, the
//! normalized overlap times `L` equals the raw overlap exactly.
//!
//! Scores are exact rationals ([`Score`]), so results never depend on
//! accumulation order and incremental updates invert exactly. The energy
//! being minimized is
//!
//! ```text
//! energy = -overlap + domain_weight * domain_score
//! ```
//!
//! where `domain_score` is the pairwise tree distance between the chosen
//! senses' domain codes (see [`crate::domaincodes`]); higher overlap and
//! tighter domains both lower the energy.
//!
//! [`EnergyTracker`] maintains the pooled counts incrementally so a
//! single-slot switch costs time proportional to the two glosses involved
//! rather than the whole pool; in debug builds it re-derives the energy
//! from scratch every 1000 moves and asserts agreement with the direct
//! computation in [`configuration_energy`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use thiserror::Error;

use crate::annealer::CandidateSpace;
use crate::domaincodes::{domain_score, DomainTree};

/// Exact rational score. `i128` components keep long pooled sums with
/// mixed denominators far from overflow.
pub type Score = Ratio<i128>;

/// Which overlap definition to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OverlapMode {
    Raw,
    Normalized,
}

impl OverlapMode {
    pub fn name(self) -> &'static str {
        match self {
            OverlapMode::Raw => "raw",
            OverlapMode::Normalized => "normalized",
        }
    }
}

impl fmt::Display for OverlapMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown overlap mode '{0}' (expected 'raw' or 'normalized')")]
pub struct UnknownModeError(pub String);

impl FromStr for OverlapMode {
    type Err = UnknownModeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(OverlapMode::Raw),
            "normalized" => Ok(OverlapMode::Normalized),
            other => Err(UnknownModeError(other.to_string())),
        }
    }
}

/// One assignment of a candidate sense to every slot: `choice[i]` indexes
/// into slot `i`'s candidate list. Ordering is lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub choice: Vec<usize>,
}

impl Configuration {
    /// Every slot on its first candidate — the optimizer's start state.
    pub fn all_first(slots: usize) -> Self {
        Configuration {
            choice: vec![0; slots],
        }
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.is_empty()
    }
}

/// Parameters of the energy function.
#[derive(Debug, Clone, Copy)]
pub struct EnergyParams<'a> {
    pub mode: OverlapMode,
    /// Weight on the domain cohesion term; zero ignores domains.
    pub domain_weight: Score,
    pub domains: Option<&'a DomainTree>,
}

impl EnergyParams<'static> {
    /// Overlap-only scoring: no domain term.
    pub fn overlap_only(mode: OverlapMode) -> Self {
        EnergyParams {
            mode,
            domain_weight: Score::from_integer(0),
            domains: None,
        }
    }
}

/// The energy combiner: `-overlap + domain_weight * domain_score`.
/// Lower is better; overlap pulls down, domain spread pushes up.
pub fn energy(overlap: Score, domain_score: Score, domain_weight: Score) -> Score {
    domain_weight * domain_score - overlap
}

/// Raw pooled overlap: sum over word types of `max(0, count - 1)`.
pub fn raw_overlap(glosses: &[&[String]]) -> Score {
    let mut counts: HashMap<&str, i128> = HashMap::new();
    for gloss in glosses {
        for word in gloss.iter() {
            *counts.entry(word.as_str()).or_insert(0) += 1;
        }
    }
    Score::from_integer(counts.values().map(|c| (c - 1).max(0)).sum())
}

/// Length-normalized pooled overlap: an occurrence from an `L`-token gloss
/// weighs `1/L`; each word type seen at least twice contributes its weight
/// sum minus its smallest single weight.
pub fn normalized_overlap(glosses: &[&[String]]) -> Score {
    struct Acc {
        count: u32,
        sum: Score,
        min: Score,
    }
    let mut types: HashMap<&str, Acc> = HashMap::new();
    for gloss in glosses {
        if gloss.is_empty() {
            continue;
        }
        let contrib = Score::new(1, gloss.len() as i128);
        for word in gloss.iter() {
            types
                .entry(word.as_str())
                .and_modify(|acc| {
                    acc.count += 1;
                    acc.sum += contrib;
                    if contrib < acc.min {
                        acc.min = contrib;
                    }
                })
                .or_insert(Acc {
                    count: 1,
                    sum: contrib,
                    min: contrib,
                });
        }
    }
    let mut total = Score::from_integer(0);
    for acc in types.values() {
        if acc.count >= 2 {
            total += acc.sum - acc.min;
        }
    }
    total
}

/// Direct (non-incremental) energy of a configuration: pools the chosen
/// effective glosses, scores them per `params.mode`, and adds the weighted
/// domain term. This is the reference route the incremental tracker is
/// checked against.
pub fn configuration_energy(
    space: &CandidateSpace,
    config: &Configuration,
    params: &EnergyParams,
) -> Score {
    assert_eq!(
        config.choice.len(),
        space.slot_count(),
        "configuration length must match slot count"
    );
    let glosses: Vec<&[String]> = space
        .slots()
        .iter()
        .enumerate()
        .map(|(i, slot)| slot.candidates[config.choice[i]].gloss.as_slice())
        .collect();
    let overlap = match params.mode {
        OverlapMode::Raw => raw_overlap(&glosses),
        OverlapMode::Normalized => normalized_overlap(&glosses),
    };
    let dscore = match params.domains {
        Some(tree) => domain_score(
            tree,
            space.slots().iter().enumerate().filter_map(|(i, slot)| {
                slot.candidates[config.choice[i]].domain.as_deref()
            }),
        ),
        None => Score::from_integer(0),
    };
    energy(overlap, dscore, params.domain_weight)
}

#[derive(Debug, Clone)]
struct TypeState {
    count: u32,
    sum: Score,
    /// Multiset of live occurrence weights, for exact minimum retrieval
    /// after removals.
    contribs: BTreeMap<Score, u32>,
}

impl TypeState {
    fn new() -> Self {
        TypeState {
            count: 0,
            sum: Score::from_integer(0),
            contribs: BTreeMap::new(),
        }
    }

    /// This type's current term in the normalized total.
    fn active_term(&self) -> Score {
        if self.count >= 2 {
            let min = *self
                .contribs
                .first_key_value()
                .expect("count >= 2 implies stored weights")
                .0;
            self.sum - min
        } else {
            Score::from_integer(0)
        }
    }
}

/// Incrementally maintained energy of one evolving configuration.
///
/// `switch` applies a single-slot change and returns the exact energy
/// delta; switching back restores the previous state bit for bit, which is
/// how the optimizer rejects a move.
pub struct EnergyTracker<'a> {
    space: &'a CandidateSpace,
    params: EnergyParams<'a>,
    config: Configuration,
    types: Vec<TypeState>,
    /// Raw-mode total: sum over types of `max(0, count - 1)`.
    raw_excess: i128,
    /// Normalized-mode total: sum over types of their active term.
    norm_total: Score,
    domain_total: Score,
    moves: u64,
}

impl<'a> EnergyTracker<'a> {
    pub fn new(space: &'a CandidateSpace, params: EnergyParams<'a>, config: Configuration) -> Self {
        assert_eq!(
            config.choice.len(),
            space.slot_count(),
            "configuration length must match slot count"
        );
        let mut tracker = EnergyTracker {
            space,
            params,
            config,
            types: vec![TypeState::new(); space.vocab_size() as usize],
            raw_excess: 0,
            norm_total: Score::from_integer(0),
            domain_total: Score::from_integer(0),
            moves: 0,
        };
        for slot in 0..space.slot_count() {
            tracker.add_gloss(slot, tracker.config.choice[slot]);
        }
        if let Some(tree) = params.domains {
            tracker.domain_total = domain_score(
                tree,
                space.slots().iter().enumerate().filter_map(|(i, slot)| {
                    slot.candidates[tracker.config.choice[i]].domain.as_deref()
                }),
            );
        }
        tracker
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn overlap(&self) -> Score {
        match self.params.mode {
            OverlapMode::Raw => Score::from_integer(self.raw_excess),
            OverlapMode::Normalized => self.norm_total,
        }
    }

    pub fn energy(&self) -> Score {
        energy(self.overlap(), self.domain_total, self.params.domain_weight)
    }

    /// Set `slot` to `candidate` and return the exact energy change.
    /// A no-op switch returns zero.
    pub fn switch(&mut self, slot: usize, candidate: usize) -> Score {
        let before = self.energy();
        let old = self.config.choice[slot];
        if old != candidate {
            if let Some(tree) = self.params.domains {
                self.domain_total += self.domain_shift(tree, slot, old, candidate);
            }
            self.remove_gloss(slot, old);
            self.add_gloss(slot, candidate);
            self.config.choice[slot] = candidate;
        }
        self.moves += 1;
        #[cfg(debug_assertions)]
        if self.moves.is_multiple_of(1000) {
            let direct = configuration_energy(self.space, &self.config, &self.params);
            assert_eq!(
                self.energy(),
                direct,
                "incremental energy drifted from the direct computation"
            );
        }
        self.energy() - before
    }

    /// Change in the pairwise domain sum when `slot` moves from candidate
    /// `old` to `new`.
    fn domain_shift(&self, tree: &DomainTree, slot: usize, old: usize, new: usize) -> Score {
        let known = |cand: usize| {
            self.space
                .candidate(slot, cand)
                .domain
                .as_deref()
                .filter(|c| tree.contains(c))
        };
        let old_code = known(old);
        let new_code = known(new);
        if old_code.is_none() && new_code.is_none() {
            return Score::from_integer(0);
        }
        let mut shift: i128 = 0;
        for (j, other) in self.space.slots().iter().enumerate() {
            if j == slot {
                continue;
            }
            let Some(jc) = other.candidates[self.config.choice[j]]
                .domain
                .as_deref()
                .filter(|c| tree.contains(c))
            else {
                continue;
            };
            if let Some(oc) = old_code {
                shift -= tree.node_distance(oc, jc).expect("codes checked") as i128;
            }
            if let Some(nc) = new_code {
                shift += tree.node_distance(nc, jc).expect("codes checked") as i128;
            }
        }
        Score::from_integer(shift)
    }

    fn add_gloss(&mut self, slot: usize, candidate: usize) {
        let space: &'a CandidateSpace = self.space;
        let ids = space.gloss_ids(slot, candidate);
        if ids.is_empty() {
            return;
        }
        let contrib = Score::new(1, ids.len() as i128);
        for &id in ids {
            self.add_occurrence(id, contrib);
        }
    }

    fn remove_gloss(&mut self, slot: usize, candidate: usize) {
        let space: &'a CandidateSpace = self.space;
        let ids = space.gloss_ids(slot, candidate);
        if ids.is_empty() {
            return;
        }
        let contrib = Score::new(1, ids.len() as i128);
        for &id in ids {
            self.remove_occurrence(id, contrib);
        }
    }

    fn add_occurrence(&mut self, id: u32, contrib: Score) {
        let t = &mut self.types[id as usize];
        if t.count >= 1 {
            self.raw_excess += 1;
        }
        let old_term = t.active_term();
        t.count += 1;
        t.sum += contrib;
        *t.contribs.entry(contrib).or_insert(0) += 1;
        let new_term = t.active_term();
        self.norm_total += new_term - old_term;
    }

    fn remove_occurrence(&mut self, id: u32, contrib: Score) {
        let t = &mut self.types[id as usize];
        debug_assert!(t.count > 0, "removing an occurrence that was never added");
        let old_term = t.active_term();
        t.count -= 1;
        if t.count >= 1 {
            self.raw_excess -= 1;
        }
        t.sum -= contrib;
        match t.contribs.get_mut(&contrib) {
            Some(n) if *n > 1 => *n -= 1,
            Some(_) => {
                t.contribs.remove(&contrib);
            }
            None => unreachable!("weight multiset out of sync"),
        }
        let new_term = t.active_term();
        self.norm_total += new_term - old_term;
    }
}
