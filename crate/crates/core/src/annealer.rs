//! Simulated annealing over sense assignments, plus the exhaustive
//! optimizer used as a cross-check on small spaces.
//!
//! The search state is a [`Configuration`] over a [`CandidateSpace`]: one
//! candidate sense per slot. The walk starts from every slot's first
//! candidate and proposes single-slot changes; a proposal with `dE <= 0`
//! is always taken, an uphill one with probability `exp(-dE / T)`. After a
//! fixed number of proposals per temperature level, `T` is multiplied by
//! the cooling factor. The walk stops once a run of consecutive levels
//! accepts nothing (the system is frozen) or after the level limit, and
//! returns the best configuration ever visited — never worse than the
//! start state.
//!
//! Runs are deterministic in the seed. Each proposal consumes draws from a
//! seeded ChaCha8 stream in a fixed order: (1) which ambiguous slot to
//! perturb, (2) which alternative candidate to propose (uniform over the
//! others), and (3) one uniform `[0, 1)` acceptance draw — consumed only
//! when the proposal is uphill.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

use crate::overlap::{configuration_energy, Configuration, EnergyParams, EnergyTracker, Score};

/// Ceiling on exhaustive enumeration when no explicit cap is given.
pub const DEFAULT_EXACT_CAP: u128 = 100_000;

#[derive(Debug, Error)]
pub enum AnnealError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("temperature must be positive and finite, got {0}")]
    InvalidTemperature(f64),
    #[error("search space holds {configurations} configurations, above the cap of {cap}")]
    SpaceTooLarge { configurations: u128, cap: u128 },
    #[error("search space size overflows the configuration counter")]
    SpaceOverflow,
}

/// How many proposals to make at each temperature level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelIterations {
    /// `k * (number of ambiguous slots)` proposals per level.
    PerAmbiguous(u32),
    /// A flat count per level, independent of the sentence.
    Fixed(u32),
}

/// Annealing schedule: starting temperature, geometric cooling, level
/// sizing, and the two stopping rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub initial_temperature: f64,
    /// Multiplied into the temperature after each level; in `(0, 1)`.
    pub cooling_factor: f64,
    pub level_iterations: LevelIterations,
    pub max_levels: u32,
    /// Stop after this many consecutive levels with zero accepted moves.
    pub frozen_levels_to_stop: u32,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            initial_temperature: 1.0,
            cooling_factor: 0.9,
            level_iterations: LevelIterations::PerAmbiguous(100),
            max_levels: 200,
            frozen_levels_to_stop: 3,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<(), AnnealError> {
        let bad = |msg: &str| Err(AnnealError::InvalidSchedule(msg.to_string()));
        if !self.initial_temperature.is_finite() || self.initial_temperature <= 0.0 {
            return bad("initial_temperature must be positive and finite");
        }
        if !self.cooling_factor.is_finite()
            || self.cooling_factor <= 0.0
            || self.cooling_factor >= 1.0
        {
            return bad("cooling_factor must lie strictly between 0 and 1");
        }
        match self.level_iterations {
            LevelIterations::PerAmbiguous(0) | LevelIterations::Fixed(0) => {
                return bad("level iterations must be positive");
            }
            _ => {}
        }
        if self.max_levels == 0 {
            return bad("max_levels must be positive");
        }
        if self.frozen_levels_to_stop == 0 {
            return bad("frozen_levels_to_stop must be positive");
        }
        Ok(())
    }
}

/// One candidate sense a slot can take: its identity in the lexicon, the
/// effective gloss used for overlap, and an optional domain code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSense {
    pub homograph: usize,
    pub sense: usize,
    /// Gloss tokens this candidate contributes to the pool. Builders
    /// remove tokens equal to the owning slot's own stem before this
    /// point, so a sense never scores overlap against its own headword.
    pub gloss: Vec<String>,
    pub domain: Option<String>,
}

/// All candidates for one token position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotCandidates {
    /// Position of the owning token in the caller's token list, for
    /// mapping results back out.
    pub token_index: usize,
    /// The stemmed key the candidates came from.
    pub lemma: String,
    pub candidates: Vec<CandidateSense>,
}

/// The full per-sentence search space. Construction interns gloss tokens
/// so the incremental tracker can index word types by small ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSpace {
    slots: Vec<SlotCandidates>,
    /// `token_ids[slot][candidate]` = interned ids of that gloss's tokens.
    token_ids: Vec<Vec<Vec<u32>>>,
    vocab_size: u32,
}

impl CandidateSpace {
    /// Build a space. Panics if any slot has an empty candidate list —
    /// builders represent unknown words by omitting the slot entirely.
    pub fn new(slots: Vec<SlotCandidates>) -> Self {
        let mut vocab: HashMap<&str, u32> = HashMap::new();
        let mut token_ids = Vec::with_capacity(slots.len());
        for (i, slot) in slots.iter().enumerate() {
            assert!(
                !slot.candidates.is_empty(),
                "slot {i} ('{}') has no candidates",
                slot.lemma
            );
            let mut per_candidate = Vec::with_capacity(slot.candidates.len());
            for cand in &slot.candidates {
                let ids = cand
                    .gloss
                    .iter()
                    .map(|w| {
                        let next = vocab.len() as u32;
                        *vocab.entry(w.as_str()).or_insert(next)
                    })
                    .collect();
                per_candidate.push(ids);
            }
            token_ids.push(per_candidate);
        }
        let vocab_size = vocab.len() as u32;
        CandidateSpace {
            slots,
            token_ids,
            vocab_size,
        }
    }

    pub fn slots(&self) -> &[SlotCandidates] {
        &self.slots
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn candidate(&self, slot: usize, candidate: usize) -> &CandidateSense {
        &self.slots[slot].candidates[candidate]
    }

    /// Indices of slots with more than one candidate.
    pub fn ambiguous_slots(&self) -> Vec<usize> {
        (0..self.slots.len())
            .filter(|&i| self.slots[i].candidates.len() > 1)
            .collect()
    }

    pub fn ambiguous_slot_count(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| s.candidates.len() > 1)
            .count()
    }

    /// Number of distinct configurations; `None` if it overflows `u128`.
    pub fn configuration_count(&self) -> Option<u128> {
        self.slots
            .iter()
            .try_fold(1u128, |acc, s| acc.checked_mul(s.candidates.len() as u128))
    }

    pub(crate) fn gloss_ids(&self, slot: usize, candidate: usize) -> &[u32] {
        &self.token_ids[slot][candidate]
    }

    pub(crate) fn vocab_size(&self) -> u32 {
        self.vocab_size
    }
}

/// Outcome of one annealing run.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealResult {
    /// Best configuration ever visited.
    pub config: Configuration,
    /// Its energy; never above `initial_energy`.
    pub energy: Score,
    /// Energy of the all-first-candidates start state.
    pub initial_energy: Score,
    pub levels_run: u32,
    pub moves_attempted: u64,
    pub moves_accepted: u64,
    /// True when the freeze rule stopped the walk before the level limit.
    pub frozen: bool,
}

/// Metropolis acceptance probability for an energy change at a
/// temperature: 1 for downhill or flat moves, `exp(-delta / T)` uphill.
pub fn acceptance_probability(delta: Score, temperature: f64) -> Result<f64, AnnealError> {
    if !temperature.is_finite() || temperature <= 0.0 {
        return Err(AnnealError::InvalidTemperature(temperature));
    }
    if delta <= Score::from_integer(0) {
        return Ok(1.0);
    }
    let delta_f = ratio_to_f64(delta);
    Ok((-delta_f / temperature).exp())
}

fn ratio_to_f64(r: Score) -> f64 {
    // Ratio::to_f64 exists behind num-traits; do the division directly to
    // avoid surprises on extreme components.
    (*r.numer() as f64) / (*r.denom() as f64)
}

/// Run simulated annealing over the space and return the best
/// configuration visited. Deterministic in `seed`.
pub fn anneal(
    space: &CandidateSpace,
    params: &EnergyParams,
    schedule: &Schedule,
    seed: u64,
) -> Result<AnnealResult, AnnealError> {
    schedule.validate()?;
    let start = Configuration::all_first(space.slot_count());
    let mut tracker = EnergyTracker::new(space, *params, start.clone());
    let initial_energy = tracker.energy();

    let ambiguous = space.ambiguous_slots();
    if ambiguous.is_empty() {
        return Ok(AnnealResult {
            config: start,
            energy: initial_energy,
            initial_energy,
            levels_run: 0,
            moves_attempted: 0,
            moves_accepted: 0,
            frozen: false,
        });
    }
    let per_level: u64 = match schedule.level_iterations {
        LevelIterations::PerAmbiguous(k) => k as u64 * ambiguous.len() as u64,
        LevelIterations::Fixed(n) => n as u64,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut temperature = schedule.initial_temperature;
    let mut best_config = start;
    let mut best_energy = initial_energy;
    let mut attempted = 0u64;
    let mut accepted = 0u64;
    let mut frozen_streak = 0u32;
    let mut levels = 0u32;
    let mut frozen = false;

    while levels < schedule.max_levels {
        let mut accepted_this_level = 0u64;
        for _ in 0..per_level {
            attempted += 1;
            let slot = ambiguous[rng.gen_range(0..ambiguous.len())];
            let n_cands = space.slots[slot].candidates.len();
            let current = tracker.config().choice[slot];
            let pick = rng.gen_range(0..n_cands - 1);
            let proposal = if pick >= current { pick + 1 } else { pick };

            let delta = tracker.switch(slot, proposal);
            let accept = if delta <= Score::from_integer(0) {
                true
            } else {
                let p = acceptance_probability(delta, temperature)?;
                rng.gen::<f64>() < p
            };
            if accept {
                accepted += 1;
                accepted_this_level += 1;
                if tracker.energy() < best_energy {
                    best_energy = tracker.energy();
                    best_config = tracker.config().clone();
                }
            } else {
                tracker.switch(slot, current);
            }
        }
        levels += 1;
        if accepted_this_level == 0 {
            frozen_streak += 1;
            if frozen_streak >= schedule.frozen_levels_to_stop {
                frozen = true;
                break;
            }
        } else {
            frozen_streak = 0;
        }
        // Floor the temperature at the smallest positive double so a long
        // cooling run cannot underflow into a division by zero.
        temperature = (temperature * schedule.cooling_factor).max(f64::MIN_POSITIVE);
    }

    Ok(AnnealResult {
        config: best_config,
        energy: best_energy,
        initial_energy,
        levels_run: levels,
        moves_attempted: attempted,
        moves_accepted: accepted,
        frozen,
    })
}

/// Exhaustively score every configuration and return the minimum.
///
/// Enumerates in lexicographic order keeping strict improvements only, so
/// ties resolve to the lexicographically smallest configuration. Energies
/// come from [`configuration_energy`] directly — not from the incremental
/// tracker — so this doubles as an independent check on it. `cap` (default
/// [`DEFAULT_EXACT_CAP`]) bounds the enumeration.
pub fn brute_force_optimum(
    space: &CandidateSpace,
    params: &EnergyParams,
    cap: Option<u128>,
) -> Result<(Configuration, Score), AnnealError> {
    let cap = cap.unwrap_or(DEFAULT_EXACT_CAP);
    let total = space
        .configuration_count()
        .ok_or(AnnealError::SpaceOverflow)?;
    if total > cap {
        return Err(AnnealError::SpaceTooLarge {
            configurations: total,
            cap,
        });
    }

    let n = space.slot_count();
    let mut config = Configuration::all_first(n);
    let mut best: Option<(Configuration, Score)> = None;
    loop {
        let e = configuration_energy(space, &config, params);
        if best.as_ref().is_none_or(|(_, be)| e < *be) {
            best = Some((config.clone(), e));
        }
        // Mixed-radix increment, last slot least significant: visits
        // configurations in ascending lexicographic order.
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(best.expect("at least one configuration exists"));
            }
            i -= 1;
            config.choice[i] += 1;
            if config.choice[i] < space.slots[i].candidates.len() {
                break;
            }
            config.choice[i] = 0;
        }
    }
}
