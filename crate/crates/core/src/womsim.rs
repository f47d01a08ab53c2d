//! Monte Carlo simulator for a multi-stage random-binning rewriting scheme.
//!
//! The scheme writes to an `N`-cell block whose cells hold levels in
//! `{0..K-1}`. It proceeds in epochs `k = K-1, K-2, ..., 1`; during epoch
//! `k` every cell sits at level `k` or `k-1`. A stage with `l` cells already
//! dropped offers `B = floor((1-eps) * (N-l))` bins; the message is a bin
//! index, and the encoder looks for a single cell whose drop moves the block
//! into the message's bin. On a miss the stage's bits are lost and one
//! random cell is dropped so the schedule still advances. When a stage's bin
//! count falls below 2 the epoch carries no more information: the remaining
//! cells are flushed down one level and the next epoch begins.
//!
//! Binning is realized with a keyed hash shared by encoder and decoder
//! instead of materialized bin tables; see [`BinAssigner`] for the exact
//! byte-level contract. The decoder recovers a message by hashing the block
//! configuration it observes with the stage that wrote it.
//!
//! [`run_block`] runs whole erase cycles over seeded independent trials and
//! reports measured payload and efficiency next to the closed-form
//! expectations ([`expected_rate_lower_bound`], [`payload_formula`],
//! [`exact_stage_error`]).

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{Error, Result};

/// Number of bins offered by a stage: `floor((1-epsilon) * (cells - dropped))`.
///
/// Returns 0 once the product drops below 1 (the epoch is over). The count
/// is not rounded to a power of two; a stage carries `log2(B)` bits.
pub fn stage_bins(cells: usize, dropped: usize, epsilon: f64) -> u64 {
    if dropped >= cells || !epsilon.is_finite() {
        return 0;
    }
    let raw = (1.0 - epsilon) * (cells - dropped) as f64;
    if raw < 1.0 {
        0
    } else {
        raw.floor() as u64
    }
}

/// Probability that a stage encode misses its bin: `(1 - 1/B)^(N-l)`,
/// the chance that none of the `N-l` candidate drops hashes to the message.
pub fn exact_stage_error(cells: usize, dropped: usize, epsilon: f64) -> Result<f64> {
    let bins = stage_bins(cells, dropped, epsilon);
    if bins == 0 {
        return Err(Error::DeadStage(0));
    }
    if bins == 1 {
        return Ok(0.0);
    }
    let candidates = (cells - dropped) as f64;
    Ok((1.0 - 1.0 / bins as f64).powf(candidates))
}

// ---------------------------------------------------------------------------
// Block and stage state
// ---------------------------------------------------------------------------

/// Levels of the `N` cells in a block. Constructed erased (all cells at
/// `K-1`); the scheme only ever lowers a level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockState {
    levels: Vec<u8>,
    num_levels: u16,
}

impl BlockState {
    /// A freshly erased block: `cells` cells all at level `num_levels - 1`.
    pub fn erased(cells: usize, num_levels: u16) -> Result<Self> {
        if cells < 2 {
            return Err(Error::InvalidConfig(format!(
                "block needs at least 2 cells, got {cells}"
            )));
        }
        if !(2..=256).contains(&num_levels) {
            return Err(Error::InvalidLevels(num_levels as u64));
        }
        Ok(Self {
            levels: vec![(num_levels - 1) as u8; cells],
            num_levels,
        })
    }

    /// Wraps an explicit level vector, validating every level is in range.
    pub fn from_levels(levels: Vec<u8>, num_levels: u16) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "block needs at least 2 cells, got {}",
                levels.len()
            )));
        }
        if !(2..=256).contains(&num_levels) {
            return Err(Error::InvalidLevels(num_levels as u64));
        }
        for (idx, &v) in levels.iter().enumerate() {
            if v as u16 >= num_levels {
                return Err(Error::InvalidConfig(format!(
                    "cell {idx} at level {v}, block has {num_levels} levels"
                )));
            }
        }
        Ok(Self { levels, num_levels })
    }

    pub fn cells(&self) -> usize {
        self.levels.len()
    }

    pub fn num_levels(&self) -> u16 {
        self.num_levels
    }

    pub fn levels(&self) -> &[u8] {
        &self.levels
    }
}

/// Position within an epoch: `l` cells already dropped to `k-1`, offering
/// `B` bins. A stage is live (can record a message) only when `B >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageState {
    epoch_level: u8,
    dropped_count: u32,
    bin_count: u64,
}

impl StageState {
    pub fn new(cells: usize, epoch_level: u8, dropped_count: u32, epsilon: f64) -> Result<Self> {
        if epoch_level == 0 {
            return Err(Error::InconsistentStage(
                "epoch level must be at least 1".into(),
            ));
        }
        if dropped_count as usize > cells {
            return Err(Error::InconsistentStage(format!(
                "dropped count {dropped_count} exceeds {cells} cells"
            )));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(Self {
            epoch_level,
            dropped_count,
            bin_count: stage_bins(cells, dropped_count as usize, epsilon),
        })
    }

    /// The epoch's upper level `k`; cells sit at `k` or `k-1`.
    pub fn epoch_level(&self) -> u8 {
        self.epoch_level
    }

    /// Cells already at `k-1` before this stage writes.
    pub fn dropped_count(&self) -> u32 {
        self.dropped_count
    }

    /// Message alphabet size of the stage.
    pub fn bin_count(&self) -> u64 {
        self.bin_count
    }

    /// Whether the stage can record information.
    pub fn is_live(&self) -> bool {
        self.bin_count >= 2
    }
}

// ---------------------------------------------------------------------------
// Shared-seed binning
// ---------------------------------------------------------------------------

/// Splitmix64 avalanche: every input bit flips each output bit with
/// probability close to 1/2.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Deterministic bin assignment shared by encoder and decoder.
///
/// The bin of a block configuration within a stage is a keyed hash of the
/// canonical serialization of (stage identifier, level vector):
///
/// 1. Serialize the stage id as `epoch_level` then `dropped_count`, each a
///    little-endian `u32`, followed by the `N` cell levels as single bytes
///    in cell order.
/// 2. Split the byte stream into 8-byte little-endian chunks, zero-padding
///    the final chunk.
/// 3. Absorb: `state = mix64(seed XOR 0x9e3779b97f4a7c15)`, then for each
///    chunk `state = mix64(state XOR chunk)`, and finally
///    `state = mix64(state XOR total_byte_length)` where `mix64` is the
///    splitmix64 avalanche above.
/// 4. The bin is `state mod B`.
///
/// Two implementations that follow this recipe agree bin-for-bin given the
/// same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BinAssigner {
    seed: u64,
}

impl BinAssigner {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Bin index of `levels` within `stage`. Fails on a dead stage (no bins).
    pub fn bin_index(&self, stage: &StageState, levels: &[u8]) -> Result<u64> {
        if stage.bin_count == 0 {
            return Err(Error::DeadStage(0));
        }
        let mut state = mix64(self.seed ^ SEED_SALT);
        let header = stage.epoch_level as u64 | ((stage.dropped_count as u64) << 32);
        state = mix64(state ^ header);
        let mut chunks = levels.chunks_exact(8);
        for chunk in &mut chunks {
            state = mix64(state ^ u64::from_le_bytes(chunk.try_into().unwrap()));
        }
        let tail = chunks.remainder();
        if !tail.is_empty() {
            let mut padded = [0u8; 8];
            padded[..tail.len()].copy_from_slice(tail);
            state = mix64(state ^ u64::from_le_bytes(padded));
        }
        state = mix64(state ^ (8 + levels.len() as u64));
        Ok(state % stage.bin_count)
    }
}

// ---------------------------------------------------------------------------
// Stage encode / decode
// ---------------------------------------------------------------------------

/// Result of one stage encode: the block after exactly one cell dropped,
/// and whether the drop landed in the message's bin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodeOutcome {
    pub state: BlockState,
    pub success: bool,
}

fn check_two_state(state: &BlockState, stage: &StageState) -> Result<Vec<usize>> {
    let k = stage.epoch_level;
    let mut at_epoch = Vec::new();
    let mut dropped = 0u32;
    for (idx, &level) in state.levels.iter().enumerate() {
        if level == k {
            at_epoch.push(idx);
        } else if level == k - 1 {
            dropped += 1;
        } else {
            return Err(Error::InconsistentStage(format!(
                "cell {idx} at level {level}, expected {} or {}",
                k,
                k - 1
            )));
        }
    }
    if dropped != stage.dropped_count {
        return Err(Error::InconsistentStage(format!(
            "{dropped} cells dropped, stage expects {}",
            stage.dropped_count
        )));
    }
    Ok(at_epoch)
}

/// Records `message` by dropping the first cell (in ascending cell order)
/// whose resulting configuration hashes into the message's bin.
///
/// If no candidate lands in the bin the stage fails: one uniformly random
/// cell still drops (drawn from `rng`, the trial's seeded stream) so the
/// schedule advances, and the stage's bits are lost.
pub fn encode_stage(
    state: &BlockState,
    stage: &StageState,
    message: u64,
    assigner: &BinAssigner,
    rng: &mut impl Rng,
) -> Result<EncodeOutcome> {
    if stage.bin_count == 0 {
        return Err(Error::DeadStage(0));
    }
    if message >= stage.bin_count {
        return Err(Error::MessageOutOfRange {
            message,
            bins: stage.bin_count,
        });
    }
    let candidates = check_two_state(state, stage)?;
    if candidates.is_empty() {
        return Err(Error::InconsistentStage(
            "no cell left at the epoch level".into(),
        ));
    }

    let next_level = stage.epoch_level - 1;
    let mut scratch = state.levels.clone();
    for &idx in &candidates {
        scratch[idx] = next_level;
        let bin = assigner.bin_index(stage, &scratch)?;
        if bin == message {
            return Ok(EncodeOutcome {
                state: BlockState {
                    levels: scratch,
                    num_levels: state.num_levels,
                },
                success: true,
            });
        }
        scratch[idx] = stage.epoch_level;
    }

    let fallback = candidates[rng.random_range(0..candidates.len())];
    scratch[fallback] = next_level;
    Ok(EncodeOutcome {
        state: BlockState {
            levels: scratch,
            num_levels: state.num_levels,
        },
        success: false,
    })
}

/// Reads the message a stage recorded: the bin index of the observed block
/// configuration under the shared assigner. The caller identifies the stage
/// that wrote (its `dropped_count` is one less than the drops now visible).
///
/// After a failed encode the stored configuration is an arbitrary bin, so
/// the decoded value for that stage is unspecified.
pub fn decode_stage(state: &BlockState, stage: &StageState, assigner: &BinAssigner) -> Result<u64> {
    if stage.bin_count == 0 {
        return Err(Error::DeadStage(0));
    }
    let k = stage.epoch_level;
    let mut dropped = 0u32;
    for (idx, &level) in state.levels.iter().enumerate() {
        if level == k - 1 {
            dropped += 1;
        } else if level != k {
            return Err(Error::InconsistentStage(format!(
                "cell {idx} at level {level}, expected {} or {}",
                k,
                k - 1
            )));
        }
    }
    if dropped != stage.dropped_count + 1 {
        return Err(Error::InconsistentStage(format!(
            "{dropped} cells dropped, expected {} after the stage wrote",
            stage.dropped_count + 1
        )));
    }
    assigner.bin_index(stage, &state.levels)
}

// ---------------------------------------------------------------------------
// Whole-block simulation
// ---------------------------------------------------------------------------

/// Parameters of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub cells: usize,
    pub levels: u16,
    pub epsilon: f64,
    pub seed: u64,
    pub trials: u64,
    pub alpha: f64,
}

impl SimConfig {
    pub fn new(
        cells: usize,
        levels: u16,
        epsilon: f64,
        seed: u64,
        trials: u64,
        alpha: f64,
    ) -> Result<Self> {
        if cells < 2 || cells > u32::MAX as usize {
            return Err(Error::InvalidConfig(format!(
                "cells must be in 2..=2^32-1, got {cells}"
            )));
        }
        if !(2..=256).contains(&levels) {
            return Err(Error::InvalidConfig(format!(
                "levels must be in 2..=256, got {levels}"
            )));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        if trials == 0 {
            return Err(Error::InvalidConfig("trials must be positive".into()));
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(Self {
            cells,
            levels,
            epsilon,
            seed,
            trials,
            alpha,
        })
    }
}

/// Aggregate statistics for one live stage position across all trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageStats {
    /// Epoch upper level `k`.
    pub epoch_level: u8,
    /// Cells already dropped when the stage starts.
    pub dropped_count: u32,
    /// Bin count of the stage.
    pub bins: u64,
    /// Bits the stage attempts: `log2(bins)`.
    pub bits: f64,
    /// One attempt per trial.
    pub attempts: u64,
    /// Encodes that missed their bin.
    pub failures: u64,
    pub empirical_failure_rate: f64,
    /// `(1 - 1/B)^(N-l)` for this stage.
    pub exact_failure_prob: f64,
}

/// Aggregated outcome of `trials` independent erase cycles.
///
/// Bit totals are per-trial means; `failures` counts misses across all
/// trials. The planned stage count is `(K-1) * N` -- every epoch spends all
/// `N` cell drops whether or not a given drop carries information -- which
/// makes `payload_planned` line up with [`payload_formula`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    /// Live stages executed per trial.
    pub stages_run: usize,
    /// `(K-1) * N` stage slots per erase cycle.
    pub stages_planned: usize,
    pub trials: u64,
    /// Bits offered by the live schedule (identical every trial).
    pub bits_attempted: f64,
    /// Mean bits recorded per trial.
    pub bits_recorded: f64,
    /// Mean bits lost to encode misses per trial.
    pub bits_lost: f64,
    /// Total encode misses across all trials.
    pub failures: u64,
    /// `bits_recorded / (N * stages_planned)`, bits per cell per write.
    pub payload: f64,
    /// `bits_attempted / (N * stages_planned)`; equals `payload_formula`.
    pub payload_planned: f64,
    /// `alpha * bits_recorded / (K * N)`, bits per level cost times alpha.
    pub efficiency: f64,
    pub per_stage: Vec<StageStats>,
}

/// The live stages of one epoch: `(dropped_count, bins)` pairs for
/// `l = 0, 1, ...` while `bins >= 2`.
fn epoch_schedule(cells: usize, epsilon: f64) -> Vec<(u32, u64)> {
    let mut schedule = Vec::new();
    for l in 0..cells {
        let bins = stage_bins(cells, l, epsilon);
        if bins < 2 {
            break;
        }
        schedule.push((l as u32, bins));
    }
    schedule
}

/// Simulates `trials` erase cycles of the scheme and aggregates the outcome.
///
/// Trial `i` draws from stream `i` of a ChaCha8 generator seeded with
/// `config.seed`; the first draw keys that trial's [`BinAssigner`] and the
/// rest drive messages and failure drops. Trials are therefore independent
/// and the report is identical for identical configs.
pub fn run_block(config: &SimConfig) -> SimReport {
    let cells = config.cells;
    let num_levels = config.levels;
    let epochs = (num_levels - 1) as usize;
    let schedule = epoch_schedule(cells, config.epsilon);

    let epoch_bits: f64 = schedule.iter().map(|&(_, b)| (b as f64).log2()).sum();
    let bits_attempted = epoch_bits * epochs as f64;

    let mut failure_counts = vec![0u64; epochs * schedule.len()];
    let mut recorded_sum = 0.0;
    let mut lost_sum = 0.0;

    for trial in 0..config.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(trial);
        let assigner = BinAssigner::new(rng.next_u64());

        let mut state = BlockState::erased(cells, num_levels).expect("config was validated");
        let mut trial_recorded = 0.0;
        let mut trial_lost = 0.0;

        for (epoch_idx, k) in (1..num_levels).rev().enumerate() {
            let k = k as u8;
            for (stage_idx, &(dropped, bins)) in schedule.iter().enumerate() {
                let stage = StageState {
                    epoch_level: k,
                    dropped_count: dropped,
                    bin_count: bins,
                };
                let message = rng.random_range(0..bins);
                let outcome = encode_stage(&state, &stage, message, &assigner, &mut rng)
                    .expect("schedule keeps state and stage consistent");
                debug_assert!(outcome
                    .state
                    .levels
                    .iter()
                    .zip(&state.levels)
                    .all(|(new, old)| new <= old));
                state = outcome.state;
                let bits = (bins as f64).log2();
                if outcome.success {
                    trial_recorded += bits;
                } else {
                    trial_lost += bits;
                    failure_counts[epoch_idx * schedule.len() + stage_idx] += 1;
                }
            }
            // The epoch is out of bins: flush the remaining cells down so the
            // next epoch starts with a uniform block.
            for level in state.levels.iter_mut() {
                if *level == k {
                    *level = k - 1;
                }
            }
        }
        debug_assert!(state.levels.iter().all(|&l| l == 0));
        recorded_sum += trial_recorded;
        lost_sum += trial_lost;
    }

    let trials_f = config.trials as f64;
    let bits_recorded = recorded_sum / trials_f;
    let bits_lost = lost_sum / trials_f;
    let failures: u64 = failure_counts.iter().sum();

    let mut per_stage = Vec::with_capacity(epochs * schedule.len());
    for (epoch_idx, k) in (1..num_levels).rev().enumerate() {
        for (stage_idx, &(dropped, bins)) in schedule.iter().enumerate() {
            let stage_failures = failure_counts[epoch_idx * schedule.len() + stage_idx];
            per_stage.push(StageStats {
                epoch_level: k as u8,
                dropped_count: dropped,
                bins,
                bits: (bins as f64).log2(),
                attempts: config.trials,
                failures: stage_failures,
                empirical_failure_rate: stage_failures as f64 / trials_f,
                exact_failure_prob: exact_stage_error(cells, dropped as usize, config.epsilon)
                    .expect("live stage"),
            });
        }
    }

    let stages_planned = epochs * cells;
    let norm = (cells * stages_planned) as f64;
    SimReport {
        stages_run: epochs * schedule.len(),
        stages_planned,
        trials: config.trials,
        bits_attempted,
        bits_recorded,
        bits_lost,
        failures,
        payload: bits_recorded / norm,
        payload_planned: bits_attempted / norm,
        efficiency: config.alpha * bits_recorded / (num_levels as f64 * cells as f64),
        per_stage,
    }
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// Lower bound on the expected bits recorded per erase cycle:
/// `(K-1) * sum over live stages of (1 - exp(-1/(1-eps))) * log2(B_l)`.
/// Stages with fewer than 2 bins carry nothing and are excluded.
pub fn expected_rate_lower_bound(cells: usize, levels: u16, epsilon: f64) -> f64 {
    if levels < 2 {
        return 0.0;
    }
    let hit = 1.0 - (-1.0 / (1.0 - epsilon)).exp();
    let per_epoch: f64 = epoch_schedule(cells, epsilon)
        .iter()
        .map(|&(_, b)| hit * (b as f64).log2())
        .sum();
    (levels - 1) as f64 * per_epoch
}

/// Payload of the scheme if every live stage succeeds:
/// `(1/N^2) * sum over live stages of log2(B_l)`, bits per cell per write.
pub fn payload_formula(cells: usize, epsilon: f64) -> f64 {
    let sum: f64 = epoch_schedule(cells, epsilon)
        .iter()
        .map(|&(_, b)| (b as f64).log2())
        .sum();
    sum / (cells * cells) as f64
}

/// Large-block efficiency lower bound at `eps = 0.5`:
/// `(alpha/2) * (1 - exp(-2)) * log2(N/2)`.
///
/// The source bound is stated with an ambiguous logarithm base; base 2 is
/// used here (the growth claim is base-independent). Strictly increasing
/// and unbounded in `N`.
pub fn efficiency_lower_bound_asymptotic(cells: usize, alpha: f64) -> f64 {
    if cells < 2 {
        return 0.0;
    }
    0.5 * alpha * (1.0 - (-2.0f64).exp()) * (cells as f64 / 2.0).log2()
}
