//! Achievable-rate region over monotone level chains, and its maximization.
//!
//! A rewriting scheme for a `K`-level cell corresponds to a chain
//! `U(0) = K-1, U(1), ..., U(T)` of cell levels that never increase. Write
//! `t` can carry up to `H(U(t) | U(t-1))` bits per cell, so the total
//! information per erase cycle is bounded by the sum of those conditional
//! entropies. [`max_sum_rate`] searches for the chain maximizing that sum;
//! [`brute_force_sum_rate`] recovers the same maximum on small instances by
//! exhaustive grid enumeration and serves as an independent oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{Error, Result};

/// Acceptable deviation of a conditional row from summing to exactly 1.
const ROW_SUM_TOL: f64 = 1e-9;

/// Stop a coordinate-ascent sweep once the objective gain drops below this.
const SWEEP_TOL: f64 = 1e-12;

/// Stop a single row solve once the objective gain drops below this.
const ROW_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 200;
const MAX_ROW_ITERS: usize = 500;

/// Marginal mass below which a row cannot influence the objective.
const NEGLIGIBLE_MASS: f64 = 1e-15;

/// A monotone level chain: `T` lower-triangular row-stochastic conditional
/// matrices over `K` levels. Entry `(i, j)` of the `t`-th matrix is
/// `P(U(t+1) = j | U(t) = i)`; mass above the diagonal is forbidden because
/// programming can only lower a level. The chain starts deterministically at
/// `U(0) = K-1`, so only row `K-1` of the first matrix is ever consulted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WomChain {
    levels: usize,
    conditionals: Vec<Vec<Vec<f64>>>,
}

impl WomChain {
    /// Validates shape, row sums, and lower-triangularity.
    pub fn new(levels: usize, conditionals: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidLevels(levels as u64));
        }
        if conditionals.is_empty() {
            return Err(Error::InvalidChain(
                "chain must have at least one write".into(),
            ));
        }
        for (t, matrix) in conditionals.iter().enumerate() {
            if matrix.len() != levels {
                return Err(Error::InvalidChain(format!(
                    "matrix {t} has {} rows, expected {levels}",
                    matrix.len()
                )));
            }
            for (i, row) in matrix.iter().enumerate() {
                if row.len() != levels {
                    return Err(Error::InvalidChain(format!(
                        "matrix {t} row {i} has {} entries, expected {levels}",
                        row.len()
                    )));
                }
                let mut sum = 0.0;
                for (j, &p) in row.iter().enumerate() {
                    if !p.is_finite() || p < 0.0 {
                        return Err(Error::InvalidChain(format!(
                            "matrix {t} row {i} column {j} holds invalid probability {p}"
                        )));
                    }
                    if j > i && p != 0.0 {
                        return Err(Error::InvalidChain(format!(
                            "matrix {t} row {i} has mass above the diagonal at column {j}"
                        )));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::InvalidChain(format!(
                        "matrix {t} row {i} sums to {sum}, expected 1"
                    )));
                }
            }
        }
        Ok(Self {
            levels,
            conditionals,
        })
    }

    /// The chain that keeps every level fixed at each write.
    pub fn identity(levels: usize, writes: usize) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidLevels(levels as u64));
        }
        if writes == 0 {
            return Err(Error::InvalidChain(
                "chain must have at least one write".into(),
            ));
        }
        let matrix: Vec<Vec<f64>> = (0..levels).map(|i| point_mass(levels, i)).collect();
        Ok(Self {
            levels,
            conditionals: vec![matrix; writes],
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Number of writes `T`.
    pub fn writes(&self) -> usize {
        self.conditionals.len()
    }

    pub fn conditionals(&self) -> &[Vec<Vec<f64>>] {
        &self.conditionals
    }
}

/// Per-write entropy budgets of a chain, in bits per cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTuple {
    /// `rates[t]` is `H(U(t+1) | U(t))` under the chain's own marginals.
    pub rates: Vec<f64>,
    /// Sum of the per-write rates.
    pub sum_rate: f64,
}

/// Shannon entropy of a probability row in bits, with `0 log 0 = 0`.
fn entropy_bits(row: &[f64]) -> f64 {
    row.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

fn point_mass(levels: usize, at: usize) -> Vec<f64> {
    let mut row = vec![0.0; levels];
    row[at] = 1.0;
    row
}

fn propagate(marginal: &[f64], matrix: &[Vec<f64>]) -> Vec<f64> {
    let levels = marginal.len();
    let mut next = vec![0.0; levels];
    for (i, &m) in marginal.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        for (j, &p) in matrix[i].iter().enumerate() {
            next[j] += m * p;
        }
    }
    next
}

/// Evaluates the per-write conditional entropies of the chain.
///
/// The first rate is the entropy of row `K-1` of the first matrix (the chain
/// starts at `K-1` deterministically); subsequent rates weight each row's
/// entropy by the propagated marginal of the conditioning level.
pub fn chain_rates(chain: &WomChain) -> RateTuple {
    let mut marginal = point_mass(chain.levels, chain.levels - 1);
    let mut rates = Vec::with_capacity(chain.writes());
    for matrix in &chain.conditionals {
        let rate = marginal
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(i, &m)| m * entropy_bits(&matrix[i]))
            .sum();
        rates.push(rate);
        marginal = propagate(&marginal, matrix);
    }
    let sum_rate = rates.iter().sum();
    RateTuple { rates, sum_rate }
}

/// Marginal distribution of `U(t)`; `t = 0` is the point mass at `K-1`.
pub fn propagate_marginal(chain: &WomChain, t: usize) -> Result<Vec<f64>> {
    if t > chain.writes() {
        return Err(Error::WriteIndexOutOfRange {
            index: t,
            writes: chain.writes(),
        });
    }
    let mut marginal = point_mass(chain.levels, chain.levels - 1);
    for matrix in chain.conditionals.iter().take(t) {
        marginal = propagate(&marginal, matrix);
    }
    Ok(marginal)
}

/// Tests whether each requested rate fits inside the chain's entropy budget,
/// allowing `slack` bits of floating-point noise per write.
pub fn check_achievable(rates: &[f64], chain: &WomChain, slack: f64) -> Result<bool> {
    if rates.len() != chain.writes() {
        return Err(Error::RateLengthMismatch {
            got: rates.len(),
            expected: chain.writes(),
        });
    }
    let budget = chain_rates(chain);
    Ok(rates
        .iter()
        .zip(&budget.rates)
        .all(|(&r, &b)| r <= b + slack))
}

// ---------------------------------------------------------------------------
// Brute-force grid oracle
// ---------------------------------------------------------------------------

/// Visits every composition of `total` into `parts` nonnegative integers.
fn for_each_composition<F: FnMut(&[usize])>(total: usize, parts: usize, f: &mut F) {
    fn recurse<F: FnMut(&[usize])>(buf: &mut [usize], idx: usize, remaining: usize, f: &mut F) {
        if idx + 1 == buf.len() {
            buf[idx] = remaining;
            f(buf);
            return;
        }
        for c in 0..=remaining {
            buf[idx] = c;
            recurse(buf, idx + 1, remaining - c, f);
        }
    }
    let mut buf = vec![0usize; parts];
    recurse(&mut buf, 0, total, f);
}

/// Exhaustive grid search for the maximum sum rate on a small instance.
///
/// Every free conditional row ranges over the simplex grid with resolution
/// `1/grid_steps`. The product space decomposes by backward induction --
/// the best grid row at `(write t, level i)` maximizes its own entropy plus
/// the expected value-to-go, independent of how earlier writes weight it --
/// so the returned value equals the maximum over the full joint grid while
/// enumerating one row at a time. The result improves monotonically whenever
/// `grid_steps` doubles (the coarse grid is a subset of the fine one).
///
/// Instances beyond `K in {2,3}`, `T in {1,2,3}`, `grid_steps <= 200` are
/// refused.
pub fn brute_force_sum_rate(levels: u32, writes: u32, grid_steps: u32) -> Result<RateTuple> {
    if !(2..=3).contains(&levels) || !(1..=3).contains(&writes) || !(1..=200).contains(&grid_steps)
    {
        return Err(Error::OracleTooLarge {
            levels: levels as u64,
            writes: writes as u64,
            grid_steps: grid_steps as u64,
        });
    }
    let k = levels as usize;
    let t_count = writes as usize;
    let g = grid_steps as usize;

    let mut best_rows: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); k]; t_count];
    let mut value_next = vec![0.0; k];
    for t in (0..t_count).rev() {
        let mut value_cur = vec![0.0; k];
        for i in 0..k {
            if t == 0 && i != k - 1 {
                continue; // unreachable: the chain starts at K-1
            }
            if i == 0 {
                // level 0 can only stay put
                value_cur[0] = value_next[0];
                best_rows[t][0] = point_mass(k, 0);
                continue;
            }
            let mut best_val = f64::NEG_INFINITY;
            let mut best_row: Vec<f64> = Vec::new();
            for_each_composition(g, i + 1, &mut |parts| {
                let row: Vec<f64> = parts.iter().map(|&c| c as f64 / g as f64).collect();
                let val = entropy_bits(&row)
                    + row
                        .iter()
                        .zip(&value_next)
                        .map(|(&p, &v)| p * v)
                        .sum::<f64>();
                if val > best_val {
                    best_val = val;
                    best_row = row;
                }
            });
            best_row.resize(k, 0.0);
            value_cur[i] = best_val;
            best_rows[t][i] = best_row;
        }
        value_next = value_cur;
    }

    let matrices: Vec<Vec<Vec<f64>>> = best_rows
        .into_iter()
        .enumerate()
        .map(|(t, rows)| {
            rows.into_iter()
                .enumerate()
                .map(|(i, row)| {
                    if row.is_empty() {
                        // unreachable first-matrix rows: keep the level fixed
                        debug_assert_eq!(t, 0);
                        point_mass(k, i)
                    } else {
                        row
                    }
                })
                .collect()
        })
        .collect();
    let chain = WomChain::new(k, matrices)?;
    Ok(chain_rates(&chain))
}

// ---------------------------------------------------------------------------
// Coordinate-ascent maximizer
// ---------------------------------------------------------------------------

/// Euclidean projection onto the probability simplex (sort-and-threshold).
fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    let mut support = 0;
    for (idx, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (idx + 1) as f64;
        if u - candidate > 0.0 {
            threshold = candidate;
            support = idx + 1;
        }
    }
    if support == 0 {
        // all mass collapses onto the largest coordinate
        let argmax = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let mut out = vec![0.0; v.len()];
        out[argmax] = 1.0;
        return out;
    }
    v.iter().map(|&x| (x - threshold).max(0.0)).collect()
}

/// Maximizes `H(r) + sum_j r_j * value_next[j]` over distributions `r` on
/// the first `support` coordinates, by projected gradient ascent with
/// backtracking. Concave: entropy plus a linear term.
fn maximize_row(support: usize, value_next: &[f64], start: &[f64]) -> Vec<f64> {
    let objective = |r: &[f64]| {
        entropy_bits(r)
            + r.iter()
                .zip(value_next)
                .map(|(&p, &v)| p * v)
                .sum::<f64>()
    };

    // start strictly inside the simplex so the entropy gradient stays finite
    let mut row: Vec<f64> = start[..support].iter().map(|&p| p.max(1e-9)).collect();
    let total: f64 = row.iter().sum();
    for p in row.iter_mut() {
        *p /= total;
    }
    let mut current = objective(&row);
    let mut step = 1.0;
    for _ in 0..MAX_ROW_ITERS {
        let gradient: Vec<f64> = row
            .iter()
            .zip(value_next)
            .map(|(&p, &v)| -p.max(1e-300).log2() - std::f64::consts::LOG2_E + v)
            .collect();
        let mut improved = false;
        let mut gain = 0.0;
        while step >= 1e-12 {
            let trial: Vec<f64> = row
                .iter()
                .zip(&gradient)
                .map(|(&p, &g)| p + step * g)
                .collect();
            let projected = project_to_simplex(&trial);
            let candidate = objective(&projected);
            if candidate > current {
                gain = candidate - current;
                row = projected;
                current = candidate;
                step *= 2.0;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved || gain < ROW_TOL {
            break;
        }
    }
    row
}

/// Value-to-go at write index `from`: `v[i]` is the best total rate of
/// writes `from..T` when `U(from) = i`, under the current matrices.
fn value_to_go(matrices: &[Vec<Vec<f64>>], from: usize, levels: usize) -> Vec<f64> {
    let mut value = vec![0.0; levels];
    for matrix in matrices.iter().skip(from).rev() {
        let mut next = vec![0.0; levels];
        for i in 0..levels {
            next[i] = entropy_bits(&matrix[i])
                + matrix[i]
                    .iter()
                    .zip(&value)
                    .map(|(&p, &v)| p * v)
                    .sum::<f64>();
        }
        value = next;
    }
    value
}

fn marginal_before(matrices: &[Vec<Vec<f64>>], t: usize, levels: usize) -> Vec<f64> {
    let mut marginal = point_mass(levels, levels - 1);
    for matrix in matrices.iter().take(t) {
        marginal = propagate(&marginal, matrix);
    }
    marginal
}

fn objective(matrices: &[Vec<Vec<f64>>], levels: usize) -> f64 {
    let mut marginal = point_mass(levels, levels - 1);
    let mut total = 0.0;
    for matrix in matrices {
        total += marginal
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(i, &m)| m * entropy_bits(&matrix[i]))
            .sum::<f64>();
        marginal = propagate(&marginal, matrix);
    }
    total
}

/// A random chain with strictly interior reachable rows (flat Dirichlet).
fn random_chain(levels: usize, writes: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Vec<f64>>> {
    (0..writes)
        .map(|t| {
            (0..levels)
                .map(|i| {
                    if i == 0 || (t == 0 && i != levels - 1) {
                        return point_mass(levels, i);
                    }
                    let mut row = vec![0.0; levels];
                    let mut total = 0.0;
                    for slot in row.iter_mut().take(i + 1) {
                        let e = -(1.0 - rng.random::<f64>()).ln();
                        *slot = e;
                        total += e;
                    }
                    for slot in row.iter_mut().take(i + 1) {
                        *slot /= total;
                    }
                    row
                })
                .collect()
        })
        .collect()
}

/// Searches for the chain maximizing the sum of per-write entropy budgets.
///
/// Coordinate ascent over conditional rows: each row update solves a concave
/// subproblem (row entropy plus expected value-to-go) by projected gradient
/// ascent on its sub-simplex, sweeping writes from last to first until the
/// objective stalls. Later marginals depend on earlier rows, so the joint
/// problem is not concave; `restarts` seeded random initializations guard
/// against poor starts. Deterministic for a fixed `(restarts, seed)` pair:
/// restart `r` draws from stream `r` of a ChaCha8 generator seeded with
/// `seed`, so results do not depend on evaluation order.
pub fn max_sum_rate(
    levels: u32,
    writes: u32,
    restarts: u32,
    seed: u64,
) -> Result<(RateTuple, WomChain)> {
    if levels < 2 {
        return Err(Error::InvalidLevels(levels as u64));
    }
    if writes == 0 || restarts == 0 {
        return Err(Error::InvalidOptimizerParams(format!(
            "writes and restarts must be positive, got writes={writes}, restarts={restarts}"
        )));
    }
    let k = levels as usize;
    let t_count = writes as usize;

    let mut best: Option<(f64, Vec<Vec<Vec<f64>>>)> = None;
    for restart in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let mut matrices = random_chain(k, t_count, &mut rng);

        let mut previous = objective(&matrices, k);
        for _ in 0..MAX_SWEEPS {
            for t in (0..t_count).rev() {
                let value_next = value_to_go(&matrices, t + 1, k);
                let marginal = marginal_before(&matrices, t, k);
                for i in (1..k).rev() {
                    if t == 0 && i != k - 1 {
                        continue;
                    }
                    if marginal[i] <= NEGLIGIBLE_MASS {
                        continue;
                    }
                    let row = maximize_row(i + 1, &value_next, &matrices[t][i]);
                    for (j, slot) in matrices[t][i].iter_mut().enumerate() {
                        *slot = if j <= i { row[j] } else { 0.0 };
                    }
                }
            }
            let current = objective(&matrices, k);
            let gain = current - previous;
            previous = current;
            if gain < SWEEP_TOL {
                break;
            }
        }
        match &best {
            Some((value, _)) if *value >= previous => {}
            _ => best = Some((previous, matrices)),
        }
    }

    let (_, matrices) = best.expect("at least one restart ran");
    let chain = WomChain::new(k, matrices)?;
    Ok((chain_rates(&chain), chain))
}
