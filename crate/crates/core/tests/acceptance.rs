//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture`). Tolerances and runtime
//! budgets are pinned in the assertions.

use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use womkit::bound_math::{derivative_check, upper_bound_efficiency, GibbsParams};
use womkit::capacity::{brute_force_sum_rate, max_sum_rate};
use womkit::womsim::{
    decode_stage, efficiency_lower_bound_asymptotic, encode_stage, expected_rate_lower_bound,
    payload_formula, run_block, BinAssigner, BlockState, SimConfig, StageState,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn criterion<F: FnOnce() + UnwindSafe>(number: u32, name: &str, body: F) {
    let outcome = catch_unwind(body);
    match &outcome {
        Ok(()) => println!("acceptance {number:02} ({name}): PASS"),
        Err(_) => println!("acceptance {number:02} ({name}): FAIL"),
    }
    if let Err(payload) = outcome {
        resume_unwind(payload);
    }
}

fn within_budget(start: Instant, budget: Duration, name: &str) {
    let elapsed = start.elapsed();
    assert!(
        elapsed < budget,
        "{name} took {elapsed:?}, budget {budget:?}"
    );
}

#[test]
fn acceptance_01_derivative_lemma() {
    criterion(1, "rate/cost slope equals beta", || {
        let start = Instant::now();
        for &levels in &[2u32, 4, 8, 16] {
            for &beta in &[0.01f64, 0.1, 0.3, 1.0, 2.0, 5.0, 10.0] {
                let (h, tol) = if beta >= 5.0 {
                    (1e-6, 1e-4)
                } else {
                    (1e-5f64.min(beta / 2.0), 1e-6)
                };
                let (slope, _) = derivative_check(beta, levels, h).unwrap();
                assert!(
                    (slope - beta).abs() < tol,
                    "beta={beta} K={levels}: slope {slope}"
                );
            }
        }
        within_budget(start, Duration::from_secs(1), "derivative lemma");
    });
}

#[test]
fn acceptance_02_monotonicity_lemmas() {
    criterion(2, "cost decreasing, f increasing", || {
        let start = Instant::now();
        for &levels in &[2u32, 4, 8, 16] {
            let mut violations = 0usize;
            let mut prev_cost = f64::INFINITY;
            let mut prev_eff = f64::NEG_INFINITY;
            for i in 0..1000 {
                let beta = i as f64 / 999.0 * 50.0;
                let params = GibbsParams::new(beta, levels).unwrap();
                let cost = params.cost();
                let eff = params.stage_efficiency_nats();
                if cost >= prev_cost || eff <= prev_eff {
                    violations += 1;
                }
                prev_cost = cost;
                prev_eff = eff;
            }
            assert_eq!(violations, 0, "K={levels}");
        }
        within_budget(start, Duration::from_secs(1), "monotonicity lemmas");
    });
}

#[test]
fn acceptance_03_upper_bound_endpoint_and_tradeoff_direction() {
    criterion(3, "upper bound endpoint 6/7 and decreasing curve", || {
        let endpoint = upper_bound_efficiency(3.0, 8, 1.0).unwrap();
        assert!((endpoint.efficiency_upper - 6.0 / 7.0).abs() < 1e-9);

        let mut prev = f64::INFINITY;
        for i in 1..=300 {
            let payload = i as f64 / 300.0 * 3.0;
            let point = upper_bound_efficiency(payload, 8, 1.0).unwrap();
            assert!(
                point.efficiency_upper < prev,
                "not strictly decreasing at payload {payload}"
            );
            prev = point.efficiency_upper;
        }
    });
}

#[test]
fn acceptance_04_capacity_oracle_equivalence() {
    criterion(4, "search matches oracle and sequence counts", || {
        let start = Instant::now();
        // (levels, writes, log2 of the count of non-increasing sequences,
        // counted by direct enumeration: 2, 3, 4, 6)
        let cases = [
            (2u32, 1u32, 2u64),
            (2, 2, 3),
            (2, 3, 4),
            (3, 2, 6),
        ];
        for &(levels, writes, count) in &cases {
            let (rates, _) = max_sum_rate(levels, writes, 16, 0xACCE5).unwrap();
            let oracle = brute_force_sum_rate(levels, writes, 200).unwrap();
            assert!(
                (rates.sum_rate - oracle.sum_rate).abs() < 1e-3,
                "K={levels} T={writes}: search {} vs oracle {}",
                rates.sum_rate,
                oracle.sum_rate
            );
            let ceiling = (count as f64).log2();
            assert!(
                (rates.sum_rate - ceiling).abs() < 2e-3,
                "K={levels} T={writes}: search {} vs log2({count})",
                rates.sum_rate
            );
            assert!(
                (oracle.sum_rate - ceiling).abs() < 2e-3,
                "K={levels} T={writes}: oracle {} vs log2({count})",
                oracle.sum_rate
            );
        }
        within_budget(start, Duration::from_secs(60), "capacity oracle");
    });
}

#[test]
fn acceptance_05_scheme_error_probability() {
    criterion(5, "stage error matches (1-1/5)^10 and obeys exp bound", || {
        let start = Instant::now();
        let trials = 10_000u64;
        let config = SimConfig::new(10, 2, 0.5, 0x5EED_0005, trials, 1.0).unwrap();
        let report = run_block(&config);

        let first = &report.per_stage[0];
        assert_eq!(first.dropped_count, 0);
        let expected = 0.1073741824f64; // (1 - 1/5)^10
        let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
        assert!(
            (first.empirical_failure_rate - expected).abs() <= 3.0 * sigma,
            "empirical {} vs exact {expected} (3 sigma = {})",
            first.empirical_failure_rate,
            3.0 * sigma
        );

        let cap = (-2.0f64).exp();
        for stage in &report.per_stage {
            assert!(
                stage.exact_failure_prob <= cap + 1e-12,
                "stage l={} exceeds exp(-2)",
                stage.dropped_count
            );
            // every live stage tracks its own exact error
            let p = stage.exact_failure_prob;
            let stage_sigma = (p * (1.0 - p) / trials as f64).sqrt();
            assert!(
                (stage.empirical_failure_rate - p).abs() <= 3.0 * stage_sigma,
                "stage l={}: empirical {} vs exact {p}",
                stage.dropped_count,
                stage.empirical_failure_rate
            );
        }
        within_budget(start, Duration::from_secs(30), "scheme error probability");
    });
}

#[test]
fn acceptance_06_roundtrip_exhaustive() {
    criterion(6, "exhaustive encode/decode round trip", || {
        let start = Instant::now();
        let mut successes = 0u64;
        let mut mismatches = 0u64;
        for cells in 2usize..=6 {
            for num_levels in 2u16..=3 {
                for assigner_seed in 0..32u64 {
                    let assigner = BinAssigner::new(assigner_seed);
                    let mut rng = ChaCha8Rng::seed_from_u64(assigner_seed ^ 0xD15C);
                    for epoch in (1..num_levels as u8).rev() {
                        // all placements of `dropped` cells at epoch-1
                        for mask in 0u32..(1 << cells) {
                            let dropped = mask.count_ones();
                            let stage = StageState::new(
                                cells,
                                epoch,
                                dropped,
                                0.5,
                            )
                            .unwrap();
                            if !stage.is_live() {
                                continue;
                            }
                            let levels: Vec<u8> = (0..cells)
                                .map(|i| {
                                    if mask & (1 << i) != 0 {
                                        epoch - 1
                                    } else {
                                        epoch
                                    }
                                })
                                .collect();
                            let state = BlockState::from_levels(levels, num_levels).unwrap();
                            for message in 0..stage.bin_count() {
                                let outcome =
                                    encode_stage(&state, &stage, message, &assigner, &mut rng)
                                        .unwrap();
                                if outcome.success {
                                    successes += 1;
                                    let decoded =
                                        decode_stage(&outcome.state, &stage, &assigner).unwrap();
                                    if decoded != message {
                                        mismatches += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        assert!(successes > 0);
        assert_eq!(mismatches, 0, "{mismatches} of {successes} round trips failed");
        within_budget(start, Duration::from_secs(60), "round trip");
    });
}

#[test]
fn acceptance_07_closed_form_consistency() {
    criterion(7, "simulation consistent with closed forms", || {
        let start = Instant::now();
        let trials = 10_000u64;
        let config = SimConfig::new(64, 3, 0.5, 0x5EED_0007, trials, 1.0).unwrap();
        let report = run_block(&config);

        // analytic per-trial standard deviation from the exact stage errors
        let variance: f64 = report
            .per_stage
            .iter()
            .map(|s| s.exact_failure_prob * (1.0 - s.exact_failure_prob) * s.bits * s.bits)
            .sum();
        let sigma_mean = (variance / trials as f64).sqrt();

        let bound = expected_rate_lower_bound(64, 3, 0.5);
        assert!(
            report.bits_recorded >= bound - 3.0 * sigma_mean,
            "mean bits {} below bound {bound} - 3 sigma ({sigma_mean})",
            report.bits_recorded
        );

        // the planned payload is the formula exactly
        let formula = payload_formula(64, 0.5);
        assert!(
            (report.payload_planned - formula).abs() < 1e-9,
            "planned payload {} vs formula {formula}",
            report.payload_planned
        );
        // and the measured payload sits below it by roughly the failure mass
        assert!(report.payload <= report.payload_planned);
        within_budget(start, Duration::from_secs(120), "closed-form consistency");
    });
}

#[test]
fn acceptance_08_unbounded_efficiency() {
    criterion(8, "efficiency grows without bound in block size", || {
        // closed form: each doubling adds the same positive increment
        let mut previous = efficiency_lower_bound_asymptotic(1 << 4, 1.0);
        let step = 0.5 * (1.0 - (-2.0f64).exp());
        for exp in 5..=16 {
            let value = efficiency_lower_bound_asymptotic(1usize << exp, 1.0);
            assert!(value > previous, "not increasing at N=2^{exp}");
            assert!(
                ((value - previous) - step).abs() < 1e-12,
                "doubling increment drifted at N=2^{exp}"
            );
            previous = value;
        }

        // measured efficiency increases across N in {16, 64, 256} by more
        // than 3 sigma of the Monte Carlo noise
        let trials = 400u64;
        let mut measured: Vec<(f64, f64)> = Vec::new();
        for &cells in &[16usize, 64, 256] {
            let config = SimConfig::new(cells, 2, 0.5, 0x5EED_0008, trials, 1.0).unwrap();
            let report = run_block(&config);
            let variance: f64 = report
                .per_stage
                .iter()
                .map(|s| s.exact_failure_prob * (1.0 - s.exact_failure_prob) * s.bits * s.bits)
                .sum();
            let sigma_eff = (variance / trials as f64).sqrt() / (2.0 * cells as f64);
            measured.push((report.efficiency, sigma_eff));
        }
        for pair in measured.windows(2) {
            let (lo, lo_sigma) = pair[0];
            let (hi, hi_sigma) = pair[1];
            let sigma = (lo_sigma * lo_sigma + hi_sigma * hi_sigma).sqrt();
            assert!(
                hi > lo + 3.0 * sigma,
                "efficiency not increasing: {lo} -> {hi} (3 sigma = {})",
                3.0 * sigma
            );
        }
    });
}

#[test]
fn acceptance_09_tradeoff_curve_shape() {
    criterion(9, "tradeoff table has the right shape", || {
        let out = Command::new(env!("CARGO_BIN_EXE_womkit"))
            .args(["tradeoff", "--levels", "8", "--alpha", "1.0", "--grid", "32"])
            .output()
            .expect("binary runs");
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();

        let upper: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r[3] == "upper")
            .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
            .collect();
        assert!(!upper.is_empty());
        for pair in upper.windows(2) {
            assert!(pair[0].0 < pair[1].0);
            assert!(pair[0].1 > pair[1].1, "upper curve not decreasing");
        }

        // lower-curve payloads sit strictly below the upper curve's domain
        // maximum, and lower efficiency increases with block size
        let max_payload = 3.0;
        let lower: Vec<(u64, f64, f64)> = rows
            .iter()
            .filter(|r| r[3] == "lower")
            .map(|r| {
                (
                    r[6].parse().unwrap(),
                    r[0].parse().unwrap(),
                    r[2].parse().unwrap(),
                )
            })
            .collect();
        assert!(!lower.is_empty());
        for &(cells, payload, _) in &lower {
            assert!(
                payload < max_payload,
                "lower point at N={cells} has payload {payload} >= {max_payload}"
            );
        }
        let mut by_cells = lower.clone();
        by_cells.sort_by_key(|&(cells, _, _)| cells);
        for pair in by_cells.windows(2) {
            assert!(
                pair[1].2 > pair[0].2,
                "lower efficiency not increasing with N: {pair:?}"
            );
        }
    });
}

#[test]
fn acceptance_10_cli_determinism() {
    criterion(10, "every command is byte-identical across runs", || {
        let commands: Vec<Vec<&str>> = vec![
            vec!["bounds", "--levels", "8", "--alpha", "1.0", "--payload", "3.0"],
            vec!["bounds", "--levels", "8", "--grid", "16", "--format", "csv"],
            vec![
                "capacity", "--levels", "2", "--writes", "2", "--restarts", "8", "--seed", "42",
                "--with-oracle", "--grid-steps", "100",
            ],
            vec![
                "simulate", "--cells", "10", "--levels", "2", "--epsilon", "0.5", "--trials",
                "200", "--seed", "7",
            ],
            vec![
                "simulate", "--cells", "10", "--levels", "2", "--trials", "200", "--seed", "7",
                "--format", "csv",
            ],
            vec!["tradeoff", "--levels", "8", "--alpha", "1.0", "--grid", "16"],
        ];
        for args in &commands {
            let first = Command::new(env!("CARGO_BIN_EXE_womkit"))
                .args(args)
                .output()
                .expect("binary runs");
            let second = Command::new(env!("CARGO_BIN_EXE_womkit"))
                .args(args)
                .output()
                .expect("binary runs");
            assert!(first.status.success(), "womkit {args:?} failed");
            assert_eq!(
                first.stdout, second.stdout,
                "womkit {args:?} output differs between runs"
            );
        }
    });
}
