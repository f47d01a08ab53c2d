//! Command-line front end: bound evaluation, capacity search, scheme
//! simulation, and tradeoff-curve emission as JSON or CSV.
//!
//! Every command is deterministic given its full flag set (seeds included),
//! and the JSON field names and CSV column orders below are fixed. Exit
//! codes: 0 on success, 2 for usage errors, 3 for infeasible-domain errors.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::{bound_math, capacity, womsim, Error, Result};

/// Unit tag carried by every emitted efficiency value.
pub const EFFICIENCY_UNITS: &str = "bits_per_level_times_alpha";

/// The large-block efficiency bound is stated with an ambiguous log base.
pub const LOG_BASE_NOTE: &str = "asymptotic lower bound uses log base 2";

#[derive(Debug, Parser)]
#[command(
    name = "womkit",
    version,
    about = "Payload/efficiency bounds, capacity search, and rewriting simulation for multilevel write-once memories"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the efficiency upper bound at one or more payloads.
    Bounds(BoundsArgs),
    /// Maximize the total achievable rate over monotone level chains.
    Capacity(CapacityArgs),
    /// Simulate the multi-stage random-binning rewriting scheme.
    Simulate(SimulateArgs),
    /// Emit the payload vs. efficiency tradeoff curves.
    Tradeoff(TradeoffArgs),
}

impl Command {
    pub fn out_path(&self) -> Option<&PathBuf> {
        match self {
            Command::Bounds(a) => a.out.as_ref(),
            Command::Capacity(a) => a.out.as_ref(),
            Command::Simulate(a) => a.out.as_ref(),
            Command::Tradeoff(a) => a.out.as_ref(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn parse_epsilon(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie strictly between 0 and 1, got {v}"))
    }
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive and finite, got {v}"))
    }
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Number of cell levels K.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub levels: u32,

    /// Cost constant of the memory type.
    #[arg(long, default_value = "1.0", value_parser = parse_alpha)]
    pub alpha: f64,

    /// Payload(s) in bits per cell per write (comma separated).
    #[arg(
        long,
        value_delimiter = ',',
        conflicts_with = "grid",
        required_unless_present = "grid"
    )]
    pub payload: Vec<f64>,

    /// Evaluate this many evenly spaced payloads in (0, log2 K].
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub grid: Option<u32>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the output here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    /// Number of cell levels K.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub levels: u32,

    /// Number of writes T between erases.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub writes: u32,

    /// Random restarts for the coordinate-ascent search.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..))]
    pub restarts: u32,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Also run the brute-force grid oracle and report the gap.
    #[arg(long)]
    pub with_oracle: bool,

    /// Grid resolution for the oracle.
    #[arg(long, default_value_t = 200)]
    pub grid_steps: u32,

    /// json: full report with the solution chain; csv: per-write rates.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Cells per block N.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub cells: u64,

    /// Number of cell levels K.
    #[arg(long, value_parser = clap::value_parser!(u16).range(2..=256))]
    pub levels: u16,

    /// Bin-count slack of the scheme, in (0, 1).
    #[arg(long, default_value = "0.5", value_parser = parse_epsilon)]
    pub epsilon: f64,

    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Cost constant of the memory type.
    #[arg(long, default_value = "1.0", value_parser = parse_alpha)]
    pub alpha: f64,

    /// json: full report; csv: per-stage table.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TradeoffArgs {
    /// Number of cell levels K.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub levels: u32,

    /// Cost constant of the memory type.
    #[arg(long, default_value = "1.0", value_parser = parse_alpha)]
    pub alpha: f64,

    /// Number of payload points on the upper curve.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
    pub grid: u32,

    /// Block sizes for the lower curve (comma separated); default doubles
    /// from 8 to 4096.
    #[arg(long, value_delimiter = ',')]
    pub cells_sweep: Vec<u64>,

    #[arg(long, default_value = "0.5", value_parser = parse_epsilon)]
    pub epsilon: f64,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// One row of the tradeoff table. Upper-curve rows bound every scheme at
/// that payload; lower-curve rows are the random-binning scheme's closed
/// forms at their generating block size.
#[derive(Debug, Clone, Serialize)]
pub struct TradeoffRow {
    pub payload: f64,
    pub efficiency_upper: f64,
    pub efficiency_lower: Option<f64>,
    pub curve: &'static str,
    pub levels: u32,
    pub alpha: f64,
    pub cells: Option<u64>,
    pub epsilon: Option<f64>,
}

/// Renders a parsed command to its output text.
pub fn render(command: &Command) -> Result<String> {
    match command {
        Command::Bounds(args) => render_bounds(args),
        Command::Capacity(args) => render_capacity(args),
        Command::Simulate(args) => render_simulate(args),
        Command::Tradeoff(args) => render_tradeoff(args),
    }
}

/// Exit code for a domain error surfaced by [`render`].
pub fn exit_code(_error: &Error) -> i32 {
    3
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("output types serialize");
    text.push('\n');
    text
}

fn fmt_opt<T: std::fmt::Display>(value: &Option<T>) -> String {
    match value {
        Some(v) => v.to_string(),
        None => String::new(),
    }
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BoundsOutput<'a> {
    levels: u32,
    alpha: f64,
    units: &'static str,
    rows: &'a [bound_math::BoundPoint],
}

fn bounds_rows(args: &BoundsArgs) -> Result<Vec<bound_math::BoundPoint>> {
    let payloads: Vec<f64> = match args.grid {
        Some(n) => {
            let max = bound_math::max_payload_bits(args.levels);
            (1..=n).map(|i| i as f64 / n as f64 * max).collect()
        }
        None => args.payload.clone(),
    };
    payloads
        .iter()
        .map(|&p| bound_math::upper_bound_efficiency(p, args.levels, args.alpha))
        .collect()
}

fn render_bounds(args: &BoundsArgs) -> Result<String> {
    let rows = bounds_rows(args)?;
    Ok(match args.format {
        Format::Json => to_pretty_json(&BoundsOutput {
            levels: args.levels,
            alpha: args.alpha,
            units: EFFICIENCY_UNITS,
            rows: &rows,
        }),
        Format::Csv => {
            let mut out =
                String::from("payload_bits,beta,cost_levels,efficiency_upper,levels,alpha,units\n");
            for row in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    row.payload,
                    row.beta,
                    row.cost,
                    row.efficiency_upper,
                    args.levels,
                    args.alpha,
                    EFFICIENCY_UNITS
                ));
            }
            out
        }
    })
}

// ---------------------------------------------------------------------------
// capacity
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct OracleOutput {
    grid_steps: u32,
    sum_rate: f64,
    /// Absolute difference between the search result and the oracle.
    gap: f64,
}

#[derive(Serialize)]
struct CapacityOutput {
    levels: u32,
    writes: u32,
    restarts: u32,
    seed: u64,
    sum_rate: f64,
    rates: Vec<f64>,
    conditionals: Vec<Vec<Vec<f64>>>,
    oracle: Option<OracleOutput>,
}

fn render_capacity(args: &CapacityArgs) -> Result<String> {
    let (rates, chain) = capacity::max_sum_rate(args.levels, args.writes, args.restarts, args.seed)?;
    let oracle = if args.with_oracle {
        let oracle_rates =
            capacity::brute_force_sum_rate(args.levels, args.writes, args.grid_steps)?;
        Some(OracleOutput {
            grid_steps: args.grid_steps,
            sum_rate: oracle_rates.sum_rate,
            gap: (rates.sum_rate - oracle_rates.sum_rate).abs(),
        })
    } else {
        None
    };
    Ok(match args.format {
        Format::Json => to_pretty_json(&CapacityOutput {
            levels: args.levels,
            writes: args.writes,
            restarts: args.restarts,
            seed: args.seed,
            sum_rate: rates.sum_rate,
            rates: rates.rates,
            conditionals: chain.conditionals().to_vec(),
            oracle,
        }),
        Format::Csv => {
            let mut out = String::from("write,rate_bits,sum_rate,levels,writes,seed\n");
            for (index, rate) in rates.rates.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    index + 1,
                    rate,
                    rates.sum_rate,
                    args.levels,
                    args.writes,
                    args.seed
                ));
            }
            out
        }
    })
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ClosedForms {
    expected_rate_lower_bound_bits: f64,
    payload_formula: f64,
    efficiency_from_expected_rate: f64,
    efficiency_lower_bound_asymptotic: f64,
    units: &'static str,
    note: &'static str,
}

#[derive(Serialize)]
struct SimulateOutput {
    config: womsim::SimConfig,
    report: womsim::SimReport,
    closed_form: ClosedForms,
}

fn render_simulate(args: &SimulateArgs) -> Result<String> {
    let config = womsim::SimConfig::new(
        args.cells as usize,
        args.levels,
        args.epsilon,
        args.seed,
        args.trials,
        args.alpha,
    )?;
    let report = womsim::run_block(&config);
    Ok(match args.format {
        Format::Json => {
            let rate_bound =
                womsim::expected_rate_lower_bound(config.cells, config.levels, config.epsilon);
            let closed_form = ClosedForms {
                expected_rate_lower_bound_bits: rate_bound,
                payload_formula: womsim::payload_formula(config.cells, config.epsilon),
                efficiency_from_expected_rate: config.alpha * rate_bound
                    / (config.levels as f64 * config.cells as f64),
                efficiency_lower_bound_asymptotic: womsim::efficiency_lower_bound_asymptotic(
                    config.cells,
                    config.alpha,
                ),
                units: EFFICIENCY_UNITS,
                note: LOG_BASE_NOTE,
            };
            to_pretty_json(&SimulateOutput {
                config,
                report,
                closed_form,
            })
        }
        Format::Csv => {
            let mut out = String::from(
                "epoch_level,dropped_count,bins,bits,attempts,failures,\
                 empirical_failure_rate,exact_failure_prob\n",
            );
            for stage in &report.per_stage {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    stage.epoch_level,
                    stage.dropped_count,
                    stage.bins,
                    stage.bits,
                    stage.attempts,
                    stage.failures,
                    stage.empirical_failure_rate,
                    stage.exact_failure_prob
                ));
            }
            out
        }
    })
}

// ---------------------------------------------------------------------------
// tradeoff
// ---------------------------------------------------------------------------

fn default_cells_sweep() -> Vec<u64> {
    (3..=12).map(|e| 1u64 << e).collect() // 8, 16, ..., 4096
}

/// Builds the tradeoff table: an upper curve over a payload grid, and lower
/// points from the scheme's closed forms swept over block size.
pub fn tradeoff_rows(args: &TradeoffArgs) -> Result<Vec<TradeoffRow>> {
    let mut rows = Vec::new();
    let max = bound_math::max_payload_bits(args.levels);
    for i in 1..=args.grid {
        let payload = i as f64 / args.grid as f64 * max;
        let point = bound_math::upper_bound_efficiency(payload, args.levels, args.alpha)?;
        rows.push(TradeoffRow {
            payload,
            efficiency_upper: point.efficiency_upper,
            efficiency_lower: None,
            curve: "upper",
            levels: args.levels,
            alpha: args.alpha,
            cells: None,
            epsilon: None,
        });
    }

    let sweep = if args.cells_sweep.is_empty() {
        default_cells_sweep()
    } else {
        args.cells_sweep.clone()
    };
    let levels_u16 = u16::try_from(args.levels).unwrap_or(u16::MAX);
    for &cells in &sweep {
        if cells < 2 {
            return Err(Error::InvalidConfig(format!(
                "cells sweep entries must be at least 2, got {cells}"
            )));
        }
        let cells_usize = cells as usize;
        let payload = womsim::payload_formula(cells_usize, args.epsilon);
        if payload <= 0.0 {
            continue; // block too small to record anything at this epsilon
        }
        let rate_bound =
            womsim::expected_rate_lower_bound(cells_usize, levels_u16, args.epsilon);
        let efficiency_lower = args.alpha * rate_bound / (args.levels as f64 * cells as f64);
        let upper_here = bound_math::upper_bound_efficiency(payload, args.levels, args.alpha)?;
        rows.push(TradeoffRow {
            payload,
            efficiency_upper: upper_here.efficiency_upper,
            efficiency_lower: Some(efficiency_lower),
            curve: "lower",
            levels: args.levels,
            alpha: args.alpha,
            cells: Some(cells),
            epsilon: Some(args.epsilon),
        });
    }

    rows.sort_by(|a, b| {
        a.payload
            .partial_cmp(&b.payload)
            .unwrap()
            .then(a.curve.cmp(b.curve))
    });
    Ok(rows)
}

#[derive(Serialize)]
struct TradeoffOutput<'a> {
    levels: u32,
    alpha: f64,
    units: &'static str,
    rows: &'a [TradeoffRow],
}

fn render_tradeoff(args: &TradeoffArgs) -> Result<String> {
    let rows = tradeoff_rows(args)?;
    Ok(match args.format {
        Format::Json => to_pretty_json(&TradeoffOutput {
            levels: args.levels,
            alpha: args.alpha,
            units: EFFICIENCY_UNITS,
            rows: &rows,
        }),
        Format::Csv => {
            let mut out = String::from(
                "payload_bits,efficiency_upper,efficiency_lower,curve,levels,alpha,cells,epsilon,units\n",
            );
            for row in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    row.payload,
                    row.efficiency_upper,
                    fmt_opt(&row.efficiency_lower),
                    row.curve,
                    row.levels,
                    row.alpha,
                    fmt_opt(&row.cells),
                    fmt_opt(&row.epsilon),
                    EFFICIENCY_UNITS
                ));
            }
            out
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn parse(line: &str) -> Cli {
        Cli::try_parse_from(line.split_whitespace()).unwrap()
    }

    #[test]
    fn bounds_single_payload() {
        let cli = parse("womkit bounds --levels 8 --alpha 1.0 --payload 3.0");
        let text = render(&cli.command).unwrap();
        assert!(text.contains("\"efficiency_upper\": 0.857142857"));
        assert!(text.contains("\"units\": \"bits_per_level_times_alpha\""));
    }

    #[test]
    fn bounds_infeasible_payload_names_interval() {
        let cli = parse("womkit bounds --levels 8 --payload 3.1");
        let err = render(&cli.command).unwrap_err();
        assert_eq!(err.to_string(), "payload must lie in (0, 3.0]");
        assert_eq!(exit_code(&err), 3);
    }

    #[test]
    fn bounds_grid_spans_feasible_interval() {
        let cli = parse("womkit bounds --levels 2 --grid 4 --format csv");
        let text = render(&cli.command).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "payload_bits,beta,cost_levels,efficiency_upper,levels,alpha,units"
        );
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("1,0,0.5,2,2,1,"));
    }

    #[test]
    fn usage_errors_exit_two() {
        let err = Cli::try_parse_from(["womkit", "bounds", "--levels", "1", "--payload", "0.5"])
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err =
            Cli::try_parse_from(["womkit", "simulate", "--cells", "8", "--levels", "2", "--epsilon", "1.0"])
                .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn capacity_oracle_refusal_is_domain_error() {
        let cli = parse("womkit capacity --levels 5 --writes 2 --with-oracle --restarts 2");
        let err = render(&cli.command).unwrap_err();
        assert!(err.to_string().contains("brute-force oracle supports"));
        assert_eq!(exit_code(&err), 3);
    }

    #[test]
    fn tradeoff_rows_sorted_and_tagged() {
        let cli = parse("womkit tradeoff --levels 8 --grid 8 --cells-sweep 8,64");
        let Command::Tradeoff(args) = &cli.command else {
            panic!("wrong command")
        };
        let rows = tradeoff_rows(args).unwrap();
        for pair in rows.windows(2) {
            assert!(pair[0].payload <= pair[1].payload);
        }
        assert_eq!(rows.iter().filter(|r| r.curve == "lower").count(), 2);
        for row in rows.iter().filter(|r| r.curve == "lower") {
            assert!(row.efficiency_lower.is_some());
            assert!(row.cells.is_some());
            assert_eq!(row.epsilon, Some(0.5));
        }
    }
}
