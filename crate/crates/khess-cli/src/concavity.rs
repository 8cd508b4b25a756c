//! `khess concavity`: runs the pinch-threshold bisection for one
//! (n, k, l, eps, delta, delta0) configuration, then re-samples the
//! returned level to leave a per-evaluation record.
//!
//! Exit 0 means a threshold at or above the search floor survived its
//! full budget; exit 1 means every level down to the floor produced a
//! counterexample; exit 3 means the constrained sampler starved.

use khess::ineq::{
    search_delta_prime, substream_seed, ConcavityEvaluator, ConcavityParams,
    ConstrainedConeSampler, SampleBudget, SearchOutcome, xi_battery, DELTA_PRIME_FLOOR,
};
use khess::report::{float_cell, write_json, Table};
use khess::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::plots;
use crate::RunCtx;

/// Stream offset for the post-search sample record, far from the level
/// substreams used inside the search.
const RECORD_STREAM: u64 = 1_000_003;

const RECORD_SAMPLES: usize = 500;

pub fn run(
    ctx: &RunCtx,
    n: usize,
    k: usize,
    l: usize,
    eps: f64,
    delta: f64,
    delta0: f64,
) -> Result<u8> {
    // Full parameter validation up front; a bad configuration is a usage
    // error, not a failed search.
    if let Err(e) = ConcavityParams::new(n, k, l, eps, delta, delta0, delta / 2.0) {
        eprintln!("error: {e}");
        return Ok(2);
    }
    let budget = SampleBudget::new(ctx.budget.unwrap_or(20_000), ctx.seed);
    let outcome = search_delta_prime(n, k, l, eps, delta, delta0, &budget)?;

    write_json(&ctx.out.join("concavity.json"), &outcome)?;
    level_table(&outcome).write_csv(&ctx.out.join("concavity_levels.csv"))?;
    if outcome.survived {
        let samples = sample_table(ctx, n, k, l, eps, delta, delta0, &outcome, &budget)?;
        samples.write_csv(&ctx.out.join("concavity_samples.csv"))?;
    }

    if ctx.emit_plots {
        let pts: Vec<(f64, f64)> = outcome
            .levels
            .iter()
            .enumerate()
            .map(|(i, r)| (i as f64, r.delta_prime.log10()))
            .collect();
        plots::write_line_svg(
            &ctx.out.join("concavity.svg"),
            "log10 delta_prime per bisection level",
            &[("delta_prime", &pts)],
        )?;
    }

    let pass = outcome.survived && outcome.delta_prime_found >= DELTA_PRIME_FLOOR;
    println!(
        "concavity: n = {n}, k = {k}, l = {l}, delta_prime = {:.3e}, min_gap = {:.3e}, \
         samples = {} -> {}",
        outcome.delta_prime_found,
        outcome.min_gap,
        outcome.samples_checked,
        if pass { "pass" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { 1 })
}

fn level_table(outcome: &SearchOutcome) -> Table {
    let mut table = Table::new(&["delta_prime", "min_gap", "samples", "survived"]);
    for level in &outcome.levels {
        table.push_row(vec![
            float_cell(level.delta_prime),
            float_cell(level.min_gap),
            level.samples.to_string(),
            if level.survived { "1" } else { "0" }.to_string(),
        ]);
    }
    table
}

/// Draws a fresh batch at the surviving threshold and records every gap
/// evaluation: one row per (spectrum, direction) pair.
#[allow(clippy::too_many_arguments)]
fn sample_table(
    ctx: &RunCtx,
    n: usize,
    k: usize,
    l: usize,
    eps: f64,
    delta: f64,
    delta0: f64,
    outcome: &SearchOutcome,
    budget: &SampleBudget,
) -> Result<Table> {
    let params = ConcavityParams::new(n, k, l, eps, delta, delta0, outcome.delta_prime_found)?;
    let mut sampler = ConstrainedConeSampler::new(
        n,
        k,
        l,
        delta,
        outcome.delta_prime_found,
        substream_seed(ctx.seed, RECORD_STREAM),
        budget.lambda_scale,
        budget.proposal,
    )?;
    let mut xi_rng = ChaCha8Rng::seed_from_u64(substream_seed(ctx.seed, RECORD_STREAM + 1));

    let mut header: Vec<String> = vec!["sample".into(), "direction".into()];
    header.extend((0..n).map(|i| format!("lambda_{i}")));
    header.extend((0..n).map(|i| format!("xi_{i}")));
    header.extend(
        ["gap", "scale", "head_pinched", "tail_pinched"]
            .iter()
            .map(|s| s.to_string()),
    );
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(&header_refs);

    let count = RECORD_SAMPLES.min(budget.count);
    for sample in 0..count {
        let lam = sampler.next_sample()?;
        let ev = ConcavityEvaluator::new(&lam, &params)?;
        for (direction, xi) in xi_battery(n, &mut xi_rng).iter().enumerate() {
            let g = ev.gap(xi);
            let mut row = vec![sample.to_string(), direction.to_string()];
            row.extend(lam.values().iter().map(|&v| float_cell(v)));
            row.extend(xi.iter().map(|&v| float_cell(v)));
            row.push(float_cell(g.gap));
            row.push(float_cell(g.scale));
            row.push(if g.head_pinched { "1" } else { "0" }.to_string());
            row.push(if g.tail_pinched { "1" } else { "0" }.to_string());
            table.push_row(row);
        }
    }
    Ok(table)
}
