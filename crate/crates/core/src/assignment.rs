//! Assigns every encoding to exactly two source sets by exact min-cost
//! max-flow, and pairs the recovered mix weights with their sets.
//!
//! Network: source -> each set with capacity `2N` (each source image
//! participates in `2N` encodings under epoch pairing), each set -> each
//! encoding with capacity 1 and cost `round(1e6 * (1 - setSim))`, each
//! encoding -> sink with capacity 2. The saturating flow routes `2|E|`
//! units and decodes into one set pair per encoding.

use crate::error::{Error, Result};
use crate::mcmf::MinCostFlow;
use crate::similarity::SetSimilarityGraph;
use crate::types::EncodedImage;

const COST_SCALE: f64 = 1e6;

/// The recovered mapping: per encoding, its two source sets and the mix
/// weight paired with each.
#[derive(Debug, Clone)]
pub struct AssignmentMap {
    /// Per encoding: `(set_a, set_b)` with `set_a < set_b`.
    pub pairs: Vec<(usize, usize)>,
    /// Per encoding: the private weight paired with `set_a` and `set_b`.
    pub lambdas: Vec<(f64, f64)>,
}

impl AssignmentMap {
    /// CSV export for audit: one row per encoding.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("encoding_index,set_a,set_b,lambda_a,lambda_b\n");
        for (i, ((a, b), (la, lb))) in self.pairs.iter().zip(&self.lambdas).enumerate() {
            out.push_str(&format!("{i},{a},{b},{la:.12},{lb:.12}\n"));
        }
        out
    }

    /// Checks the degree postconditions: every encoding in two distinct
    /// sets, every set holding exactly `2N` encodings.
    pub fn validate_degrees(&self, num_sets: usize, epochs: usize) -> Result<()> {
        let mut per_set = vec![0usize; num_sets];
        for &(a, b) in &self.pairs {
            if a == b || a >= num_sets || b >= num_sets {
                return Err(Error::Invalid(format!("bad set pair ({a}, {b})")));
            }
            per_set[a] += 1;
            per_set[b] += 1;
        }
        if let Some(s) = per_set.iter().position(|&c| c != 2 * epochs) {
            return Err(Error::Invalid(format!(
                "set {s} received {} encodings, expected {}",
                per_set[s],
                2 * epochs
            )));
        }
        Ok(())
    }

    /// Encoding lists per set (the recovered cliques), each of size `2N`.
    pub fn encodings_per_set(&self, num_sets: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); num_sets];
        for (e, &(a, b)) in self.pairs.iter().enumerate() {
            out[a].push(e);
            out[b].push(e);
        }
        out
    }
}

/// Solves the flow assignment; returns per-encoding set pairs.
pub fn solve_assignment(set_sim: &SetSimilarityGraph, epochs: usize) -> Result<Vec<(usize, usize)>> {
    let num_sets = set_sim.num_sets();
    let num_encodings = set_sim.num_encodings();
    if num_sets < 2 {
        return Err(Error::InvalidConfig("need at least two sets".into()));
    }
    if num_encodings != epochs * num_sets {
        return Err(Error::InvalidConfig(format!(
            "|E| = {num_encodings} is not epochs ({epochs}) x |X| ({num_sets})"
        )));
    }
    let source = 0usize;
    let sink = 1usize;
    let set_node = |s: usize| 2 + s;
    let enc_node = |e: usize| 2 + num_sets + e;
    let mut graph = MinCostFlow::new(2 + num_sets + num_encodings);
    for s in 0..num_sets {
        graph.add_edge(source, set_node(s), 2 * epochs as i64, 0);
    }
    let mut cross = vec![0usize; num_sets * num_encodings];
    for s in 0..num_sets {
        for e in 0..num_encodings {
            let cost = ((1.0 - set_sim.weight(s, e) as f64) * COST_SCALE).round() as i64;
            cross[s * num_encodings + e] = graph.add_edge(set_node(s), enc_node(e), 1, cost.max(0));
        }
    }
    for e in 0..num_encodings {
        graph.add_edge(enc_node(e), sink, 2, 0);
    }
    let required = 2 * num_encodings as i64;
    let (flow, _) = graph.solve(source, sink, required);
    if flow != required {
        return Err(Error::InfeasibleFlow {
            routed: flow,
            required,
        });
    }
    let mut pairs = Vec::with_capacity(num_encodings);
    for e in 0..num_encodings {
        let mut sets = Vec::with_capacity(2);
        for s in 0..num_sets {
            if graph.flow_on(cross[s * num_encodings + e]) == 1 {
                sets.push(s);
            }
        }
        if sets.len() != 2 {
            return Err(Error::InfeasibleFlow {
                routed: sets.len() as i64,
                required: 2,
            });
        }
        pairs.push((sets[0], sets[1]));
    }
    Ok(pairs)
}

/// Orders an unordered weight pair against the two assigned sets: tries
/// both orderings of `abs(e) ~ l_a * absMean(S_a) + l_b * absMean(S_b) + c`
/// (with the free constant fitted) and keeps the smaller residual. Ties
/// give the larger weight to the set with higher set similarity.
pub fn pair_lambdas(
    encoding: &EncodedImage,
    lambdas: (f64, f64),
    abs_means: (&[f64], &[f64]),
    set_sims: (f64, f64),
) -> (f64, f64) {
    let abs_e: Vec<f64> = encoding.pixels().iter().map(|&p| p.abs() as f64).collect();
    let residual = |la: f64, lb: f64| -> f64 {
        let n = abs_e.len() as f64;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for i in 0..abs_e.len() {
            let diff = abs_e[i] - la * abs_means.0[i] - lb * abs_means.1[i];
            sum += diff;
            sum_sq += diff * diff;
        }
        // Centered SSE: the optimal free constant is the mean difference.
        sum_sq - sum * sum / n
    };
    let forward = residual(lambdas.0, lambdas.1);
    let backward = residual(lambdas.1, lambdas.0);
    let tie_eps = 1e-12 * forward.abs().max(backward.abs()).max(1.0);
    if (forward - backward).abs() <= tie_eps {
        let (hi, lo) = if lambdas.0 >= lambdas.1 {
            (lambdas.0, lambdas.1)
        } else {
            (lambdas.1, lambdas.0)
        };
        if set_sims.0 >= set_sims.1 {
            (hi, lo)
        } else {
            (lo, hi)
        }
    } else if forward < backward {
        (lambdas.0, lambdas.1)
    } else {
        (lambdas.1, lambdas.0)
    }
}
