//! End-to-end reconstruction pipeline: similarity, clique building,
//! set-level clustering, flow assignment, weight recovery, and the final
//! solve. The pipeline consumes only the encodings and the structural
//! parameters; the ground-truth sidecar is never read here (evaluation
//! helpers that do consume it live at the bottom and are called
//! separately).

use std::time::{Duration, Instant};

use crate::assignment::{pair_lambdas, solve_assignment, AssignmentMap};
use crate::clustering::{cluster_sets, create_all, default_clique_growth, CliqueSet};
use crate::error::{Error, Result};
use crate::recovery::{
    abs_mean_baseline, abs_mean_vectors, recover_lambdas, solve_abs_gd, solve_least_squares,
    GdOptions, MixSystem, ReconstructionResult, SolverBox,
};
use crate::similarity::{build_set_similarity_graph, build_similarity_graph, SimilarityGraph};
use crate::types::{EncodedDataset, Image, MixRecord};

/// Pipeline controls; defaults mirror the attack as described.
#[derive(Debug, Clone)]
pub struct AttackOptions {
    /// Clique growth count; `floor(N / 4)` (minimum 1) when absent.
    pub clique_growth: Option<usize>,
    /// Stop after the abs-mean baseline.
    pub baseline_only: bool,
    /// Minimize the l1 residual norm in the final solve.
    pub l1: bool,
    pub domain: SolverBox,
    pub gd: GdOptions,
}

impl Default for AttackOptions {
    fn default() -> Self {
        AttackOptions {
            clique_growth: None,
            baseline_only: false,
            l1: false,
            domain: SolverBox::unit(),
            gd: GdOptions::default(),
        }
    }
}

/// Everything the pipeline produced, stage by stage.
pub struct AttackArtifacts {
    pub similarity: SimilarityGraph,
    /// Medoid sets, one per source image.
    pub cliques: Vec<CliqueSet>,
    pub assignment: AssignmentMap,
    /// Recovered encodings per set (each of size `2N`).
    pub sets: Vec<Vec<usize>>,
    pub baseline: Vec<Image>,
    /// Absent in baseline-only runs.
    pub reconstruction: Option<ReconstructionResult>,
    pub timings: Vec<(&'static str, Duration)>,
}

impl AttackArtifacts {
    /// The best recovered images this run produced.
    pub fn images(&self) -> &[Image] {
        match &self.reconstruction {
            Some(r) => &r.images,
            None => &self.baseline,
        }
    }
}

/// Runs the full reconstruction attack on a blind dataset.
pub fn run_attack(ds: &EncodedDataset, opts: &AttackOptions) -> Result<AttackArtifacts> {
    if ds.len() < 2 {
        return Err(Error::Invalid("attack needs at least two encodings".into()));
    }
    let num_sources = ds.params.num_private;
    let epochs = ds.params.epochs;
    if ds.len() != num_sources * epochs {
        return Err(Error::Invalid(format!(
            "dataset length {} does not match num_private {} x epochs {}",
            ds.len(),
            num_sources,
            epochs
        )));
    }
    let mut timings = Vec::new();

    let t = Instant::now();
    let similarity = build_similarity_graph(ds)?;
    timings.push(("similarity_graph", t.elapsed()));

    let t = Instant::now();
    let growth = opts
        .clique_growth
        .unwrap_or_else(|| default_clique_growth(epochs));
    let candidates = create_all(&similarity, growth)?;
    let cliques = cluster_sets(&candidates, num_sources)?;
    timings.push(("clique_clustering", t.elapsed()));

    let t = Instant::now();
    let clique_members: Vec<Vec<usize>> =
        cliques.iter().map(|c| c.members().to_vec()).collect();
    let set_sim = build_set_similarity_graph(ds, &clique_members)?;
    timings.push(("set_similarity", t.elapsed()));

    let t = Instant::now();
    let pairs = solve_assignment(&set_sim, epochs)?;
    timings.push(("flow_assignment", t.elapsed()));

    let t = Instant::now();
    let sets = {
        let mut sets = vec![Vec::new(); num_sources];
        for (e, &(a, b)) in pairs.iter().enumerate() {
            sets[a].push(e);
            sets[b].push(e);
        }
        sets
    };
    let abs_means = abs_mean_vectors(&sets, ds)?;
    let lambdas = {
        let mut out = Vec::with_capacity(ds.len());
        for (e, enc) in ds.encodings.iter().enumerate() {
            let recovered = recover_lambdas(enc.label())?;
            let (a, b) = pairs[e];
            let ordered = pair_lambdas(
                enc,
                recovered.lambdas,
                (&abs_means[a], &abs_means[b]),
                (set_sim.weight(a, e) as f64, set_sim.weight(b, e) as f64),
            );
            out.push(ordered);
        }
        out
    };
    let assignment = AssignmentMap { pairs, lambdas };
    assignment.validate_degrees(num_sources, epochs)?;
    let baseline = abs_mean_baseline(&sets, ds)?;
    timings.push(("lambda_recovery", t.elapsed()));

    let reconstruction = if opts.baseline_only {
        None
    } else {
        let t = Instant::now();
        let sys = MixSystem::from_assignment(&assignment, ds, num_sources, true, opts.domain)?;
        let result = if ds.params.sign_flip {
            let gd = GdOptions {
                l1: opts.l1,
                ..opts.gd.clone()
            };
            solve_abs_gd(&sys, &gd)?
        } else {
            // Without the mask, the exact least-squares attack applies.
            let plain = MixSystem::from_assignment(&assignment, ds, num_sources, false, opts.domain)?;
            solve_least_squares(&plain)?
        };
        timings.push(("recovery_solve", t.elapsed()));
        Some(result)
    };

    Ok(AttackArtifacts {
        similarity,
        cliques,
        assignment,
        sets,
        baseline,
        reconstruction,
        timings,
    })
}

/// Evaluation only: fraction of encodings whose recovered set pair maps to
/// the true source pair, under the best set-to-source bijection (solved as
/// an assignment problem on co-occurrence counts).
pub fn assignment_accuracy(
    pairs: &[(usize, usize)],
    truth: &[MixRecord],
    num_sources: usize,
) -> Result<f64> {
    if pairs.len() != truth.len() || pairs.is_empty() {
        return Err(Error::Invalid("assignment/truth length mismatch".into()));
    }
    let mut counts = vec![0i64; num_sources * num_sources];
    for (&(a, b), rec) in pairs.iter().zip(truth) {
        let (ta, tb) = rec.private_indices;
        for s in [a, b] {
            for t in [ta, tb] {
                counts[s * num_sources + t] += 1;
            }
        }
    }
    // Best bijection set -> source maximizes total co-occurrence.
    let max_count = *counts.iter().max().unwrap_or(&0);
    let mut graph = crate::mcmf::MinCostFlow::new(2 + 2 * num_sources);
    let mut cross = vec![0usize; num_sources * num_sources];
    for s in 0..num_sources {
        graph.add_edge(0, 2 + s, 1, 0);
        graph.add_edge(2 + num_sources + s, 1, 1, 0);
        for t in 0..num_sources {
            cross[s * num_sources + t] = graph.add_edge(
                2 + s,
                2 + num_sources + t,
                1,
                max_count - counts[s * num_sources + t],
            );
        }
    }
    let (flow, _) = graph.solve(0, 1, num_sources as i64);
    if flow != num_sources as i64 {
        return Err(Error::InfeasibleFlow {
            routed: flow,
            required: num_sources as i64,
        });
    }
    let mut ident = vec![0usize; num_sources];
    for s in 0..num_sources {
        for t in 0..num_sources {
            if graph.flow_on(cross[s * num_sources + t]) == 1 {
                ident[s] = t;
            }
        }
    }
    let correct = pairs
        .iter()
        .zip(truth)
        .filter(|(&(a, b), rec)| {
            let (ta, tb) = rec.private_indices;
            let (ma, mb) = (ident[a], ident[b]);
            (ma == ta && mb == tb) || (ma == tb && mb == ta)
        })
        .count();
    Ok(correct as f64 / pairs.len() as f64)
}

/// Evaluation only: accuracy of thresholding the pairwise similarity at
/// `threshold` for predicting "shares a source", balanced across the two
/// classes of pairs.
pub fn sim_threshold_accuracy(
    graph: &SimilarityGraph,
    truth: &[MixRecord],
    threshold: f64,
) -> (f64, f64) {
    let n = graph.len();
    let share = |i: usize, j: usize| {
        let (a0, a1) = truth[i].private_indices;
        let (b0, b1) = truth[j].private_indices;
        a0 == b0 || a0 == b1 || a1 == b0 || a1 == b1
    };
    let (mut tp, mut np, mut tn, mut nn) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..n {
        for j in 0..i {
            let predicted = graph.weight(i, j) as f64 >= threshold;
            if share(i, j) {
                np += 1;
                tp += predicted as usize;
            } else {
                nn += 1;
                tn += !predicted as usize;
            }
        }
    }
    let pos_acc = if np > 0 { tp as f64 / np as f64 } else { 1.0 };
    let neg_acc = if nn > 0 { tn as f64 / nn as f64 } else { 1.0 };
    (pos_acc, neg_acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{encode_dataset, generate_public_pool, generate_synthetic, EncoderConfig};
    use crate::types::Shape;

    #[test]
    fn small_end_to_end_attack_runs_blind() {
        let shape = Shape::new(8, 8, 1);
        let private = generate_synthetic(8, shape, 4, 91).unwrap();
        let pool = generate_public_pool(12, shape, 91);
        let cfg = EncoderConfig {
            k: 4,
            epochs: 8,
            sign_flip: true,
            public_pool_size: 12,
            seed: 91,
        };
        let mut ds = encode_dataset(&private, &pool, &cfg).unwrap();
        let truth = ds.ground_truth.take().unwrap(); // attack runs blind
        let artifacts = run_attack(&ds, &AttackOptions::default()).unwrap();
        assert_eq!(artifacts.baseline.len(), 8);
        let recon = artifacts.reconstruction.as_ref().unwrap();
        assert_eq!(recon.images.len(), 8);
        let acc = assignment_accuracy(&artifacts.assignment.pairs, &truth, 8).unwrap();
        assert!(acc > 0.3, "tiny-instance assignment accuracy {acc}");
    }

    #[test]
    fn baseline_only_skips_the_solve() {
        let shape = Shape::new(8, 8, 1);
        let private = generate_synthetic(6, shape, 3, 92).unwrap();
        let pool = generate_public_pool(10, shape, 92);
        let cfg = EncoderConfig {
            k: 3,
            epochs: 4,
            sign_flip: true,
            public_pool_size: 10,
            seed: 92,
        };
        let mut ds = encode_dataset(&private, &pool, &cfg).unwrap();
        ds.ground_truth = None;
        let opts = AttackOptions {
            baseline_only: true,
            ..AttackOptions::default()
        };
        let artifacts = run_attack(&ds, &opts).unwrap();
        assert!(artifacts.reconstruction.is_none());
        assert_eq!(artifacts.images().len(), 6);
    }

    #[test]
    fn assignment_accuracy_is_one_for_truth() {
        let shape = Shape::new(6, 6, 1);
        let private = generate_synthetic(5, shape, 5, 93).unwrap();
        let pool = PublicPoolFixture::empty();
        let cfg = EncoderConfig {
            k: 2,
            epochs: 3,
            sign_flip: false,
            public_pool_size: 0,
            seed: 93,
        };
        let ds = encode_dataset(&private, &pool, &cfg).unwrap();
        let truth = ds.ground_truth.as_ref().unwrap();
        let pairs: Vec<(usize, usize)> = truth
            .iter()
            .map(|r| {
                let (a, b) = r.private_indices;
                if a < b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect();
        let acc = assignment_accuracy(&pairs, truth, 5).unwrap();
        assert_eq!(acc, 1.0);
    }

    struct PublicPoolFixture;
    impl PublicPoolFixture {
        fn empty() -> crate::types::PublicPool {
            crate::types::PublicPool { images: vec![] }
        }
    }
}
