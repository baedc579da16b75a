//! The constructive adversaries: encoded-accuracy estimation, the
//! dataset-game hybrid chain, the rich-concept-class threshold attack,
//! and the single-concept dichotomy (attack or boosted accuracy).

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use super::encoders::LocalEncoder;
use super::games::{wilson_interval, GameOutcome};
use super::learner::{train_averaged_perceptron, LinearModel, PerceptronConfig};
use super::problem::{trial_rng, LearningProblem};
use crate::error::{Error, Result};

/// Controls for the encoded-accuracy estimator.
#[derive(Debug, Clone)]
pub struct AccuracyConfig {
    /// Training samples per run.
    pub train_n: usize,
    /// Independent (dataset, model) draws.
    pub outer_runs: usize,
    /// Fresh evaluation samples per run.
    pub inner_samples: usize,
    /// Error threshold defining the failure rate.
    pub eps_target: f64,
    /// Estimate per-label errors as well.
    pub balanced: bool,
    pub learner: PerceptronConfig,
}

impl Default for AccuracyConfig {
    fn default() -> Self {
        AccuracyConfig {
            train_n: 500,
            outer_runs: 10,
            inner_samples: 1000,
            eps_target: 0.05,
            balanced: false,
            learner: PerceptronConfig::default(),
        }
    }
}

/// Monte-Carlo estimate of accuracy on encoded instances.
#[derive(Debug, Clone)]
pub struct EncodedAccuracy {
    /// Mean per-run error.
    pub eps_mean: f64,
    /// Fraction of runs whose error reached `eps_target`.
    pub delta_hat: f64,
    pub eps_target: f64,
    /// Mean error conditioned on the true label, when balanced.
    pub per_label: Option<(f64, f64)>,
    pub runs: usize,
}

fn train_encoded_model(
    problem: &LearningProblem,
    concept_index: usize,
    encoder: &LocalEncoder,
    n: usize,
    learner: &PerceptronConfig,
    rng: &mut ChaCha12Rng,
) -> LinearModel {
    let concept = &problem.concepts[concept_index];
    let data: Vec<(Vec<f64>, bool)> = (0..n)
        .map(|_| {
            let x = problem.sample_instance(rng);
            let y = concept.label(&x);
            (encoder.encode(&x, concept, rng), y)
        })
        .collect();
    train_averaged_perceptron(&data, learner)
}

fn encoded_error(
    problem: &LearningProblem,
    concept_index: usize,
    encoder: &LocalEncoder,
    model: &LinearModel,
    samples: usize,
    rng: &mut ChaCha12Rng,
) -> f64 {
    let concept = &problem.concepts[concept_index];
    let mut errors = 0usize;
    for _ in 0..samples {
        let x = problem.sample_instance(rng);
        let e = encoder.encode(&x, concept, rng);
        if model.predict(&e) != concept.label(&x) {
            errors += 1;
        }
    }
    errors as f64 / samples as f64
}

/// Estimates `(eps, delta)`-accuracy on encoded instances: `eps_mean` is
/// the mean fresh-sample error across independent trainings, `delta_hat`
/// the fraction of trainings whose error reached the target.
pub fn encoded_accuracy(
    problem: &LearningProblem,
    concept_index: usize,
    encoder: &LocalEncoder,
    cfg: &AccuracyConfig,
    master_seed: u64,
) -> Result<EncodedAccuracy> {
    if cfg.outer_runs == 0 || cfg.inner_samples == 0 || cfg.train_n == 0 {
        return Err(Error::InvalidConfig("accuracy estimation needs positive counts".into()));
    }
    let concept = &problem.concepts[concept_index];
    let per_run = crate::par::map_indexed(cfg.outer_runs, |run| {
        let mut rng = trial_rng(master_seed, run as u64);
        let model = train_encoded_model(
            problem,
            concept_index,
            encoder,
            cfg.train_n,
            &cfg.learner,
            &mut rng,
        );
        if cfg.balanced {
            // Stratified evaluation: equal fresh mass per label.
            let half = (cfg.inner_samples / 2).max(1);
            let mut errs = [0usize; 2];
            for (y, err) in errs.iter_mut().enumerate() {
                let want = y == 1;
                for _ in 0..half {
                    let x = problem
                        .sample_conditioned(&mut rng, 1_000_000, |x| concept.label(x) == want)
                        .expect("halfspace labels are balanced");
                    let e = encoder.encode(&x, concept, &mut rng);
                    if model.predict(&e) != want {
                        *err += 1;
                    }
                }
            }
            let e0 = errs[0] as f64 / half as f64;
            let e1 = errs[1] as f64 / half as f64;
            ((e0 + e1) / 2.0, Some((e0, e1)))
        } else {
            let err = encoded_error(
                problem,
                concept_index,
                encoder,
                &model,
                cfg.inner_samples,
                &mut rng,
            );
            (err, None)
        }
    });
    let runs = per_run.len();
    let eps_mean = per_run.iter().map(|(e, _)| e).sum::<f64>() / runs as f64;
    let delta_hat = per_run
        .iter()
        .filter(|(e, _)| *e >= cfg.eps_target)
        .count() as f64
        / runs as f64;
    let per_label = if cfg.balanced {
        let mut acc = (0.0, 0.0);
        for (_, l) in &per_run {
            let (a, b) = l.expect("balanced runs carry labels");
            acc.0 += a;
            acc.1 += b;
        }
        Some((acc.0 / runs as f64, acc.1 / runs as f64))
    } else {
        None
    };
    Ok(EncodedAccuracy {
        eps_mean,
        delta_hat,
        eps_target: cfg.eps_target,
        per_label,
        runs,
    })
}

/// Controls for the dataset-game hybrid experiment.
#[derive(Debug, Clone)]
pub struct Theorem3Config {
    /// Dataset size; also the number of fine hybrid steps.
    pub n: usize,
    /// Independent distinguisher runs per distribution node.
    pub trials: usize,
    /// Fresh test queries per distinguisher run.
    pub test_samples: usize,
    pub learner: PerceptronConfig,
    pub rejection_budget: u64,
}

impl Default for Theorem3Config {
    fn default() -> Self {
        Theorem3Config {
            n: 12,
            trials: 120,
            test_samples: 1000,
            learner: PerceptronConfig::default(),
            rejection_budget: 1_000_000,
        }
    }
}

/// One distribution node in the hybrid chain.
#[derive(Debug, Clone)]
pub struct NodeEstimate {
    pub label: String,
    /// `Pr[q(E(node^n)) = 1]` and its Wilson interval.
    pub prob_q1: f64,
    pub interval: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct Theorem3Report {
    /// The chain `T_0 = D_{c1}, ..., T_n = D_a, D_b, D_{1-c1}`.
    pub nodes: Vec<NodeEstimate>,
    /// Per-step advantages between consecutive nodes.
    pub steps: Vec<f64>,
    /// `|P(first) - P(last)|`, the two-endpoint distinguishing advantage.
    pub endpoint_advantage: f64,
    pub max_step: (usize, f64),
    pub sum_steps: f64,
    /// Fraction of distinguisher trainings below 51% test agreement.
    pub delta_hat: f64,
    /// `0.99 - 2 * delta_hat`.
    pub bound: f64,
}

enum ChainNode {
    /// `T_i = (i/n) D_a + ((n-i)/n) D_{c1}`.
    Hybrid { i: usize, n: usize },
    Db,
    NotC1,
}

/// Runs the dataset-game distinguisher across the full hybrid chain and
/// reports per-step and endpoint advantages. The distinguisher trains on
/// each sampled dataset and votes by majority agreement with the first
/// concept on fresh test queries.
pub fn run_theorem3_adversary(
    problem: &LearningProblem,
    c1_index: usize,
    c2_index: usize,
    encoder: &LocalEncoder,
    cfg: &Theorem3Config,
    master_seed: u64,
) -> Result<Theorem3Report> {
    if c1_index == c2_index || c1_index >= problem.concepts.len() || c2_index >= problem.concepts.len() {
        return Err(Error::InvalidConfig("need two distinct concepts".into()));
    }
    if cfg.n == 0 || cfg.trials == 0 {
        return Err(Error::InvalidConfig("n and trials must be positive".into()));
    }
    let c1 = &problem.concepts[c1_index];
    let c2 = &problem.concepts[c2_index];

    let sample_node = |node: &ChainNode, rng: &mut ChaCha12Rng| -> Result<(Vec<f64>, bool)> {
        match node {
            ChainNode::Hybrid { i, n } => {
                let from_da = rng.gen_range(0..*n) < *i;
                if from_da {
                    let y = rng.gen_bool(0.5);
                    let x = problem.sample_conditioned(rng, cfg.rejection_budget, |x| {
                        c1.label(x) == y && c2.label(x) == y
                    })?;
                    Ok((x, y))
                } else {
                    let x = problem.sample_instance(rng);
                    let y = c1.label(&x);
                    Ok((x, y))
                }
            }
            ChainNode::Db => {
                let y = rng.gen_bool(0.5);
                let x = problem.sample_conditioned(rng, cfg.rejection_budget, |x| {
                    c2.label(x) == y && c1.label(x) != y
                })?;
                Ok((x, y))
            }
            ChainNode::NotC1 => {
                let x = problem.sample_instance(rng);
                let y = !c1.label(&x);
                Ok((x, y))
            }
        }
    };

    // One distinguisher run: train on an encoded dataset from the node,
    // output 1 iff the trained model mostly agrees with c1 on fresh
    // encoded queries. Returns (output, test agreement).
    let run_q = |node: &ChainNode, rng: &mut ChaCha12Rng| -> Result<(bool, f64)> {
        let data: Result<Vec<(Vec<f64>, bool)>> = (0..cfg.n)
            .map(|_| {
                let (x, y) = sample_node(node, rng)?;
                Ok((encoder.encode_labeled(&x, y, rng), y))
            })
            .collect();
        let model = train_averaged_perceptron(&data?, &cfg.learner);
        let mut agree = 0usize;
        for _ in 0..cfg.test_samples {
            let x = problem.sample_instance(rng);
            let y = c1.label(&x);
            let e = encoder.encode_labeled(&x, y, rng);
            if model.predict(&e) == y {
                agree += 1;
            }
        }
        let fraction = agree as f64 / cfg.test_samples as f64;
        Ok((fraction > 0.5, fraction))
    };

    let mut chain: Vec<(String, ChainNode)> = (0..=cfg.n)
        .map(|i| {
            let label = if i == 0 {
                "D_c1".to_string()
            } else if i == cfg.n {
                "D_a".to_string()
            } else {
                format!("T_{i}")
            };
            (label, ChainNode::Hybrid { i, n: cfg.n })
        })
        .collect();
    chain.push(("D_b".to_string(), ChainNode::Db));
    chain.push(("D_not_c1".to_string(), ChainNode::NotC1));

    let mut nodes = Vec::with_capacity(chain.len());
    let mut delta_failures = 0usize;
    for (node_idx, (label, node)) in chain.iter().enumerate() {
        let outcomes = crate::par::map_indexed(cfg.trials, |t| {
            let mut rng = trial_rng(
                master_seed.wrapping_add(1 + node_idx as u64),
                t as u64,
            );
            run_q(node, &mut rng)
        });
        let mut ones = 0usize;
        for o in outcomes {
            let (out, fraction) = o?;
            ones += out as usize;
            if node_idx == 0 && fraction < 0.51 {
                delta_failures += 1;
            }
        }
        let prob = ones as f64 / cfg.trials as f64;
        nodes.push(NodeEstimate {
            label: label.clone(),
            prob_q1: prob,
            interval: wilson_interval(ones, cfg.trials),
        });
    }

    let steps: Vec<f64> = nodes
        .windows(2)
        .map(|w| (w[0].prob_q1 - w[1].prob_q1).abs())
        .collect();
    let endpoint_advantage = (nodes.first().unwrap().prob_q1 - nodes.last().unwrap().prob_q1).abs();
    let max_step = steps
        .iter()
        .enumerate()
        .fold((0usize, 0.0f64), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
    let sum_steps = steps.iter().sum();
    let delta_hat = delta_failures as f64 / cfg.trials as f64;
    Ok(Theorem3Report {
        nodes,
        steps,
        endpoint_advantage,
        max_step,
        sum_steps,
        delta_hat,
        bound: 0.99 - 2.0 * delta_hat,
    })
}

/// Result of the rich-concept-class check.
#[derive(Debug, Clone)]
pub struct RichnessReport {
    pub pass: bool,
    /// Worst-case empirical probability over the evaluated patterns.
    pub min_prob: f64,
    pub gamma: f64,
    pub patterns_checked: usize,
    pub trials: usize,
}

/// Empirically checks `(m, gamma)`-richness: for fixed label patterns
/// (all-zeros, all-ones, and random draws), the relative Hamming distance
/// from a random instance's pattern must reach `gamma` with probability
/// at least 0.99. `gamma <= 0` passes vacuously.
pub fn richness_check(
    problem: &LearningProblem,
    gamma: f64,
    trials: usize,
    random_patterns: usize,
    master_seed: u64,
) -> RichnessReport {
    let m = problem.concepts.len();
    if gamma <= 0.0 {
        return RichnessReport {
            pass: true,
            min_prob: 1.0,
            gamma,
            patterns_checked: 0,
            trials,
        };
    }
    let mut patterns: Vec<Vec<bool>> = vec![vec![false; m], vec![true; m]];
    {
        let mut rng = trial_rng(master_seed, u64::MAX);
        for _ in 0..random_patterns {
            patterns.push((0..m).map(|_| rng.gen_bool(0.5)).collect());
        }
    }
    let mut min_prob = f64::INFINITY;
    for (p_idx, f) in patterns.iter().enumerate() {
        let hits = crate::par::map_indexed(trials, |t| {
            let mut rng = trial_rng(master_seed.wrapping_add(p_idx as u64), t as u64);
            let x = problem.sample_instance(&mut rng);
            let pattern = problem.pattern(&x);
            let dist = pattern
                .iter()
                .zip(f)
                .filter(|(a, b)| a != b)
                .count() as f64
                / m as f64;
            (dist >= gamma) as usize
        });
        let prob = hits.iter().sum::<usize>() as f64 / trials as f64;
        min_prob = min_prob.min(prob);
    }
    RichnessReport {
        pass: min_prob >= 0.99,
        min_prob,
        gamma,
        patterns_checked: patterns.len(),
        trials,
    }
}

/// Controls for the rich-class threshold attack.
#[derive(Debug, Clone)]
pub struct Theorem4Config {
    pub train_n: usize,
    pub gamma: f64,
    pub trials: usize,
    /// Held-out encoded samples for per-concept error measurement.
    pub eval_samples: usize,
    /// Per-concept encoded-error target; calibrated from a pilot run when
    /// absent (measured error plus margin).
    pub eps_target: Option<f64>,
    pub retrain_budget: usize,
    pub learner: PerceptronConfig,
    pub rejection_budget: u64,
}

impl Default for Theorem4Config {
    fn default() -> Self {
        Theorem4Config {
            train_n: 500,
            gamma: 0.25,
            trials: 1000,
            eval_samples: 600,
            eps_target: None,
            retrain_budget: 5,
            learner: PerceptronConfig::default(),
            rejection_budget: 1_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Theorem4Report {
    /// Mean measured encoded error of the accepted per-concept models.
    pub eps_hat: f64,
    pub gamma: f64,
    /// `0.99 - eps_hat / gamma`.
    pub bound: f64,
    pub outcome: GameOutcome,
}

/// The threshold attack: train one model per concept until its encoded
/// error meets the target, then distinguish by whether the model vector's
/// pattern on the encoding is far (relative Hamming `>= gamma`) from the
/// true pattern of the first candidate.
pub fn run_theorem4_adversary(
    problem: &LearningProblem,
    encoder: &LocalEncoder,
    cfg: &Theorem4Config,
    master_seed: u64,
) -> Result<Theorem4Report> {
    let m = problem.concepts.len();
    if m == 0 || cfg.trials == 0 {
        return Err(Error::InvalidConfig("need concepts and trials".into()));
    }
    let eps_target = match cfg.eps_target {
        Some(t) => t,
        None => {
            let mut rng = trial_rng(master_seed, u64::MAX - 1);
            let model = train_encoded_model(problem, 0, encoder, cfg.train_n, &cfg.learner, &mut rng);
            let pilot = encoded_error(problem, 0, encoder, &model, cfg.eval_samples, &mut rng);
            (pilot + 0.05).min(0.45)
        }
    };

    let trained: Vec<Result<(LinearModel, f64)>> = crate::par::map_indexed(m, |i| {
        for attempt in 0..cfg.retrain_budget {
            let mut rng = trial_rng(
                master_seed ^ 0xa5a5_0000,
                (i * cfg.retrain_budget + attempt) as u64,
            );
            let model = train_encoded_model(problem, i, encoder, cfg.train_n, &cfg.learner, &mut rng);
            let err = encoded_error(problem, i, encoder, &model, cfg.eval_samples, &mut rng);
            if err <= eps_target {
                return Ok((model, err));
            }
        }
        Err(Error::TrainingBudget(format!(
            "concept {i} never reached encoded error {eps_target} in {} attempts",
            cfg.retrain_budget
        )))
    });
    let mut models = Vec::with_capacity(m);
    let mut eps_sum = 0.0;
    for t in trained {
        let (model, err) = t?;
        eps_sum += err;
        models.push(model);
    }
    let eps_hat = eps_sum / m as f64;

    let concept = &problem.concepts[0];
    let per_trial = crate::par::map_indexed(cfg.trials, |t| -> Result<(bool, bool)> {
        let mut rng = trial_rng(master_seed ^ 0x5a5a_0000, t as u64);
        let x0 = problem.sample_instance(&mut rng);
        let want = concept.label(&x0);
        let x1 = problem.sample_conditioned(&mut rng, cfg.rejection_budget, |x| {
            concept.label(x) == want
        })?;
        let b = rng.gen_bool(0.5);
        let challenge = if b { &x1 } else { &x0 };
        let encoded = encoder.encode(challenge, concept, &mut rng);
        let f_x0 = problem.pattern(&x0);
        let far = {
            let mismatches = models
                .iter()
                .zip(&f_x0)
                .filter(|(h, &bit)| h.predict(&encoded) != bit)
                .count();
            mismatches as f64 / m as f64 >= cfg.gamma
        };
        Ok((b, far))
    });
    let mut wins = 0usize;
    let (mut out1_b0, mut n_b0, mut out1_b1, mut n_b1) = (0usize, 0usize, 0usize, 0usize);
    for r in per_trial {
        let (b, out) = r?;
        if b == out {
            wins += 1;
        }
        if b {
            n_b1 += 1;
            out1_b1 += out as usize;
        } else {
            n_b0 += 1;
            out1_b0 += out as usize;
        }
    }
    let outcome = super::games::outcome_from_parts(wins, cfg.trials, out1_b0, n_b0, out1_b1, n_b1);
    Ok(Theorem4Report {
        eps_hat,
        gamma: cfg.gamma,
        bound: 0.99 - eps_hat / cfg.gamma,
        outcome,
    })
}

/// Controls for the single-concept dichotomy.
#[derive(Debug, Clone)]
pub struct Theorem5Config {
    pub train_m: usize,
    pub tau: f64,
    pub trials: usize,
    pub eval_samples: usize,
    pub max_candidates: usize,
    pub learner: PerceptronConfig,
    pub rejection_budget: u64,
}

impl Default for Theorem5Config {
    fn default() -> Self {
        Theorem5Config {
            train_m: 300,
            tau: 0.1,
            trials: 400,
            eval_samples: 600,
            max_candidates: 200,
            learner: PerceptronConfig::default(),
            rejection_budget: 1_000_000,
        }
    }
}

/// Which arm of the dichotomy the run landed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DichotomyArm {
    /// A candidate pair was found and the distinguishing game ran.
    LackOfPrivacy,
    /// The candidate search exhausted its budget; the booster's accuracy
    /// is the evidence.
    HighAccuracy,
}

#[derive(Debug, Clone)]
pub struct Theorem5Report {
    /// Balanced encoded error of the trained model (max over labels).
    pub eps_hat: f64,
    pub tau: f64,
    /// Majority-vote width `k = ceil(20 ln(1/tau) / tau^2)`.
    pub booster_votes: usize,
    pub boosted_accuracy: f64,
    pub arm: DichotomyArm,
    pub attack: Option<GameOutcome>,
    /// `1/2 - eps_hat - tau`.
    pub attack_bound: f64,
    pub candidates_tried: usize,
}

/// Runs the dichotomy: build the majority-vote booster, measure its
/// accuracy, then search for a candidate pair where the base model is
/// nearly random on one instance and reliable on the other. Finding one
/// yields the distinguishing attack; exhausting the budget reports the
/// boosted-accuracy arm.
pub fn run_theorem5_dichotomy(
    problem: &LearningProblem,
    encoder: &LocalEncoder,
    cfg: &Theorem5Config,
    master_seed: u64,
) -> Result<Theorem5Report> {
    if !(cfg.tau > 0.0 && cfg.tau < 1.0) {
        return Err(Error::InvalidConfig("tau must lie in (0, 1)".into()));
    }
    let concept = &problem.concepts[0];
    let mut rng0 = trial_rng(master_seed, u64::MAX - 2);
    let model = train_encoded_model(problem, 0, encoder, cfg.train_m, &cfg.learner, &mut rng0);

    // Balanced encoded error, the eps(m) the bounds are stated in.
    let half = (cfg.eval_samples / 2).max(1);
    let mut label_errors = [0.0f64; 2];
    for (y, slot) in label_errors.iter_mut().enumerate() {
        let want = y == 1;
        let mut errs = 0usize;
        for _ in 0..half {
            let x = problem.sample_conditioned(&mut rng0, cfg.rejection_budget, |x| {
                concept.label(x) == want
            })?;
            let e = encoder.encode(&x, concept, &mut rng0);
            if model.predict(&e) != want {
                errs += 1;
            }
        }
        *slot = errs as f64 / half as f64;
    }
    let eps_hat = label_errors[0].max(label_errors[1]);

    let k = (20.0 * (1.0 / cfg.tau).ln() / (cfg.tau * cfg.tau)).ceil() as usize;
    let boosted_hits = crate::par::map_indexed(cfg.trials, |t| {
        let mut rng = trial_rng(master_seed ^ 0x0b00_5700, t as u64);
        let x = problem.sample_instance(&mut rng);
        let mut votes = 0usize;
        for _ in 0..k {
            let e = encoder.encode(&x, concept, &mut rng);
            votes += model.predict(&e) as usize;
        }
        ((votes * 2 > k) == concept.label(&x)) as usize
    });
    let boosted_accuracy = boosted_hits.iter().sum::<usize>() as f64 / cfg.trials as f64;

    // Candidate search with empirical Z and W events.
    let est_n = (8.0 / (cfg.tau * cfg.tau)).ceil() as usize;
    let mut found: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut candidates_tried = 0usize;
    for cand in 0..cfg.max_candidates {
        candidates_tried = cand + 1;
        let mut rng = trial_rng(master_seed ^ 0xcafe_0000, cand as u64);
        let x0 = problem.sample_instance(&mut rng);
        let want = concept.label(&x0);
        let x1 = problem.sample_conditioned(&mut rng, cfg.rejection_budget, |x| {
            concept.label(x) == want
        })?;
        let mut err0 = 0usize;
        let mut agree1 = 0usize;
        for _ in 0..est_n {
            let e0 = encoder.encode(&x0, concept, &mut rng);
            if model.predict(&e0) != want {
                err0 += 1;
            }
            let e1 = encoder.encode(&x1, concept, &mut rng);
            if model.predict(&e1) == want {
                agree1 += 1;
            }
        }
        let err0 = err0 as f64 / est_n as f64;
        let agree1 = agree1 as f64 / est_n as f64;
        if err0 >= 0.5 - cfg.tau / 2.0 && agree1 >= 1.0 - eps_hat - cfg.tau / 2.0 {
            found = Some((x0, x1));
            break;
        }
    }

    let attack_bound = 0.5 - eps_hat - cfg.tau;
    match found {
        Some((x0, x1)) => {
            let want = concept.label(&x0);
            let per_trial = crate::par::map_indexed(cfg.trials, |t| {
                let mut rng = trial_rng(master_seed ^ 0xdead_0000, t as u64);
                let b = rng.gen_bool(0.5);
                let challenge = if b { &x1 } else { &x0 };
                let u = encoder.encode(challenge, concept, &mut rng);
                let out = model.predict(&u) == want;
                (b, out)
            });
            let mut wins = 0usize;
            let (mut out1_b0, mut n_b0, mut out1_b1, mut n_b1) = (0usize, 0usize, 0usize, 0usize);
            for (b, out) in per_trial {
                if b == out {
                    wins += 1;
                }
                if b {
                    n_b1 += 1;
                    out1_b1 += out as usize;
                } else {
                    n_b0 += 1;
                    out1_b0 += out as usize;
                }
            }
            let outcome =
                super::games::outcome_from_parts(wins, cfg.trials, out1_b0, n_b0, out1_b1, n_b1);
            Ok(Theorem5Report {
                eps_hat,
                tau: cfg.tau,
                booster_votes: k,
                boosted_accuracy,
                arm: DichotomyArm::LackOfPrivacy,
                attack: Some(outcome),
                attack_bound,
                candidates_tried,
            })
        }
        None => Ok(Theorem5Report {
            eps_hat,
            tau: cfg.tau,
            booster_votes: k,
            boosted_accuracy,
            arm: DichotomyArm::HighAccuracy,
            attack: None,
            attack_bound,
            candidates_tried,
        }),
    }
}
