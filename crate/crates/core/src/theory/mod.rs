//! Distinguishing-game simulations on toy learning problems: the
//! challenger protocols, the constructive adversaries behind the three
//! impossibility arguments, and Monte-Carlo advantage estimation with
//! Wilson confidence intervals.
//!
//! Trials derive their generator from `(master seed, trial index)`, so
//! estimates are independent of scheduling and thread count.

mod encoders;
mod games;
mod learner;
mod problem;
mod theorems;

pub use encoders::{EncoderKind, LocalEncoder};
pub use games::{
    play_dataset_game, play_instance_game, AdvantageEstimate, DatasetAdversary, GameOutcome,
    InstanceAdversary, NearestInstanceAdversary, RandomGuessAdversary, ReadDifferingElement,
};
pub use learner::{train_averaged_perceptron, LinearModel, PerceptronConfig};
pub use problem::{trial_rng, Concept, LearningProblem};
pub use theorems::{
    encoded_accuracy, richness_check, run_theorem3_adversary, run_theorem4_adversary,
    run_theorem5_dichotomy, AccuracyConfig, DichotomyArm, EncodedAccuracy, RichnessReport,
    Theorem3Report, Theorem4Report, Theorem5Report,
};
