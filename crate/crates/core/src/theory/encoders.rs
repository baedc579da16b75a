//! Toy 1-local instance encoders. Each encoded item depends on exactly
//! one source instance (plus encoder randomness), and labels pass through
//! untouched, so every variant is decomposable by construction.

use rand::Rng;
use rand_distr::StandardNormal;

use super::problem::Concept;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EncoderKind {
    /// Passes the instance through; no hiding at all.
    Identity,
    /// Adds isotropic Gaussian noise at the given scale.
    AdditiveNoise(f64),
    /// Maps the instance to its own label: perfectly hiding for
    /// same-label pairs, and trivially learnable with an identity
    /// classifier.
    LabelRevealing,
    /// The constant bottom encoder; hides everything, learns nothing.
    Null,
}

#[derive(Debug, Clone, Copy)]
pub struct LocalEncoder {
    pub kind: EncoderKind,
}

impl LocalEncoder {
    pub fn identity() -> Self {
        LocalEncoder {
            kind: EncoderKind::Identity,
        }
    }

    pub fn additive_noise(scale: f64) -> Self {
        LocalEncoder {
            kind: EncoderKind::AdditiveNoise(scale),
        }
    }

    pub fn label_revealing() -> Self {
        LocalEncoder {
            kind: EncoderKind::LabelRevealing,
        }
    }

    pub fn null() -> Self {
        LocalEncoder {
            kind: EncoderKind::Null,
        }
    }

    pub fn describe(&self) -> String {
        match self.kind {
            EncoderKind::Identity => "identity".to_string(),
            EncoderKind::AdditiveNoise(s) => format!("noise:{s}"),
            EncoderKind::LabelRevealing => "label".to_string(),
            EncoderKind::Null => "null".to_string(),
        }
    }

    /// Encodes one instance given its dataset label; only the
    /// label-revealing variant looks at the label.
    pub fn encode_labeled(&self, x: &[f64], label: bool, rng: &mut impl Rng) -> Vec<f64> {
        match self.kind {
            EncoderKind::Identity => x.to_vec(),
            EncoderKind::AdditiveNoise(scale) => x
                .iter()
                .map(|&v| v + scale * rng.sample::<f64, _>(StandardNormal))
                .collect(),
            EncoderKind::LabelRevealing => {
                let mut out = vec![0.0; x.len()];
                out[0] = if label { 1.0 } else { -1.0 };
                out
            }
            EncoderKind::Null => vec![0.0; x.len()],
        }
    }

    /// Encodes one instance labeled by the concept.
    pub fn encode(&self, x: &[f64], concept: &Concept, rng: &mut impl Rng) -> Vec<f64> {
        self.encode_labeled(x, concept.label(x), rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::problem::{trial_rng, LearningProblem};

    #[test]
    fn identity_is_identity() {
        let p = LearningProblem::orthogonal(4);
        let mut rng = trial_rng(3, 0);
        let x = p.sample_instance(&mut rng);
        assert_eq!(LocalEncoder::identity().encode(&x, &p.concepts[0], &mut rng), x);
    }

    #[test]
    fn null_hides_everything() {
        let p = LearningProblem::orthogonal(4);
        let mut rng = trial_rng(3, 1);
        let x = p.sample_instance(&mut rng);
        assert_eq!(
            LocalEncoder::null().encode(&x, &p.concepts[0], &mut rng),
            vec![0.0; 4]
        );
    }

    #[test]
    fn label_revealing_reveals_exactly_the_label() {
        let p = LearningProblem::orthogonal(4);
        let mut rng = trial_rng(3, 2);
        for _ in 0..50 {
            let x = p.sample_instance(&mut rng);
            let e = LocalEncoder::label_revealing().encode(&x, &p.concepts[2], &mut rng);
            let expect = if p.concepts[2].label(&x) { 1.0 } else { -1.0 };
            assert_eq!(e[0], expect);
            assert!(e[1..].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn noise_scale_zero_matches_identity() {
        let p = LearningProblem::orthogonal(4);
        let mut rng = trial_rng(3, 3);
        let x = p.sample_instance(&mut rng);
        let e = LocalEncoder::additive_noise(0.0).encode(&x, &p.concepts[0], &mut rng);
        assert_eq!(e, x);
    }
}
