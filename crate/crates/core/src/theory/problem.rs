//! Toy learning problems: isotropic Gaussian instances labeled by
//! halfspaces through the origin. Balanced by symmetry, and orthogonal
//! normals give independent labels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Deterministic per-trial generator derived from the master seed and the
/// trial index.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(
        master_seed ^ trial.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(23),
    )
}

/// A halfspace concept: label 1 iff `normal . x >= 0`.
#[derive(Debug, Clone)]
pub struct Concept {
    normal: Vec<f64>,
}

impl Concept {
    pub fn new(normal: Vec<f64>) -> Result<Self> {
        let norm: f64 = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidConfig("concept normal must be nonzero".into()));
        }
        Ok(Concept {
            normal: normal.into_iter().map(|v| v / norm).collect(),
        })
    }

    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut normal = vec![0.0; dim];
        normal[axis] = 1.0;
        Concept { normal }
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn label(&self, x: &[f64]) -> bool {
        self.normal.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() >= 0.0
    }
}

/// Instance distribution plus a concept set over it.
#[derive(Debug, Clone)]
pub struct LearningProblem {
    pub dim: usize,
    pub concepts: Vec<Concept>,
}

impl LearningProblem {
    pub fn new(dim: usize, concepts: Vec<Concept>) -> Result<Self> {
        for c in &concepts {
            if c.normal.len() != dim {
                return Err(Error::InvalidConfig("concept dimension mismatch".into()));
            }
            let norm: f64 = c.normal.iter().map(|v| v * v).sum::<f64>();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig("concept normal not unit length".into()));
            }
        }
        Ok(LearningProblem { dim, concepts })
    }

    /// `m` orthogonal balanced halfspaces in dimension `m` (the standard
    /// basis). Pairwise normal dot products are exactly zero.
    pub fn orthogonal(m: usize) -> Self {
        LearningProblem {
            dim: m,
            concepts: (0..m).map(|i| Concept::basis(m, i)).collect(),
        }
    }

    /// Checks pairwise orthogonality of the concept normals.
    pub fn is_orthogonal(&self) -> bool {
        for i in 0..self.concepts.len() {
            for j in 0..i {
                let dot: f64 = self.concepts[i]
                    .normal
                    .iter()
                    .zip(&self.concepts[j].normal)
                    .map(|(a, b)| a * b)
                    .sum();
                if dot.abs() >= 1e-9 {
                    return false;
                }
            }
        }
        true
    }

    /// One instance from the isotropic Gaussian.
    pub fn sample_instance(&self, rng: &mut impl Rng) -> Vec<f64> {
        (0..self.dim).map(|_| rng.sample(StandardNormal)).collect()
    }

    /// Rejection sampling with a draw budget.
    pub fn sample_conditioned(
        &self,
        rng: &mut impl Rng,
        budget: u64,
        mut accept: impl FnMut(&[f64]) -> bool,
    ) -> Result<Vec<f64>> {
        for _ in 0..budget {
            let x = self.sample_instance(rng);
            if accept(&x) {
                return Ok(x);
            }
        }
        Err(Error::RejectionBudget(budget))
    }

    /// The label pattern `F(x)` over every concept.
    pub fn pattern(&self, x: &[f64]) -> Vec<bool> {
        self.concepts.iter().map(|c| c.label(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_problem_is_orthogonal_and_unit() {
        let p = LearningProblem::orthogonal(16);
        assert!(p.is_orthogonal());
        for c in &p.concepts {
            let norm: f64 = c.normal().iter().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn halfspaces_are_roughly_balanced() {
        let p = LearningProblem::orthogonal(4);
        let mut rng = trial_rng(7, 0);
        let n = 20_000;
        let positives = (0..n)
            .filter(|_| p.concepts[0].label(&p.sample_instance(&mut rng)))
            .count();
        let frac = positives as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.02, "balance {frac}");
    }

    #[test]
    fn conditioned_sampling_honors_predicate() {
        let p = LearningProblem::orthogonal(4);
        let mut rng = trial_rng(7, 1);
        let x = p
            .sample_conditioned(&mut rng, 10_000, |x| p.concepts[0].label(x) && p.concepts[1].label(x))
            .unwrap();
        assert!(p.concepts[0].label(&x) && p.concepts[1].label(&x));
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let p = LearningProblem::orthogonal(2);
        let mut rng = trial_rng(7, 2);
        assert!(matches!(
            p.sample_conditioned(&mut rng, 50, |_| false),
            Err(Error::RejectionBudget(50))
        ));
    }

    #[test]
    fn trial_rng_is_reproducible_and_distinct() {
        let a: Vec<u32> = {
            let mut r = trial_rng(1, 5);
            (0..4).map(|_| r.gen()).collect()
        };
        let b: Vec<u32> = {
            let mut r = trial_rng(1, 5);
            (0..4).map(|_| r.gen()).collect()
        };
        let c: Vec<u32> = {
            let mut r = trial_rng(1, 6);
            (0..4).map(|_| r.gen()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
