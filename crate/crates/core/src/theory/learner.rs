//! Averaged perceptron: dependency-free, deterministic given data order,
//! and sufficient for the linearly separable toy problems here.

#[derive(Debug, Clone, Copy)]
pub struct PerceptronConfig {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for PerceptronConfig {
    fn default() -> Self {
        PerceptronConfig {
            epochs: 5,
            learning_rate: 1.0,
        }
    }
}

/// A linear threshold model over encoded instances.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> bool {
        let score: f64 = self.weights.iter().zip(x).map(|(w, v)| w * v).sum();
        score + self.bias >= 0.0
    }
}

/// Trains on `(instance, label)` pairs in the given order, averaging the
/// weight vector over all updates.
pub fn train_averaged_perceptron(
    data: &[(Vec<f64>, bool)],
    cfg: &PerceptronConfig,
) -> LinearModel {
    let dim = data.first().map(|(x, _)| x.len()).unwrap_or(0);
    let mut w = vec![0.0f64; dim];
    let mut b = 0.0f64;
    let mut w_sum = vec![0.0f64; dim];
    let mut b_sum = 0.0f64;
    let mut steps = 0u64;
    for _ in 0..cfg.epochs {
        for (x, label) in data {
            let y = if *label { 1.0 } else { -1.0 };
            let score: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
            if y * score <= 0.0 {
                for (wi, xi) in w.iter_mut().zip(x) {
                    *wi += cfg.learning_rate * y * xi;
                }
                b += cfg.learning_rate * y;
            }
            for (s, wi) in w_sum.iter_mut().zip(&w) {
                *s += wi;
            }
            b_sum += b;
            steps += 1;
        }
    }
    if steps == 0 {
        return LinearModel {
            weights: w,
            bias: b,
        };
    }
    LinearModel {
        weights: w_sum.into_iter().map(|s| s / steps as f64).collect(),
        bias: b_sum / steps as f64,
    }
}
