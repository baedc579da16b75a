//! Pairwise and set-to-encoding similarity.
//!
//! The default scorer is deterministic abs-correlation: take the absolute
//! value of both pixel tensors (which nullifies the sign mask), box-blur
//! with a 2x2 kernel, subtract per-image means, and return the positive
//! part of the Pearson correlation. Any [`SimilarityScorer`] can be
//! slotted in instead, e.g. a learned model driven externally.

use crate::error::{Error, Result};
use crate::types::{EncodedDataset, EncodedImage, MixRecord, Shape};

/// Complete weighted graph over encodings; weights in `[0, 1]`, zero
/// diagonal, exactly symmetric.
pub struct SimilarityGraph {
    n: usize,
    weights: Vec<f32>,
}

impl SimilarityGraph {
    /// Builds a graph from a row-major matrix, validating symmetry, range,
    /// and a zero diagonal.
    pub fn from_weights(n: usize, weights: Vec<f32>) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::Invalid(format!(
                "expected {} weights, got {}",
                n * n,
                weights.len()
            )));
        }
        for i in 0..n {
            if weights[i * n + i] != 0.0 {
                return Err(Error::Invalid(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let w = weights[i * n + j];
                if !(0.0..=1.0).contains(&w) || w != weights[j * n + i] {
                    return Err(Error::Invalid(format!("bad weight at ({i}, {j}): {w}")));
                }
            }
        }
        Ok(SimilarityGraph { n, weights })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn weight(&self, i: usize, j: usize) -> f32 {
        self.weights[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    /// Flat row-major weights, for container export.
    pub fn as_flat(&self) -> &[f32] {
        &self.weights
    }
}

/// Bipartite set-to-encoding similarity, `|X| x |E|`.
pub struct SetSimilarityGraph {
    num_sets: usize,
    num_encodings: usize,
    weights: Vec<f32>,
}

impl SetSimilarityGraph {
    /// Builds from a row-major `num_sets x num_encodings` matrix in `[0, 1]`.
    pub fn from_weights(num_sets: usize, num_encodings: usize, weights: Vec<f32>) -> Result<Self> {
        if weights.len() != num_sets * num_encodings
            || weights.iter().any(|w| !(0.0..=1.0).contains(w))
        {
            return Err(Error::Invalid("set similarity matrix malformed".into()));
        }
        Ok(SetSimilarityGraph {
            num_sets,
            num_encodings,
            weights,
        })
    }

    pub fn num_sets(&self) -> usize {
        self.num_sets
    }

    pub fn num_encodings(&self) -> usize {
        self.num_encodings
    }

    pub fn weight(&self, set: usize, encoding: usize) -> f32 {
        self.weights[set * self.num_encodings + encoding]
    }
}

/// A pairwise scorer over encodings. Implementations must be pure: the
/// all-pairs build evaluates cells in arbitrary order.
pub trait SimilarityScorer: Sync {
    fn score(&self, a: &EncodedImage, b: &EncodedImage) -> f64;
}

/// Default scorer: positive Pearson correlation of blurred absolute
/// images. Constant (zero-variance) inputs score 0 by convention.
#[derive(Debug, Clone)]
pub struct AbsCorrelation {
    pub blur: bool,
}

impl Default for AbsCorrelation {
    fn default() -> Self {
        AbsCorrelation { blur: true }
    }
}

/// 2x2 valid box blur on a flattened `(h, w, c)` tensor; returns the
/// `(h-1, w-1, c)` means. Falls through unchanged if either side is 1.
fn box_blur_2x2(pixels: &[f64], shape: Shape) -> Vec<f64> {
    let (h, w, c) = (shape.height, shape.width, shape.channels);
    if h < 2 || w < 2 {
        return pixels.to_vec();
    }
    let mut out = Vec::with_capacity((h - 1) * (w - 1) * c);
    for y in 0..h - 1 {
        for x in 0..w - 1 {
            for ch in 0..c {
                let idx = |yy: usize, xx: usize| (yy * w + xx) * c + ch;
                out.push(
                    (pixels[idx(y, x)]
                        + pixels[idx(y, x + 1)]
                        + pixels[idx(y + 1, x)]
                        + pixels[idx(y + 1, x + 1)])
                        / 4.0,
                );
            }
        }
    }
    out
}

/// Mean-subtracted, unit-norm feature; the zero vector for constant input.
fn normalized_feature(pixels: &[f64]) -> Vec<f64> {
    let n = pixels.len() as f64;
    let mean = pixels.iter().sum::<f64>() / n;
    let mut centered: Vec<f64> = pixels.iter().map(|&p| p - mean).collect();
    let norm = centered.iter().map(|&v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return vec![0.0; centered.len()];
    }
    for v in &mut centered {
        *v /= norm;
    }
    centered
}

impl AbsCorrelation {
    fn feature(&self, e: &EncodedImage) -> Vec<f64> {
        let abs: Vec<f64> = e.pixels().iter().map(|&p| p.abs() as f64).collect();
        let smoothed = if self.blur {
            box_blur_2x2(&abs, e.shape())
        } else {
            abs
        };
        normalized_feature(&smoothed)
    }
}

impl SimilarityScorer for AbsCorrelation {
    fn score(&self, a: &EncodedImage, b: &EncodedImage) -> f64 {
        let fa = self.feature(a);
        let fb = self.feature(b);
        dot(&fa, &fb).max(0.0)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The pairwise similarity statistic, `sim(e_i, e_j) in [0, 1]`.
pub fn sim(a: &EncodedImage, b: &EncodedImage) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape().to_string(),
            got: b.shape().to_string(),
        });
    }
    Ok(AbsCorrelation::default().score(a, b))
}

/// All-pairs similarity under the default scorer. Features are computed
/// once per encoding, so each cell is a dot product; results are exactly
/// symmetric and independent of thread count.
pub fn build_similarity_graph(ds: &EncodedDataset) -> Result<SimilarityGraph> {
    let n = ds.len();
    if n < 2 {
        return Ok(SimilarityGraph {
            n,
            weights: vec![0.0; n * n],
        });
    }
    let corr = AbsCorrelation::default();
    let features: Vec<Vec<f64>> = crate::par::map_indexed(n, |i| corr.feature(&ds.encodings[i]));
    let mut weights = vec![0.0f32; n * n];
    crate::par::for_each_chunk_mut(&mut weights, n, |i, row| {
        for (j, cell) in row.iter_mut().enumerate() {
            if i != j {
                *cell = dot(&features[i], &features[j]).max(0.0) as f32;
            }
        }
    });
    Ok(SimilarityGraph { n, weights })
}

/// All-pairs similarity under a caller-supplied scorer.
pub fn build_similarity_graph_with<S: SimilarityScorer>(
    ds: &EncodedDataset,
    scorer: &S,
) -> Result<SimilarityGraph> {
    let n = ds.len();
    let mut weights = vec![0.0f32; n * n];
    crate::par::for_each_chunk_mut(&mut weights, n, |i, row| {
        for (j, cell) in row.iter_mut().enumerate() {
            if i != j {
                *cell = scorer.score(&ds.encodings[i], &ds.encodings[j]).clamp(0.0, 1.0) as f32;
            }
        }
    });
    Ok(SimilarityGraph { n, weights })
}

/// Perfect-similarity graph from ground truth: weight 1 iff the private
/// sources intersect. Evaluation only.
pub fn build_oracle_graph(records: &[MixRecord]) -> SimilarityGraph {
    let n = records.len();
    let mut weights = vec![0.0f32; n * n];
    crate::par::for_each_chunk_mut(&mut weights, n, |i, row| {
        let (a0, a1) = records[i].private_indices;
        for (j, cell) in row.iter_mut().enumerate() {
            if i != j {
                let (b0, b1) = records[j].private_indices;
                if a0 == b0 || a0 == b1 || a1 == b0 || a1 == b1 {
                    *cell = 1.0;
                }
            }
        }
    });
    SimilarityGraph { n, weights }
}

/// Set-to-encoding similarity: correlation of `abs(e)` against the
/// element-wise mean of the representatives' absolute images.
pub fn set_sim(e: &EncodedImage, reps: &[&EncodedImage]) -> Result<f64> {
    if reps.is_empty() {
        return Err(Error::Invalid("set_sim needs at least one representative".into()));
    }
    if reps.iter().any(|r| r.shape() != e.shape()) {
        return Err(Error::ShapeMismatch {
            expected: e.shape().to_string(),
            got: "representative shapes".to_string(),
        });
    }
    let d = e.shape().len();
    let mut mean_abs = vec![0.0f64; d];
    for rep in reps {
        for (m, &p) in mean_abs.iter_mut().zip(rep.pixels()) {
            *m += p.abs() as f64;
        }
    }
    for m in &mut mean_abs {
        *m /= reps.len() as f64;
    }
    let fe = normalized_feature(&e.pixels().iter().map(|&p| p.abs() as f64).collect::<Vec<_>>());
    let fm = normalized_feature(&mean_abs);
    Ok(dot(&fe, &fm).clamp(0.0, 1.0))
}

/// Number of representatives per set used for the bipartite graph; accuracy
/// saturates quickly past this.
pub const SET_REPRESENTATIVES: usize = 4;

/// Builds the `|X| x |E|` bipartite graph from each set's lowest-index
/// representatives (a deterministic stand-in for the arbitrary choice).
pub fn build_set_similarity_graph(
    ds: &EncodedDataset,
    sets: &[Vec<usize>],
) -> Result<SetSimilarityGraph> {
    let num_sets = sets.len();
    let num_encodings = ds.len();
    let mut weights = vec![0.0f32; num_sets * num_encodings];
    let results = crate::par::map_indexed(num_sets, |s| -> Result<Vec<f32>> {
        let reps: Vec<&EncodedImage> = sets[s]
            .iter()
            .take(SET_REPRESENTATIVES)
            .map(|&i| &ds.encodings[i])
            .collect();
        (0..num_encodings)
            .map(|e| set_sim(&ds.encodings[e], &reps).map(|v| v as f32))
            .collect()
    });
    for (s, row) in results.into_iter().enumerate() {
        let row = row?;
        weights[s * num_encodings..(s + 1) * num_encodings].copy_from_slice(&row);
    }
    Ok(SetSimilarityGraph {
        num_sets,
        num_encodings,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{encode_dataset, generate_public_pool, generate_synthetic, EncoderConfig};
    use crate::types::{LabelVector, Shape};

    fn test_dataset(sign_flip: bool, seed: u32) -> EncodedDataset {
        let shape = Shape::new(8, 8, 1);
        let private = generate_synthetic(8, shape, 4, seed).unwrap();
        let pool = generate_public_pool(12, shape, seed);
        let cfg = EncoderConfig {
            k: 4,
            epochs: 4,
            sign_flip,
            public_pool_size: 12,
            seed,
        };
        encode_dataset(&private, &pool, &cfg).unwrap()
    }

    #[test]
    fn self_similarity_is_one() {
        let ds = test_dataset(true, 21);
        for e in ds.encodings.iter().take(4) {
            let s = sim(e, e).unwrap();
            assert!((s - 1.0).abs() < 1e-12, "sim(e,e) = {s}");
        }
    }

    #[test]
    fn sim_invariant_to_fresh_mask() {
        // Same mixture, fresh sign mask: abs removes both masks.
        let ds = test_dataset(true, 22);
        let e = &ds.encodings[0];
        let mut remasked = e.pixels().to_vec();
        let mut rng = crate::mt19937::mt_seed(999);
        for p in &mut remasked {
            *p = p.abs() * rng.next_sign() as f32;
        }
        let remasked = EncodedImage::new(e.shape(), remasked, e.label().clone()).unwrap();
        let s = sim(e, &remasked).unwrap();
        assert!((s - 1.0).abs() < 1e-12, "sim = {s}");
    }

    #[test]
    fn constant_input_scores_zero() {
        let shape = Shape::new(4, 4, 1);
        let label = LabelVector::new(vec![0.5, 0.5]).unwrap();
        let flat = EncodedImage::new(shape, vec![0.25; 16], label.clone()).unwrap();
        let ds = test_dataset(true, 23);
        assert_eq!(sim(&flat, &ds.encodings[0]).unwrap(), 0.0);
        assert_eq!(sim(&flat, &flat).unwrap(), 0.0);
    }

    #[test]
    fn graph_is_exactly_symmetric_with_zero_diagonal() {
        let ds = test_dataset(true, 24);
        let g = build_similarity_graph(&ds).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.weight(i, i), 0.0);
            for j in 0..g.len() {
                assert_eq!(g.weight(i, j).to_bits(), g.weight(j, i).to_bits());
                assert!((0.0..=1.0).contains(&(g.weight(i, j) as f64)));
            }
        }
    }

    #[test]
    fn single_encoding_graph_is_degenerate() {
        let mut ds = test_dataset(true, 25);
        ds.encodings.truncate(1);
        let g = build_similarity_graph(&ds).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.weight(0, 0), 0.0);
    }

    #[test]
    fn sharing_pairs_score_above_disjoint_pairs_on_average() {
        let ds = test_dataset(true, 26);
        let g = build_similarity_graph(&ds).unwrap();
        let records = ds.ground_truth.as_ref().unwrap();
        let share = |i: usize, j: usize| {
            let (a0, a1) = records[i].private_indices;
            let (b0, b1) = records[j].private_indices;
            a0 == b0 || a0 == b1 || a1 == b0 || a1 == b1
        };
        let (mut s_sum, mut s_n, mut d_sum, mut d_n) = (0.0, 0, 0.0, 0);
        for i in 0..ds.len() {
            for j in 0..i {
                if share(i, j) {
                    s_sum += g.weight(i, j) as f64;
                    s_n += 1;
                } else {
                    d_sum += g.weight(i, j) as f64;
                    d_n += 1;
                }
            }
        }
        let (s_mean, d_mean) = (s_sum / s_n as f64, d_sum / d_n as f64);
        assert!(
            s_mean > d_mean + 0.05,
            "sharing mean {s_mean} vs disjoint mean {d_mean}"
        );
    }

    #[test]
    fn set_sim_permutation_invariant_and_self_one() {
        let ds = test_dataset(true, 27);
        let e = &ds.encodings[0];
        let reps = [&ds.encodings[1], &ds.encodings[2], &ds.encodings[3], &ds.encodings[4]];
        let a = set_sim(e, &reps).unwrap();
        let permuted = [&ds.encodings[3], &ds.encodings[1], &ds.encodings[4], &ds.encodings[2]];
        let b = set_sim(e, &permuted).unwrap();
        assert!((a - b).abs() < 1e-12);
        let same = [e, e, e, e];
        assert!((set_sim(e, &same).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn set_sim_constant_reps_zero() {
        let ds = test_dataset(true, 28);
        let shape = ds.params.shape;
        let label = ds.encodings[0].label().clone();
        let flat = EncodedImage::new(shape, vec![0.5; shape.len()], label).unwrap();
        let reps = [&flat, &flat, &flat, &flat];
        assert_eq!(set_sim(&ds.encodings[0], &reps).unwrap(), 0.0);
    }

    #[test]
    fn oracle_graph_marks_exactly_source_sharing() {
        let ds = test_dataset(true, 29);
        let records = ds.ground_truth.as_ref().unwrap();
        let g = build_oracle_graph(records);
        let (i, j) = (0, 1);
        let (a0, a1) = records[i].private_indices;
        let (b0, b1) = records[j].private_indices;
        let expect = (a0 == b0 || a0 == b1 || a1 == b0 || a1 == b1) as i32 as f32;
        assert_eq!(g.weight(i, j), expect);
    }
}
