//! The mix-and-mask encoder: per-epoch permutation pairing, XMix pixel
//! mixing with a sign mask, YMix label mixing, and synthetic data
//! generation.
//!
//! All randomness comes from one [`MtState`] in a fixed order. Per epoch:
//! the first permutation, then the second (redrawn wholesale until no
//! position pairs an image with itself); per position: `k - 1` weight
//! spacing draws, `k - 2` public index draws, then `d` sign draws. Sign
//! draws are consumed even when `sign_flip` is off so the two modes stay
//! stream-compatible. This order is the contract the seed-recovery attack
//! relies on.

use crate::error::{Error, Result};
use crate::mt19937::{mt_seed, MtState};
use crate::types::{
    DatasetParams, EncodedDataset, EncodedImage, Image, LabelVector, MixRecord, PrivateDataset,
    PublicPool, Shape,
};

/// Encoder parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderConfig {
    /// Mix size: 2 privates plus `k - 2` publics.
    pub k: usize,
    /// Number of epochs; the dataset holds `epochs * |X|` encodings.
    pub epochs: usize,
    /// Whether to apply the random sign mask.
    pub sign_flip: bool,
    /// Size of the public pool the index draws range over.
    pub public_pool_size: usize,
    /// 32-bit master seed.
    pub seed: u32,
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidConfig(format!("k must be >= 2, got {}", self.k)));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.k > 2 && self.public_pool_size < self.k - 2 {
            return Err(Error::InvalidConfig(format!(
                "public pool of {} cannot supply k - 2 = {} images",
                self.public_pool_size,
                self.k - 2
            )));
        }
        Ok(())
    }
}

/// Pixel mixing: `sigma o (l1*x1 + l2*x2 + sum l_{i+2} * p_i)`.
pub fn xmix(
    privates: (&Image, &Image),
    publics: &[&Image],
    lambdas: &[f64],
    sigma: &[i8],
) -> Result<Vec<f32>> {
    let shape = privates.0.shape();
    if privates.1.shape() != shape || publics.iter().any(|p| p.shape() != shape) {
        return Err(Error::ShapeMismatch {
            expected: shape.to_string(),
            got: "mixed input shapes".to_string(),
        });
    }
    if lambdas.len() != publics.len() + 2 {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} images",
            lambdas.len(),
            publics.len() + 2
        )));
    }
    let sum: f64 = lambdas.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || lambdas.iter().any(|&l| l <= 0.0) {
        return Err(Error::InvalidWeights(format!(
            "weights must be positive and sum to 1, got sum {sum}"
        )));
    }
    let d = shape.len();
    if sigma.len() != d || sigma.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::InvalidWeights("sigma must be +/-1 of length d".into()));
    }
    let mut out = vec![0.0f32; d];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = lambdas[0] * privates.0.pixels()[i] as f64
            + lambdas[1] * privates.1.pixels()[i] as f64;
        for (j, p) in publics.iter().enumerate() {
            acc += lambdas[j + 2] * p.pixels()[i] as f64;
        }
        *o = (sigma[i] as f64 * acc) as f32;
    }
    Ok(out)
}

/// Label mixing: `l1*y_i + l2*y_j`. Public images contribute no label mass.
pub fn ymix(y_i: &LabelVector, y_j: &LabelVector, lambdas: &[f64]) -> Result<LabelVector> {
    if !y_i.is_one_hot() || !y_j.is_one_hot() {
        return Err(Error::InvalidLabel("ymix inputs must be one-hot".into()));
    }
    if lambdas.len() < 2 || lambdas[0] <= 0.0 || lambdas[1] <= 0.0 {
        return Err(Error::InvalidWeights(
            "ymix needs two positive private weights".into(),
        ));
    }
    let probs = y_i
        .probs()
        .iter()
        .zip(y_j.probs())
        .map(|(a, b)| lambdas[0] * a + lambdas[1] * b)
        .collect();
    LabelVector::new(probs)
}

/// Replays the encoder's RNG stream without touching pixel data. Shared by
/// the encoder and the seed-recovery attack so the two can never drift.
pub(crate) struct MixStream {
    rng: MtState,
    num_private: usize,
    k: usize,
    pool_size: usize,
    d: usize,
}

impl MixStream {
    pub(crate) fn new(seed: u32, num_private: usize, k: usize, pool_size: usize, d: usize) -> Self {
        MixStream {
            rng: mt_seed(seed),
            num_private,
            k,
            pool_size,
            d,
        }
    }

    /// Draws the two epoch permutations, redrawing the second wholesale
    /// until no position is paired with itself.
    pub(crate) fn epoch_pairing(&mut self) -> (Vec<usize>, Vec<usize>) {
        let p1 = self.rng.shuffle(self.num_private);
        loop {
            let p2 = self.rng.shuffle(self.num_private);
            if p1.iter().zip(&p2).all(|(a, b)| a != b) {
                return (p1, p2);
            }
        }
    }

    /// The weight spacings and public picks for one position: `k - 1`
    /// reals then `k - 2` u32s.
    pub(crate) fn position_weights_and_publics(&mut self) -> (Vec<f64>, Vec<usize>) {
        let lambdas = simplex_weights(&mut self.rng, self.k);
        let publics = self
            .rng
            .sample_without_replacement(self.pool_size.max(self.k - 2), self.k - 2);
        (lambdas, publics)
    }

    /// One sign draw; the seed test consumes these lazily.
    pub(crate) fn next_sign(&mut self) -> i8 {
        self.rng.next_sign()
    }

    /// All draws for one position: weights, publics, then `d` sign draws.
    pub(crate) fn position_draws(&mut self) -> (Vec<f64>, Vec<usize>, Vec<i8>) {
        let (lambdas, publics) = self.position_weights_and_publics();
        let sigma: Vec<i8> = (0..self.d).map(|_| self.next_sign()).collect();
        (lambdas, publics, sigma)
    }
}

/// Uniform simplex weights from `k - 1` sorted spacing draws. Exact-zero
/// spacings (u32 collisions) are clamped to 1e-12 and renormalized so every
/// weight stays strictly positive.
fn simplex_weights(rng: &mut MtState, k: usize) -> Vec<f64> {
    let mut cuts: Vec<f64> = (0..k - 1).map(|_| rng.next_f64()).collect();
    cuts.sort_by(f64::total_cmp);
    let mut weights = Vec::with_capacity(k);
    let mut prev = 0.0;
    for c in cuts {
        weights.push(c - prev);
        prev = c;
    }
    weights.push(1.0 - prev);
    if weights.iter().any(|&w| w <= 0.0) {
        for w in &mut weights {
            *w = w.max(1e-12);
        }
        let sum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= sum;
        }
    }
    weights
}

/// Regenerates the full provenance plan (the records) for a seed without
/// any pixel work.
pub(crate) fn generate_mix_plan(
    seed: u32,
    num_private: usize,
    k: usize,
    epochs: usize,
    pool_size: usize,
    sign_flip: bool,
    d: usize,
) -> Vec<MixRecord> {
    let mut stream = MixStream::new(seed, num_private, k, pool_size, d);
    let mut records = Vec::with_capacity(epochs * num_private);
    for epoch in 0..epochs {
        let (p1, p2) = stream.epoch_pairing();
        for pos in 0..num_private {
            let (lambdas, publics, raw_sigma) = stream.position_draws();
            let sigma = if sign_flip { raw_sigma } else { vec![1i8; d] };
            records.push(MixRecord {
                private_indices: (p1[pos], p2[pos]),
                public_indices: publics,
                lambdas,
                sigma,
                epoch,
            });
        }
    }
    records
}

/// Encodes the private set: `epochs * |X|` encodings with ground truth in
/// the sidecar field. Bit-identical across runs for a fixed config.
pub fn encode_dataset(
    private: &PrivateDataset,
    pool: &PublicPool,
    cfg: &EncoderConfig,
) -> Result<EncodedDataset> {
    cfg.validate()?;
    if private.len() < 2 {
        return Err(Error::InvalidConfig(
            "need at least 2 private images".into(),
        ));
    }
    if cfg.k > 2 && pool.len() != cfg.public_pool_size {
        return Err(Error::InvalidConfig(format!(
            "config says pool size {}, but {} images were supplied",
            cfg.public_pool_size,
            pool.len()
        )));
    }
    let shape = private.images[0].shape();
    if pool.images.iter().any(|p| p.shape() != shape) {
        return Err(Error::ShapeMismatch {
            expected: shape.to_string(),
            got: "public pool shapes".to_string(),
        });
    }
    let d = shape.len();
    let records = generate_mix_plan(
        cfg.seed,
        private.len(),
        cfg.k,
        cfg.epochs,
        cfg.public_pool_size,
        cfg.sign_flip,
        d,
    );
    let encodings = crate::par::map_indexed(records.len(), |i| {
        let rec = &records[i];
        let publics: Vec<&Image> = rec.public_indices.iter().map(|&p| &pool.images[p]).collect();
        let pixels = xmix(
            (
                &private.images[rec.private_indices.0],
                &private.images[rec.private_indices.1],
            ),
            &publics,
            &rec.lambdas,
            &rec.sigma,
        )?;
        let label = ymix(
            &private.labels[rec.private_indices.0],
            &private.labels[rec.private_indices.1],
            &rec.lambdas,
        )?;
        EncodedImage::new(shape, pixels, label)
    });
    let encodings: Result<Vec<EncodedImage>> = encodings.into_iter().collect();
    let params = DatasetParams {
        k: cfg.k,
        epochs: cfg.epochs,
        num_private: private.len(),
        num_classes: private.labels[0].num_classes(),
        shape,
        sign_flip: cfg.sign_flip,
        public_pool_size: cfg.public_pool_size,
    };
    let ds = EncodedDataset {
        encodings: encodings?,
        params,
        ground_truth: Some(records),
    };
    ds.validate_ground_truth()?;
    Ok(ds)
}

fn synth_image(rng: &mut MtState, shape: Shape, class: usize) -> Image {
    let (h, w, c) = (shape.height, shape.width, shape.channels);
    let theta = rng.next_f64() * std::f64::consts::TAU;
    let amp = 0.25 + 0.35 * rng.next_f64();
    let base = 0.2 + 0.35 * rng.next_f64();
    let (gx, gy) = (theta.cos() * amp, theta.sin() * amp);
    let mut pixels = vec![0.0f64; shape.len()];
    for y in 0..h {
        for x in 0..w {
            let xf = if w > 1 { x as f64 / (w - 1) as f64 } else { 0.5 };
            let yf = if h > 1 { y as f64 / (h - 1) as f64 } else { 0.5 };
            let v = base + gx * (xf - 0.5) + gy * (yf - 0.5);
            for ch in 0..c {
                pixels[(y * w + x) * c + ch] = v;
            }
        }
    }
    // Class picks the shape-type pattern; everything else is per-instance.
    let n_shapes = 2 + class % 2;
    for s in 0..n_shapes {
        let as_disc = match class % 3 {
            0 => false,
            1 => true,
            _ => s % 2 == 1,
        };
        let bright = s % 2 == 0;
        let mut values = Vec::with_capacity(c);
        for _ in 0..c {
            values.push(if bright {
                0.65 + 0.35 * rng.next_f64()
            } else {
                0.25 * rng.next_f64()
            });
        }
        if as_disc {
            let cy = rng.next_f64() * (h - 1) as f64;
            let cx = rng.next_f64() * (w - 1) as f64;
            let r = 2.0 + rng.next_f64() * (h.min(w) as f64 / 3.0);
            for y in 0..h {
                for x in 0..w {
                    let dy = y as f64 - cy;
                    let dx = x as f64 - cx;
                    if dy * dy + dx * dx <= r * r {
                        for (ch, &v) in values.iter().enumerate() {
                            pixels[(y * w + x) * c + ch] = v;
                        }
                    }
                }
            }
        } else {
            let rh = 3 + rng.next_below(h / 2 + 1);
            let rw = 3 + rng.next_below(w / 2 + 1);
            let y0 = rng.next_below(h.saturating_sub(rh).max(1));
            let x0 = rng.next_below(w.saturating_sub(rw).max(1));
            for y in y0..(y0 + rh).min(h) {
                for x in x0..(x0 + rw).min(w) {
                    for (ch, &v) in values.iter().enumerate() {
                        pixels[(y * w + x) * c + ch] = v;
                    }
                }
            }
        }
    }
    Image::from_unclamped(shape, pixels)
}

/// Synthetic private dataset: gradient backgrounds with class-patterned
/// rectangles and discs, labels balanced across classes.
pub fn generate_synthetic(
    count: usize,
    shape: Shape,
    num_classes: usize,
    seed: u32,
) -> Result<PrivateDataset> {
    if count < num_classes || num_classes == 0 {
        return Err(Error::InvalidConfig(format!(
            "count {count} must cover all {num_classes} classes"
        )));
    }
    let mut rng = mt_seed(seed);
    let mut images = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for i in 0..count {
        let class = i % num_classes;
        images.push(synth_image(&mut rng, shape, class));
        labels.push(LabelVector::one_hot(class, num_classes)?);
    }
    PrivateDataset::new(images, labels)
}

/// Synthetic public pool, drawn from a domain-separated stream so it is
/// disjoint from any private set by construction.
pub fn generate_public_pool(count: usize, shape: Shape, seed: u32) -> PublicPool {
    let mut rng = mt_seed(seed ^ 0x9e37_79b9);
    let images = (0..count)
        .map(|i| synth_image(&mut rng, shape, i % 7))
        .collect();
    PublicPool { images }
}
