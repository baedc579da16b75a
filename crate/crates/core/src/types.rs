//! Canonical data types shared by the encoder and every attack stage.

use crate::error::{Error, Result};

/// Tensor shape of one image, row-major `(height, width, channels)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl Shape {
    pub fn new(height: usize, width: usize, channels: usize) -> Self {
        Shape {
            height,
            width,
            channels,
        }
    }

    /// Flattened pixel count `d = h * w * c`.
    pub fn len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.height, self.width, self.channels)
    }
}

/// A plain image with pixels in `[0, 1]`, stored as 32-bit floats so that
/// the on-disk container round-trips bit-exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    shape: Shape,
    pixels: Vec<f32>,
}

impl Image {
    pub fn new(shape: Shape, pixels: Vec<f32>) -> Result<Self> {
        if pixels.len() != shape.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} ({} values)", shape, shape.len()),
                got: format!("{} values", pixels.len()),
            });
        }
        for (i, &p) in pixels.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(Error::PixelOutOfRange {
                    index: i,
                    value: p as f64,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        Ok(Image { shape, pixels })
    }

    /// Clamps out-of-range values instead of rejecting them. Used when a
    /// solver output is turned back into an image.
    pub fn from_unclamped(shape: Shape, pixels: impl IntoIterator<Item = f64>) -> Self {
        let pixels = pixels
            .into_iter()
            .map(|p| if p.is_nan() { 0.0 } else { p.clamp(0.0, 1.0) as f32 })
            .collect();
        Image { shape, pixels }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }
}

/// A label as a vector of per-class mass. Plain dataset labels are one-hot
/// (entries sum to 1); mixed labels carry only the private mass, so their
/// sum is the private weight total and is below 1 when public images are
/// mixed in.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelVector(Vec<f64>);

impl LabelVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|&p| p < 0.0 || p.is_nan()) {
            return Err(Error::InvalidLabel("negative or NaN entry".into()));
        }
        Ok(LabelVector(probs))
    }

    pub fn one_hot(class: usize, num_classes: usize) -> Result<Self> {
        if class >= num_classes {
            return Err(Error::InvalidLabel(format!(
                "class {class} out of range for {num_classes} classes"
            )));
        }
        let mut v = vec![0.0; num_classes];
        v[class] = 1.0;
        Ok(LabelVector(v))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn num_classes(&self) -> usize {
        self.0.len()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// True iff exactly one entry equals 1 and the rest are 0.
    pub fn is_one_hot(&self) -> bool {
        let ones = self.0.iter().filter(|&&p| p == 1.0).count();
        let zeros = self.0.iter().filter(|&&p| p == 0.0).count();
        ones == 1 && ones + zeros == self.0.len()
    }

    /// True iff entries are nonnegative and sum to 1 within 1e-9.
    pub fn is_distribution(&self) -> bool {
        (self.sum() - 1.0).abs() <= 1e-9
    }

    /// Index of the 1-entry of a one-hot label.
    pub fn hot_class(&self) -> Option<usize> {
        if self.is_one_hot() {
            self.0.iter().position(|&p| p == 1.0)
        } else {
            None
        }
    }
}

/// An encoded image: a sign-masked convex mixture, pixels in `[-1, 1]`,
/// together with its mixed label.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedImage {
    shape: Shape,
    pixels: Vec<f32>,
    label: LabelVector,
}

impl EncodedImage {
    pub fn new(shape: Shape, pixels: Vec<f32>, label: LabelVector) -> Result<Self> {
        if pixels.len() != shape.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} ({} values)", shape, shape.len()),
                got: format!("{} values", pixels.len()),
            });
        }
        for (i, &p) in pixels.iter().enumerate() {
            if !(-1.0..=1.0).contains(&p) || p.is_nan() {
                return Err(Error::PixelOutOfRange {
                    index: i,
                    value: p as f64,
                    lo: -1.0,
                    hi: 1.0,
                });
            }
        }
        Ok(EncodedImage {
            shape,
            pixels,
            label,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn label(&self) -> &LabelVector {
        &self.label
    }

    /// Absolute value of the pixel tensor; nullifies the sign mask.
    pub fn abs_pixels(&self) -> Vec<f32> {
        self.pixels.iter().map(|p| p.abs()).collect()
    }
}

/// Ground-truth provenance of one encoding: which two private images and
/// which public images were mixed, with what weights and sign mask.
#[derive(Debug, Clone, PartialEq)]
pub struct MixRecord {
    /// Ordered pair of private-set indices; the first pairs with `lambdas[0]`.
    pub private_indices: (usize, usize),
    /// `k - 2` distinct public-pool indices, in draw order.
    pub public_indices: Vec<usize>,
    /// All `k` mix weights, strictly positive, summing to 1.
    pub lambdas: Vec<f64>,
    /// Sign per flattened pixel, each entry -1 or +1.
    pub sigma: Vec<i8>,
    /// Epoch this encoding was emitted in.
    pub epoch: usize,
}

impl MixRecord {
    pub fn validate(&self, num_private: usize, d: usize) -> Result<()> {
        let (a, b) = self.private_indices;
        if a == b {
            return Err(Error::Invalid(format!("private indices equal: {a}")));
        }
        if a >= num_private || b >= num_private {
            return Err(Error::Invalid(format!(
                "private index out of range: ({a}, {b}) with {num_private} privates"
            )));
        }
        let sum: f64 = self.lambdas.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.lambdas.iter().any(|&l| l <= 0.0) {
            return Err(Error::InvalidWeights(format!(
                "lambdas must be positive and sum to 1, got sum {sum}"
            )));
        }
        let mut publics = self.public_indices.clone();
        publics.sort_unstable();
        publics.dedup();
        if publics.len() != self.public_indices.len() {
            return Err(Error::Invalid("duplicate public indices".into()));
        }
        if self.sigma.len() != d || self.sigma.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Invalid("sigma must be +/-1 of length d".into()));
        }
        Ok(())
    }
}

/// Structural parameters of an encoded dataset, carried in the container
/// header so attacks can run without the ground truth sidecar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetParams {
    pub k: usize,
    pub epochs: usize,
    pub num_private: usize,
    pub num_classes: usize,
    pub shape: Shape,
    pub sign_flip: bool,
    pub public_pool_size: usize,
}

/// An encoded dataset plus its optional ground-truth sidecar. The sidecar
/// is written to a separate file and is never consumed by attack stages.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub encodings: Vec<EncodedImage>,
    pub params: DatasetParams,
    pub ground_truth: Option<Vec<MixRecord>>,
}

impl EncodedDataset {
    pub fn len(&self) -> usize {
        self.encodings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.encodings.is_empty()
    }

    /// Checks the count and per-epoch pairing invariants against the sidecar.
    pub fn validate_ground_truth(&self) -> Result<()> {
        let records = match &self.ground_truth {
            Some(r) => r,
            None => return Ok(()),
        };
        let expect = self.params.epochs * self.params.num_private;
        if records.len() != self.encodings.len() || records.len() != expect {
            return Err(Error::Invalid(format!(
                "expected {} records, got {}",
                expect,
                records.len()
            )));
        }
        let d = self.params.shape.len();
        for epoch in 0..self.params.epochs {
            let mut seen = vec![0usize; self.params.num_private];
            for rec in records.iter().filter(|r| r.epoch == epoch) {
                rec.validate(self.params.num_private, d)?;
                seen[rec.private_indices.0] += 1;
                seen[rec.private_indices.1] += 1;
            }
            if seen.iter().any(|&c| c != 2) {
                return Err(Error::Invalid(format!(
                    "epoch {epoch}: some private index does not appear exactly twice"
                )));
            }
        }
        Ok(())
    }
}

/// The private training set: images plus one-hot labels.
#[derive(Debug, Clone)]
pub struct PrivateDataset {
    pub images: Vec<Image>,
    pub labels: Vec<LabelVector>,
}

impl PrivateDataset {
    pub fn new(images: Vec<Image>, labels: Vec<LabelVector>) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::Invalid(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        if let Some(i) = labels.iter().position(|l| !l.is_one_hot()) {
            return Err(Error::InvalidLabel(format!("label {i} is not one-hot")));
        }
        Ok(PrivateDataset { images, labels })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// The public mixing pool: unlabeled images.
#[derive(Debug, Clone)]
pub struct PublicPool {
    pub images: Vec<Image>,
}

impl PublicPool {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}
