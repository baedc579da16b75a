//! Image-quality metrics (SSIM, PSNR, RMSE) and recovered-to-original
//! matching for blind evaluation.
//!
//! SSIM here uses a uniform 8x8 sliding window (stride 1) rather than the
//! reference 11x11 Gaussian window; the images in this lab are as small as
//! 16x16. Constants are the standard C1 = (0.01)^2, C2 = (0.03)^2 with
//! dynamic range 1.

use crate::error::{Error, Result};
use crate::mcmf::MinCostFlow;
use crate::types::Image;

const C1: f64 = 0.01 * 0.01;
const C2: f64 = 0.03 * 0.03;
const WINDOW: usize = 8;
const COST_SCALE: f64 = 1e6;

/// Mean local SSIM over sliding windows, channels averaged. Images smaller
/// than the window fall back to one full-image window.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape().to_string(),
            got: b.shape().to_string(),
        });
    }
    let shape = a.shape();
    let (h, w, c) = (shape.height, shape.width, shape.channels);
    let wh = WINDOW.min(h);
    let ww = WINDOW.min(w);
    let mut total = 0.0;
    for ch in 0..c {
        let mut channel_sum = 0.0;
        let mut windows = 0usize;
        for y0 in 0..=(h - wh) {
            for x0 in 0..=(w - ww) {
                channel_sum += window_ssim(a, b, y0, x0, wh, ww, ch);
                windows += 1;
            }
        }
        total += channel_sum / windows as f64;
    }
    Ok(total / c as f64)
}

fn window_ssim(a: &Image, b: &Image, y0: usize, x0: usize, wh: usize, ww: usize, ch: usize) -> f64 {
    let shape = a.shape();
    let (w, c) = (shape.width, shape.channels);
    let n = (wh * ww) as f64;
    let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for y in y0..y0 + wh {
        for x in x0..x0 + ww {
            let pa = a.pixels()[(y * w + x) * c + ch] as f64;
            let pb = b.pixels()[(y * w + x) * c + ch] as f64;
            sa += pa;
            sb += pb;
            saa += pa * pa;
            sbb += pb * pb;
            sab += pa * pb;
        }
    }
    let mu_a = sa / n;
    let mu_b = sb / n;
    let var_a = (saa / n - mu_a * mu_a).max(0.0);
    let var_b = (sbb / n - mu_b * mu_b).max(0.0);
    let cov = sab / n - mu_a * mu_b;
    ((2.0 * mu_a * mu_b + C1) * (2.0 * cov + C2))
        / ((mu_a * mu_a + mu_b * mu_b + C1) * (var_a + var_b + C2))
}

/// Root mean squared error over all pixels.
pub fn rmse(a: &Image, b: &Image) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape().to_string(),
            got: b.shape().to_string(),
        });
    }
    let mse: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        / a.pixels().len() as f64;
    Ok(mse.sqrt())
}

/// Peak signal-to-noise ratio with dynamic range 1; infinite for
/// identical images.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    let r = rmse(a, b)?;
    if r == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(-20.0 * r.log10())
    }
}

/// Metrics for one matched (recovered, original) pair.
#[derive(Debug, Clone)]
pub struct PairMetrics {
    pub recovered_index: usize,
    pub original_index: usize,
    pub ssim: f64,
    pub psnr: f64,
    pub rmse: f64,
}

/// Result of matching recovered images to originals.
#[derive(Debug, Clone)]
pub struct MetricReport {
    pub pairs: Vec<PairMetrics>,
    pub mean_ssim: f64,
    pub mean_psnr: f64,
    pub mean_rmse: f64,
}

impl MetricReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("recovered_index,original_index,ssim,psnr,rmse\n");
        for p in &self.pairs {
            out.push_str(&format!(
                "{},{},{:.6},{:.4},{:.6}\n",
                p.recovered_index, p.original_index, p.ssim, p.psnr, p.rmse
            ));
        }
        out.push_str(&format!(
            "mean,,{:.6},{:.4},{:.6}\n",
            self.mean_ssim, self.mean_psnr, self.mean_rmse
        ));
        out
    }
}

/// Pairs each recovered image with a distinct original by maximizing total
/// SSIM, solved exactly as a min-cost assignment on quantized costs.
pub fn match_reconstructions(recovered: &[Image], originals: &[Image]) -> Result<MetricReport> {
    if recovered.len() != originals.len() || recovered.is_empty() {
        return Err(Error::Invalid(format!(
            "count mismatch: {} recovered vs {} originals",
            recovered.len(),
            originals.len()
        )));
    }
    let n = recovered.len();
    let scores = crate::par::map_indexed(n, |i| -> Result<Vec<f64>> {
        (0..n).map(|j| ssim(&recovered[i], &originals[j])).collect()
    });
    let scores: Result<Vec<Vec<f64>>> = scores.into_iter().collect();
    let scores = scores?;
    // Maximizing total SSIM == minimizing total (1 - SSIM); the constant
    // shift leaves the optimal assignment unchanged.
    let mut graph = MinCostFlow::new(2 + 2 * n);
    let (source, sink) = (0, 1);
    let mut cross = vec![vec![0usize; n]; n];
    for i in 0..n {
        graph.add_edge(source, 2 + i, 1, 0);
        graph.add_edge(2 + n + i, sink, 1, 0);
        for j in 0..n {
            let cost = ((1.0 - scores[i][j]) * COST_SCALE).round() as i64;
            cross[i][j] = graph.add_edge(2 + i, 2 + n + j, 1, cost.max(0));
        }
    }
    let (flow, _) = graph.solve(source, sink, n as i64);
    if flow != n as i64 {
        return Err(Error::InfeasibleFlow {
            routed: flow,
            required: n as i64,
        });
    }
    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        let j = (0..n)
            .find(|&j| graph.flow_on(cross[i][j]) == 1)
            .expect("saturated matching");
        pairs.push(PairMetrics {
            recovered_index: i,
            original_index: j,
            ssim: scores[i][j],
            psnr: psnr(&recovered[i], &originals[j])?,
            rmse: rmse(&recovered[i], &originals[j])?,
        });
    }
    let mean_ssim = pairs.iter().map(|p| p.ssim).sum::<f64>() / n as f64;
    let mean_psnr = pairs.iter().map(|p| p.psnr).sum::<f64>() / n as f64;
    let mean_rmse = pairs.iter().map(|p| p.rmse).sum::<f64>() / n as f64;
    Ok(MetricReport {
        pairs,
        mean_ssim,
        mean_psnr,
        mean_rmse,
    })
}
