//! Image recovery: weight read-off from mixed labels, the abs-mean
//! baseline, exact least squares for unmasked data, projected gradient
//! descent with greedy sign branches for masked data, and the
//! single-encoding subtraction attack.

use crate::assignment::AssignmentMap;
use crate::error::{Error, Result};
use crate::metrics::ssim;
use crate::types::{EncodedDataset, EncodedImage, Image, LabelVector, PublicPool, Shape};

/// Per-pixel solver domain. The default is the image gamut `[0, 1]`, under
/// which `abs(A') = A'` holds identically; the symmetric `[-1, 1]` box is
/// available as a configuration switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverBox {
    pub lo: f64,
    pub hi: f64,
}

impl SolverBox {
    pub fn unit() -> Self {
        SolverBox { lo: 0.0, hi: 1.0 }
    }

    pub fn symmetric() -> Self {
        SolverBox { lo: -1.0, hi: 1.0 }
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }
}

/// The linear system solved during recovery: a sparse weight matrix with
/// two entries per row, and the observed pixel matrix.
pub struct MixSystem {
    /// Per encoding row: `[(source_a, lambda_a), (source_b, lambda_b)]`.
    pub rows: Vec<[(usize, f64); 2]>,
    /// Row-major `|E| x d` observations; absolute values for the full attack.
    pub b: Vec<f64>,
    pub num_sources: usize,
    pub shape: Shape,
    pub d: usize,
    pub domain: SolverBox,
}

impl MixSystem {
    pub fn from_rows(
        rows: Vec<[(usize, f64); 2]>,
        b: Vec<f64>,
        num_sources: usize,
        shape: Shape,
        domain: SolverBox,
    ) -> Result<Self> {
        let d = shape.len();
        if b.len() != rows.len() * d {
            return Err(Error::Invalid(format!(
                "observation matrix is {} values, expected {}",
                b.len(),
                rows.len() * d
            )));
        }
        for row in &rows {
            if row[0].0 == row[1].0 || row[0].0 >= num_sources || row[1].0 >= num_sources {
                return Err(Error::Invalid("bad row sources".into()));
            }
            if row[0].1 <= 0.0 || row[1].1 <= 0.0 || row[0].1 + row[1].1 > 1.0 + 1e-9 {
                return Err(Error::InvalidWeights(format!(
                    "row weights ({}, {}) invalid",
                    row[0].1, row[1].1
                )));
            }
        }
        Ok(MixSystem {
            rows,
            b,
            num_sources,
            shape,
            d,
            domain,
        })
    }

    /// Builds the system from a recovered assignment. `take_abs` applies
    /// the absolute value to the observations (the full-attack form).
    pub fn from_assignment(
        assignment: &AssignmentMap,
        ds: &EncodedDataset,
        num_sources: usize,
        take_abs: bool,
        domain: SolverBox,
    ) -> Result<Self> {
        let d = ds.params.shape.len();
        let mut rows = Vec::with_capacity(ds.len());
        let mut b = Vec::with_capacity(ds.len() * d);
        for (e, enc) in ds.encodings.iter().enumerate() {
            let (sa, sb) = assignment.pairs[e];
            let (la, lb) = assignment.lambdas[e];
            rows.push([(sa, la), (sb, lb)]);
            if take_abs {
                b.extend(enc.pixels().iter().map(|&p| p.abs() as f64));
            } else {
                b.extend(enc.pixels().iter().map(|&p| p as f64));
            }
        }
        Self::from_rows(rows, b, num_sources, ds.params.shape, domain)
    }

    /// True when the pairing graph is disconnected or some source never
    /// appears; the usual way the system loses rank.
    fn possibly_rank_deficient(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.num_sources).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let root = find(parent, parent[x]);
                parent[x] = root;
            }
            parent[x]
        }
        let mut seen = vec![false; self.num_sources];
        for row in &self.rows {
            let (a, b) = (row[0].0, row[1].0);
            seen[a] = true;
            seen[b] = true;
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        if seen.iter().any(|&s| !s) {
            return true;
        }
        let root = find(&mut parent, 0);
        (0..self.num_sources).any(|x| find(&mut parent, x) != root)
    }
}

/// Output of a recovery solver.
pub struct ReconstructionResult {
    /// Recovered images, clamped into `[0, 1]` for export (the solver box
    /// constraint is enforced on the raw solution).
    pub images: Vec<Image>,
    /// Raw solution matrix, row-major `num_sources x d`, inside the box.
    pub solution: Vec<f64>,
    /// Objective value per iteration (a single entry for direct solvers).
    pub objective_trace: Vec<f64>,
    pub method: &'static str,
    /// Set when the pairing graph was disconnected and the ridge term
    /// effectively chose a minimum-norm solution.
    pub rank_warning: bool,
}

impl ReconstructionResult {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().unwrap_or(&f64::NAN)
    }

    fn from_solution(
        solution: Vec<f64>,
        num_sources: usize,
        d: usize,
        shape: Shape,
        objective_trace: Vec<f64>,
        method: &'static str,
        rank_warning: bool,
    ) -> Self {
        let images = (0..num_sources)
            .map(|s| {
                Image::from_unclamped(shape, solution[s * d..(s + 1) * d].iter().map(|&v| v.abs()))
            })
            .collect();
        ReconstructionResult {
            images,
            solution,
            objective_trace,
            method,
            rank_warning,
        }
    }
}

/// The unordered weight pair and its classes, read off a mixed label.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaRecovery {
    /// The two private weights, ordered by class index.
    pub lambdas: (f64, f64),
    /// Class of each weight; equal for a same-class mix.
    pub classes: (usize, usize),
}

/// Reads the private mix weights off a mixed label: the nonzero entries
/// are the weights; a single nonzero entry `l` means a same-class mix and
/// is split as `l/2, l/2`.
pub fn recover_lambdas(z: &LabelVector) -> Result<LambdaRecovery> {
    let nonzero: Vec<(usize, f64)> = z
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 1e-9)
        .map(|(i, &p)| (i, p))
        .collect();
    match nonzero.as_slice() {
        [(class, l)] => Ok(LambdaRecovery {
            lambdas: (l / 2.0, l / 2.0),
            classes: (*class, *class),
        }),
        [(c1, l1), (c2, l2)] => Ok(LambdaRecovery {
            lambdas: (*l1, *l2),
            classes: (*c1, *c2),
        }),
        other => Err(Error::InvalidMixedLabel {
            nonzero: other.len(),
        }),
    }
}

/// Pixel-wise mean of the absolute encodings per recovered clique.
pub fn abs_mean_baseline(cliques: &[Vec<usize>], ds: &EncodedDataset) -> Result<Vec<Image>> {
    let shape = ds.params.shape;
    let d = shape.len();
    let means = crate::par::map_indexed(cliques.len(), |s| -> Result<Vec<f64>> {
        let clique = &cliques[s];
        if clique.is_empty() {
            return Err(Error::EmptyClique(s));
        }
        let mut acc = vec![0.0f64; d];
        for &e in clique {
            for (a, &p) in acc.iter_mut().zip(ds.encodings[e].pixels()) {
                *a += p.abs() as f64;
            }
        }
        for a in &mut acc {
            *a /= clique.len() as f64;
        }
        Ok(acc)
    });
    means
        .into_iter()
        .map(|m| m.map(|v| Image::from_unclamped(shape, v)))
        .collect()
}

/// Raw abs-mean vectors (not clamped), used by the weight-pairing step.
pub fn abs_mean_vectors(cliques: &[Vec<usize>], ds: &EncodedDataset) -> Result<Vec<Vec<f64>>> {
    let d = ds.params.shape.len();
    let means = crate::par::map_indexed(cliques.len(), |s| -> Result<Vec<f64>> {
        if cliques[s].is_empty() {
            return Err(Error::EmptyClique(s));
        }
        let mut acc = vec![0.0f64; d];
        for &e in &cliques[s] {
            for (a, &p) in acc.iter_mut().zip(ds.encodings[e].pixels()) {
                *a += p.abs() as f64;
            }
        }
        for a in &mut acc {
            *a /= cliques[s].len() as f64;
        }
        Ok(acc)
    });
    means.into_iter().collect()
}

const RIDGE: f64 = 1e-8;

/// Box-constrained least squares `min |B - M A'|^2` for unmasked data:
/// conjugate gradient on the ridge-regularized normal equations, one
/// independent solve per pixel column, then projection onto the box.
pub fn solve_least_squares(sys: &MixSystem) -> Result<ReconstructionResult> {
    let n = sys.num_sources;
    let rank_warning = sys.possibly_rank_deficient();
    // Dense normal matrix G = M^T M + ridge I; n stays desk-scale.
    let mut gram = vec![0.0f64; n * n];
    for row in &sys.rows {
        let [(a, la), (b, lb)] = *row;
        gram[a * n + a] += la * la;
        gram[b * n + b] += lb * lb;
        gram[a * n + b] += la * lb;
        gram[b * n + a] += la * lb;
    }
    for i in 0..n {
        gram[i * n + i] += RIDGE;
    }
    let columns = crate::par::map_indexed(sys.d, |col| {
        let mut rhs = vec![0.0f64; n];
        for (r, row) in sys.rows.iter().enumerate() {
            let obs = sys.b[r * sys.d + col];
            rhs[row[0].0] += row[0].1 * obs;
            rhs[row[1].0] += row[1].1 * obs;
        }
        conjugate_gradient(&gram, &rhs, n)
    });
    let mut solution = vec![0.0f64; n * sys.d];
    for (col, values) in columns.into_iter().enumerate() {
        for (s, v) in values.into_iter().enumerate() {
            solution[s * sys.d + col] = sys.domain.clamp(v);
        }
    }
    let objective = residual_objective(sys, &solution);
    Ok(ReconstructionResult::from_solution(
        solution,
        n,
        sys.d,
        sys.shape,
        vec![objective],
        "least_squares",
        rank_warning,
    ))
}

/// `|B - M A|^2` on the current solution.
pub fn residual_objective(sys: &MixSystem, solution: &[f64]) -> f64 {
    let d = sys.d;
    let per_row = crate::par::map_indexed(sys.rows.len(), |r| {
        let [(a, la), (b, lb)] = sys.rows[r];
        let mut acc = 0.0;
        for col in 0..d {
            let pred = la * solution[a * d + col] + lb * solution[b * d + col];
            let diff = sys.b[r * d + col] - pred;
            acc += diff * diff;
        }
        acc
    });
    per_row.iter().sum()
}

fn conjugate_gradient(gram: &[f64], rhs: &[f64], n: usize) -> Vec<f64> {
    let mut x = vec![0.0f64; n];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut rs_old: f64 = r.iter().map(|v| v * v).sum();
    let rhs_norm = rs_old.sqrt().max(1e-300);
    for _ in 0..4 * n {
        if rs_old.sqrt() / rhs_norm < 1e-13 {
            break;
        }
        let mut gp = vec![0.0f64; n];
        for i in 0..n {
            let mut acc = 0.0;
            let row = &gram[i * n..(i + 1) * n];
            for (j, &pj) in p.iter().enumerate() {
                acc += row[j] * pj;
            }
            gp[i] = acc;
        }
        let denom: f64 = p.iter().zip(&gp).map(|(a, b)| a * b).sum();
        if denom <= 0.0 {
            break;
        }
        let alpha = rs_old / denom;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * gp[i];
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rs_new / rs_old;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs_old = rs_new;
    }
    x
}

/// Gradient-descent options for the masked-data solver.
#[derive(Debug, Clone)]
pub struct GdOptions {
    /// Minimize the l1 norm of the residual instead of l2.
    pub l1: bool,
    pub max_steps: usize,
    pub initial_step: f64,
    /// Steps between scheduled halvings of the step size.
    pub halve_every: usize,
    /// Stop when the relative objective decrease over this window drops
    /// below `tolerance`.
    pub window: usize,
    pub tolerance: f64,
}

impl Default for GdOptions {
    fn default() -> Self {
        GdOptions {
            l1: false,
            max_steps: 2000,
            initial_step: 0.1,
            halve_every: 200,
            window: 50,
            tolerance: 1e-6,
        }
    }
}

/// Projected gradient descent for the masked system: the observations are
/// `abs(B)`, the model is `M abs(A') + sigma = abs(B)`, and each residual
/// entry greedily takes the smaller-magnitude of its two sign branches
/// (`+abs(B) - P` vs `-abs(B) - P`, which is `sign(P) * abs(B) - P`).
/// Branches are re-chosen every iteration; a backtracking fallback keeps
/// the objective non-increasing. Warm start is the per-source abs-mean.
pub fn solve_abs_gd(sys: &MixSystem, opts: &GdOptions) -> Result<ReconstructionResult> {
    let n = sys.num_sources;
    let d = sys.d;
    let num_rows = sys.rows.len();
    let rank_warning = sys.possibly_rank_deficient();

    // Incidence lists: for each source, the rows it participates in.
    let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (r, row) in sys.rows.iter().enumerate() {
        incident[row[0].0].push((r, row[0].1));
        incident[row[1].0].push((r, row[1].1));
    }

    // Warm start: abs-mean of each source's rows, clamped to the box.
    let mut a = vec![0.0f64; n * d];
    for s in 0..n {
        if incident[s].is_empty() {
            continue;
        }
        for col in 0..d {
            let mean: f64 = incident[s]
                .iter()
                .map(|&(r, _)| sys.b[r * d + col])
                .sum::<f64>()
                / incident[s].len() as f64;
            a[s * d + col] = sys.domain.clamp(mean);
        }
    }

    let objective_of = |a: &[f64], p: &mut [f64]| -> f64 {
        // P = M abs(A); sigma = sign(P) * b - P, entrywise.
        crate::par::for_each_chunk_mut(p, d, |r, row| {
            let [(sa, la), (sb, lb)] = sys.rows[r];
            for (col, cell) in row.iter_mut().enumerate() {
                *cell = la * a[sa * d + col].abs() + lb * a[sb * d + col].abs();
            }
        });
        let per_row = crate::par::map_indexed(num_rows, |r| {
            let mut acc = 0.0;
            for col in 0..d {
                let pred = p[r * d + col];
                let s = if pred >= 0.0 { 1.0 } else { -1.0 };
                let sigma = s * sys.b[r * d + col] - pred;
                acc += if opts.l1 { sigma.abs() } else { sigma * sigma };
            }
            acc
        });
        per_row.iter().sum()
    };

    let mut pred = vec![0.0f64; num_rows * d];
    let mut objective = objective_of(&a, &mut pred);
    if objective.is_nan() {
        return Err(Error::NanObjective(0));
    }
    let mut trace = vec![objective];
    let mut step = opts.initial_step;
    let mut gradient = vec![0.0f64; n * d];
    let mut candidate = vec![0.0f64; n * d];
    let mut scratch = vec![0.0f64; num_rows * d];

    for iter in 1..=opts.max_steps {
        if iter % opts.halve_every == 0 {
            step /= 2.0;
        }
        // dObj/dP with frozen branches, then chain through M and sign(A).
        let dobj: Vec<f64> = crate::par::map_indexed(num_rows * d, |idx| {
            let p = pred[idx];
            let s = if p >= 0.0 { 1.0 } else { -1.0 };
            let sigma = s * sys.b[idx] - p;
            if opts.l1 {
                -sigma.signum()
            } else {
                -2.0 * sigma
            }
        });
        crate::par::for_each_chunk_mut(&mut gradient, d, |s, grow| {
            for (col, cell) in grow.iter_mut().enumerate() {
                let mut acc = 0.0;
                for &(r, lam) in &incident[s] {
                    acc += lam * dobj[r * d + col];
                }
                let sign_a = if a[s * d + col] < 0.0 { -1.0 } else { 1.0 };
                *cell = sign_a * acc;
            }
        });

        // Projected step with backtracking: keep halving until the
        // objective does not increase.
        let mut accepted = false;
        for _ in 0..40 {
            for i in 0..candidate.len() {
                candidate[i] = sys.domain.clamp(a[i] - step * gradient[i]);
            }
            let new_objective = objective_of(&candidate, &mut scratch);
            if new_objective.is_nan() {
                return Err(Error::NanObjective(iter));
            }
            if new_objective <= objective + 1e-12 {
                std::mem::swap(&mut a, &mut candidate);
                std::mem::swap(&mut pred, &mut scratch);
                objective = new_objective;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted {
            break;
        }
        trace.push(objective);
        if trace.len() > opts.window {
            let past = trace[trace.len() - 1 - opts.window];
            if past - objective < opts.tolerance * past.max(1e-300) {
                break;
            }
        }
    }

    Ok(ReconstructionResult::from_solution(
        a,
        n,
        d,
        sys.shape,
        trace,
        if opts.l1 { "abs_gd_l1" } else { "abs_gd_l2" },
        rank_warning,
    ))
}

/// Supplies the demasked mixture for one encoding; stands in for the
/// re-colorizer of the original attack. The ground-truth mask is the
/// desk-scale instantiation.
pub trait SignOracle {
    fn demask(&self, encoding: &EncodedImage) -> Result<Vec<f32>>;
}

/// Oracle backed by a known sign mask.
pub struct KnownSigma<'a>(pub &'a [i8]);

impl SignOracle for KnownSigma<'_> {
    fn demask(&self, encoding: &EncodedImage) -> Result<Vec<f32>> {
        if self.0.len() != encoding.pixels().len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} signs", encoding.pixels().len()),
                got: format!("{}", self.0.len()),
            });
        }
        Ok(encoding
            .pixels()
            .iter()
            .zip(self.0)
            .map(|(&p, &s)| p * s as f32)
            .collect())
    }
}

/// Result of the single-encoding attack.
#[derive(Debug, Clone)]
pub struct SingleEncodingRecovery {
    pub image: Image,
    /// Public pool indices subtracted, in selection order.
    pub public_indices: Vec<usize>,
}

/// Recovers a private mixture from one encoding: demask via the oracle,
/// then `k - 2` times pick the public image most similar to the residual,
/// subtract it at the guessed weight `1/k`, and clamp. The residual is
/// rescaled by the private mass read off the mixed label.
pub fn single_encoding_attack(
    encoding: &EncodedImage,
    pool: &PublicPool,
    k: usize,
    oracle: &dyn SignOracle,
) -> Result<SingleEncodingRecovery> {
    if k < 2 {
        return Err(Error::InvalidConfig("k must be >= 2".into()));
    }
    if pool.len() < k - 2 {
        return Err(Error::PoolTooSmall {
            pool: pool.len(),
            k,
            needed: k - 2,
        });
    }
    let shape = encoding.shape();
    let demasked = oracle.demask(encoding)?;
    let mut residual: Vec<f64> = demasked.iter().map(|&p| p as f64).collect();
    let mut chosen = Vec::with_capacity(k - 2);
    let mut used = vec![false; pool.len()];
    for _ in 0..k.saturating_sub(2) {
        let current = Image::from_unclamped(shape, residual.iter().copied());
        let mut best: Option<(usize, f64)> = None;
        for (p, img) in pool.images.iter().enumerate() {
            if used[p] {
                continue;
            }
            let s = ssim(&current, img)?;
            match best {
                Some((_, bs)) if s <= bs => {}
                _ => best = Some((p, s)),
            }
        }
        let (pick, _) = best.expect("pool large enough");
        used[pick] = true;
        chosen.push(pick);
        for (r, &p) in residual.iter_mut().zip(pool.images[pick].pixels()) {
            *r = (*r - p as f64 / k as f64).clamp(0.0, 1.0);
        }
    }
    let private_mass = encoding.label().sum();
    let scale = if private_mass > 1e-9 {
        1.0 / private_mass
    } else {
        k as f64 / 2.0
    };
    let image = Image::from_unclamped(shape, residual.iter().map(|&r| r * scale));
    Ok(SingleEncodingRecovery {
        image,
        public_indices: chosen,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{encode_dataset, generate_public_pool, generate_synthetic, EncoderConfig, ymix};
    use crate::types::Shape;

    #[test]
    fn lambda_read_off_two_classes() {
        let z = LabelVector::new(vec![0.6, 0.4, 0.0]).unwrap();
        let got = recover_lambdas(&z).unwrap();
        assert_eq!(got.lambdas, (0.6, 0.4));
        assert_eq!(got.classes, (0, 1));
    }

    #[test]
    fn lambda_same_class_splits_evenly() {
        let z = LabelVector::new(vec![0.75, 0.0]).unwrap();
        let got = recover_lambdas(&z).unwrap();
        assert_eq!(got.lambdas, (0.375, 0.375));
        assert_eq!(got.classes, (0, 0));
    }

    #[test]
    fn lambda_round_trips_ymix() {
        let yi = LabelVector::one_hot(1, 5).unwrap();
        let yj = LabelVector::one_hot(3, 5).unwrap();
        let z = ymix(&yi, &yj, &[0.55, 0.45]).unwrap();
        let got = recover_lambdas(&z).unwrap();
        assert!((got.lambdas.0 - 0.55).abs() <= 1e-9);
        assert!((got.lambdas.1 - 0.45).abs() <= 1e-9);
        assert_eq!(got.classes, (1, 3));
    }

    #[test]
    fn lambda_rejects_corrupt_labels() {
        let z = LabelVector::new(vec![0.3, 0.3, 0.4]).unwrap();
        assert!(matches!(
            recover_lambdas(&z),
            Err(Error::InvalidMixedLabel { nonzero: 3 })
        ));
        let zero = LabelVector::new(vec![0.0, 0.0]).unwrap();
        assert!(recover_lambdas(&zero).is_err());
    }

    fn planted(sign_flip: bool, k: usize, seed: u32) -> (crate::types::PrivateDataset, crate::types::PublicPool, EncodedDataset) {
        let shape = Shape::new(6, 6, 1);
        let private = generate_synthetic(8, shape, 4, seed).unwrap();
        let pool_size = if k > 2 { 12 } else { 0 };
        let pool = generate_public_pool(pool_size, shape, seed);
        let cfg = EncoderConfig {
            k,
            epochs: 4,
            sign_flip,
            public_pool_size: pool_size,
            seed,
        };
        let ds = encode_dataset(&private, &pool, &cfg).unwrap();
        (private, pool, ds)
    }

    fn truth_system(ds: &EncodedDataset, take_abs: bool) -> MixSystem {
        let records = ds.ground_truth.as_ref().unwrap();
        let d = ds.params.shape.len();
        let rows: Vec<[(usize, f64); 2]> = records
            .iter()
            .map(|r| {
                [
                    (r.private_indices.0, r.lambdas[0]),
                    (r.private_indices.1, r.lambdas[1]),
                ]
            })
            .collect();
        let mut b = Vec::with_capacity(ds.len() * d);
        for enc in &ds.encodings {
            if take_abs {
                b.extend(enc.pixels().iter().map(|&p| p.abs() as f64));
            } else {
                b.extend(enc.pixels().iter().map(|&p| p as f64));
            }
        }
        MixSystem::from_rows(rows, b, ds.params.num_private, ds.params.shape, SolverBox::unit()).unwrap()
    }

    #[test]
    fn least_squares_exact_for_k2_no_flip() {
        let (private, _, ds) = planted(false, 2, 71);
        let sys = truth_system(&ds, false);
        let result = solve_least_squares(&sys).unwrap();
        let d = sys.d;
        for (s, orig) in private.images.iter().enumerate() {
            for (col, &p) in orig.pixels().iter().enumerate() {
                let err = (result.solution[s * d + col] - p as f64).abs();
                assert!(err < 1e-3, "source {s} pixel {col}: err {err}");
            }
        }
        assert!(result.final_objective() < 1e-9);
    }

    #[test]
    fn least_squares_identity_rows() {
        // Rows with weights concentrated on one source: A' ~ B.
        let shape = Shape::new(2, 2, 1);
        let rows = vec![
            [(0usize, 1.0 - 1e-12), (1usize, 1e-12)],
            [(1, 1.0 - 1e-12), (0, 1e-12)],
        ];
        let b = vec![0.2, 0.4, 0.6, 0.8, 0.9, 0.7, 0.5, 0.3];
        let sys = MixSystem::from_rows(rows, b.clone(), 2, shape, SolverBox::unit()).unwrap();
        let result = solve_least_squares(&sys).unwrap();
        for i in 0..8 {
            assert!((result.solution[i] - b[i]).abs() < 1e-5);
        }
    }

    #[test]
    fn objective_at_truth_is_public_noise() {
        let (private, _, ds) = planted(false, 4, 72);
        let sys = truth_system(&ds, false);
        let d = sys.d;
        let mut truth = vec![0.0f64; ds.params.num_private * d];
        for (s, img) in private.images.iter().enumerate() {
            for (col, &p) in img.pixels().iter().enumerate() {
                truth[s * d + col] = p as f64;
            }
        }
        let at_truth = residual_objective(&sys, &truth);
        // Residual at the truth is exactly the public-image contribution.
        let records = ds.ground_truth.as_ref().unwrap();
        let pool = generate_public_pool(12, Shape::new(6, 6, 1), 72);
        let mut noise = 0.0f64;
        for (rec, enc) in records.iter().zip(&ds.encodings) {
            for col in 0..d {
                let mut public_part = enc.pixels()[col] as f64
                    - rec.lambdas[0] * private.images[rec.private_indices.0].pixels()[col] as f64
                    - rec.lambdas[1] * private.images[rec.private_indices.1].pixels()[col] as f64;
                // Equivalent direct form, kept for the cross-check:
                let mut direct = 0.0;
                for (j, &pi) in rec.public_indices.iter().enumerate() {
                    direct += rec.lambdas[j + 2] * pool.images[pi].pixels()[col] as f64;
                }
                assert!((public_part - direct).abs() < 1e-5);
                public_part = direct;
                noise += public_part * public_part;
            }
        }
        let rel = (at_truth - noise).abs() / noise.max(1e-12);
        assert!(rel < 1e-4, "objective {at_truth} vs noise norm {noise}");
    }

    #[test]
    fn abs_gd_objective_is_monotone() {
        let (_, _, ds) = planted(true, 4, 73);
        let sys = truth_system(&ds, true);
        let result = solve_abs_gd(&sys, &GdOptions::default()).unwrap();
        for w in result.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "objective rose: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn abs_gd_agrees_with_least_squares_on_no_flip_data() {
        let (_, _, ds) = planted(false, 4, 74);
        let sys = truth_system(&ds, true); // abs is a no-op on nonnegative B
        let gd = solve_abs_gd(&sys, &GdOptions::default()).unwrap();
        let ls = solve_least_squares(&truth_system(&ds, false)).unwrap();
        let d = sys.d;
        let mut max_err = 0.0f64;
        for i in 0..ds.params.num_private * d {
            max_err = max_err.max((gd.solution[i] - ls.solution[i]).abs());
        }
        assert!(max_err < 1e-2, "max deviation {max_err}");
    }

    #[test]
    fn abs_gd_gradient_matches_finite_differences() {
        // Small random instance; central differences at the warm start.
        let (_, _, ds) = planted(true, 3, 75);
        let mut sys = truth_system(&ds, true);
        sys.rows.truncate(6);
        sys.b.truncate(6 * sys.d);
        let opts = GdOptions {
            max_steps: 0,
            ..GdOptions::default()
        };
        let base = solve_abs_gd(&sys, &opts).unwrap();
        let mut a = base.solution.clone();
        // Nudge strictly inside the box so clamping is inactive.
        for v in &mut a {
            *v = v.clamp(0.05, 0.95);
        }
        let objective = |a: &[f64]| -> f64 {
            let d = sys.d;
            let mut acc = 0.0;
            for (r, row) in sys.rows.iter().enumerate() {
                let [(sa, la), (sb, lb)] = *row;
                for col in 0..d {
                    let p = la * a[sa * d + col].abs() + lb * a[sb * d + col].abs();
                    let sigma = if p >= 0.0 { sys.b[r * d + col] - p } else { -sys.b[r * d + col] - p };
                    acc += sigma * sigma;
                }
            }
            acc
        };
        // Analytic gradient with frozen branches.
        let d = sys.d;
        let mut grad = vec![0.0f64; a.len()];
        for (r, row) in sys.rows.iter().enumerate() {
            let [(sa, la), (sb, lb)] = *row;
            for col in 0..d {
                let p = la * a[sa * d + col].abs() + lb * a[sb * d + col].abs();
                let sigma = if p >= 0.0 { sys.b[r * d + col] - p } else { -sys.b[r * d + col] - p };
                let dp = -2.0 * sigma;
                grad[sa * d + col] += la * dp * a[sa * d + col].signum();
                grad[sb * d + col] += lb * dp * a[sb * d + col].signum();
            }
        }
        let h = 1e-6;
        let mut checked = 0;
        for idx in (0..a.len()).step_by(a.len() / 17 + 1) {
            let mut plus = a.clone();
            plus[idx] += h;
            let mut minus = a.clone();
            minus[idx] -= h;
            let numeric = (objective(&plus) - objective(&minus)) / (2.0 * h);
            let denom = numeric.abs().max(grad[idx].abs()).max(1e-6);
            assert!(
                (numeric - grad[idx]).abs() / denom < 1e-4,
                "index {idx}: numeric {numeric} vs analytic {}",
                grad[idx]
            );
            checked += 1;
        }
        assert!(checked > 5);
    }

    #[test]
    fn greedy_branch_choice_dominates() {
        // For every entry, the chosen branch is the smaller magnitude.
        let (_, _, ds) = planted(true, 4, 76);
        let sys = truth_system(&ds, true);
        let result = solve_abs_gd(
            &sys,
            &GdOptions {
                max_steps: 20,
                ..GdOptions::default()
            },
        )
        .unwrap();
        let d = sys.d;
        for (r, row) in sys.rows.iter().enumerate().take(40) {
            let [(sa, la), (sb, lb)] = *row;
            for col in (0..d).step_by(7) {
                let p = la * result.solution[sa * d + col].abs()
                    + lb * result.solution[sb * d + col].abs();
                let b = sys.b[r * d + col];
                let chosen = if p >= 0.0 { b - p } else { -b - p };
                let other = if p >= 0.0 { -b - p } else { b - p };
                assert!(chosen.abs() <= other.abs() + 1e-12);
            }
        }
    }

    #[test]
    fn single_encoding_attack_identifies_plants() {
        // Planted k=4 mix with lambda exactly 1/4 and near-orthogonal
        // public content.
        let shape = Shape::new(8, 8, 1);
        let private = generate_synthetic(4, shape, 2, 81).unwrap();
        let pool = generate_public_pool(6, shape, 81);
        let lambdas = [0.25, 0.25, 0.25, 0.25];
        let sigma = vec![1i8; shape.len()];
        let pixels = crate::encoder::xmix(
            (&private.images[0], &private.images[1]),
            &[&pool.images[2], &pool.images[5]],
            &lambdas,
            &sigma,
        )
        .unwrap();
        let label = ymix(&private.labels[0], &private.labels[1], &lambdas).unwrap();
        let enc = EncodedImage::new(shape, pixels, label).unwrap();
        let oracle = KnownSigma(&sigma);
        let got = single_encoding_attack(&enc, &pool, 4, &oracle).unwrap();
        let mut found: Vec<usize> = got.public_indices.clone();
        found.sort_unstable();
        assert_eq!(found, vec![2, 5]);
    }

    #[test]
    fn single_encoding_attack_k2_passthrough() {
        let shape = Shape::new(4, 4, 1);
        let private = generate_synthetic(2, shape, 2, 82).unwrap();
        let pool = crate::types::PublicPool { images: vec![] };
        let lambdas = [0.6, 0.4];
        let sigma = vec![1i8; shape.len()];
        let pixels = crate::encoder::xmix(
            (&private.images[0], &private.images[1]),
            &[],
            &lambdas,
            &sigma,
        )
        .unwrap();
        let label = ymix(&private.labels[0], &private.labels[1], &lambdas).unwrap();
        let enc = EncodedImage::new(shape, pixels.clone(), label).unwrap();
        let got = single_encoding_attack(&enc, &pool, 2, &KnownSigma(&sigma)).unwrap();
        assert!(got.public_indices.is_empty());
        for (r, &p) in got.image.pixels().iter().zip(&pixels) {
            assert!((r - p).abs() < 1e-6); // lambda sum is 1 at k = 2
        }
    }

    #[test]
    fn single_encoding_attack_rejects_small_pool() {
        let shape = Shape::new(4, 4, 1);
        let private = generate_synthetic(2, shape, 2, 83).unwrap();
        let pool = crate::types::PublicPool { images: vec![private.images[0].clone()] };
        let sigma = vec![1i8; shape.len()];
        let pixels = crate::encoder::xmix(
            (&private.images[0], &private.images[1]),
            &[],
            &[0.5, 0.5],
            &sigma,
        )
        .unwrap();
        let label = ymix(&private.labels[0], &private.labels[1], &[0.5, 0.5]).unwrap();
        let enc = EncodedImage::new(shape, pixels, label).unwrap();
        assert!(matches!(
            single_encoding_attack(&enc, &pool, 4, &KnownSigma(&sigma)),
            Err(Error::PoolTooSmall { .. })
        ));
    }
}
