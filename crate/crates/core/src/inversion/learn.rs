use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::dictionary::{DictMeta, PairedDictionary, PatchGeometry};
use super::omp::{pursue, SparseCode};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug)]
pub struct DictionaryConfig {
    /// `K`
    pub atoms: usize,
    /// `T`, maximum nonzeros per code.
    pub sparsity: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for DictionaryConfig {
    fn default() -> Self {
        DictionaryConfig {
            atoms: 128,
            sparsity: 4,
            iterations: 20,
            seed: 0,
        }
    }
}

/// Result of alternating pursuit / MOD on joint samples.
#[derive(Clone, Debug)]
pub struct JointLearning {
    pub dictionary: DMatrix<f64>,
    pub codes: Vec<SparseCode>,
    /// Mean squared reconstruction error of the initial dictionary's codes.
    pub initial_error: f64,
    /// Mean squared reconstruction error after each iteration.
    pub errors: Vec<f64>,
}

fn normalized(v: DVector<f64>) -> Option<DVector<f64>> {
    let n = v.norm();
    (n > 0.0).then(|| v / n)
}

/// `K` unit atoms drawn from distinct, nonzero samples (columns) in seeded
/// random order. Missing atoms (fewer usable samples than `K`) are seeded
/// Gaussian directions.
pub fn initial_atoms(samples: &DMatrix<f64>, k: usize, seed: u64) -> DMatrix<f64> {
    let dim = samples.nrows();
    let mut r = rng::stream(seed, rng::purpose::DICT_INIT);
    let mut order: Vec<usize> = (0..samples.ncols()).collect();
    order.shuffle(&mut r);
    let mut atoms = DMatrix::zeros(dim, k);
    let mut filled = 0;
    for i in order {
        if filled == k {
            break;
        }
        if let Some(a) = normalized(samples.column(i).into_owned()) {
            atoms.set_column(filled, &a);
            filled += 1;
        }
    }
    while filled < k {
        if let Some(a) = normalized(DVector::from_vec(rng::gaussian_vec(&mut r, dim))) {
            atoms.set_column(filled, &a);
            filled += 1;
        }
    }
    atoms
}

fn sample_error(dict: &DMatrix<f64>, z: DVector<f64>, code: &SparseCode) -> f64 {
    (z - code.reconstruct(dict)).norm_squared()
}

fn all_errors(dict: &DMatrix<f64>, samples: &DMatrix<f64>, codes: &[SparseCode]) -> Vec<f64> {
    codes
        .par_iter()
        .enumerate()
        .map(|(i, c)| sample_error(dict, samples.column(i).into_owned(), c))
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Least-squares atoms for fixed codes, `D = Z A^T (A A^T)^-1`, over the
/// atoms that appear in at least one code. Unused atoms are returned as-is.
fn mod_update(dict: &DMatrix<f64>, samples: &DMatrix<f64>, codes: &[SparseCode], used: &[usize]) -> DMatrix<f64> {
    let k = dict.ncols();
    let mut slot = vec![usize::MAX; k];
    for (s, &j) in used.iter().enumerate() {
        slot[j] = s;
    }
    let u = used.len();
    let mut gram = DMatrix::<f64>::zeros(u, u);
    let mut cross = DMatrix::<f64>::zeros(samples.nrows(), u);
    for (i, code) in codes.iter().enumerate() {
        let z = samples.column(i);
        for (&a, &va) in code.support.iter().zip(&code.values) {
            let sa = slot[a];
            cross.column_mut(sa).axpy(va, &z, 1.0);
            for (&b, &vb) in code.support.iter().zip(&code.values) {
                gram[(sa, slot[b])] += va * vb;
            }
        }
    }
    // gram * X = cross^T, D_used = X^T
    let rhs = cross.transpose();
    let solved = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => {
            let svd = gram.svd(true, true);
            let eps = u as f64 * f64::EPSILON * svd.singular_values.max();
            svd.solve(&rhs, eps).expect("both singular vector sets were computed")
        }
    };
    let mut out = dict.clone();
    for (s, &j) in used.iter().enumerate() {
        out.set_column(j, &solved.row(s).transpose());
    }
    out
}

/// Alternates pursuit coding and MOD updates from the given unit-column
/// starting dictionary.
///
/// The mean squared reconstruction error never increases from one iteration
/// to the next (up to rounding): a sample keeps its previous code when the
/// new pursuit is not strictly better, an update that would raise the error
/// is discarded, renormalization rescales the codes to match, and unused
/// atoms are replaced by the worst-reconstructed samples only while their
/// coefficients are all zero.
pub fn learn_joint(
    samples: &DMatrix<f64>,
    init: DMatrix<f64>,
    sparsity: usize,
    iterations: usize,
) -> Result<JointLearning> {
    let (dim, n) = samples.shape();
    let k = init.ncols();
    if n == 0 || dim == 0 {
        return Err(Error::Invalid("no training samples".into()));
    }
    if init.nrows() != dim {
        return Err(Error::Dimension(format!(
            "initial atoms of length {}, samples of length {dim}",
            init.nrows()
        )));
    }
    if k == 0 || sparsity == 0 || sparsity > k {
        return Err(Error::Invalid(format!("need 1 <= sparsity ({sparsity}) <= atoms ({k})")));
    }
    if iterations == 0 {
        return Err(Error::Invalid("need at least one iteration".into()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite training sample".into()));
    }

    let mut dict = init;
    let code_all = |dict: &DMatrix<f64>| -> Vec<SparseCode> {
        (0..n)
            .into_par_iter()
            .map(|i| pursue(dict, &samples.column(i).into_owned(), sparsity).code)
            .collect()
    };
    let mut codes = code_all(&dict);
    let mut errs = all_errors(&dict, samples, &codes);
    let initial_error = mean(&errs);
    let mut errors = Vec::with_capacity(iterations);

    for it in 0..iterations {
        if it > 0 {
            let fresh = code_all(&dict);
            let fresh_errs = all_errors(&dict, samples, &fresh);
            for (i, (code, e)) in fresh.into_iter().zip(fresh_errs).enumerate() {
                if e < errs[i] {
                    codes[i] = code;
                    errs[i] = e;
                }
            }
        }

        let mut usage = vec![false; k];
        for c in &codes {
            for &j in &c.support {
                usage[j] = true;
            }
        }
        let used: Vec<usize> = (0..k).filter(|&j| usage[j]).collect();
        if !used.is_empty() {
            let candidate = mod_update(&dict, samples, &codes, &used);
            let cand_errs = all_errors(&candidate, samples, &codes);
            if candidate.iter().all(|v| v.is_finite()) && mean(&cand_errs) <= mean(&errs) {
                dict = candidate;
            }
        }

        // Renormalize used atoms; atoms that collapsed to zero become unused.
        for &j in &used {
            let norm = dict.column(j).norm();
            if norm > 1e-12 {
                dict.column_mut(j).unscale_mut(norm);
                for c in codes.iter_mut() {
                    if let Ok(pos) = c.support.binary_search(&j) {
                        c.values[pos] *= norm;
                    }
                }
            } else {
                usage[j] = false;
                for c in codes.iter_mut() {
                    if let Ok(pos) = c.support.binary_search(&j) {
                        c.support.remove(pos);
                        c.values.remove(pos);
                    }
                }
            }
        }
        errs = all_errors(&dict, samples, &codes);

        let dead: Vec<usize> = (0..k).filter(|&j| !usage[j]).collect();
        if !dead.is_empty() {
            let mut worst: Vec<usize> = (0..n).collect();
            worst.sort_by(|&a, &b| errs[b].total_cmp(&errs[a]).then(a.cmp(&b)));
            let mut candidates = worst
                .into_iter()
                .filter_map(|i| normalized(samples.column(i).into_owned()));
            for j in dead {
                match candidates.next() {
                    Some(a) => dict.set_column(j, &a),
                    None => break,
                }
            }
        }
        errors.push(mean(&errs));
    }

    Ok(JointLearning {
        dictionary: dict,
        codes,
        initial_error,
        errors,
    })
}

/// Learns `(U, Vd)` from paired pixel patches and feature windows.
///
/// Joint samples are `[x / sqrt(D); y / sqrt(d)]`; the learned joint atoms
/// are split and unscaled at the end.
pub fn learn_paired_dictionary(
    pixel_patches: &[Vec<f64>],
    feat_patches: &[Vec<f64>],
    geometry: PatchGeometry,
    cfg: &DictionaryConfig,
) -> Result<PairedDictionary> {
    if pixel_patches.is_empty() {
        return Err(Error::Invalid("no training pairs".into()));
    }
    if pixel_patches.len() != feat_patches.len() {
        return Err(Error::Dimension(format!(
            "{} pixel patches vs {} feature windows",
            pixel_patches.len(),
            feat_patches.len()
        )));
    }
    if cfg.atoms == 0 {
        return Err(Error::Invalid("need at least one atom".into()));
    }
    let dp = geometry.pixel_dim();
    let df = feat_patches[0].len();
    if df == 0 {
        return Err(Error::Invalid("empty feature windows".into()));
    }
    if let Some(i) = pixel_patches.iter().position(|p| p.len() != dp) {
        return Err(Error::Dimension(format!(
            "pixel patch {i} has length {}, expected {dp}",
            pixel_patches[i].len()
        )));
    }
    if let Some(i) = feat_patches.iter().position(|f| f.len() != df) {
        return Err(Error::Dimension(format!(
            "feature window {i} has length {}, expected {df}",
            feat_patches[i].len()
        )));
    }
    if cfg.atoms > pixel_patches.len() {
        log::warn!(
            "{} atoms requested from only {} samples; the extra atoms start random",
            cfg.atoms,
            pixel_patches.len()
        );
    }
    let pixel_scale = 1.0 / (dp as f64).sqrt();
    let feat_scale = 1.0 / (df as f64).sqrt();
    let n = pixel_patches.len();
    let mut samples = DMatrix::zeros(dp + df, n);
    for (i, (x, y)) in pixel_patches.iter().zip(feat_patches).enumerate() {
        let mut col = samples.column_mut(i);
        for (r, v) in x.iter().enumerate() {
            col[r] = pixel_scale * v;
        }
        for (r, v) in y.iter().enumerate() {
            col[dp + r] = feat_scale * v;
        }
    }
    let init = initial_atoms(&samples, cfg.atoms, cfg.seed);
    let learned = learn_joint(&samples, init, cfg.sparsity, cfg.iterations)?;
    let meta = DictMeta {
        iterations: cfg.iterations,
        final_error: learned.errors.last().copied().unwrap_or(learned.initial_error),
        error_trace: learned.errors,
        seen: Default::default(),
    };
    PairedDictionary::from_joint(&learned.dictionary, geometry, cfg.sparsity, pixel_scale, feat_scale, meta)
}
