//! Seeded synthetic corpora with known ground truth.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;

use crate::corpus::{ConceptCatalog, Image, MacroCategory, VectorTable};
use crate::error::{Error, Result};
use crate::inversion::CellGeometry;
use crate::rng;

/// Word table `W`, visual table `V = W M* + noise` and the generating
/// mapping `M*` (`d1 x d2`).
#[derive(Clone, Debug, PartialEq)]
pub struct SynthCorpus {
    pub words: VectorTable,
    pub visual: VectorTable,
    pub mapping: DMatrix<f64>,
}

fn concept_labels(prefix: char, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i:04}")).collect()
}

fn check_sizes(n: usize, d1: usize, d2: usize, sigma: f64) -> Result<()> {
    if n < 2 || d1 == 0 || d2 == 0 {
        return Err(Error::Invalid(format!(
            "synthetic corpus needs n >= 2 and positive dimensions, got n={n} d1={d1} d2={d2}"
        )));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Invalid(format!("noise sigma must be finite and >= 0, got {sigma}")));
    }
    Ok(())
}

fn finish(seed: u64, words: DMatrix<f64>, d2: usize, sigma: f64) -> Result<SynthCorpus> {
    let (n, d1) = words.shape();
    let mut map_rng = rng::stream(seed, rng::purpose::CORPUS_MAP);
    let scale = 1.0 / (d1 as f64).sqrt();
    let mapping = DMatrix::from_fn(d1, d2, |_, _| rng::gaussian(&mut map_rng) * scale);
    let mut noise_rng = rng::stream(seed, rng::purpose::CORPUS_NOISE);
    let mut visual = &words * &mapping;
    if sigma > 0.0 {
        for i in 0..n {
            for j in 0..d2 {
                visual[(i, j)] += sigma * rng::gaussian(&mut noise_rng);
            }
        }
    }
    let labels = concept_labels('c', n);
    Ok(SynthCorpus {
        words: VectorTable::from_matrix(labels.clone(), &words)?,
        visual: VectorTable::from_matrix(labels, &visual)?,
        mapping,
    })
}

/// Gaussian word vectors, `M*` Gaussian scaled by `1/sqrt(d1)`, labels
/// `c0001...`.
pub fn synth_corpus(seed: u64, n_concepts: usize, d1: usize, d2: usize, noise_sigma: f64) -> Result<SynthCorpus> {
    check_sizes(n_concepts, d1, d2, noise_sigma)?;
    let mut r = rng::stream(seed, rng::purpose::CORPUS_WORDS);
    // Row-major draw so that row i does not depend on n.
    let words = DMatrix::from_row_iterator(n_concepts, d1, (0..n_concepts * d1).map(|_| rng::gaussian(&mut r)));
    finish(seed, words, d2, noise_sigma)
}

/// Word vectors drawn around three macro-category centres (concept `i` goes
/// to `MacroCategory::ALL[i % 3]`), spread 0.5 around unit-variance centres.
pub fn synth_clustered_corpus(
    seed: u64,
    n_concepts: usize,
    d1: usize,
    d2: usize,
    noise_sigma: f64,
) -> Result<(SynthCorpus, ConceptCatalog)> {
    check_sizes(n_concepts, d1, d2, noise_sigma)?;
    let mut cr = rng::stream(seed, rng::purpose::CORPUS_CENTERS);
    let centers: Vec<Vec<f64>> = (0..3).map(|_| rng::gaussian_vec(&mut cr, d1)).collect();
    let mut r = rng::stream(seed, rng::purpose::CORPUS_WORDS);
    let words = DMatrix::from_row_iterator(
        n_concepts,
        d1,
        (0..n_concepts * d1).map(|k| centers[(k / d1) % 3][k % d1] + 0.5 * rng::gaussian(&mut r)),
    );
    let corpus = finish(seed, words, d2, noise_sigma)?;
    let mut catalog = ConceptCatalog::new();
    for (i, label) in corpus.words.labels().iter().enumerate() {
        let m = MacroCategory::ALL[i % 3];
        catalog.insert(label, &format!("cluster{}", m.index()), m)?;
    }
    Ok((corpus, catalog))
}


/// Linear stand-in for a CNN layer: every cell's pixels (`ppc x ppc`,
/// row-major, channels interleaved) are projected by the same
/// `cell_dim x (ppc * ppc * channels)` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearExtractor {
    projection: DMatrix<f64>,
    geometry: CellGeometry,
    channels: usize,
}

impl LinearExtractor {
    pub fn new(projection: DMatrix<f64>, geometry: CellGeometry, channels: usize) -> Result<Self> {
        let ppc = geometry.pixels_per_cell;
        if projection.shape() != (geometry.cell_dim, ppc * ppc * channels) {
            return Err(Error::Dimension(format!(
                "projection is {:?}, geometry needs {}x{}",
                projection.shape(),
                geometry.cell_dim,
                ppc * ppc * channels
            )));
        }
        Ok(LinearExtractor {
            projection,
            geometry,
            channels,
        })
    }

    /// Gaussian projection scaled by `1/sqrt(columns)`.
    pub fn seeded(seed: u64, geometry: CellGeometry, channels: usize) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Invalid(format!("{channels} channels (expected 1 or 3)")));
        }
        let cols = geometry.pixels_per_cell.pow(2) * channels;
        let mut r = rng::stream(seed, rng::purpose::VISION_PROJECTION);
        let scale = 1.0 / (cols as f64).sqrt();
        let projection = DMatrix::from_fn(geometry.cell_dim, cols, |_, _| rng::gaussian(&mut r) * scale);
        Self::new(projection, geometry, channels)
    }

    pub fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    pub fn geometry(&self) -> &CellGeometry {
        &self.geometry
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Features of an unclamped raster laid out like [`Image::pixels`].
    pub fn features_raw(&self, pixels: &[f64]) -> Result<Vec<f64>> {
        let g = &self.geometry;
        let (w, ch, ppc) = (g.image_width(), self.channels, g.pixels_per_cell);
        if pixels.len() != w * g.image_height() * ch {
            return Err(Error::Dimension(format!(
                "{} pixel values, geometry needs {}",
                pixels.len(),
                w * g.image_height() * ch
            )));
        }
        let mut out = Vec::with_capacity(g.visual_dim());
        let mut cell = Vec::with_capacity(ppc * ppc * ch);
        for r in 0..g.grid_h {
            for c in 0..g.grid_w {
                cell.clear();
                for dy in 0..ppc {
                    let start = ((r * ppc + dy) * w + c * ppc) * ch;
                    cell.extend_from_slice(&pixels[start..start + ppc * ch]);
                }
                let f = &self.projection * nalgebra::DVector::from_column_slice(&cell);
                out.extend(f.iter());
            }
        }
        Ok(out)
    }

    pub fn features(&self, image: &Image) -> Result<Vec<f64>> {
        if image.channels() != self.channels {
            return Err(Error::Dimension(format!(
                "{}-channel image for a {}-channel extractor",
                image.channels(),
                self.channels
            )));
        }
        self.features_raw(image.pixels())
    }

    /// The linear map from a window's pixel patch (as produced by
    /// `patchify`) to its concatenated cell features.
    pub fn window_matrix(&self) -> DMatrix<f64> {
        let g = &self.geometry;
        let (ppc, ch, win) = (g.pixels_per_cell, self.channels, g.window);
        let p = win * ppc;
        let mut m = DMatrix::zeros(g.window_dim(), p * p * ch);
        for i in 0..win {
            for j in 0..win {
                let row0 = (i * win + j) * g.cell_dim;
                for dy in 0..ppc {
                    for dx in 0..ppc {
                        for c in 0..ch {
                            let src = (dy * ppc + dx) * ch + c;
                            let dst = ((i * ppc + dy) * p + j * ppc + dx) * ch + c;
                            for k in 0..g.cell_dim {
                                m[(row0 + k, dst)] = self.projection[(k, src)];
                            }
                        }
                    }
                }
            }
        }
        m
    }
}

/// Images, their features (labels `v0001...`) and the extractor.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthVision {
    pub images: Vec<Image>,
    pub features: VectorTable,
    pub extractor: LinearExtractor,
}

/// Per channel: a random offset around 0.5 plus three single-period cosine
/// waves (horizontal, vertical, diagonal) with random phases. Amplitudes are
/// bounded so that no clamping is ever needed.
fn smooth_image(r: &mut impl Rng, width: usize, height: usize, channels: usize) -> Result<Image> {
    let mut pixels = vec![0.0; width * height * channels];
    for c in 0..channels {
        let offset = 0.5 + 0.1 * (2.0 * r.random::<f64>() - 1.0);
        let waves: Vec<(f64, f64, f64, f64)> = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
            .iter()
            .map(|&(a, b)| (a, b, 0.4 / 3.0 * r.random::<f64>(), 2.0 * PI * r.random::<f64>()))
            .collect();
        for y in 0..height {
            for x in 0..width {
                let mut v = offset;
                for &(a, b, amp, phase) in &waves {
                    v += amp * (2.0 * PI * (a * x as f64 / width as f64 + b * y as f64 / height as f64) + phase).cos();
                }
                pixels[(y * width + x) * channels + c] = v.clamp(0.0, 1.0);
            }
        }
    }
    Image::new(width, height, channels, pixels)
}

pub fn synth_vision(seed: u64, n_images: usize, geometry: &CellGeometry, channels: usize) -> Result<SynthVision> {
    if n_images == 0 {
        return Err(Error::Invalid("synthetic vision set needs at least one image".into()));
    }
    let extractor = LinearExtractor::seeded(seed, *geometry, channels)?;
    let mut r = rng::stream(seed, rng::purpose::VISION_IMAGES);
    let images = (0..n_images)
        .map(|_| smooth_image(&mut r, geometry.image_width(), geometry.image_height(), channels))
        .collect::<Result<Vec<_>>>()?;
    let rows = images.iter().map(|im| extractor.features(im)).collect::<Result<Vec<_>>>()?;
    let features = VectorTable::new(concept_labels('v', n_images), rows)?;
    Ok(SynthVision {
        images,
        features,
        extractor,
    })
}

/// Peak signal-to-noise ratio in dB for values in `[0, 1]`; infinite for
/// identical inputs.
pub fn psnr(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Dimension(format!("psnr of lengths {} and {}", a.len(), b.len())));
    }
    let mse = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64;
    Ok(if mse == 0.0 { f64::INFINITY } else { -10.0 * mse.log10() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::patchify;
    use crate::inversion::window_features;

    #[test]
    fn corpus_shape_and_determinism() {
        let c = synth_corpus(3, 12, 4, 6, 0.1).unwrap();
        assert_eq!((c.words.len(), c.words.dim(), c.visual.dim()), (12, 4, 6));
        assert_eq!(c.words.labels()[0], "c0001");
        assert_eq!(c.words.labels()[11], "c0012");
        assert_eq!(c, synth_corpus(3, 12, 4, 6, 0.1).unwrap());
        assert_ne!(c, synth_corpus(4, 12, 4, 6, 0.1).unwrap());
        assert!(synth_corpus(3, 1, 4, 6, 0.0).is_err());
    }

    #[test]
    fn noiseless_visual_is_exact_product() {
        let c = synth_corpus(5, 10, 3, 4, 0.0).unwrap();
        let v = c.words.to_matrix() * &c.mapping;
        assert_eq!(v, c.visual.to_matrix());
    }

    #[test]
    fn clustered_catalog_round_robin() {
        let (c, cat) = synth_clustered_corpus(1, 9, 5, 5, 0.05).unwrap();
        assert_eq!(cat.len(), 9);
        assert_eq!(cat.macro_of("c0001").unwrap(), MacroCategory::ManMade);
        assert_eq!(cat.macro_of("c0002").unwrap(), MacroCategory::Organic);
        assert_eq!(cat.macro_of("c0006").unwrap(), MacroCategory::Animal);
        assert_eq!(c.words.len(), 9);
    }

    fn small_geometry() -> CellGeometry {
        CellGeometry::new(3, 4, 8, 2, 2).unwrap()
    }

    #[test]
    fn vision_images_in_range_and_sized() {
        let g = CellGeometry::new(6, 6, 16, 2, 8).unwrap();
        let s = synth_vision(2, 3, &g, 3).unwrap();
        assert_eq!(s.images.len(), 3);
        assert!(s.images.iter().all(|im| im.width() == 48 && im.height() == 48 && im.channels() == 3));
        assert_eq!(s.features.dim(), 6 * 6 * 16);
        assert_eq!(s.features.labels()[2], "v0003");
        assert_eq!(s, synth_vision(2, 3, &g, 3).unwrap());
    }

    #[test]
    fn extractor_is_linear() {
        let g = small_geometry();
        let ex = LinearExtractor::seeded(1, g, 1).unwrap();
        let zero = vec![0.0; g.image_width() * g.image_height()];
        assert!(ex.features_raw(&zero).unwrap().iter().all(|&f| f == 0.0));
        let img = synth_vision(7, 1, &g, 1).unwrap().images.remove(0);
        let f = ex.features(&img).unwrap();
        let doubled: Vec<f64> = img.pixels().iter().map(|p| 2.0 * p).collect();
        let f2 = ex.features_raw(&doubled).unwrap();
        for (a, b) in f.iter().zip(&f2) {
            assert!((2.0 * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn window_matrix_matches_cell_features() {
        let g = small_geometry();
        for ch in [1, 3] {
            let s = synth_vision(11, 1, &g, ch).unwrap();
            let phi = s.extractor.window_matrix();
            let v = s.features.row(0);
            let grid = patchify(&s.images[0], 2 * g.pixels_per_cell, g.pixels_per_cell).unwrap();
            for r in 0..grid.rows() {
                for c in 0..grid.cols() {
                    let x = nalgebra::DVector::from_column_slice(grid.patch(r, c));
                    let y = &phi * x;
                    let expected = window_features(v, &g, r, c);
                    for (a, b) in y.iter().zip(&expected) {
                        assert!((a - b).abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn psnr_values() {
        assert_eq!(psnr(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), f64::INFINITY);
        assert!((psnr(&[0.0; 4], &[0.1; 4]).unwrap() - 20.0).abs() < 1e-9);
        assert!(psnr(&[0.0], &[]).is_err());
    }
}
