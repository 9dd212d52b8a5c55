use nalgebra::{DMatrix, DVector};

use super::omp::{pursue, SparseCode};
use crate::error::{Error, Result};
use crate::provenance::SeenLabels;

/// Pixel side of an inversion window: `window x window` cells of
/// `pixels_per_cell` pixels each, `channels` interleaved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PatchGeometry {
    pub window: usize,
    pub pixels_per_cell: usize,
    pub channels: usize,
}

impl PatchGeometry {
    pub fn new(window: usize, pixels_per_cell: usize, channels: usize) -> Result<Self> {
        if window == 0 || pixels_per_cell == 0 {
            return Err(Error::Invalid("window and pixels per cell must be positive".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Invalid(format!("{channels} channels (expected 1 or 3)")));
        }
        Ok(PatchGeometry {
            window,
            pixels_per_cell,
            channels,
        })
    }

    /// Side length of the pixel patch.
    pub fn patch_size(&self) -> usize {
        self.window * self.pixels_per_cell
    }

    /// `D`, the length of a pixel patch vector.
    pub fn pixel_dim(&self) -> usize {
        self.patch_size() * self.patch_size() * self.channels
    }
}

/// Spatial reading of a visual vector as a `grid_h x grid_w` grid of cells
/// with `cell_dim` features each, stored cell-major (row-major over cells).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellGeometry {
    pub grid_h: usize,
    pub grid_w: usize,
    pub cell_dim: usize,
    pub window: usize,
    pub pixels_per_cell: usize,
}

impl CellGeometry {
    pub fn new(grid_h: usize, grid_w: usize, cell_dim: usize, window: usize, pixels_per_cell: usize) -> Result<Self> {
        if grid_h == 0 || grid_w == 0 || cell_dim == 0 || window == 0 || pixels_per_cell == 0 {
            return Err(Error::Invalid("cell geometry values must be positive".into()));
        }
        if window > grid_h.min(grid_w) {
            return Err(Error::Invalid(format!(
                "window {window} larger than the {grid_h}x{grid_w} cell grid"
            )));
        }
        Ok(CellGeometry {
            grid_h,
            grid_w,
            cell_dim,
            window,
            pixels_per_cell,
        })
    }

    /// Six by six cells of 256 features, inverted two by two cells at a time
    /// onto 8 pixel cells: a 9216-dimensional vector becomes a 48x48 image.
    pub fn pool5() -> Self {
        CellGeometry {
            grid_h: 6,
            grid_w: 6,
            cell_dim: 256,
            window: 2,
            pixels_per_cell: 8,
        }
    }

    pub fn visual_dim(&self) -> usize {
        self.grid_h * self.grid_w * self.cell_dim
    }

    pub fn window_dim(&self) -> usize {
        self.window * self.window * self.cell_dim
    }

    /// Number of window positions per axis (cell stride 1).
    pub fn window_grid(&self) -> (usize, usize) {
        (self.grid_h - self.window + 1, self.grid_w - self.window + 1)
    }

    pub fn image_width(&self) -> usize {
        self.grid_w * self.pixels_per_cell
    }

    pub fn image_height(&self) -> usize {
        self.grid_h * self.pixels_per_cell
    }

    pub fn patch_geometry(&self, channels: usize) -> Result<PatchGeometry> {
        PatchGeometry::new(self.window, self.pixels_per_cell, channels)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DictMeta {
    pub iterations: usize,
    /// Mean squared joint reconstruction error at the end of training.
    pub final_error: f64,
    /// Error after each training iteration (not persisted).
    pub error_trace: Vec<f64>,
    pub seen: SeenLabels,
}

/// Coupled pixel basis `U` (`D x K`) and feature basis `Vd` (`d x K`).
///
/// Invariant: every column of `[pixel_scale * U; feat_scale * Vd]` has unit
/// norm.
#[derive(Clone, Debug)]
pub struct PairedDictionary {
    pixel: DMatrix<f64>,
    feature: DMatrix<f64>,
    sparsity: usize,
    geometry: PatchGeometry,
    pixel_scale: f64,
    feat_scale: f64,
    meta: DictMeta,
    // Feature atoms normalized for pursuit, and the norms divided out.
    feature_unit: DMatrix<f64>,
    feature_norms: Vec<f64>,
}

impl PartialEq for PairedDictionary {
    fn eq(&self, other: &Self) -> bool {
        self.pixel == other.pixel
            && self.feature == other.feature
            && self.sparsity == other.sparsity
            && self.geometry == other.geometry
            && self.pixel_scale == other.pixel_scale
            && self.feat_scale == other.feat_scale
    }
}

impl PairedDictionary {
    pub fn new(
        pixel: DMatrix<f64>,
        feature: DMatrix<f64>,
        sparsity: usize,
        geometry: PatchGeometry,
        pixel_scale: f64,
        feat_scale: f64,
        meta: DictMeta,
    ) -> Result<Self> {
        let k = pixel.ncols();
        if k == 0 || feature.ncols() != k {
            return Err(Error::Dimension(format!(
                "{} pixel atoms vs {} feature atoms",
                k,
                feature.ncols()
            )));
        }
        if pixel.nrows() != geometry.pixel_dim() {
            return Err(Error::Dimension(format!(
                "pixel atoms of length {}, patch geometry needs {}",
                pixel.nrows(),
                geometry.pixel_dim()
            )));
        }
        if feature.nrows() == 0 {
            return Err(Error::Invalid("empty feature atoms".into()));
        }
        if sparsity == 0 || sparsity > k {
            return Err(Error::Invalid(format!("sparsity {sparsity} not in 1..={k}")));
        }
        if !(pixel_scale > 0.0 && feat_scale > 0.0) {
            return Err(Error::Invalid("scales must be positive".into()));
        }
        if pixel.iter().chain(feature.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite dictionary entry".into()));
        }
        for j in 0..k {
            let n = (pixel_scale * pixel_scale * pixel.column(j).norm_squared()
                + feat_scale * feat_scale * feature.column(j).norm_squared())
            .sqrt();
            if (n - 1.0).abs() > super::omp::UNIT_NORM_TOLERANCE {
                return Err(Error::Invalid(format!(
                    "joint atom {j} has norm {n}, expected 1"
                )));
            }
        }
        let feature_norms: Vec<f64> = feature.column_iter().map(|c| c.norm()).collect();
        let mut feature_unit = feature.clone();
        for (mut col, &n) in feature_unit.column_iter_mut().zip(&feature_norms) {
            if n > 0.0 {
                col /= n;
            }
        }
        Ok(PairedDictionary {
            pixel,
            feature,
            sparsity,
            geometry,
            pixel_scale,
            feat_scale,
            meta,
            feature_unit,
            feature_norms,
        })
    }

    /// Splits a unit-column joint dictionary `[pixel_scale U; feat_scale Vd]`.
    pub fn from_joint(
        joint: &DMatrix<f64>,
        geometry: PatchGeometry,
        sparsity: usize,
        pixel_scale: f64,
        feat_scale: f64,
        meta: DictMeta,
    ) -> Result<Self> {
        let dp = geometry.pixel_dim();
        if joint.nrows() <= dp {
            return Err(Error::Dimension(format!(
                "joint atoms of length {} leave no feature rows after {dp} pixel rows",
                joint.nrows()
            )));
        }
        let pixel = joint.rows(0, dp) / pixel_scale;
        let feature = joint.rows(dp, joint.nrows() - dp) / feat_scale;
        Self::new(pixel, feature, sparsity, geometry, pixel_scale, feat_scale, meta)
    }

    /// `U`
    pub fn pixel_atoms(&self) -> &DMatrix<f64> {
        &self.pixel
    }

    /// `Vd`
    pub fn feature_atoms(&self) -> &DMatrix<f64> {
        &self.feature
    }

    pub fn atoms(&self) -> usize {
        self.pixel.ncols()
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn geometry(&self) -> PatchGeometry {
        self.geometry
    }

    pub fn pixel_dim(&self) -> usize {
        self.pixel.nrows()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature.nrows()
    }

    pub fn pixel_scale(&self) -> f64 {
        self.pixel_scale
    }

    pub fn feat_scale(&self) -> f64 {
        self.feat_scale
    }

    pub fn meta(&self) -> &DictMeta {
        &self.meta
    }

    pub fn with_seen(mut self, seen: SeenLabels) -> Self {
        self.meta.seen = seen;
        self
    }

    /// Stacked, scaled dictionary `[pixel_scale U; feat_scale Vd]`.
    pub fn joint(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.pixel_dim() + self.feature_dim(), self.atoms());
        out.rows_mut(0, self.pixel_dim()).copy_from(&(&self.pixel * self.pixel_scale));
        out.rows_mut(self.pixel_dim(), self.feature_dim())
            .copy_from(&(&self.feature * self.feat_scale));
        out
    }

    /// Shared code `a` with `y ~ Vd a`, at most `sparsity` atoms.
    pub fn encode_features(&self, y: &[f64]) -> Result<SparseCode> {
        if y.len() != self.feature_dim() {
            return Err(Error::Dimension(format!(
                "feature window of length {}, dictionary expects {}",
                y.len(),
                self.feature_dim()
            )));
        }
        let trace = pursue(&self.feature_unit, &DVector::from_column_slice(y), self.sparsity);
        let mut code = trace.code;
        for (i, v) in code.support.iter().zip(code.values.iter_mut()) {
            *v /= self.feature_norms[*i];
        }
        Ok(code)
    }

    /// Pixel patch `U a` for a feature window (not clamped).
    pub fn invert_window(&self, y: &[f64]) -> Result<Vec<f64>> {
        let code = self.encode_features(y)?;
        Ok(code.reconstruct(&self.pixel).as_slice().to_vec())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rng;

    pub(crate) fn random_dictionary(seed: u64, geometry: PatchGeometry, d: usize, k: usize, t: usize) -> PairedDictionary {
        let dp = geometry.pixel_dim();
        let mut r = rng::seeded(seed);
        let mut joint = DMatrix::from_vec(dp + d, k, rng::gaussian_vec(&mut r, (dp + d) * k));
        for mut c in joint.column_iter_mut() {
            let n = c.norm();
            c /= n;
        }
        let ps = 1.0 / (dp as f64).sqrt();
        let fs = 1.0 / (d as f64).sqrt();
        PairedDictionary::from_joint(&joint, geometry, t, ps, fs, DictMeta::default()).unwrap()
    }

    #[test]
    fn geometry_arithmetic() {
        let g = CellGeometry::pool5();
        assert_eq!(g.visual_dim(), 9216);
        assert_eq!((g.image_width(), g.image_height()), (48, 48));
        assert_eq!(g.window_grid(), (5, 5));
        assert_eq!(g.patch_geometry(3).unwrap().pixel_dim(), 768);
        assert!(CellGeometry::new(2, 3, 4, 3, 1).is_err());
    }

    #[test]
    fn single_atom_inverts_to_its_pixel_atom() {
        let g = PatchGeometry::new(1, 2, 1).unwrap();
        let dict = random_dictionary(3, g, 6, 10, 3);
        let y: Vec<f64> = dict.feature_atoms().column(5).iter().copied().collect();
        let x = dict.invert_window(&y).unwrap();
        for (a, b) in x.iter().zip(dict.pixel_atoms().column(5).iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_features_give_zero_pixels() {
        let g = PatchGeometry::new(1, 2, 1).unwrap();
        let dict = random_dictionary(4, g, 6, 10, 3);
        assert!(dict.invert_window(&[0.0; 6]).unwrap().iter().all(|&v| v == 0.0));
        assert!(dict.invert_window(&[0.0; 5]).is_err());
    }

    #[test]
    fn joint_round_trip_and_invariant() {
        let g = PatchGeometry::new(1, 2, 3).unwrap();
        let dict = random_dictionary(9, g, 5, 7, 2);
        for c in dict.joint().column_iter() {
            assert!((c.norm() - 1.0).abs() < 1e-12);
        }
        let back = PairedDictionary::from_joint(&dict.joint(), g, 2, dict.pixel_scale(), dict.feat_scale(), DictMeta::default()).unwrap();
        assert!((back.pixel_atoms() - dict.pixel_atoms()).amax() < 1e-12);
        let mut bad = dict.pixel_atoms().clone();
        bad[(0, 0)] += 1.0;
        assert!(PairedDictionary::new(bad, dict.feature_atoms().clone(), 2, g, dict.pixel_scale(), dict.feat_scale(), DictMeta::default()).is_err());
    }
}
