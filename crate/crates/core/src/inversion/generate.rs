use rayon::prelude::*;

use super::dictionary::{CellGeometry, PairedDictionary};
use crate::corpus::{assemble, patchify, Image, PatchGrid};
use crate::error::{Error, Result};

/// Features of the `window x window` cell block whose top-left cell is
/// `(row, col)`, cells concatenated in row-major order.
pub fn window_features(v: &[f64], geom: &CellGeometry, row: usize, col: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(geom.window_dim());
    for i in 0..geom.window {
        for j in 0..geom.window {
            let start = ((row + i) * geom.grid_w + col + j) * geom.cell_dim;
            out.extend_from_slice(&v[start..start + geom.cell_dim]);
        }
    }
    out
}

fn check_visual(v: &[f64], geom: &CellGeometry) -> Result<()> {
    if v.len() != geom.visual_dim() {
        return Err(Error::Dimension(format!(
            "visual vector of length {}, geometry {}x{}x{} needs {}",
            v.len(),
            geom.grid_h,
            geom.grid_w,
            geom.cell_dim,
            geom.visual_dim()
        )));
    }
    Ok(())
}

/// Renders a visual vector: every window position is inverted to a pixel
/// patch placed at `(row * ppc, col * ppc)`, overlaps are averaged and the
/// result clamped to `[0, 1]`.
pub fn generate_image(v: &[f64], geom: &CellGeometry, dict: &PairedDictionary) -> Result<Image> {
    check_visual(v, geom)?;
    let pg = dict.geometry();
    if pg.window != geom.window || pg.pixels_per_cell != geom.pixels_per_cell {
        return Err(Error::Dimension(format!(
            "dictionary patches cover {w}x{w} cells of {p} pixels, geometry asks for {gw}x{gw} cells of {gp}",
            w = pg.window,
            p = pg.pixels_per_cell,
            gw = geom.window,
            gp = geom.pixels_per_cell
        )));
    }
    if dict.feature_dim() != geom.window_dim() {
        return Err(Error::Dimension(format!(
            "dictionary feature atoms of length {}, geometry windows have {}",
            dict.feature_dim(),
            geom.window_dim()
        )));
    }
    let (rows, cols) = geom.window_grid();
    let patches = (0..rows * cols)
        .into_par_iter()
        .map(|i| dict.invert_window(&window_features(v, geom, i / cols, i % cols)))
        .collect::<Result<Vec<_>>>()?;
    let grid = PatchGrid::new(
        pg.patch_size(),
        geom.pixels_per_cell,
        geom.image_width(),
        geom.image_height(),
        pg.channels,
        patches,
    )?;
    assemble(&grid)
}

/// `(pixel patch, feature window)` pairs for every window position of an
/// image and its visual vector.
pub fn training_pairs(image: &Image, v: &[f64], geom: &CellGeometry) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    check_visual(v, geom)?;
    if image.width() != geom.image_width() || image.height() != geom.image_height() {
        return Err(Error::Dimension(format!(
            "{}x{} image for a geometry rendering {}x{}",
            image.width(),
            image.height(),
            geom.image_width(),
            geom.image_height()
        )));
    }
    let grid = patchify(image, geom.window * geom.pixels_per_cell, geom.pixels_per_cell)?;
    let (rows, cols) = geom.window_grid();
    debug_assert_eq!((grid.rows(), grid.cols()), (rows, cols));
    Ok((0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| (grid.patch(r, c).to_vec(), window_features(v, geom, r, c)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inversion::dictionary::tests::random_dictionary;
    use crate::inversion::PatchGeometry;

    #[test]
    fn pool5_vector_renders_48_square() {
        let geom = CellGeometry::pool5();
        let dict = random_dictionary(1, PatchGeometry::new(2, 8, 3).unwrap(), geom.window_dim(), 16, 4);
        let v: Vec<f64> = (0..9216).map(|i| ((i % 17) as f64 - 8.0) / 8.0).collect();
        let img = generate_image(&v, &geom, &dict).unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (48, 48, 3));
        assert!(img.pixels().iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn single_window_is_one_clamped_inversion() {
        let geom = CellGeometry::new(2, 2, 3, 2, 2).unwrap();
        let dict = random_dictionary(2, PatchGeometry::new(2, 2, 1).unwrap(), 12, 20, 3);
        let v: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let img = generate_image(&v, &geom, &dict).unwrap();
        let x = dict.invert_window(&v).unwrap();
        let expected: Vec<f64> = x.iter().map(|p| p.clamp(0.0, 1.0)).collect();
        assert_eq!(img.pixels(), expected.as_slice());
    }

    #[test]
    fn window_feature_layout() {
        let geom = CellGeometry::new(2, 3, 2, 2, 1).unwrap();
        let v: Vec<f64> = (0..12).map(f64::from).collect();
        // cells (0,1),(0,2),(1,1),(1,2)
        assert_eq!(window_features(&v, &geom, 0, 1), [2.0, 3.0, 4.0, 5.0, 8.0, 9.0, 10.0, 11.0]);
    }

    #[test]
    fn geometry_mismatches_are_errors() {
        let geom = CellGeometry::new(3, 3, 2, 2, 2).unwrap();
        let dict = random_dictionary(3, PatchGeometry::new(2, 2, 1).unwrap(), 8, 10, 2);
        assert!(generate_image(&[0.0; 17], &geom, &dict).is_err());
        let other = CellGeometry::new(3, 3, 3, 2, 2).unwrap();
        assert!(generate_image(&[0.0; 27], &other, &dict).is_err());
        let ppc = CellGeometry::new(3, 3, 2, 2, 1).unwrap();
        assert!(generate_image(&[0.0; 18], &ppc, &dict).is_err());
    }

    #[test]
    fn pairs_cover_every_window() {
        let geom = CellGeometry::new(3, 3, 2, 2, 2).unwrap();
        let img = Image::filled(6, 6, 1, 0.5).unwrap();
        let v = vec![1.0; 18];
        let pairs = training_pairs(&img, &v, &geom).unwrap();
        assert_eq!(pairs.len(), 4);
        assert!(pairs.iter().all(|(x, y)| x.len() == 16 && y.len() == 8));
    }
}
