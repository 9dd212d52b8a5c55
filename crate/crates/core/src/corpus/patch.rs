use super::image::Image;
use crate::error::{Error, Result};

/// Overlapping square patches of an image, in row-major patch order.
///
/// Patch `(r, c)` covers pixels starting at `(r * stride, c * stride)`; each
/// patch vector is row-major with channels interleaved per pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchGrid {
    patch_size: usize,
    stride: usize,
    rows: usize,
    cols: usize,
    source_width: usize,
    source_height: usize,
    channels: usize,
    patches: Vec<Vec<f64>>,
}

fn count(extent: usize, patch_size: usize, stride: usize, axis: &str) -> Result<usize> {
    if patch_size > extent {
        return Err(Error::Invalid(format!(
            "patch size {patch_size} exceeds image {axis} {extent}"
        )));
    }
    if !(extent - patch_size).is_multiple_of(stride) {
        return Err(Error::Invalid(format!(
            "image {axis} {extent} does not align to patch {patch_size} with stride {stride}"
        )));
    }
    Ok((extent - patch_size) / stride + 1)
}

impl PatchGrid {
    pub fn new(
        patch_size: usize,
        stride: usize,
        source_width: usize,
        source_height: usize,
        channels: usize,
        patches: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if patch_size == 0 || stride == 0 || stride > patch_size {
            return Err(Error::Invalid(format!(
                "need 1 <= stride <= patch size, got stride {stride}, patch {patch_size}"
            )));
        }
        let rows = count(source_height, patch_size, stride, "height")?;
        let cols = count(source_width, patch_size, stride, "width")?;
        if patches.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} patches for a {rows}x{cols} grid",
                patches.len()
            )));
        }
        let len = patch_size * patch_size * channels;
        if let Some(p) = patches.iter().find(|p| p.len() != len) {
            return Err(Error::Dimension(format!(
                "patch of length {}, expected {len}",
                p.len()
            )));
        }
        Ok(PatchGrid {
            patch_size,
            stride,
            rows,
            cols,
            source_width,
            source_height,
            channels,
            patches,
        })
    }

    pub fn patch_size(&self) -> usize {
        self.patch_size
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn patches(&self) -> &[Vec<f64>] {
        &self.patches
    }

    pub fn patch(&self, r: usize, c: usize) -> &[f64] {
        &self.patches[r * self.cols + c]
    }
}

pub fn patchify(image: &Image, patch_size: usize, stride: usize) -> Result<PatchGrid> {
    if patch_size == 0 || stride == 0 || stride > patch_size {
        return Err(Error::Invalid(format!(
            "need 1 <= stride <= patch size, got stride {stride}, patch {patch_size}"
        )));
    }
    let rows = count(image.height(), patch_size, stride, "height")?;
    let cols = count(image.width(), patch_size, stride, "width")?;
    let ch = image.channels();
    let row_len = patch_size * ch;
    let mut patches = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let mut patch = Vec::with_capacity(patch_size * row_len);
            for dy in 0..patch_size {
                let start = ((r * stride + dy) * image.width() + c * stride) * ch;
                patch.extend_from_slice(&image.pixels()[start..start + row_len]);
            }
            patches.push(patch);
        }
    }
    PatchGrid::new(
        patch_size,
        stride,
        image.width(),
        image.height(),
        ch,
        patches,
    )
}

/// Averages every pixel over the patches covering it, then clamps to `[0, 1]`.
///
/// The average is a running mean in patch order, so pixels whose covering
/// values all agree come back bit-identical.
pub fn assemble(grid: &PatchGrid) -> Result<Image> {
    let ch = grid.channels;
    let width = grid.source_width;
    let mut mean = vec![0.0; width * grid.source_height * ch];
    let mut hits = vec![0u32; width * grid.source_height];
    for r in 0..grid.rows {
        for c in 0..grid.cols {
            let patch = grid.patch(r, c);
            for dy in 0..grid.patch_size {
                for dx in 0..grid.patch_size {
                    let pix = (r * grid.stride + dy) * width + c * grid.stride + dx;
                    hits[pix] += 1;
                    let k = f64::from(hits[pix]);
                    let src = (dy * grid.patch_size + dx) * ch;
                    for ci in 0..ch {
                        let m = &mut mean[pix * ch + ci];
                        *m += (patch[src + ci] - *m) / k;
                    }
                }
            }
        }
    }
    for v in mean.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    Image::new(width, grid.source_height, ch, mean)
}
