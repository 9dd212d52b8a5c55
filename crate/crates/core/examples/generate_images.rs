//! Rendering visual vectors as images and comparing with the originals.
//!
//! Usage: `cargo run --example generate_images [OUT_DIR]`

use std::path::PathBuf;

use dreamgen::corpus::write_image;
use dreamgen::evalharness::{psnr, synth_vision};
use dreamgen::inversion::{generate_image, learn_paired_dictionary, training_pairs, CellGeometry, DictionaryConfig};

fn main() -> dreamgen::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("dreamgen-generate"));
    std::fs::create_dir_all(&out).map_err(|e| dreamgen::Error::Invalid(format!("{}: {e}", out.display())))?;

    let geom = CellGeometry::new(6, 6, 16, 2, 8)?;
    let train = synth_vision(11, 30, &geom, 3)?;
    let mut pixels = Vec::new();
    let mut feats = Vec::new();
    for (i, image) in train.images.iter().enumerate() {
        for (x, y) in training_pairs(image, train.features.row(i), &geom)? {
            pixels.push(x);
            feats.push(y);
        }
    }
    let cfg = DictionaryConfig {
        atoms: 96,
        sparsity: 6,
        iterations: 10,
        seed: 2,
    };
    let dict = learn_paired_dictionary(&pixels, &feats, geom.patch_geometry(3)?, &cfg)?;

    // New images, same extractor.
    let fresh = synth_vision(12, 4, &geom, 3)?;
    for (i, original) in fresh.images.iter().enumerate() {
        let v = train.extractor.features(original)?;
        let rendered = generate_image(&v, &geom, &dict)?;
        let name = format!("sample{i}");
        write_image(original, out.join(format!("{name}_original.ppm")))?;
        write_image(&rendered, out.join(format!("{name}_rendered.ppm")))?;
        println!("{name}: psnr {:.1} dB", psnr(rendered.pixels(), original.pixels())?);
    }
    println!("images in {}", out.display());
    Ok(())
}
