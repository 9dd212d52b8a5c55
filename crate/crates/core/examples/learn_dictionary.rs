//! Learning a paired pixel/feature dictionary from synthetic images whose
//! features come from a known linear extractor.

use dreamgen::evalharness::synth_vision;
use dreamgen::inversion::{learn_paired_dictionary, training_pairs, CellGeometry, DictionaryConfig};

fn main() -> dreamgen::Result<()> {
    let geom = CellGeometry::new(6, 6, 16, 2, 4)?;
    let vision = synth_vision(3, 20, &geom, 3)?;
    let mut pixels = Vec::new();
    let mut feats = Vec::new();
    for (i, image) in vision.images.iter().enumerate() {
        for (x, y) in training_pairs(image, vision.features.row(i), &geom)? {
            pixels.push(x);
            feats.push(y);
        }
    }
    println!("{} training pairs: {} pixels, {} features each", pixels.len(), pixels[0].len(), feats[0].len());

    let cfg = DictionaryConfig {
        atoms: 64,
        sparsity: 5,
        iterations: 15,
        seed: 1,
    };
    let dict = learn_paired_dictionary(&pixels, &feats, geom.patch_geometry(3)?, &cfg)?;
    for (i, e) in dict.meta().error_trace.iter().enumerate() {
        println!("iteration {:>2}: joint error {e:.3e}", i + 1);
    }

    let x = dict.invert_window(&feats[0])?;
    let err: f64 = x.iter().zip(&pixels[0]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    println!("first training window inverts with pixel error {err:.4}");
    Ok(())
}
