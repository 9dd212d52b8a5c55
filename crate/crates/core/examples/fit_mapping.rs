//! Fitting the word-to-visual mapping with each regularizer, choosing the
//! penalty by cross-validation.

use dreamgen::crossmodal::{cross_validate, fit_mapping, objective, FitOptions, Variant};
use dreamgen::evalharness::synth_corpus;

fn main() -> dreamgen::Result<()> {
    let corpus = synth_corpus(7, 120, 15, 10, 0.2)?;
    let (w, v) = (corpus.words.to_matrix(), corpus.visual.to_matrix());
    let opts = FitOptions::default();

    for variant in Variant::ALL {
        let grid: Vec<(f64, f64)> = [0.01, 0.1, 1.0, 10.0].iter().map(|&s| variant.lambdas(s)).collect();
        let (l1, l2) = if variant == Variant::Plain {
            (0.0, 0.0)
        } else {
            cross_validate(&w, &v, variant, &grid, 5, 1, &opts)?.chosen
        };
        let model = fit_mapping(&w, &v, variant, l1, l2, &opts)?;
        let m = model.weights();
        let err = (m - &corpus.mapping).norm() / corpus.mapping.norm();
        let zeros = m.iter().filter(|x| **x == 0.0).count();
        println!(
            "{:<11} lambda1={l1:<5} lambda2={l2:<5} J={:>9.3} rel.err={err:.4} zeros={zeros} sweeps={}",
            variant.name(),
            objective(m, &w, &v, l1, l2)?,
            model.meta().iterations
        );
    }
    Ok(())
}
