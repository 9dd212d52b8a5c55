//! Zero-shot evaluation: held-out concepts are mapped and scored against
//! random and nearest-neighbour confounders, then assigned macro-categories.

use dreamgen::crossmodal::{fit_tables, FitOptions, Variant};
use dreamgen::evalharness::{
    discrimination_eval, macro_confusion, make_split, synth_clustered_corpus, ConfounderMode, DiscriminationConfig,
    Source,
};
use dreamgen::provenance::check_zero_shot;

fn main() -> dreamgen::Result<()> {
    let (corpus, catalog) = synth_clustered_corpus(4, 300, 20, 8, 0.3)?;
    let split = make_split(corpus.words.labels(), 0.2, 4)?;
    let (seen, dreamed) = (split.seen_vec(), split.dreamed_vec());
    println!("{} seen, {} dreamed", seen.len(), dreamed.len());

    let (model, _) = fit_tables(
        &corpus.words.subset(&seen)?,
        &corpus.visual,
        Variant::Ridge,
        0.0,
        1.0,
        &FitOptions::default(),
    )?;
    check_zero_shot(dreamed.iter().map(String::as_str), &[("mapping", &model.meta().seen)])?;

    let mapped = model.predict_table(&corpus.words.subset(&dreamed)?)?;
    let gold = corpus.visual.subset(&dreamed)?;
    for mode in [ConfounderMode::Random, ConfounderMode::Neighbor] {
        for (candidates, source) in [(&mapped, Source::Mapped), (&gold, Source::Gold)] {
            let cfg = DiscriminationConfig::new(mode, source, 4);
            let report = discrimination_eval(candidates, &corpus.visual, &cfg, Some(&corpus.words))?;
            println!("{}", report.summary());
        }
    }

    let matrix = macro_confusion(&mapped, &corpus.visual.subset(&seen)?, &catalog)?;
    print!("{}", matrix.to_csv());
    println!("diagonally dominant: {}", matrix.is_diagonally_dominant());

    // A leaked concept is refused.
    let leak = check_zero_shot([seen[0].as_str()], &[("mapping", &model.meta().seen)]);
    println!("leak check: {}", leak.unwrap_err());
    Ok(())
}
