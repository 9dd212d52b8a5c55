//! The whole pipeline through the command-line driver: synthetic vision and
//! word data, a zero-shot split, mapping, dictionary and generated images.
//!
//! Usage: `cargo run --example end_to_end [WORK_DIR]`

use std::path::PathBuf;

fn step(args: &[&str]) {
    let mut full = vec!["dreamgen"];
    full.extend_from_slice(args);
    println!("$ {}", full.join(" "));
    let code = dreamgen::cli::run(full);
    if code != 0 {
        std::process::exit(code);
    }
}

fn main() {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("dreamgen-e2e"));
    let d = |name: &str| dir.join(name).to_str().expect("utf-8 path").to_string();
    let geometry = ["--grid", "6x6", "--cell-dim", "16", "--ppc", "8"];
    let with_geometry = |args: &[&str]| -> Vec<String> {
        args.iter().chain(&geometry).map(|s| s.to_string()).collect()
    };
    let run = |args: Vec<String>| step(&args.iter().map(String::as_str).collect::<Vec<_>>());

    run(with_geometry(&["synth", "vision", "--n", "40", "--seed", "1", "--out-dir", &d("vision")]));
    step(&["synth", "corpus", "--n", "150", "--d1", "20", "--d2", "576", "--sigma", "0.05", "--seed", "2", "--out-dir", &d("corpus")]);
    step(&["split", "--labels", &d("corpus/words.vec"), "--fraction", "0.1", "--seed", "3", "--out-dir", &d("split")]);
    step(&[
        "train-map", "--words", &d("corpus/words.vec"), "--visual", &d("corpus/visual.vec"), "--holdout",
        &d("split/dreamed.txt"), "--variant", "ridge", "--grid", "0.01,0.1,1,10", "--folds", "5", "--out", &d("mapping.txt"),
    ]);
    run(with_geometry(&[
        "learn-dict", "--images", &d("vision/images"), "--features", &d("vision/features.vec"), "--atoms", "64",
        "--sparsity", "5", "--iters", "10", "--out", &d("dictionary.txt"),
    ]));
    step(&[
        "eval", "--mode", "neighbor", "--model", &d("mapping.txt"), "--words", &d("corpus/words.vec"), "--visual",
        &d("corpus/visual.vec"), "--dict", &d("dictionary.txt"), "--out", &d("neighbor.csv"),
    ]);
    run(with_geometry(&[
        "generate", "--model", &d("mapping.txt"), "--dict", &d("dictionary.txt"), "--words", &d("corpus/words.vec"),
        "--concepts-file", &d("split/dreamed.txt"), "--out-dir", &d("generated"),
    ]));
}
