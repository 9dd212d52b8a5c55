//! Command-line behaviour, run in-process.

use std::fs;
use std::path::Path;

use dreamgen::cli::run_with;
use dreamgen::corpus::{read_vector_table, write_vector_table, VectorTable};

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["dreamgen"];
    full.extend_from_slice(args);
    let code = run_with(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = cli(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    out
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn aggregate_instances() {
    let dir = tempfile::tempdir().unwrap();
    let table = VectorTable::new(
        ["dog#1", "dog#2", "cup#1"].map(String::from).to_vec(),
        vec![vec![1.0, 0.0], vec![3.0, 2.0], vec![0.0, 5.0]],
    )
    .unwrap();
    write_vector_table(&table, dir.path().join("inst.vec")).unwrap();
    let out = ok(&["aggregate", "--method", "prototype", "--in", &p(dir.path(), "inst.vec"), "--out", &p(dir.path(), "c.vec")]);
    assert!(out.contains("concepts=2"));
    let concepts = read_vector_table(dir.path().join("c.vec")).unwrap();
    assert_eq!(concepts.vector("dog").unwrap(), [2.0, 1.0]);
    ok(&["aggregate", "--method", "exemplar", "--in", &p(dir.path(), "inst.vec"), "--out", &p(dir.path(), "e.vec")]);
    assert_eq!(read_vector_table(dir.path().join("e.vec")).unwrap().len(), 2);

    let (code, _, err) = cli(&["aggregate", "--method", "median", "--in", "x", "--out", "y"]);
    assert_eq!(code, 2);
    assert!(err.contains("median"));
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(cli(&["eval", "--bogus"]).0, 2);
    assert_eq!(cli(&["frobnicate"]).0, 2);
    for sub in ["aggregate", "train-map", "generate", "eval", "learn-dict", "invert", "split"] {
        let (code, out, _) = cli(&[sub, "--help"]);
        assert_eq!(code, 0, "{sub}");
        assert!(out.contains("--"), "{sub}");
    }
    let (code, out, _) = cli(&["synth", "vision", "--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("--cell-dim"));
}

#[test]
fn synth_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = ok(&["synth", "corpus", "--n", "200", "--d1", "20", "--d2", "50", "--sigma", "0", "--seed", "9", "--out-dir", &p(dir.path(), sub)]);
        assert!(out.contains("seed=9"));
        ["words.vec", "visual.vec", "mstar.map"].map(|f| fs::read(dir.path().join(sub).join(f)).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn synth_vision_geometry() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["synth", "vision", "--grid", "6x6", "--cell-dim", "16", "--ppc", "8", "--n", "50", "--out-dir", &p(dir.path(), "v")]);
    let images: Vec<_> = fs::read_dir(dir.path().join("v/images")).unwrap().collect();
    assert_eq!(images.len(), 50);
    let first = dreamgen::corpus::read_image(dir.path().join("v/images/v0001.ppm")).unwrap();
    assert_eq!((first.width(), first.height()), (48, 48));
    assert_eq!(read_vector_table(dir.path().join("v/features.vec")).unwrap().dim(), 576);
}

#[test]
fn train_map_with_cv_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| p(dir.path(), n);
    ok(&["synth", "corpus", "--n", "100", "--d1", "10", "--d2", "12", "--sigma", "0", "--seed", "1", "--out-dir", &d("c")]);
    ok(&["split", "--labels", &d("c/words.vec"), "--fraction", "0.2", "--seed", "1", "--out-dir", &d("s")]);
    let out = ok(&[
        "train-map", "--words", &d("c/words.vec"), "--visual", &d("c/visual.vec"), "--holdout", &d("s/dreamed.txt"),
        "--variant", "ridge", "--grid", "0.01,0.1,1", "--folds", "5", "--seed", "3", "--out", &d("m.map"),
    ]);
    assert!(out.contains("n=80"), "{out}");
    let cv = fs::read_to_string(dir.path().join("m.map.cv.csv")).unwrap();
    assert_eq!(cv.lines().count(), 4);
    assert!(cv.starts_with("lambda1,lambda2,mean_mse,chosen,fold0,"));

    ok(&["train-map", "--words", &d("c/words.vec"), "--visual", &d("c/visual.vec"), "--holdout", &d("s/dreamed.txt"), "--out", &d("plain.map")]);
    let out = ok(&[
        "eval", "--mode", "random", "--source", "mapped", "--model", &d("plain.map"), "--words", &d("c/words.vec"),
        "--visual", &d("c/visual.vec"), "--out", &d("r.csv"),
    ]);
    assert_eq!(out.trim(), "mode=random source=mapped acc=1.000 n=20");
    let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(csv.starts_with("concept,confounder,score_correct,score_confounder,win\n"));
    assert_eq!(csv.lines().count(), 21);

    // Evaluating a concept the model trained on is a protocol violation.
    let seen = fs::read_to_string(dir.path().join("s/seen.txt")).unwrap();
    let first_seen = seen.lines().next().unwrap();
    let (code, _, err) = cli(&[
        "eval", "--mode", "random", "--model", &d("plain.map"), "--words", &d("c/words.vec"), "--visual",
        &d("c/visual.vec"), "--concepts", first_seen, "--concepts", seen.lines().nth(1).unwrap(),
    ]);
    assert_eq!(code, 3, "{err}");

    // Bad lambdas for the variant are a usage error.
    let (code, _, _) = cli(&["train-map", "--words", &d("c/words.vec"), "--visual", &d("c/visual.vec"), "--variant", "lasso", "--out", &d("x.map")]);
    assert_eq!(code, 2);
}

#[test]
fn disjoint_tables_are_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = VectorTable::new(vec!["a".into(), "b".into()], vec![vec![1.0], vec![2.0]]).unwrap();
    let b = VectorTable::new(vec!["x".into(), "y".into()], vec![vec![1.0], vec![2.0]]).unwrap();
    write_vector_table(&a, dir.path().join("w.vec")).unwrap();
    write_vector_table(&b, dir.path().join("v.vec")).unwrap();
    let (code, _, err) = cli(&["train-map", "--words", &p(dir.path(), "w.vec"), "--visual", &p(dir.path(), "v.vec"), "--out", &p(dir.path(), "m")]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn macro_eval_on_clusters() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| p(dir.path(), n);
    ok(&["synth", "corpus", "--clusters", "--n", "300", "--d1", "20", "--d2", "50", "--sigma", "0.05", "--seed", "8", "--out-dir", &d("c")]);
    ok(&["split", "--labels", &d("c/words.vec"), "--fraction", "0.2", "--seed", "8", "--out-dir", &d("s")]);
    ok(&["train-map", "--words", &d("c/words.vec"), "--visual", &d("c/visual.vec"), "--holdout", &d("s/dreamed.txt"), "--out", &d("m.map")]);
    let base = ["eval", "--mode", "macro", "--model", &d("m.map"), "--words", &d("c/words.vec"), "--visual", &d("c/visual.vec")];
    let (code, _, err) = cli(&base);
    assert_eq!(code, 2, "{err}");
    let mut with_catalog = base.to_vec();
    let catalog = d("c/catalog.csv");
    let out_csv = d("macro.csv");
    with_catalog.extend(["--catalog", &catalog, "--out", &out_csv]);
    let out = ok(&with_catalog);
    assert!(out.starts_with("mode=macro source=mapped"), "{out}");
    let csv = fs::read_to_string(&out_csv).unwrap();
    let rows: Vec<Vec<u64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect())
        .collect();
    for (i, row) in rows.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            assert!(i == j || row[i] > x, "{csv}");
        }
    }
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, format!("# synthetic\nn=12\nd1=3\nd2=4\nseed=5\nout_dir={}\n", p(dir.path(), "from_cfg"))).unwrap();
    let out = ok(&["--config", cfg.to_str().unwrap(), "synth", "corpus", "--seed", "6"]);
    assert!(out.contains("seed=6 n=12 d1=3 d2=4"), "{out}");
    assert_eq!(read_vector_table(dir.path().join("from_cfg/words.vec")).unwrap().len(), 12);

    fs::write(&cfg, "n=12\nshade=dark\n").unwrap();
    assert_eq!(cli(&["--config", cfg.to_str().unwrap(), "synth", "corpus", "--out-dir", "x"]).0, 2);
}

#[test]
fn generate_gold_and_invert() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| p(dir.path(), n);
    fn with<'a>(args: &[&'a str]) -> Vec<&'a str> {
        let mut v = args.to_vec();
        v.extend_from_slice(&["--grid", "3x3", "--cell-dim", "8", "--ppc", "2"]);
        v
    }
    ok(&with(&["synth", "vision", "--n", "8", "--channels", "1", "--seed", "2", "--out-dir", &d("v")]));
    ok(&with(&["learn-dict", "--images", &d("v/images"), "--features", &d("v/features.vec"), "--atoms", "10", "--sparsity", "3", "--iters", "3", "--out", &d("dict")]));

    // Gold mode still refuses the dictionary's own training images.
    let gold = ["generate", "--dict", &d("dict"), "--gold", &d("v/features.vec"), "--concepts", "v0001", "--out-dir", &d("g")];
    assert_eq!(cli(&with(&gold)).0, 3);
    let mut allowed = with(&gold);
    allowed.push("--allow-seen");
    ok(&allowed);
    let img = dreamgen::corpus::read_image(dir.path().join("g/v0001.pgm")).unwrap();
    assert_eq!((img.width(), img.height(), img.channels()), (6, 6, 1));

    let out = ok(&with(&["invert", "--dict", &d("dict"), "--vector", &d("v/features.vec"), "--label", "v0002", "--out", &d("one.pgm")]));
    assert!(out.contains("v0002"));
    assert!(dir.path().join("one.pgm").exists());

    let (code, _, _) = cli(&with(&["generate", "--dict", &d("dict"), "--concepts", "v0001", "--out-dir", &d("g2")]));
    assert_eq!(code, 2);
}
