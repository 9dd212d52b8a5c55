use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::*;
use crate::aggregate::aggregate_instances;
use crate::corpus::{read_catalog, read_image, read_vector_table, write_catalog, write_image, write_vector_table, Image, VectorTable};
use crate::crossmodal::{
    align_tables, cross_validate, fit_tables, load_mapping, save_mapping, FitOptions, MappingModel, TrainMeta,
};
use crate::evalharness::{
    discrimination_eval, macro_confusion, make_split, synth_clustered_corpus, synth_corpus, synth_vision,
    ConfounderMode, DiscriminationConfig,
};
use crate::fsutil::write_atomic;
use crate::inversion::{
    generate_image, learn_paired_dictionary, load_dictionary, save_dictionary, training_pairs, CellGeometry,
    DictionaryConfig,
};
use crate::provenance::{check_zero_shot, SeenLabels};

type CmdResult = std::result::Result<(), Failure>;

pub(super) fn dispatch(command: Command, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Aggregate(a) => aggregate(a, out),
        Command::TrainMap(a) => train_map(a, out),
        Command::Generate(a) => generate(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Synth(SynthCommand::Corpus(a)) => synth_corpus_cmd(a, out),
        Command::Synth(SynthCommand::Vision(a)) => synth_vision_cmd(a, out),
        Command::LearnDict(a) => learn_dict(a, out),
        Command::Invert(a) => invert(a, out),
        Command::Split(a) => split(a, out),
    }
}

fn say(out: &mut dyn Write, line: impl AsRef<str>) -> CmdResult {
    writeln!(out, "{}", line.as_ref()).map_err(|e| Failure::Data(Error::io(Path::new("<stdout>"), e)))
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn create_dir(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir).map_err(|e| Failure::Data(Error::io(dir, e)))
}

fn read_label_list(path: &Path) -> Result<Vec<String>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Data(Error::io(path, e)))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

fn write_label_list(path: &Path, labels: &BTreeSet<String>) -> CmdResult {
    let mut text = String::new();
    for l in labels {
        text.push_str(l);
        text.push('\n');
    }
    Ok(write_atomic(path, text.as_bytes())?)
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    Ok(write_atomic(path, text.as_bytes())?)
}

/// Concepts from `--concepts` and `--concepts-file`, in order, deduplicated.
fn concept_list(args: &ConceptArgs) -> Result<Option<Vec<String>>, Failure> {
    if args.concepts.is_none() && args.concepts_file.is_none() {
        return Ok(None);
    }
    let mut all: Vec<String> = args.concepts.clone().unwrap_or_default();
    if let Some(p) = &args.concepts_file {
        all.extend(read_label_list(p)?);
    }
    let mut seen = BTreeSet::new();
    all.retain(|c| seen.insert(c.clone()));
    Ok(Some(all))
}

fn cell_geometry(g: &GeometryArgs) -> Result<CellGeometry, Failure> {
    Ok(CellGeometry::new(g.grid.0, g.grid.1, g.cell_dim, g.window, g.ppc)?)
}

fn image_path(dir: &Path, label: &str, channels: usize) -> Result<PathBuf, Failure> {
    if label.contains(['/', '\\']) || label == "." || label == ".." {
        return Err(Failure::Data(Error::Invalid(format!("label `{label}` is not a valid file name"))));
    }
    Ok(dir.join(format!("{label}.{}", if channels == 1 { "pgm" } else { "ppm" })))
}

fn without(table: VectorTable, excluded: &BTreeSet<String>) -> Result<VectorTable, Failure> {
    if excluded.is_empty() {
        return Ok(table);
    }
    let keep: Vec<&String> = table.labels().iter().filter(|l| !excluded.contains(*l)).collect();
    Ok(table.subset(&keep)?)
}

fn holdout_set(path: &Option<PathBuf>) -> Result<BTreeSet<String>, Failure> {
    Ok(match path {
        Some(p) => read_label_list(p)?.into_iter().collect(),
        None => BTreeSet::new(),
    })
}

fn aggregate(a: AggregateArgs, out: &mut dyn Write) -> CmdResult {
    let table = read_vector_table(&a.input)?;
    let concepts = aggregate_instances(&table, a.method)?;
    write_vector_table(&concepts, &a.out)?;
    say(out, format!("method={} instances={} concepts={}", a.method, table.len(), concepts.len()))
}

fn train_map(a: TrainMapArgs, out: &mut dyn Write) -> CmdResult {
    let holdout = holdout_set(&a.holdout)?;
    let words = without(read_vector_table(&a.words)?, &holdout)?;
    let visual = read_vector_table(&a.visual)?;
    let opts = FitOptions {
        tol: a.tol,
        max_iters: a.max_iters,
        standardize: a.standardize,
        ..FitOptions::default()
    };
    let (l1, l2) = match &a.grid {
        Some(grid) => {
            if a.variant == Variant::Plain {
                return Err(usage("--grid needs a regularized variant"));
            }
            let points: Vec<(f64, f64)> = grid.iter().map(|&s| a.variant.lambdas(s)).collect();
            for &(l1, l2) in &points {
                a.variant.check_lambdas(l1, l2).map_err(|e| usage(e.to_string()))?;
            }
            let (_, w, v) = align_tables(&words, &visual)?;
            let report = cross_validate(&w, &v, a.variant, &points, a.folds, a.seed, &opts)?;
            let cv_path = a.cv_out.clone().unwrap_or_else(|| {
                let mut p = a.out.clone().into_os_string();
                p.push(".cv.csv");
                p.into()
            });
            write_text(&cv_path, &report.to_csv())?;
            say(
                out,
                format!(
                    "cv folds={} points={} chosen lambda1={} lambda2={}",
                    a.folds,
                    points.len(),
                    report.chosen.0,
                    report.chosen.1
                ),
            )?;
            report.chosen
        }
        None => {
            a.variant
                .check_lambdas(a.lambda1, a.lambda2)
                .map_err(|e| usage(e.to_string()))?;
            (a.lambda1, a.lambda2)
        }
    };
    let (model, alignment) = fit_tables(&words, &visual, a.variant, l1, l2, &opts)?;
    save_mapping(&model, &a.out)?;
    say(
        out,
        format!(
            "trained variant={} lambda1={} lambda2={} n={} dropped_words={} dropped_visual={} converged={}",
            a.variant,
            l1,
            l2,
            alignment.labels.len(),
            alignment.dropped_words.len(),
            alignment.dropped_visual.len(),
            model.meta().converged
        ),
    )
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> CmdResult {
    let geom = cell_geometry(&a.geometry)?;
    let concepts = concept_list(&a.concepts)?.ok_or_else(|| usage("generate needs --concepts or --concepts-file"))?;
    let dict = load_dictionary(&a.dict)?;
    let (vectors, model_seen) = match &a.gold {
        Some(gold) => {
            let table = read_vector_table(gold)?;
            (table.subset(&concepts)?, None)
        }
        None => {
            let (Some(model_path), Some(words_path)) = (&a.model, &a.words) else {
                return Err(usage("generate needs --model and --words unless --gold is given"));
            };
            let model = load_mapping(model_path)?;
            let words = read_vector_table(words_path)?;
            let mapped = model.predict_table(&words.subset(&concepts)?)?;
            (mapped, Some(model.meta().seen.clone()))
        }
    };
    if !a.allow_seen {
        let mut seen: Vec<(&str, &SeenLabels)> = vec![("dictionary", &dict.meta().seen)];
        if let Some(s) = &model_seen {
            seen.push(("mapping", s));
        }
        check_zero_shot(concepts.iter().map(String::as_str), &seen)?;
    }
    create_dir(&a.out_dir)?;
    let channels = dict.geometry().channels;
    for c in &concepts {
        let image = generate_image(vectors.vector(c)?, &geom, &dict)?;
        write_image(&image, image_path(&a.out_dir, c, channels)?)?;
    }
    say(
        out,
        format!(
            "generated {} images ({}x{}) in {}",
            concepts.len(),
            geom.image_width(),
            geom.image_height(),
            a.out_dir.display()
        ),
    )
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> CmdResult {
    let catalog = match (a.mode, &a.catalog) {
        (EvalMode::Macro, None) => return Err(usage("--mode macro needs --catalog")),
        (EvalMode::Macro, Some(p)) => Some(read_catalog(p)?),
        _ => None,
    };
    if a.source == Source::Mapped && (a.model.is_none() || a.words.is_none()) {
        return Err(usage("--source mapped needs --model and --words"));
    }
    if a.mode == EvalMode::Neighbor && a.words.is_none() {
        return Err(usage("--mode neighbor needs --words"));
    }
    let visual = read_vector_table(&a.visual)?;
    let words = a.words.as_deref().map(read_vector_table).transpose()?;
    let model = a.model.as_deref().map(load_mapping).transpose()?;
    let dict = a.dict.as_deref().map(load_dictionary).transpose()?;

    let dreamed: Vec<String> = match concept_list(&a.concepts)? {
        Some(list) => list,
        None => {
            let Some(m) = &model else {
                return Err(usage("without --model the dreamed set must be given by --concepts"));
            };
            visual
                .labels()
                .iter()
                .filter(|l| !m.meta().seen.contains(l) && words.as_ref().is_none_or(|w| w.contains(l)))
                .cloned()
                .collect()
        }
    };
    let mut seen: Vec<(&str, &SeenLabels)> = Vec::new();
    if let Some(m) = &model {
        seen.push(("mapping", &m.meta().seen));
    }
    if let Some(d) = &dict {
        seen.push(("dictionary", &d.meta().seen));
    }
    check_zero_shot(dreamed.iter().map(String::as_str), &seen)?;

    let candidates = match a.source {
        Source::Gold => visual.subset(&dreamed)?,
        Source::Mapped => {
            let (Some(m), Some(w)) = (&model, &words) else {
                unreachable!("checked above")
            };
            m.predict_table(&w.subset(&dreamed)?)?
        }
    };

    let (csv, summary) = match a.mode {
        EvalMode::Random | EvalMode::Neighbor => {
            let mode = if a.mode == EvalMode::Random {
                ConfounderMode::Random
            } else {
                ConfounderMode::Neighbor
            };
            let mut cfg = DiscriminationConfig::new(mode, a.source, a.seed);
            cfg.margin = a.margin;
            let report = discrimination_eval(&candidates, &visual, &cfg, words.as_ref())?;
            (report.to_csv(), report.summary())
        }
        EvalMode::Macro => {
            let dreamed_set: BTreeSet<&String> = dreamed.iter().collect();
            let seen_labels: Vec<&String> = visual
                .labels()
                .iter()
                .filter(|l| match &model {
                    Some(m) => m.meta().seen.contains(l),
                    None => !dreamed_set.contains(l),
                })
                .collect();
            let gold_seen = visual.subset(&seen_labels)?;
            let matrix = macro_confusion(&candidates, &gold_seen, catalog.as_ref().expect("checked above"))?;
            let acc = if matrix.total() == 0 {
                0.0
            } else {
                matrix.correct() as f64 / matrix.total() as f64
            };
            let summary = format!("mode=macro source={} acc={acc:.3} n={}", a.source, matrix.total());
            (matrix.to_csv(), summary)
        }
    };
    if let Some(p) = &a.out {
        write_text(p, &csv)?;
    }
    say(out, summary)
}

fn synth_corpus_cmd(a: SynthCorpusArgs, out: &mut dyn Write) -> CmdResult {
    let (corpus, catalog) = if a.clusters {
        let (c, cat) = synth_clustered_corpus(a.seed, a.n, a.d1, a.d2, a.sigma)?;
        (c, Some(cat))
    } else {
        (synth_corpus(a.seed, a.n, a.d1, a.d2, a.sigma)?, None)
    };
    create_dir(&a.out_dir)?;
    write_vector_table(&corpus.words, a.out_dir.join("words.vec"))?;
    write_vector_table(&corpus.visual, a.out_dir.join("visual.vec"))?;
    let meta = TrainMeta {
        converged: true,
        ..TrainMeta::default()
    };
    let truth = MappingModel::new(corpus.mapping, None, Variant::Plain, 0.0, 0.0, meta)?;
    save_mapping(&truth, a.out_dir.join("mstar.map"))?;
    if let Some(cat) = &catalog {
        write_catalog(cat, a.out_dir.join("catalog.csv"))?;
    }
    say(
        out,
        format!(
            "synth corpus seed={} n={} d1={} d2={} sigma={} clusters={} -> {}",
            a.seed,
            a.n,
            a.d1,
            a.d2,
            a.sigma,
            a.clusters,
            a.out_dir.display()
        ),
    )
}

fn synth_vision_cmd(a: SynthVisionArgs, out: &mut dyn Write) -> CmdResult {
    let geom = cell_geometry(&a.geometry)?;
    let vision = synth_vision(a.seed, a.n, &geom, a.channels)?;
    let dir = a.out_dir.join("images");
    create_dir(&dir)?;
    for (label, image) in vision.features.labels().iter().zip(&vision.images) {
        write_image(image, image_path(&dir, label, a.channels)?)?;
    }
    write_vector_table(&vision.features, a.out_dir.join("features.vec"))?;
    say(
        out,
        format!(
            "synth vision seed={} n={} image={}x{}x{} features={} -> {}",
            a.seed,
            a.n,
            geom.image_width(),
            geom.image_height(),
            a.channels,
            geom.visual_dim(),
            a.out_dir.display()
        ),
    )
}

fn image_files(dir: &Path) -> Result<Vec<(String, PathBuf)>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::Data(Error::io(dir, e)))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Failure::Data(Error::io(dir, e)))?.path();
        let is_image = matches!(path.extension().and_then(|e| e.to_str()), Some("ppm" | "pgm"));
        if let (true, Some(stem)) = (is_image, path.file_stem().and_then(|s| s.to_str())) {
            files.push((stem.to_string(), path.clone()));
        }
    }
    files.sort();
    Ok(files)
}

fn learn_dict(a: LearnDictArgs, out: &mut dyn Write) -> CmdResult {
    let geom = cell_geometry(&a.geometry)?;
    let holdout = holdout_set(&a.holdout)?;
    let features = read_vector_table(&a.features)?;
    let mut labels = Vec::new();
    let mut pixels = Vec::new();
    let mut feats = Vec::new();
    let mut channels = None;
    for (label, path) in image_files(&a.images)? {
        if holdout.contains(&label) || !features.contains(&label) {
            continue;
        }
        let image: Image = read_image(&path)?;
        if *channels.get_or_insert(image.channels()) != image.channels() {
            return Err(Failure::Data(Error::Dimension(format!(
                "{} has {} channels, earlier images have {}",
                path.display(),
                image.channels(),
                channels.unwrap_or(0)
            ))));
        }
        for (x, y) in training_pairs(&image, features.vector(&label)?, &geom)? {
            pixels.push(x);
            feats.push(y);
        }
        labels.push(label);
    }
    let Some(channels) = channels else {
        return Err(Failure::Data(Error::Invalid(format!(
            "no image in {} has a feature row",
            a.images.display()
        ))));
    };
    let cfg = DictionaryConfig {
        atoms: a.atoms,
        sparsity: a.sparsity,
        iterations: a.iters,
        seed: a.seed,
    };
    let dict = learn_paired_dictionary(&pixels, &feats, geom.patch_geometry(channels)?, &cfg)?
        .with_seen(SeenLabels::from_labels(&labels));
    save_dictionary(&dict, &a.out)?;
    say(
        out,
        format!(
            "dictionary atoms={} sparsity={} images={} samples={} error={}",
            dict.atoms(),
            dict.sparsity(),
            labels.len(),
            pixels.len(),
            dict.meta().final_error
        ),
    )
}

fn invert(a: InvertArgs, out: &mut dyn Write) -> CmdResult {
    let geom = cell_geometry(&a.geometry)?;
    let dict = load_dictionary(&a.dict)?;
    let table = read_vector_table(&a.vector)?;
    let (label, v) = match &a.label {
        Some(l) => (l.as_str(), table.vector(l)?),
        None => table
            .iter()
            .next()
            .ok_or_else(|| Failure::Data(Error::Invalid("empty vector table".into())))?,
    };
    let image = generate_image(v, &geom, &dict)?;
    write_image(&image, &a.out)?;
    say(
        out,
        format!("inverted {label} -> {} ({}x{})", a.out.display(), image.width(), image.height()),
    )
}

fn split(a: SplitArgs, out: &mut dyn Write) -> CmdResult {
    let table = read_vector_table(&a.labels)?;
    let s = make_split(table.labels(), a.fraction, a.seed)?;
    create_dir(&a.out_dir)?;
    write_label_list(&a.out_dir.join("seen.txt"), s.seen())?;
    write_label_list(&a.out_dir.join("dreamed.txt"), s.dreamed())?;
    say(out, format!("split seed={} seen={} dreamed={}", a.seed, s.seen().len(), s.dreamed().len()))
}
