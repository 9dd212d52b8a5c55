use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::model::{MappingModel, TrainMeta, Variant};
use crate::corpus::format_real;
use crate::error::{Error, Result};
use crate::fsutil::{parse_num, write_atomic, Lines};
use crate::provenance::SeenLabels;

const MAGIC: &str = "dreamgen-map v1";

/// Text container:
///
/// ```text
/// dreamgen-map v1
/// variant <plain|ridge|lasso|sym_elastic>
/// lambda1 <real>
/// lambda2 <real>
/// dims <d1> <d2>
/// train <n_train> <sweeps> <converged 0|1> <final objective>
/// seen <digest hex> <count> <label hash hex>...
/// offset none | offset <d2 reals>
/// <d1 rows of d2 reals>
/// ```
pub fn write_mapping(model: &MappingModel) -> String {
    let mut out = String::new();
    let meta = model.meta();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "variant {}", model.variant());
    let _ = writeln!(out, "lambda1 {}", format_real(model.lambda1()));
    let _ = writeln!(out, "lambda2 {}", format_real(model.lambda2()));
    let _ = writeln!(out, "dims {} {}", model.d1(), model.d2());
    let _ = writeln!(
        out,
        "train {} {} {} {}",
        meta.n_train,
        meta.iterations,
        u8::from(meta.converged),
        format_real(meta.final_objective)
    );
    let _ = writeln!(out, "seen {}", meta.seen.to_line());
    match model.offset() {
        None => out.push_str("offset none\n"),
        Some(o) => {
            out.push_str("offset");
            for v in o {
                out.push(' ');
                out.push_str(&format_real(*v));
            }
            out.push('\n');
        }
    }
    for row in model.weights().row_iter() {
        let line: Vec<String> = row.iter().map(|v| format_real(*v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn save_mapping(model: &MappingModel, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), write_mapping(model).as_bytes())
}

pub fn parse_mapping(text: &str, source_name: &str) -> Result<MappingModel> {
    let mut lines = Lines::new(text, source_name);
    let magic = lines.expect("header")?;
    if magic.trim() != MAGIC {
        return Err(lines.error(format!("unsupported model header `{magic}` (expected `{MAGIC}`)")));
    }
    let variant: Variant = match lines.keyed("variant")?.as_slice() {
        [v] => v.parse().map_err(|e: String| lines.error(e))?,
        _ => return Err(lines.error("malformed variant line")),
    };
    let mut lambda = |key: &str| -> Result<f64> {
        match lines.keyed(key)?.as_slice() {
            [v] => crate::corpus::parse_real(v).ok_or_else(|| lines.error(format!("bad {key} `{v}`"))),
            _ => Err(lines.error(format!("malformed {key} line"))),
        }
    };
    let lambda1 = lambda("lambda1")?;
    let lambda2 = lambda("lambda2")?;
    let (d1, d2) = match lines.keyed("dims")?.as_slice() {
        [a, b] => (parse_num::<usize>(&lines, a, "d1")?, parse_num::<usize>(&lines, b, "d2")?),
        _ => return Err(lines.error("malformed dims line")),
    };
    if d1 == 0 || d2 == 0 {
        return Err(lines.error("dims must be positive"));
    }
    let meta = match lines.keyed("train")?.as_slice() {
        [n, it, conv, obj] => TrainMeta {
            n_train: parse_num(&lines, n, "n_train")?,
            iterations: parse_num(&lines, it, "iteration count")?,
            converged: parse_num::<u8>(&lines, conv, "converged flag")? == 1,
            final_objective: crate::corpus::parse_real(obj)
                .ok_or_else(|| lines.error(format!("bad objective `{obj}`")))?,
            seen: SeenLabels::default(),
        },
        _ => return Err(lines.error("malformed train line")),
    };
    let seen_fields = lines.keyed("seen")?;
    let seen = SeenLabels::parse_line(&seen_fields).map_err(|e| lines.error(e))?;
    let offset_fields = lines.keyed("offset")?;
    let offset = match offset_fields.as_slice() {
        ["none"] => None,
        fields if fields.len() == d2 => Some(
            fields
                .iter()
                .map(|t| crate::corpus::parse_real(t).ok_or_else(|| lines.error(format!("bad offset `{t}`"))))
                .collect::<Result<Vec<f64>>>()?,
        ),
        fields => {
            return Err(lines.error(format!("offset has {} values, expected {d2}", fields.len())))
        }
    };
    let mut data = Vec::with_capacity(d1 * d2);
    for j in 0..d1 {
        data.extend(lines.reals(d2, &format!("mapping row {}", j + 1))?);
    }
    lines.finish()?;
    let weights = DMatrix::from_row_slice(d1, d2, &data);
    MappingModel::new(weights, offset, variant, lambda1, lambda2, TrainMeta { seen, ..meta })
        .map_err(|e| Error::parse(source_name, 0, e.to_string()))
}

pub fn load_mapping(path: impl AsRef<Path>) -> Result<MappingModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mapping(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossmodal::{fit_mapping, FitOptions};
    use crate::rng;

    fn fitted(variant: Variant, standardize: bool) -> MappingModel {
        let mut r = rng::seeded(31);
        let w = DMatrix::from_vec(20, 6, rng::gaussian_vec(&mut r, 120));
        let v = DMatrix::from_vec(20, 4, rng::gaussian_vec(&mut r, 80));
        let (l1, l2) = variant.lambdas(0.25);
        let opts = FitOptions { standardize, ..FitOptions::default() };
        fit_mapping(&w, &v, variant, l1, l2, &opts)
            .unwrap()
            .with_seen(SeenLabels::from_labels(["a", "b"]))
    }

    #[test]
    fn round_trip_predicts_identically() {
        for (variant, std) in [(Variant::Lasso, false), (Variant::Ridge, true), (Variant::Plain, false)] {
            let m = fitted(variant, std);
            let back = parse_mapping(&write_mapping(&m), "mem").unwrap();
            assert_eq!(back, m);
            let mut r = rng::seeded(100);
            for _ in 0..100 {
                let probe = rng::gaussian_vec(&mut r, 6);
                assert_eq!(m.predict(&probe).unwrap(), back.predict(&probe).unwrap());
            }
        }
    }

    #[test]
    fn truncated_file_fails() {
        let text = write_mapping(&fitted(Variant::SymElastic, false));
        let cut = &text[..text.len() - 20];
        assert!(parse_mapping(cut, "mem").is_err());
        let lines: Vec<&str> = text.lines().collect();
        assert!(parse_mapping(&lines[..lines.len() - 1].join("\n"), "mem").is_err());
    }

    #[test]
    fn version_and_shape_checks() {
        let text = write_mapping(&fitted(Variant::Plain, false));
        assert!(parse_mapping(&text.replace("v1", "v2"), "mem").is_err());
        assert!(parse_mapping(&text.replace("dims 6 4", "dims 6 5"), "mem").is_err());
        assert!(parse_mapping(&text.replace("dims 6 4", "dims 7 4"), "mem").is_err());
    }

    #[test]
    fn full_size_header_accepted() {
        let model = MappingModel::new(
            DMatrix::zeros(300, 9216),
            None,
            Variant::Plain,
            0.0,
            0.0,
            TrainMeta::default(),
        )
        .unwrap();
        let back = parse_mapping(&write_mapping(&model), "mem").unwrap();
        assert_eq!((back.d1(), back.d2()), (300, 9216));
    }

    #[test]
    fn save_and_load_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.map");
        let m = fitted(Variant::Ridge, false);
        save_mapping(&m, &path).unwrap();
        assert_eq!(load_mapping(&path).unwrap(), m);
    }
}
