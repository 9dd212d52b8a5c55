use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::dictionary::{DictMeta, PairedDictionary, PatchGeometry};
use crate::corpus::{format_real, parse_real};
use crate::error::{Error, Result};
use crate::fsutil::{parse_num, write_atomic, Lines};
use crate::provenance::SeenLabels;

const MAGIC: &str = "dreamgen-dict v1";

/// Text container:
///
/// ```text
/// dreamgen-dict v1
/// <K> <T> <D> <d> <window> <ppc> <channels>
/// scales <pixel_scale> <feat_scale>
/// train <iterations> <final error>
/// seen <digest hex> <count> <label hash hex>...
/// <D rows of K reals: U>
/// <d rows of K reals: Vd>
/// ```
pub fn write_dictionary(dict: &PairedDictionary) -> String {
    let g = dict.geometry();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(
        out,
        "{} {} {} {} {} {} {}",
        dict.atoms(),
        dict.sparsity(),
        dict.pixel_dim(),
        dict.feature_dim(),
        g.window,
        g.pixels_per_cell,
        g.channels
    );
    let _ = writeln!(
        out,
        "scales {} {}",
        format_real(dict.pixel_scale()),
        format_real(dict.feat_scale())
    );
    let _ = writeln!(
        out,
        "train {} {}",
        dict.meta().iterations,
        format_real(dict.meta().final_error)
    );
    let _ = writeln!(out, "seen {}", dict.meta().seen.to_line());
    for m in [dict.pixel_atoms(), dict.feature_atoms()] {
        for row in m.row_iter() {
            let line: Vec<String> = row.iter().map(|v| format_real(*v)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn save_dictionary(dict: &PairedDictionary, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), write_dictionary(dict).as_bytes())
}

pub fn parse_dictionary(text: &str, source_name: &str) -> Result<PairedDictionary> {
    let mut lines = Lines::new(text, source_name);
    let magic = lines.expect("header")?;
    if magic.trim() != MAGIC {
        return Err(lines.error(format!("unsupported dictionary header `{magic}` (expected `{MAGIC}`)")));
    }
    let dims_line = lines.expect("dimension line")?;
    let dims = dims_line
        .split_whitespace()
        .map(|t| parse_num::<usize>(&lines, t, "dimension"))
        .collect::<Result<Vec<usize>>>()?;
    let [k, t, dp, df, window, ppc, channels] = dims.as_slice() else {
        return Err(lines.error("expected `K T D d window ppc channels`"));
    };
    let geometry = PatchGeometry::new(*window, *ppc, *channels).map_err(|e| lines.error(e.to_string()))?;
    if geometry.pixel_dim() != *dp {
        return Err(lines.error(format!(
            "D = {dp} inconsistent with window {window}, ppc {ppc}, {channels} channels"
        )));
    }
    if *k == 0 || *df == 0 {
        return Err(lines.error("K and d must be positive"));
    }
    let (pixel_scale, feat_scale) = match lines.keyed("scales")?.as_slice() {
        [a, b] => (
            parse_real(a).ok_or_else(|| lines.error(format!("bad scale `{a}`")))?,
            parse_real(b).ok_or_else(|| lines.error(format!("bad scale `{b}`")))?,
        ),
        _ => return Err(lines.error("malformed scales line")),
    };
    let (iterations, final_error) = match lines.keyed("train")?.as_slice() {
        [it, err] => (
            parse_num::<usize>(&lines, it, "iteration count")?,
            parse_real(err).ok_or_else(|| lines.error(format!("bad error `{err}`")))?,
        ),
        _ => return Err(lines.error("malformed train line")),
    };
    let seen_fields = lines.keyed("seen")?;
    let seen = SeenLabels::parse_line(&seen_fields).map_err(|e| lines.error(e))?;
    let mut read_block = |rows: usize, what: &str| -> Result<DMatrix<f64>> {
        let mut data = Vec::with_capacity(rows * k);
        for r in 0..rows {
            data.extend(lines.reals(*k, &format!("{what} row {}", r + 1))?);
        }
        Ok(DMatrix::from_row_slice(rows, *k, &data))
    };
    let pixel = read_block(*dp, "pixel atom")?;
    let feature = read_block(*df, "feature atom")?;
    lines.finish()?;
    let meta = DictMeta {
        iterations,
        final_error,
        error_trace: Vec::new(),
        seen,
    };
    PairedDictionary::new(pixel, feature, *t, geometry, pixel_scale, feat_scale, meta)
        .map_err(|e| Error::parse(source_name, 0, e.to_string()))
}

pub fn load_dictionary(path: impl AsRef<Path>) -> Result<PairedDictionary> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dictionary(&text, &path.display().to_string())
}
