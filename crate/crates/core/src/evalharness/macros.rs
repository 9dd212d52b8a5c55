use crate::aggregate::{cosine, prototype};
use crate::corpus::{ConceptCatalog, MacroCategory, VectorTable};
use crate::error::{Error, Result};

/// Counts indexed by (gold macro, predicted macro) in
/// [`MacroCategory::ALL`] order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionMatrix3 {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix3 {
    pub fn get(&self, gold: MacroCategory, predicted: MacroCategory) -> u64 {
        self.counts[gold.index()][predicted.index()]
    }

    pub fn row_sum(&self, gold: MacroCategory) -> u64 {
        self.counts[gold.index()].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    /// Each diagonal entry strictly exceeds every other entry of its row.
    pub fn is_diagonally_dominant(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| i == j || self.counts[i][i] > self.counts[i][j]))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("gold");
        for m in MacroCategory::ALL {
            out.push(',');
            out.push_str(m.as_str());
        }
        out.push('\n');
        for m in MacroCategory::ALL {
            out.push_str(m.as_str());
            for c in self.counts[m.index()] {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Assigns every candidate to the macro-category whose centroid of seen gold
/// vectors is closest by cosine; ties resolve in [`MacroCategory::ALL`] order.
pub fn macro_confusion(
    candidates: &VectorTable,
    gold_seen: &VectorTable,
    catalog: &ConceptCatalog,
) -> Result<ConfusionMatrix3> {
    if candidates.dim() != gold_seen.dim() {
        return Err(Error::Dimension(format!(
            "candidate vectors of length {}, gold vectors of length {}",
            candidates.dim(),
            gold_seen.dim()
        )));
    }
    let mut members: [Vec<&[f64]>; 3] = Default::default();
    for (label, v) in gold_seen.iter() {
        members[catalog.macro_of(label)?.index()].push(v);
    }
    let mut centroids = Vec::with_capacity(3);
    for m in MacroCategory::ALL {
        if members[m.index()].is_empty() {
            return Err(Error::Invalid(format!("no seen concept in macro-category {}", m.as_str())));
        }
        centroids.push(prototype(&members[m.index()])?);
    }
    let mut matrix = ConfusionMatrix3::default();
    for (label, v) in candidates.iter() {
        let gold = catalog.macro_of(label)?;
        let mut best = (0, cosine(v, &centroids[0])?);
        for (i, c) in centroids.iter().enumerate().skip(1) {
            let s = cosine(v, c)?;
            if s > best.1 {
                best = (i, s);
            }
        }
        matrix.counts[gold.index()][best.0] += 1;
    }
    Ok(matrix)
}
