//! One visual vector per concept from many per-image vectors.
//!
//! The prototype is the componentwise mean. The exemplar is the member with
//! the highest mean cosine similarity to the *other* members (ties go to the
//! lowest index); a singleton set is its own exemplar.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::corpus::VectorTable;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AggregationMethod {
    Prototype,
    Exemplar,
}

impl FromStr for AggregationMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "prototype" => Ok(AggregationMethod::Prototype),
            "exemplar" => Ok(AggregationMethod::Exemplar),
            _ => Err(format!("unknown aggregation method `{s}` (expected prototype or exemplar)")),
        }
    }
}

impl fmt::Display for AggregationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AggregationMethod::Prototype => "prototype",
            AggregationMethod::Exemplar => "exemplar",
        })
    }
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!(
            "cosine of vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Invalid("cosine of a zero-norm vector".into()));
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

fn check_dims<V: AsRef<[f64]>>(vectors: &[V]) -> Result<usize> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::Invalid("cannot aggregate an empty set".into()))?;
    let dim = first.as_ref().len();
    if vectors.iter().any(|v| v.as_ref().len() != dim) {
        return Err(Error::Dimension("vectors of unequal length".into()));
    }
    Ok(dim)
}

pub fn prototype<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Vec<f64>> {
    let dim = check_dims(vectors)?;
    let mut sum = vec![0.0; dim];
    for v in vectors {
        for (s, x) in sum.iter_mut().zip(v.as_ref()) {
            *s += x;
        }
    }
    let n = vectors.len() as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}

/// Returns the exemplar's index and a copy of it.
pub fn exemplar<V: AsRef<[f64]>>(vectors: &[V]) -> Result<(usize, Vec<f64>)> {
    check_dims(vectors)?;
    let norms: Vec<f64> = vectors.iter().map(|v| norm(v.as_ref())).collect();
    if norms.contains(&0.0) {
        return Err(Error::Invalid("exemplar over a set containing a zero vector".into()));
    }
    let n = vectors.len();
    if n == 1 {
        return Ok((0, vectors[0].as_ref().to_vec()));
    }
    // Symmetric similarity sums, accumulated per row in index order.
    let mut sums = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let c = dot(vectors[i].as_ref(), vectors[j].as_ref()) / (norms[i] * norms[j]);
                sums[i] += c.clamp(-1.0, 1.0);
            }
        }
    }
    let mut best = 0;
    for i in 1..n {
        if sums[i] > sums[best] {
            best = i;
        }
    }
    Ok((best, vectors[best].as_ref().to_vec()))
}

/// Collapses a table of `<concept>#<k>` instance rows to one row per concept,
/// ordered by concept name.
pub fn aggregate_instances(table: &VectorTable, method: AggregationMethod) -> Result<VectorTable> {
    let mut groups: BTreeMap<&str, Vec<&[f64]>> = BTreeMap::new();
    for (label, row) in table.iter() {
        let concept = match label.rsplit_once('#') {
            Some((c, _)) if !c.is_empty() => c,
            _ => {
                return Err(Error::Invalid(format!(
                    "instance label `{label}` is not of the form <concept>#<k>"
                )))
            }
        };
        groups.entry(concept).or_default().push(row);
    }
    let mut labels = Vec::with_capacity(groups.len());
    let mut rows = Vec::with_capacity(groups.len());
    for (concept, members) in groups {
        let v = match method {
            AggregationMethod::Prototype => prototype(&members)?,
            AggregationMethod::Exemplar => exemplar(&members)?.1,
        };
        labels.push(concept.to_string());
        rows.push(v);
    }
    VectorTable::new(labels, rows)
}
