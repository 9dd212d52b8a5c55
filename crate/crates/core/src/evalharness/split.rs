use std::collections::BTreeSet;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

/// Disjoint, non-empty seen (training) and dreamed (held-out) label sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroShotSplit {
    seen: BTreeSet<String>,
    dreamed: BTreeSet<String>,
}

impl ZeroShotSplit {
    pub fn new(seen: BTreeSet<String>, dreamed: BTreeSet<String>) -> Result<Self> {
        if seen.is_empty() || dreamed.is_empty() {
            return Err(Error::Invalid("seen and dreamed sets must both be non-empty".into()));
        }
        if let Some(l) = seen.intersection(&dreamed).next() {
            return Err(Error::ZeroShot(format!("`{l}` is both seen and dreamed")));
        }
        Ok(ZeroShotSplit { seen, dreamed })
    }

    pub fn seen(&self) -> &BTreeSet<String> {
        &self.seen
    }

    pub fn dreamed(&self) -> &BTreeSet<String> {
        &self.dreamed
    }

    pub fn seen_vec(&self) -> Vec<String> {
        self.seen.iter().cloned().collect()
    }

    pub fn dreamed_vec(&self) -> Vec<String> {
        self.dreamed.iter().cloned().collect()
    }
}

/// Shuffles the labels with the seed and holds out the first
/// `ceil(fraction * n)` as dreamed.
pub fn make_split<S: AsRef<str>>(labels: &[S], dreamed_fraction: f64, seed: u64) -> Result<ZeroShotSplit> {
    if !(dreamed_fraction > 0.0 && dreamed_fraction < 1.0) {
        return Err(Error::Invalid(format!(
            "dreamed fraction must be in (0, 1), got {dreamed_fraction}"
        )));
    }
    let unique: BTreeSet<&str> = labels.iter().map(AsRef::as_ref).collect();
    if unique.len() != labels.len() {
        return Err(Error::Invalid("duplicate labels".into()));
    }
    let n = labels.len();
    if n < 2 {
        return Err(Error::Invalid(format!("need at least 2 labels, got {n}")));
    }
    // The slack keeps products like 0.3 * 10 = 3.0000000000000004 at 3.
    let raw = dreamed_fraction * n as f64;
    let n_dreamed = (raw - 1e-9 * raw.max(1.0)).ceil() as usize;
    if n_dreamed == 0 || n_dreamed >= n {
        return Err(Error::Invalid(format!(
            "fraction {dreamed_fraction} of {n} labels leaves an empty side"
        )));
    }
    let mut order: Vec<&str> = labels.iter().map(AsRef::as_ref).collect();
    order.shuffle(&mut rng::stream(seed, rng::purpose::SPLIT));
    let dreamed = order[..n_dreamed].iter().map(|s| s.to_string()).collect();
    let seen = order[n_dreamed..].iter().map(|s| s.to_string()).collect();
    ZeroShotSplit::new(seen, dreamed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i:04}")).collect()
    }

    #[test]
    fn ten_labels_thirty_percent() {
        let s = make_split(&labels(10), 0.3, 1).unwrap();
        assert_eq!((s.dreamed().len(), s.seen().len()), (3, 7));
        assert!(s.seen().is_disjoint(s.dreamed()));
    }

    #[test]
    fn full_scale_dreamed_count() {
        let s = make_split(&labels(5472), 472.0 / 5472.0, 0).unwrap();
        assert_eq!(s.dreamed().len(), 472);
        assert_eq!(s.seen().len(), 5000);
    }

    #[test]
    fn deterministic() {
        assert_eq!(make_split(&labels(30), 0.2, 5).unwrap(), make_split(&labels(30), 0.2, 5).unwrap());
        assert_ne!(make_split(&labels(30), 0.2, 5).unwrap(), make_split(&labels(30), 0.2, 6).unwrap());
    }

    #[test]
    fn degenerate_sizes() {
        assert!(make_split(&labels(1), 0.5, 0).is_err());
        assert!(make_split(&labels(10), 0.0, 0).is_err());
        assert!(make_split(&labels(10), 1.0, 0).is_err());
        assert!(make_split(&labels(3), 0.999, 0).is_err());
    }

    #[test]
    fn overlapping_sets_rejected() {
        let a: BTreeSet<String> = ["x".to_string()].into();
        assert!(matches!(ZeroShotSplit::new(a.clone(), a), Err(Error::ZeroShot(_))));
    }

    proptest! {
        #[test]
        fn sizes_and_disjointness(n in 2usize..200, f in 0.01f64..0.99, seed in any::<u64>()) {
            let ls = labels(n);
            let expected = (f * n as f64 - 1e-9 * (f * n as f64).max(1.0)).ceil() as usize;
            prop_assume!(expected >= 1 && expected < n);
            let s = make_split(&ls, f, seed).unwrap();
            prop_assert_eq!(s.dreamed().len(), expected);
            prop_assert_eq!(s.seen().len() + s.dreamed().len(), n);
            prop_assert!(s.seen().is_disjoint(s.dreamed()));
        }
    }
}
