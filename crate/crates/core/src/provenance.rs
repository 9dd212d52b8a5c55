//! Training provenance: which concept labels fed a trained artifact.
//!
//! Trained models and dictionaries carry a [`SeenLabels`] record so that
//! generation and evaluation can refuse concepts that were not held out.
//! Labels are stored as 64-bit FNV-1a hashes rather than in clear.

use std::collections::BTreeSet;
use std::hash::Hasher;

use fnv::FnvHasher;

use crate::error::{Error, Result};

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

/// Hashed set of training labels plus a digest of the whole sorted list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeenLabels {
    hashes: Vec<u64>,
    digest: u64,
}

impl SeenLabels {
    pub fn from_labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let sorted: BTreeSet<String> = labels.into_iter().map(|s| s.as_ref().to_string()).collect();
        let concatenated: String = sorted.iter().map(String::as_str).collect();
        let mut hashes: Vec<u64> = sorted.iter().map(|l| fnv1a64(l.as_bytes())).collect();
        hashes.sort_unstable();
        hashes.dedup();
        SeenLabels {
            hashes,
            digest: fnv1a64(concatenated.as_bytes()),
        }
    }

    pub fn from_parts(mut hashes: Vec<u64>, digest: u64) -> Self {
        hashes.sort_unstable();
        hashes.dedup();
        SeenLabels { hashes, digest }
    }

    pub fn contains(&self, label: &str) -> bool {
        self.hashes.binary_search(&fnv1a64(label.as_bytes())).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.hashes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.hashes.len()
    }

    pub fn hashes(&self) -> &[u64] {
        &self.hashes
    }

    /// FNV-1a of the sorted labels concatenated without separator.
    pub fn digest(&self) -> u64 {
        self.digest
    }

    /// Serialized as `<digest> <count> <hash>...`, all hashes in hex.
    pub fn to_line(&self) -> String {
        let mut out = format!("{:016x} {}", self.digest, self.hashes.len());
        for h in &self.hashes {
            out.push_str(&format!(" {h:016x}"));
        }
        out
    }

    pub fn parse_line(fields: &[&str]) -> std::result::Result<Self, String> {
        let (digest, rest) = fields.split_first().ok_or("missing digest")?;
        let digest = u64::from_str_radix(digest, 16).map_err(|e| format!("bad digest: {e}"))?;
        let (count, rest) = rest.split_first().ok_or("missing label count")?;
        let count: usize = count.parse().map_err(|e| format!("bad label count: {e}"))?;
        if rest.len() != count {
            return Err(format!("expected {count} label hashes, found {}", rest.len()));
        }
        let hashes = rest
            .iter()
            .map(|h| u64::from_str_radix(h, 16).map_err(|e| format!("bad label hash `{h}`: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(SeenLabels::from_parts(hashes, digest))
    }
}

/// Fails with [`Error::ZeroShot`] if any candidate label was seen in training
/// by any of the given artifacts. `what` names each artifact in the message.
pub fn check_zero_shot<'a, I>(candidates: I, seen: &[(&str, &SeenLabels)]) -> Result<()>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut leaked = Vec::new();
    for label in candidates {
        for (what, s) in seen {
            if s.contains(label) {
                leaked.push(format!("{label} (in {what} training data)"));
            }
        }
    }
    if leaked.is_empty() {
        Ok(())
    } else {
        Err(Error::ZeroShot(leaked.join(", ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn membership_and_digest() {
        let s = SeenLabels::from_labels(["cat", "apple", "car"]);
        assert!(s.contains("cat"));
        assert!(!s.contains("dog"));
        assert_eq!(s.digest(), fnv1a64(b"applecarcat"));
        let line = s.to_line();
        let fields: Vec<&str> = line.split(' ').collect();
        assert_eq!(SeenLabels::parse_line(&fields).unwrap(), s);
    }

    #[test]
    fn guard_reports_leaks() {
        let s = SeenLabels::from_labels(["cat"]);
        assert!(check_zero_shot(["dog"], &[("mapping", &s)]).is_ok());
        let err = check_zero_shot(["dog", "cat"], &[("mapping", &s)]).unwrap_err();
        assert!(matches!(err, Error::ZeroShot(m) if m.contains("cat")));
    }
}
