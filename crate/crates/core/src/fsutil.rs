//! Small file helpers shared by the model and dictionary formats.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes through a sibling temporary file and renames it into place, so a
/// reader never observes a half-written artifact.
pub(crate) fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = Path::new(&tmp);
    fs::write(tmp, contents).map_err(|e| Error::io(tmp, e))?;
    fs::rename(tmp, path).map_err(|e| Error::io(path, e))
}

/// Line cursor that tracks 1-based line numbers for error messages.
pub(crate) struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    source_name: &'a str,
    last: usize,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(text: &'a str, source_name: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            source_name,
            last: 0,
        }
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> Error {
        Error::parse(self.source_name, self.last, message)
    }

    /// Next line, or a "truncated" error naming what was expected.
    pub(crate) fn expect(&mut self, what: &str) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, line)) => {
                self.last = i + 1;
                Ok(line)
            }
            None => {
                self.last += 1;
                Err(self.error(format!("truncated file: expected {what}")))
            }
        }
    }

    /// Next line split on whitespace, whose first token must be `key`.
    pub(crate) fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let line = self.expect(&format!("`{key}` line"))?;
        let mut fields = line.split_whitespace();
        if fields.next() != Some(key) {
            return Err(self.error(format!("expected `{key}` line, found `{line}`")));
        }
        Ok(fields.collect())
    }

    /// A row of exactly `len` finite reals.
    pub(crate) fn reals(&mut self, len: usize, what: &str) -> Result<Vec<f64>> {
        let line = self.expect(what)?;
        let row = line
            .split_whitespace()
            .map(|t| crate::corpus::parse_real(t).ok_or_else(|| self.error(format!("`{t}` is not a finite real"))))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != len {
            return Err(self.error(format!("{what} has {} values, expected {len}", row.len())));
        }
        Ok(row)
    }

    pub(crate) fn finish(&mut self) -> Result<()> {
        for (i, line) in self.inner.by_ref() {
            if !line.trim().is_empty() {
                self.last = i + 1;
                return Err(self.error("unexpected trailing content"));
            }
        }
        Ok(())
    }
}

pub(crate) fn parse_num<T: std::str::FromStr>(lines: &Lines<'_>, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| lines.error(format!("bad {what} `{token}`")))
}
