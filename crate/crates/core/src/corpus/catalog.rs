use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Top-level concept grouping. The declaration order is also the tie-break
/// order used by macro-category evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MacroCategory {
    ManMade,
    Organic,
    Animal,
}

impl MacroCategory {
    pub const ALL: [MacroCategory; 3] = [
        MacroCategory::ManMade,
        MacroCategory::Organic,
        MacroCategory::Animal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MacroCategory::ManMade => "MAN-MADE",
            MacroCategory::Organic => "ORGANIC",
            MacroCategory::Animal => "ANIMAL",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for MacroCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MacroCategory {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        MacroCategory::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown macro category `{s}` (expected MAN-MADE, ORGANIC or ANIMAL)"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub category: String,
    pub macro_category: MacroCategory,
}

/// Concept → (category, macro-category).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConceptCatalog {
    entries: BTreeMap<String, CatalogEntry>,
}

impl ConceptCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, concept: &str, category: &str, macro_category: MacroCategory) -> Result<()> {
        if concept.is_empty() {
            return Err(Error::Invalid("empty concept name".into()));
        }
        if self.entries.contains_key(concept) {
            return Err(Error::Invalid(format!("duplicate concept `{concept}`")));
        }
        self.entries.insert(
            concept.to_string(),
            CatalogEntry {
                category: category.to_string(),
                macro_category,
            },
        );
        Ok(())
    }

    pub fn get(&self, concept: &str) -> Option<&CatalogEntry> {
        self.entries.get(concept)
    }

    pub fn macro_of(&self, concept: &str) -> Result<MacroCategory> {
        self.get(concept)
            .map(|e| e.macro_category)
            .ok_or_else(|| Error::MissingConcept(concept.to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &CatalogEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut catalog = ConceptCatalog::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let [concept, category, macro_tok] = cols.as_slice() else {
                return Err(Error::parse(
                    source_name,
                    lineno,
                    format!("expected 3 comma-separated columns, found {}", cols.len()),
                ));
            };
            let m = macro_tok
                .parse::<MacroCategory>()
                .map_err(|e| Error::parse(source_name, lineno, e))?;
            catalog
                .insert(concept, category, m)
                .map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
        }
        Ok(catalog)
    }

    pub fn to_csv(&self) -> String {
        self.iter()
            .map(|(c, e)| format!("{c},{},{}\n", e.category, e.macro_category))
            .collect()
    }
}

pub fn read_catalog(path: impl AsRef<Path>) -> Result<ConceptCatalog> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ConceptCatalog::parse(&text, &path.display().to_string())
}

pub fn write_catalog(catalog: &ConceptCatalog, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, catalog.to_csv()).map_err(|e| Error::io(path, e))
}
