use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::aggregate::cosine;
use crate::corpus::{format_real, VectorTable};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfounderMode {
    Random,
    Neighbor,
}

impl ConfounderMode {
    pub fn name(self) -> &'static str {
        match self {
            ConfounderMode::Random => "random",
            ConfounderMode::Neighbor => "neighbor",
        }
    }
}

impl FromStr for ConfounderMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(ConfounderMode::Random),
            "neighbor" | "neighbour" => Ok(ConfounderMode::Neighbor),
            _ => Err(format!("unknown confounder mode `{s}` (expected random or neighbor)")),
        }
    }
}

impl fmt::Display for ConfounderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the candidate vectors come from: the learned mapping, or the gold
/// visual vectors themselves (upper bound).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Mapped,
    Gold,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Mapped => "mapped",
            Source::Gold => "gold",
        }
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mapped" => Ok(Source::Mapped),
            "gold" => Ok(Source::Gold),
            _ => Err(format!("unknown source `{s}` (expected mapped or gold)")),
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscriminationConfig {
    pub mode: ConfounderMode,
    pub source: Source,
    pub seed: u64,
    /// A win needs `score_correct - score_confounder > margin`.
    pub margin: f64,
}

impl DiscriminationConfig {
    pub fn new(mode: ConfounderMode, source: Source, seed: u64) -> Self {
        DiscriminationConfig {
            mode,
            source,
            seed,
            margin: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairOutcome {
    pub concept: String,
    pub confounder: String,
    pub score_correct: f64,
    pub score_confounder: f64,
    pub win: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub per_concept: Vec<PairOutcome>,
    pub mode: ConfounderMode,
    pub source: Source,
}

impl EvalReport {
    pub fn wins(&self) -> usize {
        self.per_concept.iter().filter(|p| p.win).count()
    }

    pub fn total(&self) -> usize {
        self.per_concept.len()
    }

    pub fn accuracy(&self) -> f64 {
        if self.per_concept.is_empty() {
            0.0
        } else {
            self.wins() as f64 / self.total() as f64
        }
    }

    /// `mode=<m> source=<s> acc=<v> n=<k>`
    pub fn summary(&self) -> String {
        format!(
            "mode={} source={} acc={:.3} n={}",
            self.mode,
            self.source,
            self.accuracy(),
            self.total()
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("concept,confounder,score_correct,score_confounder,win\n");
        for p in &self.per_concept {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.concept,
                p.confounder,
                format_real(p.score_correct),
                format_real(p.score_confounder),
                u8::from(p.win)
            ));
        }
        out
    }
}

/// The other label of `table` closest to `concept` by cosine; ties go to the
/// lexicographically smallest label.
pub fn nearest_neighbor_confounder(table: &VectorTable, concept: &str) -> Result<String> {
    let query = table.vector(concept)?;
    if table.len() < 2 {
        return Err(Error::Invalid("nearest neighbour needs at least two labels".into()));
    }
    let mut best: Option<(f64, &str)> = None;
    for (label, v) in table.iter() {
        if label == concept {
            continue;
        }
        let s = cosine(query, v)?;
        best = match best {
            Some((bs, bl)) if bs > s || (bs == s && bl < label) => Some((bs, bl)),
            _ => Some((s, label)),
        };
    }
    Ok(best.expect("at least one other label").1.to_string())
}

/// Scores every concept of `candidates` against its own gold vector and a
/// confounder's. `neighbor_space` (the word table) is required in
/// [`ConfounderMode::Neighbor`]; neighbours are searched among the candidate
/// concepts only.
pub fn discrimination_eval(
    candidates: &VectorTable,
    gold: &VectorTable,
    config: &DiscriminationConfig,
    neighbor_space: Option<&VectorTable>,
) -> Result<EvalReport> {
    if candidates.dim() != gold.dim() {
        return Err(Error::Dimension(format!(
            "candidate vectors of length {}, gold vectors of length {}",
            candidates.dim(),
            gold.dim()
        )));
    }
    let mut concepts: Vec<&str> = candidates.labels().iter().map(String::as_str).collect();
    concepts.sort_unstable();
    if concepts.len() < 2 {
        return Err(Error::Invalid("discrimination needs at least two concepts".into()));
    }
    for c in &concepts {
        if !gold.contains(c) {
            return Err(Error::MissingConcept(format!("`{c}` has no gold visual vector")));
        }
    }

    let confounders: Vec<String> = match config.mode {
        ConfounderMode::Random => {
            let mut r = rng::stream(config.seed, rng::purpose::CONFOUNDER);
            concepts
                .iter()
                .enumerate()
                .map(|(i, _)| {
                    let j = r.random_range(0..concepts.len() - 1);
                    concepts[if j >= i { j + 1 } else { j }].to_string()
                })
                .collect()
        }
        ConfounderMode::Neighbor => {
            let space = neighbor_space
                .ok_or_else(|| Error::Invalid("neighbour confounders need a word table".into()))?
                .subset(&concepts)?;
            concepts
                .par_iter()
                .map(|c| nearest_neighbor_confounder(&space, c))
                .collect::<Result<_>>()?
        }
    };

    let per_concept = concepts
        .par_iter()
        .zip(confounders)
        .map(|(c, conf)| {
            let cand = candidates.vector(c)?;
            let score_correct = cosine(cand, gold.vector(c)?)?;
            let score_confounder = cosine(cand, gold.vector(&conf)?)?;
            Ok(PairOutcome {
                concept: c.to_string(),
                confounder: conf,
                score_correct,
                score_confounder,
                win: score_correct - score_confounder > config.margin,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        per_concept,
        mode: config.mode,
        source: config.source,
    })
}
