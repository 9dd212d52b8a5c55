use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::corpus::VectorTable;
use crate::error::{Error, Result};
use crate::provenance::SeenLabels;

/// Penalty configuration of the mapping objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `lambda1 = lambda2 = 0`
    Plain,
    /// `lambda1 = 0`, `lambda2 > 0`
    Ridge,
    /// `lambda1 > 0`, `lambda2 = 0`
    Lasso,
    /// `lambda1 = lambda2 > 0`
    SymElastic,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Plain, Variant::Ridge, Variant::Lasso, Variant::SymElastic];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::Ridge => "ridge",
            Variant::Lasso => "lasso",
            Variant::SymElastic => "sym_elastic",
        }
    }

    pub fn check_lambdas(self, lambda1: f64, lambda2: f64) -> Result<()> {
        let ok = lambda1.is_finite()
            && lambda2.is_finite()
            && match self {
                Variant::Plain => lambda1 == 0.0 && lambda2 == 0.0,
                Variant::Ridge => lambda1 == 0.0 && lambda2 > 0.0,
                Variant::Lasso => lambda1 > 0.0 && lambda2 == 0.0,
                Variant::SymElastic => lambda1 > 0.0 && lambda1 == lambda2,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!(
                "lambda1={lambda1}, lambda2={lambda2} inconsistent with variant {self}"
            )))
        }
    }

    /// The `(lambda1, lambda2)` pair for a single penalty strength.
    pub fn lambdas(self, strength: f64) -> (f64, f64) {
        match self {
            Variant::Plain => (0.0, 0.0),
            Variant::Ridge => (0.0, strength),
            Variant::Lasso => (strength, 0.0),
            Variant::SymElastic => (strength, strength),
        }
    }

    pub fn uses_l1(self) -> bool {
        matches!(self, Variant::Lasso | Variant::SymElastic)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "plain" => Ok(Variant::Plain),
            "ridge" => Ok(Variant::Ridge),
            "lasso" => Ok(Variant::Lasso),
            "sym_elastic" | "elastic" => Ok(Variant::SymElastic),
            _ => Err(format!(
                "unknown variant `{s}` (expected plain, ridge, lasso or sym_elastic)"
            )),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainMeta {
    pub n_train: usize,
    pub final_objective: f64,
    /// Coordinate-descent sweeps; 0 for closed-form fits.
    pub iterations: usize,
    /// False when coordinate descent stopped at the sweep limit.
    pub converged: bool,
    pub seen: SeenLabels,
}

/// A fitted mapping `v = w^T M (+ offset)`.
///
/// The offset is only present when the fit standardized the word-space
/// columns; the standardization is folded into `M` and the offset.
#[derive(Clone, Debug, PartialEq)]
pub struct MappingModel {
    weights: DMatrix<f64>,
    offset: Option<Vec<f64>>,
    variant: Variant,
    lambda1: f64,
    lambda2: f64,
    meta: TrainMeta,
}

impl MappingModel {
    pub fn new(
        weights: DMatrix<f64>,
        offset: Option<Vec<f64>>,
        variant: Variant,
        lambda1: f64,
        lambda2: f64,
        meta: TrainMeta,
    ) -> Result<Self> {
        variant.check_lambdas(lambda1, lambda2)?;
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(Error::Invalid("empty mapping matrix".into()));
        }
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite mapping coefficient".into()));
        }
        if let Some(o) = &offset {
            if o.len() != weights.ncols() {
                return Err(Error::Dimension(format!(
                    "offset of length {} for d2 = {}",
                    o.len(),
                    weights.ncols()
                )));
            }
            if o.iter().any(|v| !v.is_finite()) {
                return Err(Error::Invalid("non-finite offset".into()));
            }
        }
        Ok(MappingModel {
            weights,
            offset,
            variant,
            lambda1,
            lambda2,
            meta,
        })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn offset(&self) -> Option<&[f64]> {
        self.offset.as_deref()
    }

    pub fn d1(&self) -> usize {
        self.weights.nrows()
    }

    pub fn d2(&self) -> usize {
        self.weights.ncols()
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn meta(&self) -> &TrainMeta {
        &self.meta
    }

    pub fn with_seen(mut self, seen: SeenLabels) -> Self {
        self.meta.seen = seen;
        self
    }

    /// Projects one word vector into visual space.
    pub fn predict(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.d1() {
            return Err(Error::Dimension(format!(
                "word vector of length {}, mapping expects {}",
                w.len(),
                self.d1()
            )));
        }
        let mut out: Vec<f64> = self
            .weights
            .column_iter()
            .map(|col| col.iter().zip(w).map(|(m, x)| m * x).sum())
            .collect();
        if let Some(o) = &self.offset {
            for (v, b) in out.iter_mut().zip(o) {
                *v += b;
            }
        }
        Ok(out)
    }

    pub fn predict_table(&self, words: &VectorTable) -> Result<VectorTable> {
        let rows = words
            .iter()
            .map(|(_, w)| self.predict(w))
            .collect::<Result<Vec<_>>>()?;
        VectorTable::new(words.labels().to_vec(), rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn model(m: DMatrix<f64>) -> MappingModel {
        MappingModel::new(m, None, Variant::Plain, 0.0, 0.0, TrainMeta::default()).unwrap()
    }

    #[test]
    fn variant_lambda_rules() {
        assert!(Variant::Plain.check_lambdas(0.0, 0.0).is_ok());
        assert!(Variant::Plain.check_lambdas(0.1, 0.0).is_err());
        assert!(Variant::Ridge.check_lambdas(0.0, 0.0).is_err());
        assert!(Variant::Lasso.check_lambdas(0.5, 0.0).is_ok());
        assert!(Variant::SymElastic.check_lambdas(0.5, 0.4).is_err());
        assert!(Variant::SymElastic.check_lambdas(0.5, 0.5).is_ok());
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
    }

    #[test]
    fn predict_identity_and_zero() {
        let m = model(DMatrix::identity(2, 2));
        assert_eq!(m.predict(&[1.0, 2.0]).unwrap(), [1.0, 2.0]);
        let z = model(DMatrix::zeros(2, 3));
        assert_eq!(z.predict(&[1.0, 2.0]).unwrap(), [0.0, 0.0, 0.0]);
        assert!(z.predict(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn predict_is_linear(seed in any::<u64>(), c in -10.0f64..10.0) {
            let mut r = rng::seeded(seed);
            let m = model(DMatrix::from_vec(4, 3, rng::gaussian_vec(&mut r, 12)));
            let w1 = rng::gaussian_vec(&mut r, 4);
            let w2 = rng::gaussian_vec(&mut r, 4);
            let combo: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + c * b).collect();
            let lhs = m.predict(&combo).unwrap();
            let (p1, p2) = (m.predict(&w1).unwrap(), m.predict(&w2).unwrap());
            let scale: f64 = p1.iter().chain(&p2).map(|x| x.abs()).fold(1.0, f64::max) * (1.0 + c.abs());
            for k in 0..3 {
                prop_assert!((lhs[k] - (p1[k] + c * p2[k])).abs() <= 1e-12 * scale);
            }
        }
    }
}
