//! Order-independent local cost functions.
//!
//! A local cost over binary columns that depends only on the column weight
//! is stored as its weight table `f_k(0..=k)`. The per-one cost
//! `f'_k(x) = (f_k(x) - f_k(0)) / x`, its gap and range, and the grouping
//! test are derived from the table.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cyclic::Column;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// The built-in cost families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    /// Sum of squared distances from the column mean, `w(k-w)/k`.
    Sigma,
    /// `x / ((k+x+1)(k+1))`.
    Phi,
    /// `(k+x)/(k+x+1)`; `phi` shifted by `f_k(0)`.
    PhiF,
    /// Consensus-string cost `min(w, k-w)`.
    Ccs,
    /// Padded consensus cost `min(w+k-2, k-w)`.
    G,
}

impl Builtin {
    pub const ALL: [Builtin; 5] = [
        Builtin::Sigma,
        Builtin::Phi,
        Builtin::PhiF,
        Builtin::Ccs,
        Builtin::G,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Sigma => "sigma",
            Builtin::Phi => "phi",
            Builtin::PhiF => "phi_f",
            Builtin::Ccs => "ccs",
            Builtin::G => "g",
        }
    }

    pub fn value(self, k: usize, w: usize) -> Rational {
        let (k, w) = (k as i64, w as i64);
        match self {
            Builtin::Sigma => Rational::new(w * (k - w), k),
            Builtin::Phi => Rational::new(w, (k + w + 1) * (k + 1)),
            Builtin::PhiF => Rational::new(k + w, k + w + 1),
            Builtin::Ccs => Rational::from_int(w.min(k - w)),
            Builtin::G => Rational::from_int((w + k - 2).min(k - w)),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownCostFunction(s.to_string()))
    }
}

/// Weight table `f_k(0..=k)` of an order-independent cost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostTable {
    pub name: String,
    pub k: usize,
    pub values: Vec<Rational>,
}

impl CostTable {
    pub fn custom(name: impl Into<String>, values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Malformed("cost table needs at least one value".into()));
        }
        Ok(CostTable {
            name: name.into(),
            k: values.len() - 1,
            values,
        })
    }

    pub fn builtin(which: Builtin, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("cost tables need arity k >= 1".into()));
        }
        Ok(CostTable {
            name: which.name().to_string(),
            k,
            values: (0..=k).map(|w| which.value(k, w)).collect(),
        })
    }

    /// Built-in table by name: `sigma`, `phi`, `phi_f`, `ccs` or `g`.
    pub fn tabulate_builtin(name: &str, k: usize) -> Result<Self> {
        Self::builtin(name.parse()?, k)
    }

    pub fn builtin_kind(&self) -> Option<Builtin> {
        let b: Builtin = self.name.parse().ok()?;
        (CostTable::builtin(b, self.k).ok()? == *self).then_some(b)
    }

    pub fn at(&self, w: usize) -> &Rational {
        &self.values[w]
    }

    pub fn eval_local(&self, column: &Column) -> Result<Rational> {
        if column.entries.len() != self.k {
            return Err(Error::ArityMismatch {
                expected: self.k,
                got: column.entries.len(),
            });
        }
        Ok(self.values[column.weight].clone())
    }

    /// `f'_k(x)` for `1 <= x <= k`.
    pub fn fprime(&self, x: usize) -> Rational {
        assert!(x >= 1 && x <= self.k, "f' is defined on 1..=k");
        (&self.values[x] - &self.values[0]) / Rational::from(x)
    }

    pub fn derive(&self) -> Result<DerivedCost> {
        if self.k < 2 {
            return Err(Error::InvalidArgument(format!(
                "derived quantities need k >= 2, table {} has k = {}",
                self.name, self.k
            )));
        }
        let fprime: Vec<Rational> = (1..=self.k).map(|x| self.fprime(x)).collect();
        let mut sorted = fprime.clone();
        sorted.sort();
        sorted.dedup();
        let gap = sorted.windows(2).map(|w| &w[1] - &w[0]).min();
        let range = fprime.iter().map(Rational::abs).max().expect("k >= 2");
        let last = &fprime[self.k - 1];
        let is_grouping =
            fprime[..self.k - 1].iter().all(|v| last < v) && fprime[1] < fprime[0];
        Ok(DerivedCost {
            fprime,
            gap,
            range,
            is_grouping,
        })
    }
}

/// Derived quantities of a cost table; `fprime[x - 1]` holds `f'_k(x)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedCost {
    pub fprime: Vec<Rational>,
    /// Smallest positive difference between two values of `f'`; `None` when
    /// `f'` is constant.
    pub gap: Option<Rational>,
    pub range: Rational,
    pub is_grouping: bool,
}

impl DerivedCost {
    pub fn fprime_at(&self, x: usize) -> &Rational {
        &self.fprime[x - 1]
    }

    pub fn gap_or_err(&self) -> Result<Rational> {
        self.gap
            .clone()
            .ok_or_else(|| Error::InvalidArgument("cost function has constant f' (no gap)".into()))
    }
}

/// A named cost family, instantiated at any arity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostFamily {
    Builtin(Builtin),
    /// A single fixed table; only usable at its own arity.
    Table(CostTable),
}

impl CostFamily {
    pub fn at_arity(&self, k: usize) -> Result<CostTable> {
        match self {
            CostFamily::Builtin(b) => CostTable::builtin(*b, k),
            CostFamily::Table(t) if t.k == k => Ok(t.clone()),
            CostFamily::Table(t) => Err(Error::ArityMismatch {
                expected: k,
                got: t.k,
            }),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            CostFamily::Builtin(b) => b.name(),
            CostFamily::Table(t) => &t.name,
        }
    }
}

impl From<Builtin> for CostFamily {
    fn from(b: Builtin) -> Self {
        CostFamily::Builtin(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn col(entries: &[u8]) -> Column {
        Column {
            index: 1,
            entries: entries.to_vec(),
            weight: entries.iter().map(|&b| b as usize).sum(),
        }
    }

    #[test]
    fn sigma_local_costs() {
        let s3 = CostTable::builtin(Builtin::Sigma, 3).unwrap();
        assert_eq!(s3.eval_local(&col(&[1, 0, 1])).unwrap(), q(2, 3));
        assert_eq!(s3.eval_local(&col(&[0, 0, 0])).unwrap(), q(0, 1));
        assert_eq!(s3.eval_local(&col(&[1, 1, 0])).unwrap(), q(2, 3));
        assert!(matches!(
            s3.eval_local(&col(&[1, 0])),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn sigma_matches_variance_definition() {
        for k in 1..=7usize {
            let t = CostTable::builtin(Builtin::Sigma, k).unwrap();
            for w in 0..=k {
                let mean = q(w as i64, k as i64);
                let direct: Rational = (0..k)
                    .map(|j| {
                        let x = if j < w { q(1, 1) } else { q(0, 1) };
                        (x - &mean).square()
                    })
                    .sum();
                assert_eq!(t.at(w), &direct);
            }
        }
    }

    #[test]
    fn derived_examples() {
        let d = CostTable::builtin(Builtin::Sigma, 5).unwrap().derive().unwrap();
        assert_eq!(d.gap, Some(q(1, 5)));
        assert_eq!(d.range, q(4, 5));
        assert!(d.is_grouping);

        let d = CostTable::builtin(Builtin::Ccs, 4).unwrap().derive().unwrap();
        assert_eq!(d.fprime_at(1), &q(1, 1));
        assert_eq!(d.fprime_at(2), &q(1, 1));
        assert!(!d.is_grouping);

        let d = CostTable::builtin(Builtin::Phi, 5).unwrap().derive().unwrap();
        for x in 1..=5i64 {
            assert_eq!(d.fprime_at(x as usize), &q(1, 6 * (6 + x)));
        }
        assert!(d.fprime.windows(2).all(|w| w[1] < w[0]));
        assert!(d.is_grouping);
    }

    #[test]
    fn builtin_tables() {
        let phi = CostTable::tabulate_builtin("phi", 5).unwrap();
        assert_eq!(phi.at(5), &q(5, 66));
        assert_eq!(
            CostTable::tabulate_builtin("sigma", 1).unwrap().values,
            vec![q(0, 1), q(0, 1)]
        );
        for k in 2..=12usize {
            let g = CostTable::builtin(Builtin::G, k).unwrap();
            let ccs = CostTable::builtin(Builtin::Ccs, 2 * k - 2).unwrap();
            for w in 0..=k {
                assert_eq!(g.at(w), ccs.at(w + k - 2));
            }
        }
        assert!(matches!(
            CostTable::tabulate_builtin("median", 3),
            Err(Error::UnknownCostFunction(_))
        ));
    }

    #[test]
    fn constant_fprime_has_no_gap() {
        let linear = CostTable::custom("linear", (0..=4).map(|w| q(3 * w + 1, 1)).collect()).unwrap();
        let d = linear.derive().unwrap();
        assert_eq!(d.gap, None);
        assert!(!d.is_grouping);
        assert!(d.gap_or_err().is_err());
    }

    #[test]
    fn derive_needs_k_at_least_two() {
        assert!(CostTable::builtin(Builtin::Sigma, 1).unwrap().derive().is_err());
    }

    #[test]
    fn reconstruction_identity() {
        for b in Builtin::ALL {
            for k in 2..=9 {
                let t = CostTable::builtin(b, k).unwrap();
                for x in 1..=k {
                    assert_eq!(t.at(x), &(t.at(0) + Rational::from(x) * t.fprime(x)));
                }
            }
        }
    }

    #[test]
    fn grouping_classification() {
        for k in 2..=30 {
            assert!(CostTable::builtin(Builtin::Sigma, k).unwrap().derive().unwrap().is_grouping);
            assert!(CostTable::builtin(Builtin::Phi, k).unwrap().derive().unwrap().is_grouping);
        }
        // At k = 3 the table is (0,1,1,0), so f' = (1, 1/2, 0) passes the test.
        assert!(CostTable::builtin(Builtin::Ccs, 3).unwrap().derive().unwrap().is_grouping);
        for k in 3..=30 {
            if k >= 4 {
                let d = CostTable::builtin(Builtin::Ccs, k).unwrap().derive().unwrap();
                assert_eq!(d.fprime_at(1), d.fprime_at(2));
                assert!(!d.is_grouping);
            }
            let g = CostTable::builtin(Builtin::G, k).unwrap().derive().unwrap();
            assert!(g.is_grouping);
            assert_eq!(g.range, q(1, 1));
            let kk = k as i64;
            assert_eq!(g.gap, Some(q(2, kk - 1) - q(2, kk)));
        }
    }

    #[test]
    fn builtin_kind_recognises_tables() {
        let t = CostTable::builtin(Builtin::Phi, 4).unwrap();
        assert_eq!(t.builtin_kind(), Some(Builtin::Phi));
        let mut fake = t.clone();
        fake.values[1] = q(7, 1);
        assert_eq!(fake.builtin_kind(), None);
    }
}
