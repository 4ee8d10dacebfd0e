//! In-memory dataset: a numeric design matrix with named columns, row
//! identifiers, and an optional 0/1 response.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2};
use std::collections::HashSet;

/// A rectangular numeric dataset. Cells are `f64`; missing values are
/// represented as NaN and are only admitted through [`Dataset::with_missing`]
/// (model-fitting code requires complete data and checks via
/// [`Dataset::require_complete`]).
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Array2<f64>,
    col_names: Vec<String>,
    row_ids: Vec<String>,
    y: Option<Array1<f64>>,
}

impl Dataset {
    /// Build a dataset from complete (finite) data.
    pub fn new(
        x: Array2<f64>,
        col_names: Vec<String>,
        row_ids: Vec<String>,
        y: Option<Array1<f64>>,
    ) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid(
                "dataset contains non-finite cells; use with_missing to allow NaN".into(),
            ));
        }
        Self::with_missing(x, col_names, row_ids, y)
    }

    /// Build a dataset where NaN cells are allowed (infinite values are not).
    pub fn with_missing(
        x: Array2<f64>,
        col_names: Vec<String>,
        row_ids: Vec<String>,
        y: Option<Array1<f64>>,
    ) -> Result<Self> {
        let (n, p) = x.dim();
        if col_names.len() != p {
            return Err(Error::DimensionMismatch {
                context: "column names".into(),
                expected: p,
                actual: col_names.len(),
            });
        }
        if row_ids.len() != n {
            return Err(Error::DimensionMismatch {
                context: "row ids".into(),
                expected: n,
                actual: row_ids.len(),
            });
        }
        if x.iter().any(|v| v.is_infinite()) {
            return Err(Error::Invalid("dataset contains infinite cells".into()));
        }
        let mut seen = HashSet::new();
        for name in &col_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Duplicate {
                    what: "column name",
                    name: name.clone(),
                });
            }
        }
        let mut seen = HashSet::new();
        for id in &row_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Duplicate {
                    what: "row id",
                    name: id.clone(),
                });
            }
        }
        if let Some(y) = &y {
            if y.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "response".into(),
                    expected: n,
                    actual: y.len(),
                });
            }
            if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
                return Err(Error::Invalid("response must be coded 0/1".into()));
            }
        }
        Ok(Self {
            x,
            col_names,
            row_ids,
            y,
        })
    }

    /// Convenience constructor with synthesized names (`x1..xp`, `r1..rn`).
    pub fn from_matrix(x: Array2<f64>, y: Option<Array1<f64>>) -> Result<Self> {
        let (n, p) = x.dim();
        let col_names = (1..=p).map(|j| format!("x{j}")).collect();
        let row_ids = (1..=n).map(|i| format!("r{i}")).collect();
        Self::new(x, col_names, row_ids, y)
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn col_names(&self) -> &[String] {
        &self.col_names
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn y(&self) -> Option<&Array1<f64>> {
        self.y.as_ref()
    }

    /// The response, or an error when the dataset has none.
    pub fn require_y(&self) -> Result<&Array1<f64>> {
        self.y
            .as_ref()
            .ok_or_else(|| Error::Invalid("dataset has no response column".into()))
    }

    /// Index of a column by name.
    pub fn col_index(&self, name: &str) -> Result<usize> {
        self.col_names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Counts of response classes `(n0, n1)`.
    pub fn class_counts(&self) -> Result<(usize, usize)> {
        let y = self.require_y()?;
        let n1 = y.iter().filter(|v| **v == 1.0).count();
        Ok((y.len() - n1, n1))
    }

    /// Error out when any cell is NaN, naming one offending location.
    pub fn require_complete(&self) -> Result<()> {
        for (i, row) in self.x.rows().into_iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.is_nan() {
                    return Err(Error::Invalid(format!(
                        "missing value at row '{}', column '{}'",
                        self.row_ids[i], self.col_names[j]
                    )));
                }
            }
        }
        Ok(())
    }

    /// New dataset restricted to `rows` (kept in the given order).
    pub fn subset_rows(&self, rows: &[usize]) -> Result<Self> {
        for &i in rows {
            if i >= self.n_rows() {
                return Err(Error::Invalid(format!(
                    "row index {i} out of range (n = {})",
                    self.n_rows()
                )));
            }
        }
        let p = self.n_cols();
        let mut x = Array2::zeros((rows.len(), p));
        for (k, &i) in rows.iter().enumerate() {
            x.row_mut(k).assign(&self.x.row(i));
        }
        let row_ids = rows.iter().map(|&i| self.row_ids[i].clone()).collect();
        let y = self
            .y
            .as_ref()
            .map(|y| Array1::from_iter(rows.iter().map(|&i| y[i])));
        Self::with_missing(x, self.col_names.clone(), row_ids, y)
    }

    /// New dataset restricted to the named columns (kept in the given order).
    pub fn select_columns(&self, names: &[String]) -> Result<Self> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.col_index(n))
            .collect::<Result<_>>()?;
        let n = self.n_rows();
        let mut x = Array2::zeros((n, idx.len()));
        for (k, &j) in idx.iter().enumerate() {
            x.column_mut(k).assign(&self.x.column(j));
        }
        Self::with_missing(x, names.to_vec(), self.row_ids.clone(), self.y.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn small() -> Dataset {
        Dataset::from_matrix(
            array![[1.0, 10.0], [2.0, 20.0], [3.0, 30.0]],
            Some(array![0.0, 1.0, 1.0]),
        )
        .unwrap()
    }

    #[test]
    fn rejects_duplicate_names() {
        let err = Dataset::new(
            array![[1.0, 2.0]],
            vec!["a".into(), "a".into()],
            vec!["r1".into()],
            None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate column name"), "{err}");
    }

    #[test]
    fn rejects_non_binary_response() {
        let err = Dataset::from_matrix(array![[1.0], [2.0]], Some(array![0.0, 2.0])).unwrap_err();
        assert!(err.to_string().contains("0/1"), "{err}");
    }

    #[test]
    fn rejects_nan_unless_with_missing() {
        let x = array![[1.0, f64::NAN]];
        assert!(Dataset::from_matrix(x.clone(), None).is_err());
        let ds = Dataset::with_missing(x, vec!["a".into(), "b".into()], vec!["r1".into()], None)
            .unwrap();
        let err = ds.require_complete().unwrap_err();
        assert!(err.to_string().contains("column 'b'"), "{err}");
    }

    #[test]
    fn subset_and_select() {
        let ds = small();
        let sub = ds.subset_rows(&[2, 0]).unwrap();
        assert_eq!(sub.row_ids(), ["r3", "r1"]);
        assert_eq!(sub.x()[[0, 1]], 30.0);
        assert_eq!(sub.y().unwrap()[0], 1.0);

        let sel = ds.select_columns(&["x2".into()]).unwrap();
        assert_eq!(sel.n_cols(), 1);
        assert_eq!(sel.x()[[1, 0]], 20.0);
        assert!(ds.select_columns(&["nope".into()]).is_err());
    }

    #[test]
    fn class_counts() {
        assert_eq!(small().class_counts().unwrap(), (1, 2));
    }
}
