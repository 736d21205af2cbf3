use crate::error::{Error, Result};

/// `n` rows of (covariate vector, response), stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    covariates: Vec<f64>,
    responses: Vec<f64>,
    dim: usize,
    covariate_names: Vec<String>,
    response_name: String,
}

impl Dataset {
    /// Builds a dataset from row-major covariates. Entries must be finite and
    /// there must be at least one row.
    pub fn new(covariates: Vec<f64>, dim: usize, responses: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "covariate dimension must be at least 1".into(),
            ));
        }
        if responses.is_empty() {
            return Err(Error::InvalidParameter(
                "dataset must have at least one row".into(),
            ));
        }
        if covariates.len() != responses.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: responses.len() * dim,
                found: covariates.len(),
            });
        }
        if let Some(i) = covariates.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite covariate in row {}",
                i / dim
            )));
        }
        if let Some(i) = responses.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite response in row {i}"
            )));
        }
        let covariate_names = (0..dim).map(|j| format!("x{j}")).collect();
        Ok(Self {
            covariates,
            responses,
            dim,
            covariate_names,
            response_name: "y".into(),
        })
    }

    /// Univariate-covariate convenience constructor.
    pub fn univariate(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        Self::new(xs, 1, ys)
    }

    pub fn with_names(
        mut self,
        covariate_names: Vec<String>,
        response_name: String,
    ) -> Result<Self> {
        if covariate_names.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: covariate_names.len(),
            });
        }
        self.covariate_names = covariate_names;
        self.response_name = response_name;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.covariates[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.covariates.chunks_exact(self.dim)
    }

    pub fn covariates(&self) -> &[f64] {
        &self.covariates
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_ragged() {
        assert!(Dataset::univariate(vec![], vec![]).is_err());
        assert!(matches!(
            Dataset::new(vec![1.0, 2.0, 3.0], 2, vec![1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Dataset::univariate(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn row_access() {
        let d = Dataset::new(vec![1.0, 2.0, 3.0, 4.0], 2, vec![10.0, 20.0]).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert_eq!(d.rows().count(), 2);
    }
}
