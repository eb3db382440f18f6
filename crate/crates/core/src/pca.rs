//! Principal component analysis over logged channels: centering, sample
//! covariance, cyclic Jacobi eigendecomposition, contribution rates and
//! feature attribution.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Off-diagonal Frobenius norm at which Jacobi iteration stops.
pub const JACOBI_TOLERANCE: f64 = 1e-10;
pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PcaError {
    #[error("need at least 2 rows and 1 column, got {rows}x{cols}")]
    TooSmall { rows: usize, cols: usize },
    #[error("data contains a non-finite entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("{names} names for {cols} columns")]
    NameMismatch { names: usize, cols: usize },
    #[error("top_k must be in 1..={n}, got {top_k}")]
    BadTopK { top_k: usize, n: usize },
    #[error("Jacobi iteration did not converge in {0} sweeps")]
    NumericalFailure(usize),
}

/// Row-major sample matrix with one named column per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    names: Vec<String>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, names: Vec<String>) -> Result<Self, PcaError> {
        if rows < 2 || cols < 1 || values.len() != rows * cols {
            return Err(PcaError::TooSmall { rows, cols });
        }
        if names.len() != cols {
            return Err(PcaError::NameMismatch {
                names: names.len(),
                cols,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(PcaError::NonFinite {
                row: i / cols,
                col: i % cols,
            });
        }
        Ok(Self {
            rows,
            cols,
            values,
            names,
        })
    }

    /// Builds a matrix from equally long columns.
    pub fn from_columns(columns: &[&[f64]], names: Vec<String>) -> Result<Self, PcaError> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rows) {
            return Err(PcaError::TooSmall { rows: 0, cols });
        }
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            values.extend(columns.iter().map(|c| c[r]));
        }
        Self::new(rows, cols, values, names)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.cols];
        for row in self.values.chunks_exact(self.cols) {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= self.rows as f64);
        means
    }

    /// Unbiased sample covariance (divisor `rows - 1`), row-major `cols x cols`.
    pub fn covariance(&self) -> Vec<f64> {
        let n = self.cols;
        let means = self.column_means();
        let mut cov = vec![0.0; n * n];
        for row in self.values.chunks_exact(n) {
            for i in 0..n {
                let di = row[i] - means[i];
                for j in i..n {
                    cov[i * n + j] += di * (row[j] - means[j]);
                }
            }
        }
        let denom = (self.rows - 1) as f64;
        for i in 0..n {
            for j in i..n {
                let v = cov[i * n + j] / denom;
                cov[i * n + j] = v;
                cov[j * n + i] = v;
            }
        }
        cov
    }
}

/// Output of [`center`].
#[derive(Debug, Clone, PartialEq)]
pub struct Centered {
    pub data: DataMatrix,
    pub means: Vec<f64>,
    /// Names of columns that were constant (zero variance). They are kept.
    pub degenerate: Vec<String>,
}

/// Subtracts each column mean. Constant columns are reported in
/// `degenerate` rather than rejected.
pub fn center(data: &DataMatrix) -> Centered {
    let means = data.column_means();
    let mut values = data.values.clone();
    for row in values.chunks_exact_mut(data.cols) {
        for (v, m) in row.iter_mut().zip(&means) {
            *v -= m;
        }
    }
    let degenerate = (0..data.cols)
        .filter(|&c| {
            let first = data.get(0, c);
            (1..data.rows).all(|r| data.get(r, c) == first)
        })
        .map(|c| data.names[c].clone())
        .collect();
    Centered {
        data: DataMatrix {
            values,
            ..data.clone()
        },
        means,
        degenerate,
    }
}

/// Divides each column by its sample standard deviation (constant columns are
/// left untouched). Used for correlation-matrix PCA.
pub fn standardize(data: &DataMatrix) -> DataMatrix {
    let cov = data.covariance();
    let n = data.cols;
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let sd = libm::sqrt(cov[i * n + i]);
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    let mut values = data.values.clone();
    for row in values.chunks_exact_mut(n) {
        for (v, s) in row.iter_mut().zip(&scale) {
            *v /= s;
        }
    }
    DataMatrix {
        values,
        ..data.clone()
    }
}

/// Symmetric eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    /// Descending.
    pub values: Vec<f64>,
    /// Row-major `n x n`; column `k` is the eigenvector for `values[k]`.
    pub vectors: Vec<f64>,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[i * n + j] * a[i * n + j];
            }
        }
    }
    libm::sqrt(sum)
}

/// Cyclic Jacobi rotations on a symmetric row-major matrix.
pub fn jacobi_eigen(matrix: &[f64], n: usize) -> Result<SymmetricEigen, PcaError> {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = libm::sqrt(a.iter().map(|x| x * x).sum::<f64>()).max(f64::MIN_POSITIVE);
    let mut sweeps = 0;
    while off_diagonal_norm(&a, n) >= JACOBI_TOLERANCE * scale.max(1.0) {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(PcaError::NumericalFailure(JACOBI_MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        // Sign convention: largest-magnitude component positive.
        let mut big = 0.0f64;
        for k in 0..n {
            let x = v[k * n + src];
            if x.abs() > big.abs() {
                big = x;
            }
        }
        let sign = if big < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            vectors[k * n + dst] = sign * v[k * n + src];
        }
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PcaOptions {
    /// Maximum number of principal components used for selection.
    pub top_k: usize,
    /// Stop adding components once cumulative contribution reaches this.
    pub cumulative_threshold: f64,
    /// Correlation-matrix PCA instead of covariance PCA.
    pub standardize: bool,
}

impl Default for PcaOptions {
    fn default() -> Self {
        Self {
            top_k: 3,
            cumulative_threshold: 0.99,
            standardize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaReport {
    pub feature_names: Vec<String>,
    pub covariance: Vec<f64>,
    /// Descending, clipped at zero.
    pub eigenvalues: Vec<f64>,
    /// Row-major; column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: Vec<f64>,
    pub contribution_rates: Vec<f64>,
    /// Feature with the largest absolute loading in each component.
    pub dominant_features: Vec<String>,
    /// Components used for selection.
    pub components_used: usize,
    pub cumulative_rate: f64,
    pub selected: Vec<String>,
}

impl PcaReport {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|r| self.eigenvectors[r * n + k]).collect()
    }
}

/// Contribution rate of each eigenvalue: `lambda_i / sum(lambda)`.
pub fn contribution_rates(eigenvalues: &[f64]) -> Vec<f64> {
    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return vec![0.0; eigenvalues.len()];
    }
    eigenvalues.iter().map(|l| l / total).collect()
}

pub fn analyze(data: &DataMatrix, options: &PcaOptions) -> Result<PcaReport, PcaError> {
    let n = data.cols;
    if options.top_k == 0 || options.top_k > n {
        return Err(PcaError::BadTopK {
            top_k: options.top_k,
            n,
        });
    }
    let covariance = if options.standardize {
        standardize(data).covariance()
    } else {
        data.covariance()
    };
    let eig = jacobi_eigen(&covariance, n)?;
    let eigenvalues: Vec<f64> = eig.values.iter().map(|l| l.max(0.0)).collect();
    let contribution_rates = contribution_rates(&eigenvalues);

    let dominant_features: Vec<String> = (0..n)
        .map(|k| {
            let mut best = 0;
            for r in 1..n {
                if eig.vectors[r * n + k].abs() > eig.vectors[best * n + k].abs() {
                    best = r;
                }
            }
            data.names[best].clone()
        })
        .collect();

    let mut components_used = options.top_k;
    let mut cumulative = 0.0;
    for (k, cr) in contribution_rates.iter().enumerate().take(options.top_k) {
        cumulative += cr;
        if cumulative >= options.cumulative_threshold {
            components_used = k + 1;
            break;
        }
    }
    let cumulative_rate = contribution_rates.iter().take(components_used).sum();
    let mut selected: Vec<String> = Vec::new();
    for name in dominant_features.iter().take(components_used) {
        if !selected.contains(name) {
            selected.push(name.clone());
        }
    }

    Ok(PcaReport {
        feature_names: data.names.clone(),
        covariance,
        eigenvalues,
        eigenvectors: eig.vectors,
        contribution_rates,
        dominant_features,
        components_used,
        cumulative_rate,
        selected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| alloc::format!("f{i}")).collect()
    }

    #[test]
    fn center_removes_mean() {
        let d = DataMatrix::from_columns(&[&[1.0, 2.0, 3.0]], names(1)).unwrap();
        let c = center(&d);
        assert_eq!(c.data.column(0), vec![-1.0, 0.0, 1.0]);
        assert!(c.degenerate.is_empty());
        let again = center(&c.data);
        assert_eq!(again.data, c.data);
    }

    #[test]
    fn constant_column_flagged() {
        let d = DataMatrix::from_columns(&[&[5.0, 5.0, 5.0], &[1.0, 2.0, 4.0]], names(2)).unwrap();
        let c = center(&d);
        assert_eq!(c.data.column(0), vec![0.0, 0.0, 0.0]);
        assert_eq!(c.degenerate, vec!["f0".to_string()]);
    }

    #[test]
    fn rejects_non_finite_and_small() {
        assert!(matches!(
            DataMatrix::new(2, 1, vec![1.0, f64::NAN], names(1)),
            Err(PcaError::NonFinite { row: 1, col: 0 })
        ));
        assert!(DataMatrix::new(1, 1, vec![1.0], names(1)).is_err());
    }

    #[test]
    fn diagonal_covariance() {
        let eig = jacobi_eigen(&[4.0, 0.0, 0.0, 1.0], 2).unwrap();
        assert_eq!(eig.values, vec![4.0, 1.0]);
        assert_eq!(eig.vectors[0], 1.0);
        assert_eq!(eig.vectors[2], 0.0);
        assert_eq!(contribution_rates(&eig.values), vec![0.8, 0.2]);
    }

    #[test]
    fn rank_one_data() {
        let x = [1.0, -2.0, 0.5, 3.0, 7.0, -1.5];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let d = DataMatrix::from_columns(&[&x, &y], names(2)).unwrap();
        let r = analyze(&center(&d).data, &PcaOptions { top_k: 1, ..Default::default() }).unwrap();
        assert!(r.eigenvalues[1].abs() < 1e-10);
        assert_eq!(r.selected, vec!["f1".to_string()]);
    }

    #[test]
    fn bad_top_k() {
        let d = DataMatrix::from_columns(&[&[1.0, 2.0, 3.0]], names(1)).unwrap();
        assert!(matches!(
            analyze(&d, &PcaOptions { top_k: 2, ..Default::default() }),
            Err(PcaError::BadTopK { .. })
        ));
    }
}
