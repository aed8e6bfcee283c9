//! Least-squares substrate: design assembly, QR-based residual sums of
//! squares and rank diagnostics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::ModelSpec;

/// Diagonal entries of R below this fraction of the largest one count as zero.
pub const RANK_RTOL: f64 = 1e-10;

/// A residual sum of squares at or below `SATURATION_RTOL * |y|^2` is
/// rounding noise of an exact fit and is reported as exactly zero.
pub const SATURATION_RTOL: f64 = 1e-24;

/// Sufficient statistics of one least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub n: usize,
    /// Design columns, intercept counted.
    pub d: usize,
    pub rss: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankReport {
    FullRank,
    /// 1-based column positions whose pivots fell below tolerance.
    Deficient(Vec<usize>),
}

impl RankReport {
    pub fn is_full(&self) -> bool {
        matches!(self, RankReport::FullRank)
    }
}

/// Intercept column followed by the selected covariates in ascending index order.
pub fn build_design(dataset: &Dataset, model: ModelSpec) -> Result<DMatrix<f64>> {
    let p = dataset.p();
    if model.max_index() > p {
        return Err(Error::InvalidModel(format!(
            "model {model} references covariate {} but the dataset has p = {p}",
            model.max_index()
        )));
    }
    let cols = model.indices();
    let n = dataset.n();
    let x = dataset.x();
    Ok(DMatrix::from_fn(n, cols.len() + 1, |i, c| {
        if c == 0 {
            1.0
        } else {
            x[(i, cols[c - 1] - 1)]
        }
    }))
}

fn deficient_columns(r: &DMatrix<f64>, ncols: usize) -> Vec<usize> {
    let k = r.nrows().min(ncols);
    let scale = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let tol = RANK_RTOL * scale;
    let mut bad: Vec<usize> = (0..k)
        .filter(|&i| !(r[(i, i)].abs() > tol))
        .map(|i| i + 1)
        .collect();
    // columns beyond the row count have no pivot at all
    bad.extend(k + 1..=ncols);
    bad
}

/// Numerical rank from the diagonal of a Householder QR factor.
pub fn rank_check(matrix: &DMatrix<f64>) -> RankReport {
    if matrix.ncols() == 0 {
        return RankReport::FullRank;
    }
    let r = matrix.clone().qr().unpack_r();
    let bad = deficient_columns(&r, matrix.ncols());
    if bad.is_empty() {
        RankReport::FullRank
    } else {
        RankReport::Deficient(bad)
    }
}

/// Residual sum of squares of `y` after projection onto the model's column
/// space, computed as the squared tail of `Q^T y`.
pub fn fit_rss(dataset: &Dataset, model: ModelSpec) -> Result<ModelFit> {
    let design = build_design(dataset, model)?;
    rss_from_design(&design, dataset.y(), model)
}

pub(crate) fn rss_from_design(
    design: &DMatrix<f64>,
    y: &DVector<f64>,
    model: ModelSpec,
) -> Result<ModelFit> {
    let (n, d) = design.shape();
    if n < d {
        return Err(Error::InsufficientData { n, required: d });
    }
    let qr = design.clone().qr();
    let bad = deficient_columns(&qr.r(), d);
    if !bad.is_empty() {
        return Err(Error::SingularDesign {
            model,
            columns: bad,
        });
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let mut rss: f64 = qty.rows(d, n - d).iter().map(|v| v * v).sum();
    if rss <= SATURATION_RTOL * y.norm_squared() {
        rss = 0.0;
    }
    Ok(ModelFit { n, d, rss })
}

/// `log |X^T X|` from the QR factor of `X`; errors on rank deficiency.
pub fn log_det_gram(matrix: &DMatrix<f64>) -> Result<f64> {
    let (n, d) = matrix.shape();
    if n < d {
        return Err(Error::InsufficientData { n, required: d });
    }
    let r = matrix.clone().qr().unpack_r();
    let bad = deficient_columns(&r, d);
    if !bad.is_empty() {
        return Err(Error::SingularDesign {
            model: ModelSpec::NULL,
            columns: bad,
        });
    }
    Ok((0..d).map(|i| 2.0 * r[(i, i)].abs().ln()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset::from_columns(
            vec![1.0, 3.0, 2.0, 5.0],
            vec![
                vec![1.0, 2.0, 3.0, 4.0],
                vec![0.5, -1.0, 2.0, 0.0],
                vec![3.0, 1.0, 4.0, 1.5],
            ],
        )
        .unwrap()
    }

    #[test]
    fn design_single_covariate() {
        let d = toy();
        let m = build_design(&d, ModelSpec::from_indices([2]).unwrap()).unwrap();
        assert_eq!(m.shape(), (4, 2));
        assert!(m.column(0).iter().all(|&v| v == 1.0));
        assert_eq!(m.column(1).as_slice(), &[0.5, -1.0, 2.0, 0.0]);
    }

    #[test]
    fn design_null_and_full() {
        let d = toy();
        let m0 = build_design(&d, ModelSpec::NULL).unwrap();
        assert_eq!(m0.shape(), (4, 1));
        assert!(m0.iter().all(|&v| v == 1.0));
        let full = build_design(&d, ModelSpec::from_indices([1, 2, 3]).unwrap()).unwrap();
        assert_eq!(full.shape(), (4, 4));
        assert_eq!(full.column(3).as_slice(), &[3.0, 1.0, 4.0, 1.5]);
    }

    #[test]
    fn design_index_out_of_range() {
        let d = toy();
        let r = build_design(&d, ModelSpec::from_indices([4]).unwrap());
        assert!(matches!(r, Err(Error::InvalidModel(_))));
    }

    #[test]
    fn rss_constant_response_is_zero() {
        let d = Dataset::from_columns(vec![1.0; 4], vec![vec![1.0, 2.0, 3.0, 5.0]]).unwrap();
        assert_eq!(fit_rss(&d, ModelSpec::NULL).unwrap().rss, 0.0);
    }

    #[test]
    fn rss_two_points_null_model() {
        let d = Dataset::from_columns(vec![0.0, 2.0], vec![vec![1.0, 2.0]]).unwrap();
        let fit = fit_rss(&d, ModelSpec::NULL).unwrap();
        assert!((fit.rss - 2.0).abs() < 1e-14);
        assert_eq!((fit.n, fit.d), (2, 1));
    }

    #[test]
    fn rss_exact_linear_fit() {
        let d = Dataset::from_columns(vec![1.0, 2.0, 3.0], vec![vec![1.0, 2.0, 3.0]]).unwrap();
        let fit = fit_rss(&d, ModelSpec::from_indices([1]).unwrap()).unwrap();
        assert_eq!(fit.rss, 0.0);
    }

    #[test]
    fn rss_insufficient_data() {
        let d =
            Dataset::from_columns(vec![1.0, 2.0], vec![vec![1.0, 2.0], vec![0.0, 3.0]]).unwrap();
        let r = fit_rss(&d, ModelSpec::from_indices([1, 2]).unwrap());
        assert_eq!(r, Err(Error::InsufficientData { n: 2, required: 3 }));
    }

    #[test]
    fn rss_singular_design_reports_columns() {
        let d = Dataset::from_columns(
            vec![1.0, 2.0, 0.0, 4.0],
            vec![vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 4.0, 6.0, 8.0]],
        )
        .unwrap();
        let m = ModelSpec::from_indices([1, 2]).unwrap();
        match fit_rss(&d, m) {
            Err(Error::SingularDesign { model, columns }) => {
                assert_eq!(model, m);
                assert_eq!(columns, vec![3]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rank_identity_full() {
        assert_eq!(rank_check(&DMatrix::identity(3, 3)), RankReport::FullRank);
    }

    #[test]
    fn rank_duplicated_column() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 2.0, 0.0, 1.0, 1.0, 3.0, 5.0, 5.0]);
        assert!(matches!(rank_check(&m), RankReport::Deficient(c) if c == vec![3]));
    }

    #[test]
    fn rank_intercept_collinearity() {
        let m = DMatrix::from_element(5, 2, 1.0);
        assert!(!rank_check(&m).is_full());
    }

    #[test]
    fn log_det_gram_matches_direct() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 1.0, -1.0, 1.0, 2.0]);
        let g = x.transpose() * &x;
        assert!((log_det_gram(&x).unwrap() - g.determinant().ln()).abs() < 1e-12);
    }
}
