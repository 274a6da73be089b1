//! Dense row-major storage, row standardization and the static analytics
//! (coherence, scaled condition numbers, the row-difference matrix) that the
//! convergence bounds consume.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::tol;

/// A dense real matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must be non-empty, got {rows} x {cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows} x {cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has {} entries, expected {cols}",
                    i + 1,
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// `M x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "vector length must match column count");
        self.row_iter().map(|row| dot(row, x)).collect()
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A system `A x = b` whose rows all have unit Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedSystem {
    a: DenseMatrix,
    b: Vec<f64>,
}

impl StandardizedSystem {
    /// Wraps an already standardized system, checking every row norm.
    pub fn new(a: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        check_rhs(&a, &b)?;
        for (i, row) in a.row_iter().enumerate() {
            let nrm = norm(row);
            if (nrm - 1.0).abs() > tol::UNIT_NORM {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has norm {nrm}, expected 1",
                    i + 1
                )));
            }
        }
        Ok(Self { a, b })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn rows(&self) -> usize {
        self.a.rows
    }

    pub fn cols(&self) -> usize {
        self.a.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.a.row(i)
    }

    /// Returns a copy with the right-hand side replaced.
    pub fn with_rhs(&self, b: Vec<f64>) -> Result<Self> {
        check_rhs(&self.a, &b)?;
        Ok(Self {
            a: self.a.clone(),
            b,
        })
    }

    /// `||A x - b||_2`.
    pub fn residual_norm(&self, x: &[f64]) -> f64 {
        self.a
            .row_iter()
            .zip(&self.b)
            .map(|(row, bi)| {
                let r = dot(row, x) - bi;
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }
}

fn check_rhs(a: &DenseMatrix, b: &[f64]) -> Result<()> {
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            a.rows
        )));
    }
    if let Some(pos) = b.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: pos, col: 0 });
    }
    Ok(())
}

/// Scales every equation to a unit-norm row. The solution set is unchanged.
pub fn standardize(a: &DenseMatrix, b: &[f64]) -> Result<StandardizedSystem> {
    check_rhs(a, b)?;
    let mut data = Vec::with_capacity(a.data.len());
    let mut rhs = Vec::with_capacity(b.len());
    for (i, (row, bi)) in a.row_iter().zip(b).enumerate() {
        let nrm = norm(row);
        if nrm <= tol::ZERO_ROW {
            return Err(Error::ZeroRow(i));
        }
        data.extend(row.iter().map(|v| v / nrm));
        rhs.push(bi / nrm);
    }
    Ok(StandardizedSystem {
        a: DenseMatrix {
            rows: a.rows,
            cols: a.cols,
            data,
        },
        b: rhs,
    })
}

/// Smallest and largest absolute inner product between distinct rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceStats {
    pub delta: f64,
    pub big_delta: f64,
}

pub fn coherence(s: &StandardizedSystem) -> Result<CoherenceStats> {
    let m = s.rows();
    if m < 2 {
        return Err(Error::TooFewRows { needed: 2, got: m });
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for j in 0..m {
        let aj = s.row(j);
        for k in (j + 1)..m {
            let c = dot(aj, s.row(k)).abs();
            lo = lo.min(c);
            hi = hi.max(c);
        }
    }
    Ok(CoherenceStats {
        delta: lo.clamp(0.0, 1.0),
        big_delta: hi.clamp(0.0, 1.0),
    })
}

/// Frobenius norm, smallest singular value and scaled condition number
/// `R = ||M||_F^2 / sigma_min^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionStats {
    pub frob_sq: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub scaled_condition: f64,
}

impl ConditionStats {
    fn from_extremes(frob_sq: f64, sigma_min: f64, sigma_max: f64, floor: f64) -> Result<Self> {
        let ratio = if sigma_max > 0.0 {
            sigma_min / sigma_max
        } else {
            0.0
        };
        if !(ratio > floor) {
            return Err(Error::RankDeficient { ratio });
        }
        Ok(Self {
            frob_sq,
            sigma_min,
            sigma_max,
            scaled_condition: frob_sq / (sigma_min * sigma_min),
        })
    }
}

/// Condition statistics through a dense SVD of `m`.
pub fn condition_stats(m: &DenseMatrix) -> Result<ConditionStats> {
    let sv = m.to_nalgebra().singular_values();
    let sigma_max = sv.max();
    // fewer rows than columns leaves a null space the SVD does not report
    let sigma_min = if m.rows < m.cols { 0.0 } else { sv.min() };
    ConditionStats::from_extremes(m.frobenius_sq(), sigma_min, sigma_max, tol::RANK_RATIO)
}

/// Accumulates `sum_i w_i w_i^T` over streamed rows and reads the extreme
/// singular values off its eigenvalues.
struct GramAccumulator {
    n: usize,
    gram: Vec<f64>,
    frob_sq: f64,
}

impl GramAccumulator {
    fn new(n: usize) -> Self {
        Self {
            n,
            gram: vec![0.0; n * n],
            frob_sq: 0.0,
        }
    }

    fn add_row(&mut self, w: &[f64], weight: f64) {
        let n = self.n;
        for i in 0..n {
            let wi = weight * w[i];
            if wi == 0.0 {
                continue;
            }
            let dst = &mut self.gram[i * n..(i + 1) * n];
            for j in i..n {
                dst[j] += wi * w[j];
            }
        }
        self.frob_sq += weight * dot(w, w);
    }

    fn finish(self) -> Result<ConditionStats> {
        let n = self.n;
        let sym = DMatrix::from_fn(n, n, |i, j| {
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            self.gram[lo * n + hi]
        });
        let eig = SymmetricEigen::new(sym).eigenvalues;
        let lmax = eig.max().max(0.0);
        let lmin = eig.min().max(0.0);
        ConditionStats::from_extremes(
            self.frob_sq,
            lmin.sqrt(),
            lmax.sqrt(),
            tol::RANK_RATIO.max(tol::GRAM_RANK_RATIO),
        )
    }
}

/// The `m^2 x n` matrix of normalized row differences.
///
/// Row `m*j + i` (0-based) holds `(a_j - a_i) / ||a_j - a_i||`, and the zero
/// vector when `i == j` or the two rows coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaMatrix {
    base_m: usize,
    matrix: DenseMatrix,
}

impl OmegaMatrix {
    pub fn base_rows(&self) -> usize {
        self.base_m
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// Row for the ordered pair `(j, i)`, both 0-based.
    pub fn pair_row(&self, j: usize, i: usize) -> &[f64] {
        self.matrix.row(omega_index(self.base_m, j, i))
    }

    /// Condition statistics of the full `m^2 x n` matrix (zero rows
    /// included) via its Gram matrix. `scaled_condition` is `Q`.
    pub fn condition_stats(&self) -> Result<ConditionStats> {
        let mut acc = GramAccumulator::new(self.matrix.cols);
        for row in self.matrix.row_iter() {
            acc.add_row(row, 1.0);
        }
        acc.finish()
    }
}

/// 0-based storage index of the difference row for the pair `(j, i)`.
pub fn omega_index(m: usize, j: usize, i: usize) -> usize {
    m * j + i
}

/// Writes `(a_j - a_i)/||a_j - a_i||` into `out`; returns false and zeroes
/// `out` for coincident rows.
fn difference_row(aj: &[f64], ai: &[f64], out: &mut [f64]) -> bool {
    for ((o, x), y) in out.iter_mut().zip(aj).zip(ai) {
        *o = x - y;
    }
    let nrm = norm(out);
    if nrm <= tol::DUPLICATE_ROW {
        out.iter_mut().for_each(|o| *o = 0.0);
        return false;
    }
    out.iter_mut().for_each(|o| *o /= nrm);
    true
}

pub fn omega(s: &StandardizedSystem) -> Result<OmegaMatrix> {
    let m = s.rows();
    let n = s.cols();
    if m < 2 {
        return Err(Error::TooFewRows { needed: 2, got: m });
    }
    let mut data = vec![0.0; m * m * n];
    for j in 0..m {
        for i in 0..m {
            if i == j {
                continue;
            }
            let at = omega_index(m, j, i) * n;
            difference_row(s.row(j), s.row(i), &mut data[at..at + n]);
        }
    }
    Ok(OmegaMatrix {
        base_m: m,
        matrix: DenseMatrix {
            rows: m * m,
            cols: n,
            data,
        },
    })
}

/// `Q` statistics of the difference matrix without materializing it.
///
/// Rows `(j, i)` and `(i, j)` are negatives of each other and contribute the
/// same outer product, so each unordered pair is visited once with weight 2.
pub fn omega_condition_stats(s: &StandardizedSystem) -> Result<ConditionStats> {
    let m = s.rows();
    let n = s.cols();
    if m < 2 {
        return Err(Error::TooFewRows { needed: 2, got: m });
    }
    let mut acc = GramAccumulator::new(n);
    let mut w = vec![0.0; n];
    for j in 0..m {
        for i in (j + 1)..m {
            if difference_row(s.row(j), s.row(i), &mut w) {
                acc.add_row(&w, 2.0);
            }
        }
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn sys(rows: &[&[f64]]) -> StandardizedSystem {
        let a = DenseMatrix::from_rows(rows).unwrap();
        let b = vec![0.0; a.rows()];
        standardize(&a, &b).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn standardize_scales_rows_and_rhs() {
        let a = DenseMatrix::from_rows(&[[3.0, 0.0], [0.0, 2.0]]).unwrap();
        let s = standardize(&a, &[6.0, 2.0]).unwrap();
        assert_eq!(s.row(0), &[1.0, 0.0]);
        assert_eq!(s.row(1), &[0.0, 1.0]);
        assert_eq!(s.rhs(), &[2.0, 1.0]);
    }

    #[test]
    fn standardize_identity_is_unchanged() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let s = standardize(&a, &[5.0, 7.0]).unwrap();
        assert_eq!(s.matrix(), &a);
        assert_eq!(s.rhs(), &[5.0, 7.0]);
    }

    #[test]
    fn standardize_single_row() {
        let a = DenseMatrix::from_rows(&[[1.0, 1.0]]).unwrap();
        let s = standardize(&a, &[2.0]).unwrap();
        assert!(close(s.row(0)[0], H, 1e-15));
        assert!(close(s.row(0)[1], H, 1e-15));
        assert!(close(s.rhs()[0], 2f64.sqrt(), 1e-15));
    }

    #[test]
    fn standardize_errors() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert_eq!(standardize(&a, &[1.0, 1.0]), Err(Error::ZeroRow(1)));
        assert!(matches!(
            standardize(&a, &[1.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn new_rejects_non_finite_and_ragged() {
        assert!(matches!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(DenseMatrix::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn coherence_examples() {
        let c = coherence(&sys(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!((c.delta, c.big_delta), (0.0, 0.0));

        let c = coherence(&sys(&[&[1.0, 0.0], &[H, H], &[0.0, 1.0]])).unwrap();
        assert!(close(c.delta, 0.0, 1e-15));
        assert!(close(c.big_delta, H, 1e-15));

        let c = coherence(&sys(&[&[1.0, 0.0], &[1.0, 0.0]])).unwrap();
        assert_eq!((c.delta, c.big_delta), (1.0, 1.0));

        assert_eq!(
            coherence(&sys(&[&[1.0, 0.0]])),
            Err(Error::TooFewRows { needed: 2, got: 1 })
        );
    }

    #[test]
    fn condition_examples() {
        let id = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let c = condition_stats(&id).unwrap();
        assert!(close(c.frob_sq, 2.0, 1e-15));
        assert!(close(c.sigma_min, 1.0, 1e-14));
        assert!(close(c.scaled_condition, 2.0, 1e-13));

        // eigenvalues of M^T M are 1 +- 1/sqrt(2)
        let m = DenseMatrix::from_rows(&[[1.0, 0.0], [H, H]]).unwrap();
        let c = condition_stats(&m).unwrap();
        assert!(close(c.scaled_condition, 2.0 / (1.0 - H), 1e-10));
        assert!(close(c.scaled_condition, 6.828427124746, 1e-9));

        let m = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let c = condition_stats(&m).unwrap();
        assert!(close(c.frob_sq, 3.0, 1e-15));
        assert!(close(c.sigma_min, 1.0, 1e-14));
        assert!(close(c.scaled_condition, 3.0, 1e-13));
    }

    #[test]
    fn condition_rank_deficient() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [-1.0, -2.0]]).unwrap();
        assert!(matches!(
            condition_stats(&m),
            Err(Error::RankDeficient { .. })
        ));
        let wide = DenseMatrix::from_rows(&[[1.0, 1.0]]).unwrap();
        assert!(matches!(
            condition_stats(&wide),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn omega_two_orthonormal_rows() {
        let om = omega(&sys(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        let rows: Vec<&[f64]> = om.matrix().row_iter().collect();
        assert_eq!(rows[0], &[0.0, 0.0]);
        assert!(close(rows[1][0], H, 1e-15) && close(rows[1][1], -H, 1e-15));
        assert!(close(rows[2][0], -H, 1e-15) && close(rows[2][1], H, 1e-15));
        assert_eq!(rows[3], &[0.0, 0.0]);
    }

    #[test]
    fn omega_duplicate_rows_are_zero() {
        let om = omega(&sys(&[&[1.0, 0.0], &[1.0, 0.0]])).unwrap();
        assert!(om.matrix().as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn omega_three_orthonormal_rows() {
        let s = sys(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let om = omega(&s).unwrap();
        assert_eq!(om.matrix().rows(), 9);
        let norms: Vec<f64> = om.matrix().row_iter().map(norm).collect();
        assert_eq!(norms.iter().filter(|v| **v > 0.0).count(), 6);
        assert!(norms
            .iter()
            .filter(|v| **v > 0.0)
            .all(|v| close(*v, 1.0, 1e-12)));
    }

    #[test]
    fn omega_stats_streamed_matches_materialized() {
        let s = sys(&[
            &[1.0, 0.2, 0.1],
            &[0.3, 1.0, 0.0],
            &[0.2, 0.1, 1.0],
            &[1.0, 1.0, 1.0],
        ]);
        let full = omega(&s).unwrap();
        let a = full.condition_stats().unwrap();
        let b = omega_condition_stats(&s).unwrap();
        let svd = condition_stats(full.matrix()).unwrap();
        assert!(close(a.frob_sq, 12.0, 1e-12));
        assert!(close(
            a.scaled_condition,
            b.scaled_condition,
            1e-9 * a.scaled_condition
        ));
        assert!(close(a.sigma_min, svd.sigma_min, 1e-9));
    }
}
