//! Dense row-major f64 matrices.
//!
//! `Tensor2D` is the single value type for features, weights,
//! activations, and gradients. Everything is 64-bit: the model is
//! small enough that we trade speed for clean finite-difference
//! verification.

use crate::error::{Error, Result};

/// Dense row-major matrix of 64-bit reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor2D {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor2D {
    /// Builds a matrix from row-major data; the length must be `rows * cols`.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                "Tensor2D::new",
                format!("{}x{} needs {} entries, got {}", rows, cols, rows * cols, data.len()),
            ));
        }
        Ok(Tensor2D { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor2D {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Tensor2D {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Tensor2D { rows, cols, data }
    }

    /// 1x1 matrix holding one scalar.
    pub fn scalar(value: f64) -> Self {
        Tensor2D {
            rows: 1,
            cols: 1,
            data: vec![value],
        }
    }

    /// Row vector (1xn).
    pub fn row_vec(data: Vec<f64>) -> Self {
        Tensor2D {
            rows: 1,
            cols: data.len(),
            data,
        }
    }

    /// Column vector (nx1).
    pub fn col_vec(data: Vec<f64>) -> Self {
        Tensor2D {
            rows: data.len(),
            cols: 1,
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn same_shape(&self, other: &Tensor2D) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Tensor2D) -> Result<Tensor2D> {
        if self.cols != rhs.rows {
            return Err(Error::shape(
                "matmul",
                format!("{}x{} * {}x{}", self.rows, self.cols, rhs.rows, rhs.cols),
            ));
        }
        let mut out = Tensor2D::zeros(self.rows, rhs.cols);
        gemm(
            self.rows,
            self.cols,
            rhs.cols,
            &self.data,
            [self.cols as isize, 1],
            &rhs.data,
            [rhs.cols as isize, 1],
            &mut out.data,
        );
        Ok(out)
    }

    /// `self^T * rhs` without materializing the transpose.
    pub fn t_matmul(&self, rhs: &Tensor2D) -> Result<Tensor2D> {
        if self.rows != rhs.rows {
            return Err(Error::shape(
                "t_matmul",
                format!("({}x{})^T * {}x{}", self.rows, self.cols, rhs.rows, rhs.cols),
            ));
        }
        let mut out = Tensor2D::zeros(self.cols, rhs.cols);
        gemm(
            self.cols,
            self.rows,
            rhs.cols,
            &self.data,
            [1, self.cols as isize],
            &rhs.data,
            [rhs.cols as isize, 1],
            &mut out.data,
        );
        Ok(out)
    }

    /// `self * rhs^T` without materializing the transpose.
    pub fn matmul_t(&self, rhs: &Tensor2D) -> Result<Tensor2D> {
        if self.cols != rhs.cols {
            return Err(Error::shape(
                "matmul_t",
                format!("{}x{} * ({}x{})^T", self.rows, self.cols, rhs.rows, rhs.cols),
            ));
        }
        let mut out = Tensor2D::zeros(self.rows, rhs.rows);
        gemm(
            self.rows,
            self.cols,
            rhs.rows,
            &self.data,
            [self.cols as isize, 1],
            &rhs.data,
            [1, rhs.cols as isize],
            &mut out.data,
        );
        Ok(out)
    }

    pub fn transpose(&self) -> Tensor2D {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor2D {
        Tensor2D {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Tensor2D, f: impl Fn(f64, f64) -> f64) -> Result<Tensor2D> {
        if !self.same_shape(other) {
            return Err(Error::shape(
                "zip_map",
                format!("{:?} vs {:?}", self.shape(), other.shape()),
            ));
        }
        Ok(Tensor2D {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Tensor2D) -> Result<Tensor2D> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor2D) -> Result<Tensor2D> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn hadamard(&self, other: &Tensor2D) -> Result<Tensor2D> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, k: f64) -> Tensor2D {
        self.map(|x| x * k)
    }

    /// `self += k * other`; shapes must agree.
    pub fn add_scaled_assign(&mut self, other: &Tensor2D, k: f64) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::shape(
                "add_scaled_assign",
                format!("{:?} vs {:?}", self.shape(), other.shape()),
            ));
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += k * b;
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.sum() / self.data.len() as f64
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest absolute difference between two same-shaped matrices.
    pub fn max_abs_diff(&self, other: &Tensor2D) -> Result<f64> {
        if !self.same_shape(other) {
            return Err(Error::shape(
                "max_abs_diff",
                format!("{:?} vs {:?}", self.shape(), other.shape()),
            ));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Row-major strided gemm: `c += a * b` with `c` pre-zeroed.
///
/// Strides are `[row_stride, col_stride]`, so transposed operands cost
/// nothing. Zero-sized products leave `c` as zeros, matching the
/// mathematical convention for an empty inner dimension.
fn gemm(m: usize, k: usize, n: usize, a: &[f64], sa: [isize; 2], b: &[f64], sb: [isize; 2], c: &mut [f64]) {
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        return; // empty contraction: product is the zero matrix
    }
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            sa[0],
            sa[1],
            b.as_ptr(),
            sb[0],
            sb[1],
            0.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_wrong_length() {
        assert!(Tensor2D::new(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn matmul_identity_is_identity() {
        let a = Tensor2D::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let out = a.matmul(&Tensor2D::identity(2)).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn identity_times_column() {
        let i = Tensor2D::identity(2);
        let v = Tensor2D::col_vec(vec![5.0, 7.0]);
        assert_eq!(i.matmul(&v).unwrap(), v);
    }

    #[test]
    fn matmul_rejects_inner_mismatch() {
        let a = Tensor2D::zeros(2, 3);
        let b = Tensor2D::zeros(2, 3);
        let err = a.matmul(&b).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { .. }), "{err}");
    }

    #[test]
    fn transposed_products_match_explicit_transpose() {
        let a = Tensor2D::from_fn(3, 4, |r, c| (r * 7 + c) as f64 * 0.31 - 1.0);
        let b = Tensor2D::from_fn(3, 5, |r, c| (r + c * 3) as f64 * 0.17 - 0.4);
        let via_strides = a.t_matmul(&b).unwrap();
        let explicit = a.transpose().matmul(&b).unwrap();
        assert!(via_strides.max_abs_diff(&explicit).unwrap() < 1e-14);

        let c = Tensor2D::from_fn(5, 4, |r, c| (r * 2 + c) as f64 * 0.09 + 0.2);
        let via_strides = a.matmul_t(&c).unwrap();
        let explicit = a.matmul(&c.transpose()).unwrap();
        assert!(via_strides.max_abs_diff(&explicit).unwrap() < 1e-14);
    }

    #[test]
    fn zero_inner_dimension_gives_zero_matrix() {
        let a = Tensor2D::zeros(2, 0);
        let b = Tensor2D::zeros(0, 3);
        let out = a.matmul(&b).unwrap();
        assert_eq!(out, Tensor2D::zeros(2, 3));
    }
}
