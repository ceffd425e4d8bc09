use serde::{Deserialize, Serialize};

use super::AutodiffError;

/// Dense row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Tensor {
        Tensor {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Tensor, AutodiffError> {
        if data.len() != rows * cols {
            return Err(AutodiffError::ShapeMismatch {
                op: "from_vec",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        Ok(Tensor { rows, cols, data })
    }

    /// Builds from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Tensor {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Tensor {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn identity(n: usize) -> Tensor {
        let mut t = Tensor::zeros(n, n);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn same_shape(&self, other: &Tensor, op: &'static str) -> Result<(), AutodiffError> {
        if self.shape() != other.shape() {
            return Err(AutodiffError::ShapeMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    pub(crate) fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub(crate) fn zip_map(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
        debug_assert_eq!(self.shape(), other.shape());
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub(crate) fn add_assign(&mut self, other: &Tensor) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &Tensor) -> Result<Tensor, AutodiffError> {
        if self.rows != other.rows {
            return Err(AutodiffError::ShapeMismatch {
                op: "concat",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Tensor {
            rows: self.rows,
            cols,
            data,
        })
    }

    /// Splits columns at `at` into `(left, right)`.
    pub(crate) fn hsplit(&self, at: usize) -> (Tensor, Tensor) {
        let mut left = Tensor::zeros(self.rows, at);
        let mut right = Tensor::zeros(self.rows, self.cols - at);
        for r in 0..self.rows {
            let row = self.row(r);
            left.data[r * at..(r + 1) * at].copy_from_slice(&row[..at]);
            right.data[r * (self.cols - at)..(r + 1) * (self.cols - at)]
                .copy_from_slice(&row[at..]);
        }
        (left, right)
    }
}

/// `x · w + b` with `b` (1 × out) broadcast over rows. Zero entries of `x`
/// are skipped, which matters for sparse fingerprint inputs.
pub fn linear_forward(x: &Tensor, w: &Tensor, b: &Tensor) -> Result<Tensor, AutodiffError> {
    if x.cols != w.rows {
        return Err(AutodiffError::ShapeMismatch {
            op: "linear",
            left: x.shape(),
            right: w.shape(),
        });
    }
    if b.rows != 1 || b.cols != w.cols {
        return Err(AutodiffError::ShapeMismatch {
            op: "linear bias",
            left: w.shape(),
            right: b.shape(),
        });
    }
    let out = w.cols;
    let mut y = Tensor::zeros(x.rows, out);
    for r in 0..x.rows {
        let yr = &mut y.data[r * out..(r + 1) * out];
        yr.copy_from_slice(&b.data);
        for (k, &xv) in x.row(r).iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            let wk = &w.data[k * out..(k + 1) * out];
            for (yv, &wv) in yr.iter_mut().zip(wk) {
                *yv += xv * wv;
            }
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weights() {
        let x = Tensor::from_rows(&[vec![1.0, -2.0, 3.5], vec![0.0, 4.0, -1.0]]);
        let y = linear_forward(&x, &Tensor::identity(3), &Tensor::zeros(1, 3)).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn dot_product() {
        let x = Tensor::from_rows(&[vec![1.0, 2.0]]);
        let w = Tensor::from_rows(&[vec![1.0], vec![1.0]]);
        let b = Tensor::zeros(1, 1);
        assert_eq!(linear_forward(&x, &w, &b).unwrap().as_slice(), &[3.0]);
    }

    #[test]
    fn bias_only() {
        let x = Tensor::zeros(3, 2);
        let w = Tensor::from_rows(&[vec![5.0, 6.0], vec![7.0, 8.0]]);
        let b = Tensor::from_rows(&[vec![0.5, -1.5]]);
        let y = linear_forward(&x, &w, &b).unwrap();
        for r in 0..3 {
            assert_eq!(y.row(r), &[0.5, -1.5]);
        }
    }

    #[test]
    fn shape_errors() {
        let x = Tensor::zeros(1, 3);
        let w = Tensor::zeros(2, 2);
        assert!(matches!(
            linear_forward(&x, &w, &Tensor::zeros(1, 2)),
            Err(AutodiffError::ShapeMismatch { .. })
        ));
        let w = Tensor::zeros(3, 2);
        assert!(linear_forward(&x, &w, &Tensor::zeros(1, 3)).is_err());
        assert!(Tensor::from_vec(2, 2, vec![1.0]).is_err());
    }

    #[test]
    fn concat_split() {
        let a = Tensor::from_rows(&[vec![1.0], vec![2.0]]);
        let b = Tensor::from_rows(&[vec![3.0, 4.0], vec![5.0, 6.0]]);
        let c = a.hcat(&b).unwrap();
        assert_eq!(c.row(1), &[2.0, 5.0, 6.0]);
        let (l, r) = c.hsplit(1);
        assert_eq!((l, r), (a, b));
    }
}
