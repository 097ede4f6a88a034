//! Complex vector/grid arithmetic, DFT pair, and the reshape/permutation
//! operators the rest of the crate is built on.
//!
//! Conventions fixed once for the whole crate:
//! * forward DFT kernel `e^{-j2*pi*i*j/P}`, unnormalized,
//! * inverse DFT carries the `1/P` factor,
//! * grids are stored row-major, `vec(.)` reads column-major.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

pub type ComplexVec = Vec<Complex64>;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], direction: FftDirection) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(buf.len(), direction));
    fft.process(buf);
}

/// Unnormalized forward DFT: `X[k] = sum_n x[n] e^{-j2*pi*kn/P}`.
pub fn dft(v: &[Complex64]) -> Result<ComplexVec> {
    if v.is_empty() {
        return Err(Error::shape("dft of empty vector"));
    }
    let mut buf = v.to_vec();
    fft_in_place(&mut buf, FftDirection::Forward);
    Ok(buf)
}

/// Inverse DFT, carries the `1/P` normalization so `idft(dft(x)) = x`.
pub fn idft(v: &[Complex64]) -> Result<ComplexVec> {
    if v.is_empty() {
        return Err(Error::shape("idft of empty vector"));
    }
    let scale = 1.0 / v.len() as f64;
    let mut buf = v.to_vec();
    fft_in_place(&mut buf, FftDirection::Inverse);
    for s in &mut buf {
        *s *= scale;
    }
    Ok(buf)
}

/// Dense 2-D complex array with explicit row-major (rows, cols) shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    data: Vec<Complex64>,
    rows: usize,
    cols: usize,
}

impl ComplexGrid {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::shape("grid dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "grid data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { data, rows, cols })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            data: vec![Complex64::default(); rows * cols],
            rows,
            cols,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    /// Row-major backing data.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn transpose(&self) -> ComplexGrid {
        let mut out = ComplexGrid::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    /// Column-major read, i.e. the `vec(.)` operator.
    pub fn vec_col_major(&self) -> ComplexVec {
        let mut out = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                out.push(self.get(r, c));
            }
        }
        out
    }

    /// `vec` of the transpose, which for a row-major grid is just the
    /// stored order. Exact inverse of [`reshape_v`].
    pub fn vec_t(&self) -> ComplexVec {
        self.data.clone()
    }

    /// Build a grid from its column-major vectorization.
    pub fn from_vec_col_major(rows: usize, cols: usize, a: &[Complex64]) -> Result<Self> {
        if a.len() != rows * cols {
            return Err(Error::shape(format!(
                "vector length {} does not match {}x{}",
                a.len(),
                rows,
                cols
            )));
        }
        let mut out = ComplexGrid::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                out.set(r, c, a[r + c * rows]);
            }
        }
        Ok(out)
    }

    /// Elementwise product.
    pub fn hadamard(&self, other: &ComplexGrid) -> Result<ComplexGrid> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::shape(format!(
                "hadamard shape mismatch {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        Ok(ComplexGrid {
            data,
            rows: self.rows,
            cols: self.cols,
        })
    }

    pub fn scale(mut self, s: f64) -> ComplexGrid {
        for v in &mut self.data {
            *v *= s;
        }
        self
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> ComplexGrid {
        ComplexGrid {
            data: self.data.iter().map(|&v| f(v)).collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    /// Apply an unnormalized DFT (forward) or its adjoint `F^H` (inverse
    /// direction, no scaling) down every column.
    pub fn dft_cols(&self, direction: FftDirection) -> ComplexGrid {
        let mut out = self.clone();
        let mut col = vec![Complex64::default(); self.rows];
        for c in 0..self.cols {
            for r in 0..self.rows {
                col[r] = self.get(r, c);
            }
            fft_in_place(&mut col, direction);
            for r in 0..self.rows {
                out.set(r, c, col[r]);
            }
        }
        out
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Reshape operator `[V_{P,Q}(a)]_{p,q} = a[q + pQ]`: row-major fill of a
/// `P x Q` grid. Inverse is [`ComplexGrid::vec_t`].
pub fn reshape_v(a: &[Complex64], p: usize, q: usize) -> Result<ComplexGrid> {
    if a.len() != p * q {
        return Err(Error::shape(format!(
            "reshape_v: length {} != {}x{}",
            a.len(),
            p,
            q
        )));
    }
    ComplexGrid::new(p, q, a.to_vec())
}

/// Commutation permutation: with `a = vec(X)` for `X` of shape `Q x P`,
/// returns `vec(X^T)`. Pure index map; applying with swapped `(Q, P)`
/// inverts it.
pub fn commutation_apply(a: &[Complex64], p: usize, q: usize) -> Result<ComplexVec> {
    if a.len() != p * q {
        return Err(Error::shape(format!(
            "commutation_apply: length {} != {}x{}",
            a.len(),
            p,
            q
        )));
    }
    let mut out = vec![Complex64::default(); a.len()];
    for pp in 0..p {
        for qq in 0..q {
            out[pp + qq * p] = a[qq + pp * q];
        }
    }
    Ok(out)
}

/// Applies `I_P (x) F_Q` (or its scaled inverse): a Q-point DFT on each of
/// the P contiguous length-Q segments.
pub fn kron_dft_apply(a: &[Complex64], p: usize, q: usize, inverse: bool) -> Result<ComplexVec> {
    if a.len() != p * q {
        return Err(Error::shape(format!(
            "kron_dft_apply: length {} != {}x{}",
            a.len(),
            p,
            q
        )));
    }
    let mut out = Vec::with_capacity(a.len());
    for block in a.chunks(q) {
        let t = if inverse { idft(block)? } else { dft(block)? };
        out.extend(t);
    }
    Ok(out)
}

pub fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Dense reference constructions. Slow on purpose: these exist as
/// independent oracles for the index-map implementations above and for
/// the matrix-form cross-checks in the test suites.
pub mod dense {
    use super::*;

    pub type Matrix = Vec<Vec<Complex64>>;

    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        vec![vec![Complex64::default(); cols]; rows]
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = zeros(n, n);
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// `[F_P]_{i,j} = e^{-j2*pi*ij/P}`.
    pub fn dft_matrix(p: usize) -> Matrix {
        let mut m = zeros(p, p);
        for i in 0..p {
            for j in 0..p {
                let phase = -2.0 * std::f64::consts::PI * (i * j) as f64 / p as f64;
                m[i][j] = Complex64::from_polar(1.0, phase);
            }
        }
        m
    }

    pub fn conj_transpose(m: &Matrix) -> Matrix {
        let rows = m.len();
        let cols = m[0].len();
        let mut out = zeros(cols, rows);
        for i in 0..rows {
            for j in 0..cols {
                out[j][i] = m[i][j].conj();
            }
        }
        out
    }

    pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
        let (ra, ca) = (a.len(), a[0].len());
        let cb = b[0].len();
        assert_eq!(ca, b.len());
        let mut out = zeros(ra, cb);
        for i in 0..ra {
            for k in 0..ca {
                let aik = a[i][k];
                for j in 0..cb {
                    out[i][j] += aik * b[k][j];
                }
            }
        }
        out
    }

    pub fn mat_vec(m: &Matrix, v: &[Complex64]) -> ComplexVec {
        m.iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(m: &Matrix, s: f64) -> Matrix {
        m.iter()
            .map(|row| row.iter().map(|&v| v * s).collect())
            .collect()
    }

    pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
        let (ra, ca) = (a.len(), a[0].len());
        let (rb, cb) = (b.len(), b[0].len());
        let mut out = zeros(ra * rb, ca * cb);
        for i in 0..ra {
            for j in 0..ca {
                for k in 0..rb {
                    for l in 0..cb {
                        out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        out
    }

    /// Dense commutation matrix with the same convention as
    /// [`commutation_apply`]: `out[p + qP] = a[q + pQ]`.
    pub fn commutation_matrix(p: usize, q: usize) -> Matrix {
        let n = p * q;
        let mut m = zeros(n, n);
        for pp in 0..p {
            for qq in 0..q {
                m[pp + qq * p][qq + pp * q] = Complex64::new(1.0, 0.0);
            }
        }
        m
    }

    pub fn diag(v: &[Complex64]) -> Matrix {
        let mut m = zeros(v.len(), v.len());
        for (i, &x) in v.iter().enumerate() {
            m[i][i] = x;
        }
        m
    }

    /// Gauss-Jordan inverse. Panics on singular input; oracle use only.
    pub fn inverse(m: &Matrix) -> Matrix {
        let n = m.len();
        let mut a: Vec<Vec<Complex64>> = m
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..n).map(|j| {
                    if i == j {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::default()
                    }
                }));
                r
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| {
                    a[i][col]
                        .norm()
                        .partial_cmp(&a[j][col].norm())
                        .unwrap()
                })
                .unwrap();
            assert!(a[pivot][col].norm() > 1e-14, "singular matrix");
            a.swap(col, pivot);
            let inv = Complex64::new(1.0, 0.0) / a[col][col];
            for x in &mut a[col] {
                *x *= inv;
            }
            for row in 0..n {
                if row != col {
                    let f = a[row][col];
                    if f.norm() > 0.0 {
                        for j in 0..2 * n {
                            let sub = f * a[col][j];
                            a[row][j] -= sub;
                        }
                    }
                }
            }
        }
        a.into_iter().map(|row| row[n..].to_vec()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vec(n: usize, seed: u64) -> ComplexVec {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    /// O(N^2) direct-sum DFT, independent of the fft path.
    fn dft_direct(v: &[Complex64]) -> ComplexVec {
        let n = v.len();
        (0..n)
            .map(|k| {
                v.iter()
                    .enumerate()
                    .map(|(j, &x)| {
                        let phase = -2.0 * std::f64::consts::PI * (k * j) as f64 / n as f64;
                        x * Complex64::from_polar(1.0, phase)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn dft_unit_impulse() {
        let v = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let out = dft(&v).unwrap();
        for x in out {
            assert!((x - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn dft_dc_vector() {
        let v = vec![c(1.0, 0.0); 4];
        let out = dft(&v).unwrap();
        assert!((out[0] - c(4.0, 0.0)).norm() < 1e-12);
        for x in &out[1..] {
            assert!(x.norm() < 1e-12);
        }
    }

    #[test]
    fn dft_empty_is_shape_error() {
        assert!(dft(&[]).is_err());
        assert!(idft(&[]).is_err());
    }

    #[test]
    fn idft_dft_roundtrip_matches_direct_sum() {
        for (i, &n) in [4usize, 6, 16, 128].iter().enumerate() {
            for trial in 0..100 {
                let v = random_vec(n, (i * 100 + trial) as u64);
                let fwd = dft(&v).unwrap();
                let direct = dft_direct(&v);
                assert!(max_abs_diff(&fwd, &direct) < 1e-10, "n={n}");
                let back = idft(&fwd).unwrap();
                assert!(max_abs_diff(&back, &v) < 1e-10, "n={n}");
            }
        }
    }

    #[test]
    fn reshape_rows() {
        let a: Vec<_> = (0..6).map(|i| c(i as f64, 0.0)).collect();
        let g = reshape_v(&a, 2, 3).unwrap();
        assert_eq!(g.get(0, 0), a[0]);
        assert_eq!(g.get(0, 2), a[2]);
        assert_eq!(g.get(1, 0), a[3]);
        assert_eq!(g.get(1, 2), a[5]);
        // P=1: single row
        let g1 = reshape_v(&a, 1, 6).unwrap();
        assert_eq!(g1.vec_t(), a);
        assert!(reshape_v(&a, 2, 2).is_err());
    }

    #[test]
    fn commutation_by_hand() {
        // X = [[1,2],[3,4],[5,6]] (3x2), a = vec(X) = [1,3,5,2,4,6]
        let a: Vec<_> = [1.0, 3.0, 5.0, 2.0, 4.0, 6.0]
            .iter()
            .map(|&x| c(x, 0.0))
            .collect();
        let out = commutation_apply(&a, 2, 3).unwrap();
        let want: Vec<_> = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
            .iter()
            .map(|&x| c(x, 0.0))
            .collect();
        assert_eq!(out, want);
    }

    #[test]
    fn commutation_square_involution() {
        let a = random_vec(16, 7);
        let once = commutation_apply(&a, 4, 4).unwrap();
        let twice = commutation_apply(&once, 4, 4).unwrap();
        assert_eq!(a, twice);
    }

    #[test]
    fn commutation_matches_dense() {
        let a = random_vec(24, 11);
        let fast = commutation_apply(&a, 4, 6).unwrap();
        let pi = dense::commutation_matrix(4, 6);
        let slow = dense::mat_vec(&pi, &a);
        assert_eq!(fast, slow);
    }

    #[test]
    fn kron_dft_blockwise_impulse() {
        let mut a = vec![c(0.0, 0.0); 8];
        a[0] = c(1.0, 0.0);
        a[4] = c(1.0, 0.0);
        let out = kron_dft_apply(&a, 2, 4, false).unwrap();
        for x in out {
            assert!((x - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn kron_dft_inverse_roundtrip() {
        let a = random_vec(24, 3);
        let fwd = kron_dft_apply(&a, 3, 8, false).unwrap();
        let back = kron_dft_apply(&fwd, 3, 8, true).unwrap();
        assert!(max_abs_diff(&a, &back) < 1e-10);
    }

    #[test]
    fn kron_dft_p1_is_plain_dft() {
        let a = random_vec(12, 5);
        let blk = kron_dft_apply(&a, 1, 12, false).unwrap();
        let plain = dft(&a).unwrap();
        assert!(max_abs_diff(&blk, &plain) < 1e-12);
    }

    #[test]
    fn kron_dft_matches_dense_kron() {
        for &(p, q) in &[(2usize, 4usize), (4, 6), (8, 8)] {
            let a = random_vec(p * q, (p * q) as u64);
            let fast = kron_dft_apply(&a, p, q, false).unwrap();
            let u = dense::kron(&dense::identity(p), &dense::dft_matrix(q));
            let slow = dense::mat_vec(&u, &a);
            assert!(max_abs_diff(&fast, &slow) < 1e-10);
        }
    }

    #[test]
    fn dense_inverse_sane() {
        let f = dense::dft_matrix(5);
        let finv = dense::inverse(&f);
        let eye = dense::matmul(&f, &finv);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((eye[i][j] - c(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    proptest! {
        #[test]
        fn parseval(vals in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..64)) {
            let v: ComplexVec = vals.iter().map(|&(re, im)| c(re, im)).collect();
            let f = dft(&v).unwrap();
            let lhs = norm_sq(&f);
            let rhs = v.len() as f64 * norm_sq(&v);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1e-30));
        }

        #[test]
        fn reshape_roundtrip_exact(seed in 0u64..1000, shape in prop::sample::select(vec![(2usize,3usize),(4,4),(16,8)])) {
            let (p, q) = shape;
            let a = random_vec(p * q, seed);
            let g = reshape_v(&a, p, q).unwrap();
            prop_assert_eq!(g.vec_t(), a);
        }

        #[test]
        fn commutation_roundtrip_exact(seed in 0u64..1000, shape in prop::sample::select(vec![(2usize,3usize),(4,6),(5,5)])) {
            let (p, q) = shape;
            let a = random_vec(p * q, seed);
            let fwd = commutation_apply(&a, p, q).unwrap();
            let back = commutation_apply(&fwd, q, p).unwrap();
            prop_assert_eq!(a, back);
        }
    }
}
