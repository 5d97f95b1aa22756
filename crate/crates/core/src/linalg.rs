//! Dense row-major `f64` matrices and the handful of kernels the rest of the
//! crate needs: GEMM (via `matrixmultiply`), a blocked Cholesky solver for the
//! ridge probes, and cyclic Jacobi for small symmetric eigenproblems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Panics if `data.len() != rows * cols`; use [`Matrix::try_from_vec`] for
    /// untrusted input.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data }
    }

    pub fn try_from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::contract(format!(
                "matrix data length {} does not match shape {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::contract(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn row_vector(values: Vec<f64>) -> Self {
        Self {
            rows: 1,
            cols: values.len(),
            data: values,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(idx.len(), self.cols);
        for (o, &i) in idx.iter().enumerate() {
            out.row_mut(o).copy_from_slice(self.row(i));
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::contract(format!(
                "matmul shape mismatch: {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        gemm(1.0, self, false, other, false, 0.0, &mut out);
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols.min(self.rows) {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// `c = alpha * op(a) * op(b) + beta * c`, where `op` optionally transposes.
pub fn gemm(alpha: f64, a: &Matrix, trans_a: bool, b: &Matrix, trans_b: bool, beta: f64, c: &mut Matrix) {
    let (m, k) = if trans_a { (a.cols, a.rows) } else { (a.rows, a.cols) };
    let (kb, n) = if trans_b { (b.cols, b.rows) } else { (b.rows, b.cols) };
    assert_eq!(k, kb, "gemm inner dimension mismatch");
    assert_eq!((c.rows, c.cols), (m, n), "gemm output shape mismatch");
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        for v in c.data.iter_mut() {
            *v *= beta;
        }
        return;
    }
    let (rsa, csa) = if trans_a { (1, a.cols as isize) } else { (a.cols as isize, 1) };
    let (rsb, csb) = if trans_b { (1, b.cols as isize) } else { (b.cols as isize, 1) };
    // SAFETY: strides and extents describe exactly the buffers of `a`, `b`, `c`,
    // whose shapes were checked above.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            beta,
            c.data.as_mut_ptr(),
            c.cols as isize,
            1,
        );
    }
}

const CHOLESKY_BLOCK: usize = 64;

/// In-place lower Cholesky factorisation `a = L Lᵀ`; the strict upper triangle
/// is left with stale values and must be ignored.
pub fn cholesky_in_place(a: &mut Matrix) -> Result<()> {
    let n = a.rows;
    if a.cols != n {
        return Err(Error::contract(format!(
            "cholesky needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let ld = n;
    let mut k = 0;
    while k < n {
        let bs = CHOLESKY_BLOCK.min(n - k);
        // diagonal block
        for j in k..k + bs {
            let mut d = a.data[j * ld + j];
            for p in k..j {
                let l = a.data[j * ld + p];
                d -= l * l;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Runtime(format!(
                    "matrix is not positive definite (pivot {j} = {d:e})"
                )));
            }
            let d = d.sqrt();
            a.data[j * ld + j] = d;
            for i in (j + 1)..(k + bs) {
                let mut s = a.data[i * ld + j];
                for p in k..j {
                    s -= a.data[i * ld + p] * a.data[j * ld + p];
                }
                a.data[i * ld + j] = s / d;
            }
        }
        let rest = n - k - bs;
        if rest > 0 {
            // panel: rows below the block solve X * L_kkᵀ = A_panel
            for i in (k + bs)..n {
                for j in k..k + bs {
                    let mut s = a.data[i * ld + j];
                    for p in k..j {
                        s -= a.data[i * ld + p] * a.data[j * ld + p];
                    }
                    a.data[i * ld + j] = s / a.data[j * ld + j];
                }
            }
            // trailing update: A22 -= P Pᵀ
            let off_p = (k + bs) * ld + k;
            let off_t = (k + bs) * ld + (k + bs);
            // SAFETY: the panel (rest x bs) and trailing block (rest x rest)
            // lie inside `a.data` with row stride `ld`; they do not overlap.
            unsafe {
                let base = a.data.as_mut_ptr();
                matrixmultiply::dgemm(
                    rest,
                    bs,
                    rest,
                    -1.0,
                    base.add(off_p) as *const f64,
                    ld as isize,
                    1,
                    base.add(off_p) as *const f64,
                    1,
                    ld as isize,
                    1.0,
                    base.add(off_t),
                    ld as isize,
                    1,
                );
            }
        }
        k += bs;
    }
    Ok(())
}

/// Solves `L Lᵀ X = B` for a factor produced by [`cholesky_in_place`].
pub fn cholesky_solve(l: &Matrix, b: &Matrix) -> Matrix {
    let n = l.rows;
    assert_eq!(b.rows, n);
    let k = b.cols;
    let mut x = b.clone();
    for i in 0..n {
        for j in 0..i {
            let lij = l.data[i * n + j];
            if lij != 0.0 {
                let (head, tail) = x.data.split_at_mut(i * k);
                let src = &head[j * k..(j + 1) * k];
                for (t, s) in tail[..k].iter_mut().zip(src) {
                    *t -= lij * s;
                }
            }
        }
        let d = l.data[i * n + i];
        for t in &mut x.data[i * k..(i + 1) * k] {
            *t /= d;
        }
    }
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            let lji = l.data[j * n + i];
            if lji != 0.0 {
                let (head, tail) = x.data.split_at_mut(j * k);
                let src = &tail[..k];
                for (t, s) in head[i * k..(i + 1) * k].iter_mut().zip(src) {
                    *t -= lji * s;
                }
            }
        }
        let d = l.data[i * n + i];
        for t in &mut x.data[i * k..(i + 1) * k] {
            *t /= d;
        }
    }
    x
}

pub const JACOBI_TOLERANCE: f64 = 1e-10;
pub const JACOBI_MAX_SWEEPS: usize = 100;
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Eigenvalues in ascending order with matching unit eigenvectors stored as
/// the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigen(m: &Matrix) -> Result<SymmetricEigen> {
    let n = m.rows;
    if m.cols != n {
        return Err(Error::contract(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let asym = m.max_abs_asymmetry();
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::contract(format!(
            "matrix is not symmetric (max |a_ij - a_ji| = {asym:e})"
        )));
    }
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let mut converged = false;
    for _sweep in 0..=JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * a.get(i, j) * a.get(i, j))
            .sum::<f64>()
            .sqrt();
        if off < JACOBI_TOLERANCE {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a.get(r, p);
                        let arq = a.get(r, q);
                        let nrp = c * arp - s * arq;
                        let nrq = s * arp + c * arq;
                        a.set(r, p, nrp);
                        a.set(p, r, nrp);
                        a.set(r, q, nrq);
                        a.set(q, r, nrq);
                    }
                    let vrp = v.get(r, p);
                    let vrq = v.get(r, q);
                    v.set(r, p, c * vrp - s * vrq);
                    v.set(r, q, s * vrp + c * vrq);
                }
            }
        }
    }
    if !converged {
        return Err(Error::Convergence(format!(
            "Jacobi exceeded {JACOBI_MAX_SWEEPS} sweeps on a {n}x{n} matrix"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).total_cmp(&a.get(j, j)));
    let values = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, col, v.get(r, src));
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Matrix::from_vec(n, n + 3, (0..n * (n + 3)).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let mut g = Matrix::zeros(n, n);
        gemm(1.0, &x, false, &x, true, 0.0, &mut g);
        for i in 0..n {
            g.set(i, i, g.get(i, i) + 0.5);
        }
        g
    }

    #[test]
    fn gemm_transposes_agree_with_naive() {
        let a = Matrix::from_vec(2, 3, vec![1., 2., 3., 4., 5., 6.]);
        let b = Matrix::from_vec(2, 3, vec![1., 0., -1., 2., 1., 0.]);
        let mut c = Matrix::zeros(3, 3);
        gemm(1.0, &a, true, &b, false, 0.0, &mut c);
        // aᵀ b computed by hand
        assert_eq!(c.data(), &[9., 4., -1., 12., 5., -2., 15., 6., -3.]);
        let mut d = Matrix::zeros(2, 2);
        gemm(1.0, &a, false, &b, true, 0.0, &mut d);
        assert_eq!(d.data(), &[-2., 4., -2., 13.]);
    }

    #[test]
    fn cholesky_solves_across_block_boundaries() {
        for &n in &[1usize, 5, 64, 65, 150] {
            let a = random_spd(n, n as u64);
            let b = Matrix::from_vec(n, 2, (0..2 * n).map(|i| (i as f64).sin()).collect());
            let mut l = a.clone();
            cholesky_in_place(&mut l).unwrap();
            let x = cholesky_solve(&l, &b);
            let r = a.matmul(&x).unwrap();
            for (got, want) in r.data().iter().zip(b.data()) {
                assert!((got - want).abs() < 1e-8, "n={n}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = Matrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 1.0]);
        assert!(cholesky_in_place(&mut a).is_err());
    }

    #[test]
    fn jacobi_k4_spectrum() {
        let mut a = Matrix::filled(4, 4, 1.0);
        for i in 0..4 {
            a.set(i, i, 0.0);
        }
        let e = symmetric_eigen(&a).unwrap();
        let want = [-1.0, -1.0, -1.0, 3.0];
        for (g, w) in e.values.iter().zip(want) {
            assert!((g - w).abs() < 1e-10);
        }
    }

    #[test]
    fn jacobi_zero_matrix() {
        let e = symmetric_eigen(&Matrix::zeros(5, 5)).unwrap();
        assert!(e.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn jacobi_rejects_asymmetric() {
        let a = Matrix::from_vec(2, 2, vec![0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(symmetric_eigen(&a), Err(Error::Contract(_))));
    }

    #[test]
    fn jacobi_residuals_random_8x8() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = 8;
            let mut m = Matrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = rng.gen_range(-2.0..2.0);
                    m.set(i, j, v);
                    m.set(j, i, v);
                }
            }
            let e = symmetric_eigen(&m).unwrap();
            let trace: f64 = (0..n).map(|i| m.get(i, i)).sum();
            assert!((e.values.iter().sum::<f64>() - trace).abs() < 1e-9);
            for k in 0..n {
                let mut res = 0.0f64;
                for i in 0..n {
                    let mv: f64 = (0..n).map(|j| m.get(i, j) * e.vectors.get(j, k)).sum();
                    res += (mv - e.values[k] * e.vectors.get(i, k)).powi(2);
                }
                assert!(res.sqrt() < 1e-8);
            }
        }
    }
}
