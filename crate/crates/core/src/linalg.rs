//! Small dense linear algebra: row-major matrices, Householder QR with a
//! rank guard, triangular solves, and symmetric / pivoted Cholesky
//! factorizations.
//!
//! All matrices in this crate are small (design matrices `n × p` with `p` in
//! the single digits, metrics `d × d` with `d ≤ 4`, simulation Grams up to a
//! few thousand rows), so simple dense algorithms are appropriate.

// The kernels walk several arrays under one index; explicit loops are
// clearer here than chained iterator adapters.
#![allow(clippy::needless_range_loop)]

use crate::error::{CoreError, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(CoreError::InvalidArgument("matrix with no rows".into()));
        }
        let cols = rows[0].len();
        if cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(CoreError::InvalidArgument(
                "matrix rows must be non-empty and of equal length".into(),
            ));
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `self * v` for a column vector `v`.
    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }
}

/// Householder QR factorization of an `m × n` matrix with `m ≥ n`.
///
/// Reflectors are stored below the diagonal; `R` (with non-negative diagonal)
/// is stored on and above it.  Construction fails with a
/// [`CoreError::RankDeficient`] naming the offending column when a diagonal
/// pivot falls below `1e-12` times the largest column norm of the input.
#[derive(Debug, Clone)]
pub struct QrFactors {
    packed: DenseMatrix,
    /// First elements of the Householder vectors (the packed subdiagonal
    /// holds the rest); zero marks an identity reflector.
    v_head: Vec<f64>,
    /// Scalar factors `β` of the reflectors `H = I − β v vᵀ`.
    beta: Vec<f64>,
    /// Per-column sign flips applied to make the diagonal of R non-negative.
    flip: Vec<f64>,
}

const RANK_TOL: f64 = 1e-12;

/// Factor `a = Q R` by Householder reflections.
pub fn qr_decompose(a: &DenseMatrix) -> Result<QrFactors> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(CoreError::InvalidArgument(format!(
            "QR requires at least as many rows as columns, got {m} x {n}"
        )));
    }
    let scale = (0..n)
        .map(|c| (0..m).map(|r| a.get(r, c).powi(2)).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);
    let mut w = a.clone();
    let mut v_head = vec![0.0; n];
    let mut beta = vec![0.0; n];
    let mut flip = vec![1.0; n];

    for k in 0..n {
        // Householder vector annihilating w[k+1.., k].
        let norm = (k..m).map(|r| w.get(r, k).powi(2)).sum::<f64>().sqrt();
        let head = w.get(k, k);
        if norm <= RANK_TOL * scale {
            return Err(CoreError::RankDeficient {
                column: k,
                pivot: norm,
            });
        }
        let alpha = if head >= 0.0 { -norm } else { norm };
        let v0 = head - alpha;
        let vnorm2 = v0 * v0 + (k + 1..m).map(|r| w.get(r, k).powi(2)).sum::<f64>();
        let b = 2.0 / vnorm2;
        // Apply H = I − β v vᵀ to the trailing columns only.  Column k
        // itself reflects to (α, 0, ..., 0) analytically, and its
        // subdiagonal slots keep the original entries, which are exactly
        // the tail of the reflector vector v = (v0, w[k+1.., k]).
        for c in k + 1..n {
            let mut dot = v0 * w.get(k, c);
            for r in k + 1..m {
                dot += w.get(r, k) * w.get(r, c);
            }
            let s = b * dot;
            w.set(k, c, w.get(k, c) - s * v0);
            for r in k + 1..m {
                w.set(r, c, w.get(r, c) - s * w.get(r, k));
            }
        }
        w.set(k, k, alpha);
        v_head[k] = v0;
        beta[k] = b;
        // Make R_kk non-negative by flipping the row of R.  Reflections
        // for later columns never touch row k again, so the row is final.
        if w.get(k, k) < 0.0 {
            flip[k] = -1.0;
            for c in k..n {
                w.set(k, c, -w.get(k, c));
            }
        }
    }
    Ok(QrFactors {
        packed: w,
        v_head,
        beta,
        flip,
    })
}

impl QrFactors {
    pub fn rows(&self) -> usize {
        self.packed.rows()
    }

    pub fn cols(&self) -> usize {
        self.packed.cols()
    }

    /// The upper-triangular factor `R` (`n × n`, non-negative diagonal).
    pub fn r(&self) -> DenseMatrix {
        let n = self.cols();
        let mut r = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                r.set(i, j, self.packed.get(i, j));
            }
        }
        r
    }

    #[inline]
    fn r_at(&self, i: usize, j: usize) -> f64 {
        self.packed.get(i, j)
    }

    /// Apply `Qᵀ` to a length-`m` vector.  The first `n` entries of the
    /// result satisfy `R x = (Qᵀ y)[..n]` for the least-squares solution `x`;
    /// the remaining entries are the residual coordinates.
    pub fn apply_qt(&self, y: &[f64]) -> Result<Vec<f64>> {
        let (m, n) = (self.rows(), self.cols());
        if y.len() != m {
            return Err(CoreError::InvalidArgument(format!(
                "apply_qt expects a vector of length {m}, got {}",
                y.len()
            )));
        }
        let mut out = y.to_vec();
        for k in 0..n {
            let mut dot = self.v_head[k] * out[k];
            for r in k + 1..m {
                dot += self.packed.get(r, k) * out[r];
            }
            let s = self.beta[k] * dot;
            out[k] -= s * self.v_head[k];
            for r in k + 1..m {
                out[r] -= s * self.packed.get(r, k);
            }
            out[k] *= self.flip[k];
        }
        Ok(out)
    }

    /// Solve `Rᵀ z = f` by forward substitution.
    ///
    /// For a design matrix `A = QR`, the map `f ↦ R^{-T} f` carries basis
    /// evaluations to the "normalized influence" vectors whose inner products
    /// reproduce `fᵀ (AᵀA)^{-1} g`.
    pub fn solve_rt(&self, f: &[f64]) -> Result<Vec<f64>> {
        let n = self.cols();
        if f.len() != n {
            return Err(CoreError::InvalidArgument(format!(
                "solve_rt expects a vector of length {n}, got {}",
                f.len()
            )));
        }
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut s = f[i];
            for j in 0..i {
                s -= self.r_at(j, i) * z[j];
            }
            z[i] = s / self.r_at(i, i);
        }
        Ok(z)
    }

    /// Solve `R x = z` by back substitution.
    pub fn solve_r(&self, z: &[f64]) -> Result<Vec<f64>> {
        let n = self.cols();
        if z.len() != n {
            return Err(CoreError::InvalidArgument(format!(
                "solve_r expects a vector of length {n}, got {}",
                z.len()
            )));
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in i + 1..n {
                s -= self.r_at(i, j) * x[j];
            }
            x[i] = s / self.r_at(i, i);
        }
        Ok(x)
    }
}

/// Cholesky factorization `g = L Lᵀ` of a symmetric positive-definite matrix,
/// failing with the pivot index when a pivot falls at or below `tol`.
#[derive(Debug, Clone)]
pub struct SymCholesky {
    dim: usize,
    l: Vec<f64>, // row-major lower triangle, dense d×d
}

impl SymCholesky {
    /// Factor the row-major symmetric matrix `g` (`dim × dim`).
    pub fn factor(g: &[f64], dim: usize, tol: f64) -> std::result::Result<Self, (usize, f64)> {
        assert_eq!(g.len(), dim * dim);
        let mut l = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let mut s = g[i * dim + j];
                for k in 0..j {
                    s -= l[i * dim + k] * l[j * dim + k];
                }
                if i == j {
                    if s <= tol {
                        return Err((i, s));
                    }
                    l[i * dim + i] = s.sqrt();
                } else {
                    l[i * dim + j] = s / l[j * dim + j];
                }
            }
        }
        Ok(SymCholesky { dim, l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `det(g) = (∏ L_ii)²`.
    pub fn det(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.l[i * self.dim + i])
            .product::<f64>()
            .powi(2)
    }

    pub fn sqrt_det(&self) -> f64 {
        (0..self.dim).map(|i| self.l[i * self.dim + i]).product()
    }

    /// Solve `g x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.dim);
        let d = self.dim;
        let mut y = b.to_vec();
        for i in 0..d {
            for k in 0..i {
                y[i] -= self.l[i * d + k] * y[k];
            }
            y[i] /= self.l[i * d + i];
        }
        for i in (0..d).rev() {
            for k in i + 1..d {
                y[i] -= self.l[k * d + i] * y[k];
            }
            y[i] /= self.l[i * d + i];
        }
        y
    }

    /// The full inverse `g⁻¹`, row-major.
    pub fn inverse(&self) -> Vec<f64> {
        let d = self.dim;
        let mut inv = vec![0.0; d * d];
        let mut e = vec![0.0; d];
        for j in 0..d {
            e.fill(0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..d {
                inv[i * d + j] = col[i];
            }
        }
        inv
    }
}

/// Diagonally pivoted Cholesky of a symmetric positive *semi*-definite
/// matrix, producing a (possibly low-rank) factor `L` with `K ≈ L Lᵀ`, rows
/// in the original ordering.
///
/// Stops once the largest residual diagonal drops to `tol` times the largest
/// initial diagonal; errors if a residual diagonal becomes significantly
/// negative, which indicates the input was not PSD.
pub fn pivoted_cholesky(k: &DenseMatrix, tol: f64) -> Result<DenseMatrix> {
    let n = k.rows();
    if k.cols() != n {
        return Err(CoreError::InvalidArgument(
            "pivoted_cholesky requires a square matrix".into(),
        ));
    }
    let mut diag: Vec<f64> = (0..n).map(|i| k.get(i, i)).collect();
    let max_diag = diag.iter().cloned().fold(0.0f64, f64::max);
    if max_diag <= 0.0 {
        return Err(CoreError::InvalidCovariance(
            "matrix has no positive diagonal entry".into(),
        ));
    }
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut used = vec![false; n];
    loop {
        let (pivot, &dmax) = diag
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap_or((0, &0.0));
        if dmax <= tol * max_diag || cols.len() == n {
            break;
        }
        if dmax < -1e-8 * max_diag {
            return Err(CoreError::InvalidCovariance(format!(
                "residual diagonal {dmax:.3e} at row {pivot} is negative; matrix is not PSD"
            )));
        }
        let r = dmax.sqrt();
        let mut col = vec![0.0; n];
        for i in 0..n {
            if used[i] || i == pivot {
                continue;
            }
            let mut s = k.get(i, pivot);
            for c in &cols {
                s -= c[i] * c[pivot];
            }
            col[i] = s / r;
        }
        col[pivot] = r;
        for i in 0..n {
            if !used[i] {
                diag[i] -= col[i] * col[i];
            }
        }
        used[pivot] = true;
        cols.push(col);
    }
    // Guard against a hidden indefinite block in the skipped remainder.
    if let Some(&worst) = diag
        .iter()
        .enumerate()
        .filter(|(i, _)| !used[*i])
        .map(|(_, d)| d)
        .min_by(|a, b| a.total_cmp(b))
    {
        if worst < -1e-8 * max_diag {
            return Err(CoreError::InvalidCovariance(format!(
                "residual diagonal {worst:.3e} is negative; matrix is not PSD"
            )));
        }
    }
    let rank = cols.len();
    let mut l = DenseMatrix::zeros(n, rank);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            l.set(i, j, col[i]);
        }
    }
    Ok(l)
}
