//! Dense complex linear algebra: a column-major matrix type, a thin SVD
//! (one-sided Jacobi) and a Cholesky-based Hermitian solver.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{Real, C};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("thin SVD requires rows >= cols, got {rows}x{cols}")]
    WideMatrix { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (relative asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("ill-conditioned equivalent channel (condition estimate {0:e})")]
    IllConditioned(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("Jacobi SVD did not converge in {0} sweeps")]
    NoConvergence(usize),
}

/// Condition-number threshold above which a Hermitian system is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Dense complex matrix, column-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row vectors. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<C<T>>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self::from_fn(n, m, |i, j| rows[i][j])
    }

    /// Builds a matrix from column vectors of equal length.
    pub fn from_columns(cols: &[Vec<C<T>>]) -> Self {
        let m = cols.len();
        let n = cols.first().map_or(0, Vec::len);
        assert!(cols.iter().all(|c| c.len() == n), "ragged columns");
        let data = cols.iter().flat_map(|c| c.iter().copied()).collect();
        Self {
            rows: n,
            cols: m,
            data,
        }
    }

    /// Real diagonal matrix of size `rows x cols`.
    pub fn from_diag(rows: usize, cols: usize, diag: &[T]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &d) in diag.iter().enumerate().take(rows.min(cols)) {
            m[(i, i)] = C::new(d, T::zero());
        }
        m
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

    pub fn col(&self, j: usize) -> &[C<T>] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [C<T>] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<C<T>> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &C<T>> {
        self.data.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self * rhs`. Panics on inner-dimension mismatch; use [`CMatrix::try_matmul`]
    /// where the shapes come from user input.
    pub fn matmul(&self, rhs: &Self) -> Self {
        self.try_matmul(rhs).expect("matmul dimension mismatch")
    }

    pub fn try_matmul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::Dimension(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let rcol = rhs.col(j);
            let ocol = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in rcol.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let acol = &self.data[k * self.rows..(k + 1) * self.rows];
                for (o, &a) in ocol.iter_mut().zip(acol) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self^H * rhs` without materializing the adjoint.
    pub fn adjoint_mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.rows != rhs.rows {
            return Err(LinalgError::Dimension(format!(
                "({}x{})^H * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self::from_fn(self.cols, rhs.cols, |i, j| {
            dot_conj(self.col(i), rhs.col(j))
        }))
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(C::new(s, T::zero()))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.shape(), rhs.shape(), "sub dimension mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm_sq(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn frobenius_norm(&self) -> T {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn col_norm_sq(&self, j: usize) -> T {
        self.col(j).iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// Copy of the first `n` columns.
    pub fn leading_cols(&self, n: usize) -> Self {
        assert!(n <= self.cols);
        Self {
            rows: self.rows,
            cols: n,
            data: self.data[..n * self.rows].to_vec(),
        }
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        assert_eq!(self.shape(), rhs.shape());
        self.data
            .iter()
            .zip(&rhs.data)
            .fold(T::zero(), |acc, (a, b)| acc.max((a - b).norm()))
    }
}

impl<T: Real> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;

    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl<T: Real> fmt::Debug for CMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4e}{:+.4e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// `x^H y`.
pub fn dot_conj<T: Real>(x: &[C<T>], y: &[C<T>]) -> C<T> {
    x.iter()
        .zip(y)
        .fold(C::zero(), |acc, (a, b)| acc + a.conj() * b)
}

/// Economy SVD `A = U diag(sigma) V^H` of an `n x k` matrix with `n >= k`.
#[derive(Debug, Clone)]
pub struct ThinSvd<T: Real> {
    /// `n x k`, orthonormal columns.
    pub u: CMatrix<T>,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<T>,
    /// `k x k`, unitary.
    pub v: CMatrix<T>,
}

impl<T: Real> ThinSvd<T> {
    /// `U diag(sigma) V^H`.
    pub fn reconstruct(&self) -> CMatrix<T> {
        self.reconstruct_rank(self.singular_values.len())
    }

    /// Sum of the leading `m` rank-one terms `sigma_i u_i v_i^H`.
    pub fn reconstruct_rank(&self, m: usize) -> CMatrix<T> {
        let (n, k) = (self.u.rows(), self.v.rows());
        CMatrix::from_fn(n, k, |i, j| {
            (0..m).fold(C::zero(), |acc, l| {
                acc + self.u[(i, l)] * self.v[(j, l)].conj() * self.singular_values[l]
            })
        })
    }
}

const MAX_SWEEPS: usize = 80;

/// Thin SVD by one-sided (Hestenes) Jacobi rotations.
///
/// Columns of a working copy of `A` are pairwise orthogonalized by complex
/// plane rotations that are accumulated into `V`; at convergence the column
/// norms are the singular values. Columns belonging to zero singular values
/// are completed to an orthonormal set by Gram-Schmidt so `U^H U = I` always.
pub fn thin_svd<T: Real>(a: &CMatrix<T>) -> Result<ThinSvd<T>, LinalgError> {
    let (n, k) = a.shape();
    if n < k {
        return Err(LinalgError::WideMatrix { rows: n, cols: k });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let mut w = a.clone();
    let mut v = CMatrix::<T>::identity(k);
    let tol = T::epsilon() * T::from_count(n).sqrt();

    let mut norms: Vec<T> = (0..k).map(|j| w.col_norm_sq(j)).collect();
    // Columns at roundoff level relative to ||A||_F are left alone; their
    // left singular vectors are rebuilt by completion below.
    let negligible = {
        let e = T::epsilon() * a.frobenius_norm();
        e * e
    };
    let mut converged = k < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        converged = true;
        for p in 0..k - 1 {
            for q in p + 1..k {
                let alpha = norms[p];
                let beta = norms[q];
                let gamma = dot_conj(w.col(p), w.col(q));
                let g = gamma.norm();
                if alpha <= negligible
                    || beta <= negligible
                    || g <= tol * (alpha * beta).sqrt()
                {
                    continue;
                }
                converged = false;
                // Phase-align column q so the inner product is real, then
                // apply a real Jacobi rotation.
                let phase = gamma / g;
                let zeta = (beta - alpha) / (g + g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate_cols(&mut w, p, q, phase, c, s);
                rotate_cols(&mut v, p, q, phase, c, s);
                norms[p] = w.col_norm_sq(p);
                norms[q] = w.col_norm_sq(q);
            }
        }
    }

    let mut order: Vec<usize> = (0..k).collect();
    let sigma_raw: Vec<T> = (0..k).map(|j| w.col_norm_sq(j).sqrt()).collect();
    order.sort_by(|&i, &j| {
        sigma_raw[j]
            .partial_cmp(&sigma_raw[i])
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    });

    let sigma_max = order.first().map_or(T::zero(), |&i| sigma_raw[i]);
    let zero_cut = sigma_max * T::epsilon() * T::from_count(n.max(1));
    let mut u = CMatrix::zeros(n, k);
    let mut vs = CMatrix::zeros(k, k);
    let mut singular_values = Vec::with_capacity(k);
    let mut deficient = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let s = sigma_raw[src];
        singular_values.push(s);
        vs.col_mut(dst).copy_from_slice(v.col(src));
        if s > zero_cut && s > T::min_positive_value() {
            let inv = T::one() / s;
            for (o, z) in u.col_mut(dst).iter_mut().zip(w.col(src)) {
                *o = z * inv;
            }
        } else {
            deficient.push(dst);
        }
    }
    if !deficient.is_empty() {
        complete_orthonormal(&mut u, &deficient);
    }
    Ok(ThinSvd {
        u,
        singular_values,
        v: vs,
    })
}

/// `[x_p, x_q] <- [x_p, phase^* x_q] * [[c, s], [-s, c]]`.
fn rotate_cols<T: Real>(m: &mut CMatrix<T>, p: usize, q: usize, phase: C<T>, c: T, s: T) {
    let rows = m.rows();
    let conj = phase.conj();
    for i in 0..rows {
        let xp = m[(i, p)];
        let xq = m[(i, q)] * conj;
        m[(i, p)] = xp * c - xq * s;
        m[(i, q)] = xp * s + xq * c;
    }
}

/// Fills the listed columns with unit vectors orthogonal to every other column.
///
/// Each target takes the canonical basis vector with the largest residual
/// after projection; the missing subspace has dimension `d`, so that
/// residual has squared norm at least `d / n`.
fn complete_orthonormal<T: Real>(u: &mut CMatrix<T>, targets: &[usize]) {
    let n = u.rows();
    let mut filled: Vec<usize> = (0..u.cols()).filter(|j| !targets.contains(j)).collect();
    let residual = |u: &CMatrix<T>, filled: &[usize], e: usize| {
        let mut x = vec![C::<T>::zero(); n];
        x[e] = C::one();
        // Two Gram-Schmidt passes.
        for _ in 0..2 {
            for &f in filled {
                let proj = dot_conj(u.col(f), &x);
                for (xi, ui) in x.iter_mut().zip(u.col(f)) {
                    *xi -= ui * proj;
                }
            }
        }
        let nrm = x.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
        (x, nrm)
    };
    for &t in targets {
        let (x, nrm) = (0..n)
            .map(|e| residual(u, &filled, e))
            .fold(None, |best: Option<(Vec<C<T>>, T)>, cand| match best {
                Some(b) if b.1 >= cand.1 => Some(b),
                _ => Some(cand),
            })
            .expect("n >= 1");
        for (o, xi) in u.col_mut(t).iter_mut().zip(&x) {
            *o = xi / nrm;
        }
        filled.push(t);
    }
}

/// Solves `G X = B` for Hermitian positive-definite `G` via Cholesky.
///
/// `G` is rejected when its asymmetry exceeds 1e-12 relative to its norm or
/// when its spectral condition number exceeds [`MAX_CONDITION`].
pub fn solve_hermitian<T: Real>(g: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>, LinalgError> {
    let k = g.rows();
    if g.cols() != k || b.rows() != k {
        return Err(LinalgError::Dimension(format!(
            "G {}x{}, B {}x{}",
            g.rows(),
            g.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if !g.is_finite() || !b.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let gnorm = g.frobenius_norm();
    let asym = g.max_abs_diff(&g.adjoint());
    let rel = if gnorm > T::zero() { asym / gnorm } else { asym };
    if rel > T::lit(1e-12) {
        return Err(LinalgError::NotHermitian(rel.to_f64().unwrap_or(f64::NAN)));
    }

    // For Hermitian PD matrices the singular values are the eigenvalues.
    let spectrum = thin_svd(g)?.singular_values;
    let smax = spectrum[0];
    let smin = spectrum[k - 1];
    let cond = if smin > T::zero() { smax / smin } else { T::infinity() };
    if !(cond <= T::lit(MAX_CONDITION)) {
        return Err(LinalgError::IllConditioned(cond.to_f64().unwrap_or(f64::INFINITY)));
    }

    let l = cholesky(g)?;
    let mut x = b.clone();
    for j in 0..x.cols() {
        let col = x.col_mut(j);
        // L y = b
        for i in 0..k {
            let mut acc = col[i];
            for p in 0..i {
                acc -= l[(i, p)] * col[p];
            }
            col[i] = acc / l[(i, i)];
        }
        // L^H x = y
        for i in (0..k).rev() {
            let mut acc = col[i];
            for p in i + 1..k {
                acc -= l[(p, i)].conj() * col[p];
            }
            col[i] = acc / l[(i, i)];
        }
    }
    Ok(x)
}

/// Lower-triangular `L` with `G = L L^H`.
fn cholesky<T: Real>(g: &CMatrix<T>) -> Result<CMatrix<T>, LinalgError> {
    let k = g.rows();
    let mut l = CMatrix::zeros(k, k);
    for j in 0..k {
        let mut d = g[(j, j)].re;
        for p in 0..j {
            d -= l[(j, p)].norm_sqr();
        }
        if !(d > T::zero()) {
            return Err(LinalgError::NotPositiveDefinite);
        }
        let djj = d.sqrt();
        l[(j, j)] = C::new(djj, T::zero());
        for i in j + 1..k {
            let mut acc = g[(i, j)];
            for p in 0..j {
                acc -= l[(i, p)] * l[(j, p)].conj();
            }
            l[(i, j)] = acc / djj;
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    fn random(rows: usize, cols: usize, seed: u64) -> CMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(rows, cols, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn rel_recon_err(a: &CMatrix<f64>, svd: &ThinSvd<f64>) -> f64 {
        svd.reconstruct().sub(a).frobenius_norm() / a.frobenius_norm()
    }

    fn gram_defect(m: &CMatrix<f64>) -> f64 {
        m.adjoint_mul(m)
            .unwrap()
            .max_abs_diff(&CMatrix::identity(m.cols()))
    }

    #[test]
    fn svd_of_diagonal() {
        let a = CMatrix::<f64>::from_diag(2, 2, &[3.0, 1.0]);
        let svd = thin_svd(&a).unwrap();
        assert_eq!(svd.singular_values, vec![3.0, 1.0]);
        // identity up to phase
        assert!((svd.u[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((svd.v[(1, 1)].norm() - 1.0).abs() < 1e-15);
        assert!(svd.u[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn svd_sorts_unordered_diagonal() {
        let a = CMatrix::from_diag(3, 3, &[1.0, 5.0, 2.0]);
        let svd = thin_svd(&a).unwrap();
        assert_eq!(svd.singular_values, vec![5.0, 2.0, 1.0]);
        assert!(rel_recon_err(&a, &svd) < 1e-15);
    }

    #[test]
    fn svd_of_identity() {
        let svd = thin_svd(&CMatrix::<f64>::identity(4)).unwrap();
        assert_eq!(svd.singular_values, vec![1.0; 4]);
    }

    #[test]
    fn svd_random_tall() {
        let a = random(8, 3, 1);
        let svd = thin_svd(&a).unwrap();
        assert!(rel_recon_err(&a, &svd) <= 1e-10);
        assert!(gram_defect(&svd.u) <= 1e-10);
        assert!(gram_defect(&svd.v) <= 1e-10);
        assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_rank_deficient_keeps_orthonormal_u() {
        // third column = first + second
        let mut a = random(6, 3, 2);
        for i in 0..6 {
            a[(i, 2)] = a[(i, 0)] + a[(i, 1)];
        }
        let svd = thin_svd(&a).unwrap();
        assert!(svd.singular_values[2] < 1e-12);
        assert!(gram_defect(&svd.u) <= 1e-10);
        assert!(rel_recon_err(&a, &svd) <= 1e-10);
    }

    #[test]
    fn svd_completes_spread_out_null_space() {
        // I - v v^H with v = 1/sqrt(n): the missing direction touches every
        // coordinate equally, so no single basis vector is close to it.
        let n = 40;
        let a = CMatrix::<f64>::from_fn(n, n, |i, j| {
            let d = if i == j { 1.0 } else { 0.0 };
            c(d - 1.0 / n as f64, 0.0)
        });
        let svd = thin_svd(&a).unwrap();
        assert!(svd.singular_values[n - 1] < 1e-12);
        assert!(gram_defect(&svd.u) <= 1e-10);
        assert!(rel_recon_err(&a, &svd) <= 1e-10);
    }

    #[test]
    fn svd_zero_matrix() {
        let a = CMatrix::<f64>::zeros(4, 2);
        let svd = thin_svd(&a).unwrap();
        assert_eq!(svd.singular_values, vec![0.0, 0.0]);
        assert!(gram_defect(&svd.u) <= 1e-12);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut a = random(3, 2, 3);
        a[(1, 1)] = c(f64::NAN, 0.0);
        assert_eq!(thin_svd(&a).unwrap_err(), LinalgError::NonFinite);
        a[(1, 1)] = c(0.0, f64::INFINITY);
        assert_eq!(thin_svd(&a).unwrap_err(), LinalgError::NonFinite);
    }

    #[test]
    fn svd_rejects_wide() {
        assert!(matches!(
            thin_svd(&random(2, 3, 4)),
            Err(LinalgError::WideMatrix { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn svd_f32_smoke() {
        let a = CMatrix::<f32>::from_fn(5, 3, |i, j| {
            C::new((i as f32 + 1.0) * 0.3 - j as f32, (i * j) as f32 * 0.1)
        });
        let svd = thin_svd(&a).unwrap();
        let err = svd.reconstruct().sub(&a).frobenius_norm() / a.frobenius_norm();
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn solve_identity() {
        let b = random(3, 2, 5);
        let x = solve_hermitian(&CMatrix::identity(3), &b).unwrap();
        assert!(x.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn solve_scalar_matrix() {
        let g = CMatrix::<f64>::identity(3).scale_real(2.0);
        let x = solve_hermitian(&g, &CMatrix::identity(3)).unwrap();
        assert!(x.max_abs_diff(&CMatrix::identity(3).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn solve_random_pd() {
        let a = random(10, 6, 6);
        let g = a.adjoint_mul(&a).unwrap();
        let b = random(6, 4, 7);
        let x = solve_hermitian(&g, &b).unwrap();
        let res = g.matmul(&x).sub(&b).frobenius_norm() / b.frobenius_norm();
        assert!(res <= 1e-10, "{res}");
    }

    #[test]
    fn solve_rejects_singular() {
        let mut a = random(5, 3, 8);
        for i in 0..5 {
            a[(i, 2)] = a[(i, 0)];
        }
        let g = a.adjoint_mul(&a).unwrap();
        let r = solve_hermitian(&g, &CMatrix::identity(3));
        assert!(matches!(
            r,
            Err(LinalgError::IllConditioned(_))
        ));
    }

    #[test]
    fn solve_rejects_non_hermitian() {
        let mut g = CMatrix::<f64>::identity(2);
        g[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(
            solve_hermitian(&g, &CMatrix::identity(2)),
            Err(LinalgError::NotHermitian(_))
        ));
    }

    #[test]
    fn solve_rejects_indefinite() {
        let g = CMatrix::from_diag(2, 2, &[1.0, -1.0]);
        assert_eq!(
            solve_hermitian(&g, &CMatrix::identity(2)).unwrap_err(),
            LinalgError::NotPositiveDefinite
        );
    }

    #[test]
    fn matmul_dimension_error() {
        assert!(random(2, 3, 9).try_matmul(&random(2, 3, 9)).is_err());
    }
}
