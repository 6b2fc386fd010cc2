//! Small dense and tridiagonal linear algebra over [`Real`] scalars.
//!
//! Everything here is sized for desk-scale experiments (a few thousand
//! sites at most). Dense routines are O(n^3) and meant for n <= 1024.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
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
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let src = rhs.row(k);
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, a| m.max(a.norm()))
    }

    /// Hilbert-Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> T {
        self.data.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    /// `max |(M*M - I)_{ij}|`.
    pub fn unitarity_defect(&self) -> T {
        self.adjoint().matmul(self).sub(&Self::identity(self.cols)).max_abs()
    }

    /// Principal submatrix on the given index set, in the given order.
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |i, j| self[(idx[i], idx[j])])
    }

    /// Inverse by LU with partial pivoting.
    ///
    /// Exact zeros in the input stay exact zeros in the factors whenever the
    /// matrix is block diagonal up to a permutation: multipliers for rows of
    /// another block are exactly zero.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.rows;
        if n != self.cols {
            return Err(Error::contract("inverse of a non-square matrix"));
        }
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs().max(T::min_positive_value());
        for k in 0..n {
            let (piv, pmax) =
                (k..n)
                    .map(|i| (i, a[(i, k)].norm()))
                    .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= T::epsilon() * scale * T::of(1e-3) {
                return Err(Error::NearSpectrum {
                    condition: f64::INFINITY,
                });
            }
            if piv != k {
                a.swap_rows(piv, k);
                inv.swap_rows(piv, k);
            }
            let d = a[(k, k)];
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[(i, k)] / d;
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    let v = a[(k, j)];
                    a[(i, j)] -= f * v;
                }
                for j in 0..n {
                    let v = inv[(k, j)];
                    inv[(i, j)] -= f * v;
                }
            }
            let dinv = C::<T>::one() / d;
            for j in k..n {
                a[(k, j)] *= dinv;
            }
            for j in 0..n {
                inv[(k, j)] *= dinv;
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Complex tridiagonal matrix: `sub[i] = M[i+1][i]`, `sup[i] = M[i][i+1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal<T> {
    pub sub: Vec<C<T>>,
    pub diag: Vec<C<T>>,
    pub sup: Vec<C<T>>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn new(sub: Vec<C<T>>, diag: Vec<C<T>>, sup: Vec<C<T>>) -> Self {
        let n = diag.len();
        assert!(n >= 1, "empty tridiagonal matrix");
        assert_eq!(sub.len(), n - 1);
        assert_eq!(sup.len(), n - 1);
        Self { sub, diag, sup }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn to_dense(&self) -> CMatrix<T> {
        let n = self.len();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i + 1, i)] = self.sub[i];
                m[(i, i + 1)] = self.sup[i];
            }
        }
        m
    }

    pub fn matvec(&self, v: &[C<T>]) -> Vec<C<T>> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.sub[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.sup[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> T {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].norm();
                if i > 0 {
                    s += self.sub[i - 1].norm();
                }
                if i + 1 < n {
                    s += self.sup[i].norm();
                }
                s
            })
            .fold(T::zero(), T::max)
    }

    /// One norm (max absolute column sum).
    pub fn norm_one(&self) -> T {
        let n = self.len();
        (0..n)
            .map(|j| {
                let mut s = self.diag[j].norm();
                if j > 0 {
                    s += self.sup[j - 1].norm();
                }
                if j + 1 < n {
                    s += self.sub[j].norm();
                }
                s
            })
            .fold(T::zero(), T::max)
    }

    /// LU factorization with partial pivoting (row interchanges).
    pub fn factor(&self) -> Result<TridiagonalLu<T>> {
        TridiagonalLu::new(self)
    }
}

/// LU factors of a [`Tridiagonal`] matrix, `P A = L U` with `U` having two
/// superdiagonals.
#[derive(Clone, Debug)]
pub struct TridiagonalLu<T> {
    dl: Vec<C<T>>,
    d: Vec<C<T>>,
    du: Vec<C<T>>,
    du2: Vec<C<T>>,
    swapped: Vec<bool>,
    norm_one: T,
    condition: T,
}

impl<T: Real> TridiagonalLu<T> {
    fn new(a: &Tridiagonal<T>) -> Result<Self> {
        let n = a.len();
        let mut dl = a.sub.clone();
        let mut d = a.diag.clone();
        let mut du = a.sup.clone();
        let mut du2 = vec![C::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].norm() >= dl[i].norm() {
                if !d[i].is_zero() {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        let norm_one = a.norm_one();
        let mut lu = Self {
            dl,
            d,
            du,
            du2,
            swapped,
            norm_one,
            condition: T::infinity(),
        };
        if lu
            .d
            .iter()
            .any(|p| p.is_zero() || !p.re.is_finite() || !p.im.is_finite())
        {
            return Err(Error::NearSpectrum {
                condition: f64::INFINITY,
            });
        }
        lu.condition = lu.norm_one * lu.inverse_norm_one_estimate();
        if !lu.condition.is_finite() || lu.condition * T::epsilon() > T::of(0.01) {
            return Err(Error::NearSpectrum {
                condition: lu.condition.to_f64_lossy(),
            });
        }
        Ok(lu)
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Estimated one-norm condition number `||A||_1 ||A^{-1}||_1`.
    pub fn condition(&self) -> T {
        self.condition
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [C<T>]) {
        let n = self.len();
        assert_eq!(b.len(), n);
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }

    /// Solves `A^* x = b` in place.
    pub fn solve_adjoint_in_place(&self, b: &mut [C<T>]) {
        let n = self.len();
        assert_eq!(b.len(), n);
        b[0] /= self.d[0].conj();
        if n >= 2 {
            b[1] = (b[1] - self.du[0].conj() * b[0]) / self.d[1].conj();
        }
        for i in 2..n {
            b[i] = (b[i] - self.du[i - 1].conj() * b[i - 1] - self.du2[i - 2].conj() * b[i - 2]) / self.d[i].conj();
        }
        for i in (0..n.saturating_sub(1)).rev() {
            if self.swapped[i] {
                let temp = b[i + 1];
                b[i + 1] = b[i] - self.dl[i].conj() * temp;
                b[i] = temp;
            } else {
                b[i] -= self.dl[i].conj() * b[i + 1];
            }
        }
    }

    pub fn solve(&self, b: &[C<T>]) -> Vec<C<T>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Column `l` of the inverse.
    pub fn inverse_column(&self, l: usize) -> Vec<C<T>> {
        let mut x = vec![C::zero(); self.len()];
        x[l] = C::one();
        self.solve_in_place(&mut x);
        x
    }

    /// Full inverse, column by column.
    pub fn inverse(&self) -> CMatrix<T> {
        let n = self.len();
        let mut inv = CMatrix::zeros(n, n);
        for l in 0..n {
            let col = self.inverse_column(l);
            for (k, v) in col.into_iter().enumerate() {
                inv[(k, l)] = v;
            }
        }
        inv
    }

    /// Hager-Higham estimate of `||A^{-1}||_1` (a lower bound, usually sharp).
    fn inverse_norm_one_estimate(&self) -> T {
        let n = self.len();
        let nf = T::of_int(n as i64);
        let mut x = vec![C::new(T::one() / nf, T::zero()); n];
        let mut est = T::zero();
        let mut last_j = usize::MAX;
        for iter in 0..5 {
            let mut y = x.clone();
            self.solve_in_place(&mut y);
            let new_est: T = y.iter().map(|v| v.norm()).sum();
            if iter > 0 && new_est <= est {
                break;
            }
            est = new_est;
            let mut xi: Vec<C<T>> = y
                .iter()
                .map(|v| {
                    let m = v.norm();
                    if m > T::zero() {
                        v / m
                    } else {
                        C::one()
                    }
                })
                .collect();
            self.solve_adjoint_in_place(&mut xi);
            let (j, zmax) = xi
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, T::zero()), |b, c| if c.1 > b.1 { c } else { b });
            if j == last_j {
                break;
            }
            let ztx: T = xi.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if iter > 0 && zmax <= ztx {
                break;
            }
            x = vec![C::zero(); n];
            x[j] = C::one();
            last_j = j;
        }
        est
    }

    /// Operator 2-norm of `A^{-1}` by power iteration on `(A^* A)^{-1}`.
    ///
    /// Every iterate is a certified lower bound; iteration stops once the
    /// relative change drops below `rel_tol` or `max_iter` is hit.
    pub fn inverse_norm_two(&self, rel_tol: T, max_iter: usize) -> NormEstimate<T> {
        let n = self.len();
        // deterministic, non-degenerate start vector
        let mut v: Vec<C<T>> = (0..n)
            .map(|i| {
                let t = T::of(0.618_033_988_749_894_9) * T::of_int(i as i64 + 1);
                C::new(T::one() + crate::scalar::frac(t), crate::scalar::frac(t * T::of(1.7)))
            })
            .collect();
        normalize(&mut v);
        let mut sigma = T::zero();
        let mut iterations = 0;
        let mut converged = false;
        for it in 0..max_iter {
            iterations = it + 1;
            let mut w = v.clone();
            self.solve_adjoint_in_place(&mut w);
            self.solve_in_place(&mut w);
            // w = (A^* A)^{-1} v, so ||w|| <= ||A^{-1}||^2 for unit v
            let nrm = norm2(&w);
            let new_sigma = nrm.sqrt();
            let done = it > 2 && (new_sigma - sigma).abs() <= rel_tol * new_sigma;
            sigma = sigma.max(new_sigma);
            if nrm.is_zero() || !nrm.is_finite() {
                break;
            }
            for (a, b) in v.iter_mut().zip(&w) {
                *a = b / nrm;
            }
            if done {
                converged = true;
                break;
            }
        }
        NormEstimate {
            value: sigma,
            iterations,
            converged,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate<T> {
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

pub fn norm2<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
}

pub fn normalize<T: Real>(v: &mut [C<T>]) -> T {
    let n = norm2(v);
    if n > T::zero() {
        for a in v.iter_mut() {
            *a /= n;
        }
    }
    n
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// sorted ascending. Only the upper triangle's Hermitian part is trusted.
pub fn hermitian_eigenvalues<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let mut a = m.clone();
    for sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        let diag: T = (0..n).map(|i| a[(i, i)].norm_sqr()).sum();
        if off <= T::epsilon() * T::epsilon() * diag.max(T::min_positive_value()) || sweep == 99 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let bm = b.norm();
                if bm <= T::min_positive_value() {
                    continue;
                }
                let u = b / bm;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (T::of(2.0) * bm);
                let t = if tau >= T::zero() {
                    -T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                // A <- A R with R = [[c, -s u], [s conj(u), c]] on (p, q)
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * u.conj() * s;
                    a[(k, q)] = -akp * u * s + akq * c;
                }
                // A <- R^* A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * u * s;
                    a[(q, k)] = -apk * u.conj() * s + aqk * c;
                }
                a[(p, q)] = C::zero();
                a[(q, p)] = C::zero();
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    ev
}

/// Singular values of a dense matrix, descending.
pub fn singular_values<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let g = m.adjoint().matmul(m);
    let mut s: Vec<T> = hermitian_eigenvalues(&g)
        .into_iter()
        .map(|x| x.max(T::zero()).sqrt())
        .collect();
    s.reverse();
    s
}

/// Eigenvalues of a general complex matrix: Householder reduction to
/// Hessenberg form followed by single-shift QR with Wilkinson shifts.
pub fn eigenvalues<T: Real>(m: &CMatrix<T>) -> Result<Vec<C<T>>> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::contract("eigenvalues of a non-square matrix"));
    }
    let mut h = m.clone();
    hessenberg_in_place(&mut h);
    let eps = T::epsilon();
    let mut out = vec![C::zero(); n];
    let mut hi = n;
    let mut iters_since_deflation = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let last = hi - 1;
        if last == 0 {
            out[0] = h[(0, 0)];
            break;
        }
        // find start of the active unreduced block
        let mut lo = last;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if h[(lo, lo - 1)].norm() <= eps * s.max(T::min_positive_value()) {
                h[(lo, lo - 1)] = C::zero();
                break;
            }
            lo -= 1;
        }
        if lo == last {
            out[last] = h[(last, last)];
            hi -= 1;
            iters_since_deflation = 0;
            continue;
        }
        total += 1;
        iters_since_deflation += 1;
        if total > 60 * n.max(4) {
            return Err(Error::Numerical("QR iteration did not converge".into()));
        }
        let mu = if iters_since_deflation % 11 == 10 {
            // exceptional shift
            h[(last, last)] + C::new(h[(last, last - 1)].norm() * T::of(0.75), T::zero())
        } else {
            wilkinson_shift(
                h[(last - 1, last - 1)],
                h[(last - 1, last)],
                h[(last, last - 1)],
                h[(last, last)],
            )
        };
        qr_step(&mut h, lo, last, mu);
    }
    Ok(out)
}

fn wilkinson_shift<T: Real>(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> C<T> {
    let half = T::of(0.5);
    let tr = (a + d) * half;
    let disc = ((a - d) * half * ((a - d) * half) + b * c).sqrt();
    let l1 = tr + disc;
    let l2 = tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn qr_step<T: Real>(h: &mut CMatrix<T>, lo: usize, hi: usize, mu: C<T>) {
    for i in lo..=hi {
        h[(i, i)] -= mu;
    }
    let mut rots: Vec<(C<T>, C<T>)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r.is_zero() {
            (C::one(), C::zero())
        } else {
            (a / r, b / r)
        };
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = c.conj() * x + s.conj() * y;
            h[(k + 1, j)] = -s * x + c * y;
        }
        rots.push((c, s));
    }
    for (idx, k) in (lo..hi).enumerate() {
        let (c, s) = rots[idx];
        let top = (k + 1).min(hi);
        for i in lo..=top {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s;
            h[(i, k + 1)] = -x * s.conj() + y * c.conj();
        }
    }
    for i in lo..=hi {
        h[(i, i)] += mu;
    }
}

fn hessenberg_in_place<T: Real>(a: &mut CMatrix<T>) {
    let n = a.rows();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C<T>> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xnorm = norm2(&x);
        if xnorm <= T::min_positive_value() {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() > T::zero() {
            x0 / x0.norm()
        } else {
            C::one()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        if normalize(&mut v) <= T::min_positive_value() {
            continue;
        }
        // A <- (I - 2 v v*) A on rows k+1..n
        for j in 0..n {
            let dot: C<T> = v.iter().enumerate().map(|(t, vi)| vi.conj() * a[(k + 1 + t, j)]).sum();
            let two_dot = dot * T::of(2.0);
            for (t, vi) in v.iter().enumerate() {
                a[(k + 1 + t, j)] -= vi * two_dot;
            }
        }
        // A <- A (I - 2 v v*) on columns k+1..n
        for i in 0..n {
            let dot: C<T> = v.iter().enumerate().map(|(t, vi)| a[(i, k + 1 + t)] * vi).sum();
            let two_dot = dot * T::of(2.0);
            for (t, vi) in v.iter().enumerate() {
                a[(i, k + 1 + t)] -= two_dot * vi.conj();
            }
        }
        for i in k + 2..n {
            a[(i, k)] = C::zero();
        }
    }
}

/// Real symmetric tridiagonal matrix: `off[i] = M[i][i+1] = M[i+1][i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Self {
        assert!(!diag.is_empty(), "empty tridiagonal matrix");
        assert_eq!(off.len(), diag.len() - 1);
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `M − z` as a complex tridiagonal matrix.
    pub fn shifted(&self, z: C<T>) -> Tridiagonal<T> {
        let off: Vec<C<T>> = self.off.iter().map(|&b| C::new(b, T::zero())).collect();
        Tridiagonal::new(
            off.clone(),
            self.diag.iter().map(|&d| C::new(d, T::zero()) - z).collect(),
            off,
        )
    }

    pub fn to_dense(&self) -> CMatrix<T> {
        self.shifted(C::zero()).to_dense()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: T) -> usize {
        let off_sq: Vec<T> = self.off.iter().map(|&b| b * b).collect();
        sturm_count(&self.diag, &off_sq, x)
    }

    /// Full spectrum, ascending, by Sturm bisection on the Gershgorin interval.
    pub fn eigenvalues(&self) -> Vec<T> {
        let (lo, hi) = gershgorin(&self.diag, &self.off);
        let pad = T::one() + (lo.abs().max(hi.abs())) * T::epsilon() * T::of(8.0);
        self.eigenvalues_in(lo - pad, hi + pad)
    }

    pub fn eigenvalues_in(&self, lo: T, hi: T) -> Vec<T> {
        sturm_eigenvalues_in(&self.diag, &self.off, lo, hi)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.len(), other.len());
        let d = self
            .diag
            .iter()
            .zip(&other.diag)
            .chain(self.off.iter().zip(&other.off))
            .map(|(a, b)| (*a - *b).abs());
        d.fold(T::zero(), T::max)
    }
}

/// Number of eigenvalues strictly below `x` of the real symmetric tridiagonal
/// matrix with diagonal `diag` and squared off-diagonal `off_sq`.
pub fn sturm_count<T: Real>(diag: &[T], off_sq: &[T], x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    // a vanishing pivot is replaced by `-tiny` and counted as negative
    let pivot = |q: T| if q.abs() < tiny { -tiny } else { q };
    let mut q = pivot(diag[0] - x);
    if q < T::zero() {
        count += 1;
    }
    for i in 1..diag.len() {
        q = pivot(diag[i] - x - off_sq[i - 1] / q);
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

/// Gershgorin enclosure `[lo, hi]` of a symmetric tridiagonal spectrum.
pub fn gershgorin<T: Real>(diag: &[T], off: &[T]) -> (T, T) {
    let n = diag.len();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..n {
        let mut r = T::zero();
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i + 1 < n {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// Eigenvalues in `[lo, hi)` by recursive Sturm bisection, ascending.
///
/// Each returned value is the midpoint of an interval of width at most
/// `4 eps max(|lo|, |hi|, 1)` containing exactly the reported multiplicity.
pub fn sturm_eigenvalues_in<T: Real>(diag: &[T], off: &[T], lo: T, hi: T) -> Vec<T> {
    let off_sq: Vec<T> = off.iter().map(|&b| b * b).collect();
    let scale = lo.abs().max(hi.abs()).max(T::one());
    let tol = T::of(4.0) * T::epsilon() * scale;
    let clo = sturm_count(diag, &off_sq, lo);
    let chi = sturm_count(diag, &off_sq, hi);
    let mut out = Vec::with_capacity(chi.saturating_sub(clo));
    let mut stack = vec![(lo, hi, clo, chi)];
    while let Some((a, b, ca, cb)) = stack.pop() {
        if cb <= ca {
            continue;
        }
        let mid = a + (b - a) * T::of(0.5);
        if b - a <= tol || mid <= a || mid >= b {
            for _ in ca..cb {
                out.push(mid);
            }
            continue;
        }
        let cm = sturm_count(diag, &off_sq, mid);
        // push upper half first so the lower half is processed first
        stack.push((mid, b, cm, cb));
        stack.push((a, mid, ca, cm));
    }
    out.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    out
}
