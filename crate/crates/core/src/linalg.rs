//! Small dense complex matrices.
//!
//! Only what the Gaussian formulas and the Fock-basis oracle need: products,
//! inverse and determinant via partial-pivot elimination, and a cyclic Jacobi
//! eigensolver for Hermitian matrices. Sizes range from 2×2 to a few hundred.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{re, Scalar, C};

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<F: Scalar> {
    n: usize,
    data: Vec<C<F>>,
}

impl<F: Scalar> CMatrix<F> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![C::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C<F>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_diag(d: &[F]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = re(x);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C<F>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, k: C<F>) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&z| z * k).collect() }
    }

    pub fn scale_re(&self, k: F) -> Self {
        self.scale(re(k))
    }

    pub fn trace(&self) -> C<F> {
        (0..self.n).fold(C::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_norm(&self) -> F {
        self.data.iter().map(|z| z.norm_sqr()).sum::<F>().sqrt()
    }

    pub fn max_abs(&self) -> F {
        self.data.iter().fold(F::zero(), |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> F {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .fold(F::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    /// Largest `|A_ij − conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> F {
        let mut dev = F::zero();
        for i in 0..self.n {
            for j in i..self.n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `A·v`
    pub fn mul_vec(&self, v: &[C<F>]) -> Vec<C<F>> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).fold(C::zero(), |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }

    /// LU factorisation with partial pivoting; returns the packed factors,
    /// the permutation and its sign. Errors if a pivot vanishes.
    fn lu(&self) -> Result<(Vec<C<F>>, Vec<usize>, F)> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = F::one();
        let scale = self.max_abs().max(F::min_positive_value());
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, F::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= scale * F::epsilon() * F::lit(16.0) {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let inv: C<F> = a[k * n + k].inv();
            for i in (k + 1)..n {
                let f = a[i * n + k] * inv;
                a[i * n + k] = f;
                if f.is_zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let t = a[k * n + j];
                    a[i * n + j] -= f * t;
                }
            }
        }
        Ok((a, perm, sign))
    }

    pub fn determinant(&self) -> C<F> {
        match self.lu() {
            Ok((a, _, sign)) => (0..self.n).fold(re(sign), |acc, i| acc * a[i * self.n + i]),
            Err(_) => C::zero(),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let (a, perm, _) = self.lu()?;
        let mut inv = Self::zeros(n);
        for col in 0..n {
            // solve L U x = P e_col
            let mut x: Vec<C<F>> = (0..n)
                .map(|i| if perm[i] == col { C::one() } else { C::zero() })
                .collect();
            for i in 0..n {
                for k in 0..i {
                    let t = a[i * n + k] * x[k];
                    x[i] -= t;
                }
            }
            for i in (0..n).rev() {
                for k in (i + 1)..n {
                    let t = a[i * n + k] * x[k];
                    x[i] -= t;
                }
                x[i] /= a[i * n + i];
            }
            for i in 0..n {
                inv[(i, col)] = x[i];
            }
        }
        Ok(inv)
    }

    /// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Eigenvalues ascending; eigenvectors are the columns of the
    /// returned unitary.
    pub fn hermitian_eigen(&self) -> Result<(Vec<F>, Self)> {
        let n = self.n;
        let scale = self.max_abs().max(F::one());
        let dev = self.hermitian_deviation();
        if dev > scale * F::lit(1e3) * F::epsilon() {
            return Err(Error::NonHermitian(dev.to_f64_lossy()));
        }
        // symmetrise so round-off asymmetry does not accumulate
        let mut a = Self::from_fn(n, |i, j| {
            if i == j {
                re(self[(i, i)].re)
            } else {
                (self[(i, j)] + self[(j, i)].conj()) * re(F::lit(0.5))
            }
        });
        let mut v = Self::identity(n);
        let total = a.frobenius_norm().max(F::min_positive_value());

        for _sweep in 0..100 {
            let off: F = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)].norm_sqr())
                .sum::<F>()
                .sqrt();
            if off <= F::EPS_JACOBI * total {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let g = apq.norm();
                    if g <= F::min_positive_value() {
                        continue;
                    }
                    let phase = apq / re(g);
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let tau = (aqq - app) / (g + g);
                    let t = if tau >= F::zero() {
                        F::one() / (tau + (F::one() + tau * tau).sqrt())
                    } else {
                        -F::one() / (-tau + (F::one() + tau * tau).sqrt())
                    };
                    let cs = F::one() / (F::one() + t * t).sqrt();
                    let sn = t * cs;
                    // U = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
                    let u_pp = re(cs);
                    let u_pq = re(sn);
                    let u_qp = phase.conj() * re(-sn);
                    let u_qq = phase.conj() * re(cs);
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * u_pp + akq * u_qp;
                        a[(k, q)] = akp * u_pq + akq * u_qq;
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * u_pp + vkq * u_qp;
                        v[(k, q)] = vkp * u_pq + vkq * u_qq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                    }
                    a[(p, q)] = C::zero();
                    a[(q, p)] = C::zero();
                    a[(p, p)] = re(a[(p, p)].re);
                    a[(q, q)] = re(a[(q, q)].re);
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&i| a[(i, i)].re).collect();
        let vectors = Self::from_fn(n, |r, col| v[(r, order[col])]);
        Ok((values, vectors))
    }
}

impl<F: Scalar> CMatrix<F> {
    /// Hermitian eigen-decomposition by Householder reduction to a real
    /// tridiagonal matrix followed by implicit QL iterations. Faster than
    /// [`CMatrix::hermitian_eigen`] for the larger Fock-basis densities.
    pub fn hermitian_eigen_tridiagonal(&self) -> Result<(Vec<F>, Self)> {
        let n = self.n;
        let scale = self.max_abs().max(F::one());
        let dev = self.hermitian_deviation();
        if dev > scale * F::lit(1e3) * F::epsilon() {
            return Err(Error::NonHermitian(dev.to_f64_lossy()));
        }
        if n == 0 {
            return Ok((Vec::new(), Self::zeros(0)));
        }
        let mut a = self.clone();
        let mut q = Self::identity(n);
        let two = F::lit(2.0);
        for k in 0..n.saturating_sub(2) {
            let x: Vec<C<F>> = ((k + 1)..n).map(|i| a[(i, k)]).collect();
            let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<F>().sqrt();
            if xnorm <= F::min_positive_value() {
                continue;
            }
            let x0 = x[0];
            let phase = if x0.norm() > F::zero() { x0 / re(x0.norm()) } else { C::one() };
            let alpha = -phase * re(xnorm);
            let mut v = x;
            v[0] -= alpha;
            let vv = v.iter().map(|z| z.norm_sqr()).sum::<F>();
            if vv <= F::min_positive_value() {
                continue;
            }
            let beta = two / vv;
            let off = k + 1;
            // A <- H A
            for j in 0..n {
                let w = (0..v.len()).fold(C::<F>::zero(), |acc, i| acc + v[i].conj() * a[(off + i, j)]);
                if w.is_zero() {
                    continue;
                }
                let w = w * re(beta);
                for i in 0..v.len() {
                    a[(off + i, j)] -= v[i] * w;
                }
            }
            // A <- A H, Q <- Q H
            for m in [&mut a, &mut q] {
                for i in 0..n {
                    let w = (0..v.len()).fold(C::<F>::zero(), |acc, j| acc + m[(i, off + j)] * v[j]);
                    if w.is_zero() {
                        continue;
                    }
                    let w = w * re(beta);
                    for j in 0..v.len() {
                        m[(i, off + j)] -= w * v[j].conj();
                    }
                }
            }
        }
        let mut d: Vec<F> = (0..n).map(|i| a[(i, i)].re).collect();
        let mut e = vec![F::zero(); n];
        let mut phases = vec![C::<F>::one(); n];
        for k in 0..n - 1 {
            let sub = a[(k + 1, k)];
            let mag = sub.norm();
            e[k] = mag;
            phases[k + 1] = if mag > F::zero() { phases[k] * (sub / re(mag)) } else { phases[k] };
        }
        let mut z = vec![F::zero(); n * n];
        for i in 0..n {
            z[i * n + i] = F::one();
        }
        tridiagonal_ql(&mut d, &mut e, &mut z, n)?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
        // eigenvectors: Q · diag(phases) · Z
        let mut vecs = Self::zeros(n);
        for (col, &src) in order.iter().enumerate() {
            let y: Vec<C<F>> = (0..n).map(|r| phases[r] * re(z[r * n + src])).collect();
            for r in 0..n {
                vecs[(r, col)] = (0..n).fold(C::<F>::zero(), |acc, k| acc + q[(r, k)] * y[k]);
            }
        }
        Ok((order.iter().map(|&i| d[i]).collect(), vecs))
    }
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix
/// (`d` diagonal, `e[i]` couples `i` and `i+1`). `z` accumulates the
/// rotations, row-major `n×n`.
fn tridiagonal_ql<F: Scalar>(d: &mut [F], e: &mut [F], z: &mut [F], n: usize) -> Result<()> {
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= F::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(Error::Domain("tridiagonal QL failed to converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (F::lit(2.0) * e[l]);
            let mut r = g.hypot(F::one());
            g = d[m] - d[l] + e[l] / (g + if g >= F::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (F::one(), F::one(), F::zero());
            let mut early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == F::zero() {
                    d[i + 1] -= p;
                    e[m] = F::zero();
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + F::lit(2.0) * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let fz = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * fz;
                    z[k * n + i] = c * z[k * n + i] - s * fz;
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = F::zero();
        }
    }
    Ok(())
}

impl<F: Scalar> Index<(usize, usize)> for CMatrix<F> {
    type Output = C<F>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<F> {
        &self.data[i * self.n + j]
    }
}

impl<F: Scalar> IndexMut<(usize, usize)> for CMatrix<F> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<F> {
        &mut self.data[i * self.n + j]
    }
}

impl<F: Scalar> Mul for &CMatrix<F> {
    type Output = CMatrix<F>;
    fn mul(self, rhs: &CMatrix<F>) -> CMatrix<F> {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += aik * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl<F: Scalar> Add for &CMatrix<F> {
    type Output = CMatrix<F>;
    fn add(self, rhs: &CMatrix<F>) -> CMatrix<F> {
        assert_eq!(self.n, rhs.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect() }
    }
}

impl<F: Scalar> Sub for &CMatrix<F> {
    type Output = CMatrix<F>;
    fn sub(self, rhs: &CMatrix<F>) -> CMatrix<F> {
        assert_eq!(self.n, rhs.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect() }
    }
}

/// Partition `0..n` into the connected components of the union of the
/// nonzero patterns of `mats` (entries with modulus above `tol`).
pub fn block_components<F: Scalar>(mats: &[&CMatrix<F>], tol: F) -> Vec<Vec<usize>> {
    let n = mats.first().map_or(0, |m| m.dim());
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for m in mats {
        for i in 0..n {
            for j in (i + 1)..n {
                if m[(i, j)].norm() > tol || m[(j, i)].norm() > tol {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Principal submatrix on `idx`.
pub fn submatrix<F: Scalar>(m: &CMatrix<F>, idx: &[usize]) -> CMatrix<F> {
    CMatrix::from_fn(idx.len(), |i, j| m[(idx[i], idx[j])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn sample_hermitian(n: usize, seed: u64) -> CMatrix<f64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = re(next() * 4.0);
            for j in (i + 1)..n {
                let z = c(next(), next());
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = &sample_hermitian(6, 3) + &CMatrix::identity(6).scale_re(3.0);
        let inv = m.inverse().unwrap();
        let prod = &m * &inv;
        assert!(prod.max_abs_diff(&CMatrix::identity(6)) < 1e-12);
    }

    #[test]
    fn singular_matrix_rejected() {
        let mut m = CMatrix::<f64>::identity(3);
        m[(2, 2)] = re(0.0);
        assert_eq!(m.inverse(), Err(Error::Singular));
        assert_eq!(m.determinant(), re(0.0));
    }

    #[test]
    fn determinant_of_diagonal() {
        let m = CMatrix::from_diag(&[2.0, 3.0, -0.5]);
        assert!((m.determinant() - re(-3.0)).norm() < 1e-14);
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        for (n, seed) in [(2, 1), (5, 7), (17, 11), (40, 5)] {
            let m = sample_hermitian(n, seed);
            let (vals, vecs) = m.hermitian_eigen().unwrap();
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            let lam = CMatrix::from_diag(&vals);
            let back = &(&vecs * &lam) * &vecs.adjoint();
            assert!(back.max_abs_diff(&m) < 1e-12, "n={n}");
            let ortho = &vecs.adjoint() * &vecs;
            assert!(ortho.max_abs_diff(&CMatrix::identity(n)) < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_agrees_with_jacobi() {
        for (n, seed) in [(1, 2), (2, 3), (9, 4), (60, 9), (120, 13)] {
            let m = sample_hermitian(n, seed);
            let (vals, vecs) = m.hermitian_eigen_tridiagonal().unwrap();
            let back = &(&vecs * &CMatrix::from_diag(&vals)) * &vecs.adjoint();
            assert!(back.max_abs_diff(&m) < 1e-11, "n={n}");
            let ortho = &vecs.adjoint() * &vecs;
            assert!(ortho.max_abs_diff(&CMatrix::identity(n)) < 1e-11);
            if n <= 60 {
                let (jv, _) = m.hermitian_eigen().unwrap();
                for (a, b) in vals.iter().zip(&jv) {
                    assert!((a - b).abs() < 1e-11);
                }
            }
        }
        // already diagonal / rank one
        let d = CMatrix::from_diag(&[3.0, -1.0, 2.0]);
        assert_eq!(d.hermitian_eigen_tridiagonal().unwrap().0, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn jacobi_rejects_non_hermitian() {
        let mut m = CMatrix::<f64>::identity(2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(m.hermitian_eigen(), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn block_components_split_diagonal() {
        let mut m = CMatrix::<f64>::identity(4);
        m[(0, 3)] = re(0.1);
        m[(3, 0)] = re(0.1);
        let blocks = block_components(&[&m], 0.0);
        assert_eq!(blocks, vec![vec![0, 3], vec![1], vec![2]]);
    }
}
