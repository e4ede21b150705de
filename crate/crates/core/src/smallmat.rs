//! Dense complex linear algebra for Hermitian operators of dimension at most 4.
//!
//! Everything in the simulator lives on a two-qubit Hilbert space (or one of
//! its 2- and 3-dimensional reductions), so matrices are stored inline as
//! fixed `4 x 4` arrays with an active dimension. The eigensolver is a cyclic
//! complex Jacobi iteration, which is exact to rounding for these sizes.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const MAX_DIM: usize = 4;

/// Symmetry tolerance accepted by [`hermitian_eig`] (scaled by the largest entry).
pub const HERMITIAN_TOL: f64 = 1e-12;

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;
const DEGENERACY_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Square complex matrix with `dim <= 4`.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: [[C64; MAX_DIM]; MAX_DIM],
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for r in 0..self.dim {
            list.entry(&&self.data[r][..self.dim]);
        }
        list.finish()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        Err(Error::UnsupportedDimension(dim))
    } else {
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "unsupported dimension {dim}");
        Self {
            dim,
            data: [[ZERO; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i][i] = ONE;
        }
        m
    }

    /// Builds a matrix from row slices. All rows must have the same length as
    /// the number of rows and every entry must be finite.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        let mut m = Self::zeros(dim);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            for (c, v) in row.iter().enumerate() {
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::NonFinite);
                }
                m.data[r][c] = *v;
            }
        }
        Ok(m)
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i][i] = *v;
        }
        m
    }

    pub fn real_diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i][i] = C64::new(*v, 0.0);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        debug_assert!(r < self.dim && c < self.dim);
        self.data[r][c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        debug_assert!(r < self.dim && c < self.dim);
        self.data[r][c] = v;
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m.data[r][c] = self.data[c][r].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        for r in 0..self.dim {
            for c in 0..self.dim {
                m.data[r][c] *= s;
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i][i]).sum()
    }

    /// Kronecker product; the result dimension must not exceed 4.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let dim = self.dim * other.dim;
        check_dim(dim)?;
        let mut m = Self::zeros(dim);
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                for r2 in 0..other.dim {
                    for c2 in 0..other.dim {
                        m.data[r1 * other.dim + r2][c1 * other.dim + c2] =
                            self.data[r1][c1] * other.data[r2][c2];
                    }
                }
            }
        }
        Ok(m)
    }

    /// Max elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                worst = worst.max((self.data[r][c] - other.data[r][c]).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                worst = worst.max(self.data[r][c].norm());
            }
        }
        worst
    }

    /// `max |M - M†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `max |U†U - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_finite(&self) -> bool {
        (0..self.dim).all(|r| {
            (0..self.dim).all(|c| self.data[r][c].re.is_finite() && self.data[r][c].im.is_finite())
        })
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        *u * *self * u.adjoint()
    }

    pub fn column(&self, c: usize) -> StateVector {
        let mut v = StateVector::zeros(self.dim);
        for r in 0..self.dim {
            v.amps[r] = self.data[r][c];
        }
        v
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[StateVector]) -> Result<Self> {
        let dim = cols.len();
        check_dim(dim)?;
        let mut m = Self::zeros(dim);
        for (c, v) in cols.iter().enumerate() {
            if v.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: v.dim,
                });
            }
            for r in 0..dim {
                m.data[r][c] = v.amps[r];
            }
        }
        Ok(m)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn outer(psi: &StateVector) -> Self {
        let mut m = Self::zeros(psi.dim);
        for r in 0..psi.dim {
            for c in 0..psi.dim {
                m.data[r][c] = psi.amps[r] * psi.amps[c].conj();
            }
        }
        m
    }

    /// `⟨a|M|b⟩`.
    pub fn sandwich(&self, a: &StateVector, b: &StateVector) -> Result<C64> {
        inner(a, &apply(self, b)?)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut m = ComplexMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r][k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    m.data[r][c] += a * rhs.data[k][c];
                }
            }
        }
        m
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut m = self;
        for r in 0..self.dim {
            for c in 0..self.dim {
                m.data[r][c] += rhs.data[r][c];
            }
        }
        m
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut m = self;
        for r in 0..self.dim {
            for c in 0..self.dim {
                m.data[r][c] -= rhs.data[r][c];
            }
        }
        m
    }
}

/// Complex state vector of dimension at most 4.
#[derive(Clone, Copy, PartialEq)]
pub struct StateVector {
    dim: usize,
    amps: [C64; MAX_DIM],
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.amps[..self.dim]).finish()
    }
}

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "unsupported dimension {dim}");
        Self {
            dim,
            amps: [ZERO; MAX_DIM],
        }
    }

    pub fn new(amps: &[C64]) -> Result<Self> {
        check_dim(amps.len())?;
        let mut v = Self::zeros(amps.len());
        for (i, a) in amps.iter().enumerate() {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::NonFinite);
            }
            v.amps[i] = *a;
        }
        Ok(v)
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        let c: Vec<C64> = amps.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(&c)
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut v = Self::zeros(dim);
        v.amps[index] = ONE;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C64] {
        &self.amps[..self.dim]
    }

    #[inline]
    pub fn get(&self, i: usize) -> C64 {
        self.amps[i]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        self.scale(C64::new(1.0 / n, 0.0))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut v = *self;
        for a in v.amps[..v.dim].iter_mut() {
            *a *= s;
        }
        v
    }
}

/// `U ψ`.
pub fn apply(u: &ComplexMatrix, psi: &StateVector) -> Result<StateVector> {
    if u.dim != psi.dim {
        return Err(Error::DimensionMismatch {
            expected: u.dim,
            actual: psi.dim,
        });
    }
    let mut out = StateVector::zeros(psi.dim);
    for r in 0..u.dim {
        let mut acc = ZERO;
        for c in 0..u.dim {
            acc += u.data[r][c] * psi.amps[c];
        }
        out.amps[r] = acc;
    }
    Ok(out)
}

/// `⟨a|b⟩`, antilinear in the first argument.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<C64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            actual: b.dim,
        });
    }
    Ok(a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// `|⟨a|b⟩|²`.
pub fn overlap_sqr(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(inner(a, b)?.norm_sqr())
}

/// Ordered spectrum of a Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` belongs to `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
    /// `E1 - E0`; zero for a one-dimensional input.
    pub gap: f64,
    /// `1 / gap`, infinite when the gap vanishes.
    pub tau: f64,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> StateVector {
        self.eigenvectors.column(i)
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = self.eigenvectors;
        v * ComplexMatrix::real_diagonal(&self.eigenvalues) * v.adjoint()
    }

    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let d: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let v = self.eigenvectors;
        v * ComplexMatrix::diagonal(&d) * v.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back ascending. Each eigenvector is rotated so that its
/// largest-modulus component (lowest index on ties) is real and positive.
/// Inside a degenerate cluster vectors are ordered by the basis index of
/// their largest component.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<SpectralData> {
    eig_impl(m, None)
}

/// Like [`hermitian_eig`], but degenerate clusters are ordered to follow the
/// eigenvectors of `previous` (descending overlap), which keeps adiabatic
/// tracking continuous through exact crossings.
pub fn hermitian_eig_tracked(m: &ComplexMatrix, previous: &SpectralData) -> Result<SpectralData> {
    if previous.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            actual: previous.dim(),
        });
    }
    eig_impl(m, Some(previous))
}

fn eig_impl(m: &ComplexMatrix, previous: Option<&SpectralData>) -> Result<SpectralData> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let scale = m.max_abs().max(1.0);
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL * scale {
        return Err(Error::NonHermitianInput { deviation });
    }
    let n = m.dim;
    let mut a = *m;
    // symmetrize exactly so the rotations see a Hermitian matrix
    for r in 0..n {
        a.data[r][r] = C64::new(a.data[r][r].re, 0.0);
        for c in (r + 1)..n {
            let avg = (a.data[r][c] + a.data[c][r].conj()) * 0.5;
            a.data[r][c] = avg;
            a.data[c][r] = avg.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a.data[r][c].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.data[i][i].re.total_cmp(&a.data[j][j].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.data[i][i].re).collect();
    let mut vectors: Vec<StateVector> = order.iter().map(|&i| fix_phase(v.column(i))).collect();

    // reorder inside degenerate clusters
    let tol = DEGENERACY_TOL * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigenvalues[end] - eigenvalues[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            let cluster = &mut vectors[start..end];
            match previous {
                Some(prev) => {
                    let mut remaining: Vec<StateVector> = cluster.to_vec();
                    for (slot, pos) in (start..end).enumerate() {
                        let target = prev.eigenvector(pos);
                        let best = remaining
                            .iter()
                            .enumerate()
                            .map(|(i, cand)| (i, inner(&target, cand).unwrap().norm_sqr()))
                            .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)))
                            .map(|(i, _)| i)
                            .unwrap();
                        cluster[slot] = remaining.remove(best);
                    }
                }
                None => cluster.sort_by_key(dominant_index),
            }
        }
        start = end;
    }

    let eigenvectors = ComplexMatrix::from_columns(&vectors)?;
    let gap = if n > 1 {
        (eigenvalues[1] - eigenvalues[0]).max(0.0)
    } else {
        0.0
    };
    let tau = if gap > 0.0 { 1.0 / gap } else { f64::INFINITY };
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
        gap,
        tau,
    })
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = a.dim;
    let z = a.data[p][q];
    let mag = z.norm();
    if mag == 0.0 {
        return;
    }
    let phase = z / mag; // e^{iφ}
    let app = a.data[p][p].re;
    let aqq = a.data[q][q].re;
    let zeta = (aqq - app) / (2.0 * mag);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (zeta * zeta + 1.0).sqrt())
    } else {
        -1.0 / (-zeta + (zeta * zeta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // W = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on (p, q)
    let w_qp = -phase.conj() * s;
    let w_qq = phase.conj() * c;

    for r in 0..n {
        let xp = a.data[r][p];
        let xq = a.data[r][q];
        a.data[r][p] = xp * c + xq * w_qp;
        a.data[r][q] = xp * s + xq * w_qq;
        let yp = v.data[r][p];
        let yq = v.data[r][q];
        v.data[r][p] = yp * c + yq * w_qp;
        v.data[r][q] = yp * s + yq * w_qq;
    }
    for col in 0..n {
        let xp = a.data[p][col];
        let xq = a.data[q][col];
        a.data[p][col] = xp * c + xq * w_qp.conj();
        a.data[q][col] = xp * s + xq * w_qq.conj();
    }
    a.data[p][q] = ZERO;
    a.data[q][p] = ZERO;
    a.data[p][p] = C64::new(a.data[p][p].re, 0.0);
    a.data[q][q] = C64::new(a.data[q][q].re, 0.0);
}

fn dominant_index(v: &StateVector) -> usize {
    let max = v.amplitudes().iter().map(|a| a.norm()).fold(0.0, f64::max);
    v.amplitudes()
        .iter()
        .position(|a| a.norm() >= max - 1e-12)
        .unwrap_or(0)
}

fn fix_phase(v: StateVector) -> StateVector {
    let i = dominant_index(&v);
    let a = v.get(i);
    if a.norm() == 0.0 {
        return v;
    }
    v.scale(a.conj() / a.norm())
}

/// `exp(-i δ H)` for Hermitian `H`.
pub fn unitary_step(h: &ComplexMatrix, delta: f64) -> Result<ComplexMatrix> {
    let spec = hermitian_eig(h)?;
    if delta == 0.0 {
        return Ok(ComplexMatrix::identity(h.dim()));
    }
    Ok(spec.map(|l| C64::from_polar(1.0, -delta * l)))
}

/// Pauli matrices and two-qubit operators in the computational basis
/// `{|00⟩, |01⟩, |10⟩, |11⟩}`, qubit 1 being the more significant bit.
pub mod pauli {
    use super::{ComplexMatrix, C64};

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        let i = C64::new(0.0, 1.0);
        ComplexMatrix::from_rows(&[[C64::new(0.0, 0.0), -i], [i, C64::new(0.0, 0.0)]]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]]).unwrap()
    }

    /// `a ⊗ b`.
    pub fn pair(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        a.kron(b).unwrap()
    }

    /// `σ¹ + σ²` for a single-qubit operator `s`.
    pub fn collective(s: &ComplexMatrix) -> ComplexMatrix {
        pair(s, &identity()) + pair(&identity(), s)
    }

    /// `exp(-i θ σ/2)` for a Pauli matrix `σ`.
    pub fn rotation(sigma: &ComplexMatrix, theta: f64) -> ComplexMatrix {
        let (s, c) = (theta / 2.0).sin_cos();
        identity().scale(C64::new(c, 0.0)) - sigma.scale(C64::new(0.0, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn residual(m: &ComplexMatrix, s: &SpectralData) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..m.dim() {
            let v = s.eigenvector(i);
            let hv = apply(m, &v).unwrap();
            for r in 0..m.dim() {
                worst = worst.max((hv.get(r) - v.get(r) * s.eigenvalues[i]).norm());
            }
        }
        worst
    }

    #[test]
    fn diagonal_input() {
        let m = ComplexMatrix::real_diagonal(&[1.0, 2.0]);
        let s = hermitian_eig(&m).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 2.0]);
        assert!(s.eigenvectors.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        assert_eq!(s.gap, 1.0);
        assert_eq!(s.tau, 1.0);
    }

    #[test]
    fn pauli_x_spectrum() {
        let s = hermitian_eig(&pauli::x()).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-14);
        let lo = s.eigenvector(0);
        let hi = s.eigenvector(1);
        // (1, -1)/√2 and (1, 1)/√2 up to the fixed phase convention
        assert!((lo.get(0).norm() - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((lo.get(0) + lo.get(1)).norm() < 1e-14);
        assert!((hi.get(0) - hi.get(1)).norm() < 1e-14);
    }

    #[test]
    fn complex_hermitian_input() {
        let m = ComplexMatrix::from_rows(&[
            [c(2.0, 0.0), c(0.3, -0.7), c(0.0, 0.2), c(-0.1, 0.0)],
            [c(0.3, 0.7), c(-1.0, 0.0), c(0.5, 0.5), c(0.0, -0.4)],
            [c(0.0, -0.2), c(0.5, -0.5), c(0.25, 0.0), c(1.1, 0.0)],
            [c(-0.1, 0.0), c(0.0, 0.4), c(1.1, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let s = hermitian_eig(&m).unwrap();
        assert!(residual(&m, &s) < 1e-12);
        assert!(s.eigenvectors.unitarity_deviation() < 1e-12);
        assert!(s.reconstruct().max_abs_diff(&m) < 1e-12);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let tr: f64 = s.eigenvalues.iter().sum();
        assert!((tr - m.trace().re).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(
            hermitian_eig(&m),
            Err(Error::NonHermitianInput { .. })
        ));
        assert!(matches!(
            unitary_step(&m, 0.1),
            Err(Error::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn rejects_ragged_rows() {
        let rows: Vec<Vec<C64>> = vec![vec![c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]];
        assert!(matches!(
            ComplexMatrix::from_rows(&rows),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ComplexMatrix::from_rows::<[C64; 0]>(&[]),
            Err(Error::UnsupportedDimension(0))
        ));
    }

    #[test]
    fn phase_convention_is_deterministic() {
        let m = ComplexMatrix::from_rows(&[
            [c(0.0, 0.0), c(0.0, 1.0)],
            [c(0.0, -1.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let a = hermitian_eig(&m).unwrap();
        let b = hermitian_eig(&m).unwrap();
        assert_eq!(a, b);
        for i in 0..2 {
            let v = a.eigenvector(i);
            let k = dominant_index(&v);
            assert!(v.get(k).im.abs() < 1e-15 && v.get(k).re > 0.0);
        }
    }

    #[test]
    fn degenerate_cluster_ordering() {
        // eigenvalue 1 doubly degenerate: spanned by |0⟩ and |2⟩
        let m = ComplexMatrix::real_diagonal(&[1.0, -3.0, 1.0]);
        let s = hermitian_eig(&m).unwrap();
        assert_eq!(dominant_index(&s.eigenvector(1)), 0);
        assert_eq!(dominant_index(&s.eigenvector(2)), 2);

        // previous step had the cluster in the opposite order
        let prev = SpectralData {
            eigenvalues: vec![-3.0, 1.0, 1.0],
            eigenvectors: ComplexMatrix::from_columns(&[
                StateVector::basis(3, 1),
                StateVector::basis(3, 2),
                StateVector::basis(3, 0),
            ])
            .unwrap(),
            gap: 4.0,
            tau: 0.25,
        };
        let t = hermitian_eig_tracked(&m, &prev).unwrap();
        assert_eq!(dominant_index(&t.eigenvector(1)), 2);
        assert_eq!(dominant_index(&t.eigenvector(2)), 0);
    }

    #[test]
    fn unitary_step_zero_time_is_identity() {
        let h = pauli::collective(&pauli::x()) + pauli::pair(&pauli::z(), &pauli::z());
        let u = unitary_step(&h, 0.0).unwrap();
        assert_eq!(u, ComplexMatrix::identity(4));
    }

    #[test]
    fn unitary_step_pauli_exponential() {
        let u = unitary_step(&pauli::x(), PI / 2.0).unwrap();
        let expected = pauli::x().scale(c(0.0, -1.0));
        assert!(u.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn rotation_matches_unitary_step() {
        for sigma in [pauli::x(), pauli::y(), pauli::z()] {
            let r = pauli::rotation(&sigma, 0.73);
            let u = unitary_step(&sigma, 0.365).unwrap();
            assert!(r.max_abs_diff(&u) < 1e-14);
        }
    }

    #[test]
    fn apply_and_inner() {
        let psi = StateVector::new(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let id = ComplexMatrix::identity(2);
        assert_eq!(apply(&id, &psi).unwrap(), psi);
        assert!((inner(&psi, &psi).unwrap() - c(1.0, 0.0)).norm() < 1e-15);

        let zero_zero = StateVector::basis(4, 0);
        let bell = StateVector::from_real(&[0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0]).unwrap();
        assert_eq!(inner(&zero_zero, &bell).unwrap(), c(0.0, 0.0));

        assert!(matches!(
            apply(&id, &zero_zero),
            Err(Error::DimensionMismatch { expected: 2, actual: 4 })
        ));
        assert!(matches!(
            inner(&psi, &zero_zero),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kron_dimension_limit() {
        let a = ComplexMatrix::identity(3);
        assert!(matches!(
            a.kron(&pauli::x()),
            Err(Error::UnsupportedDimension(6))
        ));
    }
}
