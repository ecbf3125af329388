//! Dense complex Hermitian linear algebra at small dimension.
//!
//! Everything downstream (states, derivatives, POVM elements, the `A_i`
//! operators of the susceptibility formula) is carried by [`Hermitian`].
//! Values are symmetrized on construction, so `H == H†` holds bit-exactly
//! for every stored matrix.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Maximum `|H - H†|` entry accepted when constructing a [`Hermitian`].
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Eigenvalues down to `-PSD_TOL` count as zero.
pub const PSD_TOL: f64 = 1e-10;
/// Pairs of state eigenvalues with `p_j + p_k <= KERNEL_TOL` belong to the kernel block.
pub const KERNEL_TOL: f64 = 1e-10;
/// Tolerance on `Tr ρ = 1` and `Tr ρ̇ = 0`.
pub const TRACE_TOL: f64 = 1e-9;
/// Largest kernel-kernel entry of `ρ̇` tolerated by the SLD solver.
pub const SUPPORT_TOL: f64 = 1e-8;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Complex n×n Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian {
    m: DMatrix<C64>,
}

impl Hermitian {
    /// Validates hermiticity within [`HERMITICITY_TOL`] and stores `(H + H†)/2`.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(m, HERMITICITY_TOL)
    }

    pub fn with_tolerance(m: DMatrix<C64>, tol: f64) -> Result<Self> {
        let n = m.nrows();
        if n == 0 {
            return Err(Error::InvalidInput("matrix must have dimension >= 1".into()));
        }
        if m.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "matrix is not square: {}x{}",
                n,
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if dev > tol {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self::symmetrized(m))
    }

    /// Skips the tolerance check; the caller guarantees hermiticity up to rounding.
    pub(crate) fn symmetrized(m: DMatrix<C64>) -> Self {
        let n = m.nrows();
        let mut out = m;
        for i in 0..n {
            out[(i, i)] = c64(out[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
                out[(i, j)] = avg;
                out[(j, i)] = avg.conj();
            }
        }
        Hermitian { m: out }
    }

    /// Builds from a row-major list of rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("rows must form a square matrix".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| c64(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::symmetrized(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c64(diag[i], 0.0)
            } else {
                C64::default()
            }
        }))
    }

    pub fn identity(n: usize) -> Self {
        Hermitian {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Hermitian {
            m: DMatrix::zeros(n, n),
        }
    }

    /// `|v⟩⟨v|` without normalizing `v`.
    pub fn outer(v: &DVector<C64>) -> Self {
        Self::symmetrized(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// `Tr(self · other)`, real for Hermitian arguments.
    pub fn trace_product(&self, other: &Hermitian) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.m[(i, j)];
                let b = other.m[(j, i)];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    /// `⟨v|H|v⟩`
    pub fn expectation(&self, v: &DVector<C64>) -> f64 {
        v.dotc(&(&self.m * v)).re
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Hermitian) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    /// `U† H U` for a square `U`.
    pub fn conjugate_by(&self, u: &DMatrix<C64>) -> Hermitian {
        Self::symmetrized(u.adjoint() * &self.m * u)
    }

    /// `S H S` for Hermitian `S`.
    pub fn sandwich(&self, s: &Hermitian) -> Hermitian {
        Self::symmetrized(&s.m * &self.m * &s.m)
    }

    pub fn scaled(&self, f: f64) -> Hermitian {
        Hermitian { m: &self.m * c64(f, 0.0) }
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Add for &Hermitian {
    type Output = Hermitian;
    fn add(self, rhs: &Hermitian) -> Hermitian {
        Hermitian { m: &self.m + &rhs.m }
    }
}

impl Sub for &Hermitian {
    type Output = Hermitian;
    fn sub(self, rhs: &Hermitian) -> Hermitian {
        Hermitian { m: &self.m - &rhs.m }
    }
}

impl Mul<f64> for &Hermitian {
    type Output = Hermitian;
    fn mul(self, rhs: f64) -> Hermitian {
        self.scaled(rhs)
    }
}

impl Neg for &Hermitian {
    type Output = Hermitian;
    fn neg(self) -> Hermitian {
        self.scaled(-1.0)
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: DMatrix<C64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> DVector<C64> {
        self.eigenvectors.column(k).into_owned()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// `Σ_k f(λ_k) v_k v_k†`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Hermitian {
        let v = &self.eigenvectors;
        let n = self.dim();
        let mut scaled = v.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = c64(f(lam), 0.0);
            for i in 0..n {
                scaled[(i, k)] *= w;
            }
        }
        Hermitian::symmetrized(scaled * v.adjoint())
    }

    /// `Σ_k f(k) v_k v_k†`
    pub fn map_spectrum_indexed(&self, f: impl Fn(usize) -> f64) -> Hermitian {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for k in 0..self.dim() {
            let w = c64(f(k), 0.0);
            scaled.column_mut(k).scale_mut(w.re);
        }
        Hermitian::symmetrized(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> Hermitian {
        self.map_spectrum(|x| x)
    }
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eig_hermitian(h: &Hermitian) -> Result<EigenDecomposition> {
    if !h.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = h.dim();
    let eig = h.m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `‖H‖₁ = Σ_k |λ_k|`
pub fn trace_norm(h: &Hermitian) -> Result<f64> {
    let eig = eig_hermitian(h)?;
    Ok(eig.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Principal square root of a PSD matrix. Eigenvalues in `[-PSD_TOL, 0)` and those at
/// rounding level relative to the largest one are set to zero before the root.
pub fn psd_sqrt(p: &Hermitian) -> Result<Hermitian> {
    let eig = eig_hermitian(p)?;
    let min = eig.min_eigenvalue();
    if min < -PSD_TOL {
        return Err(Error::NotPositiveSemidefinite(min));
    }
    let cutoff = 64.0 * f64::EPSILON * eig.max_eigenvalue().abs().max(min.abs());
    Ok(eig.map_spectrum(|x| if x <= cutoff { 0.0 } else { x.sqrt() }))
}

/// `P^{-1/2}` for a strictly positive definite `P`.
pub(crate) fn pd_inverse_sqrt(p: &Hermitian) -> Result<Hermitian> {
    let eig = eig_hermitian(p)?;
    let min = eig.min_eigenvalue();
    if min <= 0.0 {
        return Err(Error::NotPositiveSemidefinite(min));
    }
    Ok(eig.map_spectrum(|x| 1.0 / x.sqrt()))
}

pub(crate) fn check_state_pair(rho: &Hermitian, drho: &Hermitian) -> Result<EigenDecomposition> {
    if rho.dim() != drho.dim() {
        return Err(Error::dim(rho.dim(), drho.dim()));
    }
    let tr = rho.trace();
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidInput(format!("Tr ρ = {tr}, expected 1")));
    }
    let dtr = drho.trace();
    if dtr.abs() > TRACE_TOL {
        return Err(Error::InvalidInput(format!("Tr ρ̇ = {dtr}, expected 0")));
    }
    let eig = eig_hermitian(rho)?;
    if eig.min_eigenvalue() < -PSD_TOL {
        return Err(Error::NotPositiveSemidefinite(eig.min_eigenvalue()));
    }
    Ok(eig)
}

/// Symmetric logarithmic derivative `Λ`, solving `ρ̇ = (ρΛ + Λρ)/2` on the support of `ρ`.
///
/// In the eigenbasis of `ρ`, `Λ_jk = 2ρ̇_jk / (p_j + p_k)` whenever `p_j + p_k > KERNEL_TOL`;
/// the kernel-kernel block of `Λ` is set to zero. A derivative with weight above
/// [`SUPPORT_TOL`] on that block is rejected with [`Error::SupportViolation`].
pub fn sld(rho: &Hermitian, drho: &Hermitian) -> Result<Hermitian> {
    let eig = check_state_pair(rho, drho)?;
    let v = &eig.eigenvectors;
    let p = &eig.eigenvalues;
    let d = v.adjoint() * drho.as_matrix() * v;
    let n = rho.dim();
    let mut lam = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let s = p[j] + p[k];
            if s > KERNEL_TOL {
                lam[(j, k)] = d[(j, k)] * (2.0 / s);
            } else if d[(j, k)].norm() > SUPPORT_TOL {
                return Err(Error::SupportViolation(d[(j, k)].norm()));
            }
        }
    }
    Ok(Hermitian::symmetrized(v * lam * v.adjoint()))
}

/// Quantum Fisher information `Tr(ρΛ²)`.
pub fn qfi(rho: &Hermitian, drho: &Hermitian) -> Result<f64> {
    let lam = sld(rho, drho)?;
    let lam2 = Hermitian::symmetrized(lam.as_matrix() * lam.as_matrix());
    Ok(rho.trace_product(&lam2).max(0.0))
}
