//! POVM representation, validation and constructors.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hermitian::{c64, eig_hermitian, pd_inverse_sqrt, Hermitian, C64, PSD_TOL};
use crate::random;

/// Maximum `|Σ M_i − 𝟙|` entry for a valid POVM.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Orthonormality tolerance for [`projective_from_states`].
pub const BASIS_TOL: f64 = 1e-10;
/// Row-sum tolerance for [`StochasticMap`].
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Ordered list of positive operators summing to the identity.
///
/// Zero operators are legal elements. [`Povm::new`] validates; [`Povm::new_unchecked`]
/// only checks shapes so that invalid candidates can still be inspected with
/// [`Povm::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<Hermitian>,
}

/// Outcome of [`Povm::validate`]. Nothing is clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub min_eigenvalues: Vec<f64>,
    /// `max |Σ_i M_i − 𝟙|` entry.
    pub completeness_residual: f64,
    pub positive: bool,
    pub complete: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.positive && self.complete
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

impl Povm {
    pub fn new(elements: Vec<Hermitian>) -> Result<Self> {
        let povm = Self::new_unchecked(elements)?;
        let report = povm.validate();
        if !report.passed() {
            return Err(Error::InvalidPovm(format!(
                "min eigenvalue {:e}, completeness residual {:e}",
                report.min_eigenvalue(),
                report.completeness_residual
            )));
        }
        Ok(povm)
    }

    pub fn new_unchecked(elements: Vec<Hermitian>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidInput("POVM needs at least one element".into()))?;
        let dim = first.dim();
        if let Some(bad) = elements.iter().find(|e| e.dim() != dim) {
            return Err(Error::dim(dim, bad.dim()));
        }
        Ok(Povm { dim, elements })
    }

    /// The single-outcome measurement `{𝟙}`.
    pub fn trivial(dim: usize) -> Self {
        Povm {
            dim,
            elements: vec![Hermitian::identity(dim)],
        }
    }

    pub fn computational_basis(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|i| {
                let mut d = vec![0.0; dim];
                d[i] = 1.0;
                Hermitian::from_real_diagonal(&d)
            })
            .collect();
        Povm { dim, elements }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of outcomes `K`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Hermitian] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Hermitian {
        &self.elements[i]
    }

    pub fn into_elements(self) -> Vec<Hermitian> {
        self.elements
    }

    pub fn sum(&self) -> Hermitian {
        self.elements
            .iter()
            .fold(Hermitian::zeros(self.dim), |acc, e| &acc + e)
    }

    pub fn validate(&self) -> ValidationReport {
        let min_eigenvalues: Vec<f64> = self
            .elements
            .iter()
            .map(|e| {
                eig_hermitian(e)
                    .map(|d| d.min_eigenvalue())
                    .unwrap_or(f64::NAN)
            })
            .collect();
        let completeness_residual = self.sum().max_abs_diff(&Hermitian::identity(self.dim));
        let positive = min_eigenvalues.iter().all(|&l| l >= -PSD_TOL);
        ValidationReport {
            min_eigenvalues,
            completeness_residual,
            positive,
            complete: completeness_residual <= COMPLETENESS_TOL,
        }
    }

    /// Appends zero operators until the POVM has `k` outcomes.
    pub fn pad_with_zero_elements(&self, k: usize) -> Result<Povm> {
        if k < self.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot pad {} outcomes down to {k}",
                self.len()
            )));
        }
        let mut elements = self.elements.clone();
        elements.resize(k, Hermitian::zeros(self.dim));
        Ok(Povm {
            dim: self.dim,
            elements,
        })
    }
}

/// Rank-one projective measurement onto an orthonormal basis, in the given order.
pub fn projective_from_states(states: &[DVector<C64>]) -> Result<Povm> {
    let dim = states
        .first()
        .map(|s| s.len())
        .ok_or_else(|| Error::InvalidBasis("no states given".into()))?;
    if states.len() != dim || states.iter().any(|s| s.len() != dim) {
        return Err(Error::InvalidBasis(format!(
            "expected {dim} states of dimension {dim}"
        )));
    }
    for (j, a) in states.iter().enumerate() {
        for (k, b) in states.iter().enumerate() {
            let target = if j == k { 1.0 } else { 0.0 };
            let ip = a.dotc(b);
            if (ip - c64(target, 0.0)).norm() > BASIS_TOL {
                return Err(Error::InvalidBasis(format!(
                    "⟨{j}|{k}⟩ = {ip}, expected {target}"
                )));
            }
        }
    }
    Ok(Povm {
        dim,
        elements: states.iter().map(Hermitian::outer).collect(),
    })
}

/// `(|0⟩ + e^{iφ}|1⟩)/√2`
pub fn equator_state(phi: f64) -> DVector<C64> {
    DVector::from_vec(vec![
        c64(FRAC_1_SQRT_2, 0.0),
        C64::from_polar(FRAC_1_SQRT_2, phi),
    ])
}

/// Projective qubit measurement `{P_φ, P_{φ+π}}` onto antipodal equator states.
pub fn equator_projective(phi: f64) -> Povm {
    Povm {
        dim: 2,
        elements: vec![
            Hermitian::outer(&equator_state(phi)),
            Hermitian::outer(&equator_state(phi + PI)),
        ],
    }
}

/// `(1−ε)M + εN`, outcome by outcome. Both POVMs must have the same outcome count;
/// use [`Povm::pad_with_zero_elements`] to align labels explicitly.
pub fn mix(m: &Povm, n: &Povm, eps: f64) -> Result<Povm> {
    if m.dim != n.dim {
        return Err(Error::dim(m.dim, n.dim));
    }
    if m.len() != n.len() {
        return Err(Error::dim(m.len(), n.len()));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("mixing weight {eps} outside [0, 1]")));
    }
    let elements = m
        .elements
        .iter()
        .zip(&n.elements)
        .map(|(a, b)| &a.scaled(1.0 - eps) + &b.scaled(eps))
        .collect();
    Ok(Povm {
        dim: m.dim,
        elements,
    })
}

/// Classical post-processing `t(j|i)`: `L` outputs by `K` inputs, columns sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMap {
    /// `rows[j][i] = t(j|i)`
    rows: Vec<Vec<f64>>,
}

impl StochasticMap {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidArgument("stochastic map needs at least one output".into()))?;
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidArgument("stochastic map rows must have equal nonzero length".into()));
        }
        if rows.iter().flatten().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument("transition probabilities must be finite and nonnegative".into()));
        }
        for i in 0..k {
            let s: f64 = rows.iter().map(|r| r[i]).sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidArgument(format!(
                    "column {i} sums to {s}, expected 1"
                )));
            }
        }
        Ok(StochasticMap { rows })
    }

    pub fn identity(k: usize) -> Self {
        StochasticMap {
            rows: (0..k)
                .map(|j| (0..k).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    /// Sends every input to the single output.
    pub fn merge_all(k: usize) -> Self {
        StochasticMap {
            rows: vec![vec![1.0; k]],
        }
    }

    /// Output `j` receives input `perm[j]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let k = perm.len();
        let mut rows = vec![vec![0.0; k]; k];
        for (j, &i) in perm.iter().enumerate() {
            if i >= k {
                return Err(Error::InvalidArgument(format!("index {i} out of range")));
            }
            rows[j][i] = 1.0;
        }
        Self::new(rows)
    }

    /// Columns drawn uniformly from the `L`-simplex.
    pub fn random(outputs: usize, inputs: usize, seed: u64) -> Self {
        let mut rng = random::rng(seed);
        let cols: Vec<Vec<f64>> = (0..inputs)
            .map(|_| random::random_probability_vector(outputs, &mut rng))
            .collect();
        StochasticMap {
            rows: (0..outputs)
                .map(|j| cols.iter().map(|c| c[j]).collect())
                .collect(),
        }
    }

    pub fn outputs(&self) -> usize {
        self.rows.len()
    }

    pub fn inputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.rows[j][i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `q(j) = Σ_i t(j|i) p(i)`
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(p).map(|(t, x)| t * x).sum())
            .collect()
    }
}

/// `M'_j = Σ_i t(j|i) M_i`
pub fn coarse_grain(m: &Povm, t: &StochasticMap) -> Result<Povm> {
    if t.inputs() != m.len() {
        return Err(Error::dim(m.len(), t.inputs()));
    }
    let elements = t
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(&m.elements)
                .fold(Hermitian::zeros(m.dim), |acc, (&w, e)| &acc + &e.scaled(w))
        })
        .collect();
    Ok(Povm {
        dim: m.dim,
        elements,
    })
}

/// Random full-rank POVM: `M_i = S^{-1/2} G_i S^{-1/2}` with `G_i = X_i X_i†` Gaussian
/// and `S = Σ G_i`. Deterministic in `seed`.
pub fn random_povm(dim: usize, k: usize, seed: u64) -> Result<Povm> {
    if dim == 0 || k < 2 {
        return Err(Error::InvalidArgument(format!(
            "random POVM needs dim >= 1 and K >= 2 (got dim {dim}, K {k})"
        )));
    }
    let mut rng = random::rng(seed);
    let gs: Vec<Hermitian> = (0..k)
        .map(|_| {
            let x = random::gaussian_matrix(dim, dim, &mut rng);
            Hermitian::symmetrized(&x * x.adjoint())
        })
        .collect();
    let s = gs.iter().fold(Hermitian::zeros(dim), |acc, g| &acc + g);
    let s_inv_half = pd_inverse_sqrt(&s)?;
    let elements = gs.iter().map(|g| g.sandwich(&s_inv_half)).collect();
    Ok(Povm { dim, elements })
}

/// Random qubit POVM whose elements are weighted projectors onto equator states.
///
/// Built as a convex combination of `K/2` antipodal pairs `{P_φ, P_{φ+π}}`, so
/// `Σ λ_i = 2` and `Σ λ_i e^{iφ_i} = 0` hold by construction.
pub fn random_equator_povm(k: usize, seed: u64) -> Result<Povm> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "equator POVM needs an even K >= 2 (got {k})"
        )));
    }
    let mut rng = random::rng(seed);
    let weights = random::random_probability_vector(k / 2, &mut rng);
    let mut elements = Vec::with_capacity(k);
    for w in weights {
        let phi = rng.random::<f64>() * TAU;
        let pair = equator_projective(phi);
        elements.extend(pair.elements.into_iter().map(|e| e.scaled(w)));
    }
    Ok(Povm { dim: 2, elements })
}
