//! Quantum Cramér-Rao bound saturation and the least noise-susceptible saturating
//! measurement for the two-source imaging model.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fisher::{chi_menos, outcome_stats, OutcomeKind, P_TOL};
use crate::hermitian::{c64, eig_hermitian, psd_sqrt, Hermitian, C64, KERNEL_TOL};
use crate::models::{superres_model, ModelAtPoint};
use crate::povm::{projective_from_states, Povm};

/// Default relative tolerance for `F_C = F_Q` and the saturation residuals.
pub const SAT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationReport {
    pub saturates: bool,
    /// `max_{i,j,k} ‖M_i^{1/2} L_jk M_i^{1/2}‖_max`
    pub max_condition1_residual: f64,
    /// `max ‖M_i^{1/2} Λ |ψ_j⟩‖` over outcomes with `Tr(ρ M_i) ≈ 0`.
    pub max_condition2_residual: f64,
    /// `F_Q − F_C`
    pub cfi_gap: f64,
    pub qfi: f64,
    pub cfi: f64,
}

/// Checks whether `M` attains `F_C = F_Q` through the operator conditions
/// `M_i^{1/2} L_jk M_i^{1/2} = 0`, with `L_jk = |ψ_j⟩⟨ψ_k|Λ − Λ|ψ_j⟩⟨ψ_k|` over support
/// eigenvectors of `ρ`, and `M_i^{1/2} Λ |ψ_j⟩ = 0` for never-observed outcomes.
pub fn check_saturation(model: &ModelAtPoint, m: &Povm, tol: f64) -> Result<SaturationReport> {
    if m.dim() != model.dim() {
        return Err(Error::dim(model.dim(), m.dim()));
    }
    let eig = eig_hermitian(&model.rho)?;
    let support: Vec<DVector<C64>> = (0..eig.dim())
        .filter(|&j| eig.eigenvalues[j] > KERNEL_TOL)
        .map(|j| eig.vector(j))
        .collect();
    let lam = model.sld()?;
    let lam_m = lam.as_matrix();
    let lam_psi: Vec<DVector<C64>> = support.iter().map(|v| lam_m * v).collect();

    let mut res1 = 0.0f64;
    let mut res2 = 0.0f64;
    for e in m.elements() {
        let root = psd_sqrt(e)?;
        let r = root.as_matrix();
        // √M |ψ_j⟩ and ⟨ψ_k|Λ √M, so √M L_jk √M = a_j b_k† − c_j d_k†.
        let r_psi: Vec<DVector<C64>> = support.iter().map(|v| r * v).collect();
        let r_lam_psi: Vec<DVector<C64>> = lam_psi.iter().map(|v| r * v).collect();
        for j in 0..support.len() {
            for k in 0..support.len() {
                let t = &r_psi[j] * r_lam_psi[k].adjoint() - &r_lam_psi[j] * r_psi[k].adjoint();
                res1 = res1.max(t.iter().fold(0.0, |acc, z| acc.max(z.norm())));
            }
        }
        if model.rho.trace_product(e) <= P_TOL {
            for v in &r_lam_psi {
                res2 = res2.max(v.norm());
            }
        }
    }

    let qfi = model.qfi_value()?;
    let cfi = outcome_stats(model, m)?.cfi;
    let cfi_gap = qfi - cfi;
    Ok(SaturationReport {
        saturates: res1 <= tol && res2 <= tol && cfi_gap.abs() <= tol * qfi,
        max_condition1_residual: res1,
        max_condition2_residual: res2,
        cfi_gap,
        qfi,
        cfi,
    })
}

/// Worst deviation of a qubit POVM from equator form: rank excess of each nonzero
/// element and `||⟨0|φ⟩| − 1/√2|`, `||⟨1|φ⟩| − 1/√2|` of its state.
pub fn equator_margin(m: &Povm, zero_tol: f64) -> Result<f64> {
    if m.dim() != 2 {
        return Err(Error::InvalidArgument(format!(
            "equator test needs a qubit POVM (got dimension {})",
            m.dim()
        )));
    }
    let mut worst = 0.0f64;
    for e in m.elements() {
        if e.max_abs() <= zero_tol {
            continue;
        }
        let eig = eig_hermitian(e)?;
        let v = eig.vector(1);
        worst = worst
            .max(eig.eigenvalues[0].abs())
            .max((v[0].norm() - FRAC_1_SQRT_2).abs())
            .max((v[1].norm() - FRAC_1_SQRT_2).abs());
    }
    Ok(worst)
}

/// True iff every nonzero element is proportional to a projector on a state from the
/// Bloch-sphere equator.
pub fn is_equator_povm(m: &Povm, tol: f64) -> Result<bool> {
    Ok(equator_margin(m, tol)? <= tol)
}

/// Splits every element into its rank-one spectral pieces, dropping pieces with
/// weight `<= tol`.
pub fn rank_one_split(m: &Povm, tol: f64) -> Result<Povm> {
    let mut pieces = Vec::new();
    for e in m.elements() {
        let eig = eig_hermitian(e)?;
        for k in 0..eig.dim() {
            if eig.eigenvalues[k] > tol {
                pieces.push(Hermitian::outer(&eig.vector(k)).scaled(eig.eigenvalues[k]));
            }
        }
    }
    Povm::new_unchecked(pieces)
}

fn block_state(phi: f64, offset: usize) -> DVector<C64> {
    let (s, c) = (phi / 2.0).sin_cos();
    let mut v = DVector::from_element(4, C64::default());
    v[offset] = c64(c, 0.0);
    v[offset + 1] = c64(s, 0.0);
    v
}

/// `{P^s_{φs}, P^s_{φs+π}, P^a_{φa}, P^a_{φa+π}}`, projectors on
/// `cos(φ/2)|0⟩_x + sin(φ/2)|1⟩_x` in the basis order of [`superres_model`].
pub fn superres_family_povm(phi_s: f64, phi_a: f64) -> Povm {
    projective_from_states(&[
        block_state(phi_s, 0),
        block_state(phi_s + PI, 0),
        block_state(phi_a, 2),
        block_state(phi_a + PI, 2),
    ])
    .expect("orthonormal by construction")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiQResult {
    pub theta: f64,
    pub sigma: f64,
    pub phi_s: f64,
    pub phi_a: f64,
    pub chi_q: f64,
    pub cfi: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    phi_s: f64,
    phi_a: f64,
    chi: f64,
    cfi: f64,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        (self.chi, self.phi_s, self.phi_a) < (other.chi, other.phi_s, other.phi_a)
    }
}

fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `χ` of the family member, or `None` if an outcome is never observed or the CFI
/// misses the QFI by more than `sat_tol` (relative).
fn evaluate(model: &ModelAtPoint, qfi: f64, phi_s: f64, phi_a: f64, sat_tol: f64) -> Option<Candidate> {
    let stats = outcome_stats(model, &superres_family_povm(phi_s, phi_a)).ok()?;
    if stats.outcomes.iter().any(|o| o.kind != OutcomeKind::Informative) {
        return None;
    }
    if (qfi - stats.cfi).abs() > sat_tol * qfi {
        return None;
    }
    let chi = chi_menos(model, &stats).ok()?.chi;
    chi.is_finite().then_some(Candidate { phi_s, phi_a, chi, cfi: stats.cfi })
}

pub fn minimize_chi_q_superres(theta: f64, sigma: f64, grid_n: usize, refine_iters: usize) -> Result<ChiQResult> {
    minimize_chi_q_superres_with_tol(theta, sigma, grid_n, refine_iters, SAT_TOL)
}

/// Grid search for `min χ` over the saturating family, followed by `refine_iters`
/// rounds on a window shrunk by 4 around the incumbent. Ties go to the smaller
/// `(φs, φa)`.
pub fn minimize_chi_q_superres_with_tol(
    theta: f64,
    sigma: f64,
    grid_n: usize,
    refine_iters: usize,
    sat_tol: f64,
) -> Result<ChiQResult> {
    if grid_n < 16 {
        return Err(Error::InvalidArgument(format!("grid_n = {grid_n}, need >= 16")));
    }
    if !(sat_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {sat_tol} must be > 0")));
    }
    let model = superres_model(theta, sigma)?;
    let qfi = model.qfi_known.expect("analytic QFI");

    let scan = |axis_s: &[f64], axis_a: &[f64]| -> Vec<Option<Candidate>> {
        let points: Vec<(f64, f64)> = axis_s
            .iter()
            .flat_map(|&s| axis_a.iter().map(move |&a| (s, a)))
            .collect();
        points
            .par_iter()
            .map(|&(s, a)| evaluate(&model, qfi, s, a, sat_tol))
            .collect()
    };
    let reduce = |best: Option<Candidate>, found: Vec<Option<Candidate>>| {
        found.into_iter().flatten().fold(best, |acc, c| match acc {
            Some(b) if !c.better_than(&b) => Some(b),
            _ => Some(c),
        })
    };

    let axis: Vec<f64> = (0..grid_n).map(|i| TAU * i as f64 / grid_n as f64).collect();
    let mut evaluations = grid_n * grid_n;
    let mut best = reduce(None, scan(&axis, &axis));

    let mut width = TAU;
    for _ in 0..refine_iters {
        let Some(inc) = best else { break };
        width /= 4.0;
        let window = |c: f64| -> Vec<f64> {
            (0..grid_n)
                .map(|i| wrap_angle(c + width * (i as f64 / (grid_n - 1) as f64 - 0.5)))
                .collect()
        };
        evaluations += grid_n * grid_n;
        best = reduce(best, scan(&window(inc.phi_s), &window(inc.phi_a)));
    }

    let b = best.ok_or(Error::NoFeasiblePoint)?;
    Ok(ChiQResult {
        theta,
        sigma,
        phi_s: b.phi_s,
        phi_a: b.phi_a,
        chi_q: b.chi,
        cfi: b.cfi,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::canonical_pure_model;
    use crate::povm::{equator_projective, random_equator_povm};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn canonical_model_saturation() {
        let model = canonical_pure_model(1.0);
        let r = check_saturation(&model, &equator_projective(FRAC_PI_2), SAT_TOL).unwrap();
        assert!(r.saturates, "{r:?}");
        assert!(r.max_condition1_residual < 1e-12);
        let r = check_saturation(&model, &Povm::computational_basis(2), SAT_TOL).unwrap();
        assert!(!r.saturates);
        assert!((r.cfi_gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn superres_family_saturates_at_generic_angles() {
        let model = superres_model(2.0, 1.0).unwrap();
        let m = superres_family_povm(FRAC_PI_2, FRAC_PI_2);
        assert!(m.validate().passed());
        let r = check_saturation(&model, &m, SAT_TOL).unwrap();
        assert!(r.saturates, "{r:?}");
    }

    #[test]
    fn superres_family_basis_and_periodicity() {
        let m = superres_family_povm(0.0, 0.0);
        for i in 0..4 {
            let mut d = [0.0; 4];
            d[i] = 1.0;
            assert!(m.element(i).max_abs_diff(&Hermitian::from_real_diagonal(&d)) < 1e-15);
        }
        let a = superres_family_povm(0.7, 2.1);
        let b = superres_family_povm(0.7 + TAU, 2.1 + TAU);
        for (x, y) in a.elements().iter().zip(b.elements()) {
            assert!(x.max_abs_diff(y) < 1e-14);
        }
    }

    #[test]
    fn equator_detection() {
        assert!(is_equator_povm(&equator_projective(FRAC_PI_2), 1e-9).unwrap());
        assert!(!is_equator_povm(&Povm::computational_basis(2), 1e-9).unwrap());
        for seed in 0..10 {
            assert!(is_equator_povm(&random_equator_povm(4, seed).unwrap(), 1e-9).unwrap());
        }
        assert!(matches!(
            is_equator_povm(&Povm::trivial(3), 1e-9),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn rank_one_split_of_identity() {
        let s = rank_one_split(&Povm::trivial(3), 1e-12).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.validate().passed());
    }

    #[test]
    fn minimizer_rejects_coarse_grid() {
        assert!(matches!(
            minimize_chi_q_superres(1.0, 1.0, 8, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(minimize_chi_q_superres(0.0, 1.0, 16, 0).is_err());
    }

    #[test]
    fn minimizer_is_deterministic_and_bounded() {
        let a = minimize_chi_q_superres(2.0, 1.0, 24, 2).unwrap();
        let b = minimize_chi_q_superres(2.0, 1.0, 24, 2).unwrap();
        assert_eq!(a, b);
        assert!(a.chi_q >= 4.0 - 1e-6);
        assert!((a.cfi - 0.25).abs() <= SAT_TOL * 0.25);
        assert_eq!(a.evaluations, 3 * 24 * 24);
        assert!((0.0..TAU).contains(&a.phi_s) && (0.0..TAU).contains(&a.phi_a));
    }
}
