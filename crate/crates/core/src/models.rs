//! Parametric state families frozen at a working point.
//!
//! Basis order for the two-source imaging model is fixed as
//! `(|0⟩_s, |1⟩_s, |0⟩_a, |1⟩_a)` everywhere in the crate.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::hermitian::{self, c64, Hermitian, C64, TRACE_TOL};
use crate::povm::{projective_from_states, Povm};
use crate::random;

/// Minimum QFI for a pure-state model to be considered non-degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// `p_K` below `-HG_CLAMP_TOL` is reported as an inconsistency; above it is clamped to zero.
pub const HG_CLAMP_TOL: f64 = 1e-12;

/// `(ρ_θ, ρ̇_θ)` at a fixed `θ`, with the analytic QFI when one is known.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelAtPoint {
    pub theta: f64,
    pub rho: Hermitian,
    pub drho: Hermitian,
    pub qfi_known: Option<f64>,
}

impl ModelAtPoint {
    /// Checks `Tr ρ = 1`, `ρ ≥ 0` and `Tr ρ̇ = 0`.
    pub fn new(theta: f64, rho: Hermitian, drho: Hermitian, qfi_known: Option<f64>) -> Result<Self> {
        hermitian::check_state_pair(&rho, &drho)?;
        if let Some(q) = qfi_known {
            if !(q >= 0.0) || !q.is_finite() {
                return Err(Error::InvalidInput(format!("known QFI {q} must be finite and >= 0")));
            }
        }
        Ok(ModelAtPoint {
            theta,
            rho,
            drho,
            qfi_known,
        })
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    /// QFI computed from `(ρ, ρ̇)` through the SLD.
    pub fn qfi(&self) -> Result<f64> {
        hermitian::qfi(&self.rho, &self.drho)
    }

    /// Analytic QFI if known, otherwise the computed one.
    pub fn qfi_value(&self) -> Result<f64> {
        match self.qfi_known {
            Some(q) => Ok(q),
            None => self.qfi(),
        }
    }

    pub fn sld(&self) -> Result<Hermitian> {
        hermitian::sld(&self.rho, &self.drho)
    }
}

fn sigma_y() -> Hermitian {
    Hermitian::symmetrized(DMatrix::from_row_slice(
        2,
        2,
        &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)],
    ))
}

fn plus_projector() -> Hermitian {
    Hermitian::symmetrized(DMatrix::from_element(2, 2, c64(0.5, 0.0)))
}

/// Orthonormal pair `|0⟩, |1⟩` spanning `{|ψ⟩, |ψ̇⟩}` in which a pure model takes the
/// form `ρ = |+⟩⟨+|`, `ρ̇ = ½√F_Q σ_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalFrame {
    pub zero: DVector<C64>,
    pub one: DVector<C64>,
    pub qfi: f64,
}

impl CanonicalFrame {
    pub fn new(psi: &DVector<C64>, dpsi: &DVector<C64>) -> Result<Self> {
        if psi.len() != dpsi.len() {
            return Err(Error::dim(psi.len(), dpsi.len()));
        }
        if psi.iter().chain(dpsi.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("state vectors must be finite".into()));
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("‖ψ‖ = {norm}, expected 1")));
        }
        let overlap = psi.dotc(dpsi);
        if overlap.re.abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "Re⟨ψ|ψ̇⟩ = {} does not preserve normalization",
                overlap.re
            )));
        }
        let qfi = 4.0 * (dpsi.norm_squared() - overlap.norm_sqr());
        if qfi <= DEGENERACY_TOL {
            return Err(Error::DegenerateModel(format!(
                "F_Q = {qfi:e}; ψ̇ is parallel to ψ"
            )));
        }
        let orth = dpsi - psi * overlap;
        let k = c64(0.0, (2.0 / qfi).sqrt());
        let half = psi * c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Ok(CanonicalFrame {
            zero: &half + &orth * k,
            one: &half - &orth * k,
            qfi,
        })
    }

    /// `n×2` isometry with columns `|0⟩, |1⟩`.
    pub fn isometry(&self) -> DMatrix<C64> {
        DMatrix::from_columns(&[self.zero.clone(), self.one.clone()])
    }

    /// Compresses an ambient operator to the 2×2 frame, `B† X B`.
    pub fn to_canonical(&self, op: &Hermitian) -> Result<Hermitian> {
        if op.dim() != self.zero.len() {
            return Err(Error::dim(self.zero.len(), op.dim()));
        }
        let b = self.isometry();
        Ok(Hermitian::symmetrized(b.adjoint() * op.as_matrix() * &b))
    }

    pub fn povm_to_canonical(&self, m: &Povm) -> Result<Povm> {
        let elements = m
            .elements()
            .iter()
            .map(|e| self.to_canonical(e))
            .collect::<Result<Vec<_>>>()?;
        Povm::new_unchecked(elements)
    }
}

/// Ambient-space pure model `ρ = |ψ⟩⟨ψ|`, `ρ̇ = |ψ⟩⟨ψ̇| + |ψ̇⟩⟨ψ|`.
pub fn pure_state_model(theta: f64, psi: &DVector<C64>, dpsi: &DVector<C64>) -> Result<ModelAtPoint> {
    if psi.len() != dpsi.len() {
        return Err(Error::dim(psi.len(), dpsi.len()));
    }
    let rho = Hermitian::outer(psi);
    let cross = psi * dpsi.adjoint();
    let drho = Hermitian::symmetrized(&cross + cross.adjoint());
    ModelAtPoint::new(theta, rho, drho, None)
}

/// Reduces a pure model to the canonical qubit form `ρ = |+⟩⟨+|`, `ρ̇ = ½√F_Q σ_y`.
pub fn pure_canonicalize(psi: &DVector<C64>, dpsi: &DVector<C64>) -> Result<ModelAtPoint> {
    let frame = CanonicalFrame::new(psi, dpsi)?;
    Ok(canonical_pure_model(frame.qfi))
}

/// The canonical qubit model with QFI `qfi`.
pub fn canonical_pure_model(qfi: f64) -> ModelAtPoint {
    ModelAtPoint {
        theta: 0.0,
        rho: plus_projector(),
        drho: sigma_y().scaled(0.5 * qfi.sqrt()),
        qfi_known: Some(qfi),
    }
}

/// Outcome probabilities and their derivatives, given in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticOutcomeModel {
    /// `(p_i, ṗ_i)` per outcome.
    pub probs: Vec<(f64, f64)>,
    pub description: String,
}

impl AnalyticOutcomeModel {
    pub fn new(probs: Vec<(f64, f64)>, description: impl Into<String>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidInput("no outcomes".into()));
        }
        if probs.iter().any(|&(p, dp)| !p.is_finite() || !dp.is_finite() || p < 0.0) {
            return Err(Error::InvalidInput("probabilities must be finite and >= 0".into()));
        }
        let sp: f64 = probs.iter().map(|x| x.0).sum();
        let sdp: f64 = probs.iter().map(|x| x.1).sum();
        if (sp - 1.0).abs() > TRACE_TOL || sdp.abs() > TRACE_TOL {
            return Err(Error::InvalidInput(format!(
                "Σp = {sp}, Σṗ = {sdp}; expected 1 and 0"
            )));
        }
        Ok(AnalyticOutcomeModel {
            probs,
            description: description.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Two-detector statistics `p_± = ½[1 ± v cos(θ+φ)]` of a Mach-Zehnder interferometer
/// with fringe visibility `v`.
pub fn interferometer_stats(theta: f64, phi: f64, v: f64) -> Result<AnalyticOutcomeModel> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidArgument(format!("visibility {v} outside [0, 1]")));
    }
    let x = theta + phi;
    let (sh, ch) = (x / 2.0).sin_cos();
    // 1 ± v cos x = (1 − v) + 2v cos²(x/2) or 2v sin²(x/2), free of cancellation.
    let s = x.sin();
    let probs = vec![
        (0.5 * (1.0 - v) + v * ch * ch, -0.5 * v * s),
        (0.5 * (1.0 - v) + v * sh * sh, 0.5 * v * s),
    ];
    AnalyticOutcomeModel::new(
        probs,
        format!("interferometer theta={theta} phi={phi} v={v}"),
    )
}

fn interferometer_state(theta: f64, phi: f64) -> (DVector<C64>, DVector<C64>) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let e = C64::from_polar(1.0, theta + phi);
    let psi = DVector::from_vec(vec![c64(h, 0.0), e * h]);
    let dpsi = DVector::from_vec(vec![c64(0.0, 0.0), e * c64(0.0, h)]);
    (psi, dpsi)
}

/// Canonical frame of the single-photon interferometer state `(|0⟩ + e^{i(θ+φ)}|1⟩)/√2`.
pub fn interferometer_frame(theta: f64, phi: f64) -> CanonicalFrame {
    let (psi, dpsi) = interferometer_state(theta, phi);
    CanonicalFrame::new(&psi, &dpsi).expect("interferometer state is non-degenerate")
}

/// Interferometer at `(θ, φ)` in its canonical frame; `F_Q = 1`.
pub fn interferometer_model(theta: f64, phi: f64) -> ModelAtPoint {
    let frame = interferometer_frame(theta, phi);
    let mut model = canonical_pure_model(frame.qfi);
    model.theta = theta;
    model
}

/// Beam-splitter detection `{|+⟩⟨+|, |−⟩⟨−|}` expressed in the canonical frame of
/// [`interferometer_model`]; outcome order matches [`interferometer_stats`].
pub fn interferometer_povm(theta: f64, phi: f64) -> Povm {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = DVector::from_vec(vec![c64(h, 0.0), c64(h, 0.0)]);
    let minus = DVector::from_vec(vec![c64(h, 0.0), c64(-h, 0.0)]);
    let lab = projective_from_states(&[plus, minus]).expect("orthonormal");
    interferometer_frame(theta, phi)
        .povm_to_canonical(&lab)
        .expect("2-dimensional frame")
}

/// Constants of the two-point-source imaging model with Gaussian PSF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperresConstants {
    pub sigma: f64,
    pub theta: f64,
    /// `⟨u_+|u_−⟩ = e^{−θ²/8σ²}`
    pub delta: f64,
    /// `∂_θ δ = −θ e^{−θ²/8σ²} / 4σ²`
    pub gamma: f64,
    pub c3: f64,
    pub c4: f64,
    pub alpha: f64,
    pub beta_s: f64,
    pub beta_a: f64,
}

fn check_separation(theta: f64, sigma: f64) -> Result<()> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::InvalidArgument(format!("separation {theta} must be > 0")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("PSF width {sigma} must be > 0")));
    }
    Ok(())
}

/// `(sinh x − x) / (e^x − 1)` without cancellation or overflow.
fn sinh_minus_x_over_expm1(x: f64) -> f64 {
    if x < 0.5 {
        // sinh x − x = x³/3! + x⁵/5! + ...
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut sum = term;
        let mut n = 3.0;
        while term > sum * 1e-18 {
            term *= x2 / ((n + 1.0) * (n + 2.0));
            sum += term;
            n += 2.0;
        }
        sum / x.exp_m1()
    } else {
        let e1 = (-x).exp();
        (0.5 * (1.0 - e1 * e1) - x * e1) / (1.0 - e1)
    }
}

/// `(sinh x + x) / (e^x + 1)`
fn sinh_plus_x_over_exp_plus1(x: f64) -> f64 {
    let e1 = (-x).exp();
    (0.5 * (1.0 - e1 * e1) + x * e1) / (1.0 + e1)
}

pub fn superres_constants(theta: f64, sigma: f64) -> Result<SuperresConstants> {
    check_separation(theta, sigma)?;
    let s2 = sigma * sigma;
    let x = theta * theta / (8.0 * s2);
    let delta = (-x).exp();
    let gamma = -theta * delta / (4.0 * s2);
    // c₃ = ¼ √[(8σ² sinh x − θ²) / (σ⁴ (e^x − 1))], c₄ likewise with + signs.
    let c3 = 0.25 * (8.0 * sinh_minus_x_over_expm1(x) / s2).sqrt();
    let c4 = 0.25 * (8.0 * sinh_plus_x_over_exp_plus1(x) / s2).sqrt();
    Ok(SuperresConstants {
        sigma,
        theta,
        delta,
        gamma,
        c3,
        c4,
        alpha: gamma / 2.0,
        beta_s: -(c4 / 4.0) * (1.0 + delta).sqrt(),
        beta_a: -(c3 / 4.0) * (1.0 - delta).sqrt(),
    })
}

/// 4×4 single-photon state of two incoherent equal-brightness sources separated by `θ`.
pub fn superres_model(theta: f64, sigma: f64) -> Result<ModelAtPoint> {
    let k = superres_constants(theta, sigma)?;
    let rho = Hermitian::from_real_diagonal(&[(1.0 + k.delta) / 2.0, 0.0, (1.0 - k.delta) / 2.0, 0.0]);
    let mut d = DMatrix::<C64>::zeros(4, 4);
    d[(0, 0)] = c64(k.alpha, 0.0);
    d[(0, 1)] = c64(k.beta_s, 0.0);
    d[(1, 0)] = c64(k.beta_s, 0.0);
    d[(2, 2)] = c64(-k.alpha, 0.0);
    d[(2, 3)] = c64(k.beta_a, 0.0);
    d[(3, 2)] = c64(k.beta_a, 0.0);
    let drho = Hermitian::symmetrized(d);
    ModelAtPoint::new(theta, rho, drho, Some(1.0 / (4.0 * sigma * sigma)))
}

/// A shifted copy of the PSF amplitude, `c · ∂^d u(x + a)` with `d ∈ {0, 1}`.
#[derive(Debug, Clone, Copy)]
struct PsfTerm {
    coef: f64,
    shift: f64,
    derivative: bool,
}

/// `⟨∂^{d1} u(·+a) | ∂^{d2} u(·+b)⟩` for the Gaussian amplitude, derivatives taken
/// with respect to the shift.
fn psf_overlap(a: PsfTerm, b: PsfTerm, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let d = a.shift - b.shift;
    let g = (-d * d / (8.0 * s2)).exp();
    let gp = -d / (4.0 * s2) * g;
    let gpp = (d * d / (16.0 * s2 * s2) - 1.0 / (4.0 * s2)) * g;
    let v = match (a.derivative, b.derivative) {
        (false, false) => g,
        (true, false) => gp,
        (false, true) => -gp,
        (true, true) => -gpp,
    };
    a.coef * b.coef * v
}

/// `u_±,θ` and `∂_θ u_±,θ` at `θ0`, in that order.
fn psf_generators(theta0: f64) -> [PsfTerm; 4] {
    [
        PsfTerm { coef: 1.0, shift: theta0 / 2.0, derivative: false },
        PsfTerm { coef: 1.0, shift: -theta0 / 2.0, derivative: false },
        PsfTerm { coef: 0.5, shift: theta0 / 2.0, derivative: true },
        PsfTerm { coef: -0.5, shift: -theta0 / 2.0, derivative: true },
    ]
}

/// Orthonormal `(|0⟩_s, |1⟩_s, |0⟩_a, |1⟩_a)` at `θ0` as rows of coefficients over
/// [`psf_generators`], via Gram-Schmidt on `u_+ ± u_−` and `−√2 ∂_θ(u_+ ± u_−)`.
fn frozen_basis(theta0: f64, sigma: f64) -> Matrix4<f64> {
    let gens = psf_generators(theta0);
    let gram = Matrix4::from_fn(|i, j| psf_overlap(gens[i], gens[j], sigma));
    let raw = [
        Vector4::new(1.0, 1.0, 0.0, 0.0),
        Vector4::new(0.0, 0.0, -SQRT_2, -SQRT_2),
        Vector4::new(1.0, -1.0, 0.0, 0.0),
        Vector4::new(0.0, 0.0, -SQRT_2, SQRT_2),
    ];
    let ip = |a: &Vector4<f64>, b: &Vector4<f64>| (a.transpose() * gram * b)[(0, 0)];
    let mut basis: Vec<Vector4<f64>> = Vec::with_capacity(4);
    for v in raw {
        let mut w = v;
        for b in &basis {
            w -= b * ip(b, &w);
        }
        let n = ip(&w, &w).sqrt();
        basis.push(w / n);
    }
    Matrix4::from_rows(&[
        basis[0].transpose(),
        basis[1].transpose(),
        basis[2].transpose(),
        basis[3].transpose(),
    ])
}

/// The imaging state at separation `theta`, compressed onto the 4-dimensional basis
/// frozen at `theta0`. Built from Gaussian overlap integrals, independently of
/// [`superres_constants`]; at `theta == theta0` it equals [`superres_model`]'s `ρ`.
pub fn superres_frozen_basis_density(theta0: f64, theta: f64, sigma: f64) -> Result<Hermitian> {
    check_separation(theta0, sigma)?;
    if !theta.is_finite() {
        return Err(Error::InvalidArgument("separation must be finite".into()));
    }
    let coeffs = frozen_basis(theta0, sigma);
    let gens = psf_generators(theta0);
    let sources = [
        PsfTerm { coef: 1.0, shift: theta / 2.0, derivative: false },
        PsfTerm { coef: 1.0, shift: -theta / 2.0, derivative: false },
    ];
    let mut rho = Matrix4::<f64>::zeros();
    for src in sources {
        let ov = Vector4::from_fn(|l, _| psf_overlap(gens[l], src, sigma));
        let amp = coeffs * ov;
        rho += amp * amp.transpose() * 0.5;
    }
    Ok(Hermitian::symmetrized(DMatrix::from_fn(4, 4, |i, j| {
        c64(rho[(i, j)], 0.0)
    })))
}

/// Hermite-Gauss mode sorting with the first `K−1` modes `i = 1..K−1` resolved and the
/// remaining signal collected in outcome `K`.
pub fn hg_mode_stats(theta: f64, sigma: f64, k: usize) -> Result<AnalyticOutcomeModel> {
    check_separation(theta, sigma)?;
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need K >= 2 outcomes (got {k})")));
    }
    let q = theta * theta / (16.0 * sigma * sigma);
    let mut probs = Vec::with_capacity(k);
    let mut p = (-q).exp();
    let (mut sum_p, mut sum_dp) = (0.0, 0.0);
    for i in 1..k {
        p *= q / i as f64;
        let l = -theta / (8.0 * sigma * sigma) + 2.0 * i as f64 / theta;
        let dp = p * l;
        sum_p += p;
        sum_dp += dp;
        probs.push((p, dp));
    }
    let mut rest = 1.0 - sum_p;
    if rest < -HG_CLAMP_TOL {
        return Err(Error::NumericalInconsistency(format!(
            "residual probability {rest:e} is negative"
        )));
    }
    if rest < 0.0 {
        rest = 0.0;
    }
    probs.push((rest, -sum_dp));
    AnalyticOutcomeModel::new(probs, format!("HG modes theta={theta} sigma={sigma} K={k}"))
}

/// Central-difference step `1e-5 · max(1, |θ|)`.
pub fn default_fd_step(theta: f64) -> f64 {
    1e-5 * theta.abs().max(1.0)
}

/// Builds `(ρ(θ), (ρ(θ+h) − ρ(θ−h)) / 2h)` from a family without analytic derivative.
pub fn finite_diff_model<F>(rho_at: F, theta: f64, h: Option<f64>) -> Result<ModelAtPoint>
where
    F: Fn(f64) -> Result<Hermitian>,
{
    let h = h.unwrap_or_else(|| default_fd_step(theta));
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step {h} must be > 0")));
    }
    let rho = rho_at(theta)?;
    let up = rho_at(theta + h)?;
    let down = rho_at(theta - h)?;
    if up.dim() != rho.dim() || down.dim() != rho.dim() {
        return Err(Error::dim(rho.dim(), up.dim().max(down.dim())));
    }
    let drho = (&up - &down).scaled(0.5 / h);
    ModelAtPoint::new(theta, rho, Hermitian::symmetrized(drho.into_matrix()), None)
}

/// Random model of the given rank with a derivative supported on `ρ`.
pub fn random_model(dim: usize, rank: usize, seed: u64) -> Result<ModelAtPoint> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= rank <= dim (got rank {rank}, dim {dim})"
        )));
    }
    let mut rng = random::rng(seed);
    let mut p = random::random_probability_vector(rank, &mut rng);
    p.resize(dim, 0.0);
    let u = random::random_unitary(dim, &mut rng);
    let mut d = random::random_hermitian(dim, &mut rng).into_matrix();
    for j in rank..dim {
        for k in rank..dim {
            d[(j, k)] = C64::default();
        }
    }
    let tr: f64 = (0..dim).map(|j| d[(j, j)].re).sum();
    for j in 0..dim {
        d[(j, j)] -= c64(tr * p[j], 0.0);
    }
    let diag = Hermitian::from_real_diagonal(&p);
    let u_adj = u.adjoint();
    let rho = diag.conjugate_by(&u_adj);
    let drho = Hermitian::symmetrized(d).conjugate_by(&u_adj);
    ModelAtPoint::new(0.0, rho, drho, None)
}
