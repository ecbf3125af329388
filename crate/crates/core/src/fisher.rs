//! Classical Fisher information and measurement-noise susceptibility.
//!
//! For a POVM `M` with outcome probabilities `p_i` and logarithmic derivatives
//! `l_i = ṗ_i / p_i`, mixing in a noise POVM `N` with weight `ε` lowers the CFI at
//! the rate `χ[M,N] = 1 + G[N]/F_C[M]`, where `G[N] = Σ_i Tr(A_i N_i)` and
//! `A_i = l_i² ρ − 2 l_i ρ̇`. The worst case over all `N` has the closed form
//!
//! ```text
//! χ[M] = 1 + (l_min² + l_max² + ‖A_min − A_max‖₁) / (2 F_C[M])
//! ```
//!
//! attained by a two-outcome noise placed on the extreme-`l` labels.

use rand::Rng;

use crate::error::{Error, Result};
use crate::hermitian::{eig_hermitian, trace_norm, Hermitian};
use crate::models::{AnalyticOutcomeModel, ModelAtPoint};
use crate::povm::{random_povm, Povm};
use crate::random;

/// Outcomes with `p <= P_TOL` are treated as never observed.
pub const P_TOL: f64 = 1e-12;
/// An unobserved outcome with `|ṗ| > DP_TOL` makes the CFI diverge.
pub const DP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeKind {
    Informative,
    /// `p ≈ 0`, `ṗ ≈ 0`; carries `l = 0` and never enters the extremes.
    NonInformative,
    /// `p ≈ 0` with `ṗ ≠ 0`.
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeRecord {
    pub p: f64,
    pub dp: f64,
    pub l: f64,
    pub kind: OutcomeKind,
}

impl OutcomeRecord {
    pub fn classify(p: f64, dp: f64) -> Self {
        if p > P_TOL {
            OutcomeRecord { p, dp, l: dp / p, kind: OutcomeKind::Informative }
        } else if dp.abs() <= DP_TOL {
            OutcomeRecord { p, dp, l: 0.0, kind: OutcomeKind::NonInformative }
        } else {
            OutcomeRecord { p, dp, l: dp.signum() * f64::INFINITY, kind: OutcomeKind::Divergent }
        }
    }

    pub fn is_informative(&self) -> bool {
        self.kind == OutcomeKind::Informative
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeStats {
    pub outcomes: Vec<OutcomeRecord>,
    /// `Σ p l²` over informative outcomes, `+∞` if any outcome diverges.
    pub cfi: f64,
}

impl OutcomeStats {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let outcomes: Vec<OutcomeRecord> = pairs
            .into_iter()
            .map(|(p, dp)| OutcomeRecord::classify(p, dp))
            .collect();
        let cfi = if outcomes.iter().any(|o| o.kind == OutcomeKind::Divergent) {
            f64::INFINITY
        } else {
            outcomes
                .iter()
                .filter(|o| o.is_informative())
                .map(|o| o.p * o.l * o.l)
                .sum()
        };
        OutcomeStats { outcomes, cfi }
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn is_divergent(&self) -> bool {
        self.cfi.is_infinite()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.p).collect()
    }

    pub fn log_derivatives(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.l).collect()
    }
}

pub fn outcome_stats(model: &ModelAtPoint, m: &Povm) -> Result<OutcomeStats> {
    if m.dim() != model.dim() {
        return Err(Error::dim(model.dim(), m.dim()));
    }
    Ok(OutcomeStats::from_pairs(m.elements().iter().map(|e| {
        (model.rho.trace_product(e), model.drho.trace_product(e))
    })))
}

pub fn stats_from_analytic(a: &AnalyticOutcomeModel) -> OutcomeStats {
    OutcomeStats::from_pairs(a.probs.iter().copied())
}

/// Cramér-Rao bound `1 / (N F_C)` on the MSE after `n` repetitions.
pub fn crb(cfi: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("number of repetitions must be >= 1".into()));
    }
    if cfi.is_nan() || cfi < 0.0 {
        return Err(Error::InvalidArgument(format!("CFI {cfi} must be >= 0")));
    }
    Ok(if cfi == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (n as f64 * cfi)
    })
}

/// `A(l) = l² ρ − 2 l ρ̇`
pub fn a_operator(model: &ModelAtPoint, l: f64) -> Hermitian {
    &model.rho.scaled(l * l) - &model.drho.scaled(2.0 * l)
}

fn check_noise_shape(model: &ModelAtPoint, stats: &OutcomeStats, n: &Povm) -> Result<()> {
    if n.dim() != model.dim() {
        return Err(Error::dim(model.dim(), n.dim()));
    }
    if n.len() != stats.len() {
        return Err(Error::dim(stats.len(), n.len()));
    }
    Ok(())
}

/// `G[N] = Σ_i Tr(A_i N_i)`
pub fn g_functional(model: &ModelAtPoint, stats: &OutcomeStats, n: &Povm) -> Result<f64> {
    check_noise_shape(model, stats, n)?;
    if stats.is_divergent() {
        return Err(Error::UndefinedSusceptibility("CFI diverges".into()));
    }
    Ok(stats
        .outcomes
        .iter()
        .zip(n.elements())
        .filter(|(o, _)| o.is_informative() && o.l != 0.0)
        .map(|(o, e)| o.l * o.l * model.rho.trace_product(e) - 2.0 * o.l * model.drho.trace_product(e))
        .sum())
}

fn check_susceptibility_defined(stats: &OutcomeStats) -> Result<()> {
    if stats.len() < 2 {
        return Err(Error::UndefinedSusceptibility("single-outcome measurement".into()));
    }
    if !(stats.cfi > 0.0) {
        return Err(Error::UndefinedSusceptibility("CFI vanishes".into()));
    }
    Ok(())
}

/// `χ[M,N] = 1 + G[N]/F_C[M]`
pub fn chi_pair(model: &ModelAtPoint, stats_m: &OutcomeStats, m: &Povm, n: &Povm) -> Result<f64> {
    if m.len() != stats_m.len() {
        return Err(Error::dim(stats_m.len(), m.len()));
    }
    if m.dim() != n.dim() || m.len() != n.len() {
        return Err(Error::dim(m.len(), n.len()));
    }
    check_susceptibility_defined(stats_m)?;
    let g = g_functional(model, stats_m, n)?;
    Ok(1.0 + g / stats_m.cfi)
}

/// Worst-case susceptibility and the noise that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct MenosReport {
    /// `≥ 1`, or `+∞` when some outcome diverges.
    pub chi: f64,
    pub cfi: f64,
    pub min_label: usize,
    pub max_label: usize,
    pub l_min: f64,
    pub l_max: f64,
    pub g_max: f64,
    /// `None` when `chi` is infinite.
    pub a_min: Option<Hermitian>,
    pub a_max: Option<Hermitian>,
    /// `Ñ₁` at `min_label`, `𝟙 − Ñ₁` at `max_label`, zeros elsewhere.
    pub worst_noise: Option<Povm>,
}

/// First informative outcome with the smallest and largest `l`.
fn extreme_labels(stats: &OutcomeStats) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, o) in stats.outcomes.iter().enumerate() {
        if !o.is_informative() {
            continue;
        }
        best = Some(match best {
            None => (i, i),
            Some((lo, hi)) => (
                if o.l < stats.outcomes[lo].l { i } else { lo },
                if o.l > stats.outcomes[hi].l { i } else { hi },
            ),
        });
    }
    best
}

pub fn chi_menos(model: &ModelAtPoint, stats: &OutcomeStats) -> Result<MenosReport> {
    check_susceptibility_defined(stats)?;
    let (lo, hi) = extreme_labels(stats)
        .ok_or_else(|| Error::UndefinedSusceptibility("no informative outcome".into()))?;
    let (l_min, l_max) = (stats.outcomes[lo].l, stats.outcomes[hi].l);
    if stats.is_divergent() {
        return Ok(MenosReport {
            chi: f64::INFINITY,
            cfi: stats.cfi,
            min_label: lo,
            max_label: hi,
            l_min,
            l_max,
            g_max: f64::INFINITY,
            a_min: None,
            a_max: None,
            worst_noise: None,
        });
    }
    if lo == hi {
        return Err(Error::UndefinedSusceptibility("all outcomes share the same l".into()));
    }
    let a_min = a_operator(model, l_min);
    let a_max = a_operator(model, l_max);
    let diff = &a_min - &a_max;
    let g_max = 0.5 * (l_min * l_min + l_max * l_max + trace_norm(&diff)?);

    let eig = eig_hermitian(&diff)?;
    let n1 = eig.map_spectrum(|x| if x >= 0.0 { 1.0 } else { 0.0 });
    let n2 = &Hermitian::identity(model.dim()) - &n1;
    let mut elements = vec![Hermitian::zeros(model.dim()); stats.len()];
    elements[lo] = n1;
    elements[hi] = n2;

    Ok(MenosReport {
        chi: 1.0 + g_max / stats.cfi,
        cfi: stats.cfi,
        min_label: lo,
        max_label: hi,
        l_min,
        l_max,
        g_max,
        a_min: Some(a_min),
        a_max: Some(a_max),
        worst_noise: Some(Povm::new_unchecked(elements)?),
    })
}

/// Largest `χ[M,N]` over random `N` and over two-outcome noises built from spectral
/// projectors of `A_i − A_j` for every pair of informative labels. Evaluated term by
/// term through [`g_functional`], independently of the trace-norm formula.
pub fn chi_bruteforce(
    model: &ModelAtPoint,
    stats: &OutcomeStats,
    m: &Povm,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    check_susceptibility_defined(stats)?;
    if stats.is_divergent() {
        return Ok(f64::INFINITY);
    }
    let dim = model.dim();
    let k = stats.len();
    let mut best = f64::NEG_INFINITY;
    let mut eval = |n: &Povm| -> Result<()> {
        best = best.max(chi_pair(model, stats, m, n)?);
        Ok(())
    };

    let mut rng = random::rng(seed);
    for _ in 0..trials {
        let n = random_povm(dim, k, rng.random::<u64>())?;
        eval(&n)?;
    }

    let informative: Vec<usize> = (0..k).filter(|&i| stats.outcomes[i].is_informative()).collect();
    for &i in &informative {
        for &j in &informative {
            if i == j {
                continue;
            }
            let diff = &a_operator(model, stats.outcomes[i].l) - &a_operator(model, stats.outcomes[j].l);
            let eig = eig_hermitian(&diff)?;
            for subset in spectral_subsets(dim) {
                let n1 = eig.map_spectrum_indexed(|idx| if subset[idx] { 1.0 } else { 0.0 });
                let n2 = &Hermitian::identity(dim) - &n1;
                let mut elements = vec![Hermitian::zeros(dim); k];
                elements[i] = n1;
                elements[j] = n2;
                eval(&Povm::new_unchecked(elements)?)?;
            }
        }
    }
    Ok(best)
}

/// Index sets of eigenvectors to project on: all subsets up to dimension 8, otherwise
/// the spectral prefixes and suffixes.
fn spectral_subsets(dim: usize) -> Vec<Vec<bool>> {
    if dim <= 8 {
        (0..1u32 << dim)
            .map(|mask| (0..dim).map(|b| mask >> b & 1 == 1).collect())
            .collect()
    } else {
        (0..=dim)
            .flat_map(|c| [(0..dim).map(|b| b < c).collect(), (0..dim).map(|b| b >= c).collect()])
            .collect()
    }
}
