//! Classical and quantum Fisher information, measurement-noise susceptibility and
//! quantum Cramér-Rao bound saturation for finite-dimensional single-parameter models.

pub mod error;
pub mod experiments;
pub mod fisher;
pub mod hermitian;
pub mod json;
pub mod models;
pub mod povm;
pub mod random;
pub mod saturation;

pub use error::{Error, Result};
pub use fisher::{
    chi_bruteforce, chi_menos, chi_pair, crb, g_functional, outcome_stats, stats_from_analytic,
    MenosReport, OutcomeKind, OutcomeRecord, OutcomeStats,
};
pub use hermitian::{eig_hermitian, psd_sqrt, qfi, sld, trace_norm, EigenDecomposition, Hermitian, C64};
pub use models::{AnalyticOutcomeModel, ModelAtPoint};
pub use povm::{Povm, StochasticMap};
pub use saturation::{check_saturation, minimize_chi_q_superres, ChiQResult, SaturationReport};
