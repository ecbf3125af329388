//! Acceptance criteria, one line per criterion.
//!
//! Runs with its own harness so the summary is printed by a plain `cargo test`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};
use std::process::ExitCode;
use std::time::Instant;

use menos_core::experiments::{interferometer_chi, interferometer_row, superres_hg_row};
use menos_core::fisher::{chi_bruteforce, chi_menos, chi_pair, g_functional, outcome_stats, OutcomeStats};
use menos_core::hermitian::{c64, Hermitian};
use menos_core::models::{canonical_pure_model, hg_mode_stats, random_model, superres_model, ModelAtPoint};
use menos_core::povm::{
    coarse_grain, equator_projective, mix, random_equator_povm, random_povm, Povm, StochasticMap,
};
use menos_core::random::{random_hermitian, rng};
use menos_core::saturation::{minimize_chi_q_superres, superres_family_povm};
use menos_core::{stats_from_analytic, Result};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

fn closed_form_chi(phi: f64) -> f64 {
    let h = phi / 2.0;
    1.0 + 1.0 / (h.cos() * h.cos()) + 1.0 / (h.tan() * h.tan())
}

fn c1_interferometer_closed_form() -> Result<Verdict> {
    let mut worst = 0.0f64;
    let mut best = (f64::INFINITY, 0.0);
    for i in 1..=181 {
        let phi = PI * i as f64 / 182.0;
        let chi = interferometer_chi(0.0, phi)?.chi;
        worst = worst.max((chi - closed_form_chi(phi)).abs());
        if chi < best.0 {
            best = (chi, phi);
        }
    }
    let at_half_pi = (best.1 - FRAC_PI_2).abs() < 1e-12 && (best.0 - 4.0).abs() <= 1e-9;
    verdict(
        worst <= 1e-9 && at_half_pi,
        format!("max |Δχ| = {worst:.1e} over 181 interior points; min χ = {:.12} at φ = {:.6}", best.0, best.1),
    )
}

fn c2_cfi_working_point() -> Result<Verdict> {
    let grid: Vec<f64> = (0..=180).map(|i| PI * i as f64 / 180.0).collect();
    let mut worst_v1 = 0.0f64;
    for &phi in &grid[1..180] {
        worst_v1 = worst_v1.max((interferometer_row(phi, 0.98)?.cfi_v1 - 1.0).abs());
    }
    let rows: Vec<_> = grid.iter().map(|&phi| interferometer_row(phi, 0.98)).collect::<Result<_>>()?;
    let (arg, peak) = rows
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, r)| if r.cfi_v > acc.1 { (i, r.cfi_v) } else { acc });
    let ends = rows[0].cfi_v.max(rows[180].cfi_v);
    let ends_v1 = (rows[0].cfi_v1, rows[180].cfi_v1);
    let pass = worst_v1 <= 1e-12 && arg == 90 && (peak - 0.9604).abs() <= 1e-12 && ends <= 1e-12;
    verdict(
        pass,
        format!(
            "v=1: max |cfi−1| = {worst_v1:.1e} on open grid (endpoints {:.0e}, {:.0e} by the p=0 convention); \
             v=0.98: peak {peak:.13} at φ = {:.6}, endpoints ≤ {ends:.1e}",
            ends_v1.0,
            ends_v1.1,
            grid[arg]
        ),
    )
}

fn c3_superres_qfi() -> Result<Verdict> {
    let mut worst = 0.0f64;
    for &sigma in &[1.0, 0.5] {
        for &ratio in &[0.1, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let q = superres_model(ratio * sigma, sigma)?.qfi()?;
            let exact = 1.0 / (4.0 * sigma * sigma);
            worst = worst.max((q - exact).abs() / exact);
        }
    }
    verdict(worst <= 1e-8, format!("max relative |F_Q − 1/4σ²| = {worst:.1e} over 6 ratios × 2 widths"))
}

fn c4_hg_small_separation() -> Result<Verdict> {
    let s = stats_from_analytic(&hg_mode_stats(1e-3, 1.0, 2)?);
    let rel = (s.cfi - 0.25).abs() / 0.25;
    verdict(rel <= 1e-4, format!("K=2, θ/σ=1e-3: cfi = {:.10}, relative gap {rel:.1e}", s.cfi))
}

fn c5_chi_divergence() -> Result<Verdict> {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 2..=4 {
        let c002 = superres_hg_row(0.02, 1.0, k)?.chi;
        let c01 = superres_hg_row(0.1, 1.0, k)?.chi;
        let c1 = superres_hg_row(1.0, 1.0, k)?.chi;
        pass &= c01.is_finite() && c01 > c1 && c002 > 10.0 * c1;
        parts.push(format!("K={k}: χ(0.02)={c002:.3e} χ(0.1)={c01:.3e} χ(1)={c1:.3}"));
    }
    verdict(pass, parts.join("; "))
}

fn c6_chi_q_curve() -> Result<Verdict> {
    let (grid_n, refine) = (64, 4);
    let at = |t: f64| minimize_chi_q_superres(t, 1.0, grid_n, refine);
    let r_opt = at(2.0 * SQRT_2)?;
    let r8 = at(8.0)?;
    let r1 = at(1.0)?;
    let r01 = at(0.1)?;
    let mut pass = (r_opt.chi_q - 4.0).abs() <= 1e-2
        && (4.0..=4.2).contains(&r8.chi_q)
        && r01.chi_q > r1.chi_q
        && r1.chi_q > r_opt.chi_q;
    let mut worst_oracle = 0.0f64;
    for r in [&r_opt, &r8, &r1] {
        let model = superres_model(r.theta, r.sigma)?;
        let m = superres_family_povm(r.phi_s, r.phi_a);
        let stats = outcome_stats(&model, &m)?;
        let b = chi_bruteforce(&model, &stats, &m, 100, 17)?;
        pass &= b <= r.chi_q + 1e-9;
        worst_oracle = worst_oracle.max((b - r.chi_q).abs());
    }
    pass &= worst_oracle <= 1e-4;
    verdict(
        pass,
        format!(
            "χ_Q(2√2)={:.6} χ_Q(8)={:.6} χ_Q(1)={:.4} χ_Q(0.1)={:.2}; oracle gap {worst_oracle:.1e}",
            r_opt.chi_q, r8.chi_q, r1.chi_q, r01.chi_q
        ),
    )
}

fn random_instance(i: u64) -> Result<(ModelAtPoint, Povm)> {
    let dim = 2 + (i % 2) as usize;
    let rank = 1 + (i as usize / 2) % dim;
    let k = 2 + (i as usize % 3);
    Ok((random_model(dim, rank, 1000 + i)?, random_povm(dim, k, 2000 + i)?))
}

fn c7_closed_form_vs_oracle() -> Result<Verdict> {
    let (mut below, mut above) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let (model, m) = random_instance(i)?;
        let stats = outcome_stats(&model, &m)?;
        let closed = chi_menos(&model, &stats)?.chi;
        let b = chi_bruteforce(&model, &stats, &m, 50, 3000 + i)?;
        below = below.max(closed - b);
        above = above.max(b - closed);
    }
    verdict(
        below <= 1e-6 && above <= 1e-9,
        format!("100 instances: closed − oracle ≤ {below:.1e}, oracle − closed ≤ {above:.1e}"),
    )
}

/// Equator phase of each nonzero element, `arg(⟨1|φ⟩/⟨0|φ⟩)`.
fn equator_phases(m: &Povm) -> Vec<f64> {
    m.elements()
        .iter()
        .filter(|e| e.max_abs() > 1e-12)
        .map(|e| e.get(1, 0).arg())
        .collect()
}

fn c8_pure_state_bound() -> Result<Verdict> {
    let model = canonical_pure_model(1.0);
    let sy = outcome_stats(&model, &equator_projective(FRAC_PI_2))?;
    let chi_sy = chi_menos(&model, &sy)?.chi;
    let mut min_chi = f64::INFINITY;
    let mut off_axis_min_excess = f64::INFINITY;
    let mut off_axis = 0;
    for seed in 0..1000u64 {
        let k = 2 * (1 + (seed % 3) as usize);
        let m = random_equator_povm(k, seed)?;
        let chi = chi_menos(&model, &outcome_stats(&model, &m)?)?.chi;
        min_chi = min_chi.min(chi);
        let margin = equator_phases(&m)
            .iter()
            .map(|&p| (p - FRAC_PI_2).abs().min((p + FRAC_PI_2).abs()))
            .fold(0.0f64, f64::max);
        if margin > 1e-3 {
            off_axis += 1;
            off_axis_min_excess = off_axis_min_excess.min(chi - 4.0);
        }
    }
    verdict(
        min_chi >= 4.0 - 1e-9 && (chi_sy - 4.0).abs() <= 1e-10 && off_axis_min_excess > 1e-6,
        format!(
            "σ_y: χ = {chi_sy:.14}; 1000 equator POVMs: min χ = {min_chi:.9}; {off_axis} off-axis, min χ−4 = {off_axis_min_excess:.2e}"
        ),
    )
}

fn split_first(m: &Povm) -> Result<Povm> {
    let mut e = m.elements().to_vec();
    let half = e[0].scaled(0.5);
    e[0] = half.clone();
    e.insert(1, half);
    Povm::new(e)
}

fn c9_theorem_suite() -> Result<Verdict> {
    let mut rng = rng(99);

    // Data processing.
    let mut worst_increase = f64::NEG_INFINITY;
    let mut equal_cases = 0;
    let mut worst_equal_chi = 0.0f64;
    for t in 0..1000u64 {
        let (model, m) = random_instance(t)?;
        let (fine, map) = match t % 3 {
            0 => {
                let outs = 1 + rng.random_range(0..m.len() + 2);
                (m.clone(), StochasticMap::random(outs, m.len(), rng.random()))
            }
            1 => {
                let mut perm: Vec<usize> = (0..m.len()).collect();
                perm.rotate_left(1 + t as usize % m.len());
                (m.clone(), StochasticMap::permutation(&perm)?)
            }
            _ => {
                let fine = split_first(&m)?;
                let mut rows = vec![vec![0.0; fine.len()]; m.len()];
                rows[0][0] = 1.0;
                rows[0][1] = 1.0;
                for j in 1..m.len() {
                    rows[j][j + 1] = 1.0;
                }
                (fine, StochasticMap::new(rows)?)
            }
        };
        let coarse = coarse_grain(&fine, &map)?;
        let s_fine = outcome_stats(&model, &fine)?;
        let s_coarse = outcome_stats(&model, &coarse)?;
        worst_increase = worst_increase.max(s_coarse.cfi - s_fine.cfi);
        if (s_coarse.cfi - s_fine.cfi).abs() <= 1e-10 && coarse.len() >= 2 && s_fine.cfi > 0.0 {
            equal_cases += 1;
            let a = chi_menos(&model, &s_fine)?.chi;
            let b = chi_menos(&model, &s_coarse)?.chi;
            worst_equal_chi = worst_equal_chi.max((a - b).abs());
        }
    }

    // Extreme-outcome reduction.
    let mut worst_drop = 0.0f64;
    for t in 0..1000u64 {
        let dim = 2 + (t % 2) as usize;
        let model = random_model(dim, 1 + t as usize % dim, 5000 + t)?;
        let k = 3 + (t % 3) as usize;
        let m = random_povm(dim, k, 6000 + t)?;
        let n = random_povm(dim, k, 7000 + t)?;
        let stats = outcome_stats(&model, &m)?;
        let r = chi_menos(&model, &stats)?;
        let g = g_functional(&model, &stats, &n)?;
        for i in (0..k).filter(|&i| i != r.min_label && i != r.max_label) {
            let moved = |to: usize| -> Result<f64> {
                let mut e = n.elements().to_vec();
                e[to] = &e[to] + &e[i];
                e[i] = Hermitian::zeros(dim);
                g_functional(&model, &stats, &Povm::new_unchecked(e)?)
            };
            let best = moved(r.min_label)?.max(moved(r.max_label)?);
            worst_drop = worst_drop.max((g - best) / g.abs().max(1.0));
        }
    }

    // Block projection on the imaging model.
    let mut worst_block = 0.0f64;
    for t in 0..200u64 {
        let theta = 0.2 + 0.04 * t as f64;
        let model = superres_model(theta, 1.0)?;
        let m = superres_family_povm(rng.random::<f64>() * TAU, rng.random::<f64>() * TAU);
        for e in m.elements() {
            let garbage = random_hermitian(4, &mut rng);
            let mut g = garbage.into_matrix();
            for a in 0..2 {
                for b in 0..2 {
                    g[(a, b)] = c64(0.0, 0.0);
                    g[(a + 2, b + 2)] = c64(0.0, 0.0);
                }
            }
            let noisy = &Hermitian::new(e.as_matrix() + g)?;
            let mut projected = noisy.as_matrix().clone();
            for a in 0..2 {
                for b in 0..2 {
                    projected[(a, b + 2)] = c64(0.0, 0.0);
                    projected[(a + 2, b)] = c64(0.0, 0.0);
                }
            }
            let projected = Hermitian::new(projected)?;
            worst_block = worst_block
                .max((model.rho.trace_product(noisy) - model.rho.trace_product(&projected)).abs())
                .max((model.drho.trace_product(noisy) - model.drho.trace_product(&projected)).abs());
        }
    }

    verdict(
        worst_increase <= 1e-10 && worst_equal_chi <= 1e-8 && worst_drop <= 1e-12 && worst_block <= 1e-12,
        format!(
            "max CFI increase {worst_increase:.1e}; {equal_cases} equality cases, max Δχ {worst_equal_chi:.1e}; \
             max G drop {worst_drop:.1e}; block projection Δ {worst_block:.1e}"
        ),
    )
}

fn difference_quotient(model: &ModelAtPoint, m: &Povm, n: &Povm, s: &OutcomeStats, eps: f64) -> Result<f64> {
    let mixed = outcome_stats(model, &mix(m, n, eps)?)?.cfi;
    Ok((s.cfi - mixed) / (eps * s.cfi))
}

fn c10_finite_epsilon() -> Result<Verdict> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..20u64 {
        let (model, m) = random_instance(i)?;
        let n = random_povm(m.dim(), m.len(), 8000 + i)?;
        let s = outcome_stats(&model, &m)?;
        let chi = chi_pair(&model, &s, &m, &n)?;
        let e3 = (difference_quotient(&model, &m, &n, &s, 1e-3)? - chi).abs();
        let e4 = (difference_quotient(&model, &m, &n, &s, 1e-4)? - chi).abs();
        let ratio = e3 / e4;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    verdict((8.0..=12.0).contains(&lo) && (8.0..=12.0).contains(&hi), format!("error ratios in [{lo:.3}, {hi:.3}]"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Verdict>); 10] = [
        ("interferometer closed form", c1_interferometer_closed_form),
        ("CFI working-point structure", c2_cfi_working_point),
        ("imaging QFI constancy", c3_superres_qfi),
        ("HG small-separation saturation", c4_hg_small_separation),
        ("χ divergence trends", c5_chi_divergence),
        ("χ_Q curve", c6_chi_q_curve),
        ("closed form vs oracle", c7_closed_form_vs_oracle),
        ("pure-state bound", c8_pure_state_bound),
        ("theorem suite", c9_theorem_suite),
        ("finite-ε limit", c10_finite_epsilon),
    ];
    println!("\nacceptance criteria");
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "[{}] {:>2}. {name}: {detail} ({:.2}s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed\n", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
