//! Born weights as limiting frequencies.
//!
//! After `N` repetitions and a readout by a student who checks whether the
//! relative frequency of outcome `"1"` lies within `ε` of `p`, the branch
//! in which the student records a violation has squared norm
//!
//! ```text
//! ⟨χ|χ⟩ = Σ_{m ≤ N(p-ε)} + Σ_{m ≥ N(p+ε)}  C(N, m) p^m (1-p)^(N-m)
//! ```
//!
//! which is bounded by `2 exp(-2 N ε²)`. Tail sums are evaluated in log
//! space so they stay meaningful far below the smallest normal `f64`.

use serde::{Deserialize, Serialize};
use serde_json::json;
use statrs::function::factorial::ln_factorial;

use super::par_map;
use super::report::CheckReport;
use crate::band::in_band;
use crate::error::{Error, Result};

pub const DEFAULT_P_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
pub const DEFAULT_EPSILON_GRID: [f64; 3] = [0.02, 0.05, 0.1];
pub const DEFAULT_N_GRID: [u64; 4] = [10, 100, 1_000, 10_000];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BornParams {
    pub p: f64,
    pub epsilon: f64,
    pub n: u64,
}

impl BornParams {
    pub fn new(p: f64, epsilon: f64, n: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("p = {p} outside [0, 1]")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::invalid(format!("epsilon = {epsilon} outside (0, 1)")));
        }
        if n == 0 {
            return Err(Error::invalid("N must be at least 1"));
        }
        Ok(BornParams { p, epsilon, n })
    }
}

/// `ln (C(n, m) p^m (1-p)^(n-m))`.
///
/// Uses the saddle-point expansion of Loader (2000): the large
/// `ln C(n, m)` and `m ln p + (n-m) ln(1-p)` parts are never formed
/// separately, so the result keeps near full relative precision for
/// large `n` where the direct sum cancels down to ~1e-12.
pub fn ln_branch_mass(p: f64, n: u64, m: u64) -> f64 {
    let q = 1.0 - p;
    if p == 0.0 {
        return if m == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if m == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let nf = n as f64;
    if m == 0 {
        return if p < 0.1 { -bd0(nf, nf * q) - nf * p } else { nf * q.ln() };
    }
    if m == n {
        return if q < 0.1 { -bd0(nf, nf * p) - nf * q } else { nf * p.ln() };
    }
    let x = m as f64;
    let lc = stirlerr(n) - stirlerr(m) - stirlerr(n - m) - bd0(x, nf * p) - bd0(nf - x, nf * q);
    let lf = (2.0 * std::f64::consts::PI).ln() + x.ln() + (-x / nf).ln_1p();
    lc - 0.5 * lf
}

/// `ln n! - ((n + 1/2) ln n - n + ln √(2π))`.
fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let x = n as f64;
    if n <= 15 {
        return ln_factorial(n) - (x + 0.5) * x.ln() + x - 0.5 * (2.0 * std::f64::consts::PI).ln();
    }
    let xx = x * x;
    if n > 500 {
        (S0 - S1 / xx) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance term `x ln(x / np) + np - x`, by series when `x ≈ np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// `ln Σ exp(terms)` in the given order.
fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let s: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    max + s.ln()
}

fn split_masses(params: &BornParams) -> (Vec<f64>, Vec<f64>) {
    let mut tail = Vec::new();
    let mut band = Vec::new();
    for m in 0..=params.n {
        let l = ln_branch_mass(params.p, params.n, m);
        if in_band(m, params.n, params.p, params.epsilon) {
            band.push(l);
        } else {
            tail.push(l);
        }
    }
    (tail, band)
}

/// `ln ⟨χ|χ⟩`; `-∞` when both tails are empty or carry no weight.
pub fn chi_norm_ln(params: &BornParams) -> f64 {
    log_sum_exp(&split_masses(params).0)
}

/// Exact two-sided binomial tail `⟨χ|χ⟩`, boundary counts included.
pub fn chi_norm_exact(params: &BornParams) -> f64 {
    chi_norm_ln(params).exp()
}

/// Weight of the branches in which the student records agreement.
pub fn band_mass(params: &BornParams) -> f64 {
    log_sum_exp(&split_masses(params).1).exp()
}

/// `2 exp(-2 N ε²)`.
pub fn hoeffding_bound(params: &BornParams) -> f64 {
    2.0 * (-2.0 * params.n as f64 * params.epsilon * params.epsilon).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub chi_exact: f64,
    pub ln_chi_exact: f64,
    pub bound: f64,
}

pub fn born_convergence_curve(p: f64, epsilon: f64, n_list: &[u64]) -> Result<Vec<ConvergenceRow>> {
    if n_list.is_empty() {
        return Err(Error::invalid("N list is empty"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("N list must be strictly ascending"));
    }
    let params = n_list
        .iter()
        .map(|&n| BornParams::new(p, epsilon, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(par_map(&params, |bp| {
        let ln_chi = chi_norm_ln(bp);
        ConvergenceRow {
            n: bp.n,
            chi_exact: ln_chi.exp(),
            ln_chi_exact: ln_chi,
            bound: hoeffding_bound(bp),
        }
    }))
}

/// First `N` in the curve whose exact tail is below `threshold`.
pub fn first_n_below(rows: &[ConvergenceRow], threshold: f64) -> Option<u64> {
    rows.iter().find(|r| r.chi_exact < threshold).map(|r| r.n)
}

/// Whether the exact column is decreasing over all rows with `N ≥ from_n`.
/// Consecutive values are compared in log space, `ln χ(N') < ln χ(N) + rel_tol`,
/// so only increases beyond relative noise `rel_tol` count as violations.
pub fn decreasing_from(rows: &[ConvergenceRow], from_n: f64, rel_tol: f64) -> bool {
    let tail: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.n as f64 >= from_n).collect();
    tail.windows(2).all(|w| {
        let (a, b) = (w[0].ln_chi_exact, w[1].ln_chi_exact);
        if b == f64::NEG_INFINITY {
            return true;
        }
        b < a + rel_tol
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub p: f64,
    pub epsilon: f64,
    pub n: u64,
    pub chi_exact: f64,
    pub bound: f64,
}

/// `chi_norm_exact` and `hoeffding_bound` on the Cartesian grid, ordered
/// `p`-major, then `ε`, then `N`.
pub fn hoeffding_grid(ps: &[f64], epsilons: &[f64], ns: &[u64]) -> Result<Vec<GridPoint>> {
    let mut params = Vec::with_capacity(ps.len() * epsilons.len() * ns.len());
    for &p in ps {
        for &e in epsilons {
            for &n in ns {
                params.push(BornParams::new(p, e, n)?);
            }
        }
    }
    Ok(par_map(&params, |bp| GridPoint {
        p: bp.p,
        epsilon: bp.epsilon,
        n: bp.n,
        chi_exact: chi_norm_exact(bp),
        bound: hoeffding_bound(bp),
    }))
}

/// The tail bound over a grid: defect is `max (chi_exact - bound)`, which
/// must not be positive.
pub fn check_hoeffding_grid(points: &[GridPoint]) -> CheckReport {
    let defect = points
        .iter()
        .map(|g| g.chi_exact - g.bound)
        .fold(f64::NEG_INFINITY, f64::max);
    let worst = points
        .iter()
        .max_by(|a, b| (a.chi_exact / a.bound).total_cmp(&(b.chi_exact / b.bound)));
    let details = json!({
        "points": points.len(),
        "tightest_ratio": worst.map(|g| g.chi_exact / g.bound),
        "tightest_point": worst,
    });
    CheckReport::new("hoeffding_grid", defect, 0.0, details)
}
