//! Exact second and fourth moments of `S_N` and of its homogeneous parts.
//!
//! For Steinhaus chaos the monomials `z(n)` are orthonormal, so
//! `E|S_N|⁴ = #{(a,b,c,d) ∈ [1,N]⁴ : ab = cd}` and
//! `E|S_{N,m}|² = |E_{N,m}|`. The fourth moment of `S_{N,m}` follows from
//! writing each pair `(n, n')` as `(ga, gb)` with `gcd(a, b) = 1`:
//!
//! ```text
//! E|S_{N,m}|⁴ = |E_{N,m}|² + 2 Σ_{k=1..m} Σ_{a<b in E_{N,k}, gcd(a,b)=1} |E_{⌊N/b⌋, m−k}|²
//! ```
//!
//! Every fast route here has a brute-force product-count oracle beside it.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::sieve::{CountTable, FactorSieve};

/// Largest `N` accepted by [`energy_brute`].
pub const BRUTE_ENERGY_CAP: usize = 5000;

/// Largest level set accepted by [`fourth_moment_homog_brute`].
pub const BRUTE_LEVEL_CAP: usize = 5000;

/// Default operation budget for the quadratic pair scan.
pub const DEFAULT_PAIR_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fast,
    Brute,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnergyResult {
    pub n: u64,
    /// `#{(a,b,c,d) ∈ [1,N]⁴ : ab = cd}`, equal to `E|S_N|⁴`.
    pub energy: u64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HomogeneousMoment {
    pub n: u64,
    pub m: u32,
    /// `E|S_{N,m}|² = |E_{N,m}|`.
    pub l2_squared: u64,
    /// `E|S_{N,m}|⁴`.
    pub l4_fourth: u64,
    pub method: Method,
}

/// Sum of squared representation counts of a product multiset.
fn squared_product_counts(values: &[u32]) -> u64 {
    let mut reps: HashMap<u64, u64> = HashMap::with_capacity(values.len() * values.len() / 2);
    for &a in values {
        for &b in values {
            *reps.entry(u64::from(a) * u64::from(b)).or_insert(0) += 1;
        }
    }
    reps.values().map(|r| r * r).sum()
}

/// Multiplicative energy by counting products in a map.
pub fn energy_brute(n: usize) -> Result<EnergyResult> {
    if n == 0 || n > BRUTE_ENERGY_CAP {
        return Err(LabError::Capacity(format!(
            "brute energy needs 1 ≤ N ≤ {BRUTE_ENERGY_CAP}, got {n}"
        )));
    }
    let values: Vec<u32> = (1..=n as u32).collect();
    Ok(EnergyResult {
        n: n as u64,
        energy: squared_product_counts(&values),
        method: Method::Brute,
    })
}

/// Multiplicative energy in `O(N)` from the totient table.
///
/// Writing `a = gu, b = hv, c = gv, d = hu` with `gcd(u, v) = 1`, every
/// solution of `ab = cd` is counted once per coprime pair `(u, v)`; grouping by
/// `M = max(u, v)` gives `Σ_M ⌊N/M⌋² c(M)` with `c(1) = 1` and `c(M) = 2φ(M)`.
pub fn energy_fast(n: usize, sieve: &FactorSieve) -> Result<EnergyResult> {
    let totients = sieve.totients();
    energy_with_totients(n, &totients)
}

/// [`energy_fast`] against a precomputed totient table.
pub fn energy_with_totients(n: usize, totients: &[u32]) -> Result<EnergyResult> {
    if n == 0 {
        return Err(LabError::Domain("energy needs N ≥ 1".into()));
    }
    if n >= totients.len() {
        return Err(LabError::Usage(format!(
            "energy at N = {n} needs a sieve of at least that size (have {})",
            totients.len().saturating_sub(1)
        )));
    }
    let energy: u64 = (1..=n)
        .into_par_iter()
        .map(|m| {
            let q = (n / m) as u64;
            let weight = if m == 1 {
                1
            } else {
                2 * u64::from(totients[m])
            };
            q * q * weight
        })
        .sum();
    Ok(EnergyResult {
        n: n as u64,
        energy,
        method: Method::Fast,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct L4Fit {
    pub slope: f64,
    pub intercept: f64,
    /// `(N, energy(N) / N²)` for each fitted point.
    pub points: Vec<(u64, f64)>,
}

/// Least-squares line through `(log N, energy(N) / N²)`.
pub fn l4_asymptotic_fit(ns: &[usize], sieve: &FactorSieve) -> Result<L4Fit> {
    if ns.len() < 3 {
        return Err(LabError::Domain(format!(
            "the fit needs at least 3 points, got {}",
            ns.len()
        )));
    }
    if ns.windows(2).any(|w| w[0] > w[1]) {
        return Err(LabError::Domain("fit points must be ascending".into()));
    }
    if ns[0] == ns[ns.len() - 1] {
        return Err(LabError::Domain("fit points are all equal".into()));
    }
    let totients = sieve.totients();
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let e = energy_with_totients(n, &totients)?.energy;
        let nf = n as f64;
        points.push((n as u64, e as f64 / (nf * nf)));
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / k;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, &(_, y)) in xs.iter().zip(&points) {
        sxy += (x - mean_x) * (y - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
    }
    let slope = sxy / sxx;
    Ok(L4Fit {
        slope,
        intercept: mean_y - slope * mean_x,
        points,
    })
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_level_args(n: usize, m: u32, table: &CountTable) -> Result<()> {
    if n == 0 || n > table.limit() {
        return Err(LabError::Usage(format!(
            "N = {n} outside the count table range [1, {}]",
            table.limit()
        )));
    }
    if m as usize > table.max_m() {
        return Err(LabError::Domain(format!(
            "m = {m} exceeds the largest level {} of the table",
            table.max_m()
        )));
    }
    Ok(())
}

/// Elements `b` of `E_{N,k}` that can contribute, i.e. `⌊N/b⌋ ≥ 2^{m−k}`.
fn contributing(table: &CountTable, n: usize, k: u32, m: u32) -> &[u32] {
    let shift = m - k;
    let reach = if shift >= usize::BITS { 0 } else { n >> shift };
    table.members_upto(reach.min(n), k as usize)
}

/// Number of `(a, b)` pair visits the identity would perform.
pub fn homog_identity_cost(n: usize, m: u32, table: &CountTable) -> Result<u128> {
    check_level_args(n, m, table)?;
    Ok((1..=m)
        .map(|k| {
            let c = contributing(table, n, k, m).len() as u128;
            c * c.saturating_sub(1) / 2
        })
        .sum())
}

/// `E|S_{N,m}|⁴` through the coprime-pair identity.
pub fn fourth_moment_homog_identity(
    n: usize,
    m: u32,
    table: &CountTable,
    budget: u64,
) -> Result<HomogeneousMoment> {
    let cost = homog_identity_cost(n, m, table)?;
    if cost > u128::from(budget) {
        return Err(LabError::Budget {
            what: "fourth-moment pair scan",
            needed: cost,
            budget,
        });
    }
    let diag = table.e_count(n, m as usize)?;

    let off_diag: u64 = (1..=m)
        .into_par_iter()
        .map(|k| {
            let rest = (m - k) as usize;
            let bs = contributing(table, n, k, m);
            let mut acc = 0u64;
            for (j, &b) in bs.iter().enumerate() {
                let g = table
                    .e_count(n / b as usize, rest)
                    .expect("n / b is within the table");
                if g == 0 {
                    continue;
                }
                let coprime = bs[..j].iter().filter(|&&a| gcd(a, b) == 1).count() as u64;
                acc += coprime * g * g;
            }
            acc
        })
        .sum();

    Ok(HomogeneousMoment {
        n: n as u64,
        m,
        l2_squared: diag,
        l4_fourth: diag * diag + 2 * off_diag,
        method: Method::Identity,
    })
}

/// `E|S_{N,m}|⁴` by counting products over `E_{N,m}²`.
pub fn fourth_moment_homog_brute(
    n: usize,
    m: u32,
    table: &CountTable,
) -> Result<HomogeneousMoment> {
    check_level_args(n, m, table)?;
    let level = table.members_upto(n, m as usize);
    if level.len() > BRUTE_LEVEL_CAP {
        return Err(LabError::Capacity(format!(
            "level set of size {} exceeds the brute cap {BRUTE_LEVEL_CAP}",
            level.len()
        )));
    }
    Ok(HomogeneousMoment {
        n: n as u64,
        m,
        l2_squared: level.len() as u64,
        l4_fourth: squared_product_counts(level),
        method: Method::Brute,
    })
}

/// `‖S_{N,m}‖₄ / ‖S_{N,m}‖₂`.
pub fn ratio_4_2(moment: &HomogeneousMoment) -> Result<f64> {
    if moment.l2_squared == 0 {
        return Err(LabError::Domain(format!(
            "level set E_(N={}, m={}) is empty",
            moment.n, moment.m
        )));
    }
    Ok((moment.l4_fourth as f64).powf(0.25) / (moment.l2_squared as f64).sqrt())
}

/// `‖P_β S_N‖₂² = Σ_{m ≤ β log log N} |E_{N,m}|`.
pub fn projection_beta_l2(n: usize, beta: f64, table: &CountTable) -> Result<u64> {
    if n < 3 {
        return Err(LabError::Domain(format!("projection needs N ≥ 3, got {n}")));
    }
    if !(beta > 0.0) {
        return Err(LabError::Domain(format!("β must be positive, got {beta}")));
    }
    if n > table.limit() {
        return Err(LabError::Usage(format!(
            "N = {n} exceeds the table limit {}",
            table.limit()
        )));
    }
    let top = beta * (n as f64).ln().ln();
    let mut total = 0;
    for m in 0..=table.max_m() {
        if m as f64 > top {
            break;
        }
        total += table.e_count(n, m)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HelsonBound {
    pub n: u64,
    /// `c` with `‖S_N‖₁ ≤ c √N`.
    pub c: f64,
    pub eps_star: f64,
    /// Minimised right-hand side, a bound for `‖S_N‖₁²`.
    pub bound_squared: f64,
}

/// Right-hand side `(N − (ε − ε²)(N − 1)) / (1 − ε²)` of the weighted
/// Cauchy–Schwarz bound on `‖S_N‖₁²`.
pub fn helson_rhs(n: u64, eps: f64) -> f64 {
    let nf = n as f64;
    (nf - (eps - eps * eps) * (nf - 1.0)) / (1.0 - eps * eps)
}

/// Minimises [`helson_rhs`] over `ε ∈ (0, 1)` by golden-section search.
pub fn helson_upper_bound(n: u64) -> Result<HelsonBound> {
    if n < 2 {
        return Err(LabError::Domain(format!(
            "the bound is an equality at N = 1; need N ≥ 2, got {n}"
        )));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let f = |e: f64| helson_rhs(n, e);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-9 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let eps_star = 0.5 * (lo + hi);
    let bound_squared = f(eps_star);
    Ok(HelsonBound {
        n,
        c: (bound_squared / n as f64).sqrt(),
        eps_star,
        bound_squared,
    })
}
