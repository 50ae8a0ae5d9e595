//! Composite run: reference constants plus the full acceptance table.

use serde_json::json;

use rmf_core::chaos::{estimate_moment, SamplerConfig};
use rmf_core::dirichlet::DirichletGrid;
use rmf_core::error::Result;
use rmf_core::exponent;
use rmf_core::moments::{self, DEFAULT_PAIR_BUDGET};
use rmf_core::sathe::PhiEvaluator;
use rmf_core::sieve::FactorSieve;

use crate::commands::{sathe_table, Context};
use crate::output::{Check, RunOutput, Table};

const FOUR_OVER_PI: f64 = 4.0 / std::f64::consts::PI;

fn energy_oracle() -> Result<Check> {
    let s = FactorSieve::new(300)?;
    let mut bad = Vec::new();
    for n in 1..=300 {
        if moments::energy_fast(n, &s)?.energy != moments::energy_brute(n)?.energy {
            bad.push(n);
        }
    }
    Ok(Check::new(
        "1 energy fast = brute, N <= 300",
        bad.is_empty(),
        format!("mismatches: {bad:?}"),
    ))
}

fn l4_slope() -> Result<Check> {
    let s = FactorSieve::new(1 << 20)?;
    let ns: Vec<usize> = (10..=20).map(|e| 1usize << e).collect();
    let fit = moments::l4_asymptotic_fit(&ns, &s)?;
    let target = 12.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let rel = (fit.slope / target - 1.0).abs();
    Ok(Check::new(
        "2 L4 slope within 5% of 12/pi^2",
        rel <= 0.05,
        format!(
            "slope {} intercept {} rel.err {rel:.4}",
            fit.slope, fit.intercept
        ),
    ))
}

fn homog_oracle() -> Result<Check> {
    let t = FactorSieve::new(200)?.count_table();
    let mut bad = Vec::new();
    let mut cases = 0;
    for n in 1..=200 {
        for m in 0..=t.max_m() as u32 {
            cases += 1;
            let a = moments::fourth_moment_homog_identity(n, m, &t, DEFAULT_PAIR_BUDGET)?;
            let b = moments::fourth_moment_homog_brute(n, m, &t)?;
            if a.l4_fourth != b.l4_fourth {
                bad.push((n, m));
            }
        }
    }
    Ok(Check::new(
        "3 homogeneous L4 identity = brute, N <= 200",
        bad.is_empty(),
        format!("{cases} cases, mismatches: {bad:?}"),
    ))
}

fn constants() -> Result<Check> {
    let y = exponent::optimal_y(1.0)?;
    let e1 = exponent::lower_bound_exponent(1.0)?;
    let e2 = exponent::lower_bound_exponent(2.0)?;
    let tc = exponent::theorem_constant();
    let ok = (y - 0.21556).abs() <= 1e-4
        && (e1 + 0.05616).abs() <= 1e-4
        && (tc.value - 0.076_713_2).abs() <= 1e-7
        && tc.below_rounded
        && e2.abs() <= 1e-12;
    Ok(Check::new(
        "4 constants y*, exponent(1), (1-log 2)/4, exponent(2)",
        ok,
        format!("y* {y} exp(1) {e1} const {} exp(2) {e2}", tc.value),
    ))
}

fn phi_anchors() -> Result<Check> {
    let coarse = PhiEvaluator::new(100_000)?;
    let fine = PhiEvaluator::new(1_000_000)?;
    let p0 = fine.phi(0.0)?.value;
    let p1 = fine.phi(1.0)?.value;
    let shift = (coarse.phi(0.5)?.value - fine.phi(0.5)?.value).abs();
    let ok = (p0 - 1.0).abs() <= 1e-9 && (p1 - 1.0).abs() <= 1e-9 && shift < 1e-8;
    Ok(Check::new(
        "5 phi(0) = phi(1) = 1, cutoff shift at 0.5 < 1e-8",
        ok,
        format!("phi(0) {p0} phi(1) {p1} shift {shift:e}"),
    ))
}

fn sathe_band() -> Result<Check> {
    let n = 10_000_000;
    let s = FactorSieve::new(n)?;
    let phi = PhiEvaluator::new(1_000_000)?;
    let (_, mut checks) = sathe_table(n, 0.1, &phi, &s)?;
    let mut c = checks.remove(0);
    c.name = "6 Sathe ratio band at N = 1e7".into();
    Ok(c)
}

fn mc_exact(ctx: &Context) -> Result<Check> {
    let s = FactorSieve::new(1000)?;
    let mut parts = Vec::new();
    let mut ok = true;
    let mut record = |label: String, mean: f64, se: f64, exact: f64| {
        let pass = (mean - exact).abs() <= 3.0 * se;
        ok &= pass;
        parts.push(format!("{label}: {mean:.4}±{se:.4} vs {exact:.4}"));
    };
    for n in [10usize, 100, 1000] {
        let cfg = SamplerConfig::steinhaus(n, ctx.seed, 10_000).with_workers(ctx.workers);
        let e = estimate_moment(&cfg, &s, 2.0, None)?;
        record(format!("E|S_{n}|^2"), e.mean, e.stderr, n as f64);
    }
    let cfg = SamplerConfig::steinhaus(100, ctx.seed, 100_000).with_workers(ctx.workers);
    let e = estimate_moment(&cfg, &s, 4.0, None)?;
    record(
        "E|S_100|^4".into(),
        e.mean,
        e.stderr,
        moments::energy_fast(100, &s)?.energy as f64,
    );
    let cfg = SamplerConfig::steinhaus(2, ctx.seed, 100_000).with_workers(ctx.workers);
    let e = estimate_moment(&cfg, &s, 1.0, None)?;
    record("E|S_2|".into(), e.mean, e.stderr, FOUR_OVER_PI);
    Ok(Check::new(
        "7 Monte Carlo vs exact moments",
        ok,
        parts.join("; "),
    ))
}

/// z-scores of `E|S_2|` against `4/π` over many seeds should average to zero.
fn mc_unbiased() -> Result<Check> {
    let s = FactorSieve::new(2)?;
    let seeds = 64u64;
    let mut total = 0.0;
    for k in 0..seeds {
        let cfg = SamplerConfig::steinhaus(2, 1000 + k, 20_000);
        let e = estimate_moment(&cfg, &s, 1.0, None)?;
        total += (e.mean - FOUR_OVER_PI) / e.stderr;
    }
    let mean_z = total / seeds as f64;
    let limit = 3.0 / (seeds as f64).sqrt();
    Ok(Check::new(
        "7b mean z-score of E|S_2| over 64 seeds",
        mean_z.abs() <= limit,
        format!("mean z {mean_z:.4}, limit {limit:.4}"),
    ))
}

fn norm_identity(ctx: &Context) -> Result<Check> {
    let s = FactorSieve::new(100)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (n, q) in [(10usize, 1.0), (50, 2.0), (100, 4.0)] {
        let avg = DirichletGrid::new(n, 1e5)?.time_average_moment(q)?.value;
        let cfg = SamplerConfig::steinhaus(n, ctx.seed, 100_000).with_workers(ctx.workers);
        let mc = estimate_moment(&cfg, &s, q, None)?;
        let tol = 0.02 * avg.abs() + 3.0 * mc.stderr;
        ok &= (avg - mc.mean).abs() <= tol;
        parts.push(format!(
            "N={n} q={q}: time {avg:.4} mc {:.4} tol {tol:.4}",
            mc.mean
        ));
    }
    Ok(Check::new(
        "8 time average vs Monte Carlo, T = 1e5",
        ok,
        parts.join("; "),
    ))
}

fn determinism(ctx: &Context) -> Result<Check> {
    let s = FactorSieve::new(200)?;
    let base = SamplerConfig::steinhaus(200, ctx.seed, 5000);
    let one = estimate_moment(&base.with_workers(1), &s, 1.0, None)?;
    let four = estimate_moment(&base.with_workers(4), &s, 1.0, None)?;
    let again = estimate_moment(&base.with_workers(1), &s, 1.0, None)?;
    let ok = one.mean.to_bits() == four.mean.to_bits()
        && one.stderr.to_bits() == four.stderr.to_bits()
        && one.mean.to_bits() == again.mean.to_bits();
    Ok(Check::new(
        "9 fixed seed gives identical estimates for 1 and 4 workers",
        ok,
        format!("mean {} / {}", one.mean, four.mean),
    ))
}

fn helson_bound(ctx: &Context) -> Result<Check> {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [2u64, 10, 1000, 1_000_000] {
        let c = moments::helson_upper_bound(n)?.c;
        ok &= c < 1.0;
        parts.push(format!("c({n}) = {c:.6}"));
    }
    let s = FactorSieve::new(1000)?;
    for n in [10usize, 100, 1000] {
        let c = moments::helson_upper_bound(n as u64)?.c;
        let cfg = SamplerConfig::steinhaus(n, ctx.seed, 10_000).with_workers(ctx.workers);
        let e = estimate_moment(&cfg, &s, 1.0, None)?;
        let bound = c * (n as f64).sqrt();
        ok &= e.mean <= bound + 3.0 * e.stderr;
        parts.push(format!("E|S_{n}| {:.4} <= {bound:.4}", e.mean));
    }
    Ok(Check::new(
        "10 c < 1 and E|S_N| <= c sqrt(N)",
        ok,
        parts.join("; "),
    ))
}

pub fn run(ctx: &Context) -> Result<RunOutput> {
    let checks = vec![
        energy_oracle()?,
        l4_slope()?,
        homog_oracle()?,
        constants()?,
        phi_anchors()?,
        sathe_band()?,
        mc_exact(ctx)?,
        mc_unbiased()?,
        norm_identity(ctx)?,
        determinism(ctx)?,
        helson_bound(ctx)?,
    ];

    let mut table = Table::new(&["criterion", "passed", "detail"]);
    for c in &checks {
        table.push(vec![json!(c.name), json!(c.passed), json!(c.detail)]);
    }
    table.push(vec![
        json!("11 asymptotic laws (declared out of desk-scale reach)"),
        json!(null),
        json!("see the ratio subcommand for finite-N L4/L2 tables"),
    ]);

    let y = exponent::optimal_y(1.0)?;
    let results = json!({
        "constants": {
            "y_star_q1": y,
            "lower_bound_exponent_q1": exponent::lower_bound_exponent(1.0)?,
            "theorem_constant": exponent::theorem_constant(),
            "helson_reference": exponent::HELSON_REFERENCE_EXPONENT,
            "twelve_over_pi_squared": 12.0 / (std::f64::consts::PI * std::f64::consts::PI),
        },
        "acceptance": table.records(),
    });
    Ok(RunOutput {
        results,
        table,
        checks,
    })
}
