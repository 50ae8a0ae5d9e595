use serde_json::{json, Value};

use rmf_core::chaos::{self, SamplerConfig};
use rmf_core::dirichlet::DirichletGrid;
use rmf_core::error::{LabError, Result};
use rmf_core::exponent;
use rmf_core::moments::{self, BRUTE_ENERGY_CAP, BRUTE_LEVEL_CAP};
use rmf_core::sathe::{sathe_predict, PhiEvaluator};
use rmf_core::sieve::FactorSieve;

use crate::output::{Check, RunOutput, Table};
use crate::{report, Command};

/// Resolved options shared by every subcommand.
#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub seed: u64,
    pub samples: usize,
    pub workers: usize,
    pub budget: u64,
    pub verify: bool,
}

impl Context {
    pub fn sampler(&self, n: usize) -> SamplerConfig {
        SamplerConfig::steinhaus(n, self.seed, self.samples).with_workers(self.workers)
    }
}

/// `c √N (log N)^{−0.07672}`.
pub fn default_threshold(n: usize, c: f64) -> f64 {
    let nf = n as f64;
    if n < 2 {
        return c;
    }
    c * nf.sqrt() * nf.ln().powf(-exponent::ROUNDED_THEOREM_CONSTANT)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result types serialize")
}

pub fn run(cmd: &Command, ctx: &Context) -> Result<RunOutput> {
    match cmd {
        Command::Sieve { n, list } => sieve(*n, *list),
        Command::Counts { n } => counts(*n),
        Command::Sathe { n, eps, cutoff } => sathe(*n, *eps, *cutoff),
        Command::Phi { z, cutoff } => phi(z, *cutoff),
        Command::Energy { n } => energy(*n, ctx),
        Command::Moment4 { n, m } => moment4(*n, *m, ctx),
        Command::Ratio { n } => ratio(*n, ctx),
        Command::Projection { n, beta } => projection(*n, *beta),
        Command::HelsonBound { n } => helson(*n),
        Command::Mc {
            n,
            q,
            m,
            model,
            levels,
        } => {
            let cfg = ctx.sampler(*n).with_model((*model).into());
            if *levels {
                mc_levels(&cfg, *q)
            } else {
                mc(&cfg, *q, *m, ctx)
            }
        }
        Command::Tail {
            n,
            threshold,
            c,
            model,
        } => {
            let cfg = ctx.sampler(*n).with_model((*model).into());
            tail(&cfg, threshold.unwrap_or_else(|| default_threshold(*n, *c)))
        }
        Command::Dirichlet { n, q, t, step } => dirichlet(*n, *q, *t, *step),
        Command::LargeValues {
            n,
            t,
            threshold,
            c,
            step,
        } => large_values(
            *n,
            *t,
            threshold.unwrap_or_else(|| default_threshold(*n, *c)),
            *step,
        ),
        Command::Exponent { q } => exponent_cmd(*q),
        Command::Report => report::run(ctx),
    }
}

fn sieve(n: usize, list: bool) -> Result<RunOutput> {
    let s = FactorSieve::new(n)?;
    let squarefree = (1..=n).filter(|&k| s.is_squarefree(k)).count();
    let max_omega = (1..=n).map(|k| s.omega(k)).max().unwrap_or(0);
    let summary = json!({
        "limit": n,
        "prime_count": s.primes().len(),
        "squarefree_count": squarefree,
        "max_omega": max_omega,
    });
    let table = if list {
        let mut t = Table::new(&["n", "spf", "omega", "squarefree"]);
        for k in 1..=n {
            t.push(vec![
                json!(k),
                json!(s.spf(k)),
                json!(s.omega(k)),
                json!(s.is_squarefree(k)),
            ]);
        }
        t
    } else {
        let mut t = Table::new(&["limit", "prime_count", "squarefree_count", "max_omega"]);
        t.push(vec![
            json!(n),
            json!(s.primes().len()),
            json!(squarefree),
            json!(max_omega),
        ]);
        t
    };
    let mut results = summary;
    if list {
        results["rows"] = table.records();
    }
    Ok(RunOutput {
        results,
        table,
        checks: Vec::new(),
    })
}

fn counts(n: usize) -> Result<RunOutput> {
    let t = FactorSieve::new(n)?.count_table();
    let mut table = Table::new(&["m", "count"]);
    for (m, c) in t.counts().iter().enumerate() {
        table.push(vec![json!(m), json!(c)]);
    }
    let total: u64 = t.counts().iter().sum();
    Ok(RunOutput {
        results: json!({ "n": n, "counts": t.counts() }),
        table,
        checks: vec![Check::new(
            "partition",
            total == n as u64,
            format!("sum of counts = {total}"),
        )],
    })
}

/// Exact sizes against the Sathe–Selberg main term for every level.
pub fn sathe_table(
    n: usize,
    eps: f64,
    phi: &PhiEvaluator,
    sieve: &FactorSieve,
) -> Result<(Table, Vec<Check>)> {
    let t = sieve.count_table();
    let mut table = Table::new(&[
        "m",
        "exact",
        "z",
        "main_term",
        "ratio",
        "in_range",
        "uncertainty",
    ]);
    let mut worst: Option<(u32, f64)> = None;
    let mut band_ok = true;
    for m in 1..=t.max_m() as u32 {
        let exact = t.counts()[m as usize];
        let p = sathe_predict(n as u64, m, eps, phi)?;
        let ratio = p.ratio(exact);
        if p.in_range {
            let r = ratio.unwrap_or(f64::NAN);
            if !(0.6..=1.6).contains(&r) {
                band_ok = false;
            }
            if worst.is_none_or(|(_, w)| (r - 1.0).abs() > (w - 1.0).abs()) {
                worst = Some((m, r));
            }
        }
        table.push(vec![
            json!(m),
            json!(exact),
            json!(p.z),
            json!(p.main_term),
            json!(ratio),
            json!(p.in_range),
            json!(p.uncertainty),
        ]);
    }
    let detail = match worst {
        Some((m, r)) => format!("eps={eps}; furthest in-range ratio {r:.6} at m={m}"),
        None => format!("eps={eps}; no in-range levels"),
    };
    Ok((
        table,
        vec![Check::new(
            "in-range ratio within [0.6, 1.6]",
            band_ok,
            detail,
        )],
    ))
}

fn sathe(n: usize, eps: f64, cutoff: usize) -> Result<RunOutput> {
    let s = FactorSieve::new(n)?;
    let phi = PhiEvaluator::new(cutoff)?;
    let (table, checks) = sathe_table(n, eps, &phi, &s)?;
    Ok(RunOutput::from_table(table).with_checks(checks))
}

fn phi(zs: &[f64], cutoff: usize) -> Result<RunOutput> {
    let ev = PhiEvaluator::new(cutoff)?;
    let mut table = Table::new(&["z", "value", "tail_bound", "cutoff"]);
    for &z in zs {
        let v = ev.phi(z)?;
        table.push(vec![
            json!(z),
            json!(v.value),
            json!(v.tail_bound),
            json!(cutoff),
        ]);
    }
    Ok(RunOutput::from_table(table))
}

fn energy(n: usize, ctx: &Context) -> Result<RunOutput> {
    let s = FactorSieve::new(n)?;
    let fast = moments::energy_fast(n, &s)?;
    let mut checks = Vec::new();
    let mut oracle = Value::Null;
    if ctx.verify && n <= BRUTE_ENERGY_CAP {
        let brute = moments::energy_brute(n)?;
        oracle = json!(brute.energy);
        checks.push(Check::new(
            "brute oracle",
            brute.energy == fast.energy,
            format!("brute = {}", brute.energy),
        ));
    }
    let oracle_checked = !checks.is_empty();
    let mut table = Table::new(&["n", "energy", "method", "oracle_checked", "oracle_energy"]);
    table.push(vec![
        json!(n),
        json!(fast.energy),
        json!("fast"),
        json!(oracle_checked),
        oracle.clone(),
    ]);
    Ok(RunOutput {
        results: json!({
            "n": n,
            "energy": fast.energy,
            "method": fast.method,
            "oracle_checked": oracle_checked,
            "oracle_energy": oracle,
        }),
        table,
        checks,
    })
}

fn moment4(n: usize, m: Option<u32>, ctx: &Context) -> Result<RunOutput> {
    let s = FactorSieve::new(n)?;
    let t = s.count_table();
    let levels: Vec<u32> = match m {
        Some(m) => vec![m],
        None => (0..=t.max_m() as u32).collect(),
    };
    let mut table = Table::new(&["m", "l2_squared", "l4_fourth", "method", "brute_equal"]);
    let mut checks = Vec::new();
    for m in levels {
        let id = moments::fourth_moment_homog_identity(n, m, &t, ctx.budget)?;
        let mut brute_equal = Value::Null;
        if ctx.verify && id.l2_squared as usize <= BRUTE_LEVEL_CAP {
            let b = moments::fourth_moment_homog_brute(n, m, &t)?;
            brute_equal = json!(b.l4_fourth == id.l4_fourth);
            checks.push(Check::new(
                format!("brute oracle m={m}"),
                b.l4_fourth == id.l4_fourth,
                format!("brute = {}", b.l4_fourth),
            ));
        }
        table.push(vec![
            json!(m),
            json!(id.l2_squared),
            json!(id.l4_fourth),
            json!("identity"),
            brute_equal,
        ]);
    }
    Ok(RunOutput::from_table(table).with_checks(checks))
}

fn ratio(n: usize, ctx: &Context) -> Result<RunOutput> {
    let s = FactorSieve::new(n)?;
    let t = s.count_table();
    let mut table = Table::new(&["m", "l2_squared", "l4_fourth", "ratio", "status"]);
    for m in 0..=t.max_m() as u32 {
        let row = match moments::fourth_moment_homog_identity(n, m, &t, ctx.budget) {
            Ok(h) if h.l2_squared > 0 => vec![
                json!(m),
                json!(h.l2_squared),
                json!(h.l4_fourth),
                json!(moments::ratio_4_2(&h)?),
                json!("ok"),
            ],
            Ok(h) => vec![
                json!(m),
                json!(h.l2_squared),
                Value::Null,
                Value::Null,
                json!("empty"),
            ],
            Err(LabError::Budget { .. }) => vec![
                json!(m),
                json!(t.counts()[m as usize]),
                Value::Null,
                Value::Null,
                json!("over-budget"),
            ],
            Err(e) => return Err(e),
        };
        table.push(row);
    }
    let loglog = if n >= 3 {
        (n as f64).ln().ln()
    } else {
        f64::NAN
    };
    let mut out = RunOutput::from_table(table);
    out.results["loglog_n"] = json!(loglog);
    out.results["critical_m"] = json!(loglog / 2.0);
    Ok(out)
}

fn projection(n: usize, beta: f64) -> Result<RunOutput> {
    let s = FactorSieve::new(n)?;
    let t = s.count_table();
    let l2 = moments::projection_beta_l2(n, beta, &t)?;
    let top = beta * (n as f64).ln().ln();
    let mut table = Table::new(&["n", "beta", "max_m", "l2_squared", "fraction_of_n"]);
    let max_m = top.floor().min(t.max_m() as f64) as i64;
    let frac = l2 as f64 / n as f64;
    table.push(vec![
        json!(n),
        json!(beta),
        json!(max_m),
        json!(l2),
        json!(frac),
    ]);
    Ok(RunOutput {
        results: json!({
            "n": n,
            "beta": beta,
            "max_m": max_m,
            "l2_squared": l2,
            "fraction_of_n": frac,
        }),
        table,
        checks: Vec::new(),
    })
}

fn helson(n: u64) -> Result<RunOutput> {
    let b = moments::helson_upper_bound(n)?;
    let mut table = Table::new(&["n", "c", "eps_star", "bound_squared"]);
    table.push(vec![
        json!(b.n),
        json!(b.c),
        json!(b.eps_star),
        json!(b.bound_squared),
    ]);
    Ok(RunOutput {
        results: to_value(&b),
        table,
        checks: vec![Check::new("c < 1", b.c < 1.0, format!("c = {}", b.c))],
    })
}

fn mc(cfg: &SamplerConfig, q: f64, m: Option<u32>, ctx: &Context) -> Result<RunOutput> {
    let s = FactorSieve::new(cfg.n)?;
    let est = chaos::estimate_moment(cfg, &s, q, m)?;
    let mut checks = Vec::new();
    if ctx.verify && cfg.model == chaos::Model::Steinhaus {
        let exact = if q == 2.0 {
            Some(match m {
                Some(m) => s.count_table().e_count(cfg.n, m as usize)? as f64,
                None => cfg.n as f64,
            })
        } else if q == 4.0 && m.is_none() {
            Some(moments::energy_fast(cfg.n, &s)?.energy as f64)
        } else if q == 4.0 {
            let t = s.count_table();
            Some(
                moments::fourth_moment_homog_identity(cfg.n, m.unwrap(), &t, ctx.budget)?.l4_fourth
                    as f64,
            )
        } else {
            None
        };
        if let Some(exact) = exact {
            checks.push(Check::new(
                "exact moment within 3 stderr",
                (est.mean - exact).abs() <= 3.0 * est.stderr,
                format!("exact = {exact}"),
            ));
        }
    }
    let mut table = Table::new(&[
        "n", "q", "m", "model", "mean", "stderr", "norm", "samples", "seed",
    ]);
    table.push(vec![
        json!(cfg.n),
        json!(q),
        json!(m),
        to_value(&cfg.model),
        json!(est.mean),
        json!(est.stderr),
        json!(est.norm()),
        json!(est.samples),
        json!(est.seed),
    ]);
    let mut results = to_value(&est);
    results["norm"] = json!(est.norm());
    results["norm_stderr"] = json!(est.norm_stderr());
    Ok(RunOutput {
        results,
        table,
        checks,
    })
}

fn mc_levels(cfg: &SamplerConfig, q: f64) -> Result<RunOutput> {
    let s = FactorSieve::new(cfg.n)?;
    let r = chaos::projection_coeff_check(cfg, &s, q)?;
    let mut table = Table::new(&[
        "m",
        "level_size",
        "norm",
        "stderr",
        "full_norm",
        "violation",
    ]);
    for l in &r.levels {
        table.push(vec![
            json!(l.m),
            json!(l.level_size),
            json!(l.norm),
            json!(l.stderr),
            json!(r.full_norm),
            json!(l.violation),
        ]);
    }
    let checks = if r.asserting {
        vec![Check::new(
            "level norms below full norm (3σ)",
            r.violations() == 0,
            format!("{} violations", r.violations()),
        )]
    } else {
        Vec::new()
    };
    Ok(RunOutput {
        results: to_value(&r),
        table,
        checks,
    })
}

fn tail(cfg: &SamplerConfig, threshold: f64) -> Result<RunOutput> {
    let s = FactorSieve::new(cfg.n)?;
    let t = chaos::tail_probability(cfg, &s, threshold)?;
    let mut table = Table::new(&["n", "threshold", "probability", "stderr", "samples", "seed"]);
    table.push(vec![
        json!(cfg.n),
        json!(t.threshold),
        json!(t.probability),
        json!(t.stderr),
        json!(t.samples),
        json!(t.seed),
    ]);
    Ok(RunOutput {
        results: to_value(&t),
        table,
        checks: Vec::new(),
    })
}

fn grid(n: usize, t: f64, step: Option<f64>) -> Result<DirichletGrid> {
    match step {
        Some(h) => DirichletGrid::with_step(n, t, h),
        None => DirichletGrid::new(n, t),
    }
}

fn dirichlet(n: usize, q: f64, t: f64, step: Option<f64>) -> Result<RunOutput> {
    let g = grid(n, t, step)?;
    let avg = g.time_average_moment(q)?;
    let mut table = Table::new(&["n", "q", "t", "step", "points", "value", "max_abs"]);
    table.push(vec![
        json!(n),
        json!(q),
        json!(t),
        json!(avg.step),
        json!(avg.points),
        json!(avg.value),
        json!(avg.max_abs),
    ]);
    Ok(RunOutput {
        results: to_value(&avg),
        table,
        checks: vec![Check::new(
            "|D_N(t)| ≤ N on the grid",
            avg.max_abs <= n as f64 * (1.0 + 1e-12),
            format!("max = {}", avg.max_abs),
        )],
    })
}

fn large_values(n: usize, t: f64, threshold: f64, step: Option<f64>) -> Result<RunOutput> {
    let g = grid(n, t, step)?;
    let frac = g.large_values_fraction(threshold)?;
    let mut table = Table::new(&["n", "t", "step", "points", "threshold", "fraction"]);
    table.push(vec![
        json!(n),
        json!(t),
        json!(g.step()),
        json!(g.points()),
        json!(threshold),
        json!(frac),
    ]);
    Ok(RunOutput {
        results: json!({
            "n": n,
            "t": t,
            "step": g.step(),
            "points": g.points(),
            "threshold": threshold,
            "fraction": frac,
        }),
        table,
        checks: Vec::new(),
    })
}

fn exponent_cmd(q: f64) -> Result<RunOutput> {
    let r = exponent::exponent_report(q)?;
    let tc = exponent::theorem_constant();
    let mut table = Table::new(&[
        "q",
        "y_star",
        "residual",
        "lower_bound_exponent",
        "theorem_constant",
        "helson_reference",
    ]);
    table.push(vec![
        json!(r.q),
        json!(r.y_star),
        json!(r.residual),
        json!(r.lower_bound_exponent),
        json!(r.theorem_constant),
        json!(r.helson_reference),
    ]);
    let mut results = to_value(&r);
    results["exponent"] = json!(r.lower_bound_exponent);
    Ok(RunOutput {
        results,
        table,
        checks: vec![Check::new(
            "(1 - log 2)/4 < 0.07672",
            tc.below_rounded,
            format!("{}", tc.value),
        )],
    })
}
