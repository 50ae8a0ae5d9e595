//! The Φ Euler product and the Sathe–Selberg main term for `|E_{N,m}|`.
//!
//! `Φ(z) = Γ(z+1)⁻¹ ∏_p (1 − 1/p)^z (1 − z/p)⁻¹` is evaluated on the real
//! segment `[0, 2 − margin]`. The product is truncated at a prime cutoff `P`.
//! The remaining log-sum over `p > P` is estimated from the power series
//!
//! ```text
//! z·log(1 − 1/p) − log(1 − z/p) = Σ_{k≥2} (z^k − z) / (k p^k)
//! ```
//!
//! with `Σ_{p>P} p^{−k} ≈ ∫_P^∞ t^{−k} dt / log t = E₁((k − 1) log P)`.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::sieve::FactorSieve;

/// Default prime cutoff for the truncated Euler product.
pub const DEFAULT_PHI_CUTOFF: usize = 1_000_000;

/// Default distance kept from the pole of Φ at `z = 2`.
pub const DEFAULT_POLE_MARGIN: f64 = 0.05;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k − 1)) for k = 1..=8
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Natural log of Γ(x) for `x > 0`.
///
/// Arguments below 10 are shifted up with `Γ(x + 1) = xΓ(x)` before the
/// Stirling series is applied.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(LabError::Domain(format!("log_gamma needs x > 0, got {x}")));
    }
    let mut shifted = x;
    let mut log_prod = 0.0;
    if shifted < 10.0 {
        let mut prod = 1.0;
        while shifted < 10.0 {
            prod *= shifted;
            shifted += 1.0;
        }
        log_prod = prod.ln();
    }
    let inv = 1.0 / shifted;
    let inv_sq = inv * inv;
    let mut series = 0.0;
    let mut power = inv;
    for c in STIRLING_COEFFS {
        series += c * power;
        power *= inv_sq;
    }
    Ok((shifted - 0.5) * shifted.ln() - shifted + HALF_LN_2PI + series - log_prod)
}

/// Exponential integral `E₁(x)` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    debug_assert!(x > 0.0);
    if x <= 1.0 {
        // E₁(x) = −γ − ln x − Σ_{k≥1} (−x)^k / (k·k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        // modified Lentz on the continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..200 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let delta = c * d;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Value of Φ together with a bound on the effect of the truncated tail.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhiValue {
    pub z: f64,
    pub value: f64,
    pub log_value: f64,
    /// Bound on `|Φ_true − value|` coming from primes above the cutoff.
    pub tail_bound: f64,
}

/// Truncated Euler product for Φ with an analytic tail correction.
#[derive(Debug, Clone)]
pub struct PhiEvaluator {
    cutoff: usize,
    primes: Vec<u32>,
    margin: f64,
    tail_order: u32,
}

impl PhiEvaluator {
    /// Highest power `k` of `1/p` whose tail is corrected explicitly.
    const TAIL_ORDER: u32 = 6;

    pub fn new(cutoff: usize) -> Result<Self> {
        Self::with_margin(cutoff, DEFAULT_POLE_MARGIN)
    }

    pub fn with_margin(cutoff: usize, margin: f64) -> Result<Self> {
        if cutoff < 100 {
            return Err(LabError::Domain(format!(
                "Euler product cutoff must be at least 100, got {cutoff}"
            )));
        }
        if !(margin > 0.0 && margin < 2.0) {
            return Err(LabError::Domain(format!(
                "pole margin must lie in (0, 2), got {margin}"
            )));
        }
        let primes = FactorSieve::new(cutoff)?.primes().to_vec();
        Ok(Self {
            cutoff,
            primes,
            margin,
            tail_order: Self::TAIL_ORDER,
        })
    }

    /// Builds an evaluator reusing the primes of an existing sieve.
    pub fn from_sieve(sieve: &FactorSieve) -> Result<Self> {
        if sieve.limit() < 100 {
            return Err(LabError::Domain(
                "Euler product cutoff must be at least 100".into(),
            ));
        }
        Ok(Self {
            cutoff: sieve.limit(),
            primes: sieve.primes().to_vec(),
            margin: DEFAULT_POLE_MARGIN,
            tail_order: Self::TAIL_ORDER,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn tail_order(&self) -> u32 {
        self.tail_order
    }

    /// Upper end of the evaluation domain, `2 − margin`.
    pub fn max_z(&self) -> f64 {
        2.0 - self.margin
    }

    pub fn phi(&self, z: f64) -> Result<PhiValue> {
        if !z.is_finite() || z < 0.0 {
            return Err(LabError::Domain(format!(
                "Φ is evaluated on z ≥ 0, got {z}"
            )));
        }
        if z > self.max_z() {
            return Err(LabError::PoleProximity {
                z,
                limit: self.max_z(),
            });
        }

        // Summed from the largest prime down so the small terms accumulate first.
        let head: f64 = self
            .primes
            .iter()
            .rev()
            .map(|&p| {
                let inv = 1.0 / f64::from(p);
                z * (-inv).ln_1p() - (-z * inv).ln_1p()
            })
            .sum();

        let log_p = (self.cutoff as f64).ln();
        let mut correction = 0.0;
        let mut bound = 0.0;
        for k in 2..=self.tail_order {
            let coeff = (z.powi(k as i32) - z) / f64::from(k);
            let weight = exp_integral_e1(f64::from(k - 1) * log_p);
            correction += coeff * weight;
            bound += coeff.abs() * weight;
        }
        // terms past the explicit order
        bound += (2.0 / self.cutoff as f64).powi(self.tail_order as i32);

        let log_value = head + correction - log_gamma(z + 1.0)?;
        let value = log_value.exp();
        Ok(PhiValue {
            z,
            value,
            log_value,
            tail_bound: value * bound.exp_m1(),
        })
    }
}

/// Main term of the Sathe–Selberg estimate for `|E_{N,m}|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SathePrediction {
    pub n: u64,
    pub m: u32,
    pub eps: f64,
    /// `m / log log N`, the argument passed to Φ.
    pub z: f64,
    /// `(N / log N) Φ(z) (log log N)^{m−1} / (m − 1)!`; `None` when `z` lies
    /// outside the domain on which Φ is evaluated.
    pub main_term: Option<f64>,
    /// Whether `m ≤ (2 − ε) log log N`.
    pub in_range: bool,
    /// Relative band `1 / log log N` of the error factor, uncalibrated.
    pub uncertainty: f64,
}

impl SathePrediction {
    /// `main_term / exact`, if both are available and `exact > 0`.
    pub fn ratio(&self, exact: u64) -> Option<f64> {
        match self.main_term {
            Some(t) if exact > 0 => Some(t / exact as f64),
            _ => None,
        }
    }
}

pub fn sathe_predict(n: u64, m: u32, eps: f64, phi: &PhiEvaluator) -> Result<SathePrediction> {
    if n < 3 {
        return Err(LabError::Domain(format!(
            "Sathe estimate needs N ≥ 3, got {n}"
        )));
    }
    if m == 0 {
        return Err(LabError::Domain("Sathe estimate needs m ≥ 1".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LabError::Domain(format!("ε must lie in (0, 1), got {eps}")));
    }
    let log_n = (n as f64).ln();
    let loglog = log_n.ln();
    let z = f64::from(m) / loglog;
    let in_range = f64::from(m) <= (2.0 - eps) * loglog;

    let main_term = if z <= phi.max_z() {
        let phi_z = phi.phi(z)?;
        let log_term = log_n - loglog + phi_z.log_value + f64::from(m - 1) * loglog.ln()
            - log_gamma(f64::from(m))?;
        Some(log_term.exp())
    } else {
        None
    };

    Ok(SathePrediction {
        n,
        m,
        eps,
        z,
        main_term,
        in_range,
        uncertainty: 1.0 / loglog,
    })
}

/// `δ(ε) = (2 − e^{−ε}(1 + log 2 + ε)) / 4`.
pub fn delta_eps(eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(LabError::Domain(format!("δ(ε) needs ε ≥ 0, got {eps}")));
    }
    Ok((2.0 - (-eps).exp() * (1.0 + std::f64::consts::LN_2 + eps)) / 4.0)
}

/// Exponent of `log N` in `‖S_{N,m}‖₂` when `m = (e^y / 2) log log N`:
/// `(e^y (1 + log 2 − y) − 2) / 4`.
pub fn l2_exponent_y(y: f64) -> f64 {
    (y.exp() * (1.0 + std::f64::consts::LN_2 - y) - 2.0) / 4.0
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    // Reference values from a 40-digit evaluation.
    const LOG_GAMMA_REF: [(f64, f64); 10] = [
        (0.5, 0.572_364_942_924_700_087_1),
        (0.75, 0.203_280_951_431_295_371_5),
        (1.5, -0.120_782_237_635_245_222_3),
        (2.5, 0.284_682_870_472_919_159_6),
        (3.7, 1.428_072_326_665_387_921_9),
        (7.25, 7.052_185_450_738_539_444_9),
        (10.0, 12.801_827_480_081_469_611),
        (13.3, 20.748_582_669_470_613_753),
        (25.5, 56.389_167_643_719_946_744),
        (50.0, 144.565_743_946_344_886_009),
    ];

    #[test]
    fn log_gamma_matches_reference() {
        for (x, want) in LOG_GAMMA_REF {
            let got = log_gamma(x).unwrap();
            assert!((got - want).abs() <= 1e-12, "x={x}: {got} vs {want}");
        }
        assert!(log_gamma(1.0).unwrap().abs() < 1e-14);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn log_gamma_recurrence_on_grid() {
        // Γ(x + 1) = x Γ(x) across the shift boundary at 10
        let mut x = 0.5;
        while x < 49.0 {
            let lhs = log_gamma(x + 1.0).unwrap();
            let rhs = log_gamma(x).unwrap() + x.ln();
            assert!((lhs - rhs).abs() < 1e-12, "x={x}");
            x += 0.37;
        }
    }

    #[test]
    fn log_gamma_rejects_nonpositive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn e1_reference_values() {
        let cases = [
            (0.7, 0.373_768_843_233_509_144_3),
            (2.0, 0.048_900_510_708_061_119_57),
            (11.5, 8.149_828_770_671_901e-7),
            (13.8, 6.890_451_641_697_468e-8),
        ];
        for (x, want) in cases {
            let got = exp_integral_e1(x);
            assert!(
                ((got - want) / want).abs() < 1e-12,
                "x={x}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn phi_anchors() {
        let ev = PhiEvaluator::new(100_000).unwrap();
        assert!((ev.phi(0.0).unwrap().value - 1.0).abs() < 1e-12);
        assert!((ev.phi(1.0).unwrap().value - 1.0).abs() < 1e-12);
        assert_eq!(
            ev.phi(1.0).unwrap().tail_bound,
            ev.phi(1.0).unwrap().tail_bound
        );
    }

    #[test]
    fn phi_domain() {
        let ev = PhiEvaluator::new(1000).unwrap();
        assert!(matches!(ev.phi(1.96), Err(LabError::PoleProximity { .. })));
        assert!(matches!(ev.phi(2.0), Err(LabError::PoleProximity { .. })));
        assert!(matches!(ev.phi(-0.1), Err(LabError::Domain(_))));
        assert!(ev.phi(1.95).is_ok());
        assert!(PhiEvaluator::new(50).is_err());
    }

    #[test]
    fn phi_is_positive_on_grid() {
        let ev = PhiEvaluator::new(10_000).unwrap();
        let mut z = 0.0;
        while z <= 1.9 {
            assert!(ev.phi(z).unwrap().value > 0.0, "z={z}");
            z += 0.05;
        }
    }

    #[test]
    fn doubling_cutoff_stays_inside_tail_bound() {
        let small = PhiEvaluator::new(50_000).unwrap();
        let large = PhiEvaluator::new(100_000).unwrap();
        for z in [0.25, 0.5, 1.0, 1.5] {
            let a = small.phi(z).unwrap();
            let b = large.phi(z).unwrap();
            assert!(
                (a.value - b.value).abs() <= a.tail_bound,
                "z={z}: shift {} bound {}",
                (a.value - b.value).abs(),
                a.tail_bound
            );
        }
    }

    #[test]
    fn sathe_structure_at_m_one() {
        let ev = PhiEvaluator::new(100_000).unwrap();
        let n = 10_000_000u64;
        let pred = sathe_predict(n, 1, 0.1, &ev).unwrap();
        assert!(pred.in_range);
        let log_n = (n as f64).ln();
        let want = n as f64 / log_n * ev.phi(1.0 / log_n.ln()).unwrap().value;
        assert!((pred.main_term.unwrap() / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sathe_range_flag() {
        let ev = PhiEvaluator::new(1000).unwrap();
        let pred = sathe_predict(10_000_000, 8, 0.1, &ev).unwrap();
        assert!(!pred.in_range);
        // 8 / log log 10^7 is past the pole at 2
        assert!(pred.main_term.is_none());
        let pred = sathe_predict(10_000_000, 5, 0.1, &ev).unwrap();
        assert!(pred.in_range);
        let pred = sathe_predict(10_000_000, 5, 0.3, &ev).unwrap();
        assert!(!pred.in_range);
    }

    #[test]
    fn sathe_rejects_bad_input() {
        let ev = PhiEvaluator::new(1000).unwrap();
        assert!(sathe_predict(2, 1, 0.1, &ev).is_err());
        assert!(sathe_predict(100, 0, 0.1, &ev).is_err());
        assert!(sathe_predict(100, 1, 0.0, &ev).is_err());
        assert!(sathe_predict(100, 1, 1.0, &ev).is_err());
    }

    #[test]
    fn sathe_main_term_positive() {
        let ev = PhiEvaluator::new(1000).unwrap();
        for n in [3u64, 10, 1000, 1_000_000] {
            for m in 1..=4 {
                if let Some(t) = sathe_predict(n, m, 0.5, &ev).unwrap().main_term {
                    assert!(t > 0.0, "n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn sathe_band_at_one_million_m_two() {
        let sieve = FactorSieve::new(1_000_000).unwrap();
        let table = sieve.count_table();
        let ev = PhiEvaluator::from_sieve(&sieve).unwrap();
        let pred = sathe_predict(1_000_000, 2, 0.1, &ev).unwrap();
        let ratio = pred.ratio(table.counts()[2]).unwrap();
        assert!((0.6..=1.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn delta_eps_values() {
        let at_zero = delta_eps(0.0).unwrap();
        assert!((at_zero - (1.0 - LN_2) / 4.0).abs() < 1e-16);
        assert!((at_zero - 0.076_713_2).abs() < 1e-7);
        assert!(delta_eps(0.5).unwrap() > at_zero);
        assert!(delta_eps(-0.1).is_err());
    }

    #[test]
    fn delta_eps_is_linear_near_zero() {
        // δ'(0) = (log 2) / 4 by differentiating e^{−ε}(1 + log 2 + ε)
        let slope = LN_2 / 4.0;
        let base = delta_eps(0.0).unwrap();
        for h in [0.1, 0.01, 0.001] {
            let fd = (delta_eps(h).unwrap() - base) / h;
            // second-order remainder shrinks with h
            assert!((fd - slope).abs() < h, "h={h}: {fd}");
        }
    }

    #[test]
    fn l2_exponent_values() {
        assert!((l2_exponent_y(0.0) + (1.0 - LN_2) / 4.0).abs() < 1e-16);
        assert!(l2_exponent_y(LN_2).abs() < 1e-15);
        assert!((l2_exponent_y(0.21556) + 0.04174).abs() < 1e-5);
    }
}
