use proptest::prelude::*;
use rmf_core::chaos::{draw_sample, estimate_moment, SamplerConfig};
use rmf_core::moments::{
    energy_brute, energy_fast, fourth_moment_homog_brute, fourth_moment_homog_identity, ratio_4_2,
    DEFAULT_PAIR_BUDGET,
};
use rmf_core::sieve::FactorSieve;
use std::sync::OnceLock;

fn sieve_10k() -> &'static FactorSieve {
    static S: OnceLock<FactorSieve> = OnceLock::new();
    S.get_or_init(|| FactorSieve::new(10_000).unwrap())
}

#[test]
fn partition_holds_for_every_n_up_to_ten_thousand() {
    let table = sieve_10k().count_table();
    for n in 1..=10_000usize {
        let total: u64 = (0..=table.max_m())
            .map(|m| table.e_count(n, m).unwrap())
            .sum();
        assert_eq!(total, n as u64, "n = {n}");
    }
    assert_eq!(table.counts()[0], 1);
    assert_eq!(table.counts()[1], sieve_10k().primes().len() as u64);
}

#[test]
fn omega_is_additive_over_primes() {
    let s = sieve_10k();
    for n in 1..=10_000usize {
        for &p in s.primes() {
            let pn = p as usize * n;
            if pn > s.limit() {
                break;
            }
            assert_eq!(s.omega(pn), s.omega(n) + 1);
        }
    }
}

#[test]
fn spf_and_squarefree_invariants() {
    let s = sieve_10k();
    for n in 2..=10_000usize {
        let p = s.spf(n) as usize;
        assert_eq!(n % p, 0);
        assert_eq!(p == n, s.is_prime(n));
        assert_eq!(s.omega(n), s.omega(n / p) + 1);
        let has_square = (2..=100).any(|d| n % (d * d) == 0);
        assert_eq!(s.is_squarefree(n), !has_square, "n = {n}");
    }
}

#[test]
fn count_table_members_are_sorted_levels() {
    let s = sieve_10k();
    let table = s.count_table();
    for m in 0..=table.max_m() {
        let members = table.members(m);
        assert_eq!(members.len() as u64, table.counts()[m]);
        assert!(members.windows(2).all(|w| w[0] < w[1]));
        assert!(members.iter().all(|&n| s.omega(n as usize) == m as u32));
    }
}

#[test]
fn energy_fast_matches_brute_exhaustively() {
    let s = FactorSieve::new(300).unwrap();
    for n in 1..=300 {
        assert_eq!(
            energy_fast(n, &s).unwrap().energy,
            energy_brute(n).unwrap().energy,
            "N = {n}"
        );
    }
}

#[test]
fn homogeneous_moments_sum_of_squares_is_n() {
    let s = FactorSieve::new(5000).unwrap();
    let t = s.count_table();
    for n in [10usize, 100, 1000, 5000] {
        let total: u64 = (0..=t.max_m())
            .map(|m| {
                fourth_moment_homog_brute(n, m as u32, &t)
                    .unwrap()
                    .l2_squared
            })
            .sum();
        assert_eq!(total, n as u64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factorization_multiplies_back(n in 1usize..=10_000) {
        let f = sieve_10k().factorize(n).unwrap();
        prop_assert_eq!(f.iter().map(|&p| p as usize).product::<usize>(), n);
        prop_assert_eq!(f.len() as u32, sieve_10k().omega(n));
        prop_assert!(f.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn e_count_is_monotone_in_x(m in 0usize..=13, x in 0usize..9_999) {
        let t = sieve_10k().count_table();
        prop_assert!(t.e_count(x, m).unwrap() <= t.e_count(x + 1, m).unwrap());
    }

    #[test]
    fn homog_identity_bounds(n in 1usize..=600, m in 0u32..=9) {
        let t = FactorSieve::new(600).unwrap().count_table();
        let h = fourth_moment_homog_identity(n, m, &t, DEFAULT_PAIR_BUDGET).unwrap();
        prop_assert!(h.l4_fourth >= h.l2_squared * h.l2_squared);
        prop_assert_eq!((h.l4_fourth - h.l2_squared * h.l2_squared) % 2, 0);
        if h.l2_squared > 0 {
            prop_assert!(ratio_4_2(&h).unwrap() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn steinhaus_sample_is_completely_multiplicative(seed in any::<u64>(), index in 0u64..1000) {
        let s = sieve_10k();
        let cfg = SamplerConfig::steinhaus(10_000, seed, 1);
        let x = draw_sample(&cfg, s, index).unwrap();
        let mut state = seed ^ index;
        for _ in 0..1000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = 1 + (state >> 33) as usize % 100;
            let b = 1 + (state >> 13) as usize % (10_000 / a);
            prop_assert!((x.value(a * b) - x.value(a) * x.value(b)).norm() < 1e-10);
        }
    }
}

#[test]
fn worker_count_does_not_change_estimates() {
    let s = FactorSieve::new(500).unwrap();
    let base = SamplerConfig::steinhaus(500, 99, 3000);
    for q in [0.5, 1.0, 4.0] {
        let one = estimate_moment(&base.with_workers(1), &s, q, None).unwrap();
        let four = estimate_moment(&base.with_workers(4), &s, q, None).unwrap();
        assert_eq!(one.mean.to_bits(), four.mean.to_bits());
        assert_eq!(one.stderr.to_bits(), four.stderr.to_bits());
    }
}
