mod common;

use siegellab::character::build_character_table;
use siegellab::progressions::{
    bt_rough_prime_count, count_primes_in_class, main_term_chi, main_term_deviation, psi,
    psi_class, psi_progression, psi_star_split, shiu_ratio, tilt_exponent, tilted_majorant,
    tilted_progression_sum, ProgressionQuery, ShiuFunction,
};
use siegellab::sieve::{build_fun_tables, build_spf, FunTables};

fn tables(delta: i64, limit: usize) -> FunTables {
    build_fun_tables(limit, &build_character_table(delta, 1_000_000).unwrap()).unwrap()
}

#[test]
fn psi_matches_trial_division() {
    let t = tables(-4, 3000);
    for x in [1usize, 2, 10, 97, 1000, 3000] {
        let direct: f64 = (1..=x as u64).map(common::von_mangoldt).sum();
        assert!((psi(x, &t).unwrap() - direct).abs() < 1e-9, "x = {x}");
    }
    for (q, a) in [(4, 1), (4, 3), (7, 3), (12, 5), (97, 96), (101, 5)] {
        let direct: f64 = (1..=3000u64)
            .filter(|n| n % q == a)
            .map(common::von_mangoldt)
            .sum();
        let query = ProgressionQuery::new(3000, q, a).unwrap();
        assert!((psi_progression(&query, &t).unwrap() - direct).abs() < 1e-9);
    }
}

#[test]
fn psi_additivity() {
    let t = tables(5, 100_000);
    for x in [10_000usize, 100_000] {
        let total = psi(x, &t).unwrap();
        for q in [2u64, 7, 30, 97, 143, 200] {
            let s: f64 = (0..q).map(|r| psi_class(x, q, r, &t).unwrap()).sum();
            assert!((s - total).abs() <= 1e-9 * total, "x {x} q {q}");
        }
    }
}

#[test]
fn split_is_exact_on_sampled_queries() {
    for delta in [-3, -4, 5] {
        let t = tables(delta, 100_000);
        for x in [10_000usize, 100_000] {
            for q in [7u64, 97, 101, 143] {
                let second = (2..q).find(|&a| common::gcd(a, q) == 1).unwrap();
                for a in [1, second, q - 1] {
                    let query = ProgressionQuery::new(x, q, a).unwrap();
                    let s = psi_star_split(&query, &t).unwrap();
                    let direct = psi_progression(&query, &t).unwrap();
                    assert!(
                        (s.psi_star + s.psi_lower_star - direct).abs() < 1e-6,
                        "{delta} {x} {q} {a}"
                    );
                }
            }
        }
    }
}

#[test]
fn split_matches_oracle_double_loop() {
    let delta = -3;
    let t = tables(delta, 600);
    let dstar = t.dstar();
    let nu = |n: u64| -> f64 {
        common::divisors(n)
            .iter()
            .map(|&d| (common::mu(d) * common::mu(n / d) * common::chi(delta, n / d)) as f64)
            .sum()
    };
    let lp = |n: u64| -> f64 {
        common::divisors(n)
            .iter()
            .map(|&d| common::chi(delta, d) as f64 * ((n / d) as f64).ln())
            .sum()
    };
    let (x, q, a) = (600u64, 7u64, 3u64);
    let (mut star, mut lower) = (0.0, 0.0);
    for d in 1..=x {
        for m in 1..=x / d {
            if (d * m) % q == a {
                let v = nu(d) * lp(m);
                if d <= dstar {
                    star += v;
                } else {
                    lower += v;
                }
            }
        }
    }
    let s = psi_star_split(&ProgressionQuery::new(600, q, a).unwrap(), &t).unwrap();
    assert!((s.psi_star - star).abs() < 1e-8);
    assert!((s.psi_lower_star - lower).abs() < 1e-8);
}

#[test]
fn main_term_character_argument() {
    for delta in [-3i64, -4, 5, 8, -7, 12] {
        let chi = build_character_table(delta, 100_000).unwrap();
        let d = delta.unsigned_abs();
        for q in 2..60u64 {
            for a in (1..q).filter(|&a| common::gcd(a, q) == 1) {
                let arg = a * (d / common::gcd(q, d));
                assert_eq!(
                    main_term_chi(q, a, &chi) as i64,
                    common::chi(delta, arg),
                    "{delta} {q} {a}"
                );
            }
        }
    }
    let t = tables(5, 100_000);
    let r = main_term_deviation(&ProgressionQuery::new(100_000, 3, 2).unwrap(), &t, 0.5).unwrap();
    assert_eq!(r.chi_term, 0);
    let expect = (r.psi_prog * 2.0 / r.psi_all - 1.0).abs();
    assert!((r.normalized_error - expect).abs() < 1e-15);
}

#[test]
fn bt_counts_match_trial_division() {
    let sieve = build_spf(20_000).unwrap();
    for delta in [5i64, -4, -3] {
        let chi = build_character_table(delta, 100_000).unwrap();
        for (q, a) in [(3u64, 1u64), (3, 2), (10, 3), (101, 5)] {
            let direct = (2..=20_000u64)
                .filter(|&p| p % q == a && common::is_prime(p) && common::chi(delta, p) == 1)
                .count() as u64;
            assert_eq!(
                bt_rough_prime_count(20_000, q, a, &chi, &sieve)
                    .unwrap()
                    .count,
                direct
            );
        }
    }
    // with the condition on χ dropped the count is π(x; q, a)
    for (q, a) in [(3u64, 1u64), (4, 3), (101, 5)] {
        let direct = (2..=20_000u64)
            .filter(|&p| p % q == a && common::is_prime(p))
            .count() as u64;
        assert_eq!(
            count_primes_in_class(20_000, q, a, &sieve, |_| true),
            direct
        );
    }
}

#[test]
fn tilted_sum_example() {
    let t = tables(-4, 100_000);
    let (x, q, a) = (100_000usize, 101u64, 5u64);
    let sigma = tilt_exponent(t.character.l_one, x);
    let direct: f64 = (50_001..=100_000u64)
        .filter(|n| n % q == a)
        .map(|n| t.lambda[n as usize] as f64 * (n as f64).powf(-sigma))
        .sum();
    let tilted = tilted_progression_sum(&t.lambda, x, q, a, sigma).unwrap();
    assert!((tilted - direct).abs() <= 1e-9 * direct);
    let plain = tilted_progression_sum(&t.lambda, x, q, a, 0.0).unwrap();
    assert!((x as f64 / 2.0).powf(sigma) * tilted >= plain);
    // σ* < 0 here, so the majorant with −σ* is not claimed to dominate
    assert!(sigma < 0.0);
    assert!(tilted_majorant(&t.lambda, x, q, a, t.character.l_one)
        .unwrap()
        .is_finite());
}

#[test]
fn tilted_majorant_dominates_for_small_l_one() {
    // a pretend L(1) below 1/log x gives σ* ≥ 0, where the majorant must dominate
    let t = tables(-4, 50_000);
    let x = 50_000;
    let l_one = 0.5 / (x as f64).ln();
    assert!(tilt_exponent(l_one, x) >= 0.0);
    for (q, a) in [(7u64, 3u64), (101, 5), (143, 142)] {
        let plain = tilted_progression_sum(&t.lambda, x, q, a, 0.0).unwrap();
        assert!(tilted_majorant(&t.lambda, x, q, a, l_one).unwrap() >= plain);
    }
}

#[test]
fn shiu_lhs_matches_direct_sum() {
    let t = tables(-4, 100_000);
    let r = shiu_ratio(
        ShiuFunction::TauKPower { k: 2, t: 1 },
        100_000,
        50_000,
        101,
        5,
        &t,
    )
    .unwrap();
    let direct: f64 = (50_001..=100_000u64)
        .filter(|n| n % 101 == 5)
        .map(|n| t.tau[n as usize] as f64)
        .sum();
    assert_eq!(r.lhs, direct);
    let expect_rhs = 50_000.0 / 101.0 * (100.0 / 101.0 * (100_000f64).ln());
    assert!((r.rhs - expect_rhs).abs() < 1e-6 * expect_rhs);
    assert!(r.ratio <= 20.0);
    let again = shiu_ratio(
        ShiuFunction::TauKPower { k: 2, t: 1 },
        100_000,
        50_000,
        101,
        5,
        &t,
    )
    .unwrap();
    assert_eq!(r, again);

    let r = shiu_ratio(ShiuFunction::LambdaSqTau, 100_000, 50_000, 101, 5, &t).unwrap();
    let prime_sum: f64 = (2..=100_000u64)
        .filter(|&p| common::is_prime(p))
        .map(|p| {
            let l = t.lambda[p as usize] as f64;
            l * l * 2.0 / p as f64
        })
        .sum();
    let rhs = 50_000.0 / (101.0 * (100_000f64).ln()) * prime_sum.exp();
    assert!((r.rhs - rhs).abs() < 1e-6 * rhs);
    assert!(r.ratio.is_finite());
}
