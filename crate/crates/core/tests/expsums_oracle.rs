mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siegellab::expsums::{kloosterman_max_avg, kloosterman_primes, mod_inverse};
use siegellab::sieve::build_spf;

fn scan_inverse(a: u64, q: u64) -> u64 {
    (1..q).find(|b| a * b % q == 1).unwrap()
}

fn oracle_s(x: u64, q: u64, a: u64) -> (Complex64, u64) {
    let mut s = Complex64::new(0.0, 0.0);
    let mut count = 0;
    for p in x.div_ceil(2)..=x {
        if common::is_prime(p) && common::gcd(p, q) == 1 {
            let k = a * scan_inverse(p % q, q) % q;
            s += Complex64::from_polar(1.0, 2.0 * PI * k as f64 / q as f64);
            count += 1;
        }
    }
    (s, count)
}

#[test]
fn inverse_examples_and_scan() {
    assert_eq!(mod_inverse(3, 7).unwrap(), 5);
    assert_eq!(mod_inverse(2, 9).unwrap(), 5);
    assert!(mod_inverse(2, 4).is_err());
    for q in 2..=200u64 {
        for a in (1..q).filter(|&a| common::gcd(a, q) == 1) {
            assert_eq!(mod_inverse(a, q).unwrap(), scan_inverse(a, q));
        }
    }
}

#[test]
fn kloosterman_matches_scan_oracle() {
    let x = 10_000u64;
    let sieve = build_spf(x as usize).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut done = 0;
    while done < 20 {
        let q = rng.gen_range(2..=500u64);
        let a = rng.gen_range(1..q);
        if common::gcd(a, q) != 1 {
            continue;
        }
        let r = kloosterman_primes(x as usize, q, a, &sieve).unwrap();
        let (s, count) = oracle_s(x, q, a);
        assert!((r.s_value - s).norm() < 1e-9, "q {q} a {a}");
        assert_eq!(r.trivial_bound, count);
        assert!(r.abs_s <= count as f64);
        let c = kloosterman_primes(x as usize, q, q - a, &sieve).unwrap();
        assert!((c.s_value - r.s_value.conj()).norm() < 1e-10);
        done += 1;
    }
}

#[test]
fn specific_value_q101() {
    let sieve = build_spf(10_000).unwrap();
    let r = kloosterman_primes(10_000, 101, 7, &sieve).unwrap();
    let (s, count) = oracle_s(10_000, 101, 7);
    assert!((r.s_value - s).norm() < 1e-9);
    assert!(r.abs_s <= count as f64);
    assert!((r.fs_ratio - r.abs_s / 101f64.powf(15.0 / 16.0)).abs() < 1e-12);
}

#[test]
fn max_avg_matches_oracle() {
    let x = 2000u64;
    let sieve = build_spf(x as usize).unwrap();
    let r = kloosterman_max_avg(x as usize, 12, &sieve).unwrap();
    assert_eq!(
        r.per_q_max.iter().map(|e| e.q).collect::<Vec<_>>(),
        (12..=24).collect::<Vec<_>>()
    );
    let mut total = 0.0;
    for e in &r.per_q_max {
        let best = (1..e.q)
            .filter(|&a| common::gcd(a, e.q) == 1)
            .map(|a| oracle_s(x, e.q, a).0.norm())
            .fold(0.0, f64::max);
        assert!((e.abs_s - best).abs() < 1e-9, "q {}", e.q);
        assert!((oracle_s(x, e.q, e.a_max).0.norm() - best).abs() < 1e-9);
        total += best;
    }
    assert!((r.total - total).abs() < 1e-8);
    assert!((r.irving_ratio - r.total / 12f64.powf(1.9)).abs() < 1e-12);
    let r = kloosterman_max_avg(10_000, 50, &build_spf(10_000).unwrap()).unwrap();
    assert!(r.irving_ratio.is_finite());
}
