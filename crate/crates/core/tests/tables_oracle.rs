mod common;

use siegellab::character::build_character_table;
use siegellab::convolution::{verify_all, Identity};
use siegellab::sieve::build_fun_tables;

const N: usize = 10_000;

#[test]
fn tables_match_divisor_enumeration() {
    for delta in [-3, -4, 5, 8, -7] {
        let chi = build_character_table(delta, 100_000).unwrap();
        let t = build_fun_tables(N, &chi).unwrap();
        for n in (1..=N as u64).filter(|n| n % 7 == 1 || *n <= 500) {
            let divs = common::divisors(n);
            let ni = n as usize;
            let mu = common::mu(n);
            assert_eq!(t.mu[ni] as i64, mu, "mu({n})");
            assert_eq!(t.tau[ni] as usize, divs.len(), "tau({n})");
            let tau3: usize = divs.iter().map(|&d| common::divisors(d).len()).sum();
            assert_eq!(t.tau3[ni] as usize, tau3, "tau3({n})");
            let lambda: i64 = divs.iter().map(|&d| common::chi(delta, d)).sum();
            assert_eq!(t.lambda[ni] as i64, lambda, "lambda({n}) delta {delta}");
            let nu: i64 = divs
                .iter()
                .map(|&d| common::mu(d) * common::mu(n / d) * common::chi(delta, n / d))
                .sum();
            assert_eq!(t.nu[ni] as i64, nu, "nu({n}) delta {delta}");
            assert!((t.biglambda[ni] - common::von_mangoldt(n)).abs() < 1e-12);
            let lp: f64 = divs
                .iter()
                .map(|&d| common::chi(delta, d) as f64 * ((n / d) as f64).ln())
                .sum();
            assert!((t.lambda_prime[ni] - lp).abs() < 1e-9, "lambda'({n})");
        }
    }
}

#[test]
fn all_identities_hold() {
    for delta in [-3, -4, 5] {
        let chi = build_character_table(delta, 100_000).unwrap();
        let t = build_fun_tables(N, &chi).unwrap();
        for r in verify_all(N, &t).unwrap() {
            assert_eq!(r.violations, 0, "delta {delta}: {r:?}");
            assert!(r.checked > 0, "{}", r.name);
        }
    }
}

#[test]
fn identity_names_round_trip() {
    for id in Identity::ALL {
        assert_eq!(id.name().parse::<Identity>().unwrap(), id);
    }
    assert!("no_such_identity".parse::<Identity>().is_err());
}
