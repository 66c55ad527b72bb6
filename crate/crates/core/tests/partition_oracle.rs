mod common;

use siegellab::character::build_character_table;
use siegellab::partition::{
    count_smooth, j_e_split_sums, reciprocal_gcd_sum, t_sums, PartitionParams,
};
use siegellab::sieve::{build_spf, FunTables};

fn lambda(delta: i64, n: u64) -> f64 {
    common::divisors(n)
        .iter()
        .map(|&d| common::chi(delta, d))
        .sum::<i64>() as f64
}

fn setup(delta: i64, limit: usize) -> (FunTables, siegellab::SpfSieve) {
    let chi = build_character_table(delta, 100_000).unwrap();
    let sieve = build_spf(limit).unwrap();
    (FunTables::build(&sieve, &chi).unwrap(), sieve)
}

/// Every ordered factorization n = d·m₁·m₂ over the window, by trial division.
fn brute_t(delta: i64, x: u64, q: u64, a: u64, dstar: u64, p: &PartitionParams) -> [f64; 5] {
    let xf = x as f64;
    let small = xf.powf(1.0 - p.theta - p.alpha);
    let cap = xf.powf(2.0 * p.theta - 1.0 + 2.0 * p.alpha);
    let mut t = [0.0; 5];
    for n in x.div_ceil(2)..=x {
        if n % q != a {
            continue;
        }
        for d in common::divisors(n).into_iter().filter(|&d| d > dstar) {
            for m1 in common::divisors(n / d) {
                let big = common::von_mangoldt(m1);
                if big == 0.0 {
                    continue;
                }
                let m2 = n / d / m1;
                let mass = lambda(delta, d) * big * lambda(delta, m2);
                let slot = if m2 <= dstar {
                    0
                } else if (d as f64) < small {
                    1
                } else if (m2 as f64) < small {
                    2
                } else if (m1 as f64) <= cap {
                    3
                } else {
                    4
                };
                t[slot] += mass;
            }
        }
    }
    t
}

#[test]
fn t_sums_match_brute_force() {
    for (delta, q, a, theta) in [
        (-3i64, 97u64, 5u64, 0.5),
        (-4, 31, 7, 0.45),
        (5, 13, 2, 0.3),
        (-3, 7, 3, 0.6),
    ] {
        let x = 1500;
        let (t, _) = setup(delta, x);
        let p = PartitionParams::new(theta, 0.01).unwrap();
        let r = t_sums(x, q, a, &p, &t).unwrap();
        let b = brute_t(delta, x as u64, q, a, t.dstar(), &p);
        let got = [r.t1, r.t2, r.t3, r.t4, r.unclassified];
        for (g, e) in got.iter().zip(b) {
            assert!((g - e).abs() < 1e-8, "{delta} {q}: {got:?} vs {b:?}");
        }
        assert_eq!(b[4], 0.0);
    }
}

#[test]
fn t_inequality_on_grid() {
    let (t, _) = setup(-3, 100_000);
    for x in [10_000usize, 100_000] {
        for q in [97u64, 101] {
            for theta in [0.45, 0.5] {
                let p = PartitionParams::new(theta, 0.01).unwrap();
                let r = t_sums(x, q, 5, &p, &t).unwrap();
                assert!(r.inequality_holds, "{r:?}");
                assert_eq!(r.unclassified_triples, 0);
                assert!(r.conservation_gap() <= 1e-6 * r.total_mass.max(1.0));
            }
        }
    }
}

#[test]
fn je_matches_brute_force() {
    let delta = -3;
    let x = 3000u64;
    let (t, s) = setup(delta, x as usize);
    let dstar = t.dstar();
    for (q, a, alpha) in [(97u64, 5u64, 0.01), (13, 2, 0.05), (4, 1, 0.03)] {
        let p = PartitionParams::new(0.5, alpha).unwrap();
        let r = j_e_split_sums(x as usize, q, a, &p, &t, &s).unwrap();
        let edge = x as f64 / (2.0 * (q as f64).powf(1.0 + alpha));
        let j1 = (x as f64).powf(alpha);
        let j2 = (x as f64).sqrt() / (2f64.sqrt() * (q as f64).powf((1.0 + alpha) / 2.0));
        let mut b = [0.0f64; 9];
        for d in (dstar + 1)..=x {
            let ld = lambda(delta, d);
            for m in x.div_ceil(2).div_ceil(d).max(1)..=x / d {
                if (d * m) % q != a || d * m < x.div_ceil(2) {
                    continue;
                }
                b[8] += ld;
                if (d as f64) <= edge {
                    b[0] += ld;
                    continue;
                }
                if (m as f64) <= edge {
                    b[1] += ld;
                    continue;
                }
                b[7] += ld;
                let f = common::factor(d);
                let part = |s: i64| -> u64 {
                    f.iter()
                        .filter(|&&(p, _)| common::chi(delta, p) == s)
                        .map(|&(p, e)| p.pow(e))
                        .product()
                };
                let (d1, dm1, d0) = (part(1), part(-1), part(0));
                let slot = if d0 > 1 {
                    6
                } else {
                    let ds = (dm1 as f64).sqrt().floor();
                    if ds < j1 {
                        let e1 = common::divisors(d1)
                            .iter()
                            .any(|&t| t >= dstar && (t as f64) <= (x as f64).cbrt());
                        if e1 {
                            2
                        } else {
                            3
                        }
                    } else if ds <= j2 {
                        4
                    } else {
                        5
                    }
                };
                b[slot] += ld;
            }
        }
        let got = [
            r.edge_small_d,
            r.edge_small_m,
            r.j1_e1,
            r.j1_e2,
            r.j2,
            r.j3,
            r.d0_nontrivial,
            r.middle_total,
            r.total,
        ];
        for (g, e) in got.iter().zip(b) {
            assert!((g - e).abs() < 1e-9, "q {q}: {got:?} vs {b:?}");
        }
    }
}

#[test]
fn je_conservation_on_grid() {
    let (t, s) = setup(-3, 100_000);
    for x in [10_000usize, 100_000] {
        for q in [97u64, 101] {
            for theta in [0.45, 0.5] {
                let p = PartitionParams::new(theta, 0.01).unwrap();
                let r = j_e_split_sums(x, q, 5, &p, &t, &s).unwrap();
                assert!(r.middle_gap() <= 1e-6 && r.total_gap() <= 1e-6, "{r:?}");
            }
        }
    }
}

#[test]
fn reciprocal_gcd_matches_direct_loop() {
    for q in (2..=600u64).chain([1024, 5040, 9973, 10_000]) {
        for alpha in [0.0, 0.02, 0.05] {
            let thr = (q as f64).powf(0.2 - alpha);
            let direct: f64 = (1..q)
                .filter(|&r| common::gcd(r, q) as f64 > thr)
                .map(|r| 1.0 / r as f64)
                .sum();
            let r = reciprocal_gcd_sum(q, alpha);
            assert!((r.sum - direct).abs() < 1e-9, "q {q}");
            assert!((r.bound - (q as f64).powf(-0.2 + 3.0 * alpha)).abs() < 1e-12);
        }
    }
}

#[test]
fn smooth_counts_match_trial_division() {
    let s = build_spf(5000).unwrap();
    for (y, z) in [
        (10usize, 2usize),
        (100, 1),
        (5000, 7),
        (5000, 70),
        (4321, 100),
        (2000, 2000),
    ] {
        let direct = (1..=y as u64)
            .filter(|&n| common::factor(n).last().is_none_or(|&(p, _)| p <= z as u64))
            .count() as u64;
        assert_eq!(count_smooth(y, z, &s).unwrap(), direct, "({y}, {z})");
    }
}
