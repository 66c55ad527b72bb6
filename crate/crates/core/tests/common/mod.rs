//! Slow, independent reference implementations shared by the integration tests.
#![allow(dead_code)]

pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|p| p * p <= n).all(|p| n % p != 0)
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// (delta | p) for a prime p: Euler's criterion, and the mod-8 rule at 2.
pub fn chi_prime(delta: i64, p: u64) -> i64 {
    if p == 2 {
        return match delta.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
    }
    let r = delta.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Completely multiplicative extension of `chi_prime`.
pub fn chi(delta: i64, n: u64) -> i64 {
    factor(n)
        .iter()
        .map(|&(p, e)| chi_prime(delta, p).pow(e))
        .product()
}

pub fn mu(n: u64) -> i64 {
    let f = factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn von_mangoldt(n: u64) -> f64 {
    let f = factor(n);
    if f.len() == 1 {
        (f[0].0 as f64).ln()
    } else {
        0.0
    }
}

/// Number of reduced forms of discriminant disc < 0, and w.
pub fn class_number(disc: i64) -> (u64, u64) {
    let d = -disc;
    let mut h = 0;
    let mut a = 1i64;
    while 3 * a * a <= d {
        for b in -a + 1..=a {
            let num = b * b + d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a {
                continue;
            }
            if b < 0 && a == c {
                continue;
            }
            let g = gcd(gcd(a as u64, b.unsigned_abs()), c as u64);
            if g == 1 {
                h += 1;
            }
        }
        a += 1;
    }
    let w = match disc {
        -3 => 6,
        -4 => 4,
        _ => 2,
    };
    (h, w)
}
