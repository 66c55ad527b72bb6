//! Modular inverses, Kloosterman-type sums over primes and geometric sums of
//! additive characters.
//!
//! Sums over primes are taken over the window ⌈x/2⌉ ≤ p ≤ x and grouped by
//! p mod q first, so S(x, q, a) = Σ_r c_r e_q(a r̄) with c_r the number of
//! window primes in the class r. The roundoff is at most about |window| · 2⁻⁵⁰.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{gcd, CompensatedComplexSum};
use crate::sieve::SpfSieve;

/// Cap on Σ_q φ(q) · (occupied classes mod q) for the max-over-a scan.
pub const MAX_AVG_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpSumError {
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(u64),
    #[error("{a} is not invertible modulo {q}")]
    NotInvertible { a: u64, q: u64 },
    #[error("x = {x} exceeds sieve limit {limit}")]
    XExceedsLimit { x: usize, limit: usize },
    #[error("max-over-a scan needs {needed} operations, over the budget of {budget}; use a smaller Q or x")]
    Budget { needed: u64, budget: u64 },
}

/// b with a·b ≡ 1 (mod q) and 0 < b < q.
pub fn mod_inverse(a: u64, q: u64) -> Result<u64, ExpSumError> {
    if q < 2 {
        return Err(ExpSumError::ModulusTooSmall(q));
    }
    let (mut old_r, mut r) = ((a % q) as i128, q as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let k = old_r / r;
        (old_r, r) = (r, old_r - k * r);
        (old_s, s) = (s, old_s - k * s);
    }
    if old_r != 1 {
        return Err(ExpSumError::NotInvertible { a, q });
    }
    Ok(old_s.rem_euclid(q as i128) as u64)
}

/// Inverses of every entry, with one extended-gcd call (Montgomery's trick).
pub fn batch_inverses(values: &[u64], q: u64) -> Result<Vec<u64>, ExpSumError> {
    if q < 2 {
        return Err(ExpSumError::ModulusTooSmall(q));
    }
    let mul = |x: u64, y: u64| (x as u128 * y as u128 % q as u128) as u64;
    let mut prefix = Vec::with_capacity(values.len());
    let mut acc = 1 % q;
    for &v in values {
        if gcd(v % q, q) != 1 {
            return Err(ExpSumError::NotInvertible { a: v, q });
        }
        acc = mul(acc, v % q);
        prefix.push(acc);
    }
    let mut inv = mod_inverse(acc, q)?;
    let mut out = vec![0; values.len()];
    for i in (0..values.len()).rev() {
        let before = if i == 0 { 1 } else { prefix[i - 1] };
        out[i] = mul(inv, before);
        inv = mul(inv, values[i] % q);
    }
    Ok(out)
}

/// e_q(k) for k = 0..q, built so that tw[q − k] is exactly conj(tw[k]).
pub fn twiddles(q: u64) -> Vec<Complex64> {
    let q = q as usize;
    let mut tw = vec![Complex64::new(1.0, 0.0); q];
    for k in 1..=q / 2 {
        let z = if 2 * k == q {
            Complex64::new(-1.0, 0.0)
        } else if 4 * k == q {
            Complex64::new(0.0, 1.0)
        } else {
            Complex64::from_polar(1.0, 2.0 * PI * k as f64 / q as f64)
        };
        tw[k] = z;
        tw[q - k] = z.conj();
    }
    tw
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpSumReport {
    pub x: usize,
    pub q: u64,
    pub a: u64,
    pub s_value: Complex64,
    pub abs_s: f64,
    /// window primes coprime to q
    pub trivial_bound: u64,
    /// |S| / q^{15/16}
    pub fs_ratio: f64,
    /// x^{3/4} ≤ q ≤ x^{4/3}
    pub in_theorem_range: bool,
}

/// Window primes counted by residue mod q, units only, plus their inverses.
struct ClassCounts {
    classes: Vec<(u64, u64)>,
    primes: u64,
}

fn class_counts(x: usize, q: u64, sieve: &SpfSieve) -> Result<ClassCounts, ExpSumError> {
    let mut counts = vec![0u64; q as usize];
    for p in x.div_ceil(2).max(2)..=x {
        if sieve.is_prime(p) {
            counts[p % q as usize] += 1;
        }
    }
    let residues: Vec<u64> = (0..q)
        .filter(|&r| counts[r as usize] > 0 && gcd(r, q) == 1)
        .collect();
    let inverses = batch_inverses(&residues, q)?;
    let primes = residues.iter().map(|&r| counts[r as usize]).sum();
    let classes = inverses
        .into_iter()
        .zip(&residues)
        .map(|(inv, &r)| (inv, counts[r as usize]))
        .collect();
    Ok(ClassCounts { classes, primes })
}

fn evaluate(counts: &ClassCounts, q: u64, a: u64, tw: &[Complex64]) -> Complex64 {
    let mut s = CompensatedComplexSum::new();
    for &(inv, c) in &counts.classes {
        let k = (a as u128 * inv as u128 % q as u128) as usize;
        s.add(tw[k] * c as f64);
    }
    s.value()
}

fn check_inputs(x: usize, q: u64, sieve: &SpfSieve) -> Result<(), ExpSumError> {
    if q < 2 {
        return Err(ExpSumError::ModulusTooSmall(q));
    }
    if x > sieve.limit() {
        return Err(ExpSumError::XExceedsLimit {
            x,
            limit: sieve.limit(),
        });
    }
    Ok(())
}

fn in_theorem_range(x: usize, q: u64) -> bool {
    let (xf, qf) = (x as f64, q as f64);
    xf.powf(0.75) <= qf && qf <= xf.powf(4.0 / 3.0)
}

/// S(x, q, a) = Σ_{⌈x/2⌉ ≤ p ≤ x, (p,q)=1} e_q(a p̄).
pub fn kloosterman_primes(
    x: usize,
    q: u64,
    a: u64,
    sieve: &SpfSieve,
) -> Result<ExpSumReport, ExpSumError> {
    check_inputs(x, q, sieve)?;
    let a = a % q;
    if gcd(a, q) != 1 {
        return Err(ExpSumError::NotInvertible { a, q });
    }
    let counts = class_counts(x, q, sieve)?;
    let s = evaluate(&counts, q, a, &twiddles(q));
    let abs_s = s.norm();
    Ok(ExpSumReport {
        x,
        q,
        a,
        s_value: s,
        abs_s,
        trivial_bound: counts.primes,
        fs_ratio: abs_s / (q as f64).powf(15.0 / 16.0),
        in_theorem_range: in_theorem_range(x, q),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxEntry {
    pub q: u64,
    /// smallest unit attaining the maximum
    pub a_max: u64,
    pub abs_s: f64,
    pub trivial_bound: u64,
    pub fs_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxAvgReport {
    pub x: usize,
    pub big_q: u64,
    pub per_q_max: Vec<MaxEntry>,
    pub total: f64,
    /// total / Q^{19/10}
    pub irving_ratio: f64,
}

/// Σ_{Q ≤ q ≤ 2Q} max_{(a,q)=1} |S(x, q, a)|, with q = 1 left out.
pub fn kloosterman_max_avg(
    x: usize,
    big_q: u64,
    sieve: &SpfSieve,
) -> Result<MaxAvgReport, ExpSumError> {
    check_inputs(x, 2, sieve)?;
    let lo = big_q.max(2);
    let hi = 2 * big_q;
    let window = (x + 1).saturating_sub(x.div_ceil(2).max(2)) as u64;
    let needed: u64 = (lo..=hi).map(|q| q * q.min(window)).sum();
    if needed > MAX_AVG_BUDGET {
        return Err(ExpSumError::Budget {
            needed,
            budget: MAX_AVG_BUDGET,
        });
    }
    let per_q_max: Vec<MaxEntry> = (lo..=hi)
        .into_par_iter()
        .map(|q| -> Result<MaxEntry, ExpSumError> {
            let counts = class_counts(x, q, sieve)?;
            let tw = twiddles(q);
            let mut best = (0u64, -1.0f64);
            for a in (1..q).filter(|&a| gcd(a, q) == 1) {
                let v = evaluate(&counts, q, a, &tw).norm();
                if v > best.1 {
                    best = (a, v);
                }
            }
            Ok(MaxEntry {
                q,
                a_max: best.0,
                abs_s: best.1,
                trivial_bound: counts.primes,
                fs_ratio: best.1 / (q as f64).powf(15.0 / 16.0),
            })
        })
        .collect::<Result<_, _>>()?;
    let total: f64 = per_q_max.iter().map(|e| e.abs_s).sum();
    Ok(MaxAvgReport {
        x,
        big_q,
        per_q_max,
        total,
        irving_ratio: total / (big_q as f64).powf(1.9),
    })
}

/// Σ_{m = lo}^{hi} e_q(m r) in closed form; zero for an empty interval.
pub fn geometric_interval_sum(lo: i64, hi: i64, r: i64, q: u64) -> Complex64 {
    if hi < lo {
        return Complex64::new(0.0, 0.0);
    }
    let n = (hi - lo + 1) as i128;
    let qi = q as i128;
    let r = (r as i128).rem_euclid(qi);
    if r == 0 {
        return Complex64::new(n as f64, 0.0);
    }
    // angles in units of π/q, reduced mod 2q
    let two_q = 2 * qi;
    let phase = ((lo as i128 + hi as i128) * r).rem_euclid(two_q);
    let top = (n * r).rem_euclid(two_q);
    let unit = PI / q as f64;
    let ratio = (unit * top as f64).sin() / (unit * r as f64).sin();
    Complex64::from_polar(1.0, unit * phase as f64) * ratio
}

/// min(n, 1 / (2‖r/q‖)).
pub fn geometric_bound(n: u64, r: i64, q: u64) -> f64 {
    let r = (r as i128).rem_euclid(q as i128) as u64;
    let dist = r.min(q - r) as f64 / q as f64;
    if dist == 0.0 {
        n as f64
    } else {
        (n as f64).min(1.0 / (2.0 * dist))
    }
}
