//! Real primitive Dirichlet characters given by Kronecker symbols of
//! fundamental discriminants, together with truncated evaluation of L(1, χ).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{is_squarefree, CompensatedSum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharacterError {
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("tail cutoff {cutoff} is below the modulus {modulus}")]
    TailCutoffTooSmall { cutoff: u64, modulus: u64 },
}

/// A fundamental discriminant other than 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct Discriminant(i64);

impl Discriminant {
    pub fn new(delta: i64) -> Result<Self, CharacterError> {
        if is_fundamental_discriminant(delta) {
            Ok(Discriminant(delta))
        } else {
            Err(CharacterError::NotFundamental(delta))
        }
    }

    pub fn delta(self) -> i64 {
        self.0
    }

    /// The modulus D = |delta|.
    pub fn modulus(self) -> u64 {
        self.0.unsigned_abs()
    }

    /// The cutoff D* = D².
    pub fn dstar(self) -> u64 {
        self.modulus() * self.modulus()
    }
}

impl TryFrom<i64> for Discriminant {
    type Error = CharacterError;
    fn try_from(delta: i64) -> Result<Self, Self::Error> {
        Discriminant::new(delta)
    }
}

impl From<Discriminant> for i64 {
    fn from(d: Discriminant) -> i64 {
        d.0
    }
}

impl std::fmt::Display for Discriminant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// True iff `delta` is the discriminant of a quadratic field. `delta = 1` is excluded.
pub fn is_fundamental_discriminant(delta: i64) -> bool {
    if delta == 0 || delta == 1 {
        return false;
    }
    match delta.rem_euclid(4) {
        1 => is_squarefree(delta.unsigned_abs()),
        0 => {
            let m = delta / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// Jacobi symbol (a | n) for odd positive n.
fn jacobi(mut a: u64, mut n: u64) -> i8 {
    debug_assert!(n % 2 == 1);
    a %= n;
    let mut t = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && matches!(n % 8, 3 | 5) {
            t = -t;
        }
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol without the discriminant check.
pub(crate) fn kronecker_raw(delta: i64, n: u64) -> i8 {
    if n == 0 {
        return if delta.unsigned_abs() == 1 { 1 } else { 0 };
    }
    let tz = n.trailing_zeros();
    let odd = n >> tz;
    let mut sign = 1i8;
    if tz > 0 {
        if delta % 2 == 0 {
            return 0;
        }
        let two = match delta.rem_euclid(8) {
            1 | 7 => 1,
            _ => -1,
        };
        if tz % 2 == 1 {
            sign = two;
        }
    }
    if odd == 1 {
        return sign;
    }
    let a = (delta as i128).rem_euclid(odd as i128) as u64;
    sign * jacobi(a, odd)
}

/// Kronecker symbol (delta | n) for a fundamental discriminant `delta`.
pub fn kronecker(delta: i64, n: u64) -> Result<i8, CharacterError> {
    if !is_fundamental_discriminant(delta) {
        return Err(CharacterError::NotFundamental(delta));
    }
    Ok(kronecker_raw(delta, n))
}

/// One period of χ = (delta | ·) plus a truncated L(1, χ) with a rigorous tail bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterTable {
    pub disc: Discriminant,
    pub values: Vec<i8>,
    pub l_one: f64,
    pub l_one_error: f64,
    pub tail_cutoff: u64,
}

impl CharacterTable {
    #[inline]
    pub fn chi(&self, n: u64) -> i8 {
        self.values[(n % self.values.len() as u64) as usize]
    }

    pub fn modulus(&self) -> u64 {
        self.disc.modulus()
    }

    pub fn dstar(&self) -> u64 {
        self.disc.dstar()
    }
}

/// Tail cutoff used when none is given: max(10⁶, D).
pub fn default_tail_cutoff(delta: i64) -> u64 {
    delta.unsigned_abs().max(1_000_000)
}

/// Builds the period table and sums Σ_{n≤N} χ(n)/n with N = `tail_cutoff`.
///
/// The partial sums of χ are bounded by D/2 because a full period vanishes, so
/// Abel summation bounds the discarded tail by D/(N+1) < D/N.
pub fn build_character_table(
    delta: i64,
    tail_cutoff: u64,
) -> Result<CharacterTable, CharacterError> {
    let disc = Discriminant::new(delta)?;
    let d = disc.modulus();
    if tail_cutoff < d {
        return Err(CharacterError::TailCutoffTooSmall {
            cutoff: tail_cutoff,
            modulus: d,
        });
    }
    let values: Vec<i8> = (0..d).map(|n| kronecker_raw(delta, n)).collect();
    let mut acc = CompensatedSum::new();
    let mut r = 1usize;
    let period = values.len();
    for n in 1..=tail_cutoff {
        let c = values[r];
        if c != 0 {
            acc.add(c as f64 / n as f64);
        }
        r += 1;
        if r == period {
            r = 0;
        }
    }
    Ok(CharacterTable {
        disc,
        values,
        l_one: acc.value(),
        l_one_error: d as f64 / tail_cutoff as f64,
        tail_cutoff,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuntEntry {
    pub delta: i64,
    pub l_one: f64,
    pub l_one_error: f64,
}

/// Default tail cutoff multiplier used by the discriminant scan: N = max(factor·D, floor).
pub const HUNT_TAIL_FACTOR: u64 = 100;
const HUNT_TAIL_FLOOR: u64 = 1 << 14;

/// Scans every fundamental discriminant with |delta| ≤ `max_abs_delta` and
/// returns the `top_k` smallest L(1, χ), ascending.
pub fn hunt_small_l_one(max_abs_delta: u64, top_k: usize) -> Vec<HuntEntry> {
    hunt_small_l_one_with(max_abs_delta, top_k, HUNT_TAIL_FACTOR)
}

pub fn hunt_small_l_one_with(max_abs_delta: u64, top_k: usize, tail_factor: u64) -> Vec<HuntEntry> {
    let max = max_abs_delta.min(i64::MAX as u64) as i64;
    let discs: Vec<i64> = (-max..=max)
        .filter(|&d| is_fundamental_discriminant(d))
        .collect();
    let mut entries: Vec<HuntEntry> = discs
        .par_iter()
        .map(|&delta| {
            let cutoff = (tail_factor.max(1) * delta.unsigned_abs()).max(HUNT_TAIL_FLOOR);
            let t = build_character_table(delta, cutoff).expect("discriminant filtered above");
            HuntEntry {
                delta,
                l_one: t.l_one,
                l_one_error: t.l_one_error,
            }
        })
        .collect();
    entries.sort_by(|a, b| a.l_one.total_cmp(&b.l_one).then(a.delta.cmp(&b.delta)));
    entries.truncate(top_k);
    entries
}
