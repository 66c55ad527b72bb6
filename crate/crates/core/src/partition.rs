//! The triple decomposition behind |ψ_*| ≤ T₁ + T₂ + T₃ + T₄, the middle-range
//! J/E split of Σ λ(d), the reciprocal-gcd sum and smooth-number counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expsums::mod_inverse;
use crate::numeric::{count_in_class, first_in_class, gcd, isqrt, CompensatedSum};
use crate::progressions::{nu_lambda_prime_split, ProgressionError, ProgressionQuery};
use crate::sieve::{sign_class_split, FunTables, SieveError, SpfSieve};

/// Cap on Σ_{n ≤ x} τ₃(n), which bounds the number of enumerated triples.
pub const TRIPLE_BUDGET: u64 = 100_000_000;
pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const MAX_ALPHA: f64 = 0.05;
/// Slack in the comparison |ψ_*| ≤ ΣT.
pub const INEQUALITY_SLACK: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("theta must lie in (0, 1), got {0}")]
    Theta(f64),
    #[error("alpha must lie in (0, {MAX_ALPHA}], got {0}")]
    Alpha(f64),
    #[error("epsilon must lie in (0, 0.001], got {0}")]
    Epsilon(f64),
    #[error("beta must lie in (0, 1), got {0}")]
    Beta(f64),
    #[error(transparent)]
    Progression(#[from] ProgressionError),
    #[error(transparent)]
    Sieve(#[from] SieveError),
    #[error("triple enumeration needs {needed} steps, over the budget of {budget}")]
    Budget { needed: u64, budget: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionParams {
    pub theta: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub beta: f64,
}

impl PartitionParams {
    pub fn new(theta: f64, alpha: f64) -> Result<Self, PartitionError> {
        Self::with(theta, alpha, DEFAULT_EPSILON, 0.5)
    }

    pub fn with(theta: f64, alpha: f64, epsilon: f64, beta: f64) -> Result<Self, PartitionError> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(PartitionError::Theta(theta));
        }
        if !(alpha > 0.0 && alpha <= MAX_ALPHA) {
            return Err(PartitionError::Alpha(alpha));
        }
        if !(epsilon > 0.0 && epsilon <= 1e-3) {
            return Err(PartitionError::Epsilon(epsilon));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(PartitionError::Beta(beta));
        }
        Ok(PartitionParams {
            theta,
            alpha,
            epsilon,
            beta,
        })
    }

    /// α ≤ ε², which desk-scale runs essentially never satisfy.
    pub fn alpha_is_tiny(&self) -> bool {
        self.alpha <= self.epsilon * self.epsilon
    }

    /// θ < 16/31 − ε.
    pub fn theta_in_range(&self) -> bool {
        self.theta < 16.0 / 31.0 - self.epsilon
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TSumReport {
    pub x: usize,
    pub q: u64,
    pub a: u64,
    pub delta: i64,
    pub dstar: u64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub unclassified: f64,
    pub unclassified_triples: u64,
    pub triples: u64,
    /// Σ λ(d)λ′(m) over the same window, computed from the λ′ table.
    pub total_mass: f64,
    pub psi_lower_star_abs: f64,
    pub params: PartitionParams,
    pub inequality_holds: bool,
    pub alpha_is_tiny: bool,
    pub theta_in_range: bool,
}

impl TSumReport {
    pub fn t_total(&self) -> f64 {
        self.t1 + self.t2 + self.t3 + self.t4
    }

    /// |buckets − total_mass|, zero up to rounding.
    pub fn conservation_gap(&self) -> f64 {
        (self.t_total() + self.unclassified - self.total_mass).abs()
    }
}

fn window_lo(x: usize) -> usize {
    x.div_ceil(2)
}

fn check_budget(x: usize, tables: &FunTables) -> Result<(), PartitionError> {
    let needed: u64 = tables.tau3[1..=x].iter().map(|&v| v as u64).sum();
    if needed > TRIPLE_BUDGET {
        return Err(PartitionError::Budget {
            needed,
            budget: TRIPLE_BUDGET,
        });
    }
    Ok(())
}

fn validated(
    x: usize,
    q: u64,
    a: u64,
    tables: &FunTables,
) -> Result<ProgressionQuery, PartitionError> {
    let query = ProgressionQuery::new(x, q, a)?;
    if x > tables.limit {
        return Err(ProgressionError::XExceedsLimit {
            x,
            limit: tables.limit,
        }
        .into());
    }
    check_budget(x, tables)?;
    Ok(query)
}

/// Residue r with d·r ≡ a (mod q), or None when d is not a unit.
fn class_for(d: u64, a: u64, q: u64) -> Option<u64> {
    let inv = mod_inverse(d % q, q).ok()?;
    Some((a as u128 * inv as u128 % q as u128) as u64)
}

#[derive(Default, Clone, Copy)]
struct Buckets {
    t: [f64; 5],
    triples: u64,
    unclassified: u64,
    total: f64,
}

pub fn t_sums(
    x: usize,
    q: u64,
    a: u64,
    params: &PartitionParams,
    tables: &FunTables,
) -> Result<TSumReport, PartitionError> {
    let query = validated(x, q, a, tables)?;
    let (q, a) = (query.q, query.a);
    let dstar = tables.dstar();
    let lo = window_lo(x);
    let xf = x as f64;
    let small = xf.powf(1.0 - params.theta - params.alpha);
    let m1_cap = xf.powf(2.0 * params.theta - 1.0 + 2.0 * params.alpha);
    let qs = q as usize;

    let d_start = (dstar as usize + 1).max(1);
    let per_d: Vec<Buckets> = (d_start..=x)
        .into_par_iter()
        .map(|d| {
            let mut b = Buckets::default();
            let ld = tables.lambda[d];
            if ld == 0 || gcd(d as u64, q) != 1 {
                return b;
            }
            let ldf = ld as f64;
            if let Some(r) = class_for(d as u64, a, q) {
                let mut m = first_in_class(lo.div_ceil(d) as u64, r, q) as usize;
                while m <= x / d {
                    b.total += ldf * tables.lambda_prime[m];
                    m += qs;
                }
            }
            for m1 in 2..=x / d {
                let big = tables.biglambda[m1];
                if big == 0.0 {
                    continue;
                }
                let dm1 = d * m1;
                let Some(r) = class_for(dm1 as u64, a, q) else {
                    continue;
                };
                let mut m2 = first_in_class(lo.div_ceil(dm1) as u64, r, q) as usize;
                while m2 <= x / dm1 {
                    let l2 = tables.lambda[m2];
                    if l2 > 0 {
                        b.triples += 1;
                        let mass = ldf * big * l2 as f64;
                        let slot = if m2 as u64 <= dstar {
                            0
                        } else if (d as f64) < small {
                            1
                        } else if (m2 as f64) < small {
                            2
                        } else if (m1 as f64) <= m1_cap {
                            3
                        } else {
                            b.unclassified += 1;
                            4
                        };
                        b.t[slot] += mass;
                    }
                    m2 += qs;
                }
            }
            b
        })
        .collect();

    let mut sums = [
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    ];
    let mut total = CompensatedSum::new();
    let (mut triples, mut unclassified_triples) = (0u64, 0u64);
    for b in &per_d {
        for (s, v) in sums.iter_mut().zip(b.t) {
            s.add(v);
        }
        total.add(b.total);
        triples += b.triples;
        unclassified_triples += b.unclassified;
    }
    let psi_lower = nu_lambda_prime_split(lo, x, q, a, dstar, tables).psi_lower_star;
    let t: Vec<f64> = sums.iter().map(|s| s.value()).collect();
    let psi_lower_star_abs = psi_lower.abs();
    Ok(TSumReport {
        x,
        q,
        a,
        delta: tables.character.disc.delta(),
        dstar,
        t1: t[0],
        t2: t[1],
        t3: t[2],
        t4: t[3],
        unclassified: t[4],
        unclassified_triples,
        triples,
        total_mass: total.value(),
        psi_lower_star_abs,
        params: *params,
        inequality_holds: psi_lower_star_abs <= t[0] + t[1] + t[2] + t[3] + INEQUALITY_SLACK,
        alpha_is_tiny: params.alpha_is_tiny(),
        theta_in_range: params.theta_in_range(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JeReport {
    pub x: usize,
    pub q: u64,
    pub a: u64,
    pub delta: i64,
    pub dstar: u64,
    /// x / (2 q^{1+α})
    pub edge_cut: f64,
    /// x^α
    pub j1_end: f64,
    /// x^{1/2} / (√2 q^{(1+α)/2})
    pub j2_end: f64,
    pub edge_small_d: f64,
    pub edge_small_m: f64,
    pub j1_e1: f64,
    pub j1_e2: f64,
    pub j2: f64,
    pub j3: f64,
    /// middle-range d with a prime factor of χ(p) = 0
    pub d0_nontrivial: f64,
    pub middle_total: f64,
    pub total: f64,
    pub params: PartitionParams,
}

impl JeReport {
    pub fn middle_gap(&self) -> f64 {
        (self.j1_e1 + self.j1_e2 + self.j2 + self.j3 + self.d0_nontrivial - self.middle_total).abs()
    }

    pub fn total_gap(&self) -> f64 {
        (self.edge_small_d + self.edge_small_m + self.middle_total - self.total).abs()
    }
}

/// Whether n has a divisor t with lo ≤ t ≤ hi.
fn has_divisor_between(n: u64, lo: f64, hi: f64, sieve: &SpfSieve) -> bool {
    if lo > hi {
        return false;
    }
    let mut divisors = vec![1u64];
    for (p, e) in sieve.factorize_unchecked(n as usize) {
        let len = divisors.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divisors.push(divisors[i] * pk);
            }
        }
    }
    divisors
        .into_iter()
        .any(|t| (t as f64) >= lo && (t as f64) <= hi)
}

#[derive(Default, Clone, Copy)]
struct JeRow {
    edge_d: f64,
    edge_m: f64,
    slot: Option<(usize, f64)>,
    middle: f64,
    total: f64,
}

pub fn j_e_split_sums(
    x: usize,
    q: u64,
    a: u64,
    params: &PartitionParams,
    tables: &FunTables,
    sieve: &SpfSieve,
) -> Result<JeReport, PartitionError> {
    let query = validated(x, q, a, tables)?;
    if x > sieve.limit() {
        return Err(SieveError::OutOfRange {
            n: x,
            limit: sieve.limit(),
        }
        .into());
    }
    let (q, a) = (query.q, query.a);
    let dstar = tables.dstar();
    let chi = &tables.character;
    let lo = window_lo(x);
    let xf = x as f64;
    let qf = q as f64;
    let edge_cut = xf / (2.0 * qf.powf(1.0 + params.alpha));
    let edge_floor = edge_cut.floor() as u64;
    let j1_end = xf.powf(params.alpha);
    let j2_end = xf.sqrt() / (2f64.sqrt() * qf.powf((1.0 + params.alpha) / 2.0));
    let e_hi = xf.cbrt();

    let d_start = dstar as usize + 1;
    let rows: Vec<JeRow> = (d_start..=x)
        .into_par_iter()
        .map(|d| -> Result<JeRow, SieveError> {
            let mut row = JeRow::default();
            let ld = tables.lambda[d];
            if ld == 0 {
                return Ok(row);
            }
            let Some(r) = class_for(d as u64, a, q) else {
                return Ok(row);
            };
            let ldf = ld as f64;
            let m_lo = lo.div_ceil(d) as u64;
            let m_hi = (x / d) as u64;
            let mut total = 0u64;
            let mut middle = 0u64;
            let mut m = first_in_class(m_lo, r, q);
            while m <= m_hi {
                total += 1;
                if d as u64 > edge_floor && m > edge_floor {
                    middle += 1;
                }
                m += q;
            }
            row.total = ldf * total as f64;
            row.middle = ldf * middle as f64;
            if d as u64 <= edge_floor {
                row.edge_d = ldf * count_in_class(m_lo, m_hi, r, q) as f64;
                return Ok(row);
            }
            let small_m = count_in_class(m_lo, m_hi.min(edge_floor), r, q);
            row.edge_m = ldf * small_m as f64;
            let mid = count_in_class(m_lo.max(edge_floor + 1), m_hi, r, q);
            if mid == 0 {
                return Ok(row);
            }
            let mass = ldf * mid as f64;
            let split = sign_class_split(d, chi, sieve)?;
            let slot = if split.d0 > 1 {
                4
            } else {
                let ds = isqrt(split.dm1) as f64;
                if ds < j1_end {
                    if has_divisor_between(split.d1, dstar as f64, e_hi, sieve) {
                        0
                    } else {
                        1
                    }
                } else if ds <= j2_end {
                    2
                } else {
                    3
                }
            };
            row.slot = Some((slot, mass));
            Ok(row)
        })
        .collect::<Result<_, _>>()?;

    let mut acc: Vec<CompensatedSum> = (0..9).map(|_| CompensatedSum::new()).collect();
    for row in &rows {
        acc[0].add(row.edge_d);
        acc[1].add(row.edge_m);
        if let Some((slot, mass)) = row.slot {
            acc[2 + slot].add(mass);
        }
        acc[7].add(row.middle);
        acc[8].add(row.total);
    }
    let v: Vec<f64> = acc.iter().map(|s| s.value()).collect();
    Ok(JeReport {
        x,
        q,
        a,
        delta: chi.disc.delta(),
        dstar,
        edge_cut,
        j1_end,
        j2_end,
        edge_small_d: v[0],
        edge_small_m: v[1],
        j1_e1: v[2],
        j1_e2: v[3],
        j2: v[4],
        j3: v[5],
        d0_nontrivial: v[6],
        middle_total: v[7],
        total: v[8],
        params: *params,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReciprocalGcdReport {
    pub q: u64,
    pub alpha: f64,
    pub sum: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Σ_{1 ≤ r < q, (r,q) > q^{1/5−α}} 1/r, grouped by g = (r, q): r = g·s with (s, q/g) = 1.
pub fn reciprocal_gcd_sum(q: u64, alpha: f64) -> ReciprocalGcdReport {
    let threshold = (q as f64).powf(0.2 - alpha);
    let mut sum = CompensatedSum::new();
    for g in 1..q {
        if q % g != 0 || (g as f64) <= threshold {
            continue;
        }
        let cofactor = q / g;
        for s in 1..cofactor {
            if gcd(s, cofactor) == 1 {
                sum.add(1.0 / (g * s) as f64);
            }
        }
    }
    let sum = sum.value();
    let bound = (q as f64).powf(-0.2 + 3.0 * alpha);
    ReciprocalGcdReport {
        q,
        alpha,
        sum,
        bound,
        ratio: sum / bound,
    }
}

/// Φ(y, z): n ≤ y (n = 1 included) with no prime factor above z.
pub fn count_smooth(y: usize, z: usize, sieve: &SpfSieve) -> Result<u64, SieveError> {
    if y > sieve.limit() {
        return Err(SieveError::OutOfRange {
            n: y,
            limit: sieve.limit(),
        });
    }
    if z >= y {
        return Ok(y as u64);
    }
    let count = (1..=y)
        .into_par_iter()
        .filter(|&n| {
            sieve
                .factorize_unchecked(n)
                .last()
                .is_none_or(|&(p, _)| p as usize <= z)
        })
        .count();
    Ok(count as u64)
}
