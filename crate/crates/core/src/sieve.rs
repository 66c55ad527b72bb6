//! Segmented smallest-prime-factor sieve and dense tables of the arithmetic
//! functions μ, τ, τ₃, Λ, λ = χ∗1, ν = μ∗(μχ), λ′ = χ∗log.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::character::CharacterTable;
use crate::convolution::dirichlet_convolve;
use crate::numeric::is_perfect_square;

/// Environment variable capping table allocations, in bytes.
pub const MEM_BUDGET_ENV: &str = "SIEGELLAB_MEM_BUDGET";
const DEFAULT_MEM_BUDGET: u64 = 4 << 30;

/// Entries per sieve segment.
pub(crate) const SEGMENT_LEN: usize = 1 << 18;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SieveError {
    #[error("sieve limit must be at least 2, got {0}")]
    LimitTooSmall(usize),
    #[error("allocation of {needed} bytes exceeds the memory budget of {budget} bytes (set {MEM_BUDGET_ENV} to raise it)")]
    MemoryBudget { needed: u64, budget: u64 },
    #[error("{n} is outside the sieve range [1, {limit}]")]
    OutOfRange { n: usize, limit: usize },
    #[error("sieve limit {sieve} does not cover requested limit {requested}")]
    SieveTooSmall { sieve: usize, requested: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryBudget(pub u64);

impl MemoryBudget {
    /// Reads `SIEGELLAB_MEM_BUDGET`, falling back to 4 GiB.
    pub fn from_env() -> Self {
        let bytes = std::env::var(MEM_BUDGET_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<u64>().ok())
            .unwrap_or(DEFAULT_MEM_BUDGET);
        MemoryBudget(bytes)
    }

    pub fn check(self, needed: u64) -> Result<(), SieveError> {
        if needed > self.0 {
            Err(SieveError::MemoryBudget {
                needed,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpfSieve {
    limit: usize,
    spf: Vec<u32>,
}

impl SpfSieve {
    pub fn limit(&self) -> usize {
        self.limit
    }

    /// Smallest prime factor of `n`; `spf(1) = 1`.
    #[inline]
    pub fn spf(&self, n: usize) -> u32 {
        self.spf[n]
    }

    #[inline]
    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && self.spf[n] as usize == n
    }

    pub fn primes(&self) -> impl Iterator<Item = usize> + '_ {
        (2..=self.limit).filter(move |&n| self.is_prime(n))
    }

    pub fn factorize(&self, n: usize) -> Result<Vec<(u64, u32)>, SieveError> {
        if n == 0 || n > self.limit {
            return Err(SieveError::OutOfRange {
                n,
                limit: self.limit,
            });
        }
        Ok(self.factorize_unchecked(n))
    }

    pub(crate) fn factorize_unchecked(&self, mut n: usize) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        out
    }
}

pub fn build_spf(limit: usize) -> Result<SpfSieve, SieveError> {
    build_spf_with(limit, MemoryBudget::from_env(), SEGMENT_LEN)
}

pub(crate) fn build_spf_with(
    limit: usize,
    budget: MemoryBudget,
    segment_len: usize,
) -> Result<SpfSieve, SieveError> {
    if limit < 2 {
        return Err(SieveError::LimitTooSmall(limit));
    }
    let needed = (limit as u64).saturating_add(1).saturating_mul(4);
    if limit >= u32::MAX as usize {
        return Err(SieveError::MemoryBudget {
            needed,
            budget: budget.0,
        });
    }
    budget.check(needed)?;

    let seg_len = segment_len.max(1);
    let root = crate::numeric::isqrt(limit as u64) as usize;
    let base = simple_primes(root);
    let mut spf = vec![0u32; limit + 1];
    spf.par_chunks_mut(seg_len)
        .enumerate()
        .for_each(|(i, seg)| {
            let lo = i * seg_len;
            let hi = lo + seg.len(); // exclusive
            for &p in &base {
                if p * p >= hi {
                    break;
                }
                let mut m = (p * p).max(lo.div_ceil(p) * p);
                while m < hi {
                    let slot = &mut seg[m - lo];
                    if *slot == 0 {
                        *slot = p as u32;
                    }
                    m += p;
                }
            }
            for (j, slot) in seg.iter_mut().enumerate() {
                if *slot == 0 {
                    *slot = (lo + j) as u32;
                }
            }
        });
    spf[0] = 0;
    spf[1] = 1;
    Ok(SpfSieve { limit, spf })
}

fn simple_primes(n: usize) -> Vec<usize> {
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Dense per-n tables over [1, limit] for a fixed real character. Index 0 is unused.
#[derive(Debug, Clone)]
pub struct FunTables {
    pub limit: usize,
    pub character: CharacterTable,
    pub mu: Vec<i8>,
    pub tau: Vec<u32>,
    pub tau3: Vec<u32>,
    pub lambda: Vec<u32>,
    pub nu: Vec<i32>,
    pub biglambda: Vec<f64>,
    pub lambda_prime: Vec<f64>,
}

/// Bytes per table entry, including construction scratch space.
const FUN_TABLE_BYTES_PER_ENTRY: u64 = 1 + 4 * 4 + 8 * 2 + 8 + 16 + 5;

impl FunTables {
    pub fn build(sieve: &SpfSieve, chi: &CharacterTable) -> Result<FunTables, SieveError> {
        Self::build_up_to(sieve.limit(), sieve, chi, MemoryBudget::from_env())
    }

    pub fn build_up_to(
        limit: usize,
        sieve: &SpfSieve,
        chi: &CharacterTable,
        budget: MemoryBudget,
    ) -> Result<FunTables, SieveError> {
        if limit < 2 {
            return Err(SieveError::LimitTooSmall(limit));
        }
        if sieve.limit() < limit {
            return Err(SieveError::SieveTooSmall {
                sieve: sieve.limit(),
                requested: limit,
            });
        }
        budget.check((limit as u64 + 1).saturating_mul(FUN_TABLE_BYTES_PER_ENTRY))?;

        let len = limit + 1;
        let mut mu = vec![0i8; len];
        let mut tau = vec![0u32; len];
        let mut lambda = vec![0u32; len];
        let mut nu = vec![0i32; len];
        let mut biglambda = vec![0f64; len];
        // p^k ∥ n for p = spf(n), and its exponent k
        let mut ppow = vec![0u32; len];
        let mut expo = vec![0u8; len];

        mu[1] = 1;
        tau[1] = 1;
        lambda[1] = 1;
        nu[1] = 1;
        ppow[1] = 1;
        for n in 2..len {
            let p = sieve.spf(n) as usize;
            let rest = n / p;
            let (pk, k) = if rest % p == 0 {
                (ppow[rest] as usize * p, expo[rest] + 1)
            } else {
                (p, 1)
            };
            ppow[n] = pk as u32;
            expo[n] = k;
            let cof = n / pk;
            if cof > 1 {
                mu[n] = mu[pk] * mu[cof];
                tau[n] = tau[pk] * tau[cof];
                lambda[n] = lambda[pk] * lambda[cof];
                nu[n] = nu[pk] * nu[cof];
            } else {
                let c = chi.chi(p as u64) as i32;
                let k = k as u32;
                mu[n] = if k == 1 { -1 } else { 0 };
                tau[n] = k + 1;
                lambda[n] = lambda_prime_power(c, k);
                nu[n] = nu_prime_power(c, k);
                biglambda[n] = (p as f64).ln();
            }
        }
        drop(ppow);
        drop(expo);

        let ones = vec![1u32; len];
        let tau3 = dirichlet_convolve(&tau, &ones).expect("equal lengths");
        let chi_seq: Vec<f64> = (0..len).map(|n| chi.chi(n as u64) as f64).collect();
        let log_seq: Vec<f64> = (0..len)
            .map(|n| if n == 0 { 0.0 } else { (n as f64).ln() })
            .collect();
        let lambda_prime = dirichlet_convolve(&chi_seq, &log_seq).expect("equal lengths");

        Ok(FunTables {
            limit,
            character: chi.clone(),
            mu,
            tau,
            tau3,
            lambda,
            nu,
            biglambda,
            lambda_prime,
        })
    }

    #[inline]
    pub fn chi(&self, n: u64) -> i8 {
        self.character.chi(n)
    }

    pub fn dstar(&self) -> u64 {
        self.character.dstar()
    }
}

/// λ(p^k) = 1 + χ(p) + … + χ(p)^k.
pub(crate) fn lambda_prime_power(chi_p: i32, k: u32) -> u32 {
    match chi_p {
        1 => k + 1,
        0 => 1,
        _ => u32::from(k % 2 == 0),
    }
}

/// ν(p^k) for ν = μ ∗ (μχ); only splittings p^j · p^(k−j) with j, k−j ≤ 1 survive.
pub(crate) fn nu_prime_power(chi_p: i32, k: u32) -> i32 {
    match k {
        0 => 1,
        1 => -1 - chi_p,
        2 => chi_p,
        _ => 0,
    }
}

/// Builds the sieve and tables up to `limit`.
pub fn build_fun_tables(limit: usize, chi: &CharacterTable) -> Result<FunTables, SieveError> {
    let budget = MemoryBudget::from_env();
    let sieve = build_spf_with(limit, budget, SEGMENT_LEN)?;
    FunTables::build_up_to(limit, &sieve, chi, budget)
}

/// Factorization n = d1 · dm1 · d0 by the value of χ on each prime factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignClassSplit {
    pub d1: u64,
    pub dm1: u64,
    pub d0: u64,
}

impl SignClassSplit {
    /// λ(n) read off the split: τ(d1) when d₋₁ is a square, else 0.
    pub fn lambda_from_structure(&self, sieve: &SpfSieve) -> u64 {
        if !is_perfect_square(self.dm1) {
            return 0;
        }
        sieve
            .factorize_unchecked(self.d1 as usize)
            .iter()
            .map(|&(_, e)| e as u64 + 1)
            .product()
    }
}

pub fn sign_class_split(
    n: usize,
    chi: &CharacterTable,
    sieve: &SpfSieve,
) -> Result<SignClassSplit, SieveError> {
    let factors = sieve.factorize(n)?;
    let mut split = SignClassSplit {
        d1: 1,
        dm1: 1,
        d0: 1,
    };
    for (p, e) in factors {
        let pe = p.pow(e);
        match chi.chi(p) {
            1 => split.d1 *= pe,
            -1 => split.dm1 *= pe,
            _ => split.d0 *= pe,
        }
    }
    Ok(split)
}
