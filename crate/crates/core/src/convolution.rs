//! Dirichlet convolution engine and the checker for the λ-convolution
//! identities and inequalities.
//!
//! Sequences are slices indexed by `n`, where index 0 is ignored and every
//! output has a zero at index 0. A sequence over `[1, limit]` therefore has
//! length `limit + 1`.

use std::fmt;
use std::ops::{AddAssign, Mul};
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{gcd, CompensatedSum};
use crate::progressions::euler_phi;
use crate::sieve::FunTables;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvolutionError {
    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error("limit {requested} exceeds table limit {available}")]
    LimitTooLarge { requested: usize, available: usize },
}

/// `out[n] = Σ_{d | n} f(d) g(n/d)` for `1 ≤ n < f.len()`.
///
/// Terms for a fixed `n` accumulate in increasing `d`, so float outputs are
/// reproducible.
pub fn dirichlet_convolve<T>(f: &[T], g: &[T]) -> Result<Vec<T>, ConvolutionError>
where
    T: Copy + Zero + Mul<Output = T> + AddAssign,
{
    if f.len() != g.len() {
        return Err(ConvolutionError::LengthMismatch(f.len(), g.len()));
    }
    let len = f.len();
    let mut out = vec![T::zero(); len];
    if len < 2 {
        return Ok(out);
    }
    let limit = len - 1;
    for d in 1..=limit {
        let fd = f[d];
        if fd.is_zero() {
            continue;
        }
        let mut n = d;
        for &gm in &g[1..=limit / d] {
            out[n] += fd * gm;
            n += d;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// λ = χ ∗ 1
    LambdaConv,
    /// ν = μ ∗ (μχ)
    NuConv,
    /// λ′ = λ ∗ Λ
    LambdaPrimeEq,
    /// Λ = ν ∗ λ′
    BiglambdaEq,
    /// |ν| ≤ λ
    NuBound,
    /// |Λ| ≤ λ ∗ λ′
    NuConvBound,
    /// |Λ| ≤ λ ∗ Λ ∗ λ
    Sandwich,
    /// λ(l)λ(d) ≤ λ(ld)²
    LambdaPair,
    /// Σ λ(d)λ(m) ≤ Σ λ(dm)² ≤ Σ λ(n)²τ(n) over a progression
    LambdaChain,
    /// ratio report for τ in progressions
    BinaryDivisor,
    /// ratio report for τ₃ in progressions
    TernaryDivisor,
}

impl Identity {
    pub const ALL: [Identity; 11] = [
        Identity::LambdaConv,
        Identity::NuConv,
        Identity::LambdaPrimeEq,
        Identity::BiglambdaEq,
        Identity::NuBound,
        Identity::NuConvBound,
        Identity::Sandwich,
        Identity::LambdaPair,
        Identity::LambdaChain,
        Identity::BinaryDivisor,
        Identity::TernaryDivisor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::LambdaConv => "lambda_conv",
            Identity::NuConv => "nu_conv",
            Identity::LambdaPrimeEq => "lambda_prime_eq",
            Identity::BiglambdaEq => "biglambda_eq",
            Identity::NuBound => "nu_bound",
            Identity::NuConvBound => "nu_conv_bound",
            Identity::Sandwich => "sandwich",
            Identity::LambdaPair => "lambda_pair",
            Identity::LambdaChain => "lambda_chain",
            Identity::BinaryDivisor => "binary_divisor",
            Identity::TernaryDivisor => "ternary_divisor",
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Identity {
    type Err = ConvolutionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Identity::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| ConvolutionError::UnknownIdentity(s.to_string()))
    }
}

/// Progression sample used by the ratio-report identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub q: u64,
    pub a: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub limit: usize,
    /// Number of individual comparisons made.
    pub checked: u64,
    pub max_abs_deviation: f64,
    pub worst_n: u64,
    pub violations: u64,
    /// Smallest `rhs − lhs` seen, for inequalities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_slack: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<RatioSample>,
}

/// Relative tolerance for floating identities: 1e-8 · (1 + magnitude).
pub const IDENTITY_REL_TOL: f64 = 1e-8;

struct Tally {
    name: Identity,
    limit: usize,
    checked: u64,
    max_dev: f64,
    worst_n: u64,
    violations: u64,
    min_slack: Option<f64>,
}

impl Tally {
    fn new(name: Identity, limit: usize) -> Self {
        Tally {
            name,
            limit,
            checked: 0,
            max_dev: 0.0,
            worst_n: 1,
            violations: 0,
            min_slack: None,
        }
    }

    fn equal(&mut self, n: u64, lhs: f64, rhs: f64) {
        self.checked += 1;
        let dev = (lhs - rhs).abs();
        if dev > self.max_dev {
            self.max_dev = dev;
            self.worst_n = n;
        }
        if dev > IDENTITY_REL_TOL * (1.0 + lhs.abs().max(rhs.abs())) {
            self.violations += 1;
        }
    }

    /// Records `lhs ≤ rhs + tol`.
    fn at_most(&mut self, n: u64, lhs: f64, rhs: f64, tol: f64) {
        self.checked += 1;
        let slack = rhs - lhs;
        if self.min_slack.is_none_or(|s| slack < s) {
            self.min_slack = Some(slack);
            self.worst_n = n;
        }
        let excess = (lhs - rhs).max(0.0);
        if excess > self.max_dev {
            self.max_dev = excess;
        }
        if lhs > rhs + tol {
            self.violations += 1;
        }
    }

    fn finish(self, samples: Vec<RatioSample>) -> IdentityReport {
        IdentityReport {
            name: self.name.name().to_string(),
            limit: self.limit,
            checked: self.checked,
            max_abs_deviation: self.max_dev,
            worst_n: self.worst_n,
            violations: self.violations,
            min_slack: self.min_slack,
            samples,
        }
    }
}

fn as_f64<T: Copy + Into<f64>>(v: &[T]) -> Vec<f64> {
    v.iter().map(|&x| x.into()).collect()
}

/// Moduli used by the progression-restricted checks.
pub const SAMPLE_MODULI: [u64; 8] = [3, 4, 5, 7, 12, 97, 101, 143];

/// Deterministic (q, a) samples with `q < limit / 2`: a ∈ {1, least unit > 1, q − 1}.
pub fn sample_progressions(limit: usize) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for &q in SAMPLE_MODULI.iter().filter(|&&q| (q as usize) * 2 < limit) {
        let second = (2..q).find(|&a| gcd(a, q) == 1);
        let mut units = vec![1];
        if let Some(s) = second {
            units.push(s);
        }
        units.push(q - 1);
        units.dedup();
        for a in units {
            if !out.contains(&(q, a)) {
                out.push((q, a));
            }
        }
    }
    out
}

pub fn verify_identity(
    name: Identity,
    limit: usize,
    tables: &FunTables,
) -> Result<IdentityReport, ConvolutionError> {
    if limit > tables.limit {
        return Err(ConvolutionError::LimitTooLarge {
            requested: limit,
            available: tables.limit,
        });
    }
    let len = limit + 1;
    let chi: Vec<i64> = (0..len).map(|n| tables.chi(n as u64) as i64).collect();
    let lambda: Vec<i64> = tables.lambda[..len].iter().map(|&v| v as i64).collect();
    let mut tally = Tally::new(name, limit);
    let mut samples = Vec::new();

    match name {
        Identity::LambdaConv => {
            let ones = vec![1i64; len];
            let conv = dirichlet_convolve(&chi, &ones)?;
            for n in 1..len {
                tally.equal(n as u64, lambda[n] as f64, conv[n] as f64);
            }
        }
        Identity::NuConv => {
            let mu: Vec<i64> = tables.mu[..len].iter().map(|&v| v as i64).collect();
            let mu_chi: Vec<i64> = (0..len).map(|n| mu[n] * chi[n]).collect();
            let conv = dirichlet_convolve(&mu, &mu_chi)?;
            for n in 1..len {
                tally.equal(n as u64, tables.nu[n] as f64, conv[n] as f64);
            }
        }
        Identity::LambdaPrimeEq => {
            let lam = as_f64(&tables.lambda[..len]);
            let conv = dirichlet_convolve(&lam, &tables.biglambda[..len])?;
            for n in 1..len {
                tally.equal(n as u64, tables.lambda_prime[n], conv[n]);
            }
        }
        Identity::BiglambdaEq => {
            let nu = as_f64(&tables.nu[..len]);
            let conv = dirichlet_convolve(&nu, &tables.lambda_prime[..len])?;
            for n in 1..len {
                tally.equal(n as u64, tables.biglambda[n], conv[n]);
            }
        }
        Identity::NuBound => {
            for n in 1..len {
                let lhs = tables.nu[n].unsigned_abs() as f64;
                tally.at_most(n as u64, lhs, tables.lambda[n] as f64, 0.0);
            }
        }
        Identity::NuConvBound => {
            let lam = as_f64(&tables.lambda[..len]);
            let conv = dirichlet_convolve(&lam, &tables.lambda_prime[..len])?;
            for n in 1..len {
                let tol = IDENTITY_REL_TOL * (1.0 + conv[n].abs());
                tally.at_most(n as u64, tables.biglambda[n].abs(), conv[n], tol);
            }
        }
        Identity::Sandwich => {
            let lam = as_f64(&tables.lambda[..len]);
            let inner = dirichlet_convolve(&lam, &tables.biglambda[..len])?;
            let conv = dirichlet_convolve(&inner, &lam)?;
            for n in 1..len {
                tally.at_most(
                    n as u64,
                    tables.biglambda[n].abs(),
                    conv[n],
                    IDENTITY_REL_TOL,
                );
            }
        }
        Identity::LambdaPair => {
            for l in 1..len {
                for d in 1..=limit / l {
                    let lhs = lambda[l] * lambda[d];
                    let ld = lambda[l * d];
                    tally.at_most((l * d) as u64, lhs as f64, (ld * ld) as f64, 0.0);
                }
            }
        }
        Identity::LambdaChain => {
            for (q, a) in sample_progressions(len) {
                let chain = lambda_chain_sums(limit, q, a, tables);
                tally.at_most(
                    q,
                    chain.product_pairs as f64,
                    chain.squared_pairs as f64,
                    0.0,
                );
                tally.at_most(
                    q,
                    chain.squared_pairs as f64,
                    chain.single_variable as f64,
                    0.0,
                );
            }
        }
        Identity::BinaryDivisor | Identity::TernaryDivisor => {
            let table = if name == Identity::BinaryDivisor {
                &tables.tau
            } else {
                &tables.tau3
            };
            for (q, a) in sample_progressions(len) {
                let s = divisor_progression_ratio(table, limit, q, a);
                tally.checked += 1;
                let dev = (s.ratio - 1.0).abs();
                if dev > tally.max_dev {
                    tally.max_dev = dev;
                    tally.worst_n = q;
                }
                samples.push(s);
            }
        }
    }
    Ok(tally.finish(samples))
}

/// Runs every identity at `limit`.
pub fn verify_all(
    limit: usize,
    tables: &FunTables,
) -> Result<Vec<IdentityReport>, ConvolutionError> {
    Identity::ALL
        .into_iter()
        .map(|id| verify_identity(id, limit, tables))
        .collect()
}

/// λ(l)λ(d) ≤ λ(ld)² over the full box `1 ≤ l, d ≤ bound`.
pub fn lambda_pair_box(
    bound: usize,
    tables: &FunTables,
) -> Result<IdentityReport, ConvolutionError> {
    let needed = bound * bound;
    if needed > tables.limit {
        return Err(ConvolutionError::LimitTooLarge {
            requested: needed,
            available: tables.limit,
        });
    }
    let mut tally = Tally::new(Identity::LambdaPair, needed);
    for l in 1..=bound {
        for d in 1..=bound {
            let lhs = tables.lambda[l] as u64 * tables.lambda[d] as u64;
            let ld = tables.lambda[l * d] as u64;
            tally.at_most((l * d) as u64, lhs as f64, (ld * ld) as f64, 0.0);
        }
    }
    Ok(tally.finish(Vec::new()))
}

/// The three sides of the λ-chain over `n ≤ x`, `n ≡ a (mod q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaChainSums {
    pub product_pairs: u64,
    pub squared_pairs: u64,
    pub single_variable: u64,
}

pub fn lambda_chain_sums(x: usize, q: u64, a: u64, tables: &FunTables) -> LambdaChainSums {
    let lam = &tables.lambda;
    let mut product_pairs = 0u64;
    let mut squared_pairs = 0u64;
    for d in 1..=x {
        let ld = lam[d] as u64;
        for m in 1..=x / d {
            if (d as u64 * m as u64) % q == a % q {
                let n = d * m;
                product_pairs += ld * lam[m] as u64;
                squared_pairs += (lam[n] as u64).pow(2);
            }
        }
    }
    let single_variable = (1..=x)
        .filter(|&n| n as u64 % q == a % q)
        .map(|n| (lam[n] as u64).pow(2) * tables.tau[n] as u64)
        .sum();
    LambdaChainSums {
        product_pairs,
        squared_pairs,
        single_variable,
    }
}

fn divisor_progression_ratio(table: &[u32], x: usize, q: u64, a: u64) -> RatioSample {
    let mut lhs = 0u64;
    let mut coprime = 0u64;
    for n in 1..=x {
        let v = table[n] as u64;
        if n as u64 % q == a % q {
            lhs += v;
        }
        if gcd(n as u64, q) == 1 {
            coprime += v;
        }
    }
    let rhs = coprime as f64 / euler_phi(q) as f64;
    RatioSample {
        q,
        a,
        lhs: lhs as f64,
        rhs,
        ratio: lhs as f64 / rhs,
    }
}

/// Partial sums of λ compared with their predicted sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaPartialSums {
    pub x: usize,
    pub dstar: u64,
    pub head_sum: u64,
    pub predicted: f64,
    /// |head − x·L(1,χ)| / √(D·x)
    pub normalized_gap: f64,
    /// (Σ_{D* < d ≤ x} λ(d)/d) / (L(1,χ) · log x); `None` when x < 2.
    pub tail_ratio: Option<f64>,
}

pub fn lambda_partial_sums(
    x: usize,
    dstar: u64,
    tables: &FunTables,
) -> Result<LambdaPartialSums, ConvolutionError> {
    if x > tables.limit {
        return Err(ConvolutionError::LimitTooLarge {
            requested: x,
            available: tables.limit,
        });
    }
    let l_one = tables.character.l_one;
    let d = tables.character.modulus() as f64;
    let head_sum: u64 = tables.lambda[1..=x].iter().map(|&v| v as u64).sum();
    let predicted = x as f64 * l_one;
    let normalized_gap = if x == 0 {
        0.0
    } else {
        (head_sum as f64 - predicted).abs() / (d * x as f64).sqrt()
    };
    let tail_ratio = if x >= 2 {
        let start = (dstar as usize).saturating_add(1);
        let tail: CompensatedSum = (start..=x)
            .map(|n| tables.lambda[n] as f64 / n as f64)
            .collect();
        Some(tail.value() / (l_one * (x as f64).ln()))
    } else {
        None
    };
    Ok(LambdaPartialSums {
        x,
        dstar,
        head_sum,
        predicted,
        normalized_gap,
        tail_ratio,
    })
}
