//! Chebyshev sums in progressions, the main-term deviation, the ψ* / ψ_*
//! decomposition, tilted sums, and Brun–Titchmarsh / Shiu ratio reports.
//!
//! Every "≪" bound is reported as a ratio with implicit constant 1; nothing in
//! here asserts an asymptotic statement.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::character::CharacterTable;
use crate::expsums::mod_inverse;
use crate::numeric::{first_in_class, gcd, trial_factor, CompensatedSum};
use crate::sieve::{FunTables, SpfSieve};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProgressionError {
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(u64),
    #[error("residue {a} is not a unit modulo {q}")]
    NotUnit { a: u64, q: u64 },
    #[error("x = {x} exceeds table limit {limit}")]
    XExceedsLimit { x: usize, limit: usize },
    #[error("psi(x) vanishes for x = {0}; need x >= 2")]
    ZeroPsi(usize),
    #[error("beta must lie in (0, 1), got {0}")]
    BetaOutOfRange(f64),
    #[error("Shiu range violated: {0}")]
    ShiuRange(String),
    #[error("unsupported divisor function tau_{0}; tables carry k = 2 and k = 3")]
    UnsupportedTauK(u32),
}

/// Euler's totient by trial division.
pub fn euler_phi(q: u64) -> u64 {
    trial_factor(q)
        .into_iter()
        .fold(q, |acc, (p, _)| acc / p * (p - 1))
}

/// x, a modulus q ≥ 2 and a unit residue a (reduced mod q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressionQuery {
    pub x: usize,
    pub q: u64,
    pub a: u64,
}

impl ProgressionQuery {
    pub fn new(x: usize, q: u64, a: u64) -> Result<Self, ProgressionError> {
        if q < 2 {
            return Err(ProgressionError::ModulusTooSmall(q));
        }
        let a = a % q;
        if gcd(a, q) != 1 {
            return Err(ProgressionError::NotUnit { a, q });
        }
        Ok(ProgressionQuery { x, q, a })
    }
}

fn check_x(x: usize, limit: usize) -> Result<(), ProgressionError> {
    if x > limit {
        Err(ProgressionError::XExceedsLimit { x, limit })
    } else {
        Ok(())
    }
}

/// ψ(x) = Σ_{n ≤ x} Λ(n).
pub fn psi(x: usize, tables: &FunTables) -> Result<f64, ProgressionError> {
    check_x(x, tables.limit)?;
    let s: CompensatedSum = tables.biglambda[1..=x].iter().copied().collect();
    Ok(s.value())
}

/// Σ_{n ≤ x, n ≡ r (mod q)} Λ(n) for any residue r, unit or not.
pub fn psi_class(x: usize, q: u64, r: u64, tables: &FunTables) -> Result<f64, ProgressionError> {
    check_x(x, tables.limit)?;
    if q == 0 {
        return Err(ProgressionError::ModulusTooSmall(q));
    }
    let start = first_in_class(1, r, q) as usize;
    let s: CompensatedSum = (start..=x)
        .step_by(q as usize)
        .map(|n| tables.biglambda[n])
        .collect();
    Ok(s.value())
}

/// ψ(x, q, a).
pub fn psi_progression(
    query: &ProgressionQuery,
    tables: &FunTables,
) -> Result<f64, ProgressionError> {
    psi_class(query.x, query.q, query.a, tables)
}

/// χ(a · D/(q, D)), the character value in the main term.
pub fn main_term_chi(q: u64, a: u64, chi: &CharacterTable) -> i8 {
    let d = chi.modulus();
    let arg = (a as u128 % d as u128) * (d / gcd(q, d)) as u128 % d as u128;
    chi.chi(arg as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub x: usize,
    pub q: u64,
    pub a: u64,
    pub delta: i64,
    pub psi_all: f64,
    pub psi_prog: f64,
    pub phi_q: u64,
    pub chi_term: i8,
    pub main_term: f64,
    /// |ψ(x,q,a)·φ(q)/ψ(x) − (1 − χ_term)|
    pub normalized_error: f64,
    /// L(1,χ) · log^{9−8β} x
    pub comparator: f64,
    pub beta: f64,
    /// (log x)^{1−β} ≥ log D
    pub log_range_holds: bool,
    /// (log x)^{β/2} ≥ |log L(1,χ)|
    pub tilt_range_holds: bool,
}

pub const DEFAULT_BETA: f64 = 0.5;

pub fn main_term_deviation(
    query: &ProgressionQuery,
    tables: &FunTables,
    beta: f64,
) -> Result<DeviationReport, ProgressionError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(ProgressionError::BetaOutOfRange(beta));
    }
    let psi_all = psi(query.x, tables)?;
    if psi_all == 0.0 {
        return Err(ProgressionError::ZeroPsi(query.x));
    }
    let chi = &tables.character;
    let psi_prog = psi_progression(query, tables)?;
    let phi_q = euler_phi(query.q);
    let chi_term = main_term_chi(query.q, query.a, chi);
    let main_term = psi_all / phi_q as f64 * (1.0 - chi_term as f64);
    let normalized_error = (psi_prog * phi_q as f64 / psi_all - (1.0 - chi_term as f64)).abs();
    let log_x = (query.x as f64).ln();
    let comparator = chi.l_one * log_x.powf(9.0 - 8.0 * beta);
    Ok(DeviationReport {
        x: query.x,
        q: query.q,
        a: query.a,
        delta: chi.disc.delta(),
        psi_all,
        psi_prog,
        phi_q,
        chi_term,
        main_term,
        normalized_error,
        comparator,
        beta,
        log_range_holds: log_x.powf(1.0 - beta) >= (chi.modulus() as f64).ln(),
        tilt_range_holds: log_x.powf(beta / 2.0) >= chi.l_one.ln().abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiSplit {
    /// Σ_{dm ≤ x, d ≤ D*, dm ≡ a} ν(d)λ′(m)
    pub psi_star: f64,
    /// Σ_{dm ≤ x, d > D*, dm ≡ a} ν(d)λ′(m)
    pub psi_lower_star: f64,
}

/// Direct double loop for the ψ* / ψ_* split over `lo ≤ dm ≤ x`.
pub(crate) fn nu_lambda_prime_split(
    lo: usize,
    x: usize,
    q: u64,
    a: u64,
    dstar: u64,
    tables: &FunTables,
) -> PsiSplit {
    let mut star = CompensatedSum::new();
    let mut lower = CompensatedSum::new();
    let qs = q as usize;
    for d in 1..=x {
        let nu = tables.nu[d];
        if nu == 0 {
            continue;
        }
        // a is a unit, so d must be one too
        let Ok(dinv) = mod_inverse(d as u64 % q, q) else {
            continue;
        };
        let r = (a as u128 * dinv as u128 % q as u128) as u64;
        let m_lo = lo.div_ceil(d).max(1) as u64;
        let m_hi = x / d;
        let mut m = first_in_class(m_lo, r, q) as usize;
        let acc = if d as u64 <= dstar {
            &mut star
        } else {
            &mut lower
        };
        while m <= m_hi {
            acc.add(nu as f64 * tables.lambda_prime[m]);
            m += qs;
        }
    }
    PsiSplit {
        psi_star: star.value(),
        psi_lower_star: lower.value(),
    }
}

pub fn psi_star_split(
    query: &ProgressionQuery,
    tables: &FunTables,
) -> Result<PsiSplit, ProgressionError> {
    check_x(query.x, tables.limit)?;
    Ok(nu_lambda_prime_split(
        1,
        query.x,
        query.q,
        query.a,
        tables.dstar(),
        tables,
    ))
}

/// −[log L(1,χ) + log log x] / log x. Nonnegative exactly when L(1,χ) ≤ 1/log x.
pub fn tilt_exponent(l_one: f64, x: usize) -> f64 {
    let log_x = (x as f64).ln();
    -(l_one.ln() + log_x.ln()) / log_x
}

/// Σ_{x/2 < n ≤ x, n ≡ a (mod q)} f(n) · n^{−sigma}.
pub fn tilted_progression_sum<T>(
    f: &[T],
    x: usize,
    q: u64,
    a: u64,
    sigma: f64,
) -> Result<f64, ProgressionError>
where
    T: Copy + Into<f64>,
{
    if x >= f.len() {
        return Err(ProgressionError::XExceedsLimit {
            x,
            limit: f.len().saturating_sub(1),
        });
    }
    if q == 0 {
        return Err(ProgressionError::ModulusTooSmall(q));
    }
    let start = first_in_class(x as u64 / 2 + 1, a, q) as usize;
    let s: CompensatedSum = (start..=x)
        .step_by(q as usize)
        .map(|n| {
            let v: f64 = f[n].into();
            if sigma == 0.0 {
                v
            } else {
                v * (n as f64).powf(-sigma)
            }
        })
        .collect();
    Ok(s.value())
}

/// The tilted majorant used for λ-type sums: with σ* = `tilt_exponent`,
/// (x/2)^{−σ*} · Σ f(n) n^{σ*}. It dominates the plain sum whenever σ* ≥ 0.
pub fn tilted_majorant<T>(
    f: &[T],
    x: usize,
    q: u64,
    a: u64,
    l_one: f64,
) -> Result<f64, ProgressionError>
where
    T: Copy + Into<f64>,
{
    let sigma_star = tilt_exponent(l_one, x);
    let tilted = tilted_progression_sum(f, x, q, a, -sigma_star)?;
    Ok((x as f64 / 2.0).powf(-sigma_star) * tilted)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimeCountReport {
    pub x: usize,
    pub q: u64,
    pub a: u64,
    pub count: u64,
    /// count · q / (x · L(1,χ))
    pub ratio: f64,
}

/// Number of primes p ≤ x with p ≡ a (mod q) and `keep(p)`.
pub fn count_primes_in_class(
    x: usize,
    q: u64,
    a: u64,
    sieve: &SpfSieve,
    keep: impl Fn(u64) -> bool,
) -> u64 {
    let start = first_in_class(2, a, q) as usize;
    (start..=x.min(sieve.limit()))
        .step_by(q as usize)
        .filter(|&n| sieve.is_prime(n) && keep(n as u64))
        .count() as u64
}

/// Primes p ≤ x, χ(p) = 1, p ≡ a (mod q).
pub fn bt_rough_prime_count(
    x: usize,
    q: u64,
    a: u64,
    chi: &CharacterTable,
    sieve: &SpfSieve,
) -> Result<PrimeCountReport, ProgressionError> {
    let query = ProgressionQuery::new(x, q, a)?;
    check_x(x, sieve.limit())?;
    let count = count_primes_in_class(x, query.q, query.a, sieve, |p| chi.chi(p) == 1);
    let ratio = count as f64 * q as f64 / (x as f64 * chi.l_one);
    Ok(PrimeCountReport {
        x,
        q: query.q,
        a: query.a,
        count,
        ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum ShiuFunction {
    Lambda,
    LambdaSqTau,
    TauKPower { k: u32, t: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiuReport {
    pub function: ShiuFunction,
    pub x: usize,
    pub y: usize,
    pub q: u64,
    pub b: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Admissibility exponents used for the Shiu range check.
pub const SHIU_ALPHA1: f64 = 0.25;
pub const SHIU_ALPHA2: f64 = 0.25;

/// Σ_{lo < n ≤ hi, n ≡ b (mod q)} f(n).
pub(crate) fn window_sum(lo: usize, hi: usize, q: u64, b: u64, f: impl Fn(usize) -> f64) -> f64 {
    let start = first_in_class(lo as u64 + 1, b, q) as usize;
    let s: CompensatedSum = (start..=hi).step_by(q as usize).map(f).collect();
    s.value()
}

pub fn shiu_ratio(
    function: ShiuFunction,
    x: usize,
    y: usize,
    q: u64,
    b: u64,
    tables: &FunTables,
) -> Result<ShiuReport, ProgressionError> {
    let query = ProgressionQuery::new(x, q, b)?;
    check_x(x, tables.limit)?;
    let (yf, xf) = (y as f64, x as f64);
    if !((q as f64) < yf.powf(1.0 - SHIU_ALPHA1)) {
        return Err(ProgressionError::ShiuRange(format!(
            "need q < y^(1-{SHIU_ALPHA1}), got q = {q}, y = {y}"
        )));
    }
    if !(xf.powf(SHIU_ALPHA2) < yf && y <= x) {
        return Err(ProgressionError::ShiuRange(format!(
            "need x^{SHIU_ALPHA2} < y <= x, got x = {x}, y = {y}"
        )));
    }
    let lam = &tables.lambda;
    let tau = &tables.tau;
    let value = |n: usize| -> Result<f64, ProgressionError> {
        Ok(match function {
            ShiuFunction::Lambda => lam[n] as f64,
            ShiuFunction::LambdaSqTau => (lam[n] as f64).powi(2) * tau[n] as f64,
            ShiuFunction::TauKPower { k, t } => tau_k(tables, k, n)?.powi(t as i32),
        })
    };
    if let ShiuFunction::TauKPower { k, .. } = function {
        tau_k(tables, k, 1)?;
    }
    let lhs = window_sum(x - y, x, query.q, query.a, |n| value(n).unwrap_or(0.0));
    let log_x = xf.ln();
    let rhs = match function {
        ShiuFunction::Lambda | ShiuFunction::LambdaSqTau => {
            let prime_sum: CompensatedSum = (2..=x)
                .filter(|&p| tables.biglambda[p] > 0.0 && tables.mu[p] == -1)
                .map(|p| value(p).unwrap_or(0.0) / p as f64)
                .collect();
            yf / (q as f64 * log_x) * prime_sum.value().exp()
        }
        ShiuFunction::TauKPower { k, t } => {
            let exponent = (k as f64).powi(t as i32) - 1.0;
            yf / q as f64 * (euler_phi(q) as f64 / q as f64 * log_x).powf(exponent)
        }
    };
    Ok(ShiuReport {
        function,
        x,
        y,
        q: query.q,
        b: query.a,
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

fn tau_k(tables: &FunTables, k: u32, n: usize) -> Result<f64, ProgressionError> {
    match k {
        2 => Ok(tables.tau[n] as f64),
        3 => Ok(tables.tau3[n] as f64),
        _ => Err(ProgressionError::UnsupportedTauK(k)),
    }
}
