//! The verification suites run by `siegellab verify`.

use serde::{Deserialize, Serialize};

use crate::character::{build_character_table, CharacterError};
use crate::convolution::{lambda_pair_box, verify_all, ConvolutionError, IdentityReport};
use crate::expsums::{kloosterman_primes, ExpSumError};
use crate::numeric::{gcd, isqrt};
use crate::partition::{j_e_split_sums, t_sums, PartitionError, PartitionParams};
use crate::progressions::{
    psi, psi_class, psi_progression, psi_star_split, tilted_progression_sum, ProgressionError,
    ProgressionQuery,
};
use crate::sieve::{build_spf, sign_class_split, FunTables, SieveError};
use thiserror::Error;

pub const DEFAULT_DISCS: [i64; 3] = [-3, -4, 5];
/// Moduli for the conservation checks.
pub const SPLIT_MODULI: [u64; 4] = [7, 97, 101, 143];
pub const T_MODULI: [u64; 2] = [97, 101];
pub const T_THETAS: [f64; 2] = [0.45, 0.5];
pub const T_ALPHA: f64 = 0.01;
/// Largest x used by the Kloosterman checks, and their largest modulus.
pub const KLOOSTERMAN_X: usize = 10_000;
pub const KLOOSTERMAN_MAX_Q: u64 = 60;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error(transparent)]
    Sieve(#[from] SieveError),
    #[error(transparent)]
    Convolution(#[from] ConvolutionError),
    #[error(transparent)]
    Progression(#[from] ProgressionError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    ExpSum(#[from] ExpSumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteLine {
    pub delta: i64,
    #[serde(flatten)]
    pub report: IdentityReport,
}

/// Running comparison record for the checks built here.
struct Check {
    report: IdentityReport,
    tol: f64,
}

impl Check {
    fn new(name: &str, limit: usize, tol: f64) -> Self {
        Check {
            report: IdentityReport {
                name: name.to_string(),
                limit,
                checked: 0,
                max_abs_deviation: 0.0,
                worst_n: 0,
                violations: 0,
                min_slack: None,
                samples: Vec::new(),
            },
            tol,
        }
    }

    fn equal(&mut self, n: u64, lhs: f64, rhs: f64) {
        let r = &mut self.report;
        r.checked += 1;
        let dev = (lhs - rhs).abs();
        if dev > r.max_abs_deviation || r.checked == 1 {
            r.max_abs_deviation = dev;
            r.worst_n = n;
        }
        if dev > self.tol {
            r.violations += 1;
        }
    }

    fn at_most(&mut self, n: u64, lhs: f64, rhs: f64) {
        let r = &mut self.report;
        r.checked += 1;
        let slack = rhs - lhs;
        if r.min_slack.is_none_or(|s| slack < s) {
            r.min_slack = Some(slack);
            r.worst_n = n;
        }
        r.max_abs_deviation = r.max_abs_deviation.max(-slack).max(0.0);
        if lhs > rhs + self.tol {
            r.violations += 1;
        }
    }

    fn holds(&mut self, n: u64, ok: bool) {
        let r = &mut self.report;
        r.checked += 1;
        if !ok {
            r.violations += 1;
            r.worst_n = n;
        }
    }
}

/// λ read off the sign-class factorization against the table, for n coprime to D.
pub fn lambda_structure_check(
    limit: usize,
    tables: &FunTables,
) -> Result<IdentityReport, SuiteError> {
    let sieve = build_spf(limit)?;
    let chi = &tables.character;
    let d = chi.modulus();
    let mut c = Check::new("lambda_structure", limit, 0.0);
    for n in 1..=limit {
        if gcd(n as u64, d) != 1 {
            continue;
        }
        let split = sign_class_split(n, chi, &sieve)?;
        c.equal(
            n as u64,
            split.lambda_from_structure(&sieve) as f64,
            tables.lambda[n] as f64,
        );
    }
    Ok(c.report)
}

fn unit_samples(q: u64) -> Vec<u64> {
    let mut units = vec![1];
    if let Some(u) = (2..q).find(|&a| gcd(a, q) == 1) {
        units.push(u);
    }
    units.push(q - 1);
    units.dedup();
    units
}

/// ψ* + ψ_* = ψ(x,q,a) on sampled progressions, and Σ_r ψ(x,7,r) = ψ(x).
pub fn decomposition_check(x: usize, tables: &FunTables) -> Result<IdentityReport, SuiteError> {
    let mut c = Check::new("psi_decomposition", x, 1e-6);
    for q in SPLIT_MODULI {
        for a in unit_samples(q) {
            let query = ProgressionQuery::new(x, q, a)?;
            let split = psi_star_split(&query, tables)?;
            c.equal(
                q,
                split.psi_star + split.psi_lower_star,
                psi_progression(&query, tables)?,
            );
        }
    }
    let all: f64 = (0..7)
        .map(|r| psi_class(x, 7, r, tables))
        .sum::<Result<f64, _>>()?;
    c.equal(7, all, psi(x, tables)?);
    Ok(c.report)
}

/// Σ λ(n) ≤ (x/2)^σ Σ λ(n) n^{−σ} over x/2 < n ≤ x for σ ≤ 0.
pub fn tilt_check(x: usize, tables: &FunTables) -> Result<IdentityReport, SuiteError> {
    let mut c = Check::new("tilt_majorant", x, 1e-9);
    for q in SPLIT_MODULI {
        for a in unit_samples(q) {
            let plain = tilted_progression_sum(&tables.lambda, x, q, a, 0.0)?;
            for sigma in [-0.05, -0.25, -1.0] {
                let tilted = tilted_progression_sum(&tables.lambda, x, q, a, sigma)?;
                let majorant = (x as f64 / 2.0).powf(sigma) * tilted;
                c.at_most(q, plain, majorant * (1.0 + 1e-12));
            }
        }
    }
    Ok(c.report)
}

fn partition_grid() -> Vec<(u64, PartitionParams)> {
    let mut grid = Vec::new();
    for q in T_MODULI {
        for theta in T_THETAS {
            grid.push((
                q,
                PartitionParams::new(theta, T_ALPHA).expect("fixed grid parameters"),
            ));
        }
    }
    grid
}

/// |ψ_*| ≤ ΣT with no unclassified triples and the bucket masses reassembling the total.
pub fn t_inequality_check(x: usize, tables: &FunTables) -> Result<Vec<IdentityReport>, SuiteError> {
    let mut ineq = Check::new("t_inequality", x, 0.0);
    let mut cons = Check::new("t_conservation", x, 1e-6);
    for (q, params) in partition_grid() {
        for a in unit_samples(q) {
            let r = t_sums(x, q, a, &params, tables)?;
            ineq.holds(q, r.inequality_holds && r.unclassified_triples == 0);
            cons.equal(q, r.t_total() + r.unclassified, r.total_mass);
        }
    }
    Ok(vec![ineq.report, cons.report])
}

/// J/E buckets reassemble the middle range, and edges plus middle the whole window.
pub fn je_conservation_check(x: usize, tables: &FunTables) -> Result<IdentityReport, SuiteError> {
    let sieve = build_spf(x.max(2))?;
    let mut c = Check::new("je_conservation", x, 1e-6);
    for (q, params) in partition_grid() {
        for a in unit_samples(q) {
            let r = j_e_split_sums(x, q, a, &params, tables, &sieve)?;
            c.equal(
                q,
                r.j1_e1 + r.j1_e2 + r.j2 + r.j3 + r.d0_nontrivial,
                r.middle_total,
            );
            c.equal(q, r.edge_small_d + r.edge_small_m + r.middle_total, r.total);
        }
    }
    Ok(c.report)
}

/// |S| ≤ prime count and S(q − a) = conj S(a) for every unit a, 2 ≤ q ≤ 60.
pub fn kloosterman_checks(x: usize) -> Result<Vec<IdentityReport>, SuiteError> {
    let x = x.min(KLOOSTERMAN_X);
    let sieve = build_spf(x.max(2))?;
    let mut tri = Check::new("kloosterman_triangle", x, 0.0);
    let mut conj = Check::new("kloosterman_conjugation", x, 1e-10);
    for q in 2..=KLOOSTERMAN_MAX_Q {
        for a in (1..q).filter(|&a| gcd(a, q) == 1) {
            let s = kloosterman_primes(x, q, a, &sieve)?;
            let t = kloosterman_primes(x, q, q - a, &sieve)?;
            tri.at_most(q, s.abs_s, s.trivial_bound as f64);
            conj.equal(q, (s.s_value - t.s_value.conj()).norm(), 0.0);
        }
    }
    Ok(vec![tri.report, conj.report])
}

/// Runs a suite for one discriminant.
pub fn run_suite(suite: Suite, delta: i64, limit: usize) -> Result<Vec<SuiteLine>, SuiteError> {
    let chi = build_character_table(delta, crate::character::default_tail_cutoff(delta))?;
    let tables = crate::sieve::build_fun_tables(limit, &chi)?;
    let mut reports = verify_all(limit, &tables)?;
    if suite == Suite::Full {
        let mut pair_box = lambda_pair_box(isqrt(limit as u64) as usize, &tables)?;
        pair_box.name = "lambda_pair_box".to_string();
        reports.push(pair_box);
        reports.push(lambda_structure_check(limit, &tables)?);
        reports.push(decomposition_check(limit, &tables)?);
        reports.push(tilt_check(limit, &tables)?);
        reports.extend(t_inequality_check(limit, &tables)?);
        reports.push(je_conservation_check(limit, &tables)?);
        reports.extend(kloosterman_checks(limit)?);
    }
    Ok(reports
        .into_iter()
        .map(|report| SuiteLine { delta, report })
        .collect())
}
