//! Real Dirichlet characters, λ-type convolution tables and prime sums in
//! arithmetic progressions, for numerical experiments around small L(1, χ).

pub mod character;
pub mod cli;
pub mod convolution;
pub mod expsums;
pub mod numeric;
pub mod partition;
pub mod progressions;
pub mod sieve;
pub mod suite;

pub use character::{build_character_table, kronecker, CharacterTable, Discriminant};
pub use convolution::{dirichlet_convolve, verify_identity, Identity, IdentityReport};
pub use expsums::{geometric_interval_sum, kloosterman_max_avg, kloosterman_primes, mod_inverse};
pub use partition::{count_smooth, j_e_split_sums, reciprocal_gcd_sum, t_sums, PartitionParams};
pub use progressions::{
    main_term_deviation, psi, psi_progression, psi_star_split, ProgressionQuery,
};
pub use sieve::{build_fun_tables, build_spf, FunTables, SpfSieve};
