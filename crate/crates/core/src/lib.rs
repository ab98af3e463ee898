//! Exact finite-stage verification for Villadsen inductive systems.
//!
//! The crate models the spaces that occur in Villadsen's constructions
//! (products of 2-spheres, complex projective spaces and contractible disks),
//! their integral cohomology rings, formal vector bundles built from
//! pulled-back line bundles, and the comparison certificates that decide
//! Cuntz subequivalence of projections at each finite stage. On top of that
//! sit verifiers for systems of the first type, the algebras `V_k` of the
//! second type, and the witness showing that `V_∞` fails the corona
//! factorization property.
//!
//! All arithmetic is exact: big integers and big rationals throughout.

pub mod bundles;
pub mod cfp_witness;
pub mod cohomology;
pub mod comparison;
mod error;
pub mod exact;
pub mod report;
pub mod spaces;
pub mod v2_type2;
pub mod vi_type1;

pub use error::{Error, Result};

/// Upper bound on the number of monomials a full Chern-class expansion may
/// produce before callers must fall back to structured arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_terms: u64,
}

impl Budget {
    pub const DEFAULT_MAX_TERMS: u64 = 1 << 20;

    /// Name of the environment variable read by [`Budget::from_env`].
    pub const ENV_VAR: &'static str = "ENGINE_GENERATOR_BUDGET";

    pub const fn new(max_terms: u64) -> Self {
        Budget { max_terms }
    }

    /// Reads `ENGINE_GENERATOR_BUDGET`, falling back to the default when the
    /// variable is unset. A malformed value is an error.
    pub fn from_env() -> Result<Self> {
        match std::env::var(Self::ENV_VAR) {
            Ok(raw) => raw
                .trim()
                .parse::<u64>()
                .map(Budget::new)
                .map_err(|_| Error::Parse(format!("{}={raw:?} is not a non-negative integer", Self::ENV_VAR))),
            Err(_) => Ok(Budget::default()),
        }
    }

    pub fn allows(&self, terms: u128) -> bool {
        terms <= u128::from(self.max_terms)
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(Self::DEFAULT_MAX_TERMS)
    }
}
