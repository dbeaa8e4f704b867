//! Exact arithmetic in `Z[zeta_p]` modulo `p^K`, read through the prime
//! `pi = zeta - 1` above `p`.
//!
//! The crate covers lambda-adic digit expansions, the eigenvectors of the
//! Galois generator `sigma: zeta -> zeta^u` over `F_p`, projections of real
//! cyclotomic units onto eigencomponents, and a verifier that checks the
//! congruences a singular semi-primary integer must satisfy.
//!
//! ```
//! use std::sync::Arc;
//! use pi_singular::{digits, PrimeContext, RingElement, Valuation};
//!
//! let ctx = Arc::new(PrimeContext::new(5, None).unwrap());
//! let five = RingElement::from_integer(&ctx, 2, 5).unwrap();
//! let e = digits(&five, 5).unwrap();
//! assert_eq!(e.valuation, Valuation::Exact(4));
//! assert_eq!(e.digits, vec![0, 0, 0, 0, 4]);
//! ```

pub(crate) mod arith;
pub mod cli;
pub mod context;
pub mod eigen;
pub mod error;
pub mod exact;
pub mod padic;
pub mod ring;
pub mod units;
pub mod verify;

pub use context::PrimeContext;
pub use eigen::{canonical_eigenvector, expansion_matches, recurrence_solve, EigenReport, ExpansionMatch, FpMatrix};
pub use error::{Error, Result};
pub use exact::ExactElement;
pub use padic::{digits, is_locally_pth_power, is_primary, is_semi_primary, valuation, LambdaExpansion, Valuation};
pub use ring::RingElement;
pub use units::{eigen_project_unit, verify_unit_relation, UnitReport};
pub use verify::{load_bundle, verify_bundle, CandidateBundle, Outcome, Parity, VerdictReport, VerifyError};
