//! Exact decision procedures for implementing social choice functions with
//! finite Bayesian mechanisms.
//!
//! The crate decides, over exact rational arithmetic throughout:
//!
//! * **weak implementability** — do payments exist that make truthful
//!   reporting an equilibrium of the direct revelation mechanism?
//!   ([`weak`], backed by an exact LP plus a negative-cycle cross-check for
//!   product priors);
//! * **strong implementability** — does a mechanism exist whose *every*
//!   equilibrium realizes the social choice function? Decided in one exact
//!   LP for a single agent ([`strong_single`]) and by exhaustive search over
//!   equilibrium labelings with incremental feasibility pruning in general
//!   ([`strong_general`]).
//!
//! Every positive answer comes with a payment scheme and certificate that an
//! independent verifier ([`mechanism`] brute-force enumeration,
//! [`lp::check_point`], [`strong_general::verify_certificate`]) re-checks;
//! every negative LP answer carries Farkas-style multipliers validated by
//! [`lp::validate_refutation`].

pub mod augment;
pub mod fixtures;
pub mod index;
pub mod instance;
pub mod jsonio;
pub mod lp;
pub mod mechanism;
pub mod rational;
pub mod strong_general;
pub mod strong_single;
pub mod weak;

pub use instance::{Beliefs, Instance, InstanceError, RawInstance};
pub use rational::{bit_length, format_rat, parse_rat, Rat};
