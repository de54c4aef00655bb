//! Verification machinery for the Firoozbakht conjecture: if p_k is the
//! k-th prime, the sequence p_k^(1/k) is strictly decreasing, equivalently
//! p_{k+1}^k < p_k^(k+1) for all k >= 1.
//!
//! Small primes are checked directly against the inequality with an exact
//! tiered comparator. Large primes are handled per gap size: an explicit
//! upper bound for the prime-counting function turns the inequality into a
//! parametric condition in (gap, start prime), whose solution yields a
//! "safe bound" above which a gap of that size can never violate the
//! conjecture; a catalog of first-occurrence prime gaps then settles every
//! gap size that occurs below the coverage limit.

pub mod catalog;
pub mod ddouble;
pub mod error;
pub mod exact;
pub mod pi_bounds;
pub mod primality;
pub mod safe_bounds;
pub mod sieve;
pub mod verdict;

pub use error::{Error, Result};
pub use sieve::{GapRecord, SieveConfig};
