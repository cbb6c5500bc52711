//! Range verifier certifying that each alternating group `A_n` is invariably
//! generated by an element of prime order and one of prime-power order.
//!
//! [`driver::run_range`] sieves a range, applies the cheap test to every
//! integer, and hands the few failures to the digit-based checks in
//! [`genchecks`]. Every certificate can be re-checked with
//! [`genchecks::verify_witness`].

pub mod arith;
pub mod driver;
pub mod genchecks;
pub mod records;
pub mod sieve;

pub use arith::{factorize, is_prime, DigitVector, Factorization, RepunitForm};
pub use driver::{run_range, DriverError, RunConfig, RunStats};
pub use genchecks::{
    certify, phase1_check, verify_witness, CycleType, LeftoverRecord, Phase2Candidate, Witness,
    WitnessKind,
};
pub use records::WitnessRecord;
pub use sieve::{SegmentScan, SieveConfig};
