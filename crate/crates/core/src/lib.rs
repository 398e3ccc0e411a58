//! Finite-depth combinatorics of prime-power coded alphabets, branch maps on
//! their product space, the relations those maps generate, an index-substitution
//! family on binary sequences, and a rational checker for metric cascades.

mod magnitude;

pub mod alphabet;
pub mod cascade;
pub mod coding;
pub mod departure;
pub mod enumeration;
pub mod error;
pub mod fault;
pub mod good_sequence;
pub mod nat;
pub mod outcome;
pub mod primes;
pub mod relations;
pub mod report;
pub mod verifier;

pub use cascade::{ExactCascade, FloatCascade};
pub use coding::{decode, encode, FiniteSeq};
pub use error::{Error, Result};
pub use good_sequence::{IndexMapBig, IndexMapU128};
pub use nat::Nat;
pub use primes::nth_prime;
