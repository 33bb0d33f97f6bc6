//! The Logic of Information Flows over finite interpretations.
//!
//! Expressions denote binary relations on valuations (BRVs). This crate
//! parses and evaluates them exactly over a finite variable universe and
//! data domain, computes syntactic inputs and outputs, eliminates sequential
//! composition, translates to and from first-order logic, and provides
//! brute-force oracles for the semantic notions of inputs and outputs.

pub mod analysis;
pub mod cli;
pub mod constructions;
pub mod folink;
pub mod gen;
pub mod oracle;
pub mod rewrite;
pub mod semantics;
pub mod suites;
pub mod syntax;
