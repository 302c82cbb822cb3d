//! Experiment harness behind the `bloomlab` binary: reproducible batches
//! of the sharpness examples, domination audits, form-bound ratios,
//! testing-constant equivalences and lemma sweeps, persisted as CSV or
//! JSON tables.

pub mod config;
pub mod constants;
pub mod dominate;
pub mod exponents;
pub mod formbound;
pub mod gen;
pub mod lemmas;
pub mod report;
pub mod sharpness;
pub mod slope;
pub mod testing;
