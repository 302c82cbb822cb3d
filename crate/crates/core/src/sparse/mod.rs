//! Sparse families, bilinear sparse forms, and the checkable lemmas
//! behind the two-weight testing characterization.

pub mod family;
pub mod forms;
pub mod lemmas;
pub mod testing;

pub use family::{verify_sparseness, CoefficientMap, SparseFamily, Sparseness};
pub use forms::{fractional_form, sparse_form_b, sparse_form_b_dual, sparse_operator};
pub use lemmas::{
    augment_oscillation, cov_check, coveq_check, fh_check, fs_check, lemma_two_check, CovReport,
    CoveqReport,
};
pub use testing::{lambda_form, testing_constants, TestingReport};
