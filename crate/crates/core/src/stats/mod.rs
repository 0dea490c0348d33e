//! Special functions and hypothesis tests.

pub mod hypothesis;
pub mod special;

pub use hypothesis::{
    fligner_killeen_test, levene_test, paired_t_test, Alternative, Dof, GroupedSamples, TestResult,
};
