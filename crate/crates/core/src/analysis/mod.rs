//! Closed-form bound machinery and structural checks of the interval
//! algorithm.

mod bound;
mod profile;

pub use bound::{
    beta_of_c, bound_of_c, bound_of_c_unchecked, find_cstar, h_of_c, lambert_w0, ratio_all1_sides,
    ratio_branch, verify_ft_claim, verify_ratio_all1, BoundValue, Branch, CStar,
};
pub use profile::{
    check_interval_structure, delta_first_machine, local_maxima_ms, normalize_jobs, speed_profile,
    verify_lemma3_recursion, DeltaBreakdown, Lemma3Report, Lemma3Step, LocalMaxima, OptOracle,
    SpeedProfile, StructureReport,
};
