//! Exact fronts: the MILP model, AUGMECON2 and an exhaustive oracle.

pub mod augmecon;
pub mod enumerate;
pub mod external;
pub mod milp;

pub use augmecon::{
    augmecon2, lexicographic_solve, AugmeconResult, ExactBackend, ExactPoint, GridConfig, InternalBackend,
};
pub use enumerate::{brute_force_front, brute_force_front_with, EnumerationLimits};
pub use external::{ExternalBackend, ExternalSolver};
pub use milp::{build_milp, expected_variable_count, MilpModel};
