//! Biobjective home care scheduling.
//!
//! Caregivers visit users' homes; each visit has a hard time window, a preferred
//! soft window and a duration. A solution assigns every visit to a caregiver
//! route on its day and fixes start times. Two objectives are minimized:
//!
//! * cost: weekly overtime plus paid working time, where the largest idle gap of
//!   a day is unpaid once it reaches `pi_min`;
//! * welfare: caregiver/user affinity (weighted so it always dominates) plus the
//!   minutes spent outside soft windows.
//!
//! The crate provides:
//!
//! * [`bialns`], a three-step metaheuristic built on lexicographic ALNS runs in
//!   both directions and schedule-shift moves;
//! * [`exact`], an AUGMECON2 loop, an exhaustive front for small instances and a
//!   MILP writer with a subprocess adapter for external solvers;
//! * [`indicators`] for comparing fronts (coverage, GD, IGD, additive epsilon);
//! * [`generator`] for seeded instances derived from Solomon-style data.
//!
//! The `examples/` directory has one runnable program per capability:
//!
//! * `generate_suite`: build and save instance suites;
//! * `route_schedulers`: welfare-first vs cost-first timing of one route;
//! * `schedule_moves`: the delay/advance moves on the sample routes;
//! * `solve_front`: run the metaheuristic and export a front;
//! * `exact_front`: AUGMECON2 against the exhaustive front;
//! * `compare_fronts`: quality indicators between two fronts;
//! * `emit_milp`: write the MILP in LP format and check a solution against it.

pub mod alns;
pub mod archive;
pub mod bench;
pub mod bialns;
pub mod error;
pub mod exact;
pub mod generator;
pub mod indicators;
pub mod instance;
pub mod moves;
pub mod samples;
pub mod scheduler;
pub mod solution;

pub use error::{Error, Result};
pub use instance::{load_instance, save_instance, CaregiverIdx, Day, Instance, Minutes, ServiceIdx, Window};
pub use solution::{check_feasibility, dominates, evaluate, ObjectiveWeights, Objectives, Route, Solution, Visit};
