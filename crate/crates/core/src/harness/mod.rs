//! Scenario plumbing: configuration, the simulated control loop, the online
//! baseline, trajectory audits and artifact files.

pub mod artifacts;
pub mod audit;
pub mod baseline;
pub mod config;
pub mod signal;
pub mod sim;

pub use artifacts::{load_plan, run_baseline, run_grid, run_plan, run_simulation, run_verify, Plan, PlanSummary};
pub use audit::{validate_trajectory, AuditReport};
pub use baseline::{baseline_online, BaselineRun, Halt};
pub use config::{GridParams, LimitOverrides, Margin, PathSource, ScenarioConfig, SignalSpec};
pub use signal::{adjustment_signal, random_walk, validate_signal};
pub use sim::{simulate, TrajectoryLog};
