//! Approximation algorithms for preemptive, non-migratory scheduling on
//! unrelated machines.
//!
//! Two objectives are supported:
//!
//! * total flow-time, via an interval-capacity LP that is rounded
//!   iteratively into a tentative (machine, slot) placement per job and then
//!   turned into a real schedule with class-based shortest-job-first;
//! * maximum flow-time, via a binary search on the flow bound `D`, a
//!   release-window LP, iterated rounding into a machine assignment and FIFO
//!   execution per machine.
//!
//! Everything runs on exact rationals. The [`oracle`] module provides
//! brute-force optima for tiny instances and [`verifier`] replays solver
//! traces and checks every structural bound the algorithms rely on.

pub mod instance;
pub mod lp;
pub mod max_flow;
pub mod oracle;
pub mod rational;
pub mod schedule;
pub mod total_flow;
pub mod verifier;
pub mod window;

pub use instance::{ClassIndex, Instance, InstanceError, Job, JobId, Time};
pub use lp::{BasicSolution, LinearProgram, LpError, Sense, SolveStatus, Tight};
pub use rational::Rational;
pub use schedule::{Metrics, Policy, Schedule, Slice};
