//! Sum-secrecy-rate maximization for a vehicle-to-infrastructure
//! backscatter link with an eavesdropping vehicle in the adjacent lane.
//!
//! The reader emits a carrier plus artificial noise, the tag vehicle
//! reflects a fraction of the carrier, and an eavesdropper overhears the
//! reflection. Over `N` slots the crate jointly chooses reflection
//! coefficients, power split and the tag vehicle's trajectory by
//! alternating between three subproblems, each solved globally:
//!
//! - [`reflection`]: per-slot golden-section search on a quadratic-transform
//!   surrogate ([`fp`]);
//! - [`power`]: projected gradient ascent on the same surrogate under the
//!   total budget;
//! - [`trajectory`]: per-slot enumeration of interval corners and
//!   stationary points.
//!
//! [`ao::run_ao`] drives the loop; [`experiment`] wraps it into the CSV
//! experiments exposed by the `v2i-secrecy` binary.

pub mod ao;
pub mod error;
pub mod experiment;
pub mod fp;
pub mod oracle;
pub mod power;
pub mod rate;
pub mod reflection;
pub mod scene;
pub mod trajectory;

pub use ao::{baseline_plan, run_ao, AoTrace};
pub use error::{Error, Result};
pub use scene::{ScenarioConfig, SlotPlan};
