//! Time-delay attack simulation and detection for store-carry-forward UAV
//! networks.
//!
//! The pipeline is: [`scenario`] (load or generate) → [`twig::Twig::build`]
//! → [`simulator::simulate`] → [`detection`] (global or local) →
//! [`metrics`].

pub mod detection;
pub mod error;
pub mod metrics;
pub mod report;
pub mod scenario;
pub mod simulator;
pub mod time;
pub mod twig;

pub use error::{Error, Result};
pub use scenario::{AttackConfig, Node, NodeId, NodeKind, Scenario, TimeWindow, WindowId};
pub use time::Time;
