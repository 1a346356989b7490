//! Discrete-event simulator of RPL networks under the DAO insider attack,
//! with per-originator blacklisting and per-child rate limiting defenses.

pub mod adversary;
pub mod defense;
pub mod expctl;
pub mod geometry;
pub mod metrics;
pub mod network;
pub mod num;
pub mod rpl;
pub mod sim;
pub mod testkit;

pub use num::Scalar;

/// Dense node index; the root is node 0.
pub type NodeId = usize;

pub type Point = geometry::Point<f64>;
pub type Position = geometry::Point<f64>;
