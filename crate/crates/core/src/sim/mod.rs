//! Engine primitives: event queue, radio medium, mobility, placement and random streams.

pub mod event;
pub mod mobility;
pub mod radio;
pub mod rng;
pub mod topology;

pub use event::{Event, EventId, EventKind, EventQueue, ScheduleError, SimTime, TxId};
pub use radio::{DeliveryOutcome, DropReason, MacParams, Medium, RadioModel};
