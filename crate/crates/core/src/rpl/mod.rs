//! RPL control plane: addressing, rank, trickle, parent selection, routes
//! and the per-node state machine.

pub mod address;
pub mod message;
pub mod node;
pub mod parent;
pub mod rank;
pub mod route;
pub mod trickle;

pub use address::{GlobalPrefix, LinkLocal, NodeAddress};
pub use message::{Dao, DaoAck, Data, Dio, Message, MessageClass, Mop};
pub use node::{Action, Ctx, DaoReason, Node, NodeConfig, Timer};
pub use rank::{Mrhof, Rank};
