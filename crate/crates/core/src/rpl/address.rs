//! Node identities. A node's link-local and global addresses share one
//! interface identifier, so either can be recovered from the other.

use std::fmt;

use crate::NodeId;

const IID_BASE: u64 = 0x0212_7400_0000_0000;
/// Network prefix announced by the root (fd00::/64).
pub const DODAG_PREFIX: u64 = 0xfd00_0000_0000_0000;

/// Link-local address, represented by its interface identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkLocal(pub u64);

/// Global address of a DAO originator: routing prefix plus interface identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalPrefix {
    pub prefix: u64,
    pub iid: u64,
}

impl LinkLocal {
    pub fn of(node: NodeId) -> Self {
        LinkLocal(IID_BASE | node as u64)
    }

    pub fn node(&self) -> NodeId {
        (self.0 & !IID_BASE) as NodeId
    }

    /// Global address autoconfigured from the same identifier.
    pub fn global(&self) -> GlobalPrefix {
        GlobalPrefix { prefix: DODAG_PREFIX, iid: self.0 }
    }
}

impl GlobalPrefix {
    pub fn of(node: NodeId) -> Self {
        LinkLocal::of(node).global()
    }

    pub fn node(&self) -> NodeId {
        LinkLocal(self.iid).node()
    }
}

impl fmt::Display for LinkLocal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fe80::{:x}", self.0)
    }
}

impl fmt::Display for GlobalPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}::{:x}", self.prefix >> 48, self.iid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeAddress {
    pub node_id: NodeId,
    pub link_local: LinkLocal,
    pub global: GlobalPrefix,
}

impl NodeAddress {
    pub fn new(node_id: NodeId) -> Self {
        let link_local = LinkLocal::of(node_id);
        Self { node_id, link_local, global: link_local.global() }
    }
}
