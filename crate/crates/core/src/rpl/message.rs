//! Control and data messages exchanged between nodes.

use crate::rpl::address::{GlobalPrefix, LinkLocal};
use crate::rpl::rank::Rank;
use crate::NodeId;

/// Mode of operation advertised by the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mop {
    NoDownward = 0,
    NonStoring = 1,
    Storing = 2,
    StoringMulticast = 3,
}

impl Mop {
    pub fn from_value(v: u8) -> Option<Mop> {
        match v {
            0 => Some(Mop::NoDownward),
            1 => Some(Mop::NonStoring),
            2 => Some(Mop::Storing),
            3 => Some(Mop::StoringMulticast),
            _ => None,
        }
    }

    pub fn daos_enabled(&self) -> bool {
        *self != Mop::NoDownward
    }

    pub fn storing(&self) -> bool {
        matches!(self, Mop::Storing | Mop::StoringMulticast)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dio {
    pub rank: Rank,
    pub version: u8,
    pub instance: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dao {
    pub prefix: GlobalPrefix,
    pub sequence: u8,
    /// Non-storing only: addresses appended by each forwarding parent.
    pub reverse_route_stack: Vec<LinkLocal>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaoAck {
    pub acked_sequence: u8,
    pub target: GlobalPrefix,
    /// Non-storing only: hops still to traverse, next hop first.
    pub source_route: Vec<LinkLocal>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Data {
    pub id: u64,
    pub origin: NodeId,
    pub created: f64,
    pub hops: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Dis,
    Dio(Dio),
    Dao(Dao),
    DaoAck(DaoAck),
    Data(Data),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MessageClass {
    Dis,
    Dio,
    Dao,
    DaoAck,
    Data,
}

impl MessageClass {
    pub const ALL: [MessageClass; 5] =
        [MessageClass::Dis, MessageClass::Dio, MessageClass::Dao, MessageClass::DaoAck, MessageClass::Data];

    pub fn label(&self) -> &'static str {
        match self {
            MessageClass::Dis => "DIS",
            MessageClass::Dio => "DIO",
            MessageClass::Dao => "DAO",
            MessageClass::DaoAck => "DAO-ACK",
            MessageClass::Data => "DATA",
        }
    }

    pub fn index(&self) -> usize {
        *self as usize
    }
}

// compressed IPv6 + ICMPv6 RPL header sizes, approximate
const DIS_BYTES: usize = 44;
const DIO_BYTES: usize = 76;
const DAO_BYTES: usize = 64;
const STACK_ENTRY_BYTES: usize = 16;
const DAO_ACK_BYTES: usize = 48;
const DATA_HEADER_BYTES: usize = 25;

impl Message {
    pub fn class(&self) -> MessageClass {
        match self {
            Message::Dis => MessageClass::Dis,
            Message::Dio(_) => MessageClass::Dio,
            Message::Dao(_) => MessageClass::Dao,
            Message::DaoAck(_) => MessageClass::DaoAck,
            Message::Data(_) => MessageClass::Data,
        }
    }

    pub fn size(&self, data_payload: usize) -> usize {
        match self {
            Message::Dis => DIS_BYTES,
            Message::Dio(_) => DIO_BYTES,
            Message::Dao(d) => DAO_BYTES + STACK_ENTRY_BYTES * d.reverse_route_stack.len(),
            Message::DaoAck(a) => DAO_ACK_BYTES + STACK_ENTRY_BYTES * a.source_route.len(),
            Message::Data(_) => DATA_HEADER_BYTES + data_payload,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dao_grows_with_stack() {
        let mut d = Dao { prefix: GlobalPrefix::of(8), sequence: 1, reverse_route_stack: vec![] };
        let base = Message::Dao(d.clone()).size(30);
        d.reverse_route_stack.push(LinkLocal::of(7));
        assert_eq!(Message::Dao(d).size(30), base + STACK_ENTRY_BYTES);
        assert_eq!(Message::Data(Data { id: 0, origin: 1, created: 0.0, hops: 0 }).size(30), 55);
    }

    #[test]
    fn mop_zero_disables_daos() {
        assert!(!Mop::from_value(0).unwrap().daos_enabled());
        assert!(Mop::from_value(2).unwrap().storing());
        assert!(!Mop::from_value(1).unwrap().storing());
        assert!(Mop::from_value(4).is_none());
    }
}
