use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("expected {expected} cells, found {found}")]
    CellCount { expected: usize, found: usize },
    #[error("cell {index} holds {value}, outside 1..={max}")]
    ValueOutOfRange {
        index: usize,
        value: i64,
        max: usize,
    },
    #[error("cell {index} repeats value {value}")]
    DuplicateValue { index: usize, value: i64 },
    #[error("order {order} is not supported here ({reason})")]
    UnsupportedOrder { order: usize, reason: &'static str },
    #[error("order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: usize, found: usize },
    #[error("not a permutation of 0..{len}")]
    InvalidPermutation { len: usize },
    #[error("invalid shard: {0}")]
    InvalidShard(String),
    #[error("square is not a normal magic square")]
    NotMagic,
    #[error("incomplete catalog: {found} squares, expected {expected}")]
    IncompleteCatalog { found: usize, expected: usize },
    #[error("class populations {found:?} do not match the expected census")]
    PopulationMismatch { found: alloc::vec::Vec<usize> },
    #[error("square belongs to class {found}, expected {expected}")]
    WrongClass {
        expected: &'static str,
        found: String,
    },
    #[error("square set is empty")]
    EmptySet,
    #[error("group axiom violated: {0}")]
    GroupAxiom(&'static str),
    #[error("square is not in the group's subject set")]
    NotInSubject,
    #[error("subject set differs from the set the group was computed over")]
    SubjectMismatch,
}
