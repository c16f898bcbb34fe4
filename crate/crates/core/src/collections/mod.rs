//! Mergeable max-heap and disjoint sets backing the region propagations.

mod disjoint_set;
mod pairing_heap;

pub use disjoint_set::DisjointSet;
pub use pairing_heap::MergeableHeap;
