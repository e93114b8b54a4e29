//! K-theory of Cuntz-Krieger algebras attached to locally finite graphs
//! through the Bass-Hashimoto edge operator.

pub mod batch;
pub mod bhk;
pub mod bigraph;
pub mod ends;
pub mod format;
pub mod random;
pub mod reduce;
pub mod shrink;
pub mod verify;
pub mod zlattice;
