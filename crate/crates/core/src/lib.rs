//! Multipartite entanglement witnesses for the W state emitted by a
//! four-pump planar microcavity.
//!
//! The crate is organised bottom-up:
//!
//! * [`fockstate`] dense states and operators on `N` two-level modes,
//! * [`cavity`] polariton dispersions, phase matching and the emitted state,
//! * [`witness`] separability eigenvalues of generalized W-state witnesses,
//! * [`losschannel`] beam-splitter loss, purification and efficiency sweeps,
//! * [`oracle`] brute-force product-state maximization used as a cross-check,
//! * [`classify`] bipartition tests and recursive entanglement location.
//!
//! Mode indices are zero-based throughout the library. The command-line
//! front end and the textual partition format (`"123:4"`) are one-based.

pub mod cavity;
pub mod classify;
mod error;
pub mod exec;
pub mod fockstate;
pub mod losschannel;
pub mod optim;
pub mod oracle;
pub mod partition;
pub mod selftest;
pub mod witness;

pub use error::{Error, Result};
pub use exec::Exec;
