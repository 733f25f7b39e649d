//! Network-coded parallel transmission for multi-lane Ethernet.
//!
//! The sender takes one packet from each of `h` lanes, multiplies the
//! resulting generation by a random full-rank matrix over GF(2^8) and sends
//! one coded packet per path. The receiver decodes a generation as soon as it
//! holds `h` innovative packets of it, regardless of which paths they came
//! from, and frees the buffer space right away. The crate also models the
//! uncoded baseline (round-robin lanes, in-order reassembly) and a
//! discrete-event simulator to compare the two on buffer overflow loss.
//!
//! | module | contents |
//! |---|---|
//! | [`gf256`] | field arithmetic |
//! | [`codec`] | encoding matrices, encoder, incremental decoder |
//! | [`framing`] | 66b blocks, packet identifiers, generations |
//! | [`simnet`] | paths, event loop, min-cut feasibility, route selection |
//! | [`rxbuffer`] | shared receive buffer, coded and reorder release |
//! | [`harness`] | experiments, sweeps, CSV |

pub mod codec;
pub mod error;
pub mod framing;
pub mod gf256;
pub mod harness;
pub mod rxbuffer;
pub mod simnet;

pub use error::{Error, Result};
pub use gf256::Gf256;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/field.md")]
    mod field {}
    #[doc = include_str!("../../../book/src/coding.md")]
    mod coding {}
    #[doc = include_str!("../../../book/src/framing.md")]
    mod framing {}
    #[doc = include_str!("../../../book/src/buffer.md")]
    mod buffer {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
