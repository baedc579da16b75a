//! Attack laboratory for mix-and-mask instance encodings.
//!
//! The crate implements both sides of the experiment: an encoder that
//! blends two private images with public filler under a random sign mask,
//! and the attacks that undo it — clique clustering over an abs-correlation
//! similarity graph, exact flow assignment, constrained least squares and
//! projected gradient recovery, brute-force seed recovery against the
//! encoder's generator, and Monte-Carlo harnesses for the distinguishing
//! games that bound what any instance encoding can hide.
//!
//! The `parallel` feature (default) runs the data-parallel inner loops on
//! rayon; disabling it yields a dependency-light sequential build with
//! identical results.

pub mod assignment;
pub mod clustering;
pub mod encoder;
pub mod error;
pub mod io;
pub mod mcmf;
pub mod metrics;
pub mod mt19937;
mod par;
pub mod pipeline;
pub mod prngattack;
pub mod recovery;
pub mod similarity;
pub mod theory;
pub mod types;

pub use error::{Error, Result};
