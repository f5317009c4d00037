//! Hopf-algebraic machinery for branched, geometric and anisotropic rough
//! paths on dyadic grids.

pub mod action;
pub mod basis;
pub mod bcfp;
pub mod bch;
pub mod bck;
pub mod construct;
pub mod dual;
pub mod error;
pub mod forest;
pub mod hairer_kelly;
pub mod io;
pub mod lincomb;
pub mod scalar;
pub mod shuffle;
pub mod signature;

pub use error::{Error, Result};
