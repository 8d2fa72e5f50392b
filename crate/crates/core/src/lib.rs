//! GRW spontaneous-localization dynamics, fuzzy-link semantics, and the
//! counting experiments built on them.

pub mod amplitude;
pub mod error;
pub mod grw;
pub mod io;
pub mod lattice;
pub mod scenarios;
pub mod semantics;
pub mod state;

pub use amplitude::Amplitude;
pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/hits.md")]
    mod hits {}
    #[doc = include_str!("../../../book/src/fuzzy-link.md")]
    mod fuzzy_link {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
