//! The `thermoptics` book, compiled so every listing runs as a doctest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/free_spins.md")]
pub mod free_spins {}

#[doc = include_str!("../../../book/src/double_slit.md")]
pub mod double_slit {}

#[doc = include_str!("../../../book/src/correspondence.md")]
pub mod correspondence {}

#[doc = include_str!("../../../book/src/duality.md")]
pub mod duality {}

#[doc = include_str!("../../../book/src/xy_chain.md")]
pub mod xy_chain {}

#[doc = include_str!("../../../book/src/transverse_ising.md")]
pub mod transverse_ising {}

#[doc = include_str!("../../../book/src/classical_ising.md")]
pub mod classical_ising {}

#[doc = include_str!("../../../book/src/exact_diagonalization.md")]
pub mod exact_diagonalization {}

#[doc = include_str!("../../../book/src/command_line.md")]
pub mod command_line {}
