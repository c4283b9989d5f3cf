//! The guide's chapters, compiled so their listings run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/lifetimes.md")]
pub mod lifetimes {}

#[doc = include_str!("../../../book/src/guesses.md")]
pub mod guesses {}

#[doc = include_str!("../../../book/src/two-approx.md")]
pub mod two_approx {}

#[doc = include_str!("../../../book/src/six-approx.md")]
pub mod six_approx {}

#[doc = include_str!("../../../book/src/streams.md")]
pub mod streams {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
