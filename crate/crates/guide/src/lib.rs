//! The book, kept honest: each module below embeds one chapter from
//! `book/src`, so every Rust snippet in the book compiles and runs as a
//! doctest of this crate. A chapter that drifts from the library fails
//! `cargo test` instead of quietly going stale.
//!
//! This crate exports no items; its entire value is the doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/losses.md")]
pub mod losses {}

#[doc = include_str!("../../../book/src/calibration.md")]
pub mod calibration {}

#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}

#[doc = include_str!("../../../book/src/data.md")]
pub mod data {}

#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod diagnostics {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/formats.md")]
pub mod formats {}
