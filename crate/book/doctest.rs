// mdbook cannot run the code blocks of a book that depends on a local
// crate, so each chapter is included here as a module docstring and
// `cargo test --doc -p amprb-book` runs them.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/added-damping.md")]
pub mod added_damping {}
#[doc = include_str!("src/grids.md")]
pub mod grids {}
#[doc = include_str!("src/time-stepping.md")]
pub mod time_stepping {}
#[doc = include_str!("src/verification.md")]
pub mod verification {}
#[doc = include_str!("src/command-line.md")]
pub mod command_line {}
