// mdbook cannot run listings that depend on a local crate, so every chapter
// is included as the doc comment of its own module and `cargo test --doc`
// runs the listings. One module per chapter keeps failures attributable.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/geometry.md")]
pub mod geometry {}
#[doc = include_str!("src/sampling.md")]
pub mod sampling {}
#[doc = include_str!("src/encoding.md")]
pub mod encoding {}
#[doc = include_str!("src/network.md")]
pub mod network {}
#[doc = include_str!("src/experiments.md")]
pub mod experiments {}
#[doc = include_str!("src/formats.md")]
pub mod formats {}
#[doc = include_str!("src/cli.md")]
pub mod cli {}
