//! Meta-evaluation of machine translation metrics under different reference
//! sets, and allocation of a reference-creation budget across vendor levels.
//!
//! * [`corpus`]: multi-reference corpora, selectors and the TSV layout.
//! * [`metrics`]: sentence BLEU, chrF and TER plus external score tables.
//! * [`metaeval`]: pairwise human rankings, Kendall's tau, mixing and
//!   reference-count curves.
//! * [`allocator`]: the stochastic Add/Promote budget allocator.

pub mod allocator;
pub mod corpus;
pub mod error;
pub mod metaeval;
pub mod metrics;
pub mod rng;

pub use error::{Error, Result};

// The guide's code samples run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/metaeval.md")]
    mod metaeval {}
    #[doc = include_str!("../../../book/src/curves.md")]
    mod curves {}
    #[doc = include_str!("../../../book/src/allocation.md")]
    mod allocation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
}
