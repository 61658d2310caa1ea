//! Joint *-moments and cyclic cumulants of arrays of matricially free
//! circular operators.
//!
//! Three independent engines compute the same numbers: sums over adapted
//! colored noncrossing pairings ([`moments`]), exact operator evaluation on a
//! matricially free Fock space ([`fock`]), and Monte Carlo estimates from
//! Gaussian block matrices ([`randmat`]).

pub mod cumulants;
pub mod cuntz;
pub mod error;
pub mod fock;
pub mod moments;
pub mod partitions;
pub mod randmat;
pub mod scalar;
pub mod spec;
pub mod word;

pub use error::{Error, Result};
pub use partitions::{Coloring, OuterStructure, Partition};
pub use scalar::{ComplexRational, Rational};
pub use spec::CovarianceSpec;
pub use word::{EpsWord, Letter, MatrixIndexTuple, Word};

/// Version recorded in report provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
