//! Hoeffding decomposition kernels and one-term Edgeworth expansions for
//! L-statistics `L_n = (1/n) Σ c_j X_{j:n}` of a simple random sample drawn
//! without replacement from a finite population.
//!
//! ```
//! use finpop::{EdgeworthModel, Population, SigmaMode, WeightScheme};
//!
//! let pop = Population::new(vec![0.0, 1.0, 2.0, 3.0, 4.0])?;
//! let max_stat = WeightScheme::explicit(vec![0.0, 2.0])?;
//! let model = EdgeworthModel::build(&pop, &max_stat, SigmaMode::Exact)?;
//! assert!((model.mean_l - 3.0).abs() < 1e-12);
//! assert!((model.alpha - 0.809592).abs() < 1e-6);
//! # Ok::<(), finpop::Error>(())
//! ```

pub mod cli;
pub mod edgeworth;
mod error;
pub mod kernels;
pub mod montecarlo;
pub mod population;
pub mod rng;
pub mod sum;
pub mod weights;

pub use edgeworth::{EdgeworthModel, Expansion, SigmaMode};
pub use error::{Error, Result};
pub use kernels::KernelSet;
pub use montecarlo::{EmpiricalCdf, SimulationPlan};
pub use population::Population;
pub use weights::{ScoreKind, WeightScheme};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/population.md")]
    mod population {}
    #[doc = include_str!("../../../book/src/weights.md")]
    mod weights {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/edgeworth.md")]
    mod edgeworth {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
