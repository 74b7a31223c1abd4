//! Compatible conditional specifications for multivariate count data.

pub mod compat;
pub mod dists;
pub mod error;
pub mod families;
pub mod joint;
pub mod lince;
pub mod linalg;
pub mod num;
pub mod oracle;
pub mod series;
pub mod simplex;
pub mod simulate;

pub use dists::CountDistribution;
pub use error::{Error, Result};
pub use joint::JointPmf;
pub use num::Real;
pub use series::{BivariateSeries, TruncatedSeries};

pub type Series = TruncatedSeries<f64>;
pub type Bivariate = BivariateSeries<f64>;
pub type Joint = JointPmf<f64>;
pub type LinearCe = lince::LinearCeSpec<f64>;
pub type Lp = simplex::LpSystem<f64>;
pub type Mat = linalg::Matrix<f64>;
