//! Ollivier curvature, extremal Lipschitz extensions and Lipschitz-sharp
//! harmonic functions on finite windows of weighted graphs.

pub mod curvature;
pub mod error;
pub mod families;
pub mod graph;
pub mod harmonic;
pub mod io;
pub mod lipschitz;
pub mod lp;
pub mod metric;
pub mod partition;
pub mod properties;
pub mod rational;

pub use error::{Error, Result};
pub use graph::{Field, GraphBuilder, MetricMode, ScalarField, WeightedGraph};
pub use metric::Metric;
pub use partition::{connect_partition, SalamiPartition, Side};
pub use rational::Rational;
