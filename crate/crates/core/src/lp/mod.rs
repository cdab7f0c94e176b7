//! Small exact linear programs.

mod simplex;
mod transport;

pub use simplex::{minimize, LpOutcome};
pub use transport::{min_cost_transport, TransportOutcome};
