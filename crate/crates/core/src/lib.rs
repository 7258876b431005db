//! Credit network engine: clearing with default costs, portfolio compression,
//! debt removal, execution-strategy search, synthetic network generation and
//! the statement-to-network aggregation pipeline.

pub mod clearing;
pub mod corpus;
pub mod experiment;
pub mod generators;
pub mod model;
pub mod operations;
pub mod seed;
pub mod statements;
pub mod strategies;

pub use clearing::{clear, verify_fixed_point, ClearingConfig, ClearingError, ClearingResult};
pub use model::{CreditNetwork, FirmMetrics, ModelError, PaymentMatrix};
pub use operations::{DebtCycle, DebtEdge, OperationError};
