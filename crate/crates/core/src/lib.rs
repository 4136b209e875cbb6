//! Supply-chain-constrained generation expansion planning.

pub mod milp;
pub mod model;
pub mod ingest;
pub mod builder;
pub mod nbd;
pub mod oracle;
pub mod report;
