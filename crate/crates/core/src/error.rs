use thiserror::Error;

use crate::graph::GraphError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{what}: {needed} exceeds the budget of {limit}")]
    Budget { what: &'static str, needed: f64, limit: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("lambda_{k} = {value:e} is not positive")]
    LambdaNotPositive { k: usize, value: f64 },
    #[error("beta = {beta} is below the required threshold {required}")]
    BetaBelowThreshold { beta: f64, required: f64 },
    #[error("Koteck\u{fd}-Preiss test failed: a = {a} > -log(Delta + 2) = {bound}")]
    KpNotVerified { a: f64, bound: f64 },
    #[error("not a partition: {0}")]
    NotAPartition(String),
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_budget(what: &'static str, needed: f64, limit: f64) -> Result<()> {
    if needed > limit {
        Err(Error::Budget { what, needed, limit })
    } else {
        Ok(())
    }
}
