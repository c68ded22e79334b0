//! Cost-saving metrics of a tool-selection strategy relative to invoking
//! every tool.
//!
//! Both metrics take the strategy's share of correctly fixed bugs and
//! subtract its share of the cost. They are negative when a strategy pays
//! relatively more than it fixes.

#[derive(Debug, thiserror::Error, Clone, Copy, PartialEq, Eq)]
pub enum MetricError {
    #[error("invoking all tools fixed no bug correctly")]
    NoBaselineFixes,
    #[error("invoking all tools has zero {0}")]
    NoBaselineCost(&'static str),
}

fn saving(
    r_strategy: u64,
    r_all: u64,
    cost_strategy: u64,
    cost_all: u64,
    what: &'static str,
) -> Result<f64, MetricError> {
    if r_all == 0 {
        return Err(MetricError::NoBaselineFixes);
    }
    if cost_all == 0 {
        return Err(MetricError::NoBaselineCost(what));
    }
    Ok(r_strategy as f64 / r_all as f64 - cost_strategy as f64 / cost_all as f64)
}

/// Tool invocation saving percentage, as a fraction.
pub fn tisp(r_strategy: u64, r_all: u64, tit_strategy: u64, tit_all: u64) -> Result<f64, MetricError> {
    saving(r_strategy, r_all, tit_strategy, tit_all, "tool invocations")
}

/// Human validation saving percentage, as a fraction.
pub fn hvsp(r_strategy: u64, r_all: u64, hvt_strategy: u64, hvt_all: u64) -> Result<f64, MetricError> {
    saving(r_strategy, r_all, hvt_strategy, hvt_all, "human validations")
}
