use std::fmt;

use crate::expr::Expr;

use super::solve::{bounded_reach, reach_prob, Backend};
use super::{DtmcError, DtmcModel};

/// `P=? [ F target ]` or `P=? [ F<=k target ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachQuery {
    pub target: Expr,
    pub bound: Option<u64>,
}

impl ReachQuery {
    pub fn eventually(target: Expr) -> Self {
        ReachQuery { target, bound: None }
    }

    pub fn parse(text: &str) -> Result<Self, DtmcError> {
        crate::prism::parse_query(text).map_err(|e| DtmcError::Query(e.to_string()))
    }
}

impl fmt::Display for ReachQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bound {
            Some(k) => write!(f, "P=? [ F<={k} {} ]", self.target),
            None => write!(f, "P=? [ F {} ]", self.target),
        }
    }
}

/// Per-state probabilities of satisfying the query.
pub fn query_values(model: &DtmcModel, query: &ReachQuery, backend: Backend) -> Result<Vec<f64>, DtmcError> {
    let target = model.states_where(&query.target)?;
    match query.bound {
        Some(k) => Ok(bounded_reach(model, &target, k)),
        None => reach_prob(model, &target, backend),
    }
}

/// Probability of the query from the initial state.
pub fn check_query(model: &DtmcModel, query: &ReachQuery, backend: Backend) -> Result<f64, DtmcError> {
    Ok(query_values(model, query, backend)?[model.initial])
}
