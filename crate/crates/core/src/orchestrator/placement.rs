use super::Placement;
use crate::appgraph::{check_requirements, AppGraph};
use crate::error::{Error, Result};
use crate::fabric::Infrastructure;

/// Every assignment of functions to nodes that respects tier constraints and
/// the end-to-end delay/throughput requirements.
///
/// A function may only be hosted on a tier it has a performance profile for.
/// Output order is lexicographic: the first function varies slowest, and each
/// function walks nodes in infrastructure order.
pub fn enumerate_placements(app: &AppGraph, infra: &Infrastructure) -> Result<Vec<Placement>> {
    let mut candidates: Vec<Vec<&str>> = Vec::with_capacity(app.functions.len());
    for f in &app.functions {
        if let Some(t) = &f.tier_constraint {
            if infra.nodes_in_tier(t).next().is_none() {
                return Err(Error::NoNodeForTier {
                    function: f.id.clone(),
                    tier: t.to_string(),
                });
            }
        }
        candidates.push(
            infra
                .nodes
                .iter()
                .filter(|n| f.runs_on(&n.tier))
                .map(|n| n.id.as_str())
                .collect(),
        );
    }
    if candidates.iter().any(Vec::is_empty) {
        return Ok(Vec::new());
    }

    let mut out = Vec::new();
    let mut digits = vec![0usize; candidates.len()];
    loop {
        let placement = Placement::from_pairs(
            app.functions
                .iter()
                .zip(&digits)
                .enumerate()
                .map(|(i, (f, &d))| (f.id.as_str(), candidates[i][d])),
        );
        if check_requirements(app, infra, &placement)?.feasible {
            out.push(placement);
        }
        // Odometer increment, last function fastest.
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < candidates[pos].len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}
