use serde::{Deserialize, Serialize};

use super::SearchTrace;

/// Counted work of a search run next to the modeled gate-network costs.
/// One detector call on `N` copies of an `n`-qubit register is charged
/// `N²n²`; one classical check costs `n + m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub num_vars: usize,
    pub connectives: usize,
    pub copies: u64,
    pub detector_calls: u64,
    pub classical_evaluations: u64,
    pub per_call_cost: f64,
    pub detection_cost: f64,
    pub per_query_verification_cost: f64,
    pub verification_cost: f64,
    pub total_cost: f64,
    /// `N²n³`.
    pub asymptotic_search: f64,
    /// `N²n⁴ + N²n³m`.
    pub asymptotic_sat: f64,
    /// `2ⁿ(n + m)`.
    pub classical_worst_case: f64,
}

pub fn cost_model(trace: &SearchTrace, n: usize, m: usize, copies: u64) -> CostReport {
    let nf = n as f64;
    let mf = m as f64;
    let big_n2 = (copies as f64).powi(2);
    let per_call_cost = big_n2 * nf * nf;
    let detection_cost = trace.detector_calls as f64 * per_call_cost;
    let per_query_verification_cost = nf + mf;
    let verification_cost = trace.classical_evaluations as f64 * per_query_verification_cost;
    CostReport {
        num_vars: n,
        connectives: m,
        copies,
        detector_calls: trace.detector_calls,
        classical_evaluations: trace.classical_evaluations,
        per_call_cost,
        detection_cost,
        per_query_verification_cost,
        verification_cost,
        total_cost: detection_cost + verification_cost,
        asymptotic_search: big_n2 * nf.powi(3),
        asymptotic_sat: big_n2 * nf.powi(4) + big_n2 * nf.powi(3) * mf,
        classical_worst_case: 2f64.powi(n as i32) * (nf + mf),
    }
}
