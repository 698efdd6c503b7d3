//! Exhaustive reference solver for tiny instances.
//!
//! Enumerates every setup pattern of each product separately and keeps the
//! cheapest under the decoder. This is the optimum of the space the
//! heuristics search, not of the underlying mixed-integer model.

use rayon::prelude::*;

use crate::model::Instance;
use crate::plan::{product_cost, Cost, Matrix, SetupPlan};
use crate::SolverError;

/// Largest horizon the oracle accepts: `2^(2T)` patterns per product.
pub const MAX_ORACLE_PERIODS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSolution {
    pub cost: Cost,
    pub plan: SetupPlan,
}

fn unpack(mask: u32, periods: usize, setup_m: &mut [bool], setup_r: &mut [bool]) {
    for t in 0..periods {
        setup_m[t] = mask >> t & 1 == 1;
        setup_r[t] = mask >> (periods + t) & 1 == 1;
    }
}

fn best_pattern(inst: &Instance, k: usize) -> (Cost, u32) {
    let periods = inst.periods;
    let mut m = vec![false; periods];
    let mut r = vec![false; periods];
    let mut best = (Cost::Infeasible, 0);
    for mask in 0..1u32 << (2 * periods) {
        unpack(mask, periods, &mut m, &mut r);
        let c = product_cost(inst, k, &m, &r);
        if c < best.0 {
            best = (c, mask);
        }
    }
    best
}

/// Decoder-optimal plan. Ties go to the numerically smallest pattern mask.
pub fn enumerate_optimal(inst: &Instance) -> Result<OracleSolution, SolverError> {
    if inst.periods > MAX_ORACLE_PERIODS {
        return Err(SolverError::OracleIntractable {
            periods: inst.periods,
            max: MAX_ORACLE_PERIODS,
        });
    }
    let per_product: Vec<(Cost, u32)> = (0..inst.products)
        .into_par_iter()
        .map(|k| best_pattern(inst, k))
        .collect();

    let mut plan = SetupPlan::for_instance(inst);
    let mut m = vec![false; inst.periods];
    let mut r = vec![false; inst.periods];
    for (k, &(_, mask)) in per_product.iter().enumerate() {
        unpack(mask, inst.periods, &mut m, &mut r);
        plan.row_mut(Matrix::Manufacture, k).copy_from_slice(&m);
        plan.row_mut(Matrix::Remanufacture, k).copy_from_slice(&r);
    }
    Ok(OracleSolution {
        cost: per_product.iter().map(|&(c, _)| c).sum(),
        plan,
    })
}
