//! Variable neighborhood descent over setup patterns.
//!
//! Products are independent, so a pass finds the best improving move of
//! every product against the same snapshot, sums the decreases into a
//! single `diff`, and applies all moves at once. The result is exact:
//! the new total equals the old total minus `diff`.
//!
//! The product loop may run on the current rayon pool
//! ([`VndMode::ProductParallel`]); the neighbor scan within a product is
//! always sequential.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::plan::{evaluate, product_cost, Cost, Matrix, SetupPlan};
use crate::model::Instance;
use crate::SolverError;

/// The four neighborhood structures, in descent order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Neighborhood {
    /// Flip one manufacturing setup bit.
    FlipManufacture,
    /// Flip one remanufacturing setup bit.
    FlipRemanufacture,
    /// Move a set bit of either matrix to an adjacent clear period.
    Shift,
    /// Swap the two bits of a period where they differ.
    Exchange,
}

impl Neighborhood {
    pub const ALL: [Neighborhood; 4] = [
        Neighborhood::FlipManufacture,
        Neighborhood::FlipRemanufacture,
        Neighborhood::Shift,
        Neighborhood::Exchange,
    ];
    pub const COUNT: usize = 4;

    /// One-based id, `1..=4`.
    pub fn from_id(id: usize) -> Result<Self, SolverError> {
        Self::ALL
            .get(id.wrapping_sub(1))
            .copied()
            .ok_or(SolverError::NeighborhoodOutOfRange(id))
    }

    pub fn id(self) -> usize {
        self as usize + 1
    }
}

/// A single edit of one product's setup rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Flip {
        product: usize,
        matrix: Matrix,
        period: usize,
    },
    Shift {
        product: usize,
        matrix: Matrix,
        from: usize,
        to: usize,
    },
    Exchange {
        product: usize,
        period: usize,
    },
}

impl Move {
    pub fn product(&self) -> usize {
        match *self {
            Move::Flip { product, .. } | Move::Shift { product, .. } | Move::Exchange { product, .. } => product,
        }
    }

    pub fn neighborhood(&self) -> Neighborhood {
        match *self {
            Move::Flip {
                matrix: Matrix::Manufacture,
                ..
            } => Neighborhood::FlipManufacture,
            Move::Flip {
                matrix: Matrix::Remanufacture,
                ..
            } => Neighborhood::FlipRemanufacture,
            Move::Shift { .. } => Neighborhood::Shift,
            Move::Exchange { .. } => Neighborhood::Exchange,
        }
    }

    /// The move that undoes this one.
    pub fn inverse(&self) -> Move {
        match *self {
            Move::Shift {
                product,
                matrix,
                from,
                to,
            } => Move::Shift {
                product,
                matrix,
                from: to,
                to: from,
            },
            other => other,
        }
    }

    fn apply_rows(&self, setup_m: &mut [bool], setup_r: &mut [bool]) {
        match *self {
            Move::Flip { matrix, period, .. } => {
                let row = select(matrix, setup_m, setup_r);
                row[period] = !row[period];
            }
            Move::Shift { matrix, from, to, .. } => select(matrix, setup_m, setup_r).swap(from, to),
            Move::Exchange { period, .. } => std::mem::swap(&mut setup_m[period], &mut setup_r[period]),
        }
    }

    pub fn apply(&self, plan: &mut SetupPlan) {
        match *self {
            Move::Flip {
                product,
                matrix,
                period,
            } => plan.flip(matrix, product, period),
            Move::Shift {
                product,
                matrix,
                from,
                to,
            } => plan.row_mut(matrix, product).swap(from, to),
            Move::Exchange { product, period } => {
                let m = plan.get(Matrix::Manufacture, product, period);
                let r = plan.get(Matrix::Remanufacture, product, period);
                plan.set(Matrix::Manufacture, product, period, r);
                plan.set(Matrix::Remanufacture, product, period, m);
            }
        }
    }
}

fn select<'a>(matrix: Matrix, setup_m: &'a mut [bool], setup_r: &'a mut [bool]) -> &'a mut [bool] {
    match matrix {
        Matrix::Manufacture => setup_m,
        Matrix::Remanufacture => setup_r,
    }
}

fn push_neighbors(setup_m: &[bool], setup_r: &[bool], nbh: Neighborhood, product: usize, out: &mut Vec<Move>) {
    let periods = setup_m.len();
    match nbh {
        Neighborhood::FlipManufacture | Neighborhood::FlipRemanufacture => {
            let matrix = if nbh == Neighborhood::FlipManufacture {
                Matrix::Manufacture
            } else {
                Matrix::Remanufacture
            };
            out.extend((0..periods).map(|period| Move::Flip {
                product,
                matrix,
                period,
            }));
        }
        Neighborhood::Shift => {
            for from in 0..periods {
                for (matrix, row) in [(Matrix::Manufacture, setup_m), (Matrix::Remanufacture, setup_r)] {
                    if !row[from] {
                        continue;
                    }
                    if from > 0 && !row[from - 1] {
                        out.push(Move::Shift {
                            product,
                            matrix,
                            from,
                            to: from - 1,
                        });
                    }
                    if from + 1 < periods && !row[from + 1] {
                        out.push(Move::Shift {
                            product,
                            matrix,
                            from,
                            to: from + 1,
                        });
                    }
                }
            }
        }
        Neighborhood::Exchange => {
            out.extend(
                (0..periods)
                    .filter(|&t| setup_m[t] != setup_r[t])
                    .map(|period| Move::Exchange { product, period }),
            );
        }
    }
}

/// Moves of neighborhood `nbh` for product `k`, in ascending period order.
pub fn enumerate_neighbors(plan: &SetupPlan, nbh: Neighborhood, k: usize) -> Vec<Move> {
    let mut out = Vec::new();
    push_neighbors(
        plan.row(Matrix::Manufacture, k),
        plan.row(Matrix::Remanufacture, k),
        nbh,
        k,
        &mut out,
    );
    out
}

/// Best strictly improving move for product `k` in `nbh`, with its cost
/// decrease. Ties go to the earliest move in enumeration order.
pub fn best_neighbor(inst: &Instance, plan: &SetupPlan, nbh: Neighborhood, k: usize) -> Option<(Move, i64)> {
    let mut setup_m = plan.row(Matrix::Manufacture, k).to_vec();
    let mut setup_r = plan.row(Matrix::Remanufacture, k).to_vec();
    let current = product_cost(inst, k, &setup_m, &setup_r).finite()?;

    let mut moves = Vec::with_capacity(2 * setup_m.len());
    push_neighbors(&setup_m, &setup_r, nbh, k, &mut moves);

    let mut best: Option<(Move, i64)> = None;
    for mv in moves {
        mv.apply_rows(&mut setup_m, &mut setup_r);
        let cost = product_cost(inst, k, &setup_m, &setup_r);
        mv.inverse().apply_rows(&mut setup_m, &mut setup_r);
        if let Cost::Finite(c) = cost {
            if c < current && best.is_none_or(|(_, b)| c < b) {
                best = Some((mv, c));
            }
        }
    }
    best.map(|(mv, c)| (mv, current - c))
}

/// Whether the product loop of a pass runs serially or on the rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VndMode {
    Serial,
    ProductParallel,
}

impl fmt::Display for VndMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VndMode::Serial => "serial",
            VndMode::ProductParallel => "product-parallel",
        })
    }
}

impl FromStr for VndMode {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "serial" => Ok(VndMode::Serial),
            "product-parallel" => Ok(VndMode::ProductParallel),
            other => Err(SolverError::UnknownMode(other.to_string())),
        }
    }
}

/// Per-product best moves of one pass and their summed decrease.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImprovementDelta {
    /// Indexed by product; `None` where no improving move exists.
    pub moves: Vec<Option<(Move, i64)>>,
    pub diff: i64,
}

impl ImprovementDelta {
    pub fn is_improving(&self) -> bool {
        self.diff > 0
    }

    /// Applies every per-product move to `plan` in place.
    pub fn apply_to(&self, plan: &mut SetupPlan) {
        for (mv, _) in self.moves.iter().flatten() {
            mv.apply(plan);
        }
    }
}

/// Finds the best move of every product in `nbh` against `plan`.
pub fn vnd_pass(inst: &Instance, plan: &SetupPlan, nbh: Neighborhood, mode: VndMode) -> ImprovementDelta {
    let moves: Vec<Option<(Move, i64)>> = match mode {
        VndMode::Serial => (0..inst.products).map(|k| best_neighbor(inst, plan, nbh, k)).collect(),
        VndMode::ProductParallel => (0..inst.products)
            .into_par_iter()
            .map(|k| best_neighbor(inst, plan, nbh, k))
            .collect(),
    };
    let diff = moves.iter().flatten().map(|(_, d)| d).sum();
    ImprovementDelta { moves, diff }
}

/// `plan` with every move of `delta` applied. `delta` must have been
/// computed against this exact plan.
pub fn apply_delta(plan: &SetupPlan, delta: &ImprovementDelta) -> SetupPlan {
    let mut next = plan.clone();
    delta.apply_to(&mut next);
    next
}

/// Result of a full descent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VndOutcome {
    pub plan: SetupPlan,
    pub cost: Cost,
    /// Completed sweeps over `1..=kmax_vnd`, including the final idle one.
    pub sweeps: usize,
    /// Total cost before descent, then after every applied pass.
    pub trace: Vec<i64>,
}

/// Descends from `plan` until a sweep over neighborhoods `1..=kmax_vnd`
/// finds no improving move for any product.
///
/// Panics if `plan` is infeasible or `kmax_vnd` is outside `1..=4`.
pub fn vnd(inst: &Instance, plan: &SetupPlan, kmax_vnd: usize, mode: VndMode) -> VndOutcome {
    assert!(
        (1..=Neighborhood::COUNT).contains(&kmax_vnd),
        "kmax_vnd must be in 1..=4, got {kmax_vnd}"
    );
    let mut plan = plan.clone();
    let mut cost = evaluate(inst, &plan)
        .finite()
        .expect("vnd requires a feasible starting plan");
    let mut trace = vec![cost];
    let mut sweeps = 0;
    loop {
        let mut improvement = false;
        for &nbh in &Neighborhood::ALL[..kmax_vnd] {
            let delta = vnd_pass(inst, &plan, nbh, mode);
            if delta.is_improving() {
                delta.apply_to(&mut plan);
                cost -= delta.diff;
                trace.push(cost);
                improvement = true;
            }
        }
        sweeps += 1;
        if !improvement {
            break;
        }
    }
    debug_assert_eq!(evaluate(inst, &plan), Cost::Finite(cost));
    VndOutcome {
        plan,
        cost: Cost::Finite(cost),
        sweeps,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_instance, GeneratorConfig};
    use crate::plan::{evaluate_product, initial_solution};
    use proptest::prelude::*;

    fn tiny() -> Instance {
        let mut inst = Instance::zeros(1, 2);
        inst.demand = vec![vec![2, 3]];
        inst.setup_cost_m = vec![1000];
        inst.holding_cost_m = vec![100];
        inst
    }

    fn generated(k: usize, t: usize, seed: u64) -> Instance {
        generate_instance(&GeneratorConfig::new(k, t, seed)).unwrap()
    }

    #[test]
    fn neighborhood_ids() {
        for (i, n) in Neighborhood::ALL.iter().enumerate() {
            assert_eq!(n.id(), i + 1);
            assert_eq!(Neighborhood::from_id(i + 1).unwrap(), *n);
        }
        assert!(Neighborhood::from_id(0).is_err());
        assert!(Neighborhood::from_id(5).is_err());
    }

    #[test]
    fn flip_neighborhood_has_one_move_per_period() {
        let plan = SetupPlan::from_rows(&[vec![true, false, false]], &[vec![false; 3]]);
        let moves = enumerate_neighbors(&plan, Neighborhood::FlipManufacture, 0);
        assert_eq!(moves.len(), 3);
        let periods: Vec<_> = moves
            .iter()
            .map(|m| match m {
                Move::Flip { period, .. } => *period,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(periods, vec![0, 1, 2]);
    }

    #[test]
    fn exchange_only_where_bits_differ() {
        let plan = SetupPlan::from_rows(&[vec![true, false]], &[vec![false, false]]);
        assert_eq!(
            enumerate_neighbors(&plan, Neighborhood::Exchange, 0),
            vec![Move::Exchange { product: 0, period: 0 }]
        );
    }

    #[test]
    fn shift_needs_a_set_bit() {
        let plan = SetupPlan::new(2, 5);
        assert!(enumerate_neighbors(&plan, Neighborhood::Shift, 1).is_empty());
        let plan = SetupPlan::from_rows(&[vec![true, false, true, true]], &[vec![false, true, false, false]]);
        // m: 0->1, 2->1; r: 1->0, 1->2; m bit 3 blocked by 2
        assert_eq!(enumerate_neighbors(&plan, Neighborhood::Shift, 0).len(), 4);
    }

    #[test]
    fn best_flip_drops_redundant_setup() {
        let inst = tiny();
        let plan = SetupPlan::from_rows(&[vec![true, true]], &[vec![false, false]]);
        assert_eq!(evaluate(&inst, &plan), Cost::Finite(2000));
        // flipping t=0 is infeasible (2000 -> INF), flipping t=1 gives 1300
        let (mv, dec) = best_neighbor(&inst, &plan, Neighborhood::FlipManufacture, 0).unwrap();
        assert_eq!(
            mv,
            Move::Flip {
                product: 0,
                matrix: Matrix::Manufacture,
                period: 1
            }
        );
        assert_eq!(dec, 700);
    }

    #[test]
    fn no_move_at_fixpoint_or_when_only_infeasible() {
        let inst = tiny();
        let plan = SetupPlan::from_rows(&[vec![true, false]], &[vec![false, false]]);
        for nbh in Neighborhood::ALL {
            assert_eq!(best_neighbor(&inst, &plan, nbh, 0), None);
        }
    }

    #[test]
    fn pass_sums_independent_products() {
        let inst = tiny().select_products(&[0, 0]);
        let plan = SetupPlan::from_rows(&vec![vec![true, true]; 2], &vec![vec![false, false]; 2]);
        let delta = vnd_pass(&inst, &plan, Neighborhood::FlipManufacture, VndMode::Serial);
        assert_eq!(delta.diff, 1400);
        let next = apply_delta(&plan, &delta);
        assert_eq!(evaluate(&inst, &next), Cost::Finite(4000 - 1400));

        let idle = vnd_pass(&inst, &next, Neighborhood::FlipManufacture, VndMode::Serial);
        assert_eq!(idle.diff, 0);
        assert!(idle.moves.iter().all(Option::is_none));
        assert_eq!(apply_delta(&next, &idle), next);
    }

    #[test]
    fn single_product_delta_equals_direct_move() {
        let inst = tiny();
        let plan = SetupPlan::from_rows(&[vec![true, true]], &[vec![false, false]]);
        let delta = vnd_pass(&inst, &plan, Neighborhood::FlipManufacture, VndMode::Serial);
        let (mv, _) = delta.moves[0].unwrap();
        let mut direct = plan.clone();
        mv.apply(&mut direct);
        assert_eq!(apply_delta(&plan, &delta), direct);
    }

    #[test]
    fn vnd_reaches_decoder_optimum_on_tiny() {
        let inst = tiny();
        let start = SetupPlan::from_rows(&[vec![true, true]], &[vec![false, false]]);
        let out = vnd(&inst, &start, 4, VndMode::Serial);
        assert_eq!(out.plan, SetupPlan::from_rows(&[vec![true, false]], &[vec![false, false]]));
        assert_eq!(out.cost, Cost::Finite(1300));
        assert_eq!(out.trace, vec![2000, 1300]);
    }

    #[test]
    fn vnd_at_fixpoint_is_identity() {
        let inst = tiny();
        let start = SetupPlan::from_rows(&[vec![true, false]], &[vec![false, false]]);
        let out = vnd(&inst, &start, 4, VndMode::Serial);
        assert_eq!(out.plan, start);
        assert_eq!(out.sweeps, 1);
        assert_eq!(out.trace, vec![1300]);
    }

    #[test]
    fn parallel_pass_matches_serial_on_generated() {
        let inst = generated(40, 20, 5);
        let plan = initial_solution(&inst);
        for nbh in Neighborhood::ALL {
            assert_eq!(
                vnd_pass(&inst, &plan, nbh, VndMode::Serial),
                vnd_pass(&inst, &plan, nbh, VndMode::ProductParallel)
            );
        }
    }

    #[test]
    fn mode_parses() {
        assert_eq!("product-parallel".parse::<VndMode>().unwrap(), VndMode::ProductParallel);
        assert!("gpu".parse::<VndMode>().is_err());
    }

    proptest! {
        #[test]
        fn move_then_inverse_restores(k in 1usize..4, t in 2usize..12, seed in any::<u64>(), nbh in 1usize..=4) {
            let inst = generated(k, t, seed);
            let plan = initial_solution(&inst);
            let nbh = Neighborhood::from_id(nbh).unwrap();
            for p in 0..k {
                for mv in enumerate_neighbors(&plan, nbh, p) {
                    prop_assert_eq!(mv.neighborhood(), nbh);
                    let mut edited = plan.clone();
                    mv.apply(&mut edited);
                    prop_assert!(edited != plan);
                    for j in (0..k).filter(|&j| j != p) {
                        prop_assert_eq!(edited.row(Matrix::Manufacture, j), plan.row(Matrix::Manufacture, j));
                        prop_assert_eq!(edited.row(Matrix::Remanufacture, j), plan.row(Matrix::Remanufacture, j));
                    }
                    mv.inverse().apply(&mut edited);
                    prop_assert_eq!(&edited, &plan);
                }
            }
        }

        #[test]
        fn neighborhood_sizes_are_bounded(k in 1usize..3, t in 1usize..15, seed in any::<u64>()) {
            let inst = generated(k, t, seed);
            let plan = initial_solution(&inst);
            for p in 0..k {
                prop_assert_eq!(enumerate_neighbors(&plan, Neighborhood::FlipManufacture, p).len(), t);
                prop_assert_eq!(enumerate_neighbors(&plan, Neighborhood::FlipRemanufacture, p).len(), t);
                prop_assert!(enumerate_neighbors(&plan, Neighborhood::Shift, p).len() <= 2 * (t - 1));
                prop_assert!(enumerate_neighbors(&plan, Neighborhood::Exchange, p).len() <= t);
            }
        }

        #[test]
        fn best_neighbor_is_brute_force_minimum(k in 1usize..3, t in 1usize..10, seed in any::<u64>(), nbh in 1usize..=4) {
            let inst = generated(k, t, seed);
            let plan = initial_solution(&inst);
            let nbh = Neighborhood::from_id(nbh).unwrap();
            for p in 0..k {
                let current = evaluate_product(&inst, &plan, p);
                let mut expect: Option<(Move, Cost)> = None;
                for mv in enumerate_neighbors(&plan, nbh, p) {
                    let mut n = plan.clone();
                    mv.apply(&mut n);
                    let c = evaluate(&inst, &n);
                    if c < evaluate(&inst, &plan) && expect.is_none_or(|(_, b)| c < b) {
                        expect = Some((mv, c));
                    }
                }
                let got = best_neighbor(&inst, &plan, nbh, p);
                prop_assert_eq!(got.map(|(m, _)| m), expect.map(|(m, _)| m));
                if let (Some((_, dec)), Some((_, c))) = (got, expect) {
                    let others: i64 = (0..k).filter(|&j| j != p).map(|j| evaluate_product(&inst, &plan, j).cents()).sum();
                    prop_assert_eq!(c.cents(), others + current.cents() - dec);
                }
            }
        }

        #[test]
        fn apply_delta_is_exact(k in 1usize..8, t in 1usize..16, seed in any::<u64>(), nbh in 1usize..=4) {
            let inst = generated(k, t, seed);
            let plan = initial_solution(&inst);
            let delta = vnd_pass(&inst, &plan, Neighborhood::from_id(nbh).unwrap(), VndMode::Serial);
            prop_assert!(delta.diff >= 0);
            let next = apply_delta(&plan, &delta);
            prop_assert_eq!(evaluate(&inst, &next).cents(), evaluate(&inst, &plan).cents() - delta.diff);
        }

        #[test]
        fn vnd_is_monotone_and_a_fixpoint(k in 1usize..5, t in 1usize..14, seed in any::<u64>(), kmax in 1usize..=4) {
            let inst = generated(k, t, seed);
            let out = vnd(&inst, &initial_solution(&inst), kmax, VndMode::Serial);
            prop_assert!(out.trace.windows(2).all(|w| w[1] < w[0]));
            prop_assert_eq!(evaluate(&inst, &out.plan), out.cost);
            for &nbh in &Neighborhood::ALL[..kmax] {
                for p in 0..k {
                    prop_assert_eq!(best_neighbor(&inst, &out.plan, nbh, p), None);
                }
            }
        }
    }
}
