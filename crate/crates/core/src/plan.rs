//! Setup-pattern encoding and the deterministic decoder.
//!
//! A [`SetupPlan`] only says in which periods each product may be
//! manufactured or remanufactured. Quantities follow from the pattern:
//! every setup period opens a segment that runs until the next setup period
//! of the same product, and the whole segment demand is produced at its
//! start, remanufacturing first from the recoverable stock available then,
//! manufacturing the remainder. A pattern that cannot meet its demand this
//! way is [`Cost::Infeasible`].

use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use crate::model::Instance;

/// Objective value in cents, or the absorbing infeasible value which
/// compares greater than every finite cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cost {
    Finite(i64),
    Infeasible,
}

impl Cost {
    pub const ZERO: Cost = Cost::Finite(0);

    pub fn is_feasible(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Cost::Finite(c) => Some(c),
            Cost::Infeasible => None,
        }
    }

    /// Cents value of a feasible cost.
    ///
    /// Panics on [`Cost::Infeasible`].
    pub fn cents(self) -> i64 {
        self.finite().expect("cost is infeasible")
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infeasible,
        }
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, Add::add)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(c) => f.write_str(&format_cents(*c)),
            Cost::Infeasible => f.write_str("INFEASIBLE"),
        }
    }
}

/// Fixed-point rendering with two decimals: `1300` becomes `"13.00"`.
pub fn format_cents(cents: i64) -> String {
    let sign = if cents < 0 { "-" } else { "" };
    let abs = cents.unsigned_abs();
    format!("{sign}{}.{:02}", abs / 100, abs % 100)
}

/// Which of the two setup matrices a bit belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Matrix {
    Manufacture,
    Remanufacture,
}

/// Two boolean `products x periods` setup matrices, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetupPlan {
    products: usize,
    periods: usize,
    setup_m: Vec<bool>,
    setup_r: Vec<bool>,
}

impl SetupPlan {
    /// All-false plan.
    pub fn new(products: usize, periods: usize) -> Self {
        Self {
            products,
            periods,
            setup_m: vec![false; products * periods],
            setup_r: vec![false; products * periods],
        }
    }

    pub fn for_instance(inst: &Instance) -> Self {
        Self::new(inst.products, inst.periods)
    }

    /// Builds a plan from nested `[product][period]` rows.
    ///
    /// Panics if the rows are ragged or the two matrices differ in shape.
    pub fn from_rows(setup_m: &[Vec<bool>], setup_r: &[Vec<bool>]) -> Self {
        assert_eq!(setup_m.len(), setup_r.len(), "matrices differ in row count");
        let products = setup_m.len();
        let periods = setup_m.first().map_or(0, Vec::len);
        let mut plan = Self::new(products, periods);
        for k in 0..products {
            assert_eq!(setup_m[k].len(), periods, "ragged setup_m");
            assert_eq!(setup_r[k].len(), periods, "ragged setup_r");
            plan.row_mut(Matrix::Manufacture, k).copy_from_slice(&setup_m[k]);
            plan.row_mut(Matrix::Remanufacture, k).copy_from_slice(&setup_r[k]);
        }
        plan
    }

    pub fn products(&self) -> usize {
        self.products
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn matches(&self, inst: &Instance) -> bool {
        self.products == inst.products && self.periods == inst.periods
    }

    fn bits(&self, matrix: Matrix) -> &Vec<bool> {
        match matrix {
            Matrix::Manufacture => &self.setup_m,
            Matrix::Remanufacture => &self.setup_r,
        }
    }

    fn bits_mut(&mut self, matrix: Matrix) -> &mut Vec<bool> {
        match matrix {
            Matrix::Manufacture => &mut self.setup_m,
            Matrix::Remanufacture => &mut self.setup_r,
        }
    }

    pub fn row(&self, matrix: Matrix, product: usize) -> &[bool] {
        let t = self.periods;
        &self.bits(matrix)[product * t..(product + 1) * t]
    }

    pub fn row_mut(&mut self, matrix: Matrix, product: usize) -> &mut [bool] {
        let t = self.periods;
        &mut self.bits_mut(matrix)[product * t..(product + 1) * t]
    }

    pub fn get(&self, matrix: Matrix, product: usize, period: usize) -> bool {
        self.row(matrix, product)[period]
    }

    pub fn set(&mut self, matrix: Matrix, product: usize, period: usize, value: bool) {
        self.row_mut(matrix, product)[period] = value;
    }

    pub fn flip(&mut self, matrix: Matrix, product: usize, period: usize) {
        let bit = &mut self.row_mut(matrix, product)[period];
        *bit = !*bit;
    }

    /// Copies product `k`'s rows from `other`.
    pub fn copy_product_from(&mut self, other: &SetupPlan, k: usize) {
        for m in [Matrix::Manufacture, Matrix::Remanufacture] {
            self.row_mut(m, k).copy_from_slice(other.row(m, k));
        }
    }

    /// Number of differing setup bits across both matrices.
    pub fn hamming(&self, other: &SetupPlan) -> usize {
        let diff = |a: &[bool], b: &[bool]| a.iter().zip(b).filter(|(x, y)| x != y).count();
        diff(&self.setup_m, &other.setup_m) + diff(&self.setup_r, &other.setup_r)
    }
}

/// Quantities, inventories and costs implied by a [`SetupPlan`].
///
/// Rows of an infeasible product are all zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedPlan {
    pub qty_m: Vec<Vec<i64>>,
    pub qty_r: Vec<Vec<i64>>,
    pub inv_m: Vec<Vec<i64>>,
    pub inv_r: Vec<Vec<i64>>,
    pub cost_per_product: Vec<Cost>,
    pub total_cost: Cost,
}

impl DecodedPlan {
    /// `product,period,x_m,x_r,y_m,y_r` rows, zero-based indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("product,period,x_m,x_r,y_m,y_r\n");
        for k in 0..self.qty_m.len() {
            for t in 0..self.qty_m[k].len() {
                out.push_str(&format!(
                    "{k},{t},{},{},{},{}\n",
                    self.qty_m[k][t], self.qty_r[k][t], self.inv_m[k][t], self.inv_r[k][t]
                ));
            }
        }
        out
    }
}

/// Per-period output rows of one product.
struct ProductRows<'a> {
    qty_m: &'a mut [i64],
    qty_r: &'a mut [i64],
    inv_m: &'a mut [i64],
    inv_r: &'a mut [i64],
}

/// Walks one product's segments, optionally recording per-period rows.
fn walk_product(
    inst: &Instance,
    k: usize,
    setup_m: &[bool],
    setup_r: &[bool],
    mut rows: Option<&mut ProductRows<'_>>,
) -> Cost {
    let demand = &inst.demand[k];
    let returns = &inst.returns[k];
    let (km, kr) = (inst.setup_cost_m[k], inst.setup_cost_r[k]);
    let (hm, hr) = (inst.holding_cost_m[k], inst.holding_cost_r[k]);
    let (pm, pr) = (inst.unit_cost_m[k], inst.unit_cost_r[k]);
    let periods = demand.len();

    let mut inv_m = 0i64;
    let mut inv_r = 0i64;
    let mut cost = 0i64;
    let mut t = 0;
    while t < periods {
        if !(setup_m[t] || setup_r[t]) {
            // only reachable before the first setup
            if demand[t] > 0 {
                return Cost::Infeasible;
            }
            inv_r += returns[t];
            cost += hr * inv_r;
            if let Some(rows) = rows.as_deref_mut() {
                rows.inv_r[t] = inv_r;
            }
            t += 1;
            continue;
        }

        let start = t;
        let mut end = start + 1;
        while end < periods && !(setup_m[end] || setup_r[end]) {
            end += 1;
        }
        let segment_demand: i64 = demand[start..end].iter().sum();

        let available = inv_r + returns[start];
        let x_r = if setup_r[start] {
            available.min(segment_demand)
        } else {
            0
        };
        let x_m = segment_demand - x_r;
        if x_m > 0 && !setup_m[start] {
            return Cost::Infeasible;
        }
        if x_m > 0 {
            cost += km + pm * x_m;
        }
        if x_r > 0 {
            cost += kr + pr * x_r;
        }

        for tau in start..end {
            let (made, remade) = if tau == start { (x_m, x_r) } else { (0, 0) };
            inv_m += made + remade - demand[tau];
            inv_r += returns[tau] - remade;
            cost += hm * inv_m + hr * inv_r;
            if let Some(rows) = rows.as_deref_mut() {
                rows.qty_m[tau] = made;
                rows.qty_r[tau] = remade;
                rows.inv_m[tau] = inv_m;
                rows.inv_r[tau] = inv_r;
            }
        }
        t = end;
    }
    Cost::Finite(cost)
}

/// Cost of product `k` under the given setup rows, without materialising
/// quantities. This is the hot path of the neighborhood search.
pub fn product_cost(inst: &Instance, k: usize, setup_m: &[bool], setup_r: &[bool]) -> Cost {
    walk_product(inst, k, setup_m, setup_r, None)
}

/// Full decode of `plan` against `inst`.
///
/// Panics if the plan's shape does not match the instance.
pub fn decode(inst: &Instance, plan: &SetupPlan) -> DecodedPlan {
    assert!(plan.matches(inst), "plan shape does not match instance");
    let (kk, tt) = (inst.products, inst.periods);
    let mut out = DecodedPlan {
        qty_m: vec![vec![0; tt]; kk],
        qty_r: vec![vec![0; tt]; kk],
        inv_m: vec![vec![0; tt]; kk],
        inv_r: vec![vec![0; tt]; kk],
        cost_per_product: Vec::with_capacity(kk),
        total_cost: Cost::ZERO,
    };
    for k in 0..kk {
        let mut rows = ProductRows {
            qty_m: &mut out.qty_m[k],
            qty_r: &mut out.qty_r[k],
            inv_m: &mut out.inv_m[k],
            inv_r: &mut out.inv_r[k],
        };
        let cost = walk_product(
            inst,
            k,
            plan.row(Matrix::Manufacture, k),
            plan.row(Matrix::Remanufacture, k),
            Some(&mut rows),
        );
        if !cost.is_feasible() {
            for row in [&mut out.qty_m[k], &mut out.qty_r[k], &mut out.inv_m[k], &mut out.inv_r[k]] {
                row.fill(0);
            }
        }
        out.cost_per_product.push(cost);
    }
    out.total_cost = out.cost_per_product.iter().copied().sum();
    out
}

/// Total cost of `plan`.
pub fn evaluate(inst: &Instance, plan: &SetupPlan) -> Cost {
    assert!(plan.matches(inst), "plan shape does not match instance");
    (0..inst.products).map(|k| evaluate_product(inst, plan, k)).sum()
}

/// Cost contribution of product `k` (zero-based).
///
/// Panics if `k` is out of range.
pub fn evaluate_product(inst: &Instance, plan: &SetupPlan, k: usize) -> Cost {
    assert!(k < inst.products, "product index {k} out of range");
    product_cost(
        inst,
        k,
        plan.row(Matrix::Manufacture, k),
        plan.row(Matrix::Remanufacture, k),
    )
}

/// Writes the lot-for-lot rows of product `k` into the given slices.
pub(crate) fn lot_for_lot_rows(inst: &Instance, k: usize, setup_m: &mut [bool], setup_r: &mut [bool]) {
    let mut recoverable = 0i64;
    for t in 0..inst.periods {
        recoverable += inst.returns[k][t];
        let demand = inst.demand[k][t];
        setup_m[t] = false;
        setup_r[t] = false;
        if demand > 0 {
            let remade = recoverable.min(demand);
            if remade > 0 {
                setup_r[t] = true;
                recoverable -= remade;
            }
            if demand > remade {
                setup_m[t] = true;
            }
        }
    }
}

/// Remanufacture-first lot-for-lot plan. Always decodes feasibly.
pub fn initial_solution(inst: &Instance) -> SetupPlan {
    let mut plan = SetupPlan::for_instance(inst);
    let t = inst.periods;
    for k in 0..inst.products {
        let mut m = vec![false; t];
        let mut r = vec![false; t];
        lot_for_lot_rows(inst, k, &mut m, &mut r);
        plan.row_mut(Matrix::Manufacture, k).copy_from_slice(&m);
        plan.row_mut(Matrix::Remanufacture, k).copy_from_slice(&r);
    }
    plan
}
