//! Problem data for the multi-item lot-sizing problem with remanufacturing.
//!
//! An [`Instance`] holds, per product `k` and period `t`, the demand for
//! serviceable items and the quantity of returned (recoverable) items, plus
//! per-product setup, holding and unit costs. Money is integer cents
//! throughout. Initial inventories are zero.
//!
//! Instances are exchanged as JSON; see [`parse_instance`] and
//! [`serialize_instance`].

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Immutable problem data. Matrices are indexed `[product][period]`.
///
/// Fields are public so that malformed data can be represented and then
/// checked with [`validate_instance`]; the solver assumes a valid instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub products: usize,
    pub periods: usize,
    pub demand: Vec<Vec<i64>>,
    pub returns: Vec<Vec<i64>>,
    pub setup_cost_m: Vec<i64>,
    pub setup_cost_r: Vec<i64>,
    pub holding_cost_m: Vec<i64>,
    pub holding_cost_r: Vec<i64>,
    pub unit_cost_m: Vec<i64>,
    pub unit_cost_r: Vec<i64>,
}

impl Instance {
    /// Instance with all-zero data of the given shape.
    pub fn zeros(products: usize, periods: usize) -> Self {
        Self {
            products,
            periods,
            demand: vec![vec![0; periods]; products],
            returns: vec![vec![0; periods]; products],
            setup_cost_m: vec![0; products],
            setup_cost_r: vec![0; products],
            holding_cost_m: vec![0; products],
            holding_cost_r: vec![0; products],
            unit_cost_m: vec![0; products],
            unit_cost_r: vec![0; products],
        }
    }

    /// Copy of this instance restricted to the listed products, in that order.
    pub fn select_products(&self, order: &[usize]) -> Self {
        let pick_rows = |m: &Vec<Vec<i64>>| order.iter().map(|&k| m[k].clone()).collect();
        let pick = |v: &Vec<i64>| order.iter().map(|&k| v[k]).collect();
        Self {
            products: order.len(),
            periods: self.periods,
            demand: pick_rows(&self.demand),
            returns: pick_rows(&self.returns),
            setup_cost_m: pick(&self.setup_cost_m),
            setup_cost_r: pick(&self.setup_cost_r),
            holding_cost_m: pick(&self.holding_cost_m),
            holding_cost_r: pick(&self.holding_cost_r),
            unit_cost_m: pick(&self.unit_cost_m),
            unit_cost_r: pick(&self.unit_cost_r),
        }
    }
}

/// A single reason an [`Instance`] is malformed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `products` or `periods` is zero.
    EmptyDimension { field: &'static str },
    /// A matrix has the wrong number of rows, or a vector the wrong length.
    Length {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    /// A matrix row has the wrong number of columns.
    RowLength {
        field: &'static str,
        row: usize,
        expected: usize,
        found: usize,
    },
    Negative {
        field: &'static str,
        product: usize,
        period: Option<usize>,
        value: i64,
    },
}

impl Violation {
    pub fn field(&self) -> &'static str {
        match self {
            Violation::EmptyDimension { field }
            | Violation::Length { field, .. }
            | Violation::RowLength { field, .. }
            | Violation::Negative { field, .. } => field,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyDimension { field } => write!(f, "`{field}` must be at least 1"),
            Violation::Length {
                field,
                expected,
                found,
            } => write!(f, "`{field}` has length {found}, expected {expected}"),
            Violation::RowLength {
                field,
                row,
                expected,
                found,
            } => write!(f, "`{field}` row {row} has length {found}, expected {expected}"),
            Violation::Negative {
                field,
                product,
                period: Some(t),
                value,
            } => write!(f, "`{field}`[{product}][{t}] = {value} is negative"),
            Violation::Negative {
                field,
                product,
                period: None,
                value,
            } => write!(f, "`{field}`[{product}] = {value} is negative"),
        }
    }
}

/// Lists every dimension and sign violation. An empty list means the
/// instance is valid.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    if inst.products == 0 {
        out.push(Violation::EmptyDimension { field: "products" });
    }
    if inst.periods == 0 {
        out.push(Violation::EmptyDimension { field: "periods" });
    }

    for (field, m) in [("demand", &inst.demand), ("returns", &inst.returns)] {
        if m.len() != inst.products {
            out.push(Violation::Length {
                field,
                expected: inst.products,
                found: m.len(),
            });
        }
        for (k, row) in m.iter().enumerate() {
            if row.len() != inst.periods {
                out.push(Violation::RowLength {
                    field,
                    row: k,
                    expected: inst.periods,
                    found: row.len(),
                });
            }
            for (t, &value) in row.iter().enumerate() {
                if value < 0 {
                    out.push(Violation::Negative {
                        field,
                        product: k,
                        period: Some(t),
                        value,
                    });
                }
            }
        }
    }

    for (field, v) in [
        ("setup_cost_m", &inst.setup_cost_m),
        ("setup_cost_r", &inst.setup_cost_r),
        ("holding_cost_m", &inst.holding_cost_m),
        ("holding_cost_r", &inst.holding_cost_r),
        ("unit_cost_m", &inst.unit_cost_m),
        ("unit_cost_r", &inst.unit_cost_r),
    ] {
        if v.len() != inst.products {
            out.push(Violation::Length {
                field,
                expected: inst.products,
                found: v.len(),
            });
        }
        for (k, &value) in v.iter().enumerate() {
            if value < 0 {
                out.push(Violation::Negative {
                    field,
                    product: k,
                    period: None,
                    value,
                });
            }
        }
    }
    out
}

/// Inclusive integer range, written as `[lo, hi]` in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct IntRange {
    pub lo: i64,
    pub hi: i64,
}

impl IntRange {
    pub const fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> i64 {
        rng.gen_range(self.lo..=self.hi)
    }
}

impl From<[i64; 2]> for IntRange {
    fn from([lo, hi]: [i64; 2]) -> Self {
        Self { lo, hi }
    }
}

impl From<IntRange> for [i64; 2] {
    fn from(r: IntRange) -> Self {
        [r.lo, r.hi]
    }
}

/// Parameters of the synthetic instance generator.
///
/// Demand is uniform on `0..=demand_max`; returns are uniform on
/// `0..=floor(return_ratio * demand)` per cell. Cost ranges are in cents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub products: usize,
    pub periods: usize,
    #[serde(default = "defaults::demand_max")]
    pub demand_max: i64,
    #[serde(default = "defaults::return_ratio")]
    pub return_ratio: f64,
    #[serde(default = "defaults::setup_cost_m")]
    pub setup_cost_m: IntRange,
    #[serde(default = "defaults::setup_cost_r")]
    pub setup_cost_r: IntRange,
    #[serde(default = "defaults::holding_cost_m")]
    pub holding_cost_m: IntRange,
    #[serde(default = "defaults::holding_cost_r")]
    pub holding_cost_r: IntRange,
    #[serde(default = "defaults::unit_cost")]
    pub unit_cost_m: IntRange,
    #[serde(default = "defaults::unit_cost")]
    pub unit_cost_r: IntRange,
    pub seed: u64,
}

mod defaults {
    use super::IntRange;

    pub fn demand_max() -> i64 {
        100
    }
    pub fn return_ratio() -> f64 {
        0.5
    }
    pub fn setup_cost_m() -> IntRange {
        IntRange::new(20_000, 100_000)
    }
    pub fn setup_cost_r() -> IntRange {
        IntRange::new(10_000, 60_000)
    }
    pub fn holding_cost_m() -> IntRange {
        IntRange::new(100, 500)
    }
    pub fn holding_cost_r() -> IntRange {
        IntRange::new(50, 250)
    }
    pub fn unit_cost() -> IntRange {
        IntRange::new(0, 0)
    }
}

impl GeneratorConfig {
    /// Default ranges for the given shape and seed.
    pub fn new(products: usize, periods: usize, seed: u64) -> Self {
        Self {
            products,
            periods,
            demand_max: defaults::demand_max(),
            return_ratio: defaults::return_ratio(),
            setup_cost_m: defaults::setup_cost_m(),
            setup_cost_r: defaults::setup_cost_r(),
            holding_cost_m: defaults::holding_cost_m(),
            holding_cost_r: defaults::holding_cost_r(),
            unit_cost_m: defaults::unit_cost(),
            unit_cost_r: defaults::unit_cost(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |reason: String| Err(ModelError::InvalidGenerator(reason));
        if self.products == 0 || self.periods == 0 {
            return bad("products and periods must be at least 1".into());
        }
        if self.demand_max < 0 {
            return bad(format!("demand_max = {} is negative", self.demand_max));
        }
        if !(0.0..=1.0).contains(&self.return_ratio) {
            return bad(format!("return_ratio = {} is outside [0, 1]", self.return_ratio));
        }
        for (name, r) in [
            ("setup_cost_m", self.setup_cost_m),
            ("setup_cost_r", self.setup_cost_r),
            ("holding_cost_m", self.holding_cost_m),
            ("holding_cost_r", self.holding_cost_r),
            ("unit_cost_m", self.unit_cost_m),
            ("unit_cost_r", self.unit_cost_r),
        ] {
            if r.lo > r.hi {
                return bad(format!("{name} range [{}, {}] is empty", r.lo, r.hi));
            }
            if r.lo < 0 {
                return bad(format!("{name} range [{}, {}] admits negative costs", r.lo, r.hi));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid generator config: {0}")]
    InvalidGenerator(String),
    #[error("malformed instance JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid instance: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Draws a random instance. A pure function of `config`, seed included.
///
/// When `demand_max > 0`, a product whose drawn demand row is all zero gets
/// one positive demand cell so that every product has something to plan.
pub fn generate_instance(config: &GeneratorConfig) -> Result<Instance, ModelError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (kk, tt) = (config.products, config.periods);
    let mut inst = Instance::zeros(kk, tt);

    for k in 0..kk {
        let row = &mut inst.demand[k];
        for d in row.iter_mut() {
            *d = rng.gen_range(0..=config.demand_max);
        }
        if config.demand_max > 0 && row.iter().all(|&d| d == 0) {
            let t = rng.gen_range(0..tt);
            row[t] = rng.gen_range(1..=config.demand_max);
        }
        for t in 0..tt {
            let cap = (config.return_ratio * inst.demand[k][t] as f64).floor() as i64;
            inst.returns[k][t] = rng.gen_range(0..=cap);
        }
    }
    for k in 0..kk {
        inst.setup_cost_m[k] = config.setup_cost_m.sample(&mut rng);
        inst.setup_cost_r[k] = config.setup_cost_r.sample(&mut rng);
        inst.holding_cost_m[k] = config.holding_cost_m.sample(&mut rng);
        inst.holding_cost_r[k] = config.holding_cost_r.sample(&mut rng);
        inst.unit_cost_m[k] = config.unit_cost_m.sample(&mut rng);
        inst.unit_cost_r[k] = config.unit_cost_r.sample(&mut rng);
    }
    Ok(inst)
}

/// On-disk layout. Unit-cost arrays may be omitted.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    products: usize,
    periods: usize,
    demand: Vec<Vec<i64>>,
    returns: Vec<Vec<i64>>,
    setup_cost_m: Vec<i64>,
    setup_cost_r: Vec<i64>,
    holding_cost_m: Vec<i64>,
    holding_cost_r: Vec<i64>,
    #[serde(default)]
    unit_cost_m: Option<Vec<i64>>,
    #[serde(default)]
    unit_cost_r: Option<Vec<i64>>,
}

/// Parses and validates an instance from its JSON form.
pub fn parse_instance(text: &str) -> Result<Instance, ModelError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| ModelError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let products = file.products;
    let inst = Instance {
        products,
        periods: file.periods,
        demand: file.demand,
        returns: file.returns,
        setup_cost_m: file.setup_cost_m,
        setup_cost_r: file.setup_cost_r,
        holding_cost_m: file.holding_cost_m,
        holding_cost_r: file.holding_cost_r,
        unit_cost_m: file.unit_cost_m.unwrap_or_else(|| vec![0; products]),
        unit_cost_r: file.unit_cost_r.unwrap_or_else(|| vec![0; products]),
    };
    let violations = validate_instance(&inst);
    if violations.is_empty() {
        Ok(inst)
    } else {
        Err(ModelError::Invalid(violations))
    }
}

pub fn serialize_instance(inst: &Instance) -> String {
    let file = InstanceFile {
        products: inst.products,
        periods: inst.periods,
        demand: inst.demand.clone(),
        returns: inst.returns.clone(),
        setup_cost_m: inst.setup_cost_m.clone(),
        setup_cost_r: inst.setup_cost_r.clone(),
        holding_cost_m: inst.holding_cost_m.clone(),
        holding_cost_r: inst.holding_cost_r.clone(),
        unit_cost_m: Some(inst.unit_cost_m.clone()),
        unit_cost_r: Some(inst.unit_cost_r.clone()),
    };
    serde_json::to_string(&file).expect("instance serialization is infallible")
}
