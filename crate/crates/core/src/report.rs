//! Benchmark reports: one row per (instance, scheme), CSV and markdown
//! renderings, win/tie tallies by exact objective comparison.

use std::collections::{BTreeMap, HashSet};

use crate::gvns::Scheme;
use crate::plan::format_cents;
use crate::SolverError;

pub const CSV_HEADER: [&str; 6] = ["id", "scheme", "objective_cents", "wall_s", "seed", "iterations"];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub id: String,
    pub scheme: Scheme,
    pub objective_cents: i64,
    pub wall_s: f64,
    pub seed: u64,
    pub iterations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub wins: usize,
    pub ties: usize,
    pub mean_objective_cents: f64,
}

/// Rows of a benchmark run. Instance ids and schemes keep the order in
/// which they first appear.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Rejects duplicate (instance, scheme) rows.
    pub fn new(rows: Vec<BenchRow>) -> Result<Self, SolverError> {
        let mut seen = HashSet::new();
        for r in &rows {
            if !seen.insert((r.id.as_str(), r.scheme)) {
                return Err(SolverError::Report(format!(
                    "duplicate row for instance {} and scheme {}",
                    r.id, r.scheme
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Report from bare objectives, one `(id, [(scheme, cents)])` entry per
    /// instance. Timing, seed and iteration columns are zero.
    pub fn from_objectives<I, S>(table: I) -> Result<Self, SolverError>
    where
        I: IntoIterator<Item = (String, S)>,
        S: IntoIterator<Item = (Scheme, i64)>,
    {
        let rows = table
            .into_iter()
            .flat_map(|(id, cells)| {
                cells.into_iter().map(move |(scheme, objective_cents)| BenchRow {
                    id: id.clone(),
                    scheme,
                    objective_cents,
                    wall_s: 0.0,
                    seed: 0,
                    iterations: 0,
                })
            })
            .collect();
        Self::new(rows)
    }

    pub fn rows(&self) -> &[BenchRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn instance_ids(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.rows
            .iter()
            .map(|r| r.id.as_str())
            .filter(|id| seen.insert(*id))
            .collect()
    }

    pub fn schemes(&self) -> Vec<Scheme> {
        let mut seen = HashSet::new();
        self.rows.iter().map(|r| r.scheme).filter(|s| seen.insert(*s)).collect()
    }

    pub fn objective(&self, id: &str, scheme: Scheme) -> Option<i64> {
        self.rows
            .iter()
            .find(|r| r.id == id && r.scheme == scheme)
            .map(|r| r.objective_cents)
    }

    pub fn row_minimum(&self, id: &str) -> Option<i64> {
        self.rows.iter().filter(|r| r.id == id).map(|r| r.objective_cents).min()
    }

    /// Schemes whose objective equals the instance minimum exactly.
    pub fn best_schemes(&self, id: &str) -> Vec<Scheme> {
        let Some(min) = self.row_minimum(id) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter(|r| r.id == id && r.objective_cents == min)
            .map(|r| r.scheme)
            .collect()
    }

    /// Wins (sole minimum), ties (shared minimum) and mean objective per scheme.
    pub fn summary(&self) -> Vec<SchemeSummary> {
        let mut acc: BTreeMap<Scheme, (usize, usize, i128, usize)> = BTreeMap::new();
        for r in &self.rows {
            let e = acc.entry(r.scheme).or_default();
            e.2 += r.objective_cents as i128;
            e.3 += 1;
        }
        for id in self.instance_ids() {
            let best = self.best_schemes(id);
            let shared = best.len() > 1;
            for s in best {
                let e = acc.get_mut(&s).expect("scheme has rows");
                if shared {
                    e.1 += 1;
                } else {
                    e.0 += 1;
                }
            }
        }
        self.schemes()
            .into_iter()
            .map(|scheme| {
                let (wins, ties, sum, n) = acc[&scheme];
                SchemeSummary {
                    scheme,
                    wins,
                    ties,
                    mean_objective_cents: sum as f64 / n as f64,
                }
            })
            .collect()
    }
}

/// CSV with header `id,scheme,objective_cents,wall_s,seed,iterations`.
pub fn emit_csv(report: &BenchReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in report.rows() {
        w.write_record([
            r.id.clone(),
            r.scheme.to_string(),
            r.objective_cents.to_string(),
            format!("{:.3}", r.wall_s),
            r.seed.to_string(),
            r.iterations.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Markdown table, one row per instance and one column per scheme, with
/// each row's minimum in bold, followed by a win/tie summary.
pub fn emit_markdown(report: &BenchReport) -> String {
    let schemes = report.schemes();
    let mut out = String::new();

    out.push_str("| ID |");
    for s in &schemes {
        out.push_str(&format!(" {} |", s.title()));
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(schemes.len()));
    out.push('\n');

    for id in report.instance_ids() {
        let min = report.row_minimum(id);
        out.push_str(&format!("| {id} |"));
        for &s in &schemes {
            match report.objective(id, s) {
                Some(v) if Some(v) == min => out.push_str(&format!(" **{}** |", format_cents(v))),
                Some(v) => out.push_str(&format!(" {} |", format_cents(v))),
                None => out.push_str(" - |"),
            }
        }
        out.push('\n');
    }

    out.push_str("\n| Scheme | Wins | Ties | Mean objective |\n|---|---:|---:|---:|\n");
    for s in report.summary() {
        out.push_str(&format!(
            "| {} | {} | {} | {:.2} |\n",
            s.scheme.title(),
            s.wins,
            s.ties,
            s.mean_objective_cents / 100.0
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, scheme: Scheme, cents: i64) -> BenchRow {
        BenchRow {
            id: id.into(),
            scheme,
            objective_cents: cents,
            wall_s: 1.25,
            seed: 7,
            iterations: 3,
        }
    }

    #[test]
    fn duplicate_rows_rejected() {
        let r = BenchReport::new(vec![row("1", Scheme::Hybrid, 1), row("1", Scheme::Hybrid, 2)]);
        assert!(r.is_err());
    }

    #[test]
    fn fixed_point_objectives() {
        let rep = BenchReport::new(vec![row("1", Scheme::SerialVnd, 1300)]).unwrap();
        let md = emit_markdown(&rep);
        assert!(md.contains("| 1 | **13.00** |"), "{md}");
    }

    #[test]
    fn ties_and_wins() {
        let rep = BenchReport::new(vec![
            row("a", Scheme::SerialVnd, 10),
            row("a", Scheme::Hybrid, 5),
            row("b", Scheme::SerialVnd, 4),
            row("b", Scheme::Hybrid, 4),
        ])
        .unwrap();
        let s = rep.summary();
        assert_eq!((s[0].scheme, s[0].wins, s[0].ties), (Scheme::SerialVnd, 0, 1));
        assert_eq!((s[1].scheme, s[1].wins, s[1].ties), (Scheme::Hybrid, 1, 1));
        assert_eq!(s[1].mean_objective_cents, 4.5);
        assert_eq!(rep.best_schemes("b"), vec![Scheme::SerialVnd, Scheme::Hybrid]);
    }

    #[test]
    fn single_scheme_wins_everything() {
        let rep = BenchReport::new((0..5).map(|i| row(&i.to_string(), Scheme::Multiworker, i * 10)).collect()).unwrap();
        let s = rep.summary();
        assert_eq!((s[0].wins, s[0].ties), (5, 0));
    }

    #[test]
    fn csv_round_trips_through_reader() {
        let rep = BenchReport::new(vec![row("x,1", Scheme::Hybrid, 42), row("2", Scheme::SerialVnd, 7)]).unwrap();
        let text = emit_csv(&rep);
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
        let recs: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
        assert_eq!(recs.len(), 2);
        assert_eq!(&recs[0][0], "x,1");
        assert_eq!(&recs[0][1], "hybrid");
        assert_eq!(recs[0][2].parse::<i64>().unwrap(), 42);
        assert_eq!(recs[0][3].parse::<f64>().unwrap(), 1.25);
    }

    #[test]
    fn missing_cell_is_dashed() {
        let rep = BenchReport::new(vec![row("1", Scheme::SerialVnd, 5), row("2", Scheme::Hybrid, 6)]).unwrap();
        let md = emit_markdown(&rep);
        assert!(md.contains("| 1 | **0.05** | - |"), "{md}");
    }
}
