//! The eleven published tables: their parameter grids, the printed cells,
//! and the comparison between printed and computed values.

use serde::Serialize;

use super::format::{self, Printed};
use crate::bounds::{bound, perturbed_probability, SeparabilityQuery, Theorem};
use crate::error::{Error, Result};
use crate::twopoint::{ComponentSpec, SlcParams};

/// Tolerance for cells given by closed formulas.
pub const CLOSED_FORM_TOL: f64 = 1e-3;
/// Tolerance for cells that need quadrature or optimization.
pub const INTEGRAL_TOL: f64 = 1e-2;

pub const TABLE_IDS: std::ops::RangeInclusive<u8> = 1..=11;

pub enum Column {
    Bound {
        label: String,
        theorem: Theorem,
        alpha: f64,
        delta: f64,
    },
    /// The density-ratio bound (1/r)ⁿ shown beside the prototype bounds.
    DensityRatio {
        r: f64,
    },
    /// Lower bound on the probability that `m` perturbed points separate.
    Perturbed {
        epsilon: f64,
        m: f64,
    },
}

impl Column {
    pub fn label(&self) -> String {
        match self {
            Column::Bound { label, .. } => label.clone(),
            Column::DensityRatio { .. } => "rho/rho_uniform".into(),
            Column::Perturbed { epsilon, .. } => format!("epsilon={epsilon}"),
        }
    }
}

pub struct TableSpec {
    pub id: u8,
    pub title: &'static str,
    pub rows: Vec<usize>,
    pub columns: Vec<Column>,
    /// Cells exactly as printed, row-major.
    pub printed: Vec<Vec<&'static str>>,
    pub tolerance: f64,
}

const N6: [usize; 6] = [10, 50, 100, 200, 500, 1000];

fn alphas(theorem: Theorem, values: &[f64]) -> Vec<Column> {
    values
        .iter()
        .map(|&a| Column::Bound { label: format!("alpha={a}"), theorem: theorem.clone(), alpha: a, delta: 0.01 })
        .collect()
}

pub fn table_spec(id: u8) -> Result<TableSpec> {
    let (title, rows, columns, printed, tolerance): (&str, Vec<usize>, Vec<Column>, Vec<Vec<&'static str>>, f64) = match id {
        1 => (
            "Bound on |Y| for separating one point, alpha=0.8, r=0.75, C=1, delta=0.01",
            N6.to_vec(),
            vec![
                Column::DensityRatio { r: 0.75 },
                Column::Bound { label: "|Y|".into(), theorem: Theorem::Prototype { r: 0.75, c: 1.0 }, alpha: 0.8, delta: 0.01 },
            ],
            vec![
                vec!["17.7", "0.06"],
                vec!["1.7\\cdot 10^6", "91"],
                vec!["3.1 \\cdot 10^{12}", "828,180"],
                vec!["9.7 \\cdot 10^{24}", "6.8 \\cdot 10^{13}"],
                vec!["2.9 \\cdot 10^{62}", "3.9 \\cdot 10^{37}"],
                vec!["8.6 \\cdot 10^{124}", "1.5 \\cdot 10^{77}"],
            ],
            CLOSED_FORM_TOL,
        ),
        2 => (
            "Bound on |Y| for separability of the whole set, alpha=0.8, r=0.75, C=1, delta=0.01",
            N6.to_vec(),
            vec![
                Column::DensityRatio { r: 0.75 },
                Column::Bound {
                    label: "|Y|".into(),
                    theorem: Theorem::PrototypeSet { r: 0.75, c: 1.0 },
                    alpha: 0.8,
                    delta: 0.01,
                },
            ],
            vec![
                vec!["17.7", "0.25"],
                vec!["1.7\\cdot 10^6", "9.54"],
                vec!["3.1 \\cdot 10^{12}", "910"],
                vec!["9.7 \\cdot 10^{24}", "8.2 \\cdot 10^6"],
                vec!["2.9 \\cdot 10^{62}", "6.2 \\cdot 10^{18}"],
                vec!["8.6 \\cdot 10^{124}", "3.9 \\cdot 10^{38}"],
            ],
            CLOSED_FORM_TOL,
        ),
        3 => (
            "Uniform ball, known two-point bound, delta=0.01",
            N6.to_vec(),
            alphas(Theorem::BallKnown, &[0.6, 0.8, 1.0]),
            vec![
                vec!["0.35", "1.48", "4.52"],
                vec!["13.5", "17,927", "4.7 \\cdot 10^6"],
                vec!["1287", "2.2 \\cdot 10^9", "1.6 \\cdot 10^{14}"],
                vec!["1.1 \\cdot 10^7", "3.6 \\cdot 10^{19}", "1.8 \\cdot 10^{29}"],
                vec!["8.8 \\cdot 10^{18}", "1.5 \\cdot 10^{50}", "2.5 \\cdot 10^{74}"],
                vec!["5.5 \\cdot 10^{38}", "1.6 \\cdot 10^{101}", "4.6 \\cdot 10^{149}"],
            ],
            CLOSED_FORM_TOL,
        ),
        4 => (
            "Perturbed model: lower bound on the probability that 100,000 points are 1-Fisher separable",
            vec![500, 1000, 2000, 5000, 10000, 20000],
            [0.1, 0.2, 0.5].iter().map(|&e| Column::Perturbed { epsilon: e, m: 1e5 }).collect(),
            vec![
                vec!["<0", "<0", "<0"],
                vec!["<0", "<0", "0.9998"],
                vec!["<0", "<0", "1-5.8 \\cdot 10^{-18}"],
                vec!["<0", "0.95", "1-1.2 \\cdot 10^{-57}"],
                vec!["<0", "1-5\\cdot 10^{-13}", "1-1.3 \\cdot 10^{-123}"],
                vec!["0.96", "1-8\\cdot 10^{-35}", "1 - 2.2 \\cdot 10^{-255}"],
            ],
            INTEGRAL_TOL,
        ),
        5 => (
            "Isotropic gamma-SLC, improved bound, alpha=1, delta=0.01",
            N6.to_vec(),
            [0.6, 0.8, 1.0]
                .iter()
                .map(|&g| Column::Bound {
                    label: format!("gamma={g}"),
                    theorem: Theorem::SlcImproved(SlcParams::new(g)),
                    alpha: 1.0,
                    delta: 0.01,
                })
                .collect(),
            vec![
                vec!["0.12", "0.15", "0.18"],
                vec!["1.71", "5.56", "18"],
                vec!["61", "692", "7974"],
                vec!["92,783", "1.2 \\cdot 10^7", "1.8 \\cdot 10^9"],
                vec!["4.3 \\cdot 10^{14}", "1.1 \\cdot 10^{20}", "2.7 \\cdot 10^{25}"],
                vec!["7 \\cdot 10^{30}", "4.7 \\cdot 10^{41}", "3.2 \\cdot 10^{52}"],
            ],
            CLOSED_FORM_TOL,
        ),
        6 => (
            "Standard normal, exact two-point probability, delta=0.01",
            N6.to_vec(),
            alphas(Theorem::NormalOptimal, &[0.6, 0.8, 1.0]),
            vec![
                vec!["1.19", "1.45", "1.99"],
                vec!["14", "164", "2075"],
                vec!["794", "93,806", "1.4 \\cdot 10^7"],
                vec!["2\\cdot 10^6", "2.6 \\cdot 10^{10}", "5.6 \\cdot 10^{14}"],
                vec!["2.6 \\cdot 10^{16}", "4.2 \\cdot 10^{26}", "2.6 \\cdot 10^{37}"],
                vec!["1.5 \\cdot 10^{33}", "3.6 \\cdot 10^{53}", "1.3 \\cdot 10^{75}"],
            ],
            INTEGRAL_TOL,
        ),
        7 => (
            "Uniform ball, simple asymptotic bound, delta=0.01",
            N6.to_vec(),
            alphas(Theorem::BallSimple, &[0.5, 0.6, 0.7]),
            vec![
                vec!["0.25", "0.34", "0.2"],
                vec!["8.9", "60", "350"],
                vec!["400", "19,491", "1.9 \\cdot 10^{6}"],
                vec!["642,645", "1.6 \\cdot 10^9", "4.8 \\cdot 10^{13}"],
                vec!["1.9 \\cdot 10^{15}", "7.1 \\cdot 10^{23}", "5.2 \\cdot 10^{35}"],
                vec!["9.4 \\cdot 10^{30}", "1.4 \\cdot 10^{48}", "2.2 \\cdot 10^{72}"],
            ],
            INTEGRAL_TOL,
        ),
        8 => (
            "Spherical exponential, exact two-point probability, delta=0.01",
            N6.to_vec(),
            alphas(Theorem::ExponentialOptimal, &[0.6, 0.8, 1.0]),
            vec![
                vec!["0.65", "0.81", "1.06"],
                vec!["7.6", "43", "249"],
                vec!["218", "6,662", "203,805"],
                vec!["154,501", "1.3 \\cdot 10^8", "1.1 \\cdot 10^{11}"],
                vec!["4.1 \\cdot 10^{13}", "7.6 \\cdot 10^{20}", "1.6 \\cdot 10^{28}"],
                vec!["3.8 \\cdot 10^{27}", "1.1 \\cdot 10^{42}", "4.8 \\cdot 10^{56}"],
            ],
            INTEGRAL_TOL,
        ),
        9 => (
            "Rotationally invariant log-concave, f = exp(-0.14n), alpha=1, delta=0.01",
            N6.to_vec(),
            alphas(Theorem::RotAlpha1, &[1.0]),
            vec![vec!["0.2"], vec!["3.3"], vec!["109"], vec!["120,260"], vec!["1.5 \\cdot 10^{14}"], vec!["2.5 \\cdot 10^{29}"]],
            INTEGRAL_TOL,
        ),
        10 => (
            "Uniform cube, Chernoff bound, alpha=1, delta=0.01",
            N6.to_vec(),
            alphas(Theorem::ProductChernoff(vec![ComponentSpec::Uniform01]), &[1.0]),
            vec![
                vec!["1.02"],
                vec!["11,578"],
                vec!["1.3 \\cdot 10^9"],
                vec!["1.7 \\cdot 10^{19}"],
                vec!["4.3 \\cdot 10^{49}"],
                vec!["1.8 \\cdot 10^{100}"],
            ],
            CLOSED_FORM_TOL,
        ),
        11 => (
            "Dependent coordinates, alpha=1, delta=0.01",
            N6.to_vec(),
            [0.4, 0.45, 0.5]
                .iter()
                .map(|&s| Column::Bound {
                    label: format!("sigma0={s}"),
                    theorem: Theorem::Dependent { sigma0: s },
                    alpha: 1.0,
                    delta: 0.01,
                })
                .collect(),
            vec![
                vec!["0.13", "0.18", "0.3"],
                vec!["0.44", "2.21", "25"],
                vec!["2", "49", "6,691"],
                vec!["40", "24,017", "4.4 \\cdot 10^8"],
                vec!["334,248", "2.8 \\cdot 10^{12}", "1.3 \\cdot 10^{23}"],
                vec!["1.1 \\cdot 10^{12}", "8 \\cdot 10^{25}", "1.7 \\cdot 10^{47}"],
            ],
            CLOSED_FORM_TOL,
        ),
        _ => return Err(Error::Input(format!("unknown table {id}; tables are numbered 1 to 11"))),
    };
    Ok(TableSpec { id, title, rows, columns, printed, tolerance })
}

/// A computed cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Computed {
    /// log₁₀ of the value.
    Log10(f64),
    Probability {
        p: f64,
        ln_deficit: f64,
    },
    Failed(String),
}

impl Computed {
    pub fn display(&self) -> String {
        match self {
            Computed::Log10(l) => format::display_log10(*l),
            Computed::Probability { p, ln_deficit } => format::display_probability(*p, *ln_deficit),
            Computed::Failed(e) => format!("error: {e}"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CellCheck {
    pub table: u8,
    pub n: usize,
    pub column: String,
    pub printed: String,
    pub computed: String,
    /// log₁₀ of the computed value, or of the deficit for "1 − d" cells.
    pub log10_computed: Option<f64>,
    pub relative_deviation: f64,
    pub pass: bool,
}

pub fn compute_cell(column: &Column, n: usize) -> Computed {
    match column {
        Column::DensityRatio { r } => Computed::Log10(-(n as f64) * r.log10()),
        Column::Bound { theorem, alpha, delta, .. } => match bound(&SeparabilityQuery::new(n, *alpha, *delta), theorem) {
            Ok(b) => Computed::Log10(b.log10_m),
            Err(e) => Computed::Failed(e.to_string()),
        },
        Column::Perturbed { epsilon, m } => match perturbed_probability(n, *m, *epsilon) {
            Ok(b) => Computed::Probability { p: b.probability, ln_deficit: b.ln_deficit },
            Err(e) => Computed::Failed(e.to_string()),
        },
    }
}

/// Compares one computed cell with its printed value.
pub fn check_cell(printed: &str, computed: &Computed, tol: f64) -> Result<(bool, f64, Option<f64>)> {
    let ln10 = std::f64::consts::LN_10;
    Ok(match (format::parse_printed(printed)?, computed) {
        (_, Computed::Failed(_)) => (false, f64::INFINITY, None),
        (Printed::Negative, Computed::Probability { p, .. }) => (*p < 0.0, if *p < 0.0 { 0.0 } else { f64::INFINITY }, None),
        (Printed::Value { value, unit }, Computed::Probability { p, .. }) => {
            (format::value_matches(*p, value, unit, tol), format::relative_deviation(*p, value), None)
        }
        (Printed::OneMinus { deficit, unit }, Computed::Probability { ln_deficit, .. }) => {
            let d = ln_deficit.exp();
            (format::value_matches(d, deficit, unit, tol), format::relative_deviation(d, deficit), Some(ln_deficit / ln10))
        }
        (Printed::Value { value, unit }, Computed::Log10(l)) => {
            // compare relative to the printed magnitude so huge values stay finite
            let scale = value.abs().log10().floor();
            let c = 10f64.powf(l - scale);
            let (v, u) = (value / 10f64.powf(scale), unit / 10f64.powf(scale));
            (format::value_matches(c, v, u, tol), format::relative_deviation(c, v), Some(*l))
        }
        (_, _) => (false, f64::INFINITY, None),
    })
}

pub struct TableReport {
    pub spec: TableSpec,
    pub cells: Vec<Vec<Computed>>,
    pub checks: Vec<CellCheck>,
}

impl TableReport {
    pub fn failures(&self) -> impl Iterator<Item = &CellCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn max_relative_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.relative_deviation).fold(0.0, f64::max)
    }
}

pub fn run_table(id: u8) -> Result<TableReport> {
    let spec = table_spec(id)?;
    let mut cells = Vec::new();
    let mut checks = Vec::new();
    for (i, &n) in spec.rows.iter().enumerate() {
        let mut row = Vec::new();
        for (j, col) in spec.columns.iter().enumerate() {
            let computed = compute_cell(col, n);
            let printed = spec.printed[i][j];
            let (pass, dev, log10) = check_cell(printed, &computed, spec.tolerance)?;
            checks.push(CellCheck {
                table: id,
                n,
                column: col.label(),
                printed: printed.to_string(),
                computed: computed.display(),
                log10_computed: log10,
                relative_deviation: dev,
                pass,
            });
            row.push(computed);
        }
        cells.push(row);
    }
    Ok(TableReport { spec, cells, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_are_rectangular() {
        for id in TABLE_IDS {
            let s = table_spec(id).unwrap();
            assert_eq!(s.printed.len(), s.rows.len(), "table {id}");
            assert!(s.printed.iter().all(|r| r.len() == s.columns.len()), "table {id}");
            for row in &s.printed {
                for cell in row {
                    format::parse_printed(cell).unwrap();
                }
            }
        }
        assert!(table_spec(12).is_err());
    }

    #[test]
    fn closed_form_tables_reproduce() {
        for id in [1u8, 2, 3, 5, 10, 11] {
            let r = run_table(id).unwrap();
            let bad: Vec<_> = r.failures().collect();
            assert!(bad.is_empty(), "table {id}: {bad:?}");
        }
    }

    #[test]
    fn perturbed_table_signs() {
        let r = run_table(4).unwrap();
        let bad: Vec<_> = r.failures().collect();
        assert!(bad.is_empty(), "{bad:?}");
    }
}
