use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::format::{self, display_log10, full};
use super::tables::{run_table, TableReport, TABLE_IDS};
use super::*;
use crate::bounds::{
    bound, ln_m_from_ln_f, perturbed_probability, two_point, BoundMode, Center, SeparabilityQuery, Theorem, TheoremId,
    TheoremParams,
};
use crate::error::Result;
use crate::montecarlo::{
    count_inseparable_pairs_fast, estimate_set_separability, estimate_two_point, DistributionSpec, MCEstimate, SetEstimate,
};
use crate::twopoint::{ComponentSpec, Kind, SlcParams, TabulatedDensity};

pub(super) fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Bound(a) => cmd_bound(&a, out),
        Command::Table(a) => cmd_table(&a, out),
        Command::TwoPoint(a) => cmd_two_point(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::CheckDataset(a) => cmd_check_dataset(&a, out),
    }
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Input(format!("output: {e}"))
}

/// Sends `text` to `--out` when given, else to `out`.
fn emit(path: &Option<std::path::PathBuf>, out: &mut dyn Write, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Input(format!("cannot write {}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(io_err),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(io_err)
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(io_err)?;
    }
    String::from_utf8(w.into_inner().map_err(io_err)?).map_err(io_err)
}

pub fn parse_center(s: &str) -> Result<Center> {
    Ok(match s.trim() {
        "origin" => Center::Origin,
        "mean" => Center::Mean,
        "cube-center" | "cube_center" => Center::CubeCenter,
        "any" => Center::AnyPoint,
        other => Center::Explicit(
            other
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Input(format!("unknown centre '{s}'"))))
                .collect::<Result<_>>()?,
        ),
    })
}

fn read_tabulated(path: &str) -> Result<TabulatedDensity> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Input(format!("cannot read {path}: {e}")))?;
    let (mut xs, mut ds) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Input(format!("{path}: {e}")))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Input(format!("{path}: non-numeric cell")))?;
        if vals.len() != 2 {
            return Err(Error::Input(format!("{path}: expected two columns x,density")));
        }
        xs.push(vals[0]);
        ds.push(vals[1]);
    }
    TabulatedDensity::new(xs, ds)
}

pub fn parse_component(s: &str, sigma0: Option<f64>) -> Result<ComponentSpec> {
    let (name, arg) = s.split_once(':').map_or((s, None), |(a, b)| (a, Some(b)));
    let num = |a: Option<&str>| -> Result<Option<f64>> {
        a.map(|v| v.parse::<f64>().map_err(|_| Error::Input(format!("bad parameter in component '{s}'")))).transpose()
    };
    let c = match name.trim() {
        "uniform01" | "uniform" => ComponentSpec::Uniform01,
        "bernoulli" => ComponentSpec::SymmetricBernoulli,
        "three-point" | "three_point" => ComponentSpec::ThreePoint {
            sigma0: num(arg)?.or(sigma0).ok_or_else(|| Error::Input("three-point needs sigma0".into()))?,
        },
        "laplace" => ComponentSpec::Laplace { scale: num(arg)?.unwrap_or(std::f64::consts::FRAC_1_SQRT_2) },
        "normal" => ComponentSpec::StandardNormal,
        "tabulated" => {
            ComponentSpec::Tabulated(read_tabulated(arg.ok_or_else(|| Error::Input("tabulated needs a path".into()))?)?)
        }
        other => return Err(Error::Input(format!("unknown component '{other}'"))),
    };
    c.validate()?;
    Ok(c)
}

fn theorem_params(p: &FamilyParams, n: usize) -> Result<TheoremParams> {
    let components = p.components.iter().map(|c| parse_component(c, p.sigma0)).collect::<Result<_>>()?;
    // One isotropic component spanning all n coordinates.
    let slc_components = p
        .gamma
        .map(|gamma| {
            let c = SlcParams { gamma, mu: p.mu, x0_norm: 0.0 };
            SlcParams { mu: c.mu_for(n).ok(), ..c }
        })
        .into_iter()
        .collect();
    Ok(TheoremParams {
        r: p.r,
        c: p.c,
        inner: p.inner,
        gamma: p.gamma,
        mu: p.mu,
        slc_components,
        sigma0: p.sigma0,
        components,
        epsilon: p.epsilon,
        radial: None,
    })
}

/// One output row of `bound` and `sweep`.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub theorem: String,
    pub n: usize,
    pub alpha: f64,
    pub delta: f64,
    #[serde(rename = "log10_M")]
    pub log10_m: Option<f64>,
    #[serde(rename = "M_exact")]
    pub m_exact: Option<u64>,
    #[serde(rename = "M_display")]
    pub m_display: String,
    pub mode: String,
    pub b_exponent: Option<f64>,
    pub notes: String,
}

/// The same row with numbers as 12-digit strings, for CSV.
#[derive(Serialize)]
struct CsvRow<'a> {
    theorem: &'a str,
    n: usize,
    alpha: String,
    delta: String,
    #[serde(rename = "log10_M")]
    log10_m: String,
    #[serde(rename = "M_exact")]
    m_exact: String,
    #[serde(rename = "M_display")]
    m_display: &'a str,
    mode: &'a str,
    b_exponent: String,
    notes: &'a str,
}

fn opt_full(v: Option<f64>) -> String {
    v.map(full).unwrap_or_default()
}

fn render_rows(rows: &[ReportRow], fmt: OutputFormat) -> Result<String> {
    match fmt {
        OutputFormat::Json => to_json(&rows),
        OutputFormat::Csv => to_csv(
            &rows
                .iter()
                .map(|r| CsvRow {
                    theorem: &r.theorem,
                    n: r.n,
                    alpha: full(r.alpha),
                    delta: full(r.delta),
                    log10_m: opt_full(r.log10_m),
                    m_exact: r.m_exact.map(|k| k.to_string()).unwrap_or_default(),
                    m_display: &r.m_display,
                    mode: &r.mode,
                    b_exponent: opt_full(r.b_exponent),
                    notes: &r.notes,
                })
                .collect::<Vec<_>>(),
        ),
        OutputFormat::Human => {
            let mut s = format!("{:<22} {:>6} {:>6} {:>8} {:>16} {:<27} notes\n", "theorem", "n", "alpha", "delta", "M", "mode");
            for r in rows {
                s += &format!(
                    "{:<22} {:>6} {:>6} {:>8} {:>16} {:<27} {}\n",
                    r.theorem, r.n, r.alpha, r.delta, r.m_display, r.mode, r.notes
                );
            }
            Ok(s)
        }
    }
}

fn resolve_ids(names: &[String]) -> Result<Vec<TheoremId>> {
    if names.len() == 1 && names[0] == "all" {
        return Ok(TheoremId::ALL.to_vec());
    }
    names.iter().map(|s| s.trim().parse()).collect()
}

fn bound_row(id: TheoremId, q: &SeparabilityQuery, params: &TheoremParams) -> (ReportRow, Option<Error>) {
    let mut row = ReportRow {
        theorem: id.to_string(),
        n: q.n,
        alpha: q.alpha,
        delta: q.delta,
        log10_m: None,
        m_exact: None,
        m_display: String::new(),
        mode: String::new(),
        b_exponent: None,
        notes: String::new(),
    };
    match Theorem::build(id, params).and_then(|th| bound(q, &th)) {
        Ok(b) => {
            row.log10_m = Some(b.log10_m);
            row.m_exact = b.m_exact;
            row.m_display = match b.m_exact {
                Some(k) if (6.0..12.0).contains(&b.log10_m) => format::with_commas(k),
                _ => display_log10(b.log10_m),
            };
            row.mode = b.mode.as_str().to_string();
            row.b_exponent = b.b_exponent;
            row.notes = b.validity_notes.join("; ");
            (row, None)
        }
        Err(e) => {
            row.m_display = "n/a".into();
            row.notes = e.to_string();
            (row, Some(e))
        }
    }
}

fn cmd_bound(a: &BoundArgs, out: &mut dyn Write) -> Result<i32> {
    let ids = resolve_ids(&a.theorem)?;
    let q = SeparabilityQuery::new(a.n, a.alpha, a.delta).with_center(parse_center(&a.center)?);
    q.validate()?;
    let params = theorem_params(&a.family, a.n)?;
    let mut rows = Vec::new();
    let mut single_error = None;
    for &id in &ids {
        let (row, err) = bound_row(id, &q, &params);
        rows.push(row);
        if ids.len() == 1 {
            single_error = err;
        }
    }
    emit(&a.output.out, out, &render_rows(&rows, a.output.format)?)?;
    Ok(single_error.map_or(EXIT_OK, |e| exit_code(&e)))
}

fn render_table(r: &TableReport, check: bool) -> String {
    let s = &r.spec;
    let mut text = format!("Table {}: {}\n", s.id, s.title);
    let width = 16;
    text += &format!("{:>8}", "n");
    for c in &s.columns {
        text += &format!(" {:>width$}", c.label());
    }
    text += "\n";
    for (i, n) in s.rows.iter().enumerate() {
        text += &format!("{n:>8}");
        for (j, cell) in r.cells[i].iter().enumerate() {
            let mark = if check && !r.checks[i * s.columns.len() + j].pass { "*" } else { "" };
            text += &format!(" {:>width$}", format!("{}{mark}", cell.display()));
        }
        text += "\n";
    }
    if check {
        let total = r.checks.len();
        let bad: Vec<_> = r.failures().collect();
        text += &format!(
            "check: {}/{} cells match (tolerance {}), max relative deviation {:.3e}\n",
            total - bad.len(),
            total,
            s.tolerance,
            r.max_relative_deviation()
        );
        for c in bad {
            text += &format!("  * n={} {}: printed {}, computed {}\n", c.n, c.column, c.printed, c.computed);
        }
    }
    text
}

fn cmd_table(a: &TableArgs, out: &mut dyn Write) -> Result<i32> {
    let ids: Vec<u8> = if a.id == "all" {
        TABLE_IDS.collect()
    } else {
        vec![a.id.parse().map_err(|_| Error::Input(format!("unknown table '{}'", a.id)))?]
    };
    let reports = ids.into_iter().map(run_table).collect::<Result<Vec<_>>>()?;
    let text = match a.output.format {
        OutputFormat::Human => reports.iter().map(|r| render_table(r, a.check)).collect::<Vec<_>>().join("\n"),
        OutputFormat::Csv => to_csv(&reports.iter().flat_map(|r| r.checks.iter()).collect::<Vec<_>>())?,
        OutputFormat::Json => to_json(&reports.iter().flat_map(|r| r.checks.iter()).collect::<Vec<_>>())?,
    };
    emit(&a.output.out, out, &text)?;
    let failed = reports.iter().any(|r| r.failures().next().is_some());
    Ok(if a.check && failed { EXIT_VERIFY_FAILED } else { EXIT_OK })
}

/// Family names accepted by `two-point`, mapped to theorem ids.
fn family_theorem_id(family: &str) -> Result<TheoremId> {
    let id = match family {
        "ball" => "ball_optimal",
        "ball_upper" => "ball_known",
        "ball_asymptotic" => "ball_simple",
        "layer" => "layer_optimal",
        "normal" => "normal_optimal",
        "normal_asymptotic" => "normal_simple",
        "exponential" => "exponential_optimal",
        "exponential_asymptotic" => "exponential_simple",
        "hoeffding" => "product_hoeffding",
        "bernstein" => "product_bernstein",
        "chernoff" | "product" => "product_chernoff",
        other => other,
    };
    id.parse()
}

#[derive(Serialize)]
struct TwoPointRow {
    family: String,
    n: usize,
    alpha: f64,
    f: f64,
    log10_f: f64,
    kind: &'static str,
    numeric_error: f64,
}

fn cmd_two_point(a: &TwoPointArgs, out: &mut dyn Write) -> Result<i32> {
    let id = family_theorem_id(&a.family)?;
    let th = Theorem::build(id, &theorem_params(&a.params, a.n)?)?;
    let q = SeparabilityQuery::new(a.n, a.alpha, 0.5).with_center(parse_center(&a.center)?);
    q.validate()?;
    let tp = two_point(&q, &th)?;
    let log10_f = tp.raw_ln / std::f64::consts::LN_10;
    let row = TwoPointRow {
        family: a.family.clone(),
        n: a.n,
        alpha: a.alpha,
        f: tp.raw_ln.exp(),
        log10_f,
        kind: tp.kind.as_str(),
        numeric_error: tp.numeric_error,
    };
    let text = match a.output.format {
        OutputFormat::Human => format!(
            "{} n={} alpha={}: f = {} (log10 f = {:.6}, {}, relative error {:.1e})\n",
            id,
            a.n,
            a.alpha,
            if log10_f > -300.0 { format!("{:.4e}", row.f) } else { format::scientific_from_log10(log10_f, 5) },
            log10_f,
            row.kind,
            row.numeric_error
        ),
        OutputFormat::Csv => to_csv(&[row])?,
        OutputFormat::Json => to_json(&row)?,
    };
    emit(&a.output.out, out, &text)?;
    Ok(EXIT_OK)
}

/// A sampling family and the theorem whose two-point function it should
/// reproduce (exactly or as an upper bound).
pub(crate) struct Model {
    pub spec: DistributionSpec,
    pub theory: Option<(f64, Kind)>,
}

fn theory_for(th: &Theorem, n: usize, alpha: f64, center: Center) -> Result<Option<(f64, Kind)>> {
    let q = SeparabilityQuery::new(n, alpha, 0.5).with_center(center);
    let tp = two_point(&q, th)?;
    Ok(Some((tp.raw_ln, tp.kind)))
}

pub(crate) fn family_model(family: &str, n: usize, alpha: f64, p: &FamilyParams) -> Result<Model> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Input(format!("family {family} needs --{name}")));
    let (spec, theory) = match family {
        "ball" => (DistributionSpec::UniformBall, theory_for(&Theorem::BallOptimal, n, alpha, Center::Mean)?),
        "layer" => {
            let inner = need(p.inner, "R")?;
            (DistributionSpec::SphericalLayer { inner }, theory_for(&Theorem::LayerOptimal { inner }, n, alpha, Center::Mean)?)
        }
        "normal" => (DistributionSpec::StandardNormal, theory_for(&Theorem::NormalOptimal, n, alpha, Center::Mean)?),
        "exponential" => {
            (DistributionSpec::SphericalExponential, theory_for(&Theorem::ExponentialOptimal, n, alpha, Center::Mean)?)
        }
        "slc" => {
            let gamma = need(p.gamma, "gamma")?;
            // N(0, I/γ) has E‖x‖ ≥ √((n − 1)/γ); a smaller μ only loosens the bound.
            let mu = p.mu.unwrap_or(((n as f64 - 1.0) / gamma).sqrt());
            let slc = SlcParams { gamma, mu: Some(mu), x0_norm: 0.0 };
            (DistributionSpec::GaussianSlc { gamma }, theory_for(&Theorem::Slc(slc), n, alpha, Center::Mean)?)
        }
        "cube" => (
            DistributionSpec::UniformCube,
            theory_for(&Theorem::ProductChernoff(vec![ComponentSpec::Uniform01]), n, alpha, Center::Mean)?,
        ),
        "product" => {
            let comps: Vec<ComponentSpec> = p.components.iter().map(|c| parse_component(c, p.sigma0)).collect::<Result<_>>()?;
            let spec = match comps.len() {
                1 => DistributionSpec::ProductIid(comps[0].clone()),
                k if k == n => DistributionSpec::ProductGeneral(comps.clone()),
                _ => return Err(Error::Input("product needs one --component or n of them".into())),
            };
            (spec, theory_for(&Theorem::ProductChernoff(comps), n, alpha, Center::Mean).ok().flatten())
        }
        "laplace" => (DistributionSpec::LaplaceProduct, None),
        "halfcube" => (DistributionSpec::DependentHalfCube, (alpha == 1.0).then_some((0.0, Kind::Exact))),
        other => return Err(Error::Input(format!("unknown sampling family '{other}'"))),
    };
    Ok(Model { spec, theory })
}

#[derive(Serialize)]
struct VerifyReport {
    family: String,
    mode: &'static str,
    n: usize,
    alpha: f64,
    seed: u64,
    points_per_set: Option<usize>,
    estimate: MCEstimate,
    mean_inseparable_pairs: Option<f64>,
    pairs_std_error: Option<f64>,
    theory: Option<f64>,
    theory_kind: Option<&'static str>,
    pass: Option<bool>,
}

#[derive(Serialize)]
struct VerifyCsvRow<'a> {
    family: &'a str,
    mode: &'a str,
    n: usize,
    alpha: String,
    seed: u64,
    trials: u64,
    hits: u64,
    p_hat: String,
    ci_low: String,
    ci_high: String,
    points_per_set: String,
    mean_inseparable_pairs: String,
    theory: String,
    pass: String,
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let model = family_model(&a.family, a.n, a.alpha, &a.params)?;
    let center = a
        .center
        .as_deref()
        .map(|s| match parse_center(s)? {
            Center::Origin => Ok(vec![0.0; a.n]),
            Center::CubeCenter => Ok(vec![0.5; a.n]),
            Center::Explicit(c) => Ok(c),
            Center::Mean | Center::AnyPoint => Err(Error::Input("verify takes origin, cube-center or coordinates".into())),
        })
        .transpose()?;
    // A centre other than the family default changes the probability.
    let theory = if center.is_some() && center != model.spec.default_center(a.n) { None } else { model.theory };
    let report = match a.mode {
        VerifyMode::TwoPoint => {
            let trials = a.trials.unwrap_or(1_000_000);
            let est = estimate_two_point(&model.spec, a.n, a.alpha, center.as_deref(), trials, a.seed)?;
            let pass = theory.map(|(ln_f, kind)| {
                let f = ln_f.exp();
                if kind == Kind::Exact {
                    est.contains(f)
                } else {
                    est.ci_low <= f
                }
            });
            VerifyReport {
                family: a.family.clone(),
                mode: "two-point",
                n: a.n,
                alpha: a.alpha,
                seed: a.seed,
                points_per_set: None,
                estimate: est,
                mean_inseparable_pairs: None,
                pairs_std_error: None,
                theory: theory.map(|t| t.0.exp()),
                theory_kind: theory.map(|t| t.1.as_str()),
                pass,
            }
        }
        VerifyMode::Set => {
            let m = match (a.m, theory) {
                (Some(m), _) => m,
                (None, Some((ln_f, _))) => {
                    let ln_m = ln_m_from_ln_f(ln_f, a.delta, BoundMode::Exact);
                    if ln_m > 40.0 {
                        return Err(Error::Input(format!("the bound at delta={} is astronomically large; pass --M", a.delta)));
                    }
                    (ln_m.exp().floor() as usize).max(2)
                }
                (None, None) => return Err(Error::Input("no theoretical value for this family; pass --M".into())),
            };
            let trials = a.trials.unwrap_or(100);
            let SetEstimate { p_separable, mean_inseparable_pairs, pairs_std_error } =
                estimate_set_separability(&model.spec, a.n, m, a.alpha, center.as_deref(), trials, a.seed)?;
            let expected = theory.map(|(ln_f, kind)| ((m as f64) * (m as f64 - 1.0) * ln_f.exp(), kind));
            let pass = expected.map(|(e, kind)| {
                let slack = 3.0 * pairs_std_error.max(1e-12);
                if kind == Kind::Exact {
                    (mean_inseparable_pairs - e).abs() <= slack
                } else {
                    mean_inseparable_pairs - slack <= e
                }
            });
            VerifyReport {
                family: a.family.clone(),
                mode: "set",
                n: a.n,
                alpha: a.alpha,
                seed: a.seed,
                points_per_set: Some(m),
                estimate: p_separable,
                mean_inseparable_pairs: Some(mean_inseparable_pairs),
                pairs_std_error: Some(pairs_std_error),
                theory: expected.map(|e| e.0),
                theory_kind: theory.map(|t| t.1.as_str()),
                pass,
            }
        }
    };
    let text = match a.output.format {
        OutputFormat::Json => to_json(&report)?,
        OutputFormat::Csv => to_csv(&[VerifyCsvRow {
            family: &report.family,
            mode: report.mode,
            n: report.n,
            alpha: full(report.alpha),
            seed: report.seed,
            trials: report.estimate.trials,
            hits: report.estimate.hits,
            p_hat: full(report.estimate.p_hat),
            ci_low: full(report.estimate.ci_low),
            ci_high: full(report.estimate.ci_high),
            points_per_set: report.points_per_set.map(|m| m.to_string()).unwrap_or_default(),
            mean_inseparable_pairs: opt_full(report.mean_inseparable_pairs),
            theory: opt_full(report.theory),
            pass: report.pass.map(|p| p.to_string()).unwrap_or_default(),
        }])?,
        OutputFormat::Human => {
            let e = &report.estimate;
            let mut s = format!(
                "{} {} n={} alpha={} seed={}\n  trials {}  hits {}  p_hat {:.6e}  {:.1}% CI [{:.6e}, {:.6e}]\n",
                report.family,
                report.mode,
                report.n,
                report.alpha,
                report.seed,
                e.trials,
                e.hits,
                e.p_hat,
                100.0 * e.confidence,
                e.ci_low,
                e.ci_high
            );
            if let (Some(m), Some(mean), Some(se)) =
                (report.points_per_set, report.mean_inseparable_pairs, report.pairs_std_error)
            {
                s += &format!("  points per set {m}  mean inseparable pairs {mean:.6} ± {se:.6}  (above is P[separable])\n");
            }
            match (report.theory, report.theory_kind) {
                (Some(t), Some(k)) => s += &format!("  theory ({k}) {t:.6e}\n"),
                _ => s += "  no theoretical value for this configuration\n",
            }
            s += match report.pass {
                Some(true) => "  PASS\n",
                Some(false) => "  FAIL\n",
                None => "  (report only)\n",
            };
            s
        }
    };
    emit(&a.output.out, out, &text)?;
    Ok(if report.pass == Some(false) { EXIT_VERIFY_FAILED } else { EXIT_OK })
}

pub fn parse_n_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Input(format!("bad dimension range '{s}'; use start:end:step or a list"));
    let ns: Vec<usize> = if s.contains(':') {
        let parts: Vec<usize> = s.split(':').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        let (start, end, step) = match parts[..] {
            [a, b] => (a, b, 1),
            [a, b, c] => (a, b, c),
            _ => return Err(bad()),
        };
        if step == 0 || start > end {
            return Err(bad());
        }
        (start..=end).step_by(step).collect()
    } else {
        s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if ns.is_empty() || ns.contains(&0) {
        return Err(bad());
    }
    Ok(ns)
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let ids = resolve_ids(&a.theorem)?;
    let ns = parse_n_range(&a.n)?;
    let center = parse_center(&a.center)?;
    let mut rows = Vec::new();
    for &id in &ids {
        for &n in &ns {
            let q = SeparabilityQuery::new(n, a.alpha, a.delta).with_center(center.clone());
            let params = theorem_params(&a.family, n);
            let row = match (a.m, params) {
                (_, Err(e)) => ReportRow {
                    theorem: id.to_string(),
                    n,
                    alpha: a.alpha,
                    delta: a.delta,
                    log10_m: None,
                    m_exact: None,
                    m_display: "n/a".into(),
                    mode: String::new(),
                    b_exponent: None,
                    notes: e.to_string(),
                },
                (None, Ok(p)) => bound_row(id, &q, &p).0,
                (Some(m), Ok(p)) => probability_row(id, &q, &p, m),
            };
            rows.push(row);
        }
    }
    let text = render_rows(&rows, a.format)?;
    emit(&a.out, out, &text)?;
    Ok(EXIT_OK)
}

/// Fixed M: the failure probability δ = M(M−1)f, so P[separable] ≥ 1 − δ.
fn probability_row(id: TheoremId, q: &SeparabilityQuery, params: &TheoremParams, m: f64) -> ReportRow {
    let mut row = ReportRow {
        theorem: id.to_string(),
        n: q.n,
        alpha: q.alpha,
        delta: f64::NAN,
        log10_m: Some(m.log10()),
        m_exact: None,
        m_display: display_log10(m.log10()),
        mode: String::new(),
        b_exponent: None,
        notes: String::new(),
    };
    let th = match Theorem::build(id, params) {
        Ok(th) => th,
        Err(e) => {
            row.notes = e.to_string();
            return row;
        }
    };
    if let Theorem::Perturbed { epsilon } = th {
        match perturbed_probability(q.n, m, epsilon) {
            Ok(b) => {
                row.delta = b.ln_deficit.exp();
                row.mode = "sufficient".into();
                row.notes = format!("probability_lower_bound={}", format::display_probability(b.probability, b.ln_deficit));
            }
            Err(e) => row.notes = e.to_string(),
        }
        return row;
    }
    match two_point(q, &th) {
        Ok(tp) => {
            let ln_delta = (m * (m - 1.0)).ln() + tp.raw_ln;
            row.delta = ln_delta.exp();
            row.mode = if id.is_iff() { "exact_necessary_sufficient" } else { "sufficient" }.into();
            let p = -ln_delta.exp_m1();
            row.notes = format!("probability_lower_bound={}", format::display_probability(p, ln_delta));
        }
        Err(e) => row.notes = e.to_string(),
    }
    row
}

fn read_points(path: &Path) -> Result<(Vec<f64>, usize)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut flat = Vec::new();
    let mut n = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Input(format!("{}: malformed CSV: {e}", path.display())))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|c| c.parse::<f64>()).collect();
        match parsed {
            Ok(v) => {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Input(format!("{}: row {} has a non-finite value", path.display(), i + 1)));
                }
                n = v.len();
                flat.extend(v);
            }
            // a header row made entirely of labels
            Err(_) if i == 0 && rec.iter().all(|c| c.parse::<f64>().is_err()) => {}
            Err(_) => return Err(Error::Input(format!("{}: non-numeric cell in row {}", path.display(), i + 1))),
        }
    }
    if n == 0 || flat.len() / n < 2 {
        return Err(Error::Input(format!("{}: need at least two points", path.display())));
    }
    Ok((flat, n))
}

#[derive(Debug, Clone, Serialize)]
pub struct Offender {
    pub i: usize,
    pub j: usize,
    /// (x−c, y−c) / (α(x−c, x−c)); the pair is inseparable when ≥ 1.
    pub ratio: f64,
}

#[derive(Debug, Serialize)]
pub struct DatasetReport {
    pub points: usize,
    pub dimension: usize,
    pub alpha: f64,
    pub inseparable_pairs: u64,
    pub worst: Vec<Offender>,
    pub covariance_distance: f64,
    pub covariance_warning: bool,
    pub expected_pairs: Option<f64>,
    pub expected_kind: Option<&'static str>,
}

/// Pairs with the largest ratios, best first.
fn worst_pairs(pts: &[f64], n: usize, alpha: f64, c: &[f64], k: usize) -> Vec<Offender> {
    struct Key(f64, usize, usize);
    impl Ord for Key {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&o.0).then(o.1.cmp(&self.1)).then(o.2.cmp(&self.2))
        }
    }
    impl PartialOrd for Key {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl PartialEq for Key {
        fn eq(&self, o: &Self) -> bool {
            self.cmp(o).is_eq()
        }
    }
    impl Eq for Key {}
    let m = pts.len() / n;
    let mut heap: BinaryHeap<Reverse<Key>> = BinaryHeap::new();
    if k == 0 {
        return Vec::new();
    }
    for i in 0..m {
        let x = &pts[i * n..(i + 1) * n];
        let xx: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
        for j in (0..m).filter(|&j| j != i) {
            let y = &pts[j * n..(j + 1) * n];
            let xy: f64 = x.iter().zip(y).zip(c).map(|((a, b), ck)| (a - ck) * (b - ck)).sum();
            let ratio = if xx > 0.0 { xy / (alpha * xx) } else { f64::INFINITY };
            if heap.len() < k {
                heap.push(Reverse(Key(ratio, i, j)));
            } else if heap.peek().is_some_and(|Reverse(top)| ratio > top.0) {
                heap.pop();
                heap.push(Reverse(Key(ratio, i, j)));
            }
        }
    }
    let mut v: Vec<Offender> = heap.into_iter().map(|Reverse(Key(ratio, i, j))| Offender { i, j, ratio }).collect();
    v.sort_by(|a, b| b.ratio.total_cmp(&a.ratio).then(a.i.cmp(&b.i)).then(a.j.cmp(&b.j)));
    v
}

/// Frobenius distance between the sample covariance and the identity.
fn covariance_distance(pts: &[f64], n: usize) -> f64 {
    let m = pts.len() / n;
    let mut mean = vec![0.0; n];
    for p in pts.chunks(n) {
        mean.iter_mut().zip(p).for_each(|(a, b)| *a += b / m as f64);
    }
    let mut cov = vec![0.0; n * n];
    for p in pts.chunks(n) {
        for a in 0..n {
            let da = p[a] - mean[a];
            for b in 0..n {
                cov[a * n + b] += da * (p[b] - mean[b]);
            }
        }
    }
    let denom = (m as f64 - 1.0).max(1.0);
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            let v = cov[a * n + b] / denom - if a == b { 1.0 } else { 0.0 };
            s += v * v;
        }
    }
    s.sqrt()
}

pub fn check_dataset(a: &CheckDatasetArgs) -> Result<DatasetReport> {
    let (pts, n) = read_points(&a.path)?;
    let m = pts.len() / n;
    let c = match parse_center(&a.center)? {
        Center::Origin => vec![0.0; n],
        Center::CubeCenter => vec![0.5; n],
        Center::Mean => {
            let mut c = vec![0.0; n];
            for p in pts.chunks(n) {
                c.iter_mut().zip(p).for_each(|(a, b)| *a += b / m as f64);
            }
            c
        }
        Center::Explicit(c) if c.len() == n => c,
        _ => return Err(Error::Input(format!("centre must be mean, origin, cube-center or {n} coordinates"))),
    };
    let count = count_inseparable_pairs_fast(&pts, n, a.alpha, &c)?;
    let dist = covariance_distance(&pts, n);
    let expected = match &a.assume {
        Some(fam) => family_model(fam, n, a.alpha, &a.params)?
            .theory
            .map(|(ln_f, kind)| ((m as f64) * (m as f64 - 1.0) * ln_f.exp(), kind)),
        None => None,
    };
    Ok(DatasetReport {
        points: m,
        dimension: n,
        alpha: a.alpha,
        inseparable_pairs: count,
        worst: worst_pairs(&pts, n, a.alpha, &c, a.top),
        covariance_distance: dist,
        covariance_warning: dist > 0.5 * (n as f64).sqrt(),
        expected_pairs: expected.map(|e| e.0),
        expected_kind: expected.map(|e| e.1.as_str()),
    })
}

fn cmd_check_dataset(a: &CheckDatasetArgs, out: &mut dyn Write) -> Result<i32> {
    let r = check_dataset(a)?;
    let text = match a.output.format {
        OutputFormat::Json => to_json(&r)?,
        OutputFormat::Csv => to_csv(&r.worst)?,
        OutputFormat::Human => {
            let mut s = format!(
                "{} points in dimension {}, alpha={}\ninseparable ordered pairs: {}\n",
                r.points, r.dimension, r.alpha, r.inseparable_pairs
            );
            if let (Some(e), Some(k)) = (r.expected_pairs, r.expected_kind) {
                s += &format!("expected under the assumed family ({k}): {e:.6}\n");
            }
            if r.covariance_warning {
                s += &format!(
                    "warning: sample covariance is {:.3} from the identity (Frobenius); the bounds assume whitened data\n",
                    r.covariance_distance
                );
            }
            s += "worst pairs (i, j, (x-c,y-c)/(alpha|x-c|^2)):\n";
            for o in &r.worst {
                s += &format!("  {:>6} {:>6} {:.6}\n", o.i, o.j, o.ratio);
            }
            s
        }
    };
    emit(&a.output.out, out, &text)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_centres() {
        assert_eq!(parse_n_range("10:30:10").unwrap(), vec![10, 20, 30]);
        assert_eq!(parse_n_range("5,7").unwrap(), vec![5, 7]);
        assert!(parse_n_range("3:1").is_err());
        assert_eq!(parse_center("0,0.5").unwrap(), Center::Explicit(vec![0.0, 0.5]));
        assert!(parse_center("middle").is_err());
        assert_eq!(parse_component("three-point:0.4", None).unwrap(), ComponentSpec::ThreePoint { sigma0: 0.4 });
        assert!(parse_component("three-point", None).is_err());
    }

    #[test]
    fn worst_pairs_are_sorted() {
        let pts = [1.0, 0.0, 0.0, 1.0, 1.0, 0.0];
        let w = worst_pairs(&pts, 2, 1.0, &[0.0, 0.0], 2);
        assert_eq!((w[0].ratio, w.len()), (1.0, 2));
        assert!(w[0].ratio >= w[1].ratio);
    }
}
