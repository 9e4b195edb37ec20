//! Run orchestration: one model run per [`RunConfig`], written as images,
//! CSV dumps and a manifest under the output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::abelian_rr2::{
    asymptotic_prob, binomial_field, binomial_field_exact, check_theorem1, column, retained_mass,
    rr2_diff, rr2_scheme, symmetric_rr2, RealField,
};
use crate::abelian_rr4::{
    quasi_symmetry_probe, rr4_model_diff, run_until_settled, SweepState, SymmetricState,
};
use crate::analysis::{conjecture1_scaling, shape_metrics};
use crate::error::{Error, Result};
use crate::export::{
    encode_csv, encode_pgm, encode_ppm_rotors, encode_table, passage_rotors, sha256_hex,
    FieldValue, Manifest, Palette,
};
use crate::lattice::{Coord, Grid, RotorProgram};
use crate::numeric::{Dyadic, Mass};
use crate::rotor_walk::run_walk;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Walk,
    Rr2,
    Rr2Sym,
    Rr2Binomial,
    Rr4Abelian,
    Rr4Sym,
    Diff,
    Verify,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Walk => "walk",
            Model::Rr2 => "rr2",
            Model::Rr2Sym => "rr2-sym",
            Model::Rr2Binomial => "rr2-binomial",
            Model::Rr4Abelian => "rr4-abelian",
            Model::Rr4Sym => "rr4-sym",
            Model::Diff => "diff",
            Model::Verify => "verify",
        }
    }
}

/// Which pair of models `diff` compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffPair {
    #[default]
    Rr2,
    Rr4,
}

/// Optional outputs. The manifest is always written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emit {
    pub pgm: bool,
    pub ppm: bool,
    pub csv: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Emit {
            pgm: true,
            ppm: true,
            csv: true,
        }
    }
}

impl Emit {
    /// Comma-separated list of `pgm`, `ppm`, `csv`, `manifest`.
    pub fn parse(text: &str) -> Result<Emit> {
        let mut emit = Emit {
            pgm: false,
            ppm: false,
            csv: false,
        };
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match part.to_ascii_lowercase().as_str() {
                "pgm" => emit.pgm = true,
                "ppm" => emit.ppm = true,
                "csv" => emit.csv = true,
                "manifest" => {}
                other => return Err(Error::invalid(format!("unknown export mode {other}"))),
            }
        }
        Ok(emit)
    }

    fn names(self) -> Vec<&'static str> {
        [
            (self.pgm, "pgm"),
            (self.ppm, "ppm"),
            (self.csv, "csv"),
            (true, "manifest"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub ants: u64,
    pub program: RotorProgram,
    pub sweeps: Option<u64>,
    pub exact: bool,
    /// Last row for `rr2-binomial`; defaults to the depth of the integer scheme.
    pub rows: Option<usize>,
    pub pair: DiffPair,
    pub out: PathBuf,
    pub emit: Emit,
}

impl RunConfig {
    pub fn new(model: Model, ants: u64, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            model,
            ants,
            program: RotorProgram::rr4(),
            sweeps: None,
            exact: false,
            rows: None,
            pair: DiffPair::Rr2,
            out: out.into(),
            emit: Emit::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ants == 0 {
            return Err(Error::invalid("ant count must be at least 1"));
        }
        if self.sweeps == Some(0) {
            return Err(Error::invalid("sweep count must be at least 1"));
        }
        let needs_sweeps = self.model == Model::Rr4Sym
            || (self.model == Model::Diff && self.pair == DiffPair::Rr4);
        if needs_sweeps && self.sweeps.is_none() {
            return Err(Error::invalid(format!(
                "{} needs --sweeps",
                self.model.name()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub manifest: Manifest,
    /// False only when a `verify` check failed.
    pub verified: bool,
}

/// Writes artifacts, remembering their hashes and palettes.
struct Artifacts<'a> {
    dir: &'a Path,
    emit: Emit,
    files: BTreeMap<String, String>,
    palettes: BTreeMap<String, Value>,
}

impl<'a> Artifacts<'a> {
    fn new(dir: &'a Path, emit: Emit) -> Self {
        Artifacts {
            dir,
            emit,
            files: BTreeMap::new(),
            palettes: BTreeMap::new(),
        }
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.files.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    fn pgm<V: FieldValue>(&mut self, name: &str, grid: &Grid<V>, palette: Palette) -> Result<()> {
        if !self.emit.pgm {
            return Ok(());
        }
        self.palettes
            .insert(name.to_string(), json!(palette.name()));
        self.put(name, &encode_pgm(grid, palette))
    }

    fn ppm(&mut self, name: &str, rotors: &Grid<Option<u32>>) -> Result<()> {
        if !self.emit.ppm {
            return Ok(());
        }
        self.palettes
            .insert(name.to_string(), json!(Palette::Rotor4.name()));
        self.put(name, &encode_ppm_rotors(rotors))
    }

    fn csv<V: FieldValue>(&mut self, name: &str, grid: &Grid<V>) -> Result<()> {
        if !self.emit.csv {
            return Ok(());
        }
        self.put(name, encode_csv(grid).as_bytes())
    }

    /// Descriptive table; written whenever CSV output is on.
    fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        if !self.emit.csv {
            return Ok(());
        }
        self.put(name, encode_table(header, rows).as_bytes())
    }
}

/// Run-specific part of the manifest.
struct Report {
    program: Option<String>,
    sweeps: Option<u64>,
    numeric_mode: &'static str,
    parameters: BTreeMap<String, Value>,
    metrics: BTreeMap<String, Value>,
    verified: bool,
}

impl Report {
    fn new(numeric_mode: &'static str) -> Self {
        Report {
            program: None,
            sweeps: None,
            numeric_mode,
            parameters: BTreeMap::new(),
            metrics: BTreeMap::new(),
            verified: true,
        }
    }

    fn metric(&mut self, key: &str, value: impl Into<Value>) {
        self.metrics.insert(key.to_string(), value.into());
    }

    fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    fn with_program(&mut self, program: &RotorProgram) {
        self.program = Some(program.text());
        self.param("program_name", program.name());
    }
}

/// Runs one configuration and writes its artifacts and manifest.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    let mut files = Artifacts::new(&config.out, config.emit);
    let mut report = match config.model {
        Model::Walk => run_walk_model(config, &mut files)?,
        Model::Rr2 => run_rr2(config, &mut files)?,
        Model::Rr2Sym => run_rr2_sym(config, &mut files)?,
        Model::Rr2Binomial => run_rr2_binomial(config, &mut files)?,
        Model::Rr4Abelian => run_rr4_abelian(config, &mut files)?,
        Model::Rr4Sym => run_rr4_sym(config, &mut files)?,
        Model::Diff => match config.pair {
            DiffPair::Rr2 => run_diff_rr2(config, &mut files)?,
            DiffPair::Rr4 => run_diff_rr4(config, &mut files)?,
        },
        Model::Verify => run_verify(config, &mut files)?,
    };
    report.param("emit", config.emit.names());
    if !files.palettes.is_empty() {
        report.param(
            "palettes",
            Value::Object(files.palettes.into_iter().collect()),
        );
    }
    let manifest = Manifest {
        model: config.model.name().to_string(),
        ants: config.ants,
        program: report.program,
        sweeps: report.sweeps,
        numeric_mode: report.numeric_mode.to_string(),
        parameters: report.parameters,
        metrics: report.metrics,
        files: files.files,
    };
    let path = config.out.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_json_string()).map_err(|e| Error::io(&path, e))?;
    Ok(RunOutcome {
        manifest,
        verified: report.verified,
    })
}

fn numeric_mode(exact: bool) -> &'static str {
    if exact {
        "exact"
    } else {
        "float"
    }
}

fn add_shape(report: &mut Report, occupied: impl IntoIterator<Item = Coord>) -> Result<()> {
    let shape = shape_metrics(occupied)?;
    report.metric("inradius", shape.inradius);
    report.metric("outradius", shape.outradius);
    report.metric("roundness", shape.ratio);
    Ok(())
}

fn run_walk_model(config: &RunConfig, files: &mut Artifacts) -> Result<Report> {
    let field = run_walk(config.ants, &config.program)?;
    let bounds = field.cells().support_bounds(|c| c.occupied());
    let cells = field.cells().cropped(bounds);
    let mut report = Report::new("integer");
    report.with_program(&config.program);
    report.metric("occupied_sites", field.occupied_set().len() as u64);
    report.metric("total_steps", field.steps());
    report.metric("origin_passages", field.cell(Coord::ORIGIN).passages);
    report.metric("width", bounds.width() as u64);
    report.metric("height", bounds.height() as u64);
    add_shape(&mut report, field.occupied_set())?;

    let passages = cells.map(|c| c.passages);
    let first = cells.map(|c| c.first_visit.unwrap_or(0));
    files.pgm("passages.pgm", &passages, Palette::PassageLog)?;
    files.pgm("first_visit.pgm", &first, Palette::IterationGray)?;
    files.ppm(
        "rotors.ppm",
        &cells.map(|c| c.occupied().then_some(c.rotor.0)),
    )?;
    files.csv("passages.csv", &passages)?;
    files.csv("first_visit.csv", &first)?;
    Ok(report)
}

fn rr2_outputs<V: FieldValue>(files: &mut Artifacts, grid: &Grid<V>) -> Result<()> {
    files.pgm("passages.pgm", grid, Palette::PassageLog)?;
    files.ppm("rotors.ppm", &passage_rotors(grid))?;
    files.csv("passages.csv", grid)
}

fn run_rr2(config: &RunConfig, files: &mut Artifacts) -> Result<Report> {
    let field = rr2_scheme(config.ants)?;
    let check = check_theorem1(&field, config.ants);
    let mut report = Report::new("integer");
    report.metric("rows", field.row_count() as u64);
    report.metric("occupied_sites", field.occupied_count() as u64);
    report.metric("pairs_checked", check.pairs_checked as u64);
    report.metric("max_pair_delta", check.max_pair_delta);
    report.metric("pair_violations", check.violations.len() as u64);
    rr2_outputs(files, &field.to_grid())?;
    Ok(report)
}

fn real_rr2_metrics(report: &mut Report, field: &RealField) {
    report.metric("rows", field.row_count() as u64);
    report.metric(
        "nonzero_sites",
        field.iter().filter(|(_, v)| **v != 0.0).count() as u64,
    );
    report.metric(
        "max_value",
        field.iter().map(|(_, v)| *v).fold(0.0, f64::max),
    );
}

fn symmetric_rr2_real(t: u64, exact: bool, report: &mut Report) -> Result<RealField> {
    if exact {
        let field = symmetric_rr2::<Dyadic>(t)?;
        let mass = retained_mass(&field);
        report.metric("retained_mass", mass.to_f64());
        report.metric("retained_mass_exact", mass.to_string());
        report.metric("mirror_symmetric", field.is_mirror_symmetric());
        Ok(field.map(Dyadic::to_f64))
    } else {
        let field = symmetric_rr2::<f64>(t)?;
        report.metric("retained_mass", retained_mass(&field));
        report.metric("mirror_symmetric", field.is_mirror_symmetric());
        Ok(field)
    }
}

fn run_rr2_sym(config: &RunConfig, files: &mut Artifacts) -> Result<Report> {
    let mut report = Report::new(numeric_mode(config.exact));
    let field = symmetric_rr2_real(config.ants, config.exact, &mut report)?;
    real_rr2_metrics(&mut report, &field);
    rr2_outputs(files, &field.to_grid())?;
    Ok(report)
}

fn run_rr2_binomial(config: &RunConfig, files: &mut Artifacts) -> Result<Report> {
    let max_row = match config.rows {
        Some(rows) => rows,
        None => rr2_scheme(config.ants)?.row_count() - 1,
    };
    let field = if config.exact {
        let one = Dyadic::from_u64(1);
        let exact = binomial_field_exact(config.ants, max_row);
        let truncated = exact.map(|v| if *v >= one { v.to_f64() } else { 0.0 });
        let last = (0..truncated.row_count())
            .rev()
            .find(|&n| !truncated.row(n).expect("row").is_empty())
            .unwrap_or(0);
        RealField::from_rows(truncated.dense_rows().into_iter().take(last + 1).collect())?
    } else {
        binomial_field(config.ants, max_row)?
    };
    let mut report = Report::new(numeric_mode(config.exact));
    report.param("max_row", max_row as u64);
    real_rr2_metrics(&mut report, &field);
    rr2_outputs(files, &field.to_grid())?;
    Ok(report)
}

fn run_rr4_abelian(config: &RunConfig, files: &mut Artifacts) -> Result<Report> {
    let settlement = run_until_settled(
        config.ants,
        &config.program,
        config.sweeps.unwrap_or(u64::MAX),
    )?;
    let state = &settlement.state;
    let mut report = Report::new("integer");
    report.with_program(&config.program);
    report.sweeps = Some(settlement.sweeps_used);
    report.metric("settled", settlement.is_settled());
    report.metric("max_present", state.max_present());
    report.metric("total_present", state.total_present());
    report.metric("occupied_sites", state.occupied_set().len() as u64);
    let probe = quasi_symmetry_probe(state);
    report.metric("symmetry_deviation", probe.deviation);
    if settlement.is_settled() {
        add_shape(&mut report, state.occupied_set())?;
    }
    let present = state.present();
    let passages = state.passages();
    files.pgm("present.pgm", &present, Palette::PassageLinear)?;
    files.pgm("passages.pgm", &passages, Palette::PassageLog)?;
    files.ppm("rotors.ppm", &state.rotors())?;
    files.csv("present.csv", &present)?;
    files.csv("passages.csv", &passages)?;
    Ok(report)
}

fn symmetric_rr4<M: Mass>(t: u64, sweeps: u64) -> Result<SymmetricState<M>> {
    let mut state = SymmetricState::<M>::new(t)?;
    for _ in 0..sweeps {
        state.sweep();
    }
    Ok(state)
}

/// Present and passage grids plus total mass of a symmetric run.
fn symmetric_rr4_grids(
    t: u64,
    sweeps: u64,
    exact: bool,
    report: &mut Report,
) -> Result<(Grid<f64>, Grid<f64>)> {
    if exact {
        let state = symmetric_rr4::<Dyadic>(t, sweeps)?;
        let total = state.total_present();
        report.metric("total_present", total.to_f64());
        report.metric("total_present_exact", total.to_string());
        report.metric("max_present", state.max_present());
        Ok((state.present(), state.passages()))
    } else {
        let state = symmetric_rr4::<f64>(t, sweeps)?;
        report.metric("total_present", state.total_present());
        report.metric("max_present", state.max_present());
        Ok((state.present(), state.passages()))
    }
}

fn run_rr4_sym(config: &RunConfig, files: &mut Artifacts) -> Result<Report> {
    let sweeps = config.sweeps.expect("validated");
    let mut report = Report::new(numeric_mode(config.exact));
    report.sweeps = Some(sweeps);
    let (present, passages) = symmetric_rr4_grids(config.ants, sweeps, config.exact, &mut report)?;
    files.pgm("present.pgm", &present, Palette::PassageLinear)?;
    files.pgm("passages.pgm", &passages, Palette::PassageLog)?;
    files.ppm("rotors.ppm", &passage_rotors(&passages))?;
    files.csv("present.csv", &present)?;
    files.csv("passages.csv", &passages)?;
    Ok(report)
}

/// Powers of two below `t`, then `t` itself.
fn doubling_scale(t: u64) -> Vec<u64> {
    let mut ts: Vec<u64> = (1..64).map(|k| 1u64 << k).take_while(|&p| p < t).collect();
    ts.push(t);
    ts
}

fn run_diff_rr2(config: &RunConfig, files: &mut Artifacts) -> Result<Report> {
    let mut report = Report::new(numeric_mode(config.exact));
    report.param("pair", "rr2");
    let abelian = rr2_scheme(config.ants)?;
    let mut sym_report = Report::new("float");
    let symmetric = symmetric_rr2_real(config.ants, config.exact, &mut sym_report)?;
    let diff = rr2_diff(&abelian, &symmetric);
    report.metric("sup", diff.sup);
    let grid = diff.field.to_grid();
    files.pgm("diff.pgm", &grid, Palette::PassageLinear)?;
    files.csv("diff.csv", &grid)?;

    let scaling = conjecture1_scaling(&doubling_scale(config.ants))?;
    report.metric("slower_than_log2", scaling.slower_than_log2);
    let rows: Vec<Vec<String>> = scaling
        .rows
        .iter()
        .map(|r| vec![r.t.to_string(), r.sup.csv_text(), r.envelope.csv_text()])
        .collect();
    files.table("scaling.csv", &["t", "sup", "envelope"], &rows)?;
    Ok(report)
}

fn run_diff_rr4(config: &RunConfig, files: &mut Artifacts) -> Result<Report> {
    if config.exact {
        diff_rr4::<Dyadic>(config, files)
    } else {
        diff_rr4::<f64>(config, files)
    }
}

fn diff_rr4<M: Mass>(config: &RunConfig, files: &mut Artifacts) -> Result<Report> {
    let sweeps = config.sweeps.expect("validated");
    let mut report = Report::new(numeric_mode(config.exact));
    report.with_program(&config.program);
    report.sweeps = Some(sweeps);
    report.param("pair", "rr4");
    let mut abelian = SweepState::new(config.ants)?;
    let mut symmetric = SymmetricState::<M>::new(config.ants)?;
    let mut trace = Vec::with_capacity(sweeps as usize);
    for _ in 0..sweeps {
        abelian.sweep(&config.program);
        symmetric.sweep();
        let probe = quasi_symmetry_probe(&abelian);
        trace.push(vec![
            abelian.iteration().to_string(),
            probe.deviation.to_string(),
            abelian.total_present().to_string(),
        ]);
    }
    let diff = rr4_model_diff(&abelian, &symmetric)?;
    report.metric("present_sup", diff.present_sup);
    report.metric("passage_sup", diff.passage_sup);
    report.metric("abelian_max_present", abelian.max_present());
    report.metric("abelian_settled", abelian.is_settled());
    report.metric("symmetric_max_present", symmetric.max_present());
    report.metric(
        "symmetric_total_present",
        symmetric.total_present().to_f64(),
    );
    report.metric(
        "symmetry_deviation",
        quasi_symmetry_probe(&abelian).deviation,
    );
    files.pgm("present_diff.pgm", &diff.present, Palette::PassageLinear)?;
    files.pgm("passage_diff.pgm", &diff.passages, Palette::PassageLinear)?;
    files.csv("present_diff.csv", &diff.present)?;
    files.csv("passage_diff.csv", &diff.passages)?;
    files.table(
        "trace.csv",
        &["sweep", "deviation", "present_total"],
        &trace,
    )?;
    Ok(report)
}

/// Outcome of one `verify` check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub cases: u64,
    pub detail: String,
}

/// The invariant suites behind `verify`, at scale `t`:
/// * mirror pairs of the two-direction scheme for every `t' <= t`,
/// * one occupied site per ant in that scheme,
/// * the sweep algorithm settles on the sequential walk's occupied set for
///   every `t' <= t`,
/// * `|Nbf(n, c, t) / t - C(n, p) / 2^n| <= 2n / t` for rows `n <= 16`,
/// * exact symmetric splitting is mirror-symmetric with retained mass `t'`,
///   and the float version agrees to `1e-9` relative.
pub fn verify_checks(
    t: u64,
    program: &RotorProgram,
    max_sweeps: Option<u64>,
) -> Result<Vec<CheckResult>> {
    if t == 0 {
        return Err(Error::invalid("ant count must be at least 1"));
    }
    let mut pairs = 0u64;
    let mut pair_failures = Vec::new();
    let mut mass_failures = Vec::new();
    let mut sym_failures = Vec::new();
    for s in 1..=t {
        let field = rr2_scheme(s)?;
        let check = check_theorem1(&field, s);
        pairs += check.pairs_checked as u64;
        if !check.holds() {
            pair_failures.push(s);
        }
        if field.occupied_count() as u64 != s {
            mass_failures.push(s);
        }
        if !symmetric_agrees(s)? {
            sym_failures.push(s);
        }
    }

    let walk = run_walk(t, program)?;
    let mut oracle_failures = Vec::new();
    for s in 1..=t {
        let settled = run_until_settled(s, program, max_sweeps.unwrap_or(u64::MAX))?;
        if !settled.is_settled() || settled.state.occupied_set() != walk.occupied_prefix(s) {
            oracle_failures.push(s);
        }
    }

    let field = rr2_scheme(t)?;
    let mut worst = 0.0f64;
    let mut limit_failures = Vec::new();
    let mut cells = 0u64;
    for n in 0..=16u32 {
        for p in 0..=n {
            let c = column(n as usize, p as usize);
            let error =
                (field.value(n as usize, c) as f64 / t as f64 - asymptotic_prob(n, p)?).abs();
            let bound = 2.0 * f64::from(n) / t as f64;
            worst = worst.max(error);
            cells += 1;
            if error > bound {
                limit_failures.push(format!("({n},{p})"));
            }
        }
    }

    let summary = |failures: &[u64]| match failures.first() {
        None => "none failed".to_string(),
        Some(first) => format!("{} failed, first at t={first}", failures.len()),
    };
    Ok(vec![
        CheckResult {
            name: "mirror_pairs",
            passed: pair_failures.is_empty(),
            cases: t,
            detail: format!("{pairs} pairs; {}", summary(&pair_failures)),
        },
        CheckResult {
            name: "rr2_conservation",
            passed: mass_failures.is_empty(),
            cases: t,
            detail: summary(&mass_failures),
        },
        CheckResult {
            name: "settled_oracle",
            passed: oracle_failures.is_empty(),
            cases: t,
            detail: summary(&oracle_failures),
        },
        CheckResult {
            name: "binomial_limit",
            passed: limit_failures.is_empty(),
            cases: cells,
            detail: format!(
                "max error {}; failing cells: {}",
                worst.csv_text(),
                limit_failures.len()
            ),
        },
        CheckResult {
            name: "symmetric_exactness",
            passed: sym_failures.is_empty(),
            cases: t,
            detail: summary(&sym_failures),
        },
    ])
}

/// Exact splitting is mirror-symmetric and mass-preserving, and the float
/// splitting matches it within `1e-9` relative.
pub fn symmetric_agrees(t: u64) -> Result<bool> {
    let exact = symmetric_rr2::<Dyadic>(t)?;
    let float = symmetric_rr2::<f64>(t)?;
    if !exact.is_mirror_symmetric() || retained_mass(&exact) != Dyadic::from_u64(t) {
        return Ok(false);
    }
    if exact.row_count() != float.row_count() {
        return Ok(false);
    }
    Ok(exact.iter().all(|(c, v)| {
        let want = v.to_f64();
        let got = float.value(c.row as usize, c.col);
        (got - want).abs() <= 1e-9 * want.abs()
    }) && float
        .iter()
        .all(|(c, v)| *v == 0.0 || exact.get(c.row as usize, c.col).is_some()))
}

fn run_verify(config: &RunConfig, files: &mut Artifacts) -> Result<Report> {
    let checks = verify_checks(config.ants, &config.program, config.sweeps)?;
    let mut report = Report::new("integer");
    report.with_program(&config.program);
    for check in &checks {
        report.metric(
            check.name,
            json!({ "passed": check.passed, "cases": check.cases, "detail": check.detail }),
        );
    }
    report.verified = checks.iter().all(|c| c.passed);
    report.metric("all_passed", report.verified);
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.name.to_string(),
                c.passed.to_string(),
                c.cases.to_string(),
                c.detail.clone(),
            ]
        })
        .collect();
    files.table("verify.csv", &["check", "passed", "cases", "detail"], &rows)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn emit_parsing() {
        let e = Emit::parse("pgm, CSV,manifest").unwrap();
        assert_eq!((e.pgm, e.ppm, e.csv), (true, false, true));
        assert!(Emit::parse("png").is_err());
        assert_eq!(Emit::parse("manifest").unwrap().names(), ["manifest"]);
    }

    #[test]
    fn validation() {
        let dir = tmp();
        assert!(run(&RunConfig::new(Model::Rr2, 0, dir.path())).is_err());
        assert!(run(&RunConfig::new(Model::Rr4Sym, 5, dir.path())).is_err());
        let mut c = RunConfig::new(Model::Rr4Abelian, 5, dir.path());
        c.sweeps = Some(0);
        assert!(run(&c).is_err());
    }

    #[test]
    fn walk_run() {
        let dir = tmp();
        let out = run(&RunConfig::new(Model::Walk, 5, dir.path())).unwrap();
        let m = &out.manifest;
        assert_eq!(m.metrics["occupied_sites"], json!(5));
        assert_eq!(m.program.as_deref(), Some("N,W,S,E"));
        assert_eq!(m.files.len(), 5);
        for (name, hash) in &m.files {
            assert_eq!(
                &crate::export::sha256_file(&dir.path().join(name)).unwrap(),
                hash
            );
        }
        let text = fs::read_to_string(dir.path().join("passages.csv")).unwrap();
        assert!(text.contains("0,0,5\n"));
        assert!(dir.path().join(MANIFEST_FILE).exists());
    }

    #[test]
    fn emit_selection() {
        let dir = tmp();
        let mut c = RunConfig::new(Model::Rr2, 64, dir.path());
        c.emit = Emit::parse("csv").unwrap();
        let out = run(&c).unwrap();
        assert_eq!(
            out.manifest.files.keys().collect::<Vec<_>>(),
            ["passages.csv"]
        );
        assert_eq!(out.manifest.metrics["occupied_sites"], json!(64));
    }

    #[test]
    fn models_run() {
        let dir = tmp();
        for model in [
            Model::Rr2Sym,
            Model::Rr2Binomial,
            Model::Rr4Abelian,
            Model::Diff,
        ] {
            for exact in [false, true] {
                let mut c = RunConfig::new(
                    model,
                    20,
                    dir.path().join(format!("{}-{exact}", model.name())),
                );
                c.exact = exact;
                assert!(run(&c).unwrap().verified);
            }
        }
        let mut c = RunConfig::new(Model::Rr4Sym, 20, dir.path().join("sym"));
        c.sweeps = Some(10);
        c.exact = true;
        let m = run(&c).unwrap().manifest;
        assert_eq!(m.metrics["total_present_exact"], json!("20/2^0"));
        let mut c = RunConfig::new(Model::Diff, 20, dir.path().join("diff4"));
        c.sweeps = Some(10);
        c.pair = DiffPair::Rr4;
        let m = run(&c).unwrap().manifest;
        assert!(m.files.contains_key("trace.csv"));
    }

    #[test]
    fn binomial_modes_agree() {
        let dir = tmp();
        let mut hashes = Vec::new();
        for exact in [false, true] {
            let mut c = RunConfig::new(Model::Rr2Binomial, 100, dir.path().join(exact.to_string()));
            c.exact = exact;
            c.emit = Emit::parse("csv").unwrap();
            hashes.push(run(&c).unwrap().manifest.files["passages.csv"].clone());
        }
        assert_eq!(hashes[0], hashes[1]);
    }

    #[test]
    fn verify_small() {
        let checks = verify_checks(40, &RotorProgram::rr4(), None).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        let dir = tmp();
        let out = run(&RunConfig::new(Model::Verify, 12, dir.path())).unwrap();
        assert!(out.verified);
        assert_eq!(out.manifest.metrics["all_passed"], json!(true));
    }

    #[test]
    fn doubling() {
        assert_eq!(doubling_scale(1), [1]);
        assert_eq!(doubling_scale(8), [2, 4, 8]);
        assert_eq!(doubling_scale(10), [2, 4, 8, 10]);
    }
}
