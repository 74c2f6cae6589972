//! Tradeoff-table runner: sweeps a γ grid, evaluates the selected schemes and
//! optionally simulates the linear scheme at each grid point.

use std::fmt::Write as _;
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use num_traits::{One, Zero};
use rayon::prelude::*;

use cachecalc_core::bounds::{
    converse, mds_load, table1_load, uncoded_load, yma_envelope_at, SystemConfig,
};
use cachecalc_core::gf::{PrimeField, DEFAULT_PRIME};
use cachecalc_core::lp;
use cachecalc_core::rational::{parse_rational, Rational};
use cachecalc_core::sim::{run_trial, TrialOutcome, TrialSettings};

pub const PRIME_ENV: &str = "CACHECALC_PRIME";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Linp,
    Uncoded,
    Mds,
    Yma,
    Converse,
    Table1,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Linp => "linp",
            Scheme::Uncoded => "uncoded",
            Scheme::Mds => "mds",
            Scheme::Yma => "yma",
            Scheme::Converse => "converse",
            Scheme::Table1 => "table1",
        }
    }
}

impl FromStr for Scheme {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "linp" => Scheme::Linp,
            "uncoded" => Scheme::Uncoded,
            "mds" => Scheme::Mds,
            "yma" => Scheme::Yma,
            "converse" => Scheme::Converse,
            "table1" => Scheme::Table1,
            other => bail!("unknown scheme {other:?} (expected linp, uncoded, mds, yma, converse, table1)"),
        })
    }
}

/// Parse a comma-separated scheme list, keeping the given order.
pub fn parse_schemes(s: &str) -> Result<Vec<Scheme>> {
    let mut out: Vec<Scheme> = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let sc: Scheme = part.parse()?;
        ensure!(!out.contains(&sc), "scheme {} listed twice", sc.name());
        out.push(sc);
    }
    ensure!(!out.is_empty(), "no schemes selected");
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Tsv,
    Csv,
}

impl Format {
    fn delimiter(self) -> char {
        match self {
            Format::Tsv => '\t',
            Format::Csv => ',',
        }
    }
}

impl FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(Format::Tsv),
            "csv" => Ok(Format::Csv),
            other => bail!("unknown format {other:?} (expected tsv or csv)"),
        }
    }
}

/// `start:step:end` (inclusive) or a comma list of rationals.
pub fn parse_grid(s: &str) -> Result<Vec<Rational>> {
    let s = s.trim();
    let rat = |x: &str| parse_rational(x).with_context(|| format!("not a rational number: {x:?}"));
    let grid = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        ensure!(parts.len() == 3, "range must be start:step:end, got {s:?}");
        let (start, step, end) = (rat(parts[0])?, rat(parts[1])?, rat(parts[2])?);
        ensure!(step > Rational::zero(), "range step must be positive");
        let mut out = Vec::new();
        let mut g = start;
        while g <= end {
            out.push(g.clone());
            g += &step;
        }
        out
    } else {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(rat)
            .collect::<Result<Vec<_>>>()?
    };
    ensure!(!grid.is_empty(), "gamma grid is empty");
    for g in &grid {
        ensure!(
            *g >= Rational::zero() && *g <= Rational::one(),
            "gamma {g} outside [0, 1]"
        );
    }
    ensure!(
        grid.windows(2).all(|w| w[0] < w[1]),
        "gamma grid must be strictly increasing"
    );
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimSpec {
    pub b_min: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub users: usize,
    pub files: usize,
    pub gamma_grid: Vec<Rational>,
    pub schemes: Vec<Scheme>,
    pub sim: Option<SimSpec>,
    pub format: Format,
    pub field: PrimeField,
}

impl RunSpec {
    pub fn validate(&self) -> Result<()> {
        SystemConfig::new(self.users, self.files, Rational::zero())?;
        ensure!(!self.gamma_grid.is_empty(), "gamma grid is empty");
        ensure!(!self.schemes.is_empty(), "no schemes selected");
        if let Some(sim) = &self.sim {
            ensure!(
                self.schemes.contains(&Scheme::Linp),
                "simulation needs the linp scheme"
            );
            ensure!(sim.trials > 0, "trials must be positive");
            ensure!(sim.b_min > 0, "B-min must be positive");
        }
        Ok(())
    }

    fn config(&self, gamma: &Rational) -> SystemConfig {
        SystemConfig::new(self.users, self.files, gamma.clone()).expect("validated spec")
    }
}

/// Field prime from `CACHECALC_PRIME`, or the default.
pub fn field_from_env() -> Result<PrimeField> {
    match std::env::var(PRIME_ENV) {
        Ok(v) => {
            let p: u64 = v
                .trim()
                .parse()
                .with_context(|| format!("{PRIME_ENV}={v:?} is not an integer"))?;
            PrimeField::new(p).with_context(|| format!("{PRIME_ENV}={p}"))
        }
        Err(std::env::VarError::NotPresent) => Ok(PrimeField::new(DEFAULT_PRIME)?),
        Err(e) => Err(e).context(PRIME_ENV),
    }
}

/// Decimal with 12 significant digits.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    // exponent after rounding, so 0.99999999999999 counts as magnitude 0
    let sci = format!("{x:.11e}");
    let magnitude: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone)]
pub struct SimSummary {
    pub lp: Rational,
    pub outcomes: Vec<TrialOutcome>,
    pub errors: Vec<String>,
}

impl SimSummary {
    pub fn trials(&self) -> usize {
        self.outcomes.len() + self.errors.len()
    }

    pub fn decoded(&self) -> usize {
        self.outcomes.iter().filter(|o| o.all_decoded()).count()
    }

    pub fn fallbacks(&self) -> usize {
        self.outcomes.iter().filter(|o| o.omission_fallback).count()
    }

    /// The measured load when every trial agrees on it.
    pub fn load(&self) -> Option<Rational> {
        let first = self.outcomes.first()?.load.clone();
        self.outcomes.iter().all(|o| o.load == first).then_some(first)
    }

    pub fn ok(&self) -> bool {
        self.errors.is_empty()
            && self.decoded() == self.trials()
            && self.load().as_ref() == Some(&self.lp)
    }
}

#[derive(Debug, Clone)]
pub struct Row {
    pub gamma: Rational,
    pub cells: Vec<String>,
    pub sim: Option<SimSummary>,
}

fn simulate(spec: &RunSpec, cfg: &SystemConfig, sol: &lp::LpSolution, sim: &SimSpec) -> SimSummary {
    let settings = TrialSettings {
        b_min: sim.b_min,
        field: spec.field,
        ..TrialSettings::default()
    };
    let mut outcomes = Vec::new();
    let mut errors = Vec::new();
    for i in 0..sim.trials as u64 {
        match run_trial(cfg, sol, &settings, sim.seed.wrapping_add(i)) {
            Ok(o) => outcomes.push(o),
            Err(e) => errors.push(e.to_string()),
        }
    }
    SimSummary {
        lp: sol.objective.clone(),
        outcomes,
        errors,
    }
}

fn evaluate(spec: &RunSpec, gamma: &Rational) -> Result<Row> {
    let cfg = spec.config(gamma);
    let mut cells = Vec::with_capacity(spec.schemes.len());
    let mut sim = None;
    for &scheme in &spec.schemes {
        let cell = match scheme {
            Scheme::Linp => {
                let sol = lp::solve(&cfg)?;
                if let Some(s) = &spec.sim {
                    sim = Some(simulate(spec, &cfg, &sol, s));
                }
                sol.objective.to_string()
            }
            Scheme::Uncoded => uncoded_load(&cfg).to_string(),
            Scheme::Mds if gamma.is_zero() => "-".into(),
            Scheme::Mds => format_real(mds_load(&cfg)?.load),
            Scheme::Yma => yma_envelope_at(&cfg).to_string(),
            Scheme::Converse => converse(&cfg).to_string(),
            Scheme::Table1 => table1_load(&cfg).map_or_else(|| "-".into(), |q| q.to_string()),
        };
        cells.push(cell);
    }
    Ok(Row {
        gamma: gamma.clone(),
        cells,
        sim,
    })
}

/// Evaluate every grid point in parallel; rows come back in grid order.
pub fn compute(spec: &RunSpec) -> Result<Vec<Row>> {
    spec.validate()?;
    spec.gamma_grid.par_iter().map(|g| evaluate(spec, g)).collect()
}

pub fn render(spec: &RunSpec, rows: &[Row]) -> String {
    let d = spec.format.delimiter();
    let mut out = String::new();
    let seed = spec
        .sim
        .as_ref()
        .map_or_else(|| "-".to_string(), |s| s.seed.to_string());
    let _ = writeln!(
        out,
        "# meta: K={} N={} seed={seed} prime={} version={}",
        spec.users,
        spec.files,
        spec.field.modulus(),
        env!("CARGO_PKG_VERSION")
    );
    if spec.schemes.contains(&Scheme::Converse) {
        out.push_str(
            "# note: converse is max(delta1, delta2 where defined); bounds for general placement are not included\n",
        );
    }
    let mut header = vec!["gamma"];
    header.extend(spec.schemes.iter().map(|s| s.name()));
    if spec.sim.is_some() {
        header.extend(["sim_load", "sim_ok"]);
    }
    let _ = writeln!(out, "{}", header.join(&d.to_string()));
    for row in rows {
        let mut fields = vec![row.gamma.to_string()];
        fields.extend(row.cells.iter().cloned());
        if let Some(s) = &row.sim {
            fields.push(s.load().map_or_else(|| "mixed".into(), |q| q.to_string()));
            fields.push(format!("{}/{}", s.decoded(), s.trials()));
        }
        let _ = writeln!(out, "{}", fields.join(&d.to_string()));
    }
    out
}

/// Per-γ verification lines and whether every trial matched the LP.
pub fn verify_report(rows: &[Row]) -> (String, bool) {
    let mut out = String::new();
    let mut all_ok = true;
    for row in rows {
        let Some(s) = &row.sim else { continue };
        let sim = s.load().map_or_else(|| "mixed".into(), |q| q.to_string());
        let _ = write!(
            out,
            "gamma={} lp={} sim={sim} decode={}/{} fallback={}",
            row.gamma,
            s.lp,
            s.decoded(),
            s.trials(),
            s.fallbacks()
        );
        for e in &s.errors {
            let _ = write!(out, " error=\"{e}\"");
        }
        let ok = s.ok();
        all_ok &= ok;
        out.push_str(if ok { " ok\n" } else { " MISMATCH\n" });
    }
    (out, all_ok)
}

/// Every simulated grid point decoded in all trials.
pub fn sims_decoded(rows: &[Row]) -> bool {
    rows.iter()
        .filter_map(|r| r.sim.as_ref())
        .all(|s| s.errors.is_empty() && s.decoded() == s.trials())
}
