//! Experiment grids: a JSON description of axes expanded into cells, each run
//! independently and written as one CSV row in grid order.

use std::time::Instant;

use fqrig::exact::parse_rational;
use fqrig::generators::{generate, GeneratorKind, GeneratorSpec};
use fqrig::pipeline::{extract_certificate, CaseTag, ExtractOptions};
use rayon::prelude::*;
use serde::Deserialize;

pub const DEFAULT_CELL_CAP: usize = 10_000;
pub const WORKERS_ENV: &str = "FQRIG_WORKERS";

pub const HEADER: [&str; 18] = [
    "q",
    "d",
    "kind",
    "np",
    "ns",
    "noise",
    "seed",
    "c_const",
    "b0_option",
    "K",
    "case",
    "p_prime",
    "p_prime_ratio",
    "deg_F",
    "D",
    "B0",
    "recovered",
    "runtime_ms",
];

/// A point count: fixed, or `"q^k"` evaluated per cell.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Count {
    Fixed(usize),
    Expr(String),
}

impl Count {
    fn eval(&self, q: u64) -> Result<usize, String> {
        match self {
            Count::Fixed(n) => Ok(*n),
            Count::Expr(s) => {
                let k = s
                    .strip_prefix("q^")
                    .and_then(|k| k.parse::<u32>().ok())
                    .ok_or_else(|| format!("sizes: '{s}' is neither an integer nor of the form q^k"))?;
                Ok(q.pow(k) as usize)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SizeAxis {
    pub np: Count,
    pub ns: Count,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub q: Vec<u64>,
    #[serde(default = "default_d")]
    pub d: Vec<usize>,
    pub kinds: Vec<GeneratorKind>,
    pub sizes: Vec<SizeAxis>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_noise")]
    pub noise: Vec<f64>,
    #[serde(default = "default_b0")]
    pub b0: Vec<Option<u64>>,
    #[serde(default = "default_c")]
    pub c_const: Vec<String>,
    #[serde(default)]
    pub cap: Option<usize>,
}

fn default_d() -> Vec<usize> {
    vec![3]
}
fn default_noise() -> Vec<f64> {
    vec![0.0]
}
fn default_b0() -> Vec<Option<u64>> {
    vec![None]
}
fn default_c() -> Vec<String> {
    vec!["1/4".to_string()]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub spec: GeneratorSpec,
    pub b0: Option<u64>,
    pub c_const: String,
}

impl Grid {
    pub fn parse(s: &str) -> Result<Self, String> {
        serde_json::from_str(s).map_err(|e| format!("grid: {e}"))
    }

    /// Cells in the fixed order q, d, kind, size, noise, seed, B0, c.
    pub fn cells(&self) -> Result<Vec<Cell>, String> {
        let cap = self.cap.unwrap_or(DEFAULT_CELL_CAP);
        let count = [
            self.q.len(),
            self.d.len(),
            self.kinds.len(),
            self.sizes.len(),
            self.noise.len(),
            self.seeds.len(),
            self.b0.len(),
            self.c_const.len(),
        ]
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .unwrap_or(usize::MAX);
        if count == 0 {
            return Err("grid: every axis needs at least one value".into());
        }
        if count > cap {
            return Err(format!("grid: {count} cells exceed the cap of {cap}"));
        }
        for c in &self.c_const {
            parse_rational(c).map_err(|e| format!("c_const: {e}"))?;
        }
        let mut out = Vec::with_capacity(count);
        for &q in &self.q {
            for &d in &self.d {
                for &kind in &self.kinds {
                    for size in &self.sizes {
                        let np = size.np.eval(q)?;
                        let ns = size.ns.eval(q)?;
                        for &noise in &self.noise {
                            for &seed in &self.seeds {
                                for &b0 in &self.b0 {
                                    for c in &self.c_const {
                                        out.push(Cell {
                                            spec: GeneratorSpec {
                                                kind,
                                                q,
                                                d,
                                                np,
                                                ns,
                                                seed,
                                                noise,
                                            },
                                            b0,
                                            c_const: c.clone(),
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cell: Cell,
    pub k: f64,
    pub case: CaseTag,
    pub p_prime: usize,
    pub p_prime_ratio: f64,
    pub deg_f: Option<u32>,
    pub degree: Option<u32>,
    pub b0_used: u64,
    /// Whether the certificate hyperplane is the planted one; `None` without a plant.
    pub recovered: Option<bool>,
    pub runtime_ms: u128,
}

fn case_name(c: CaseTag) -> &'static str {
    match c {
        CaseTag::FlatConcentration => "flat-concentration",
        CaseTag::DirectionalCoordination => "directional-coordination",
        CaseTag::NoSignal => "no-signal",
    }
}

impl Row {
    pub fn record(&self) -> Vec<String> {
        let s = &self.cell.spec;
        let opt = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            s.q.to_string(),
            s.d.to_string(),
            s.kind.name().to_string(),
            s.np.to_string(),
            s.ns.to_string(),
            s.noise.to_string(),
            s.seed.to_string(),
            self.cell.c_const.clone(),
            self.cell.b0.map(|b| b.to_string()).unwrap_or_else(|| "auto".into()),
            format!("{:.6}", self.k),
            case_name(self.case).to_string(),
            self.p_prime.to_string(),
            format!("{:.6}", self.p_prime_ratio),
            opt(self.deg_f),
            opt(self.degree),
            self.b0_used.to_string(),
            self.recovered.map(|r| r.to_string()).unwrap_or_default(),
            self.runtime_ms.to_string(),
        ]
    }
}

pub fn run_cell(cell: &Cell) -> Result<Row, String> {
    let start = Instant::now();
    let g = generate(&cell.spec).map_err(|e| format!("cell {:?}: {e}", cell.spec))?;
    let opts = ExtractOptions {
        c_const: parse_rational(&cell.c_const).map_err(|e| format!("c_const: {e}"))?,
        b0: cell.b0,
        ..ExtractOptions::default()
    };
    let cert = extract_certificate(&g.config, &opts).certificate;
    let runtime_ms = start.elapsed().as_millis();
    let recovered = g.planted_hyperplane.as_ref().map(|h| {
        cert.hyperplane.as_ref().is_some_and(|r| {
            r.offset == h.offset().value() && r.normal.iter().zip(h.normal()).all(|(a, b)| *a == b.value())
        })
    });
    let np = g.config.points().len();
    Ok(Row {
        cell: cell.clone(),
        k: cert.params.k,
        case: cert.case,
        p_prime: cert.points.len(),
        p_prime_ratio: if np == 0 { 0.0 } else { cert.points.len() as f64 / np as f64 },
        deg_f: (cert.case != CaseTag::NoSignal).then(|| cert.f_degree()),
        degree: cert.aux.degree,
        b0_used: cert.params.b0,
        recovered,
        runtime_ms,
    })
}

fn workers() -> Result<usize, String> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("{WORKERS_ENV}: '{v}' is not a positive integer")),
        Err(_) => Ok(0),
    }
}

/// Runs every cell and returns rows in grid order.
pub fn run_grid(grid: &Grid) -> Result<Vec<Row>, String> {
    let cells = grid.cells()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers()?)
        .build()
        .map_err(|e| e.to_string())?;
    pool.install(|| cells.par_iter().map(run_cell).collect())
}

pub fn to_csv(rows: &[Row]) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).map_err(|e| e.to_string())?;
    for r in rows {
        w.write_record(r.record()).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}
