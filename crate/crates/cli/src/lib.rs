//! Subcommand implementations for the `fqrig` binary.
//!
//! Exit codes: 0 success, 1 a certificate failed verification, 2 bad input.

pub mod experiment;

use std::fs;
use std::path::Path;

use fqrig::exact::parse_rational;
use fqrig::generators::{generate, GeneratorKind, GeneratorSpec};
use fqrig::io::{analyze, ConfigFile};
use fqrig::pipeline::{extract_certificate, Certificate, ExtractOptions};
use fqrig::verify::verify_certificate;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Exit 1.
    Verification(String),
    /// Exit 2.
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Verification(m) | CliError::Usage(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn load_config(path: &Path) -> Result<fqrig::incidence::Config, CliError> {
    ConfigFile::from_json(&read(path)?)
        .and_then(|f| f.to_config())
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Flag values for `gen`; any set flag overrides the spec file.
#[derive(Debug, Clone, Default)]
pub struct GenArgs {
    pub spec: Option<String>,
    pub kind: Option<String>,
    pub q: Option<u64>,
    pub d: Option<usize>,
    pub np: Option<usize>,
    pub ns: Option<usize>,
    pub seed: Option<u64>,
    pub noise: Option<f64>,
}

pub fn resolve_spec(args: &GenArgs) -> Result<GeneratorSpec, CliError> {
    let base: Option<GeneratorSpec> = match &args.spec {
        Some(s) => Some(serde_json::from_str(s).map_err(|e| usage(format!("spec: {e}")))?),
        None => None,
    };
    let need = |field: &str| usage(format!("{field}: required (flag or spec file)"));
    let kind = match &args.kind {
        Some(k) => GeneratorKind::parse(k).map_err(usage)?,
        None => base.as_ref().map(|b| b.kind).ok_or_else(|| need("kind"))?,
    };
    Ok(GeneratorSpec {
        kind,
        q: args.q.or(base.as_ref().map(|b| b.q)).ok_or_else(|| need("q"))?,
        d: args.d.or(base.as_ref().map(|b| b.d)).unwrap_or(3),
        np: args.np.or(base.as_ref().map(|b| b.np)).ok_or_else(|| need("np"))?,
        ns: args.ns.or(base.as_ref().map(|b| b.ns)).ok_or_else(|| need("ns"))?,
        seed: args.seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(0),
        noise: args.noise.or(base.as_ref().map(|b| b.noise)).unwrap_or(0.0),
    })
}

pub fn cmd_gen(args: &GenArgs) -> Result<String, CliError> {
    let spec = resolve_spec(args)?;
    let g = generate(&spec).map_err(usage)?;
    Ok(ConfigFile::from_generated(&spec, &g).to_json())
}

pub fn cmd_analyze(config: &Path) -> Result<String, CliError> {
    let c = load_config(config)?;
    Ok(serde_json::to_string_pretty(&analyze(&c)).expect("stats serialize"))
}

#[derive(Debug, Clone, Default)]
pub struct ExtractArgs {
    pub c_const: Option<String>,
    pub b0: Option<u64>,
    pub lambda: Option<u64>,
    pub no_floor: bool,
}

pub fn extract_options(args: &ExtractArgs) -> Result<ExtractOptions, CliError> {
    let mut opts = ExtractOptions::default();
    if let Some(c) = &args.c_const {
        opts.c_const = parse_rational(c).map_err(|e| usage(format!("c-const: {e}")))?;
    }
    opts.b0 = args.b0;
    opts.lambda_override = args.lambda;
    opts.richness_floor = !args.no_floor;
    Ok(opts)
}

pub fn cmd_extract(config: &Path, args: &ExtractArgs) -> Result<String, CliError> {
    let c = load_config(config)?;
    let opts = extract_options(args)?;
    Ok(extract_certificate(&c, &opts).certificate.to_json())
}

pub fn cmd_verify(config: &Path, cert: &Path) -> Result<String, CliError> {
    let c = load_config(config)?;
    let cert = Certificate::from_json(&read(cert)?).map_err(|e| usage(format!("{}: {e}", cert.display())))?;
    let report = verify_certificate(&c, &cert);
    if report.ok() {
        Ok(format!("OK: {} checks passed", report.checks.len()))
    } else {
        let lines: Vec<String> = report
            .failures()
            .map(|f| format!("FAIL {}: {}", f.name, f.detail))
            .collect();
        Err(CliError::Verification(lines.join("\n")))
    }
}

pub fn cmd_experiment(grid: &Path) -> Result<String, CliError> {
    let g = experiment::Grid::parse(&read(grid)?).map_err(usage)?;
    let rows = experiment::run_grid(&g).map_err(usage)?;
    experiment::to_csv(&rows).map_err(usage)
}
