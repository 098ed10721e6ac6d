use std::fmt;
use std::path::Path;
use std::sync::Arc;

use flatcheck_core::expr::VarNamer;
use flatcheck_core::flatness::{analyze, verify_flat_output, AnalysisOptions, FlatnessError, Verdict, Workspace};
use flatcheck_core::jetgeom::{GeomError, MultiIndex, VectorField};
use flatcheck_core::prolong::ProlongedSystem;
use flatcheck_core::sysdsl::{parse_system, ParseError, SystemDef};
use serde_json::json;

use crate::args::{Cli, Command, GlobalOpts};

/// Errors that map to the usage exit status.
#[derive(Debug)]
pub enum CliError {
    Io(String, std::io::Error),
    Parse(String, ParseError),
    Usage(String),
    Geom(GeomError),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(p, e) => write!(f, "{p}: {e}"),
            CliError::Parse(p, e) => write!(f, "{p}: {e}"),
            CliError::Usage(m) => f.write_str(m),
            CliError::Geom(e) => write!(f, "{e}"),
        }
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        CliError::Geom(e)
    }
}

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Analyze { file } => cmd_analyze(&load(file)?, &cli.opts),
        Command::Verify { file, prolong } => cmd_verify(&load(file)?, prolong.as_deref(), &cli.opts),
        Command::Bracket {
            file,
            a,
            b,
            pow,
            prolong,
        } => cmd_bracket(&load(file)?, a, b, *pow, prolong.as_deref(), &cli.opts),
        Command::Lint { file } => cmd_lint(&load(file)?, &cli.opts),
    }
}

fn load(path: &Path) -> Result<SystemDef, CliError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(name.clone(), e))?;
    parse_system(&text).map_err(|e| CliError::Parse(name, e))
}

fn options(opts: &GlobalOpts) -> AnalysisOptions {
    AnalysisOptions {
        seed: opts.seed,
        samples: opts.samples as usize,
        max_k: opts.max_k.map(|k| k as usize),
        max_prolong: opts.max_prolong,
        ansatz_degree: opts.ansatz_degree,
        ..AnalysisOptions::default()
    }
}

fn workspace(sys: &SystemDef, opts: &GlobalOpts) -> Workspace {
    let o = options(opts);
    Workspace::new(Arc::new(sys.clone()), o.context(sys))
}

fn prolongation(sys: &SystemDef, j: &[u32]) -> Result<MultiIndex, CliError> {
    if j.len() != sys.m() {
        return Err(CliError::Usage(format!(
            "--prolong needs {} orders, got {}",
            sys.m(),
            j.len()
        )));
    }
    Ok(MultiIndex(j.to_vec()))
}

fn cmd_analyze(sys: &SystemDef, opts: &GlobalOpts) -> Result<u8, CliError> {
    let report = analyze(sys, &options(opts));
    if opts.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_text(opts.trace));
    }
    Ok(match report.verdict {
        Verdict::P2Flat => 0,
        Verdict::NotP2Flat => 1,
        Verdict::Inconclusive => 2,
    })
}

fn cmd_verify(sys: &SystemDef, prolong: Option<&[u32]>, opts: &GlobalOpts) -> Result<u8, CliError> {
    let Some(candidates) = sys.declared_flat_outputs.clone() else {
        return Err(CliError::Usage("the file has no `flatoutput` line".into()));
    };
    let j = match prolong {
        Some(j) => prolongation(sys, j)?,
        None => {
            let report = analyze(sys, &options(opts));
            match report.j_min {
                Some(j) => j,
                None => {
                    emit_verify(sys, opts, None, false, Some(&format!("no prolongation found ({})", report.verdict.as_str())), None);
                    return Ok(1);
                }
            }
        }
    };
    let ws = workspace(sys, opts);
    let ps = ws.get(&j);
    match verify_flat_output(&ps, &candidates) {
        Ok(check) => {
            emit_verify(sys, opts, Some(&j), check.valid, check.failure.as_deref(), check.jacobian_rank);
            Ok(if check.valid { 0 } else { 1 })
        }
        Err(FlatnessError::NotLinearizable) => {
            emit_verify(sys, opts, Some(&j), false, Some("not linearizable at this prolongation"), None);
            Ok(1)
        }
        Err(FlatnessError::CandidateCount { expected, found }) => Err(CliError::Usage(format!(
            "`flatoutput` lists {found} candidates, the system has {expected} inputs"
        ))),
        Err(FlatnessError::Geom(e)) => Err(e.into()),
    }
}

fn emit_verify(
    sys: &SystemDef,
    opts: &GlobalOpts,
    j: Option<&MultiIndex>,
    valid: bool,
    failure: Option<&str>,
    rank: Option<usize>,
) {
    if opts.json {
        let v = json!({
            "system": sys.name,
            "prolong": j,
            "valid": valid,
            "jacobian_rank": rank,
            "failure": failure,
        });
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        let at = j.map(|j| format!(" at j = {j}")).unwrap_or_default();
        if valid {
            println!("flat output verified{at}");
        } else {
            println!("not a flat output{at}: {}", failure.unwrap_or("unknown reason"));
        }
    }
}

fn field(ps: &ProlongedSystem, sys: &SystemDef, text: &str) -> Result<VectorField, CliError> {
    if let Some(i) = text.strip_prefix('g') {
        if let Ok(i) = i.parse::<usize>() {
            return match i {
                0 => Ok(ps.g0().clone()),
                i if i <= ps.m() => Ok(ps.gi(i - 1).clone()),
                _ => Err(CliError::Usage(format!("no input channel {i}"))),
            };
        }
    }
    if let Some(name) = text.strip_prefix("d/d") {
        let v = sys
            .parse_expr(name)
            .ok()
            .and_then(|e| e.as_var())
            .filter(|v| ps.space().contains(*v))
            .ok_or_else(|| CliError::Usage(format!("`{name}` is not a coordinate of the prolonged space")))?;
        return Ok(VectorField::coordinate(ps.space().clone(), v));
    }
    Err(CliError::Usage(format!(
        "unknown field `{text}` (use g0, g1, …, or d/d<coordinate>)"
    )))
}

fn cmd_bracket(
    sys: &SystemDef,
    a: &str,
    b: &str,
    pow: u32,
    prolong: Option<&[u32]>,
    opts: &GlobalOpts,
) -> Result<u8, CliError> {
    let j = match prolong {
        Some(j) => prolongation(sys, j)?,
        None => MultiIndex::zeros(sys.m()),
    };
    let ws = workspace(sys, opts);
    let ps = ws.get(&j);
    let fa = field(&ps, sys, a)?;
    let fb = field(&ps, sys, b)?;
    let out = fa.ad_pow(&fb, pow)?;
    if opts.json {
        let coeffs: serde_json::Map<String, serde_json::Value> = out
            .coeffs()
            .iter()
            .map(|(v, e)| (VarNamer::name(sys, *v), json!(e.render(sys))))
            .collect();
        let v = json!({ "field": out.render(sys), "coefficients": coeffs });
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        println!("{}", out.render(sys));
    }
    Ok(0)
}

fn cmd_lint(sys: &SystemDef, opts: &GlobalOpts) -> Result<u8, CliError> {
    if opts.json {
        let v = json!({
            "system": sys.name,
            "states": sys.n(),
            "inputs": sys.m(),
            "flat_outputs": sys.declared_flat_outputs.as_ref().map(|ys| ys.len()),
        });
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        println!("{}: ok ({} states, {} inputs)", sys.name, sys.n(), sys.m());
    }
    Ok(0)
}
