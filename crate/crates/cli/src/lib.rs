//! Command-line front end for `jetsym`.
//!
//! [`run`] parses arguments, executes one operation and returns the rendered
//! output together with the exit code: 0 on success, 1 when the requested
//! check fails or a domain error occurs, 2 on usage and parse errors.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jetsym::conservation::{
    adjoint_residual, euler_operator, self_adjointness, solve_adjoint_determining, verify_conserved_current,
};
use jetsym::covering::{we_ansatz, Covering, WeReading, WeRepresentation};
use jetsym::symmetry::{
    apply_recursion, classify, formal_integrate, invariant_system, jacobi_bracket, solve_determining,
    symmetry_residual, AnsatzSpec, RecursionOperator, DEFAULT_ANSATZ_LIMIT,
};
use jetsym::{parse, CDiffOp, Error, GeneratingFunction, JetContext, JetExpr, Parallelism, PdeSystem};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "jetsym", version, about = "Exact jet-space calculus for PDE systems")]
struct Cli {
    /// Builtin system (kdv, burgers, heat) or path to a system file.
    #[arg(long, global = true, default_value = "kdv")]
    system: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Maximum number of ansatz monomials.
    #[arg(long, global = true, default_value_t = DEFAULT_ANSATZ_LIMIT)]
    limit: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct AnsatzArgs {
    /// Highest jet order in the ansatz.
    #[arg(long)]
    order: u32,
    /// Highest polynomial degree in the jet coordinates.
    #[arg(long)]
    degree: u32,
    /// Highest degree of explicit independent-variable dependence.
    #[arg(long, default_value_t = 0)]
    xt_degree: u32,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduce an expression to internal coordinates of the system.
    Reduce {
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
    },
    /// Universal linearization of the system (or of `--expr`).
    Linearize {
        #[arg(long, allow_hyphen_values = true)]
        expr: Option<String>,
    },
    /// Formal adjoint of the linearization.
    Adjoint {
        #[arg(long, allow_hyphen_values = true)]
        expr: Option<String>,
    },
    /// Basis of higher symmetries within a polynomial ansatz.
    Symmetries(AnsatzArgs),
    /// Symmetry residual of a generating function.
    CheckSymmetry {
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
    },
    /// Jacobi bracket of two generating functions.
    Bracket {
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        #[arg(long, allow_hyphen_values = true)]
        psi: String,
    },
    /// Point, contact or higher.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
    },
    /// Apply a recursion operator repeatedly (the KdV operator by default).
    Recursion {
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true, default_value = "u_x")]
        phi: String,
        #[arg(long, default_value_t = 1)]
        steps: u32,
    },
    /// Inverse total derivative of a differential polynomial.
    Integrate {
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        /// Independent variable to integrate along.
        #[arg(long)]
        var: Option<String>,
    },
    /// Joint system of the equation and symmetry constraints.
    InvariantSystem {
        #[arg(long, required = true, allow_hyphen_values = true)]
        phi: Vec<String>,
    },
    /// Basis of conservation-law generating functions within a polynomial ansatz.
    Conservation(AnsatzArgs),
    /// Adjoint residual of a candidate generating function.
    CheckConservation {
        #[arg(long, allow_hyphen_values = true)]
        upsilon: String,
    },
    /// Euler operator of a Lagrangian density.
    Euler {
        #[arg(long, allow_hyphen_values = true)]
        lagrangian: String,
    },
    /// Compare the adjoint linearization with lambda times the linearization.
    SelfAdjoint {
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
    },
    /// Total divergence of a current `J1; ...; Jn`.
    CheckCurrent {
        #[arg(long, allow_hyphen_values = true)]
        components: String,
    },
    /// Coverings.
    #[command(subcommand)]
    Covering(CoveringCommand),
}

#[derive(Subcommand, Debug)]
enum CoveringCommand {
    /// Flatness residuals of a covering file.
    Check {
        #[arg(long)]
        file: PathBuf,
    },
    /// Assemble the KdV Wahlquist-Estabrook covering from a representation.
    We {
        #[arg(long)]
        rep: PathBuf,
    },
    /// Nonlocal symmetry residuals of `(phi, psi)`.
    Nonlocal {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        #[arg(long, allow_hyphen_values = true)]
        psi: String,
    },
}

/// Rendered result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Lib(Error),
    Domain(&'static str, String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Res<T> = std::result::Result<T, Failure>;

/// Text lines and the equivalent JSON document, plus whether a requested check failed.
struct Report {
    lines: Vec<String>,
    json: Value,
    failed: bool,
}

impl Report {
    fn new(lines: Vec<String>, json: Value) -> Self {
        Report {
            lines,
            json,
            failed: false,
        }
    }

    fn failed_if(mut self, failed: bool) -> Self {
        self.failed = failed;
        self
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let stdout = match cli.format {
                Format::Text => report.lines.iter().map(|l| format!("{l}\n")).collect(),
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&report.json).expect("json")),
            };
            Outcome {
                code: i32::from(report.failed),
                stdout,
                stderr: String::new(),
            }
        }
        Err(f) => {
            let (code, tag, msg) = match &f {
                Failure::Lib(e) => (if e.is_usage() { 2 } else { 1 }, e.code(), e.to_string()),
                Failure::Domain(tag, msg) => (1, *tag, msg.clone()),
                Failure::Io(msg) => (2, "io", msg.clone()),
            };
            let stderr = match cli.format {
                Format::Text => format!("error[{tag}]: {msg}\n"),
                Format::Json => format!("{}\n", json!({ "error": { "code": tag, "message": msg } })),
            };
            Outcome {
                code,
                stdout: String::new(),
                stderr,
            }
        }
    }
}

/// Attach the rendered integrand to a failed integration.
fn exact<T>(r: jetsym::Result<T>, ctx: &JetContext) -> Res<T> {
    r.map_err(|e| match &e {
        Error::NotExact { integrand } => Failure::Domain("not-exact", format!("{e}: {}", integrand.to_text(ctx))),
        _ => Failure::Lib(e),
    })
}

fn read(path: &PathBuf) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_system(spec: &str) -> Res<PdeSystem> {
    match PdeSystem::builtin(spec) {
        Some(sys) => Ok(sys),
        None => Ok(PdeSystem::from_text(&read(&PathBuf::from(spec))?)?),
    }
}

fn texts(es: &[JetExpr], ctx: &JetContext) -> Vec<String> {
    es.iter().map(|e| e.to_text(ctx)).collect()
}

fn joined(es: &[JetExpr], ctx: &JetContext) -> String {
    texts(es, ctx).join("; ")
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn all_zero(es: &[JetExpr]) -> bool {
    es.iter().all(JetExpr::is_zero)
}

fn operator_report(label: &str, op: &CDiffOp, ctx: &JetContext) -> Report {
    let text = op.to_text(ctx);
    let json = op.to_json(ctx);
    let mut lines = vec![format!("{label}:")];
    lines.extend(text.lines().map(str::to_string));
    lines.push(format!("json: {json}"));
    Report::new(lines, json!({ label: json, "text": text.lines().collect::<Vec<_>>() }))
}

fn forms_or_expr(sys: &PdeSystem, expr: &Option<String>) -> Res<Vec<JetExpr>> {
    Ok(match expr {
        Some(e) => vec![parse(e, sys.ctx())?],
        None => sys.forms(),
    })
}

fn basis_report(label: &str, basis: &[GeneratingFunction], ctx: &JetContext) -> Report {
    let mut lines = vec![format!("dimension: {}", basis.len())];
    lines.extend(
        basis
            .iter()
            .enumerate()
            .map(|(k, g)| format!("{label}[{}]: {}", k + 1, g.to_text(ctx))),
    );
    let json = json!({
        "dimension": basis.len(),
        "basis": basis.iter().map(|g| texts(g.components(), ctx)).collect::<Vec<_>>(),
    });
    Report::new(lines, json)
}

fn execute(cli: &Cli) -> Res<Report> {
    let par = Parallelism::default();
    let spec = |a: &AnsatzArgs| AnsatzSpec::new(a.order, a.degree, a.xt_degree).with_limit(cli.limit);
    if let Command::Covering(cmd) = &cli.command {
        return covering(cmd);
    }
    let sys = load_system(&cli.system)?;
    let ctx = sys.ctx();
    let gf = |s: &str| GeneratingFunction::parse(s, ctx);
    Ok(match &cli.command {
        Command::Reduce { expr } => {
            let r = sys.reduce(&parse(expr, ctx)?)?.to_text(ctx);
            Report::new(vec![format!("reduced: {r}")], json!({ "reduced": r }))
        }
        Command::Linearize { expr } => operator_report(
            "linearization",
            &CDiffOp::linearize(&forms_or_expr(&sys, expr)?, ctx)?,
            ctx,
        ),
        Command::Adjoint { expr } => operator_report(
            "adjoint",
            &CDiffOp::linearize(&forms_or_expr(&sys, expr)?, ctx)?.adjoint()?,
            ctx,
        ),
        Command::Symmetries(a) => basis_report("phi", &solve_determining(&sys, &spec(a), par)?, ctx),
        Command::Conservation(a) => basis_report("upsilon", &solve_adjoint_determining(&sys, &spec(a), par)?, ctx),
        Command::CheckSymmetry { phi } => {
            let r = symmetry_residual(&sys, &gf(phi)?)?;
            Report::new(
                vec![format!("residual: {}", joined(&r, ctx))],
                json!({ "residual": texts(&r, ctx), "symmetry": all_zero(&r) }),
            )
            .failed_if(!all_zero(&r))
        }
        Command::CheckConservation { upsilon } => {
            let parts = upsilon
                .split(';')
                .map(|c| parse(c, ctx))
                .collect::<jetsym::Result<Vec<_>>>()?;
            let r = adjoint_residual(&sys, &GeneratingFunction::new(parts))?;
            Report::new(
                vec![format!("residual: {}", joined(&r, ctx))],
                json!({ "residual": texts(&r, ctx), "conservation": all_zero(&r) }),
            )
            .failed_if(!all_zero(&r))
        }
        Command::Bracket { phi, psi } => {
            let b = jacobi_bracket(&gf(phi)?, &gf(psi)?)?;
            Report::new(
                vec![format!("bracket: {}", b.to_text(ctx))],
                json!({ "bracket": texts(b.components(), ctx) }),
            )
        }
        Command::Classify { phi } => {
            let c = classify(&gf(phi)?, ctx).to_string();
            Report::new(vec![format!("class: {c}")], json!({ "class": c }))
        }
        Command::Recursion { file, phi, steps } => {
            let r = match file {
                Some(f) => RecursionOperator::parse(&read(f)?, ctx)?,
                None => RecursionOperator::kdv(ctx)?,
            };
            let mut current = gf(phi)?;
            let mut lines = Vec::new();
            let mut seq = Vec::new();
            for k in 1..=*steps {
                current = exact(apply_recursion(&r, &current, &sys), ctx)?;
                lines.push(format!("step {k}: {}", current.to_text(ctx)));
                seq.push(texts(current.components(), ctx));
            }
            Report::new(lines, json!({ "steps": seq }))
        }
        Command::Integrate { expr, var } => {
            let i = match var {
                Some(v) => ctx.independent_index(v).ok_or_else(|| Error::Undeclared {
                    name: v.clone(),
                    pos: 1,
                })?,
                None => 0,
            };
            let p = exact(formal_integrate(&parse(expr, ctx)?, i), ctx)?.to_text(ctx);
            Report::new(vec![format!("integral: {p}")], json!({ "integral": p }))
        }
        Command::InvariantSystem { phi } => {
            let phis = phi.iter().map(|p| gf(p)).collect::<jetsym::Result<Vec<_>>>()?;
            let inv = invariant_system(&sys, &phis)?;
            let json = json!({
                "equations": sys.equation_texts(),
                "constraints": phis.iter().map(|g| texts(g.components(), ctx)).collect::<Vec<_>>(),
                "residuals": inv.residuals.iter().map(|r| texts(r, ctx)).collect::<Vec<_>>(),
                "symmetry": (0..phis.len()).map(|k| inv.is_symmetry(k)).collect::<Vec<_>>(),
            });
            Report::new(inv.to_text().lines().map(str::to_string).collect(), json)
        }
        Command::Euler { lagrangian } => {
            let e = euler_operator(&parse(lagrangian, ctx)?, ctx)?;
            Report::new(
                vec![format!("euler: {}", e.to_text(ctx))],
                json!({ "euler": texts(e.components(), ctx) }),
            )
        }
        Command::SelfAdjoint { lambda } => {
            let lambda = lambda.as_deref().map(|l| parse(l, ctx)).transpose()?;
            let r = self_adjointness(&sys, lambda.as_ref())?;
            let mut lines = vec!["difference:".to_string()];
            lines.extend(r.difference.to_text(ctx).lines().map(str::to_string));
            lines.push(format!("self-adjoint: {}", yes(r.free)));
            lines.push(format!("self-adjoint on solutions: {}", yes(r.restricted)));
            let json = json!({
                "difference": r.difference.to_json(ctx),
                "self_adjoint": r.free,
                "self_adjoint_on_solutions": r.restricted,
            });
            Report::new(lines, json).failed_if(!r.free && !r.restricted)
        }
        Command::CheckCurrent { components } => {
            let parts = components
                .split(';')
                .map(|c| parse(c, ctx))
                .collect::<jetsym::Result<Vec<_>>>()?;
            let d = verify_conserved_current(&sys, &parts)?;
            let t = d.to_text(ctx);
            Report::new(
                vec![format!("divergence: {t}")],
                json!({ "divergence": t, "conserved": d.is_zero() }),
            )
            .failed_if(!d.is_zero())
        }
        Command::Covering(_) => unreachable!("handled above"),
    })
}

fn flatness_lines(cov: &Covering, tag: &str) -> Res<(Vec<String>, Value, bool)> {
    let ctx = cov.ctx();
    let res = cov.check_flatness()?;
    let flat = res.iter().all(|r| r.residual.is_zero());
    let mut lines = Vec::new();
    let mut items = Vec::new();
    for r in &res {
        let (xi, xj, w) = (&ctx.independent()[r.i], &ctx.independent()[r.j], &ctx.fibers()[r.fiber]);
        let t = r.residual.to_text(ctx);
        lines.push(format!("residual{tag}[{xi},{xj},{w}]: {t}"));
        items.push(json!({ "i": xi, "j": xj, "fiber": w, "residual": t }));
    }
    lines.push(format!("flat{tag}: {}", yes(flat)));
    Ok((lines, json!({ "residuals": items, "flat": flat }), flat))
}

fn field_json(cov: &Covering) -> Value {
    let ctx = cov.ctx();
    let mut out = serde_json::Map::new();
    for (i, x) in ctx.independent().iter().enumerate() {
        let v: serde_json::Map<String, Value> = cov
            .field(i)
            .coefficients()
            .iter()
            .map(|(a, f)| (ctx.fibers()[*a].clone(), Value::String(f.to_text(ctx))))
            .collect();
        out.insert(x.clone(), Value::Object(v));
    }
    Value::Object(out)
}

fn covering(cmd: &CoveringCommand) -> Res<Report> {
    Ok(match cmd {
        CoveringCommand::Check { file } => {
            let cov = Covering::from_text(&read(file)?)?;
            let (lines, json, flat) = flatness_lines(&cov, "")?;
            Report::new(lines, json).failed_if(!flat)
        }
        CoveringCommand::We { rep } => {
            let rep = WeRepresentation::from_text(&read(rep)?)?;
            let ctx = rep.ctx()?;
            let mut lines = Vec::new();
            let mut rels = serde_json::Map::new();
            for (label, v) in rep.relations() {
                lines.push(format!("relation {label}: {}", v.to_text(&ctx)));
                rels.insert(label.to_string(), Value::String(v.to_text(&ctx)));
            }
            let hold = rep.relations().iter().all(|(_, v)| v.is_zero());
            lines.push(format!("relations hold: {}", yes(hold)));
            let mut readings = serde_json::Map::new();
            for reading in [WeReading::Corrected, WeReading::Literal] {
                let asm = we_ansatz(&rep, reading)?;
                let tag = format!("[{}]", reading.name());
                for (i, x) in ctx.independent().iter().enumerate() {
                    lines.push(format!("V_{x}{tag}: {}", asm.covering.field(i).to_text(&ctx)));
                }
                let (l, mut json, _) = flatness_lines(&asm.covering, &tag)?;
                lines.extend(l);
                json["fields"] = field_json(&asm.covering);
                readings.insert(reading.name().to_string(), json);
            }
            Report::new(
                lines,
                json!({ "relations": rels, "relations_hold": hold, "readings": readings }),
            )
        }
        CoveringCommand::Nonlocal { file, phi, psi } => {
            let cov = Covering::from_text(&read(file)?)?;
            let ctx = cov.ctx();
            let phi = GeneratingFunction::parse(phi, ctx)?;
            let psi = psi
                .split(';')
                .map(|p| parse(p, ctx))
                .collect::<jetsym::Result<Vec<_>>>()?;
            let r = cov.nonlocal_symmetry_residual(&phi, &psi)?;
            let mut lines: Vec<String> = r
                .determining
                .iter()
                .enumerate()
                .map(|(s, e)| format!("determining[{}]: {}", s + 1, e.to_text(ctx)))
                .collect();
            let mut fibers = Vec::new();
            for f in &r.fibers {
                let (x, w) = (&ctx.independent()[f.i], &ctx.fibers()[f.fiber]);
                let t = f.residual.to_text(ctx);
                lines.push(format!("fiber[{x},{w}]: {t}"));
                fibers.push(json!({ "i": x, "fiber": w, "residual": t }));
            }
            lines.push(format!("nonlocal symmetry: {}", yes(r.is_symmetry())));
            let json = json!({
                "determining": texts(&r.determining, ctx),
                "fibers": fibers,
                "symmetry": r.is_symmetry(),
            });
            Report::new(lines, json).failed_if(!r.is_symmetry())
        }
    })
}
