use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use convdeform::coalgebra::Coalgebra;
use convdeform::cohomology::{Cochain, Complex};
use convdeform::convolution::{takeuchi_invert, ConvMorphism, Filtration};
use convdeform::deformation::{
    classify, is_unit, mc_solve, series_deform, unit_gauge, AlgebraMC, Classes, DeformationReport, SeriesStrategy,
};
use convdeform::extension::{build_extension, graded_extension, Extension};
use convdeform::format::{
    cochain_json, cohomology_json, components_json, deformation_report_json, parse_cochain_file, parse_filtration_file,
    read_spec, report, vector_json, AlgebraEntry, ExtensionRef, SpecFile, Task,
};
use convdeform::Error;

#[derive(Parser)]
#[command(
    name = "convdeform",
    version,
    about = "Deformations of algebras over cocommutative coalgebra extensions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Spec file.
    spec: PathBuf,
    /// Write the machine-readable report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a spec.
    Validate(Common),
    /// Cohomology of the deformation complex of an algebra with coefficients in a comodule.
    Cohomology {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Obstruction cocycle of an algebra over an extension and its class.
    Obstruct(Common),
    /// Solve the Maurer–Cartan equation; exits with 2 when obstructed.
    Deform(Common),
    /// Deformations up to equivalence.
    Classify(Common),
    /// Deform degree by degree along a graded coalgebra.
    Series {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_degree: Option<usize>,
        /// `first`, `all`, or `file:<cochain-path>`.
        #[arg(long, default_value = "first")]
        strategy: String,
        /// Partial deformations visited by `--strategy all`.
        #[arg(long, default_value_t = 64)]
        budget: usize,
    },
    /// Normalize the unit of a deformation over a graded coalgebra.
    UnitGauge(Common),
    /// Convolution inverse of a morphism.
    Invert {
        #[command(flatten)]
        common: Common,
        /// `grading` or `file:<path>`.
        #[arg(long, default_value = "grading")]
        filtration: String,
    },
}

struct Outcome {
    lines: Vec<String>,
    report: Value,
    code: u8,
}

impl Outcome {
    fn ok(lines: Vec<String>, report: Value) -> Outcome {
        Outcome { lines, report, code: 0 }
    }
}

struct InputError(String);

impl From<Error> for InputError {
    fn from(e: Error) -> InputError {
        InputError(e.to_string())
    }
}

type Run<T> = std::result::Result<T, InputError>;

struct Ctx {
    spec: SpecFile,
    task: Task,
}

fn pick<'a, T>(
    map: &'a std::collections::BTreeMap<String, T>,
    name: &Option<String>,
    what: &str,
) -> Run<(&'a str, &'a T)> {
    match name {
        Some(n) => map
            .get_key_value(n)
            .map(|(k, v)| (k.as_str(), v))
            .ok_or_else(|| InputError(format!("unknown {what} {n:?}"))),
        None if map.len() == 1 => Ok(map.iter().next().map(|(k, v)| (k.as_str(), v)).unwrap()),
        None => Err(InputError(format!("the task block must name the {what}"))),
    }
}

/// Moves `m` onto `target`, which must be a subcoalgebra of its coalgebra with
/// matching basis names.
fn rekey(m: &ConvMorphism, target: &Arc<Coalgebra>) -> Run<ConvMorphism> {
    let source = m.coalgebra();
    if source == target {
        return Ok(m.clone());
    }
    let idx = target
        .names()
        .iter()
        .map(|n| {
            source
                .index_of(n)
                .ok_or_else(|| InputError(format!("basis element {n:?} is missing from the algebra's coalgebra")))
        })
        .collect::<Run<Vec<_>>>()?;
    let sub = source.restrict(&idx)?;
    if sub.triples() != target.triples() || sub.counit() != target.counit() {
        return Err(InputError(
            "the algebra's coalgebra does not contain the extension base".into(),
        ));
    }
    let comps = idx.iter().map(|&i| m.component(i).clone()).collect();
    Ok(ConvMorphism::new(target.clone(), comps)?)
}

impl Ctx {
    fn algebra(&self) -> Run<(&str, &AlgebraEntry)> {
        pick(&self.spec.algebras, &self.task.algebra, "algebra")
    }

    fn extension(&self) -> Run<Arc<Extension>> {
        let e = match &self.task.extension {
            Some(ExtensionRef::Cocycle(w)) => build_extension(&self.spec.cocycles[w].cocycle)?,
            Some(ExtensionRef::Graded { coalgebra, degree }) => {
                graded_extension(&self.spec.coalgebras[coalgebra], *degree)?
            }
            None => build_extension(&pick(&self.spec.cocycles, &None, "extension")?.1.cocycle)?,
        };
        Ok(Arc::new(e))
    }

    /// The algebra moved onto the base of the extension, without its unit.
    fn base_algebra(&self, e: &Extension) -> Run<AlgebraMC> {
        Ok(AlgebraMC::new(rekey(&self.algebra()?.1.m, e.base())?, None)?)
    }

    fn coalgebra(&self) -> Run<(&str, &Arc<Coalgebra>)> {
        pick(&self.spec.coalgebras, &self.task.coalgebra, "coalgebra")
    }
}

fn obstruction_class(alg: &AlgebraMC, e: &Extension, zeta: &Cochain) -> Run<Value> {
    let cx = Complex::new(alg.m().clone(), e.comodule().clone())?;
    let h3 = cx.cohomology(3)?;
    let coords = h3
        .class_of(zeta)?
        .ok_or_else(|| InputError("obstruction is not a cocycle".into()))?;
    let names = e.comodule().names();
    Ok(json!({
        "dim_H3": h3.dim_h,
        "coordinates": vector_json(&coords),
        "H3_representatives": h3.representatives.iter().map(|c| cochain_json(c, names)).collect::<Vec<_>>(),
    }))
}

fn fmt_coords(v: &Value) -> String {
    let parts: Vec<&str> = v
        .as_array()
        .map(|a| a.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    format!("({})", parts.join(", "))
}

fn validate(ctx: &Ctx) -> Run<Outcome> {
    let s = &ctx.spec;
    let mut lines = vec![format!("field {}", s.field)];
    let mut coalgebras = serde_json::Map::new();
    for (name, c) in &s.coalgebras {
        lines.push(format!("coalgebra {name}: dim {}", c.dim()));
        coalgebras.insert(
            name.clone(),
            json!({"dim": c.dim(), "graded": c.grading().is_some(), "axioms": serde_json::to_value(c.validate()).expect("report serializes")}),
        );
    }
    let mut comodules = serde_json::Map::new();
    for (name, x) in &s.comodules {
        lines.push(format!("comodule {name}: dim {} over {}", x.comodule.dim(), x.base));
        comodules.insert(name.clone(), json!({"dim": x.comodule.dim(), "base": x.base}));
    }
    let mut cocycles = serde_json::Map::new();
    for (name, w) in &s.cocycles {
        let e = build_extension(&w.cocycle)?;
        lines.push(format!("cocycle {name}: extension of dim {}", e.total().dim()));
        cocycles.insert(
            name.clone(),
            json!({"comodule": w.comodule, "zero": w.cocycle.is_zero(), "extension_dim": e.total().dim()}),
        );
    }
    let mut algebras = serde_json::Map::new();
    for (name, a) in &s.algebras {
        let unital = match &a.unit {
            Some(u) => Some(is_unit(&a.m, u)?),
            None => None,
        };
        lines.push(format!(
            "algebra {name}: dim {} over {}, associative",
            a.m.a_dim(),
            a.coalgebra
        ));
        algebras.insert(
            name.clone(),
            json!({"dim": a.m.a_dim(), "coalgebra": a.coalgebra, "unital": unital}),
        );
    }
    let mut morphisms = serde_json::Map::new();
    for (name, m) in &s.morphisms {
        lines.push(format!("morphism {name}: dim {} over {}", m.f.a_dim(), m.coalgebra));
        morphisms.insert(name.clone(), json!({"dim": m.f.a_dim(), "coalgebra": m.coalgebra}));
    }
    lines.push("valid".into());
    Ok(Outcome::ok(
        lines,
        json!({
            "field": s.field.to_string(),
            "coalgebras": coalgebras,
            "comodules": comodules,
            "cocycles": cocycles,
            "algebras": algebras,
            "morphisms": morphisms,
        }),
    ))
}

fn cohomology(ctx: &Ctx, degree: Option<usize>) -> Run<Outcome> {
    let n = degree.or(ctx.task.degree).unwrap_or(2);
    let x = &pick(&ctx.spec.comodules, &ctx.task.comodule, "comodule")?.1.comodule;
    let m = rekey(&ctx.algebra()?.1.m, x.base())?;
    let r = Complex::new(m, x.clone())?.cohomology(n)?;
    let lines = vec![
        format!("dim Z^{n} = {}", r.dim_z),
        format!("dim B^{n} = {}", r.dim_b),
        format!("dim H^{n} = {}", r.dim_h),
    ];
    Ok(Outcome::ok(lines, cohomology_json(&r, x.names())))
}

fn obstruction_payload(ctx: &Ctx) -> Run<(AlgebraMC, Arc<Extension>, DeformationReport, Value)> {
    let e = ctx.extension()?;
    let alg = ctx.base_algebra(&e)?;
    let r = mc_solve(&alg, &e)?;
    let class = obstruction_class(&alg, &e, &r.zeta)?;
    Ok((alg, e, r, class))
}

fn obstruct(ctx: &Ctx) -> Run<Outcome> {
    let (_, e, r, class) = obstruction_payload(ctx)?;
    let names = e.comodule().names();
    let mut lines = vec![format!("zeta {}", if r.zeta.is_zero() { "= 0" } else { "≠ 0" })];
    lines.push(if r.obstruction_vanishes {
        "obstruction class vanishes".into()
    } else {
        format!(
            "obstruction class {} in H^3 (dim {})",
            fmt_coords(&class["coordinates"]),
            class["dim_H3"]
        )
    });
    let payload = json!({
        "zeta": cochain_json(&r.zeta, names),
        "obstruction_vanishes": r.obstruction_vanishes,
        "witness": r.witness.as_ref().map(|w| cochain_json(w, names)),
        "obstruction_class": class,
    });
    Ok(Outcome::ok(lines, payload))
}

fn deform(ctx: &Ctx) -> Run<Outcome> {
    let (_, _, r, class) = obstruction_payload(ctx)?;
    let mut payload = deformation_report_json(&r);
    payload["obstruction_class"] = class.clone();
    match &r.base {
        None => Ok(Outcome {
            lines: vec![format!(
                "obstructed: class {} in H^3 (dim {}) is nonzero",
                fmt_coords(&class["coordinates"]),
                class["dim_H3"]
            )],
            report: payload,
            code: 2,
        }),
        Some(d) => {
            payload["deformation"] = components_json(d.mtilde());
            let lines = vec![
                "obstruction class vanishes".into(),
                format!("solutions: m_X^0 + Z^2, dim Z^2 = {}", r.dim_z2()),
                format!("dim H^2 = {}", r.dim_h2()),
            ];
            Ok(Outcome::ok(lines, payload))
        }
    }
}

fn classify_cmd(ctx: &Ctx) -> Run<Outcome> {
    let e = ctx.extension()?;
    let alg = ctx.base_algebra(&e)?;
    let c = classify(&alg, &e)?;
    let names = e.comodule().names();
    let mut payload = deformation_report_json(&c.report);
    let (line, classes, code) = match &c.classes {
        Classes::Obstructed => ("obstructed".to_string(), json!({"kind": "obstructed"}), 2),
        Classes::Enumerated(reps) => (
            format!("{} equivalence classes", reps.len()),
            json!({"kind": "enumerated", "representatives": reps.iter().map(|d| cochain_json(d.m_x(), names)).collect::<Vec<_>>()}),
            0,
        ),
        Classes::Parametrized { base, directions } => (
            format!("classes form a {}-parameter family", directions.len()),
            json!({
                "kind": "parametrized",
                "base": cochain_json(base.m_x(), names),
                "directions": directions.iter().map(|h| cochain_json(h, names)).collect::<Vec<_>>(),
            }),
            0,
        ),
    };
    payload["classes"] = classes;
    Ok(Outcome {
        lines: vec![format!("dim H^2 = {}", c.report.dim_h2()), line],
        report: payload,
        code,
    })
}

/// The multiplication of the algebra on its unique degree-0 basis element.
fn degree_zero_multiplication(a: &AlgebraEntry) -> Run<convdeform::convolution::MultiMap> {
    let c = a.m.coalgebra();
    let zero: Vec<usize> = match c.grading() {
        Some(g) => (0..c.dim()).filter(|&i| g[i] == 0).collect(),
        None => (0..c.dim()).collect(),
    };
    match zero.as_slice() {
        [i] => Ok(a.m.component(*i).clone()),
        _ => Err(InputError(
            "series needs an algebra over a coalgebra with one degree-0 basis element".into(),
        )),
    }
}

fn series(ctx: &Ctx, max_degree: Option<usize>, strategy: &str, budget: usize) -> Run<Outcome> {
    let (_, d) = ctx.coalgebra()?;
    let (_, a) = ctx.algebra()?;
    let m0 = degree_zero_multiplication(a)?;
    let n = max_degree.or(ctx.task.max_degree).unwrap_or(2);
    let strategy = match strategy {
        "first" => SeriesStrategy::First,
        "all" => SeriesStrategy::All { budget },
        s => match s.strip_prefix("file:") {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{path}: {e}")))?;
                let (sorted, _) = d.sorted_by_degree()?;
                let chosen = parse_cochain_file(&text, d.field(), m0.a_dim(), &sorted)
                    .map_err(|e| InputError(format!("{path}: {e}")))?;
                SeriesStrategy::Supplied(chosen)
            }
            None => return Err(InputError(format!("unknown strategy {s:?}"))),
        },
    };
    let r = series_deform(&m0, d, n, &strategy)?;
    let mut lines = Vec::new();
    let mut branches = Vec::new();
    for (b, branch) in r.branches.iter().enumerate() {
        let mut steps = Vec::new();
        for step in &branch.steps {
            let names = step.report.extension.comodule().names();
            lines.push(format!(
                "branch {b} degree {}: dim H^2 = {}, obstruction {}",
                step.degree,
                step.report.dim_h2(),
                if step.report.obstruction_vanishes {
                    "vanishes"
                } else {
                    "nonzero"
                }
            ));
            steps.push(json!({
                "degree": step.degree,
                "dim_Z2": step.report.dim_z2(),
                "dim_B2": step.report.dim_b2(),
                "dim_H2": step.report.dim_h2(),
                "zeta": cochain_json(&step.report.zeta, names),
                "obstruction_vanishes": step.report.obstruction_vanishes,
                "chosen": step.chosen.as_ref().map(|c| cochain_json(c, names)),
            }));
        }
        branches.push(json!({
            "steps": steps,
            "obstructed_at": branch.obstructed_at,
            "algebra": components_json(&branch.algebra),
        }));
    }
    if r.truncated {
        lines.push("branch budget exhausted".into());
    }
    let code = if r.branches.iter().any(|b| b.obstructed_at.is_none()) {
        0
    } else {
        2
    };
    let payload = json!({
        "max_degree": n,
        "basis": r.coalgebra.names(),
        "truncated": r.truncated,
        "branches": branches,
    });
    Ok(Outcome {
        lines,
        report: payload,
        code,
    })
}

fn unit_gauge_cmd(ctx: &Ctx) -> Run<Outcome> {
    let (_, a) = ctx.algebra()?;
    let u = a
        .unit
        .as_ref()
        .ok_or_else(|| InputError("unit-gauge needs an algebra with a unit".into()))?;
    let d = a.m.coalgebra();
    let d0 = Arc::new(d.restrict(&d.degree_indices(0)?)?);
    let u0 = rekey(u, &d0)?;
    let g = unit_gauge(&a.m, &u0)?;
    let top = d.max_degree().unwrap_or(0);
    let lines = vec![
        format!("unit normalized through degree {top}"),
        format!("gauge is trivial: {}", g.mtilde_f == a.m),
    ];
    let payload = json!({
        "gauge": components_json(&g.f),
        "normalized_multiplication": components_json(&g.mtilde_f),
        "unit": components_json(&g.unit),
        "transported_unit": components_json(&g.transported_unit),
    });
    Ok(Outcome::ok(lines, payload))
}

fn invert(ctx: &Ctx, filtration: &str) -> Run<Outcome> {
    let (name, m) = pick(&ctx.spec.morphisms, &ctx.task.morphism, "morphism")?;
    let c = m.f.coalgebra();
    let filt = match filtration {
        "grading" => Filtration::from_grading(c)?,
        s => match s.strip_prefix("file:") {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{path}: {e}")))?;
                parse_filtration_file(&text, c).map_err(|e| InputError(format!("{path}: {e}")))?
            }
            None => return Err(InputError(format!("unknown filtration {s:?}"))),
        },
    };
    match takeuchi_invert(&m.f, &filt) {
        Ok(inv) => Ok(Outcome::ok(
            vec![format!("{name} is invertible")],
            json!({"inverse": components_json(&inv)}),
        )),
        Err(Error::NotInvertible(why)) => Ok(Outcome {
            lines: vec![format!("{name} is not invertible: {why}")],
            report: json!({"inverse": null, "reason": why}),
            code: 2,
        }),
        Err(e) => Err(e.into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, name) = match &cli.command {
        Command::Validate(c) => (c, "validate"),
        Command::Cohomology { common, .. } => (common, "cohomology"),
        Command::Obstruct(c) => (c, "obstruct"),
        Command::Deform(c) => (c, "deform"),
        Command::Classify(c) => (c, "classify"),
        Command::Series { common, .. } => (common, "series"),
        Command::UnitGauge(c) => (c, "unit-gauge"),
        Command::Invert { common, .. } => (common, "invert"),
    };
    let spec = match read_spec(&common.spec) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", common.spec.display());
            return ExitCode::from(1);
        }
    };
    let task = spec.task.clone().unwrap_or_default();
    let ctx = Ctx { spec, task };
    let outcome = match &cli.command {
        Command::Validate(_) => validate(&ctx),
        Command::Cohomology { degree, .. } => cohomology(&ctx, *degree),
        Command::Obstruct(_) => obstruct(&ctx),
        Command::Deform(_) => deform(&ctx),
        Command::Classify(_) => classify_cmd(&ctx),
        Command::Series {
            max_degree,
            strategy,
            budget,
            ..
        } => series(&ctx, *max_degree, strategy, *budget),
        Command::UnitGauge(_) => unit_gauge_cmd(&ctx),
        Command::Invert { filtration, .. } => invert(&ctx, filtration),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    for line in &outcome.lines {
        println!("{line}");
    }
    if let Some(path) = &common.out {
        let text = serde_json::to_string_pretty(&report(name, outcome.report)).expect("JSON values serialize") + "\n";
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::from(outcome.code)
}
