//! The `tpa` command line: one command per run, a report on stdout and an
//! exit code (0 all checks pass, 1 a check failed, 2 schema error, 3 a step
//! that cannot fail on valid input failed).

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::action::VerifiedAction;
use crate::corestriction::corestriction_report;
use crate::crossed::{verify_ring_laws, Mode};
use crate::equivalence::{try_equivalent, try_isomorphic, EquivalenceFailure, IsoFailure};
use crate::globalization::{globalize, unital_structure, verify_globalization, GlobalModel};
use crate::io::{parse, parse_model, to_json, ActionDocument, ModelDocument, SchemaError};
use crate::morita::{build_context, verify_closure, verify_surjectivity, MoritaError};
use crate::orbit::orbit_report;
use crate::report::{Check, Report};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "tpa", version, about = "Verify twisted partial actions of finite groups on finite block-product rings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Input document.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Second input document (compare).
    #[arg(long, global = true)]
    pub input2: Option<PathBuf>,
    /// Write the produced globalization document here (globalize).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, global = true, default_value_t = Mode::Spanning)]
    pub mode: Mode,
    /// Seed for random sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest set swept exhaustively by the random-sweep checks.
    #[arg(long, global = true, default_value_t = 1 << 12)]
    pub bound: u128,
    /// One JSON report per line.
    #[arg(long, global = true, conflicts_with = "text")]
    pub json: bool,
    /// Human-readable report (the default).
    #[arg(long, global = true)]
    pub text: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Check the axioms of a twisted partial action.
    Validate,
    /// Check associativity and unit of the crossed product.
    Crossed,
    /// Orbit decomposition and the transversal lemmas of each orbit.
    Orbits,
    /// Corestrict every orbit and check the equivalence identity.
    Corestrict,
    /// Build and verify the globalization.
    Globalize,
    /// Check the Morita context between the two crossed products.
    Morita,
    /// Compare two globalizations of one action: equivalence, and isomorphism when it holds.
    Compare,
}

/// A report, its exit code, and an optional document to write.
pub struct Outcome {
    pub report: Report,
    pub exit: i32,
    pub document: Option<String>,
}

impl Outcome {
    fn from_report(report: Report) -> Self {
        let exit = if report.passed() { EXIT_PASS } else { EXIT_FAIL };
        Outcome { report, exit, document: None }
    }

    fn error(command: &str, name: &str, exit: i32, witness: serde_json::Value) -> Self {
        let mut report = Report::new(command);
        let mut check = Check::new(name, "the input could be processed");
        check.fail(witness);
        report.push(check);
        Outcome { report, exit, document: None }
    }

    fn schema(command: &str, e: &SchemaError) -> Self {
        Self::error(command, "schema", EXIT_SCHEMA, json!({"path": e.path, "reason": e.reason}))
    }

    fn internal(command: &str, e: impl std::fmt::Display) -> Self {
        Self::error(command, "internal", EXIT_INTERNAL, json!({"error": e.to_string()}))
    }
}

fn read(path: &Option<PathBuf>, flag: &str) -> Result<String, SchemaError> {
    let path = path.as_ref().ok_or_else(|| SchemaError { path: flag.into(), reason: "missing".into() })?;
    std::fs::read_to_string(path).map_err(|e| SchemaError { path: flag.into(), reason: format!("{}: {e}", path.display()) })
}

fn load_action(path: &Option<PathBuf>, flag: &str) -> Result<crate::action::TwistedPartialAction, SchemaError> {
    parse(&read(path, flag)?)?.to_action()
}

/// A globalization document, or an action document that is globalized here.
fn load_model(path: &Option<PathBuf>, flag: &str) -> Result<Result<GlobalModel, Outcome>, SchemaError> {
    let text = read(path, flag)?;
    let is_model = serde_json::from_str::<serde_json::Value>(&text).is_ok_and(|v| v.get("source").is_some());
    if is_model {
        return Ok(Ok(parse_model(&text)?.to_model()?));
    }
    let t = parse(&text)?.to_action()?;
    let v = match t.verified() {
        Ok(v) => v,
        Err(r) => return Ok(Err(Outcome::from_report(r))),
    };
    Ok(globalize(&v).and_then(|g| g.model()).map_err(|e| Outcome::internal("compare", e)))
}

fn verified_or_report(t: crate::action::TwistedPartialAction) -> Result<VerifiedAction, Outcome> {
    t.verified().map_err(Outcome::from_report)
}

pub fn run(cli: &Cli) -> Outcome {
    let name = format!("{:?}", cli.command).to_lowercase();
    if cli.command == Command::Compare {
        return compare(cli);
    }
    let t = match load_action(&cli.input, "--input") {
        Ok(t) => t,
        Err(e) => return Outcome::schema(&name, &e),
    };
    match cli.command {
        Command::Validate => Outcome::from_report(t.verify_axioms()),
        Command::Crossed => Outcome::from_report(verify_ring_laws(&t, cli.mode)),
        Command::Orbits => match verified_or_report(t) {
            Ok(v) => orbit_report(&v, cli.bound, cli.seed).map_or_else(|e| Outcome::internal(&name, e), Outcome::from_report),
            Err(o) => o,
        },
        Command::Corestrict => match verified_or_report(t) {
            Ok(v) => corestriction_report(&v).map_or_else(|e| Outcome::internal(&name, e), Outcome::from_report),
            Err(o) => o,
        },
        Command::Globalize => match verified_or_report(t) {
            Ok(v) => globalize_command(&v),
            Err(o) => o,
        },
        Command::Morita => match verified_or_report(t) {
            Ok(v) => morita_command(&v),
            Err(o) => o,
        },
        Command::Compare => unreachable!("handled above"),
    }
}

fn globalize_command(v: &VerifiedAction) -> Outcome {
    let glob = match globalize(v) {
        Ok(g) => g,
        Err(e) => return Outcome::internal("globalize", e),
    };
    let mut report = verify_globalization(v, &glob);
    report.extend_prefixed("unital/", unital_structure(&glob));
    let model = match glob.model() {
        Ok(m) => m,
        Err(e) => return Outcome::internal("globalize", e),
    };
    report.extend_prefixed("model/", model.verify_model());
    match model.roundtrip() {
        Ok(r) => report.extend_prefixed("roundtrip/", r),
        Err(e) => return Outcome::internal("globalize", e),
    }
    let g = v.group();
    let table: serde_json::Map<String, serde_json::Value> = g
        .elements()
        .flat_map(|x| g.elements().map(move |y| (x, y)))
        .map(|(x, y)| (format!("{x},{y}"), json!(format!("{:?}", glob.twist().get(x, y)))))
        .collect();
    let document = ModelDocument::from_model(&model);
    let mut data = report.data.take().unwrap_or_else(|| json!({}));
    data["extended_twist"] = json!(table);
    data["model"] = serde_json::to_value(&document).expect("documents serialize");
    report.data = Some(data);
    let mut out = Outcome::from_report(report);
    out.document = Some(to_json(&document));
    out
}

fn morita_command(v: &VerifiedAction) -> Outcome {
    let glob = match globalize(v) {
        Ok(g) => g,
        Err(e) => return Outcome::internal("morita", e),
    };
    match build_context(v, &glob) {
        Ok(ctx) => {
            let mut report = verify_closure(v, &ctx);
            report.command = "morita".into();
            report.extend(verify_surjectivity(&ctx));
            report.data = verify_surjectivity(&ctx).data;
            Outcome::from_report(report)
        }
        Err(MoritaError::ClosureFailure { which, witness }) => {
            let mut report = Report::new("morita");
            let mut check = Check::new(which, "bimodule closure");
            check.fail(witness);
            report.push(check);
            Outcome::from_report(report)
        }
        Err(MoritaError::TooLarge(n)) => Outcome::error("morita", "size", EXIT_FAIL, json!({"residue_operations": n})),
        Err(e) => Outcome::internal("morita", e),
    }
}

fn compare(cli: &Cli) -> Outcome {
    let load = |p: &Option<PathBuf>, flag: &str| match load_model(p, flag) {
        Ok(Ok(m)) => Ok(m),
        Ok(Err(o)) => Err(o),
        Err(e) => Err(Outcome::schema("compare", &e)),
    };
    let m1 = match load(&cli.input, "--input") {
        Ok(m) => m,
        Err(o) => return o,
    };
    let m2 = match load(&cli.input2, "--input2") {
        Ok(m) => m,
        Err(o) => return o,
    };
    let mut report = Report::new("compare");
    for (i, m) in [&m1, &m2].into_iter().enumerate() {
        report.extend_prefixed(&format!("input{}/", i + 1), m.verify_model());
    }
    if !report.passed() {
        return Outcome::from_report(report);
    }
    let iso = try_isomorphic(&m1, &m2);
    if matches!(iso, Err(IsoFailure::NotSameAction)) {
        let mut check = Check::new("same-action", "both inputs globalize the same partial action");
        check.fail(json!({"reason": "sources differ"}));
        report.push(check);
        report.data = Some(json!({"verdict": "different-actions"}));
        return Outcome::from_report(report);
    }
    let iso_failure = iso.as_ref().err().map(|e| e.to_string());
    if let Ok(i) = &iso {
        report.extend_prefixed("isomorphism/", i.report.clone());
    }
    match try_equivalent(&m1, &m2) {
        Ok(eq) => {
            report.extend_prefixed("equivalence/", eq.report);
            report.data = Some(json!({"verdict": "equivalent", "isomorphic": iso.is_ok(), "isomorphism_failure": iso_failure}));
            Outcome::from_report(report)
        }
        Err(EquivalenceFailure::NotSameAction) => {
            let mut check = Check::new("same-action", "both inputs globalize the same partial action");
            check.fail(json!({"reason": "sources differ"}));
            report.push(check);
            report.data = Some(json!({"verdict": "different-actions"}));
            Outcome::from_report(report)
        }
        Err(f) => {
            // Globalizations of one action are always equivalent.
            let mut check = Check::new("equivalence", "any two globalizations of one action are equivalent");
            check.fail(json!({"stage": f.to_string(), "isomorphism_failure": iso_failure}));
            report.push(check);
            report.data = Some(json!({"verdict": "bug-report"}));
            let mut out = Outcome::from_report(report);
            out.exit = EXIT_INTERNAL;
            out
        }
    }
}

/// Prints the outcome and writes the document if requested.
pub fn emit(cli: &Cli, outcome: &Outcome) -> std::io::Result<()> {
    if cli.json {
        println!("{}", serde_json::to_string(&outcome.report).expect("reports serialize"));
    } else {
        print!("{}", outcome.report.to_text());
        if let Some(data) = &outcome.report.data {
            let mut shown = data.clone();
            if let Some(obj) = shown.as_object_mut() {
                obj.remove("model");
            }
            println!("data: {shown}");
        }
    }
    if let (Some(path), Some(doc)) = (&cli.output, &outcome.document) {
        std::fs::write(path, doc)?;
    }
    Ok(())
}

/// The document for an action, for writing fixture files.
pub fn action_json(t: &crate::action::TwistedPartialAction) -> String {
    to_json(&ActionDocument::from_action(t))
}
