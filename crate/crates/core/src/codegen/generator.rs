use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{CodegenError, ContextPackage};
use crate::knowledge_graph::{field, Entity, EntityKind, Source};

pub const ENDPOINT_ENV: &str = "CLOSUREKB_GENERATOR_ENDPOINT";

/// Turns a context package into model code. `round` counts generation
/// attempts within one repair loop, starting at 1.
pub trait Generator {
    fn generate(&self, package: &ContextPackage, round: usize) -> Result<String, CodegenError>;
}

/// Deterministic generator: declares the package's sets, parameters and
/// variables from their stored fields and renders stored statements.
#[derive(Debug, Clone, Copy, Default)]
pub struct TemplateGenerator;

fn declaration(e: &Entity) -> Result<String, CodegenError> {
    let sym = e.solver_symbol().unwrap_or(&e.name);
    let sets = e.index_sets();
    let idx = if sets.is_empty() { String::new() } else { format!("{{{}}}", sets.join(", ")) };
    Ok(match e.kind {
        EntityKind::IndexSet => {
            let def = e.field(field::SET_DEF).ok_or_else(|| CodegenError::MissingExpression(e.name.clone()))?;
            format!("set {sym} = {def};")
        }
        EntityKind::Parameter => match e.field(field::VALUE) {
            Some(v) => format!("param {sym}{idx} = {v};"),
            None => format!("param {sym}{idx};"),
        },
        _ => {
            let domain = e.field(field::DOMAIN).unwrap_or("continuous");
            match e.field(field::BOUNDS) {
                Some(b) => format!("var {sym}{idx} {domain} in {b};"),
                None => format!("var {sym}{idx} {domain};"),
            }
        }
    })
}

fn statement(e: &Entity) -> Result<String, CodegenError> {
    e.field(field::EXPRESSION)
        .filter(|x| !x.trim().is_empty())
        .map(String::from)
        .ok_or_else(|| CodegenError::MissingExpression(e.name.clone()))
}

pub fn template_code(package: &ContextPackage) -> Result<String, CodegenError> {
    let code: Vec<&Entity> = package
        .typed_entities
        .iter()
        .map(|t| &t.entity)
        .filter(|e| e.source == Source::Code && !e.is_unresolved())
        .collect();
    if code.is_empty() && !package.targets.is_empty() {
        return Err(CodegenError::MissingExpression(package.targets.join(", ")));
    }
    let mut lines = Vec::new();
    for kind in [EntityKind::IndexSet, EntityKind::Parameter, EntityKind::DecisionVariable] {
        for e in code.iter().filter(|e| e.kind == kind) {
            lines.push(declaration(e)?);
        }
    }
    for e in code.iter().filter(|e| e.kind == EntityKind::Constraint) {
        lines.push(statement(e)?);
    }
    let objectives: Vec<&&Entity> = code.iter().filter(|e| e.kind == EntityKind::Objective).collect();
    let chosen = package
        .targets
        .iter()
        .find_map(|t| objectives.iter().find(|o| &o.id == t))
        .or_else(|| objectives.iter().min_by(|a, b| a.id.cmp(&b.id)));
    if let Some(o) = chosen {
        lines.push(statement(o)?);
    }
    let mut out = lines.join("\n");
    out.push('\n');
    Ok(out)
}

impl Generator for TemplateGenerator {
    fn generate(&self, package: &ContextPackage, _round: usize) -> Result<String, CodegenError> {
        template_code(package)
    }
}

/// Sends the serialized package to an external service and returns the
/// response text verbatim. `exec:<command>` pipes through a local process;
/// anything else is treated as an HTTP endpoint receiving a POST.
#[derive(Debug, Clone)]
pub struct ExternalGenerator {
    pub endpoint: String,
    pub timeout: Duration,
}

impl ExternalGenerator {
    pub fn new(endpoint: impl Into<String>) -> Self {
        ExternalGenerator { endpoint: endpoint.into(), timeout: Duration::from_secs(60) }
    }

    pub fn from_env() -> Option<Self> {
        std::env::var(ENDPOINT_ENV).ok().filter(|s| !s.trim().is_empty()).map(ExternalGenerator::new)
    }

    fn via_process(&self, cmd: &str, body: &str) -> Result<String, CodegenError> {
        let unavailable = |m: String| CodegenError::GeneratorUnavailable(m);
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(cmd)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| unavailable(format!("spawn `{cmd}`: {e}")))?;
        let mut stdin = child.stdin.take().expect("piped");
        let body = body.to_string();
        let writer = std::thread::spawn(move || {
            let _ = stdin.write_all(body.as_bytes());
        });
        let mut stdout = child.stdout.take().expect("piped");
        let reader = std::thread::spawn(move || {
            let mut s = String::new();
            stdout.read_to_string(&mut s).map(|_| s)
        });
        let deadline = Instant::now() + self.timeout;
        let status = loop {
            match child.try_wait().map_err(|e| unavailable(e.to_string()))? {
                Some(s) => break s,
                None if Instant::now() >= deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(unavailable(format!("`{cmd}` timed out")));
                }
                None => std::thread::sleep(Duration::from_millis(5)),
            }
        };
        let _ = writer.join();
        let out = reader.join().map_err(|_| unavailable("reader panicked".into()))?;
        if !status.success() {
            return Err(unavailable(format!("`{cmd}` exited with {status}")));
        }
        out.map_err(|e| unavailable(e.to_string()))
    }

    fn via_http(&self, body: &str) -> Result<String, CodegenError> {
        let unavailable = |m: String| CodegenError::GeneratorUnavailable(m);
        let agent: ureq::Agent = ureq::Agent::config_builder().timeout_global(Some(self.timeout)).build().into();
        let mut resp = agent
            .post(&self.endpoint)
            .header("content-type", "application/json")
            .send(body)
            .map_err(|e| unavailable(format!("{}: {e}", self.endpoint)))?;
        resp.body_mut().read_to_string().map_err(|e| unavailable(e.to_string()))
    }
}

impl Generator for ExternalGenerator {
    fn generate(&self, package: &ContextPackage, _round: usize) -> Result<String, CodegenError> {
        let body = package.to_json();
        match self.endpoint.strip_prefix("exec:") {
            Some(cmd) => self.via_process(cmd, &body),
            None => self.via_http(&body),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ScriptStep {
    Template,
    /// Template output without the declaration of `symbol`.
    TemplateDrop { symbol: String },
    /// Template output with every whole-word `from` replaced by `to`.
    TemplateReplace { from: String, to: String },
    Literal { text: String },
}

/// Replayable generator mock. Round `r` uses step `r`, the last step
/// repeating once the script runs out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedGenerator {
    pub steps: Vec<ScriptStep>,
}

/// Per-run scripts for repeated trials.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    pub runs: Vec<Vec<ScriptStep>>,
}

impl Script {
    pub fn parse(text: &str) -> Result<Script, CodegenError> {
        let s: Script = serde_json::from_str(text).map_err(|e| CodegenError::Script(e.to_string()))?;
        if s.runs.is_empty() || s.runs.iter().any(Vec::is_empty) {
            return Err(CodegenError::Script("every run needs at least one step".into()));
        }
        Ok(s)
    }

    /// Generator for run `r` (0-based), cycling through the runs.
    pub fn run(&self, r: usize) -> ScriptedGenerator {
        ScriptedGenerator { steps: self.runs[r % self.runs.len()].clone() }
    }
}

fn declared_name(line: &str) -> Option<&str> {
    let rest = ["set ", "param ", "var "].iter().find_map(|k| line.trim_start().strip_prefix(k))?;
    rest.split(|c: char| !(c.is_alphanumeric() || c == '_')).next()
}

impl Generator for ScriptedGenerator {
    fn generate(&self, package: &ContextPackage, round: usize) -> Result<String, CodegenError> {
        let step = self
            .steps
            .get(round.saturating_sub(1))
            .or(self.steps.last())
            .ok_or_else(|| CodegenError::Script("empty script".into()))?;
        match step {
            ScriptStep::Template => template_code(package),
            ScriptStep::TemplateDrop { symbol } => {
                let code = template_code(package)?;
                let kept: Vec<&str> = code.lines().filter(|l| declared_name(l) != Some(symbol.as_str())).collect();
                Ok(kept.join("\n") + "\n")
            }
            ScriptStep::TemplateReplace { from, to } => {
                let code = template_code(package)?;
                let re = Regex::new(&format!(r"\b{}\b", regex::escape(from))).map_err(|e| CodegenError::Script(e.to_string()))?;
                Ok(re.replace_all(&code, regex::NoExpand(to)).into_owned())
            }
            ScriptStep::Literal { text } => Ok(text.clone()),
        }
    }
}
