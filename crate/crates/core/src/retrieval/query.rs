use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{tokens, RetrievalError, Token};
use crate::knowledge_graph::{field, KnowledgeGraph, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intent {
    AddConstraint,
    ModifyObjective,
    ExplainConstraint,
    ParameterQuery,
    GenerateModel,
    Unknown,
}

impl Intent {
    pub fn as_str(self) -> &'static str {
        match self {
            Intent::AddConstraint => "add_constraint",
            Intent::ModifyObjective => "modify_objective",
            Intent::ExplainConstraint => "explain_constraint",
            Intent::ParameterQuery => "parameter_query",
            Intent::GenerateModel => "generate_model",
            Intent::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionKind {
    NameMatch,
    NumericWithUnit,
    TimeWindow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedEntity {
    pub surface: String,
    pub resolved: Option<String>,
    pub kind: ExtractionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericPayload {
    pub value: f64,
    pub unit: String,
}

/// Inclusive hour range and, when the graph knows the slot length, the
/// inclusive slot range it covers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub first_hour: i64,
    pub last_hour: i64,
    pub slots: Option<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedQuery {
    pub raw: String,
    pub intents: Vec<Intent>,
    pub entities: Vec<ExtractedEntity>,
    pub numbers: Vec<NumericPayload>,
    pub windows: Vec<TimeWindow>,
}

impl ParsedQuery {
    pub fn has_intent(&self, i: Intent) -> bool {
        self.intents.contains(&i)
    }

    /// Resolved name-match ids in order of appearance, deduplicated.
    pub fn resolved_ids(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.entities {
            if let Some(id) = &e.resolved {
                if !out.contains(id) {
                    out.push(id.clone());
                }
            }
        }
        out
    }
}

/// Position of the first token satisfying `pred`.
fn first_pos(toks: &[Token], pred: impl Fn(&str) -> bool) -> Option<usize> {
    toks.iter().position(|t| pred(&t.text))
}

fn phrase_pos(toks: &[Token], phrase: &[&str]) -> Option<usize> {
    toks.windows(phrase.len()).position(|w| w.iter().zip(phrase).all(|(t, p)| t.text == *p))
}

fn any_word(toks: &[Token], words: &[&str]) -> Option<usize> {
    first_pos(toks, |t| words.contains(&t))
}

/// Keyword table. Each intent fires when all of its keyword groups are
/// present; its position is the earliest matched keyword.
fn classify(toks: &[Token]) -> Vec<Intent> {
    let constraint = first_pos(toks, |t| t.starts_with("constraint"));
    let mut hits: Vec<(usize, Intent)> = Vec::new();
    if let (Some(a), Some(c)) = (any_word(toks, &["add", "introduce"]), constraint) {
        hits.push((a.min(c), Intent::AddConstraint));
    }
    if let (Some(a), Some(b)) = (
        any_word(toks, &["modify", "change", "incentive", "reward"]),
        any_word(toks, &["objective", "profit"]),
    ) {
        hits.push((a.min(b), Intent::ModifyObjective));
    }
    if let Some(p) = any_word(toks, &["explain"]) {
        hits.push((p, Intent::ExplainConstraint));
    }
    let pq = [phrase_pos(toks, &["what", "is"]), phrase_pos(toks, &["value", "of"])];
    if let Some(p) = pq.into_iter().flatten().min() {
        hits.push((p, Intent::ParameterQuery));
    }
    if let Some(p) = any_word(toks, &["generate", "code", "model"]) {
        hits.push((p, Intent::GenerateModel));
    }
    hits.sort();
    if hits.is_empty() {
        vec![Intent::Unknown]
    } else {
        hits.into_iter().map(|(_, i)| i).collect()
    }
}

struct Name {
    toks: Vec<String>,
    id: String,
    paper: bool,
    surface: String,
}

fn dictionary(graph: &KnowledgeGraph) -> Vec<Name> {
    let mut names = Vec::new();
    for e in graph.entities().filter(|e| !e.is_unresolved()) {
        let mut forms = vec![e.name.clone()];
        forms.extend(e.aliases());
        if let Some(s) = e.solver_symbol() {
            forms.push(s.to_string());
        }
        forms.sort();
        forms.dedup();
        for f in forms {
            let toks: Vec<String> = tokens(&f).into_iter().map(|t| t.text).collect();
            if !toks.is_empty() {
                names.push(Name { toks, id: e.id.clone(), paper: e.source == Source::Paper, surface: f });
            }
        }
    }
    names
}

/// Longest token-sequence match at each position; ties prefer paper
/// concepts, then the smaller id. Single-character names must match the
/// query case-sensitively so that words like "a" or "I" do not resolve.
fn resolve_names(raw: &str, toks: &[Token], graph: &KnowledgeGraph) -> Vec<ExtractedEntity> {
    let dict = dictionary(graph);
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let mut best: Option<&Name> = None;
        for n in &dict {
            let len = n.toks.len();
            if i + len > toks.len() || toks[i..i + len].iter().zip(&n.toks).any(|(t, w)| t.text != *w) {
                continue;
            }
            if len == 1 && n.toks[0].chars().count() == 1 && &raw[toks[i].start..toks[i].end] != n.surface {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => (len, n.paper, std::cmp::Reverse(&n.id)) > (b.toks.len(), b.paper, std::cmp::Reverse(&b.id)),
            };
            if better {
                best = Some(n);
            }
        }
        match best {
            Some(n) => {
                let len = n.toks.len();
                out.push(ExtractedEntity {
                    surface: raw[toks[i].start..toks[i + len - 1].end].to_string(),
                    resolved: Some(n.id.clone()),
                    kind: ExtractionKind::NameMatch,
                });
                i += len;
            }
            None => i += 1,
        }
    }
    out
}

fn unit_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)(\$\s*(\d+(?:\.\d+)?)\s*/\s*kwh\b)|((\d+(?:\.\d+)?)\s*(\$\s*/\s*kwh|kwh|kw)\b)").unwrap()
    })
}

fn numbers(raw: &str) -> Vec<(String, NumericPayload)> {
    let mut out = Vec::new();
    for c in unit_re().captures_iter(raw) {
        let surface = c[0].to_string();
        let (value, unit) = if let Some(v) = c.get(2) {
            (v.as_str(), "$/kWh".to_string())
        } else {
            let u = c[5].to_lowercase().replace(' ', "");
            let unit = match u.as_str() {
                "kw" => "kW",
                "kwh" => "kWh",
                _ => "$/kWh",
            };
            (c.get(4).unwrap().as_str(), unit.to_string())
        };
        out.push((surface, NumericPayload { value: value.parse().unwrap(), unit }));
    }
    out
}

fn hour_res() -> &'static (Regex, Regex) {
    static RE: OnceLock<(Regex, Regex)> = OnceLock::new();
    RE.get_or_init(|| {
        (
            Regex::new(r"(?i)\bhours?\s+(\d+)\s*(?:-|\x{2013}|to)\s*(\d+)\b").unwrap(),
            Regex::new(r"(?i)\b(\d+)(?:st|nd|rd|th)\s+hour\b").unwrap(),
        )
    })
}

fn slots_per_hour(graph: &KnowledgeGraph) -> Option<i64> {
    graph
        .find_code_symbol("slots_per_hour")
        .and_then(|e| e.field(field::VALUE))
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|v| *v >= 1.0 && v.fract() == 0.0)
        .map(|v| v as i64)
}

fn windows(raw: &str, graph: &KnowledgeGraph) -> Vec<(usize, String, TimeWindow)> {
    let sph = slots_per_hour(graph);
    let (range, single) = hour_res();
    let mut out = Vec::new();
    let mut push = |pos: usize, surface: &str, a: i64, b: i64| {
        let (a, b) = (a.min(b), a.max(b));
        let slots = sph.map(|s| ((a - 1) * s + 1, b * s));
        out.push((pos, surface.to_string(), TimeWindow { first_hour: a, last_hour: b, slots }));
    };
    for c in range.captures_iter(raw) {
        if let (Ok(a), Ok(b)) = (c[1].parse(), c[2].parse()) {
            push(c.get(0).unwrap().start(), &c[0], a, b);
        }
    }
    for c in single.captures_iter(raw) {
        if let Ok(h) = c[1].parse() {
            push(c.get(0).unwrap().start(), &c[0], h, h);
        }
    }
    out.sort_by_key(|w| w.0);
    out
}

pub fn understand_query(text: &str, graph: &KnowledgeGraph) -> Result<ParsedQuery, RetrievalError> {
    if text.trim().is_empty() {
        return Err(RetrievalError::EmptyQuery);
    }
    let toks = tokens(text);
    let mut entities = resolve_names(text, &toks, graph);
    let nums = numbers(text);
    let wins = windows(text, graph);
    for (surface, _) in &nums {
        entities.push(ExtractedEntity { surface: surface.clone(), resolved: None, kind: ExtractionKind::NumericWithUnit });
    }
    for (_, surface, _) in &wins {
        entities.push(ExtractedEntity { surface: surface.clone(), resolved: None, kind: ExtractionKind::TimeWindow });
    }
    Ok(ParsedQuery {
        raw: text.to_string(),
        intents: classify(&toks),
        entities,
        numbers: nums.into_iter().map(|n| n.1).collect(),
        windows: wins.into_iter().map(|w| w.2).collect(),
    })
}
