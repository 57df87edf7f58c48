use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{BatteryCaseData, BatteryError, DrEvent, Quantity};
use crate::corpus::{Corpus, KnowledgeSources, Link};
use crate::knowledge_graph::{code_id, ConceptCard, EntityKind, KnowledgeGraph, RelationKind};
use crate::model_dsl::{parse_model, ModelAst};

/// Symbol names used by the emitted model.
pub mod names {
    pub const SLOTS: &str = "timeSequence";
    pub const EVENT: &str = "TS";
    pub const PRICE: &str = "price";
    pub const BREF: &str = "Bref";
    pub const DLMIN: &str = "dLmin";
    pub const LAMBDA: &str = "lambda";
    pub const SPH: &str = "slots_per_hour";
    pub const LOAD_REDUCTION: &str = "load_reduction";
    pub const PROFIT_BASE: &str = "profit_base";
    pub const PROFIT_DR: &str = "profit_dr";

    pub fn power(machine: &str) -> String {
        format!("{machine}Power")
    }

    pub fn idle(machine: &str) -> String {
        format!("{machine}Idle")
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn list(vs: impl IntoIterator<Item = f64>) -> String {
    let items: Vec<String> = vs.into_iter().map(num).collect();
    format!("[{}]", items.join(", "))
}

/// Σ_m Λ_m(t) with dummy `t`.
fn slot_energy(data: &BatteryCaseData, t: &str) -> String {
    let terms: Vec<String> = data
        .machines()
        .map(|m| format!("{p}*{n}[{t}] + {i}*(1 - {n}[{t}])", p = names::power(&m.name), i = names::idle(&m.name), n = m.name))
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn fixed_terms(data: &BatteryCaseData) -> String {
    let mut s = String::new();
    for p in &data.products {
        let q = match &p.quantity {
            Quantity::Value(_) => format!("{}_QTY", p.name),
            Quantity::BufferFinal(b) => format!("{b}[{}]", data.slots),
        };
        let _ = write!(s, "{}_PROFIT*{q} + ", p.name);
    }
    s.push('0');
    for m in &data.materials {
        let _ = write!(s, " - {n}_COST*{n}_USED", n = m.name);
    }
    s
}

/// MiniModel source for the line. With `dr` the objective carries the
/// incentive term and the load-reduction constraint is added; this needs
/// a contiguous event window.
pub fn battery_source(data: &BatteryCaseData, event: Option<&DrEvent>, dr: bool) -> Result<String, BatteryError> {
    use names::*;
    data.validate()?;
    let window = match event {
        Some(ev) => {
            ev.validate(data)?;
            Some(ev.window().ok_or_else(|| BatteryError::InvalidData("event slots must be contiguous".into()))?)
        }
        None if dr => return Err(BatteryError::InvalidData("demand-response model needs an event".into())),
        None => None,
    };
    let mut s = String::new();
    let _ = writeln!(s, "set {SLOTS} = 1..{};", data.slots);
    if let Some((lo, hi)) = window {
        let _ = writeln!(s, "set {EVENT} = {lo}..{hi};");
    }
    let _ = writeln!(s, "param {SPH} = {};", data.slots_per_hour);
    let _ = writeln!(s, "param {PRICE}{{{SLOTS}}} = {};", list(data.price.iter().copied()));
    for m in data.machines() {
        let _ = writeln!(s, "param {} = {};", power(&m.name), num(m.p_on));
        let _ = writeln!(s, "param {} = {};", idle(&m.name), num(m.p_off));
    }
    for p in &data.products {
        let _ = writeln!(s, "param {}_PROFIT = {};", p.name, num(p.price));
        if let Quantity::Value(v) = p.quantity {
            let _ = writeln!(s, "param {}_QTY = {};", p.name, num(v));
        }
    }
    for m in &data.materials {
        let _ = writeln!(s, "param {}_COST = {};", m.name, num(m.cost));
        let _ = writeln!(s, "param {}_USED = {};", m.name, num(m.consumed));
    }
    if let Some(ev) = event {
        let _ = writeln!(s, "param {BREF}{{{EVENT}}} = {};", list(ev.b_ref.iter().copied()));
        let _ = writeln!(s, "param {DLMIN} = {};", num(ev.delta_l_min));
        let _ = writeln!(s, "param {LAMBDA} = {};", num(ev.lambda_rate));
    }
    for m in data.machines() {
        let _ = writeln!(s, "var {}{{{SLOTS}}} binary;", m.name);
    }
    for b in &data.buffers {
        let _ = writeln!(s, "var {b}{{{SLOTS}}} integer;");
    }
    for m in data.machines().filter(|m| !m.upstream.is_empty()) {
        let _ = writeln!(s, "con start_{n}: {n}[1] = 0;", n = m.name);
        for b in &m.upstream {
            let _ = writeln!(s, "con starve_{n}_{b}{{i in {SLOTS} : i >= 2}}: {n}[i] <= {b}[i-1];", n = m.name);
        }
    }
    let fixed = fixed_terms(data);
    let cost = format!("sum{{i in {SLOTS}}}({PRICE}[i]*({}))", slot_energy(data, "i"));
    if dr {
        let e = slot_energy(data, "t");
        let _ = writeln!(s, "con {LOAD_REDUCTION}: sum{{t in {EVENT}}}({BREF}[t] - ({e})) >= {DLMIN};");
        let _ = writeln!(
            s,
            "max {PROFIT_DR}: {fixed} - {cost} + {LAMBDA}*(sum{{t in {EVENT}}}({BREF}[t]) - sum{{t in {EVENT}}}({e}));"
        );
    } else {
        let _ = writeln!(s, "max {PROFIT_BASE}: {fixed} - {cost};");
    }
    Ok(s)
}

pub fn battery_model(data: &BatteryCaseData, event: Option<&DrEvent>, dr: bool) -> Result<ModelAst, BatteryError> {
    let src = battery_source(data, event, dr)?;
    parse_model(&src).map_err(|e| BatteryError::InvalidData(e.to_string()))
}

/// Concept cards describing the demand-response setting.
pub fn battery_cards() -> Vec<ConceptCard> {
    use names::*;
    vec![
        ConceptCard::new(
            "load-reduction constraint",
            EntityKind::Constraint,
            "Total reduction below the baseline over the event window must reach the minimum load reduction.",
            "Participants must reduce load by at least the minimum amount during the event.",
        )
        .hint(LOAD_REDUCTION)
        .relation(RelationKind::DependsOn, "demand-response event"),
        ConceptCard::new(
            "demand-response event",
            EntityKind::IndexSet,
            "Slots of the demand-response event during which the utility requests a load reduction.",
            "An event window is announced by the utility a day ahead.",
        )
        .hint(EVENT),
        ConceptCard::new(
            "incentive mechanism",
            EntityKind::Concept,
            "Incentive-based demand response: the utility pays the incentive rate for every kWh of load reduction below the baseline during the event.",
            "Incentive payment equals the rate times the energy reduction relative to the baseline consumption.",
        )
        .relation(RelationKind::DependsOn, "load-reduction constraint"),
        ConceptCard::new("baseline consumption", EntityKind::Parameter, "Reference consumption per event slot.", "")
            .hint(BREF),
        ConceptCard::new("incentive rate", EntityKind::Parameter, "Payment per kWh of reduction, $/kWh.", "")
            .hint(LAMBDA),
        ConceptCard::new("minimum reduction", EntityKind::Parameter, "Reduction required to qualify, kWh.", "")
            .hint(DLMIN),
        ConceptCard::new("electricity price", EntityKind::Parameter, "Day-ahead price per slot, $/kWh.", "")
            .hint(PRICE),
        ConceptCard::new("time slots", EntityKind::IndexSet, "Ten-minute scheduling slots of the day.", "")
            .hint(SLOTS),
        ConceptCard::new("machine m01", EntityKind::DecisionVariable, "On/off state of the final assembly machine.", "")
            .hint("m01"),
        ConceptCard::new("baseline profit", EntityKind::Objective, "Revenue minus material and energy cost.", "")
            .hint(PROFIT_BASE),
        ConceptCard::new(
            "demand-response objective",
            EntityKind::Objective,
            "Baseline profit plus the incentive payment for the event.",
            "",
        )
        .hint(PROFIT_DR),
    ]
}

/// Graph holding the baseline and demand-response models, the concept
/// cards and their alignment. The incentive rate is tied to the
/// load-reduction constraint since qualification and payment go together.
/// Knowledge sources of the case: the baseline and demand-response
/// models, the concept cards and the rate link of the load-reduction
/// constraint.
pub fn battery_corpus(data: &BatteryCaseData, event: &DrEvent) -> Result<Corpus, BatteryError> {
    let mut cards = battery_cards();
    // machine card only when the line has such a machine
    if data.machines().all(|m| m.name != "m01") {
        cards.retain(|c| c.solver_symbol_hint.as_deref() != Some("m01"));
    }
    Ok(Corpus {
        models: vec![
            ("battery_base.mm".into(), battery_source(data, Some(event), false)?),
            ("battery_dr.mm".into(), battery_source(data, Some(event), true)?),
        ],
        cards,
        links: vec![Link {
            from: names::LOAD_REDUCTION.into(),
            to: names::LAMBDA.into(),
            kind: RelationKind::DependsOn,
        }],
        query: Some("Add a load-reduction constraint for the demand-response event".into()),
    })
}

pub fn build_battery_kg(data: &BatteryCaseData, event: &DrEvent) -> Result<KnowledgeGraph, BatteryError> {
    battery_corpus(data, event)?
        .graph(KnowledgeSources::Heterogeneous)
        .map_err(|e| BatteryError::InvalidData(e.to_string()))
}

/// Expected closure of the load-reduction constraint, listed from the
/// instance data: the constraint, every machine variable, the baseline,
/// minimum-reduction and rate parameters, both slot sets and the machine
/// power parameters.
pub fn load_reduction_members(data: &BatteryCaseData) -> BTreeSet<String> {
    use names::*;
    let mut s: BTreeSet<String> =
        [LOAD_REDUCTION, BREF, DLMIN, LAMBDA, EVENT, SLOTS].iter().map(|n| code_id(n)).collect();
    for m in data.machines() {
        s.insert(code_id(&m.name));
        s.insert(code_id(&power(&m.name)));
        s.insert(code_id(&idle(&m.name)));
    }
    s
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::super::*;
    use super::*;
    use crate::closure::closure;
    use crate::codegen::{build_context, template_code, validate};
    use crate::model_dsl::eval::{Assignment, Evaluator};
    use crate::retrieval::{structural_retrieve, RetrievalResult};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn reference_model_parses_and_has_listing6_pattern() {
        let inst = reference_instance();
        let src = battery_source(&inst.data, inst.event.as_ref(), true).unwrap();
        assert!(src.contains("con starve_m01_B13{i in timeSequence : i >= 2}: m01[i] <= B13[i-1];"));
        assert!(src.contains("con start_m01: m01[1] = 0;"));
        let ast = parse_model(&src).unwrap();
        assert_eq!(ast.objective.as_ref().unwrap().name, names::PROFIT_DR);
        assert!(validate(&src, &KnowledgeGraph::new()).is_ok());
    }

    #[test]
    fn closure_of_load_reduction() {
        let inst = reference_instance();
        let ev = inst.event.unwrap();
        let g = build_battery_kg(&inst.data, &ev).unwrap();
        let c = closure(&g, &code_id(names::LOAD_REDUCTION)).unwrap();
        assert_eq!(c.members, load_reduction_members(&inst.data));
        let p = closure(&g, &code_id(names::PRICE)).unwrap();
        assert_eq!(p.members, [code_id(names::PRICE), code_id(names::SLOTS)].into());
        assert!(g.audit().is_ok());
    }

    #[test]
    fn dr_objective_template_validates() {
        let inst = reference_instance();
        let g = build_battery_kg(&inst.data, inst.event.as_ref().unwrap()).unwrap();
        let target = code_id(names::PROFIT_DR);
        let structural = structural_retrieve(&g, std::slice::from_ref(&target)).unwrap();
        let r = RetrievalResult { seed_ids: vec![target], structural, snippets: vec![] };
        let pkg = build_context(&g, &r, "modify the objective").unwrap();
        let code = template_code(&pkg).unwrap();
        assert!(validate(&code, &g).is_ok());
        assert!(validate(&code, &KnowledgeGraph::new()).is_ok());
        assert!(code.contains("param lambda = 0.54;"));
    }

    fn assignment(data: &BatteryCaseData, s: &Schedule) -> Assignment {
        let mut a: Assignment = HashMap::new();
        for (m, ys) in data.machines().zip(s.y.iter().flatten()) {
            a.insert(m.name.clone(), ys.iter().enumerate().map(|(i, v)| (vec![i as i64 + 1], f64::from(*v))).collect());
        }
        for (b, lv) in &s.buffers {
            a.insert(b.clone(), lv.iter().enumerate().map(|(i, v)| (vec![i as i64 + 1], *v as f64)).collect());
        }
        a
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn emitted_model_matches_evaluators(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (nm, ns) = (rng.gen_range(1..4), rng.gen_range(1..6));
            let inst = toy_instance(&mut rng, nm, ns);
            let ev = inst.event.unwrap();
            let mut s = inst.data.empty_schedule();
            for v in s.y.iter_mut().flatten().flatten() {
                *v = rng.gen_range(0..=1);
            }
            let a = assignment(&inst.data, &s);
            let base = battery_model(&inst.data, Some(&ev), false).unwrap();
            let dr = battery_model(&inst.data, Some(&ev), true).unwrap();
            let vb = Evaluator::new(&base).unwrap().objective(&a).unwrap();
            let vd = Evaluator::new(&dr).unwrap().objective(&a).unwrap();
            prop_assert!((vb - objective_baseline(&inst.data, &s).unwrap()).abs() < 1e-9);
            prop_assert!((vd - objective_dr(&inst.data, &s, &ev).unwrap()).abs() < 1e-9);
            let holds = Evaluator::new(&dr).unwrap().violations(&a, 1e-9).unwrap().is_empty();
            // margin keeps float noise away from the boundary
            let slack = {
                let flat = Flat::new(&inst.data);
                let ys: Vec<&Vec<u8>> = s.y.iter().flatten().collect();
                reduction(&ev, &flat, &|m, i| ys[m][i]) - ev.delta_l_min
            };
            if slack.abs() > 1e-6 {
                prop_assert_eq!(holds, check_load_reduction(&inst.data, &s, &ev).unwrap());
            }
        }
    }

    #[test]
    fn starvation_constraints_agree_with_checker() {
        let inst = reference_instance();
        let ast = battery_model(&inst.data, None, false).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let mut s = inst.data.empty_schedule();
            for v in s.y.iter_mut().flatten().flatten() {
                *v = u8::from(rng.gen_bool(0.1));
            }
            for b in &inst.data.buffers {
                s.buffers.insert(b.clone(), (0..inst.data.slots).map(|_| i64::from(rng.gen_bool(0.9))).collect());
            }
            let ev = Evaluator::new(&ast).unwrap();
            let model_ok = ev.violations(&assignment(&inst.data, &s), 1e-9).unwrap().is_empty();
            assert_eq!(model_ok, starvation_feasible(&inst.data, &s).unwrap().feasible);
        }
    }
}
