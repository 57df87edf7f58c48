use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{FjspError, FjspInstance, Profile};
use crate::knowledge_graph::{ConceptCard, EdgeKind, EntityKind, KnowledgeGraph};
use crate::model_dsl::{emit_model, parse_model, rename_symbols, Dialect, ModelAst};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Baseline,
    Unavailability,
    AltTerms,
}

/// Standard symbol to alternate-vocabulary symbol.
const LEXICON: [(&str, &str); 25] = [
    ("J", "WorkOrders"),
    ("P", "Steps"),
    ("K", "Workcenters"),
    ("W", "Outages"),
    ("nops", "stepCount"),
    ("elig", "capable"),
    ("p", "runTime"),
    ("M", "bigM"),
    ("nwin", "outageCount"),
    ("wstart", "outageStart"),
    ("wend", "outageEnd"),
    ("x", "route"),
    ("s", "release"),
    ("y", "sequence"),
    ("z", "clearOf"),
    ("Cmax", "leadTime"),
    ("assign", "routing"),
    ("eligible", "capability"),
    ("precedence", "step_order"),
    ("order_a", "sequence_a"),
    ("order_b", "sequence_b"),
    ("makespan", "lead_time"),
    ("window_before", "outage_before"),
    ("window_after", "outage_after"),
    ("obj", "min_lead_time"),
];

pub fn alt_lexicon() -> BTreeMap<&'static str, &'static str> {
    LEXICON.into_iter().collect()
}

/// M = Σ over operations of the largest eligible time + latest window end.
pub fn big_m(inst: &FjspInstance) -> u64 {
    let work: u64 = inst.jobs.iter().flatten().map(|op| op.iter().map(|e| e.time).max().unwrap_or(0)).sum();
    work + inst.windows.iter().map(|w| w.w_end).max().unwrap_or(0)
}

fn list(vs: impl IntoIterator<Item = u64>) -> String {
    let items: Vec<String> = vs.into_iter().map(|v| v.to_string()).collect();
    format!("[{}]", items.join(", "))
}

fn standard_source(inst: &FjspInstance, windows: bool) -> String {
    let (n, mo, m) = (inst.n_jobs, inst.max_ops(), inst.n_machines);
    let big = big_m(inst);
    let cell = |i: usize, j: usize, k: usize| -> Option<u64> {
        inst.jobs[i].get(j).and_then(|_| inst.time(i, j, k))
    };
    let mut elig = Vec::with_capacity(n * mo * m);
    let mut p = Vec::with_capacity(n * mo * m);
    for i in 0..n {
        for j in 0..mo {
            for k in 1..=m {
                let t = cell(i, j, k);
                elig.push(u64::from(t.is_some()));
                p.push(t.unwrap_or(0));
            }
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "set J = 1..{n};");
    let _ = writeln!(s, "set P = 1..{mo};");
    let _ = writeln!(s, "set K = 1..{m};");
    let wins: Vec<Vec<super::Window>> = (1..=m).map(|k| inst.windows_on(k)).collect();
    let mw = wins.iter().map(Vec::len).max().unwrap_or(0).max(1);
    if windows {
        let _ = writeln!(s, "set W = 1..{mw};");
    }
    let _ = writeln!(s, "param nops{{J}} = {};", list(inst.jobs.iter().map(|j| j.len() as u64)));
    let _ = writeln!(s, "param elig{{J, P, K}} = {};", list(elig));
    let _ = writeln!(s, "param p{{J, P, K}} = {};", list(p));
    let _ = writeln!(s, "param M = {big};");
    if windows {
        let pad = |f: fn(&super::Window) -> u64| {
            list(wins.iter().flat_map(|ws| (0..mw).map(move |w| ws.get(w).map_or(0, f))))
        };
        let _ = writeln!(s, "param nwin{{K}} = {};", list(wins.iter().map(|w| w.len() as u64)));
        let _ = writeln!(s, "param wstart{{K, W}} = {};", pad(|w| w.w_start));
        let _ = writeln!(s, "param wend{{K, W}} = {};", pad(|w| w.w_end));
    }
    let _ = writeln!(s, "var x{{J, P, K}} binary;");
    let _ = writeln!(s, "var s{{J, P}} continuous in [0, {big}];");
    let _ = writeln!(s, "var y{{J, P, J, P, K}} binary;");
    if windows {
        let _ = writeln!(s, "var z{{J, P, K, W}} binary;");
    }
    let _ = writeln!(s, "var Cmax continuous in [0, {big}];");
    s += "con assign{i in J, j in P : j <= nops[i]}: sum{k in K : elig[i, j, k] = 1}(x[i, j, k]) = 1;\n";
    s += "con eligible{i in J, j in P, k in K : elig[i, j, k] = 0}: x[i, j, k] = 0;\n";
    s += "con precedence{i in J, j in P : j < nops[i]}: s[i, j+1] >= s[i, j] + sum{k in K}(p[i, j, k]*x[i, j, k]);\n";
    let pair = "a in J, u in P, b in J, v in P, k in K : a < b and elig[a, u, k] = 1 and elig[b, v, k] = 1";
    let both = "M*(2 - x[a, u, k] - x[b, v, k])";
    let _ = writeln!(s, "con order_a{{{pair}}}: s[a, u] + p[a, u, k] <= s[b, v] + M*(1 - y[a, u, b, v, k]) + {both};");
    let _ = writeln!(s, "con order_b{{{pair}}}: s[b, v] + p[b, v, k] <= s[a, u] + M*y[a, u, b, v, k] + {both};");
    s += "con makespan{i in J, j in P : j = nops[i]}: Cmax >= s[i, j] + sum{k in K}(p[i, j, k]*x[i, j, k]);\n";
    if windows {
        let q = "i in J, j in P, k in K, w in W : elig[i, j, k] = 1 and w <= nwin[k]";
        let _ = writeln!(
            s,
            "con window_before{{{q}}}: s[i, j] + p[i, j, k] <= wstart[k, w] + M*(1 - z[i, j, k, w]) + M*(1 - x[i, j, k]);"
        );
        let _ = writeln!(s, "con window_after{{{q}}}: s[i, j] >= wend[k, w] - M*z[i, j, k, w] - M*(1 - x[i, j, k]);");
    }
    s += "min obj: Cmax;\n";
    s
}

fn rename_alt(ast: &ModelAst) -> ModelAst {
    let lex = alt_lexicon();
    rename_symbols(ast, &|n| lex.get(n).map_or_else(|| n.to_string(), |a| a.to_string()))
}

/// MILP model minimizing makespan. Capacity uses pairwise ordering
/// binaries; the unavailability variant adds the before/after window
/// pair per (operation, machine, window). The alternate vocabulary is
/// used for `AltTerms` or an instance with the alternate profile.
pub fn build_fjsp_model(inst: &FjspInstance, variant: Variant) -> Result<ModelAst, FjspError> {
    inst.validate()?;
    if variant == Variant::Unavailability && inst.windows.is_empty() {
        return Err(FjspError::MissingWindows);
    }
    let src = standard_source(inst, variant == Variant::Unavailability);
    let ast = parse_model(&src).map_err(|e| FjspError::Invalid(e.to_string()))?;
    Ok(if variant == Variant::AltTerms || inst.profile == Profile::Alternate { rename_alt(&ast) } else { ast })
}

pub fn fjsp_source(inst: &FjspInstance, variant: Variant) -> Result<String, FjspError> {
    let ast = build_fjsp_model(inst, variant)?;
    emit_model(&ast, Dialect::Canonical).map_err(|e| FjspError::Invalid(e.to_string()))
}

/// Card name and the standard symbol it describes.
const CARD_TERMS: [(&str, &str, EntityKind); 9] = [
    ("job", "J", EntityKind::IndexSet),
    ("operation", "P", EntityKind::IndexSet),
    ("machine", "K", EntityKind::IndexSet),
    ("processing time", "p", EntityKind::Parameter),
    ("machine assignment", "x", EntityKind::DecisionVariable),
    ("start time", "s", EntityKind::DecisionVariable),
    ("makespan", "Cmax", EntityKind::DecisionVariable),
    ("unavailability window", "W", EntityKind::IndexSet),
    ("window indicator", "z", EntityKind::DecisionVariable),
];

/// Concept cards in standard vocabulary, hinted at the symbols the given
/// vocabulary uses.
pub fn fjsp_cards(profile: Profile, windows: bool) -> Vec<ConceptCard> {
    let lex = alt_lexicon();
    CARD_TERMS
        .iter()
        .filter(|(_, sym, _)| windows || !matches!(*sym, "W" | "z"))
        .map(|(name, sym, kind)| {
            let symbol = match profile {
                Profile::Standard => sym,
                Profile::Alternate => lex[sym],
            };
            ConceptCard::new(name, *kind, &format!("Flexible job shop {name}."), "").hint(symbol)
        })
        .collect()
}

pub fn build_fjsp_kg(inst: &FjspInstance, variant: Variant) -> Result<KnowledgeGraph, FjspError> {
    let ast = build_fjsp_model(inst, variant)?;
    let profile = if variant == Variant::AltTerms { Profile::Alternate } else { inst.profile };
    let mut g = KnowledgeGraph::new();
    let table = crate::model_dsl::extract_symbols(&ast);
    g.ingest_model(&ast, &table).map_err(|e| FjspError::Invalid(e.to_string()))?;
    g.ingest_concept_cards(&fjsp_cards(profile, variant == Variant::Unavailability))
        .map_err(|e| FjspError::Invalid(e.to_string()))?;
    g.align();
    Ok(g)
}

/// Code symbol to standard symbol, read off the alignment links of the
/// standard-vocabulary cards.
pub fn lexicon_from_graph(g: &KnowledgeGraph) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for e in g.edges().into_iter().filter(|e| e.kind == EdgeKind::AlignsTo) {
        let (Some(card), Some(code)) = (g.entity(&e.src), g.entity(&e.dst)) else { continue };
        if let Some((_, sym, _)) = CARD_TERMS.iter().find(|(n, _, _)| *n == card.name) {
            out.insert(code.name.clone(), sym.to_string());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use crate::codegen::validate;
    use crate::model_dsl::eval::{Assignment, Evaluator};
    use crate::par::Exec;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn assignment(inst: &FjspInstance, sol: &FjspSolution, order: &BTreeMap<(usize, usize, usize, usize, usize), u8>) -> Assignment {
        let mut a = Assignment::new();
        for (i, job) in inst.jobs.iter().enumerate() {
            for j in 0..job.len() {
                let ix = |k: usize| vec![i as i64 + 1, j as i64 + 1, k as i64];
                for k in 1..=inst.n_machines {
                    a.entry("x".into()).or_default().insert(ix(k), f64::from(sol.x[i][j][k - 1]));
                    for (w, z) in sol.z[i][j][k - 1].iter().enumerate() {
                        let mut zx = ix(k);
                        zx.push(w as i64 + 1);
                        a.entry("z".into()).or_default().insert(zx, f64::from(*z));
                    }
                }
                a.entry("s".into()).or_default().insert(vec![i as i64 + 1, j as i64 + 1], sol.s[i][j]);
            }
        }
        for ((a1, u, b, v, k), y) in order {
            a.entry("y".into()).or_default().insert(
                vec![*a1 as i64 + 1, *u as i64 + 1, *b as i64 + 1, *v as i64 + 1, *k as i64],
                f64::from(*y),
            );
        }
        a.entry("Cmax".into()).or_default().insert(vec![], sol.makespan);
        a
    }

    /// y = 1 when (a, u) runs before (b, v) on a shared machine.
    fn orders(inst: &FjspInstance, opt: &FjspOptimum) -> BTreeMap<(usize, usize, usize, usize, usize), u8> {
        let mut out = BTreeMap::new();
        for a in 0..inst.n_jobs {
            for b in a + 1..inst.n_jobs {
                for u in 0..inst.jobs[a].len() {
                    for v in 0..inst.jobs[b].len() {
                        let k = opt.machine[a][u];
                        if k == opt.machine[b][v] {
                            out.insert((a, u, b, v, k), u8::from(opt.start[a][u] < opt.start[b][v]));
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn listing3_pair() {
        let inst = parse_fjs("1 1\n1 1 1 3\n").unwrap().with_windows(vec![Window { machine: 1, w_start: 2, w_end: 5 }]).unwrap();
        let src = fjsp_source(&inst, Variant::Unavailability).unwrap();
        assert!(src.contains("s[i,j] + p[i,j,k] <= wstart[k,w] + M*(1 - z[i,j,k,w]) + M*(1 - x[i,j,k])"), "{src}");
        assert!(src.contains("s[i,j] >= wend[k,w] - M*z[i,j,k,w] - M*(1 - x[i,j,k])"));
        assert!(src.contains("param M = 8;"));
        assert_eq!(build_fjsp_model(&parse_fjs("1 1\n1 1 1 3\n").unwrap(), Variant::Unavailability), Err(FjspError::MissingWindows));
    }

    #[test]
    fn alt_terms_is_a_renaming() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let inst = random_instance(&mut rng, 3, 3, 1..=3, 2, 9);
        let base = build_fjsp_model(&inst, Variant::Baseline).unwrap();
        let alt = build_fjsp_model(&inst, Variant::AltTerms).unwrap();
        assert_ne!(base, alt);
        let inverse: BTreeMap<&str, &str> = alt_lexicon().into_iter().map(|(a, b)| (b, a)).collect();
        let back = rename_symbols(&alt, &|n| inverse.get(n).map_or_else(|| n.to_string(), |s| s.to_string()));
        assert_eq!(back, base);
    }

    #[test]
    fn alignment_recovers_vocabulary() {
        let inst = parse_fjs("2 2\n1 1 1 3\n2 1 2 2 1 1 1\n").unwrap();
        let g = build_fjsp_kg(&inst, Variant::AltTerms).unwrap();
        let got = lexicon_from_graph(&g);
        let lex = alt_lexicon();
        assert_eq!(got.len(), 7);
        for (code, std) in &got {
            assert_eq!(lex[std.as_str()], code);
        }
    }

    #[test]
    fn off_by_one_passes_validation_but_not_evaluation() {
        let inst = parse_fjs("1 1\n2 1 1 2 1 1 3\n").unwrap();
        let src = fjsp_source(&inst, Variant::Baseline).unwrap();
        let bad = src.replace("j < nops[i]", "j <= nops[i]");
        assert_ne!(bad, src);
        assert!(validate(&bad, &KnowledgeGraph::new()).is_ok());
        let opt = brute_force_optimum(&inst, Exec::Sequential).unwrap();
        let a = assignment(&inst, &opt.solution(&inst), &orders(&inst, &opt));
        let good = parse_model(&src).unwrap();
        assert!(Evaluator::new(&good).unwrap().violations(&a, 1e-9).unwrap().is_empty());
        let bad = parse_model(&bad).unwrap();
        // reads past the last operation: either an error or a violated row
        match Evaluator::new(&bad).unwrap().violations(&a, 1e-9) {
            Ok(v) => assert!(!v.is_empty()),
            Err(_) => {}
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn emitted_models_validate(seed in any::<u64>(), windows in any::<bool>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let inst = random_instance(&mut rng, 3, 3, 1..=3, 3, 9);
            let w = random_windows(&mut rng, &inst, 2, 20);
            let inst = inst.with_windows(w).unwrap();
            for v in [Variant::Baseline, Variant::AltTerms, Variant::Unavailability] {
                if v == Variant::Unavailability && (!windows || inst.windows.is_empty()) {
                    continue;
                }
                let src = fjsp_source(&inst, v).unwrap();
                let r = validate(&src, &KnowledgeGraph::new());
                prop_assert!(r.is_ok(), "{:?}", r);
            }
        }

        /// The oracle's optimum with its ordering and window indicators
        /// satisfies every emitted constraint, so M is large enough.
        #[test]
        fn big_m_admits_optimal_schedules(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let inst = random_instance(&mut rng, 2, 2, 1..=3, 2, 7);
            let w = random_windows(&mut rng, &inst, 2, 15);
            prop_assume!(!w.is_empty());
            let inst = inst.with_windows(w).unwrap();
            let opt = brute_force_optimum(&inst, Exec::Sequential).unwrap();
            let sol = opt.solution(&inst);
            let ast = build_fjsp_model(&inst, Variant::Unavailability).unwrap();
            let ev = Evaluator::new(&ast).unwrap();
            let viol = ev.violations(&assignment(&inst, &sol, &orders(&inst, &opt)), 1e-9).unwrap();
            prop_assert!(viol.is_empty(), "{:?}", viol);
            prop_assert_eq!(ev.objective(&assignment(&inst, &sol, &orders(&inst, &opt))).unwrap(), opt.makespan as f64);
        }
    }
}
