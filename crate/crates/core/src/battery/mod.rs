//! Lithium-ion battery module assembly line under incentive-based demand
//! response: instance data, profit evaluators, the load-reduction and
//! starvation checks, the MiniModel formulation, the knowledge-graph
//! builder and a brute-force optimizer for toy instances.

mod model;
mod oracle;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use model::{battery_cards, battery_corpus, battery_model, battery_source, build_battery_kg, load_reduction_members, names};
pub use oracle::{brute_force_optimum, Optimum, MAX_BITS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BatteryError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no level series for buffer `{0}`")]
    MissingBufferSeries(String),
    #[error("invalid instance: {0}")]
    InvalidData(String),
    #[error("{bits} schedule bits exceed the enumeration bound of {max}")]
    TooLarge { bits: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Value(f64),
    /// Level of a buffer in the last slot.
    BufferFinal(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Product {
    pub name: String,
    /// r_k, $/unit
    pub price: f64,
    pub quantity: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub name: String,
    /// c_k, $/unit
    pub cost: f64,
    /// n_k, units
    pub consumed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Machine {
    pub name: String,
    /// kWh per slot when running
    pub p_on: f64,
    /// kWh per slot in low-power mode
    pub p_off: f64,
    #[serde(default)]
    pub upstream: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    pub name: String,
    pub machines: Vec<Machine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryCaseData {
    pub products: Vec<Product>,
    pub materials: Vec<Material>,
    pub slots: usize,
    pub minutes_per_slot: u32,
    pub slots_per_hour: usize,
    pub branches: Vec<Branch>,
    /// $/kWh per slot
    pub price: Vec<f64>,
    #[serde(default)]
    pub buffers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrEvent {
    /// 1-based slot indices
    pub t_star: Vec<usize>,
    /// $/kWh
    pub lambda_rate: f64,
    /// kWh per event slot, aligned with `t_star`
    pub b_ref: Vec<f64>,
    /// kWh over the event window
    pub delta_l_min: f64,
}

/// y[branch][machine][slot] plus optional buffer level series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub y: Vec<Vec<Vec<u8>>>,
    #[serde(default)]
    pub buffers: BTreeMap<String, Vec<i64>>,
}

/// Instance file: case data plus an optional event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryInstance {
    pub data: BatteryCaseData,
    #[serde(default)]
    pub event: Option<DrEvent>,
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

/// Repeat each hourly price over its slots.
pub fn expand_hourly(hourly: &[f64], slots_per_hour: usize) -> Vec<f64> {
    hourly.iter().flat_map(|p| std::iter::repeat_n(*p, slots_per_hour)).collect()
}

/// Slots `(h-1)*sph+1 ..= h*sph` for each 1-based hour in `first..=last`.
pub fn hour_slots(first: usize, last: usize, slots_per_hour: usize) -> Vec<usize> {
    ((first - 1) * slots_per_hour + 1..=last * slots_per_hour).collect()
}

impl BatteryCaseData {
    pub fn machines(&self) -> impl Iterator<Item = &Machine> {
        self.branches.iter().flat_map(|b| b.machines.iter())
    }

    pub fn machine_count(&self) -> usize {
        self.branches.iter().map(|b| b.machines.len()).sum()
    }

    pub fn validate(&self) -> Result<(), BatteryError> {
        let bad = |m: String| Err(BatteryError::InvalidData(m));
        if self.price.len() != self.slots {
            return Err(BatteryError::DimensionMismatch(format!(
                "{} prices for {} slots",
                self.price.len(),
                self.slots
            )));
        }
        if self.slots == 0 || self.slots_per_hour == 0 {
            return bad("slots and slots_per_hour must be positive".into());
        }
        if self.price.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return bad("prices must be finite and non-negative".into());
        }
        let mut names: Vec<&str> = Vec::new();
        for m in self.machines() {
            if !(m.p_on.is_finite() && m.p_off.is_finite() && m.p_off >= 0.0 && m.p_on >= m.p_off) {
                return bad(format!("machine {} needs 0 <= p_off <= p_on", m.name));
            }
            for u in &m.upstream {
                if !self.buffers.contains(u) {
                    return bad(format!("machine {} reads undeclared buffer {u}", m.name));
                }
            }
            names.push(&m.name);
        }
        for p in &self.products {
            if let Quantity::BufferFinal(b) = &p.quantity {
                if !self.buffers.contains(b) {
                    return bad(format!("product {} reads undeclared buffer {b}", p.name));
                }
            }
            names.push(&p.name);
        }
        names.extend(self.materials.iter().map(|m| m.name.as_str()));
        names.extend(self.buffers.iter().map(String::as_str));
        for n in &names {
            if !is_ident(n) {
                return bad(format!("`{n}` is not an identifier"));
            }
        }
        let mut sorted = names.clone();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return bad(format!("name `{}` used twice", w[0]));
        }
        Ok(())
    }

    /// All-off schedule with matching dimensions.
    pub fn empty_schedule(&self) -> Schedule {
        Schedule {
            y: self.branches.iter().map(|b| vec![vec![0; self.slots]; b.machines.len()]).collect(),
            buffers: BTreeMap::new(),
        }
    }
}

impl DrEvent {
    pub fn validate(&self, data: &BatteryCaseData) -> Result<(), BatteryError> {
        if self.b_ref.len() != self.t_star.len() {
            return Err(BatteryError::DimensionMismatch(format!(
                "{} baseline values for {} event slots",
                self.b_ref.len(),
                self.t_star.len()
            )));
        }
        if let Some(t) = self.t_star.iter().find(|t| **t == 0 || **t > data.slots) {
            return Err(BatteryError::DimensionMismatch(format!("event slot {t} outside 1..={}", data.slots)));
        }
        if !(self.lambda_rate.is_finite() && self.lambda_rate >= 0.0) {
            return Err(BatteryError::InvalidData("lambda_rate must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Contiguous event window as an inclusive slot range.
    pub fn window(&self) -> Option<(usize, usize)> {
        let lo = *self.t_star.first()?;
        self.t_star.iter().enumerate().all(|(k, t)| *t == lo + k).then(|| (lo, lo + self.t_star.len() - 1))
    }
}

/// Energy of one machine in one slot.
pub fn lambda_energy(p_on: f64, p_off: f64, y: u8) -> f64 {
    let y = f64::from(y);
    p_on * y + p_off * (1.0 - y)
}

/// Flat view used by every evaluator: machine order follows branches.
pub(crate) struct Flat<'a> {
    pub machines: Vec<&'a Machine>,
}

impl<'a> Flat<'a> {
    pub fn new(data: &'a BatteryCaseData) -> Self {
        Flat { machines: data.machines().collect() }
    }

    /// Σ_ij Λ_ij(τ) for 1-based slot `t`.
    pub fn slot_energy(&self, t: usize, y: &impl Fn(usize, usize) -> u8) -> f64 {
        let mut s = 0.0;
        for (m, mach) in self.machines.iter().enumerate() {
            s += lambda_energy(mach.p_on, mach.p_off, y(m, t - 1));
        }
        s
    }
}

fn check_schedule(data: &BatteryCaseData, s: &Schedule) -> Result<(), BatteryError> {
    let ok = s.y.len() == data.branches.len()
        && s.y.iter().zip(&data.branches).all(|(row, b)| {
            row.len() == b.machines.len() && row.iter().all(|slots| slots.len() == data.slots)
        });
    if !ok {
        return Err(BatteryError::DimensionMismatch("schedule shape differs from the line".into()));
    }
    if s.y.iter().flatten().flatten().any(|v| *v > 1) {
        return Err(BatteryError::DimensionMismatch("schedule entries must be 0 or 1".into()));
    }
    if data.price.len() != data.slots {
        return Err(BatteryError::DimensionMismatch("price series length".into()));
    }
    Ok(())
}

fn flat_y(s: &Schedule) -> Vec<&Vec<u8>> {
    s.y.iter().flatten().collect()
}

pub(crate) fn quantities(data: &BatteryCaseData, buffers: &BTreeMap<String, Vec<i64>>) -> Result<Vec<f64>, BatteryError> {
    data.products
        .iter()
        .map(|p| match &p.quantity {
            Quantity::Value(v) => Ok(*v),
            Quantity::BufferFinal(b) => buffers
                .get(b)
                .and_then(|s| s.last())
                .map(|v| *v as f64)
                .ok_or_else(|| BatteryError::MissingBufferSeries(b.clone())),
        })
        .collect()
}

/// Σ r_k q_k − Σ c_k n_k
pub(crate) fn fixed_terms(data: &BatteryCaseData, q: &[f64]) -> f64 {
    let mut revenue = 0.0;
    for (p, qk) in data.products.iter().zip(q) {
        revenue += p.price * qk;
    }
    let mut materials = 0.0;
    for m in &data.materials {
        materials += m.cost * m.consumed;
    }
    revenue - materials
}

pub(crate) fn energy_cost(data: &BatteryCaseData, flat: &Flat, y: &impl Fn(usize, usize) -> u8) -> f64 {
    let mut cost = 0.0;
    for t in 1..=data.slots {
        cost += data.price[t - 1] * flat.slot_energy(t, y);
    }
    cost
}

pub(crate) fn omega(event: &DrEvent, flat: &Flat, y: &impl Fn(usize, usize) -> u8) -> f64 {
    let mut base = 0.0;
    let mut used = 0.0;
    for (t, b) in event.t_star.iter().zip(&event.b_ref) {
        base += b;
        used += flat.slot_energy(*t, y);
    }
    event.lambda_rate * (base - used)
}

pub(crate) fn reduction(event: &DrEvent, flat: &Flat, y: &impl Fn(usize, usize) -> u8) -> f64 {
    let mut total = 0.0;
    for (t, b) in event.t_star.iter().zip(&event.b_ref) {
        total += b - flat.slot_energy(*t, y);
    }
    total
}

/// Profit without an event.
pub fn objective_baseline(data: &BatteryCaseData, sched: &Schedule) -> Result<f64, BatteryError> {
    check_schedule(data, sched)?;
    let q = quantities(data, &sched.buffers)?;
    let flat = Flat::new(data);
    let ys = flat_y(sched);
    let y = |m: usize, i: usize| ys[m][i];
    Ok(fixed_terms(data, &q) - energy_cost(data, &flat, &y))
}

/// Incentive payment; negative when event consumption exceeds baseline.
pub fn incentive_payment(data: &BatteryCaseData, sched: &Schedule, event: &DrEvent) -> Result<f64, BatteryError> {
    check_schedule(data, sched)?;
    event.validate(data)?;
    let flat = Flat::new(data);
    let ys = flat_y(sched);
    Ok(omega(event, &flat, &|m, i| ys[m][i]))
}

/// Profit under the event: baseline profit plus the incentive payment.
pub fn objective_dr(data: &BatteryCaseData, sched: &Schedule, event: &DrEvent) -> Result<f64, BatteryError> {
    check_schedule(data, sched)?;
    event.validate(data)?;
    let q = quantities(data, &sched.buffers)?;
    let flat = Flat::new(data);
    let ys = flat_y(sched);
    let y = |m: usize, i: usize| ys[m][i];
    Ok(fixed_terms(data, &q) - energy_cost(data, &flat, &y) + omega(event, &flat, &y))
}

/// Σ_{τ∈T*} [B_ref(τ) − Σ Λ(τ)] ≥ ΔL_min
pub fn check_load_reduction(data: &BatteryCaseData, sched: &Schedule, event: &DrEvent) -> Result<bool, BatteryError> {
    check_schedule(data, sched)?;
    event.validate(data)?;
    let flat = Flat::new(data);
    let ys = flat_y(sched);
    Ok(reduction(event, &flat, &|m, i| ys[m][i]) >= event.delta_l_min)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarvationCheck {
    pub feasible: bool,
    /// (machine, 1-based slot)
    pub first_violation: Option<(String, usize)>,
}

/// A machine with upstream buffers is off in slot 1 and may run in slot
/// i ≥ 2 only if every upstream buffer held stock in slot i−1.
pub fn starvation_feasible(data: &BatteryCaseData, sched: &Schedule) -> Result<StarvationCheck, BatteryError> {
    check_schedule(data, sched)?;
    let ys = flat_y(sched);
    for (m, mach) in data.machines().enumerate() {
        if mach.upstream.is_empty() {
            continue;
        }
        let series: Vec<&Vec<i64>> = mach
            .upstream
            .iter()
            .map(|u| sched.buffers.get(u).ok_or_else(|| BatteryError::MissingBufferSeries(u.clone())))
            .collect::<Result<_, _>>()?;
        for t in 1..=data.slots {
            let ok = if t == 1 {
                ys[m][0] == 0
            } else {
                series.iter().all(|b| b.get(t - 2).is_some_and(|lvl| i64::from(ys[m][t - 1]) <= *lvl))
            };
            if !ok {
                return Ok(StarvationCheck { feasible: false, first_violation: Some((mach.name.clone(), t)) });
            }
        }
    }
    Ok(StarvationCheck { feasible: true, first_violation: None })
}

/// Reference line: a three-branch cell/module subassembly feeding a
/// four-stage main line, 144 ten-minute slots, a two-hour event at
/// hours 16-17. Powers and prices are synthetic.
pub fn reference_instance() -> BatteryInstance {
    let sph = 6;
    let m = |name: &str, kw_on: f64, kw_off: f64, up: &[&str]| Machine {
        name: name.into(),
        p_on: kw_on / sph as f64,
        p_off: kw_off / sph as f64,
        upstream: up.iter().map(|s| s.to_string()).collect(),
    };
    let branches = vec![
        Branch { name: "main".into(), machines: vec![
            m("m01", 18.0, 3.0, &["B13", "B22", "B31"]),
            m("m02", 12.0, 2.0, &["B01"]),
            m("m03", 15.0, 2.5, &["B02"]),
            m("m04", 9.0, 1.5, &["B03"]),
        ] },
        Branch { name: "cells".into(), machines: vec![
            m("m11", 24.0, 4.0, &[]),
            m("m12", 16.0, 2.0, &["B11"]),
            m("m13", 14.0, 2.0, &["B12"]),
        ] },
        Branch { name: "modules".into(), machines: vec![m("m21", 20.0, 3.0, &[]), m("m22", 11.0, 1.5, &["B21"])] },
        Branch { name: "housing".into(), machines: vec![m("m31", 13.0, 2.0, &[])] },
    ];
    let hourly = [
        0.31, 0.29, 0.28, 0.27, 0.27, 0.29, 0.34, 0.41, 0.47, 0.52, 0.55, 0.56, 0.55, 0.54, 0.55, 0.58, 0.61, 0.63,
        0.60, 0.53, 0.46, 0.40, 0.36, 0.33,
    ];
    let buffers = ["B01", "B02", "B03", "B04", "B11", "B12", "B13", "B21", "B22", "B31"];
    let data = BatteryCaseData {
        products: vec![Product { name: "BATTERY".into(), price: 5.0, quantity: Quantity::BufferFinal("B04".into()) }],
        materials: vec![Material { name: "CELLS".into(), cost: 0.8, consumed: 900.0 }],
        slots: 144,
        minutes_per_slot: 10,
        slots_per_hour: sph,
        branches,
        price: expand_hourly(&hourly, sph),
        buffers: buffers.iter().map(|s| s.to_string()).collect(),
    };
    let t_star = hour_slots(16, 17, sph);
    let b_ref = vec![14.0; t_star.len()];
    BatteryInstance { data, event: Some(DrEvent { t_star, lambda_rate: 0.54, b_ref, delta_l_min: 10.0 }) }
}

/// Single-branch line of `machines` machines over `slots` slots with
/// seeded random powers and prices; small enough for enumeration when
/// `machines * slots <= MAX_BITS`.
pub fn toy_instance(rng: &mut impl rand::Rng, machines: usize, slots: usize) -> BatteryInstance {
    let ms = (0..machines)
        .map(|i| {
            let p_off = f64::from(rng.gen_range(0..8)) / 4.0;
            Machine {
                name: format!("m{:02}", i + 1),
                p_on: p_off + f64::from(rng.gen_range(0..16)) / 4.0,
                p_off,
                upstream: Vec::new(),
            }
        })
        .collect();
    let data = BatteryCaseData {
        products: vec![Product { name: "UNIT".into(), price: f64::from(rng.gen_range(1..20)), quantity: Quantity::Value(2.0) }],
        materials: vec![Material { name: "PART".into(), cost: 1.0, consumed: f64::from(rng.gen_range(0..5)) }],
        slots,
        minutes_per_slot: 60,
        slots_per_hour: 1,
        branches: vec![Branch { name: "line".into(), machines: ms }],
        price: (0..slots).map(|_| f64::from(rng.gen_range(0..40)) / 100.0).collect(),
        buffers: Vec::new(),
    };
    let lo = rng.gen_range(1..=slots);
    let hi = rng.gen_range(lo..=slots);
    let t_star: Vec<usize> = (lo..=hi).collect();
    let b_ref = t_star.iter().map(|_| f64::from(rng.gen_range(0..12)) / 2.0).collect();
    let event = DrEvent {
        t_star,
        lambda_rate: f64::from(rng.gen_range(0..100)) / 100.0,
        b_ref,
        delta_l_min: f64::from(rng.gen_range(0..6)),
    };
    BatteryInstance { data, event: Some(event) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn one_machine() -> BatteryCaseData {
        BatteryCaseData {
            products: vec![Product { name: "P".into(), price: 5.0, quantity: Quantity::Value(2.0) }],
            materials: vec![Material { name: "M".into(), cost: 1.0, consumed: 3.0 }],
            slots: 2,
            minutes_per_slot: 60,
            slots_per_hour: 1,
            branches: vec![Branch {
                name: "b".into(),
                machines: vec![Machine { name: "m1".into(), p_on: 2.0, p_off: 0.0, upstream: vec![] }],
            }],
            price: vec![0.1, 0.2],
            buffers: vec![],
        }
    }

    fn sched(y: &[u8]) -> Schedule {
        Schedule { y: vec![vec![y.to_vec()]], buffers: BTreeMap::new() }
    }

    /// Term-by-term evaluation written out longhand.
    fn direct_baseline(d: &BatteryCaseData, s: &Schedule) -> f64 {
        let revenue: f64 = d
            .products
            .iter()
            .map(|p| p.price * match p.quantity { Quantity::Value(v) => v, _ => unreachable!() })
            .sum();
        let mats: f64 = d.materials.iter().map(|m| m.cost * m.consumed).sum();
        let mut energy = 0.0;
        for t in 0..d.slots {
            let mut load = 0.0;
            for (b, br) in d.branches.iter().enumerate() {
                for (j, m) in br.machines.iter().enumerate() {
                    load += if s.y[b][j][t] == 1 { m.p_on } else { m.p_off };
                }
            }
            energy += d.price[t] * load;
        }
        revenue - mats - energy
    }

    #[test]
    fn lambda_energy_cases() {
        assert_eq!(lambda_energy(2.0, 0.5, 1), 2.0);
        assert_eq!(lambda_energy(2.0, 0.5, 0), 0.5);
        assert_eq!(lambda_energy(1.25, 1.25, 0), lambda_energy(1.25, 1.25, 1));
    }

    #[test]
    fn baseline_small_case() {
        let d = one_machine();
        let v = objective_baseline(&d, &sched(&[1, 0])).unwrap();
        assert!((v - 6.8).abs() < 1e-12);
        assert!((direct_baseline(&d, &sched(&[1, 0])) - 6.8).abs() < 1e-12);
    }

    #[test]
    fn baseline_degenerate() {
        let mut d = one_machine();
        d.price = vec![0.0, 0.0];
        d.branches[0].machines[0].p_on = 0.0;
        assert_eq!(objective_baseline(&d, &sched(&[1, 1])).unwrap(), 10.0 - 3.0);
        d.products.clear();
        d.materials.clear();
        assert_eq!(objective_baseline(&d, &sched(&[0, 0])).unwrap(), 0.0);
    }

    #[test]
    fn incentive_cases() {
        let d = one_machine();
        let ev = DrEvent { t_star: vec![2], lambda_rate: 0.54, b_ref: vec![1.0], delta_l_min: 0.0 };
        let v = objective_dr(&d, &sched(&[1, 0]), &ev).unwrap();
        assert!((v - 7.34).abs() < 1e-12);
        let at_baseline = DrEvent { t_star: vec![1], lambda_rate: 0.54, b_ref: vec![2.0], delta_l_min: 0.0 };
        assert_eq!(incentive_payment(&d, &sched(&[1, 0]), &at_baseline).unwrap(), 0.0);
        let empty = DrEvent { t_star: vec![], lambda_rate: 0.54, b_ref: vec![], delta_l_min: 0.0 };
        assert_eq!(incentive_payment(&d, &sched(&[1, 1]), &empty).unwrap(), 0.0);
        assert_eq!(
            objective_dr(&d, &sched(&[1, 1]), &empty).unwrap(),
            objective_baseline(&d, &sched(&[1, 1])).unwrap()
        );
    }

    #[test]
    fn incentive_twelve_kwh() {
        // 100 kWh baseline over the window against 88 kWh consumed
        let mut d = one_machine();
        d.slots = 4;
        d.price = vec![0.0; 4];
        d.branches[0].machines[0].p_on = 22.0;
        let ev = DrEvent { t_star: vec![1, 2, 3, 4], lambda_rate: 0.54, b_ref: vec![25.0; 4], delta_l_min: 10.0 };
        let s = sched(&[1, 1, 1, 1]);
        assert!((incentive_payment(&d, &s, &ev).unwrap() - 6.48).abs() < 1e-12);
        assert!(check_load_reduction(&d, &s, &ev).unwrap());
    }

    #[test]
    fn load_reduction_boundary() {
        let mut d = one_machine();
        d.price = vec![0.0; 2];
        let ev = |b: f64| DrEvent { t_star: vec![1, 2], lambda_rate: 0.5, b_ref: vec![b, b], delta_l_min: 10.0 };
        let off = sched(&[0, 0]);
        assert!(check_load_reduction(&d, &off, &ev(6.0)).unwrap());
        assert!(!check_load_reduction(&d, &off, &ev(4.5)).unwrap());
        assert!(check_load_reduction(&d, &off, &ev(5.0)).unwrap());
    }

    #[test]
    fn dimension_errors() {
        let d = one_machine();
        assert!(matches!(objective_baseline(&d, &sched(&[1])), Err(BatteryError::DimensionMismatch(_))));
        let ev = DrEvent { t_star: vec![3], lambda_rate: 0.5, b_ref: vec![1.0], delta_l_min: 0.0 };
        assert!(matches!(objective_dr(&d, &sched(&[1, 0]), &ev), Err(BatteryError::DimensionMismatch(_))));
    }

    fn assembly() -> BatteryCaseData {
        let mut d = one_machine();
        d.branches[0].machines[0].name = "m01".into();
        d.branches[0].machines[0].upstream = vec!["B13".into(), "B22".into(), "B31".into()];
        d.buffers = vec!["B13".into(), "B22".into(), "B31".into()];
        d
    }

    #[test]
    fn starvation_rule() {
        let d = assembly();
        let mut s = sched(&[0, 1]);
        for b in ["B13", "B22", "B31"] {
            s.buffers.insert(b.into(), vec![1, 0]);
        }
        assert_eq!(starvation_feasible(&d, &s).unwrap(), StarvationCheck { feasible: true, first_violation: None });
        s.y[0][0] = vec![1, 0];
        assert_eq!(starvation_feasible(&d, &s).unwrap().first_violation, Some(("m01".into(), 1)));
        s.y[0][0] = vec![0, 1];
        s.buffers.insert("B22".into(), vec![0, 0]);
        assert_eq!(starvation_feasible(&d, &s).unwrap().first_violation, Some(("m01".into(), 2)));
        s.buffers.remove("B31");
        assert!(matches!(starvation_feasible(&d, &s), Err(BatteryError::MissingBufferSeries(_))));
        // no upstream buffers: vacuous
        assert!(starvation_feasible(&one_machine(), &sched(&[1, 1])).unwrap().feasible);
    }

    #[test]
    fn reference_instance_is_valid() {
        let inst = reference_instance();
        inst.data.validate().unwrap();
        let ev = inst.event.unwrap();
        ev.validate(&inst.data).unwrap();
        assert_eq!(ev.window(), Some((91, 102)));
        assert_eq!(inst.data.price.len(), 144);
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = reference_instance();
        let text = serde_json::to_string(&inst).unwrap();
        assert_eq!(serde_json::from_str::<BatteryInstance>(&text).unwrap(), inst);
    }

    fn random_sched(rng: &mut impl rand::Rng, d: &BatteryCaseData) -> Schedule {
        let mut s = d.empty_schedule();
        for row in s.y.iter_mut().flatten() {
            for v in row.iter_mut() {
                *v = rng.gen_range(0..=1);
            }
        }
        s
    }

    proptest! {
        #[test]
        fn decomposition_identity(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let inst = toy_instance(&mut rng, 3, 5);
            let ev = inst.event.unwrap();
            let s = random_sched(&mut rng, &inst.data);
            let base = objective_baseline(&inst.data, &s).unwrap();
            let dr = objective_dr(&inst.data, &s, &ev).unwrap();
            let om = incentive_payment(&inst.data, &s, &ev).unwrap();
            prop_assert!((dr - (base + om)).abs() <= 1e-12);
            let zero = DrEvent { lambda_rate: 0.0, ..ev.clone() };
            prop_assert_eq!(objective_dr(&inst.data, &s, &zero).unwrap(), base);
            let double = DrEvent { lambda_rate: 2.0 * ev.lambda_rate, ..ev.clone() };
            prop_assert_eq!(incentive_payment(&inst.data, &s, &double).unwrap(), 2.0 * om);
            prop_assert!((base - direct_baseline(&inst.data, &s)).abs() <= 1e-9);
        }

        #[test]
        fn switching_off_in_event_never_lowers_incentive(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let inst = toy_instance(&mut rng, 3, 5);
            let ev = inst.event.unwrap();
            let mut s = random_sched(&mut rng, &inst.data);
            let m = pick.index(3);
            let t = ev.t_star[pick.index(ev.t_star.len())] - 1;
            s.y[0][m][t] = 1;
            let on = incentive_payment(&inst.data, &s, &ev).unwrap();
            s.y[0][m][t] = 0;
            prop_assert!(incentive_payment(&inst.data, &s, &ev).unwrap() >= on);
        }
    }
}
