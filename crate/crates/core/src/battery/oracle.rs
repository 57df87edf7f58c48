use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{fixed_terms, omega, quantities, reduction, BatteryCaseData, BatteryError, DrEvent, Flat, Schedule};
use crate::par::{fold_range, Exec};

/// Enumeration bound on machine-slot bits.
pub const MAX_BITS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Optimum {
    Optimal { schedule: Schedule, value: f64 },
    Infeasible,
}

/// Exhaustive search over every on/off schedule. With an event, schedules
/// failing the load-reduction constraint are discarded and the incentive
/// is added to the objective. Ties go to the lexicographically smallest
/// schedule in (branch, machine, slot) order. `buffers` supplies fixed
/// level series for buffer-valued product quantities.
pub fn brute_force_optimum(
    data: &BatteryCaseData,
    event: Option<&DrEvent>,
    buffers: &BTreeMap<String, Vec<i64>>,
    exec: Exec,
) -> Result<Optimum, BatteryError> {
    data.validate()?;
    if let Some(ev) = event {
        ev.validate(data)?;
    }
    let n = data.machine_count() * data.slots;
    if n > MAX_BITS {
        return Err(BatteryError::TooLarge { bits: n, max: MAX_BITS });
    }
    let fixed = fixed_terms(data, &quantities(data, buffers)?);
    let flat = Flat::new(data);
    let slots = data.slots;
    // position p of the flattened schedule is bit n-1-p, so mask order is
    // lexicographic schedule order
    let bit = |mask: u64, m: usize, i: usize| ((mask >> (n - 1 - (m * slots + i))) & 1) as u8;

    let best = fold_range(
        exec,
        1u64 << n,
        1 << 12,
        None::<(f64, u64)>,
        |acc, mask| {
            let y = |m: usize, i: usize| bit(mask, m, i);
            if let Some(ev) = event {
                if reduction(ev, &flat, &y) < ev.delta_l_min {
                    return acc;
                }
            }
            let mut v = fixed - super::energy_cost(data, &flat, &y);
            if let Some(ev) = event {
                v += omega(ev, &flat, &y);
            }
            better(acc, Some((v, mask)))
        },
        better,
    );
    Ok(match best {
        None => Optimum::Infeasible,
        Some((value, mask)) => {
            let mut schedule = data.empty_schedule();
            let mut m = 0;
            for row in schedule.y.iter_mut() {
                for ys in row.iter_mut() {
                    for (i, v) in ys.iter_mut().enumerate() {
                        *v = bit(mask, m, i);
                    }
                    m += 1;
                }
            }
            schedule.buffers = buffers.clone();
            Optimum::Optimal { schedule, value }
        }
    })
}

fn better(a: Option<(f64, u64)>, b: Option<(f64, u64)>) -> Option<(f64, u64)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn small() -> BatteryCaseData {
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

    /// All schedules listed explicitly, scored with the public evaluators.
    fn reenumerate(data: &BatteryCaseData, ev: Option<&DrEvent>) -> Option<(f64, Schedule)> {
        let n = data.machine_count() * data.slots;
        let mut best: Option<(f64, Schedule)> = None;
        for mask in 0..(1u64 << n) {
            let mut s = data.empty_schedule();
            let mut p = 0;
            for row in s.y.iter_mut().flatten() {
                for v in row.iter_mut() {
                    *v = ((mask >> (n - 1 - p)) & 1) as u8;
                    p += 1;
                }
            }
            let v = match ev {
                Some(e) => {
                    if !check_load_reduction(data, &s, e).unwrap() {
                        continue;
                    }
                    objective_dr(data, &s, e).unwrap()
                }
                None => objective_baseline(data, &s).unwrap(),
            };
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, s));
            }
        }
        best
    }

    #[test]
    fn tiny_no_event() {
        let d = small();
        let got = brute_force_optimum(&d, None, &BTreeMap::new(), Exec::Sequential).unwrap();
        // production is fixed, so running costs only energy: all off wins
        let Optimum::Optimal { schedule, value } = got else { panic!() };
        assert_eq!(schedule.y, vec![vec![vec![0, 0]]]);
        assert_eq!(value, 7.0);
    }

    #[test]
    fn infeasible_when_reduction_unreachable() {
        let d = small();
        let ev = DrEvent { t_star: vec![1, 2], lambda_rate: 0.5, b_ref: vec![1.0, 1.0], delta_l_min: 5.0 };
        assert_eq!(brute_force_optimum(&d, Some(&ev), &BTreeMap::new(), Exec::Parallel).unwrap(), Optimum::Infeasible);
    }

    #[test]
    fn huge_rate_switches_event_slots_off() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut inst = toy_instance(&mut rng, 3, 4);
        for m in &mut inst.data.branches[0].machines {
            m.p_on = m.p_off + 1.0;
        }
        let mut ev = inst.event.unwrap();
        ev.lambda_rate = 1e6;
        ev.delta_l_min = f64::NEG_INFINITY;
        let Optimum::Optimal { schedule, .. } =
            brute_force_optimum(&inst.data, Some(&ev), &BTreeMap::new(), Exec::Parallel).unwrap()
        else {
            panic!()
        };
        for row in &schedule.y[0] {
            for t in &ev.t_star {
                assert_eq!(row[t - 1], 0);
            }
        }
    }

    #[test]
    fn too_large() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let inst = toy_instance(&mut rng, 3, 7);
        assert_eq!(
            brute_force_optimum(&inst.data, None, &BTreeMap::new(), Exec::Sequential),
            Err(BatteryError::TooLarge { bits: 21, max: MAX_BITS })
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn optimum_matches_reenumeration(seed in any::<u64>(), with_event in any::<bool>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let inst = toy_instance(&mut rng, 2, 4);
            let ev = inst.event.as_ref().filter(|_| with_event);
            let got = brute_force_optimum(&inst.data, ev, &BTreeMap::new(), Exec::Parallel).unwrap();
            let seq = brute_force_optimum(&inst.data, ev, &BTreeMap::new(), Exec::Sequential).unwrap();
            prop_assert_eq!(&got, &seq);
            match (got, reenumerate(&inst.data, ev)) {
                (Optimum::Infeasible, None) => {}
                (Optimum::Optimal { schedule, value }, Some((v, s))) => {
                    prop_assert!((value - v).abs() < 1e-9);
                    prop_assert_eq!(schedule, s);
                }
                (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
            }
        }
    }
}
