use std::ops::RangeInclusive;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};

use super::{Eligible, FjspInstance, Profile, Window};

/// Name, jobs and machines of the benchmark instances the synthetic
/// stand-ins mimic.
pub const BEHNKE_DIMS: [(&str, usize, usize); 5] = [
    ("Behnke1", 10, 20),
    ("Behnke3", 10, 20),
    ("Behnke8", 20, 20),
    ("Behnke10", 20, 20),
    ("Behnke15", 50, 20),
];

/// Random valid instance without windows.
pub fn random_instance(
    rng: &mut impl Rng,
    n_jobs: usize,
    n_machines: usize,
    ops: RangeInclusive<usize>,
    max_eligible: usize,
    max_time: u64,
) -> FjspInstance {
    let jobs = (0..n_jobs)
        .map(|_| {
            (0..rng.gen_range(ops.clone()))
                .map(|_| {
                    let k = rng.gen_range(1..=max_eligible.clamp(1, n_machines));
                    let mut ms: Vec<usize> = sample(rng, n_machines, k).into_iter().map(|m| m + 1).collect();
                    ms.sort_unstable();
                    ms.into_iter().map(|machine| Eligible { machine, time: rng.gen_range(1..=max_time) }).collect()
                })
                .collect()
        })
        .collect();
    FjspInstance { n_jobs, n_machines, jobs, windows: Vec::new(), profile: Profile::Standard }
}

/// Up to `max_per_machine` disjoint windows per machine inside `0..horizon`.
pub fn random_windows(rng: &mut impl Rng, inst: &FjspInstance, max_per_machine: usize, horizon: u64) -> Vec<Window> {
    let mut out = Vec::new();
    for machine in 1..=inst.n_machines {
        let mut t = 0;
        for _ in 0..rng.gen_range(0..=max_per_machine) {
            let w_start = t + rng.gen_range(0..=horizon / 2);
            let w_end = w_start + rng.gen_range(1..=(horizon / 3).max(1));
            if w_end > horizon {
                break;
            }
            out.push(Window { machine, w_start, w_end });
            t = w_end;
        }
    }
    out
}

/// Seeded synthetic instance with the dimensions of benchmark `idx` of
/// [`BEHNKE_DIMS`]: five operations per job, two to five eligible machines
/// per operation, processing times 1..=20.
pub fn behnke_like(idx: usize) -> FjspInstance {
    let (_, jobs, machines) = BEHNKE_DIMS[idx];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xB0_0000 + idx as u64);
    let mut inst = random_instance(&mut rng, jobs, machines, 5..=5, 5, 20);
    for op in inst.jobs.iter_mut().flatten() {
        while op.len() < 2 {
            let m = rng.gen_range(1..=machines);
            if op.iter().all(|e| e.machine != m) {
                op.push(Eligible { machine: m, time: rng.gen_range(1..=20) });
            }
        }
        op.sort_by_key(|e| e.machine);
    }
    inst
}
