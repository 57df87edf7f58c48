use serde::{Deserialize, Serialize};

use super::{make_solution, FjspError, FjspInstance, FjspSolution, Window};
use crate::par::{map_range, Exec};

pub const MAX_OPS: usize = 6;
/// Bound on assignments times interleavings.
pub const MAX_SEARCH: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FjspOptimum {
    pub makespan: u64,
    /// machine[i][j], 1-based
    pub machine: Vec<Vec<usize>>,
    pub start: Vec<Vec<u64>>,
}

impl FjspOptimum {
    pub fn solution(&self, inst: &FjspInstance) -> FjspSolution {
        make_solution(inst, &self.machine, &self.start)
    }
}

/// Earliest `t' >= t` such that `[t', t'+p)` misses every window.
pub(crate) fn earliest_start(mut t: u64, p: u64, windows: &[Window]) -> u64 {
    loop {
        match windows.iter().find(|w| t < w.w_end && w.w_start < t + p) {
            Some(w) => t = w.w_end,
            None => return t,
        }
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

struct Search<'a> {
    inst: &'a FjspInstance,
    windows: Vec<Vec<Window>>,
    machine: Vec<Vec<usize>>,
    next: Vec<usize>,
    job_ready: Vec<u64>,
    mach_ready: Vec<u64>,
    start: Vec<Vec<u64>>,
    best: Option<(u64, Vec<Vec<u64>>)>,
}

impl Search<'_> {
    /// Every interleaving of the job chains, each operation started as
    /// early as its job, its machine and the windows allow.
    fn go(&mut self, done: usize, total: usize, span: u64) {
        if self.best.as_ref().is_some_and(|(b, _)| span >= *b) {
            return;
        }
        if done == total {
            self.best = Some((span, self.start.clone()));
            return;
        }
        for i in 0..self.inst.n_jobs {
            let j = self.next[i];
            if j == self.inst.jobs[i].len() {
                continue;
            }
            let k = self.machine[i][j];
            let p = self.inst.time(i, j, k).expect("eligible");
            let t = earliest_start(self.job_ready[i].max(self.mach_ready[k - 1]), p, &self.windows[k - 1]);
            let (jr, mr) = (self.job_ready[i], self.mach_ready[k - 1]);
            self.start[i][j] = t;
            self.next[i] += 1;
            self.job_ready[i] = t + p;
            self.mach_ready[k - 1] = t + p;
            self.go(done + 1, total, span.max(t + p));
            self.next[i] -= 1;
            self.job_ready[i] = jr;
            self.mach_ready[k - 1] = mr;
        }
    }
}

/// Exhaustive search over machine assignments and operation orders.
pub fn brute_force_optimum(inst: &FjspInstance, exec: Exec) -> Result<FjspOptimum, FjspError> {
    inst.validate()?;
    let ops: Vec<(usize, usize)> =
        inst.jobs.iter().enumerate().flat_map(|(i, j)| (0..j.len()).map(move |o| (i, o))).collect();
    let assignments: u128 = ops.iter().map(|(i, j)| inst.jobs[*i][*j].len() as u128).product();
    let orders = factorial(ops.len()) / inst.jobs.iter().map(|j| factorial(j.len())).product::<u128>();
    if ops.len() > MAX_OPS || assignments * orders > MAX_SEARCH {
        return Err(FjspError::TooLarge { size: assignments * orders });
    }
    let windows: Vec<Vec<Window>> = (1..=inst.n_machines).map(|k| inst.windows_on(k)).collect();
    let results = map_range(exec, assignments as usize, |a| {
        let mut machine: Vec<Vec<usize>> = inst.jobs.iter().map(|j| vec![0; j.len()]).collect();
        // mixed radix, last operation fastest
        let mut rest = a;
        for (i, j) in ops.iter().rev() {
            let el = &inst.jobs[*i][*j];
            machine[*i][*j] = el[rest % el.len()].machine;
            rest /= el.len();
        }
        let mut s = Search {
            inst,
            windows: windows.clone(),
            machine,
            next: vec![0; inst.n_jobs],
            job_ready: vec![0; inst.n_jobs],
            mach_ready: vec![0; inst.n_machines],
            start: inst.jobs.iter().map(|j| vec![0; j.len()]).collect(),
            best: None,
        };
        s.go(0, ops.len(), 0);
        let (span, start) = s.best.expect("some order exists");
        (span, s.machine, start)
    });
    // first minimum in assignment order
    let (makespan, machine, start) = results
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .unwrap_or((0, Vec::new(), Vec::new()));
    Ok(FjspOptimum { makespan, machine, start })
}

pub fn brute_force_makespan(inst: &FjspInstance, exec: Exec) -> Result<u64, FjspError> {
    Ok(brute_force_optimum(inst, exec)?.makespan)
}
