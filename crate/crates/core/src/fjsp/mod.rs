//! Flexible job shop scheduling: `.fjs` instances, a feasibility checker
//! with makespan evaluation, MiniModel emission in three variants and an
//! exhaustive makespan oracle for tiny instances.

mod gen;
mod model;
mod oracle;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gen::{behnke_like, random_instance, random_windows, BEHNKE_DIMS};
pub use model::{alt_lexicon, big_m, build_fjsp_kg, build_fjsp_model, fjsp_cards, fjsp_source, lexicon_from_graph, Variant};
pub use oracle::{brute_force_makespan, brute_force_optimum, FjspOptimum, MAX_OPS, MAX_SEARCH};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FjspError {
    #[error("line {line}: {message}")]
    MalformedInstance { line: usize, message: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unavailability variant needs machine windows")]
    MissingWindows,
    #[error("search space of {size} exceeds the oracle bound")]
    TooLarge { size: u128 },
    #[error("invalid instance: {0}")]
    Invalid(String),
}

fn malformed(line: usize, message: impl Into<String>) -> FjspError {
    FjspError::MalformedInstance { line, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    #[default]
    Standard,
    Alternate,
}

/// One eligible machine (1-based) with its processing time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Eligible {
    pub machine: usize,
    pub time: u64,
}

/// Half-open unavailability window `[w_start, w_end)` on a machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub machine: usize,
    pub w_start: u64,
    pub w_end: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FjspInstance {
    pub n_jobs: usize,
    pub n_machines: usize,
    /// jobs[i][j] = eligible machines of operation j of job i
    pub jobs: Vec<Vec<Vec<Eligible>>>,
    #[serde(default)]
    pub windows: Vec<Window>,
    #[serde(default)]
    pub profile: Profile,
}

impl FjspInstance {
    pub fn op_count(&self) -> usize {
        self.jobs.iter().map(Vec::len).sum()
    }

    pub fn max_ops(&self) -> usize {
        self.jobs.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Processing time of (job, op) on 1-based `machine`, if eligible.
    pub fn time(&self, job: usize, op: usize, machine: usize) -> Option<u64> {
        self.jobs[job][op].iter().find(|e| e.machine == machine).map(|e| e.time)
    }

    /// Windows of 1-based `machine`, sorted by start.
    pub fn windows_on(&self, machine: usize) -> Vec<Window> {
        let mut w: Vec<Window> = self.windows.iter().filter(|w| w.machine == machine).copied().collect();
        w.sort();
        w
    }

    pub fn with_windows(mut self, windows: Vec<Window>) -> Result<Self, FjspError> {
        self.windows = windows;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), FjspError> {
        let bad = |m: String| Err(FjspError::Invalid(m));
        if self.jobs.len() != self.n_jobs {
            return bad(format!("{} jobs listed, {} declared", self.jobs.len(), self.n_jobs));
        }
        for (i, job) in self.jobs.iter().enumerate() {
            for (j, op) in job.iter().enumerate() {
                if op.is_empty() {
                    return bad(format!("job {} op {} has no eligible machine", i + 1, j + 1));
                }
                for (n, e) in op.iter().enumerate() {
                    if e.machine == 0 || e.machine > self.n_machines || e.time == 0 {
                        return bad(format!("job {} op {}: bad machine/time pair", i + 1, j + 1));
                    }
                    if op[..n].iter().any(|o| o.machine == e.machine) {
                        return bad(format!("job {} op {}: machine {} listed twice", i + 1, j + 1, e.machine));
                    }
                }
            }
        }
        for w in &self.windows {
            if w.machine == 0 || w.machine > self.n_machines || w.w_start >= w.w_end {
                return bad(format!("window {w:?} is degenerate or on an unknown machine"));
            }
        }
        Ok(())
    }
}

fn int<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, FjspError> {
    let t = tok.ok_or_else(|| malformed(line, format!("missing {what}")))?;
    t.parse().map_err(|_| malformed(line, format!("{what} `{t}` is not an integer")))
}

/// Parse the standard `.fjs` layout.
pub fn parse_fjs(text: &str) -> Result<FjspInstance, FjspError> {
    let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or_else(|| malformed(1, "empty instance"))?;
    let mut h = header.split_whitespace();
    let n_jobs: usize = int(h.next(), hl, "job count")?;
    let n_machines: usize = int(h.next(), hl, "machine count")?;
    if let Some(avg) = h.next() {
        avg.parse::<f64>().map_err(|_| malformed(hl, format!("flexibility `{avg}` is not a number")))?;
    }
    if h.next().is_some() {
        return Err(malformed(hl, "trailing tokens in header"));
    }
    if n_machines == 0 {
        return Err(malformed(hl, "no machines"));
    }
    let mut jobs = Vec::with_capacity(n_jobs);
    for i in 0..n_jobs {
        let (ln, line) =
            lines.next().ok_or_else(|| malformed(hl, format!("header declares {n_jobs} jobs, found {i}")))?;
        let mut t = line.split_whitespace();
        let n_ops: usize = int(t.next(), ln, "operation count")?;
        let mut ops = Vec::with_capacity(n_ops);
        for _ in 0..n_ops {
            let k: usize = int(t.next(), ln, "eligible count")?;
            if k == 0 {
                return Err(malformed(ln, "operation with no eligible machine"));
            }
            let mut op = Vec::with_capacity(k);
            for _ in 0..k {
                let machine: usize = int(t.next(), ln, "machine index")?;
                let time: u64 = int(t.next(), ln, "processing time")?;
                if machine == 0 || machine > n_machines {
                    return Err(malformed(ln, format!("machine {machine} outside 1..={n_machines}")));
                }
                if time == 0 {
                    return Err(malformed(ln, "processing time must be positive"));
                }
                if op.iter().any(|e: &Eligible| e.machine == machine) {
                    return Err(malformed(ln, format!("machine {machine} listed twice")));
                }
                op.push(Eligible { machine, time });
            }
            ops.push(op);
        }
        if t.next().is_some() {
            return Err(malformed(ln, "trailing tokens after last operation"));
        }
        jobs.push(ops);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(malformed(ln, format!("more job lines than the {n_jobs} declared")));
    }
    Ok(FjspInstance { n_jobs, n_machines, jobs, windows: Vec::new(), profile: Profile::Standard })
}

/// Inverse of [`parse_fjs`]; windows and profile are not part of the layout.
pub fn write_fjs(inst: &FjspInstance) -> String {
    let pairs: usize = inst.jobs.iter().flatten().map(Vec::len).sum();
    let ops = inst.op_count().max(1);
    let mut s = format!("{} {} {}\n", inst.n_jobs, inst.n_machines, pairs as f64 / ops as f64);
    for job in &inst.jobs {
        let mut line = job.len().to_string();
        for op in job {
            line += &format!(" {}", op.len());
            for e in op {
                line += &format!(" {} {}", e.machine, e.time);
            }
        }
        s += &line;
        s.push('\n');
    }
    s
}

/// Windows side file: a JSON list of `{machine, w_start, w_end}`.
pub fn parse_windows(json: &str) -> Result<Vec<Window>, FjspError> {
    serde_json::from_str(json).map_err(|e| malformed(e.line(), e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FjspSolution {
    /// x[i][j][k], k over all machines (0-based)
    pub x: Vec<Vec<Vec<u8>>>,
    pub s: Vec<Vec<f64>>,
    /// z[i][j][k][w], w over the windows of machine k in start order
    #[serde(default)]
    pub z: Vec<Vec<Vec<Vec<u8>>>>,
    pub makespan: f64,
}

/// Operations are reported 1-based as (job, op).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Assignment { job: usize, op: usize, assigned: usize },
    Ineligible { job: usize, op: usize, machine: usize },
    InvalidStart { job: usize, op: usize },
    Precedence { job: usize, op: usize },
    Capacity { machine: usize, first: (usize, usize), second: (usize, usize) },
    Window { machine: usize, job: usize, op: usize, w_start: u64, w_end: u64 },
    Makespan { declared: f64, achieved: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Assignment { job, op, assigned } => write!(f, "assignment J{job}.O{op} on {assigned} machines"),
            Violation::Ineligible { job, op, machine } => write!(f, "ineligible J{job}.O{op} on M{machine}"),
            Violation::InvalidStart { job, op } => write!(f, "invalid_start J{job}.O{op}"),
            Violation::Precedence { job, op } => write!(f, "precedence J{job}.O{op}"),
            Violation::Capacity { machine, first, second } => {
                write!(f, "capacity M{machine} J{}.O{} J{}.O{}", first.0, first.1, second.0, second.1)
            }
            Violation::Window { machine, job, op, w_start, w_end } => {
                write!(f, "window M{machine} [{w_start},{w_end}) J{job}.O{op}")
            }
            Violation::Makespan { declared, achieved } => write!(f, "makespan {declared} < {achieved}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
    pub makespan: f64,
}

/// Check assignment, precedence, machine capacity, window avoidance and
/// the declared makespan.
pub fn check_solution(inst: &FjspInstance, sol: &FjspSolution) -> Result<FeasibilityReport, FjspError> {
    let shape_ok = sol.x.len() == inst.n_jobs
        && sol.s.len() == inst.n_jobs
        && inst.jobs.iter().enumerate().all(|(i, job)| {
            sol.x[i].len() == job.len()
                && sol.s[i].len() == job.len()
                && sol.x[i].iter().all(|row| row.len() == inst.n_machines)
        });
    if !shape_ok {
        return Err(FjspError::DimensionMismatch("solution shape differs from the instance".into()));
    }
    let mut v = Vec::new();
    // (machine, start, end, job, op) of uniquely assigned operations
    let mut placed: Vec<(usize, f64, f64, usize, usize)> = Vec::new();
    let mut end: Vec<Vec<Option<f64>>> = inst.jobs.iter().map(|j| vec![None; j.len()]).collect();
    for (i, job) in inst.jobs.iter().enumerate() {
        for j in 0..job.len() {
            let on: Vec<usize> = (0..inst.n_machines).filter(|k| sol.x[i][j][*k] != 0).map(|k| k + 1).collect();
            let s = sol.s[i][j];
            if !(s.is_finite() && s >= 0.0) {
                v.push(Violation::InvalidStart { job: i + 1, op: j + 1 });
                continue;
            }
            if on.len() != 1 {
                v.push(Violation::Assignment { job: i + 1, op: j + 1, assigned: on.len() });
                continue;
            }
            let k = on[0];
            let Some(p) = inst.time(i, j, k) else {
                v.push(Violation::Ineligible { job: i + 1, op: j + 1, machine: k });
                continue;
            };
            let e = s + p as f64;
            end[i][j] = Some(e);
            placed.push((k, s, e, i, j));
            for w in inst.windows_on(k) {
                if s < w.w_end as f64 && (w.w_start as f64) < e {
                    v.push(Violation::Window { machine: k, job: i + 1, op: j + 1, w_start: w.w_start, w_end: w.w_end });
                }
            }
        }
    }
    for (i, job) in inst.jobs.iter().enumerate() {
        for j in 1..job.len() {
            if let Some(prev) = end[i][j - 1] {
                if sol.s[i][j] < prev {
                    v.push(Violation::Precedence { job: i + 1, op: j + 1 });
                }
            }
        }
    }
    placed.sort_by_key(|p| (p.0, p.3, p.4));
    for a in 0..placed.len() {
        for b in a + 1..placed.len() {
            let (ka, sa, ea, ia, ja) = placed[a];
            let (kb, sb, eb, ib, jb) = placed[b];
            if ka == kb && sa < eb && sb < ea {
                v.push(Violation::Capacity { machine: ka, first: (ia + 1, ja + 1), second: (ib + 1, jb + 1) });
            }
        }
    }
    let achieved = placed.iter().map(|p| p.2).fold(0.0, f64::max);
    if sol.makespan < achieved {
        v.push(Violation::Makespan { declared: sol.makespan, achieved });
    }
    Ok(FeasibilityReport { feasible: v.is_empty(), violations: v, makespan: achieved })
}

/// Solution from machine choices (1-based) and start times; `z` marks
/// operations that finish before a window on their machine.
pub fn make_solution(inst: &FjspInstance, machine: &[Vec<usize>], start: &[Vec<u64>]) -> FjspSolution {
    let mut x = Vec::new();
    let mut s = Vec::new();
    let mut z = Vec::new();
    let mut makespan = 0u64;
    for (i, job) in inst.jobs.iter().enumerate() {
        let mut xi = Vec::new();
        let mut zi = Vec::new();
        for j in 0..job.len() {
            let m = machine[i][j];
            let end = start[i][j] + inst.time(i, j, m).unwrap_or(0);
            makespan = makespan.max(end);
            xi.push((1..=inst.n_machines).map(|k| u8::from(k == m)).collect());
            zi.push(
                (1..=inst.n_machines)
                    .map(|k| inst.windows_on(k).iter().map(|w| u8::from(k == m && end <= w.w_start)).collect())
                    .collect(),
            );
        }
        x.push(xi);
        z.push(zi);
        s.push(start[i].iter().map(|v| *v as f64).collect());
    }
    FjspSolution { x, s, z, makespan: makespan as f64 }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_jobs() -> FjspInstance {
        parse_fjs("2 1\n1 1 1 3\n1 1 1 4\n").unwrap()
    }

    #[test]
    fn parse_minimal() {
        let inst = parse_fjs("1 1\n1 1 1 5\n").unwrap();
        assert_eq!((inst.n_jobs, inst.n_machines), (1, 1));
        assert_eq!(inst.jobs, vec![vec![vec![Eligible { machine: 1, time: 5 }]]]);
        assert!(inst.windows.is_empty());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_fjs("2 1\n1 1 1 5\n"), Err(FjspError::MalformedInstance { line: 1, .. })));
        assert!(matches!(parse_fjs("1 1\n1 1 2 5\n"), Err(FjspError::MalformedInstance { line: 2, .. })));
        assert!(matches!(parse_fjs("1 1\n1 1 1 5 7\n"), Err(FjspError::MalformedInstance { line: 2, .. })));
        assert!(matches!(parse_fjs("1 1\n1 1 1 5\n1 1 1 5\n"), Err(FjspError::MalformedInstance { line: 3, .. })));
        assert!(matches!(parse_fjs("1 1\n1 1 1 x\n"), Err(FjspError::MalformedInstance { line: 2, .. })));
        assert!(parse_fjs("1 2 1.5\n\n1 2 1 5 2 3\n\n").is_ok());
    }

    #[test]
    fn fjs_round_trip() {
        let inst = parse_fjs("2 3 1.5\n2 2 1 5 3 2 1 2 4\n1 1 3 7\n").unwrap();
        assert_eq!(parse_fjs(&write_fjs(&inst)).unwrap(), inst);
    }

    #[test]
    fn windows_side_file() {
        let w = parse_windows(r#"[{"machine": 1, "w_start": 2, "w_end": 5}]"#).unwrap();
        assert_eq!(w, vec![Window { machine: 1, w_start: 2, w_end: 5 }]);
        assert!(two_jobs().with_windows(vec![Window { machine: 1, w_start: 5, w_end: 5 }]).is_err());
    }

    #[test]
    fn two_job_checks() {
        let inst = two_jobs();
        let ok = make_solution(&inst, &[vec![1], vec![1]], &[vec![0], vec![3]]);
        let r = check_solution(&inst, &ok).unwrap();
        assert!(r.feasible);
        assert_eq!(r.makespan, 7.0);
        let overlap = make_solution(&inst, &[vec![1], vec![1]], &[vec![0], vec![2]]);
        let r = check_solution(&inst, &overlap).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.violations, vec![Violation::Capacity { machine: 1, first: (1, 1), second: (2, 1) }]);
    }

    #[test]
    fn window_semantics() {
        let inst = parse_fjs("1 1\n1 1 1 3\n").unwrap().with_windows(vec![Window { machine: 1, w_start: 2, w_end: 5 }]).unwrap();
        let at = |s: u64| check_solution(&inst, &make_solution(&inst, &[vec![1]], &[vec![s]])).unwrap();
        assert!(!at(0).feasible);
        assert!(matches!(at(0).violations[0], Violation::Window { .. }));
        assert!(at(5).feasible);
        // half-open: ending exactly at the window start is fine
        let inst2 = parse_fjs("1 1\n1 1 1 2\n").unwrap().with_windows(inst.windows.clone()).unwrap();
        assert!(check_solution(&inst2, &make_solution(&inst2, &[vec![1]], &[vec![0]])).unwrap().feasible);
    }

    #[test]
    fn other_violations() {
        let inst = parse_fjs("1 2\n2 1 1 3 1 2 2\n").unwrap();
        let mut sol = make_solution(&inst, &[vec![1, 2]], &[vec![0, 1]]);
        sol.makespan = 1.0;
        let r = check_solution(&inst, &sol).unwrap();
        assert!(r.violations.contains(&Violation::Precedence { job: 1, op: 2 }));
        assert!(r.violations.iter().any(|v| matches!(v, Violation::Makespan { .. })));
        sol.x[0][0] = vec![1, 1];
        let r = check_solution(&inst, &sol).unwrap();
        assert!(r.violations.contains(&Violation::Assignment { job: 1, op: 1, assigned: 2 }));
        sol.x[0][0] = vec![0, 1];
        let r = check_solution(&inst, &sol).unwrap();
        assert!(r.violations.contains(&Violation::Ineligible { job: 1, op: 1, machine: 2 }));
        sol.x.pop();
        assert!(matches!(check_solution(&inst, &sol), Err(FjspError::DimensionMismatch(_))));
    }
}
