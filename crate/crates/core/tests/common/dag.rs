//! Longest-path model of the block factorization, written from the
//! recurrences alone: every block result is ready once all of its inputs are
//! ready plus the latency of the unit that produces it.

use std::collections::{HashMap, HashSet};

use bldl_core::archsim::{Op, Schedule, UnitLatencies};

pub struct Dag {
    pub n: usize,
    lat: UnitLatencies,
    memo: HashMap<Op, u64>,
}

impl Dag {
    pub fn new(u: usize, lat: UnitLatencies) -> Self {
        Self { n: u / 2, lat, memo: HashMap::new() }
    }

    /// Cycle at which a block value is available; 0 for Gram outputs.
    fn d(&mut self, j: usize) -> u64 {
        if j == 0 {
            0
        } else {
            self.finish(Op::Msub { i: j, j })
        }
    }

    fn w(&mut self, i: usize, j: usize) -> u64 {
        if j == 0 {
            0
        } else {
            self.finish(Op::Msub { i, j })
        }
    }

    /// Completion cycle of `op`.
    pub fn finish(&mut self, op: Op) -> u64 {
        if let Some(&t) = self.memo.get(&op) {
            return t;
        }
        let t = match op {
            Op::Mmac { i, j, k } => {
                let mut ready = self.finish(Op::Mmult { i, j: k }).max(self.d(k)).max(self.finish(Op::Mmult { i: j, j: k }));
                if k > 0 {
                    ready = ready.max(self.finish(Op::Mmac { i, j, k: k - 1 }));
                }
                ready + self.lat.mmac
            }
            Op::Msub { i, j } => self.finish(Op::Mmac { i, j, k: j - 1 }) + self.lat.msub,
            Op::Minv { j } => self.d(j) + self.lat.minv,
            Op::Mmult { i, j } => self.w(i, j).max(self.finish(Op::Minv { j })) + self.lat.mmult,
        };
        self.memo.insert(op, t);
        t
    }

    /// Every operation of the factorization.
    pub fn ops(&self) -> Vec<Op> {
        let mut v = Vec::new();
        for j in 0..self.n {
            v.push(Op::Minv { j });
            for i in j..self.n {
                v.extend((0..j).map(|k| Op::Mmac { i, j, k }));
                if j > 0 {
                    v.push(Op::Msub { i, j });
                }
                if i > j {
                    v.push(Op::Mmult { i, j });
                }
            }
        }
        v
    }

    /// Operations whose results `op` consumes.
    pub fn inputs(&self, op: Op) -> Vec<Op> {
        let d = |j: usize| (j > 0).then_some(Op::Msub { i: j, j });
        match op {
            Op::Mmac { i, j, k } => {
                let mut v = vec![Op::Mmult { i, j: k }, Op::Mmult { i: j, j: k }];
                v.extend(d(k));
                if k > 0 {
                    v.push(Op::Mmac { i, j, k: k - 1 });
                }
                v
            }
            Op::Msub { i, j } => vec![Op::Mmac { i, j, k: j - 1 }],
            Op::Minv { j } => d(j).into_iter().collect(),
            Op::Mmult { i, j } => {
                let mut v = vec![Op::Minv { j }];
                if j > 0 {
                    v.push(Op::Msub { i, j });
                }
                v
            }
        }
    }

    pub fn critical_path(&mut self) -> u64 {
        self.ops().into_iter().map(|op| self.finish(op)).max().unwrap_or(0)
    }
}

/// Structural check of a schedule against the recurrences: each operation
/// issued exactly once, never before its inputs are ready, at most one issue
/// per unit per cycle, and no shorter than the critical path. Returns the
/// critical path length.
pub fn check_schedule(s: &Schedule) -> Result<u64, String> {
    let mut dag = Dag::new(s.u, s.lat);
    let mut issue: HashMap<Op, u64> = HashMap::new();
    let mut slots = HashSet::new();
    for ins in &s.instructions {
        if issue.insert(ins.op, ins.issue_cycle).is_some() {
            return Err(format!("{} issued twice", ins.op));
        }
        if !slots.insert((ins.op.unit(), ins.issue_cycle)) {
            return Err(format!("two {} issues in cycle {}", ins.op.unit(), ins.issue_cycle));
        }
    }
    let ops = dag.ops();
    if ops.len() != issue.len() {
        return Err(format!("{} operations scheduled, {} expected", issue.len(), ops.len()));
    }
    for &op in &ops {
        let t = *issue.get(&op).ok_or_else(|| format!("{op} never issued"))?;
        for p in dag.inputs(op) {
            let ready = issue[&p] + s.lat.of(p.unit());
            if t < ready {
                return Err(format!("{op} issued in cycle {t}, {p} ready in cycle {ready}"));
            }
        }
    }
    let cp = dag.critical_path();
    if s.makespan() < cp {
        return Err(format!("makespan {} below critical path {cp}", s.makespan()));
    }
    Ok(cp)
}
