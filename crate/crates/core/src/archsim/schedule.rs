use std::fmt;

use crate::{Error, Result};

/// Issue-to-result latencies of the BLDL engine units, in clock cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitLatencies {
    pub mmac: u64,
    pub msub: u64,
    pub minv: u64,
    pub mmult: u64,
}

impl Default for UnitLatencies {
    fn default() -> Self {
        Self {
            mmac: 2,
            msub: 1,
            minv: 4,
            mmult: 1,
        }
    }
}

impl UnitLatencies {
    pub fn new(mmac: u64, msub: u64, minv: u64, mmult: u64) -> Result<Self> {
        if [mmac, msub, minv, mmult].contains(&0) {
            return Err(Error::Config("unit latencies must be at least one cycle".into()));
        }
        Ok(Self {
            mmac,
            msub,
            minv,
            mmult,
        })
    }

    pub fn of(&self, unit: Unit) -> u64 {
        match unit {
            Unit::Mmac => self.mmac,
            Unit::Msub => self.msub,
            Unit::Minv => self.minv,
            Unit::Mmult => self.mmult,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Unit {
    Mmac,
    Msub,
    Minv,
    Mmult,
}

impl Unit {
    pub const ALL: [Unit; 4] = [Unit::Mmac, Unit::Msub, Unit::Minv, Unit::Mmult];
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Mmac => "MMAC",
            Unit::Msub => "MSUB",
            Unit::Minv => "MINV",
            Unit::Mmult => "MMULT",
        })
    }
}

/// One block operation of the factorization; indices are 0-based block
/// indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    /// `S_ij^(k) = S_ij^(k-1) + L_ik·D_kk·L_jk^H`
    Mmac { i: usize, j: usize, k: usize },
    /// `W_ij = A_ij − S_ij`; `D_jj` when `i == j`.
    Msub { i: usize, j: usize },
    /// `D_jj⁻¹`
    Minv { j: usize },
    /// `L_ij = W_ij·D_jj⁻¹`
    Mmult { i: usize, j: usize },
}

impl Op {
    pub fn unit(&self) -> Unit {
        match self {
            Op::Mmac { .. } => Unit::Mmac,
            Op::Msub { .. } => Unit::Msub,
            Op::Minv { .. } => Unit::Minv,
            Op::Mmult { .. } => Unit::Mmult,
        }
    }

    /// Tie-break key, compared lexicographically as `(j, i, k)`.
    pub fn key(&self) -> (usize, usize, usize) {
        match *self {
            Op::Mmac { i, j, k } => (j, i, k),
            Op::Msub { i, j } => (j, i, j),
            Op::Minv { j } => (j, j, j + 1),
            Op::Mmult { i, j } => (j, i, j + 1),
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Op::Mmac { i, j, k } => write!(f, "S{}{}+=L{}{}*D{}{}*L{}{}^H", i + 1, j + 1, i + 1, k + 1, k + 1, k + 1, j + 1, k + 1),
            Op::Msub { i, j } if i == j => write!(f, "D{}{}=A{}{}-S{}{}", j + 1, j + 1, j + 1, j + 1, j + 1, j + 1),
            Op::Msub { i, j } => write!(f, "W{}{}=A{}{}-S{}{}", i + 1, j + 1, i + 1, j + 1, i + 1, j + 1),
            Op::Minv { j } => write!(f, "Dinv{}=inv(D{}{})", j + 1, j + 1, j + 1),
            Op::Mmult { i, j } => write!(f, "L{}{}=W{}{}*Dinv{}", i + 1, j + 1, i + 1, j + 1, j + 1),
        }
    }
}

/// A location the BLDL engine reads or writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Addr {
    /// Register-array slot of upper block `(row, col)`, `row ≤ col`.
    Block { row: usize, col: usize },
    /// Register-array slot for `D_jj⁻¹`.
    Dinv(usize),
    /// MMAC partial-sum register, one per MMAC instruction.
    Scratch(usize),
}

impl fmt::Display for Addr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Addr::Block { row, col } => write!(f, "R{}{}", row + 1, col + 1),
            Addr::Dinv(j) => write!(f, "I{}", j + 1),
            Addr::Scratch(s) => write!(f, "S{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Operand {
    pub addr: Addr,
    /// Read as the conjugate transpose of what is stored.
    pub adjoint: bool,
    /// Instruction whose result must be in `addr`; `None` for register
    /// content loaded before the phase starts.
    pub producer: Option<usize>,
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.addr, if self.adjoint { "^H" } else { "" })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instruction {
    pub op: Op,
    pub deps: Vec<usize>,
    pub operands: Vec<Operand>,
    pub result: Addr,
    pub issue_cycle: u64,
}

impl Instruction {
    pub fn unit(&self) -> Unit {
        self.op.unit()
    }
}

/// The instruction look-up table driving the BLDL engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub u: usize,
    pub lat: UnitLatencies,
    pub instructions: Vec<Instruction>,
}

impl Schedule {
    /// Cycle in which the last result becomes available.
    pub fn makespan(&self) -> u64 {
        self.instructions
            .iter()
            .map(|ins| ins.issue_cycle + self.lat.of(ins.unit()))
            .max()
            .unwrap_or(0)
    }

    /// Instructions ordered by issue cycle, then unit.
    pub fn by_cycle(&self) -> Vec<&Instruction> {
        let mut v: Vec<&Instruction> = self.instructions.iter().collect();
        v.sort_by_key(|ins| (ins.issue_cycle, ins.unit()));
        v
    }

    pub fn count(&self, unit: Unit) -> usize {
        self.instructions.iter().filter(|i| i.unit() == unit).count()
    }

    /// Checks issue order against dependencies and latencies, single issue
    /// per unit per cycle, and that every operand's producer is a dependency.
    pub fn validate(&self) -> Result<()> {
        let mut used = std::collections::HashSet::new();
        for (idx, ins) in self.instructions.iter().enumerate() {
            if !used.insert((ins.unit(), ins.issue_cycle)) {
                return Err(Error::Hazard(format!(
                    "two {} issues in cycle {}",
                    ins.unit(),
                    ins.issue_cycle
                )));
            }
            for &d in &ins.deps {
                let dep = self.instructions.get(d).ok_or_else(|| {
                    Error::Hazard(format!("instruction {idx} depends on missing {d}"))
                })?;
                let ready = dep.issue_cycle + self.lat.of(dep.unit());
                if ins.issue_cycle < ready {
                    return Err(Error::Hazard(format!(
                        "{} issued in cycle {} before {} is ready in cycle {ready}",
                        ins.op, ins.issue_cycle, dep.op
                    )));
                }
            }
            for o in &ins.operands {
                if let Some(p) = o.producer {
                    if !ins.deps.contains(&p) {
                        return Err(Error::Hazard(format!(
                            "{} reads {} without depending on its producer",
                            ins.op, o.addr
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The factorization's operations in program order, with dependencies and
/// register operands; issue cycles are left at zero.
pub fn bldl_program(u: usize) -> Vec<Instruction> {
    assert!(u >= 2 && u.is_multiple_of(2), "U must be even");
    let n = u / 2;
    let mut prog: Vec<Instruction> = Vec::new();
    // writer of D_kk (None: A_11 loaded by the Gram phase) and of L_ik
    let mut d_writer: Vec<Option<usize>> = vec![None; n];
    let mut l_writer = vec![vec![None::<usize>; n]; n];
    let slot = |r: usize, c: usize| Addr::Block {
        row: r.min(c),
        col: r.max(c),
    };

    for j in 0..n {
        for i in j..n {
            // chain of rank updates for (i, j)
            let mut acc: Option<usize> = None;
            for k in 0..j {
                let idx = prog.len();
                let l_ik = l_writer[i][k].expect("L_ik scheduled");
                let l_jk = l_writer[j][k].expect("L_jk scheduled");
                let mut deps = vec![l_ik];
                let mut operands = vec![
                    Operand { addr: slot(k, i), adjoint: false, producer: Some(l_ik) },
                    Operand { addr: slot(k, k), adjoint: false, producer: d_writer[k] },
                    Operand { addr: slot(k, j), adjoint: false, producer: Some(l_jk) },
                ];
                deps.extend(d_writer[k]);
                deps.push(l_jk);
                if let Some(a) = acc {
                    deps.push(a);
                    operands.push(Operand { addr: Addr::Scratch(a), adjoint: false, producer: Some(a) });
                }
                deps.sort_unstable();
                deps.dedup();
                prog.push(Instruction {
                    op: Op::Mmac { i, j, k },
                    deps,
                    operands,
                    result: Addr::Scratch(idx),
                    issue_cycle: 0,
                });
                acc = Some(idx);
            }
            // W_ij (or D_jj) in the slot that held A_ij
            let w_writer = acc.map(|s| {
                let idx = prog.len();
                prog.push(Instruction {
                    op: Op::Msub { i, j },
                    deps: vec![s],
                    operands: vec![
                        Operand { addr: slot(j, i), adjoint: i > j, producer: None },
                        Operand { addr: Addr::Scratch(s), adjoint: false, producer: Some(s) },
                    ],
                    result: slot(j, i),
                    issue_cycle: 0,
                });
                idx
            });
            if i == j {
                d_writer[j] = w_writer;
                prog.push(Instruction {
                    op: Op::Minv { j },
                    deps: w_writer.into_iter().collect(),
                    operands: vec![Operand { addr: slot(j, j), adjoint: false, producer: w_writer }],
                    result: Addr::Dinv(j),
                    issue_cycle: 0,
                });
            } else {
                // the MINV for column j precedes every MMULT of the column
                let minv = prog
                    .iter()
                    .rposition(|p| p.op == Op::Minv { j })
                    .expect("MINV emitted first in its column");
                let mut deps: Vec<usize> = w_writer.into_iter().collect();
                deps.push(minv);
                let idx = prog.len();
                prog.push(Instruction {
                    op: Op::Mmult { i, j },
                    deps,
                    operands: vec![
                        // column 1 reads A_i1 = A_1i^H straight from the Gram result
                        Operand { addr: slot(j, i), adjoint: w_writer.is_none(), producer: w_writer },
                        Operand { addr: Addr::Dinv(j), adjoint: false, producer: Some(minv) },
                    ],
                    result: slot(j, i),
                    issue_cycle: 0,
                });
                l_writer[i][j] = Some(idx);
            }
        }
    }
    prog
}

/// Longest latency-weighted path from each instruction to the end of the
/// program, including the instruction itself.
fn downstream_lengths(prog: &[Instruction], lat: &UnitLatencies) -> Vec<u64> {
    let mut succ = vec![Vec::new(); prog.len()];
    for (idx, ins) in prog.iter().enumerate() {
        for &d in &ins.deps {
            succ[d].push(idx);
        }
    }
    let mut len = vec![0; prog.len()];
    // program order is topological
    for idx in (0..prog.len()).rev() {
        let tail = succ[idx].iter().map(|&s| len[s]).max().unwrap_or(0);
        len[idx] = lat.of(prog[idx].unit()) + tail;
    }
    len
}

/// List-schedules the factorization on one unit of each kind: every cycle,
/// each unit issues the ready instruction with the longest downstream path,
/// ties going to the lowest `(j, i, k)`.
pub fn schedule_bldl(u: usize, lat: UnitLatencies) -> Schedule {
    let mut prog = bldl_program(u);
    let prio = downstream_lengths(&prog, &lat);
    let mut ready_at: Vec<Option<u64>> = vec![None; prog.len()];
    let mut remaining = prog.len();
    let mut cycle = 0u64;
    while remaining > 0 {
        for unit in Unit::ALL {
            let best = (0..prog.len())
                .filter(|&x| ready_at[x].is_none() && prog[x].unit() == unit)
                .filter(|&x| {
                    prog[x]
                        .deps
                        .iter()
                        .all(|&d| ready_at[d].is_some_and(|r| r <= cycle))
                })
                .min_by_key(|&x| (std::cmp::Reverse(prio[x]), prog[x].op.key()));
            if let Some(x) = best {
                prog[x].issue_cycle = cycle;
                ready_at[x] = Some(cycle + lat.of(unit));
                remaining -= 1;
            }
        }
        cycle += 1;
    }
    Schedule {
        u,
        lat,
        instructions: prog,
    }
}
