use std::collections::HashMap;

use crate::fxp::{cmac, quantize, ComplexFixed, FxFormat, WideComplex};
use crate::prep::{
    l_entry, pack_gram, rhs_entry, BlockEngine, Block2, ChannelMatrix, Conj, FixedEngine,
    InverseMatrix, NoiseConfig,
};
use crate::{Error, Result};

use super::array::{PeMode, RegisterArray, SystolicArray};
use super::schedule::{Addr, Op, Schedule};
use super::trace::{Phase, Trace};

/// Feeds one row of `H` per cycle into the array, adds the regularizer to the
/// diagonal PEs in one extra cycle and writes the rounded result to a fresh
/// register array. Returns `B + 1` cycles.
pub fn run_gram_phase(
    array: &mut SystolicArray,
    engine: &FixedEngine,
    h: &ChannelMatrix,
    noise: &NoiseConfig,
    trace: &mut Trace,
) -> Result<(RegisterArray, u64)> {
    let (b, u) = (h.b(), h.u());
    if u != array.u() {
        return Err(Error::Dimension(format!("channel has {u} users, array is sized for {}", array.u())));
    }
    let cfg = &engine.cfg;
    let hq = h.quantize(cfg.h_fmt)?;
    array.set_mode(PeMode::Gram);
    let zero = WideComplex::zero(cfg.gram_frac(), cfg.gram_acc_bits(b));
    for pe in array.pes_mut() {
        pe.acc = zero;
    }
    for j in 0..b {
        let row = &hq[j * u..(j + 1) * u];
        for pe in array.pes_mut() {
            pe.acc = cmac(pe.acc, row[pe.col], row[pe.row], true)?;
        }
        trace.push(j as u64 + 1, Phase::Gram, "PE", format!("accumulate row {}", j + 1), String::new(), String::new());
    }
    let rho = quantize(h.effective_rho(noise.rho()), FxFormat::new(64, cfg.gram_frac())?)?;
    for m in 0..u {
        let pe = array.pe_mut(m, m);
        pe.acc = pe.acc.add_real(rho)?;
    }
    trace.push(b as u64 + 1, Phase::Gram, "PE", "add regularizer".into(), String::new(), String::new());
    let gram = pack_gram(u, |m, n| array.pe(m, n).acc, cfg);
    Ok((RegisterArray::load_gram(&gram), b as u64 + 1))
}

struct InFlight {
    ready: u64,
    idx: usize,
    dest: Addr,
    value: Block2<ComplexFixed>,
}

/// Executes the instruction table cycle by cycle. Every operand read is
/// checked against the register's last writer and the writer's latency; a
/// mismatch is a hazard. Results land in the register array when their unit
/// latency has elapsed. Returns the schedule makespan.
pub fn run_bldl_phase(
    regs: &mut RegisterArray,
    sched: &Schedule,
    engine: &FixedEngine,
    cycle_offset: u64,
    trace: &mut Trace,
) -> Result<u64> {
    let makespan = sched.makespan();
    let mut by_cycle: HashMap<u64, Vec<usize>> = HashMap::new();
    for (idx, ins) in sched.instructions.iter().enumerate() {
        by_cycle.entry(ins.issue_cycle).or_default().push(idx);
    }
    let mut scratch: HashMap<usize, (Block2<ComplexFixed>, usize)> = HashMap::new();
    let mut inflight: Vec<InFlight> = Vec::new();

    let retire = |regs: &mut RegisterArray,
                      scratch: &mut HashMap<usize, (Block2<ComplexFixed>, usize)>,
                      inflight: &mut Vec<InFlight>,
                      t: u64|
     -> Result<()> {
        let mut k = 0;
        while k < inflight.len() {
            if inflight[k].ready <= t {
                let f = inflight.swap_remove(k);
                match f.dest {
                    Addr::Scratch(s) => {
                        scratch.insert(s, (f.value, f.idx));
                    }
                    dest => regs.write(dest, f.value, f.idx)?,
                }
            } else {
                k += 1;
            }
        }
        Ok(())
    };

    for t in 0..makespan {
        retire(regs, &mut scratch, &mut inflight, t)?;
        let Some(issued) = by_cycle.get(&t) else { continue };
        for &idx in issued {
            let ins = &sched.instructions[idx];
            let mut vals = Vec::with_capacity(ins.operands.len());
            for o in &ins.operands {
                let (value, writer) = match o.addr {
                    Addr::Scratch(s) => scratch
                        .get(&s)
                        .map(|(v, w)| (Some(*v), Some(*w)))
                        .unwrap_or((None, None)),
                    a => regs.read(a)?,
                };
                let value = match value {
                    Some(v) if writer == o.producer => v,
                    _ => {
                        return Err(Error::Hazard(format!(
                            "cycle {t}: {} reads {} before its producer's result is written",
                            ins.op, o.addr
                        )))
                    }
                };
                vals.push(if o.adjoint { value.adjoint() } else { value });
            }
            let value = match ins.op {
                Op::Mmac { .. } => engine.mmac(vals.get(3), &vals[0], &vals[1], &vals[2]),
                Op::Msub { i, j } if i == j => engine.msub(&vals[0], &vals[1]).hermitian_upper(),
                Op::Msub { .. } => engine.msub(&vals[0], &vals[1]),
                Op::Minv { j } => engine.minv(&vals[0]).map_err(|delta| Error::SingularBlock {
                    block: j + 1,
                    delta,
                    cycle: Some(cycle_offset + t + 1),
                })?,
                Op::Mmult { .. } => engine.mmult(&vals[0], &vals[1]),
            };
            trace.push(
                cycle_offset + t + 1,
                Phase::Bldl,
                &ins.unit().to_string(),
                ins.op.to_string(),
                ins.operands.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(" "),
                ins.result.to_string(),
            );
            inflight.push(InFlight {
                ready: t + sched.lat.of(ins.unit()),
                idx,
                dest: ins.result,
                value,
            });
        }
    }
    retire(regs, &mut scratch, &mut inflight, makespan)?;
    Ok(makespan)
}

/// Cycle (1-based, within the phase) in which PE `(r, c)` finalizes `x_rc`:
/// column `c` starts two cycles after column `c + 1` and its wavefront climbs
/// one row per cycle.
pub fn backsub_finalize_cycle(u: usize, r: usize, c: usize) -> u64 {
    (2 * (u - c) + c - r) as u64
}

/// Backward substitution on the array. Cycle 1 loads the `D⁻¹` blocks into
/// the block-diagonal PEs; afterwards each PE folds in every
/// `−conj(l_tr)·x_tc` term whose `x` was finalized in an earlier cycle and
/// finalizes on its wavefront slot. A term still missing at that point is a
/// hazard. Takes `2U` cycles.
pub fn run_backsub_phase(
    array: &mut SystolicArray,
    regs: &RegisterArray,
    engine: &FixedEngine,
    cycle_offset: u64,
    trace: &mut Trace,
) -> Result<(InverseMatrix<ComplexFixed>, u64)> {
    let u = array.u();
    let f = regs.factors()?;
    if 2 * f.n() != u {
        return Err(Error::Dimension(format!("factors are {}×{}, array is sized for {u}", 2 * f.n(), 2 * f.n())));
    }
    array.set_mode(PeMode::Backsub);

    // per PE: outstanding terms (t, l_tr)
    let mut pending: HashMap<(usize, usize), Vec<(usize, ComplexFixed)>> = HashMap::new();
    let mut accs = HashMap::new();
    for r in 0..u {
        for c in r..u {
            accs.insert((r, c), engine.pe_init(rhs_entry(&f, r, c)));
            let terms = (r + 1..u).filter_map(|t| l_entry(&f, t, r).map(|l| (t, l))).collect();
            pending.insert((r, c), terms);
        }
    }
    trace.push(cycle_offset + 1, Phase::Backsub, "PE", "load Dinv blocks".into(), String::new(), String::new());

    let total = 2 * u as u64;
    let mut done: HashMap<(usize, usize), (ComplexFixed, u64)> = HashMap::new();
    for cycle in 2..=total {
        for r in 0..u {
            for c in r..u {
                if done.contains_key(&(r, c)) {
                    continue;
                }
                let terms = pending.get_mut(&(r, c)).expect("every PE has a term list");
                let acc = accs.get_mut(&(r, c)).expect("every PE has an accumulator");
                terms.retain(|&(t, l)| {
                    let x = if t <= c {
                        done.get(&(t, c)).filter(|(_, at)| *at < cycle).map(|(v, _)| *v)
                    } else {
                        done.get(&(c, t)).filter(|(_, at)| *at < cycle).map(|(v, _)| v.conj())
                    };
                    match x {
                        Some(x) => {
                            *acc = engine.pe_mac(*acc, l, x);
                            false
                        }
                        None => true,
                    }
                });
                if backsub_finalize_cycle(u, r, c) == cycle {
                    if let Some(&(t, _)) = terms.first() {
                        return Err(Error::Hazard(format!(
                            "cycle {cycle}: PE({}, {}) finalizes without x{}{}",
                            r + 1,
                            c + 1,
                            t + 1,
                            c + 1
                        )));
                    }
                    let v = engine.pe_finish(*acc);
                    let v = if r == c { v.real() } else { v };
                    array.pe_mut(r, c).acc = *acc;
                    done.insert((r, c), (v, cycle));
                    trace.push(
                        cycle_offset + cycle,
                        Phase::Backsub,
                        "PE",
                        format!("finalize x{}{}", r + 1, c + 1),
                        String::new(),
                        format!("PE{}{}", r + 1, c + 1),
                    );
                }
            }
        }
    }
    let mut data = Vec::with_capacity(u * u);
    for r in 0..u {
        for c in 0..u {
            let v = if r <= c { done[&(r, c)].0 } else { done[&(c, r)].0.conj() };
            data.push(v);
        }
    }
    Ok((InverseMatrix::from_vec(u, data, engine.inverse_scale_exp(regs.scale_exp())), total))
}
