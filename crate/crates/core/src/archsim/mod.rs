//! Cycle-accurate model of the preprocessing architecture: an
//! upper-triangular systolic array that computes the Gram matrix and later
//! runs backward substitution, a flip-flop register array, and a BLDL engine
//! with one MMAC, MSUB, MINV and MMULT unit driven by a precomputed
//! instruction table.
//!
//! Arithmetic goes through [`FixedEngine`], so the outputs are bit-identical
//! to the fixed-point golden model in [`crate::prep`].

mod array;
mod phases;
mod report;
mod schedule;
mod trace;

pub use array::{Pe, PeMode, RegisterArray, SystolicArray};
pub use phases::{backsub_finalize_cycle, run_backsub_phase, run_bldl_phase, run_gram_phase};
pub use report::CycleReport;
pub use schedule::{
    bldl_program, schedule_bldl, Addr, Instruction, Op, Operand, Schedule, Unit, UnitLatencies,
};
pub use trace::{Phase, Trace, TraceEvent};

use crate::fxp::ComplexFixed;
use crate::prep::{
    normalize_channel, BldlFactors, BlockHermitianMatrix, ChannelMatrix, FixedConfig, FixedEngine,
    InverseMatrix, NoiseConfig, Normalization,
};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchConfig {
    pub fixed: FixedConfig,
    pub lat: UnitLatencies,
    pub normalization: Normalization,
    pub clock_hz: f64,
    /// Idle cycles at each of the two phase boundaries.
    pub handoff_cycles: u64,
}

impl Default for ArchConfig {
    fn default() -> Self {
        Self {
            fixed: FixedConfig::default(),
            lat: UnitLatencies::default(),
            normalization: Normalization::Global,
            clock_hz: 870e6,
            handoff_cycles: 0,
        }
    }
}

/// Everything a simulation run produces.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub channel: ChannelMatrix,
    pub gram: BlockHermitianMatrix<ComplexFixed>,
    pub factors: BldlFactors<ComplexFixed>,
    pub inverse: InverseMatrix<ComplexFixed>,
    pub schedule: Schedule,
    pub report: CycleReport,
    pub trace: Trace,
}

/// Runs the Gram, BLDL and backward-substitution phases back to back.
pub fn simulate(
    h: &ChannelMatrix,
    noise: &NoiseConfig,
    cfg: &ArchConfig,
) -> Result<(InverseMatrix<ComplexFixed>, CycleReport)> {
    let s = simulate_traced(h, noise, cfg, Trace::disabled())?;
    Ok((s.inverse, s.report))
}

pub fn simulate_traced(
    h: &ChannelMatrix,
    noise: &NoiseConfig,
    cfg: &ArchConfig,
    mut trace: Trace,
) -> Result<Simulation> {
    let channel = normalize_channel(h, cfg.normalization)?;
    let engine = FixedEngine::new(cfg.fixed);
    let mut array = SystolicArray::new(channel.u());

    let (mut regs, gram_cycles) = run_gram_phase(&mut array, &engine, &channel, noise, &mut trace)?;
    let gram = regs_to_gram(&regs, channel.u());

    let schedule = schedule_bldl(channel.u(), cfg.lat);
    let bldl_start = gram_cycles + cfg.handoff_cycles;
    let bldl_cycles = run_bldl_phase(&mut regs, &schedule, &engine, bldl_start, &mut trace)?;
    let factors = regs.factors()?;

    let backsub_start = bldl_start + bldl_cycles + cfg.handoff_cycles;
    let (inverse, backsub_cycles) =
        run_backsub_phase(&mut array, &regs, &engine, backsub_start, &mut trace)?;

    let report = CycleReport::new(
        gram_cycles,
        bldl_cycles,
        backsub_cycles,
        2 * cfg.handoff_cycles,
        cfg.clock_hz,
    );
    Ok(Simulation {
        channel,
        gram,
        factors,
        inverse,
        schedule,
        report,
        trace,
    })
}

fn regs_to_gram(regs: &RegisterArray, u: usize) -> BlockHermitianMatrix<ComplexFixed> {
    let n = u / 2;
    let mut blocks = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            blocks.push(regs.block(i, j).expect("Gram phase fills every slot"));
        }
    }
    BlockHermitianMatrix::from_upper(n, blocks, regs.scale_exp())
}
