use crate::fxp::{ComplexFixed, WideComplex};
use crate::prep::{BldlFactors, Block2, BlockHermitianMatrix};
use crate::{Error, Result};

use super::schedule::Addr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeMode {
    Gram,
    Backsub,
}

/// Processing element `(row, col)`, `row ≤ col`: one complex multiplier and
/// an accumulator.
#[derive(Debug, Clone, Copy)]
pub struct Pe {
    pub row: usize,
    pub col: usize,
    pub acc: WideComplex,
}

/// Upper-triangular grid of `(U² + U)/2` PEs shared by the Gram and
/// backward-substitution phases.
#[derive(Debug, Clone)]
pub struct SystolicArray {
    u: usize,
    mode: PeMode,
    pes: Vec<Pe>,
}

impl SystolicArray {
    pub fn new(u: usize) -> Self {
        let mut pes = Vec::with_capacity(u * (u + 1) / 2);
        for row in 0..u {
            for col in row..u {
                pes.push(Pe {
                    row,
                    col,
                    acc: WideComplex::zero(0, 64),
                });
            }
        }
        Self {
            u,
            mode: PeMode::Gram,
            pes,
        }
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn pe_count(&self) -> usize {
        self.pes.len()
    }

    pub fn mode(&self) -> PeMode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: PeMode) {
        self.mode = mode;
    }

    pub(crate) fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row <= col);
        row * self.u - row * row.saturating_sub(1) / 2 - row + col
    }

    pub fn pe(&self, row: usize, col: usize) -> &Pe {
        &self.pes[self.index(row, col)]
    }

    pub(crate) fn pe_mut(&mut self, row: usize, col: usize) -> &mut Pe {
        let i = self.index(row, col);
        &mut self.pes[i]
    }

    pub(crate) fn pes_mut(&mut self) -> &mut [Pe] {
        &mut self.pes
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Slot {
    value: Option<Block2<ComplexFixed>>,
    writer: Option<usize>,
}

const EMPTY: Slot = Slot {
    value: None,
    writer: None,
};

/// Flip-flop storage for the `(U²/2 + U)/4` upper blocks of `A` (later `D`
/// and `L`) plus `U/2` slots for the `D_jj⁻¹` blocks. Each slot remembers
/// which instruction wrote it last.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterArray {
    n: usize,
    blocks: Vec<Slot>,
    dinv: Vec<Slot>,
    scale_exp: i32,
}

impl RegisterArray {
    pub fn new(u: usize) -> Self {
        let n = u / 2;
        Self {
            n,
            blocks: vec![EMPTY; n * (n + 1) / 2],
            dinv: vec![EMPTY; n],
            scale_exp: 0,
        }
    }

    pub fn load_gram(a: &BlockHermitianMatrix<ComplexFixed>) -> Self {
        let mut regs = Self::new(a.dim());
        for (slot, b) in regs.blocks.iter_mut().zip(a.upper_blocks()) {
            slot.value = Some(*b);
        }
        regs.scale_exp = a.scale_exp();
        regs
    }

    pub fn block_slot_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn dinv_slot_count(&self) -> usize {
        self.dinv.len()
    }

    pub fn scale_exp(&self) -> i32 {
        self.scale_exp
    }

    fn tri(&self, row: usize, col: usize) -> usize {
        row * self.n - row * row.saturating_sub(1) / 2 - row + col
    }

    fn slot(&self, addr: Addr) -> Result<&Slot> {
        match addr {
            Addr::Block { row, col } if row <= col && col < self.n => Ok(&self.blocks[self.tri(row, col)]),
            Addr::Dinv(j) if j < self.n => Ok(&self.dinv[j]),
            _ => Err(Error::Hazard(format!("{addr} is not a register-array slot"))),
        }
    }

    /// Value at `addr` together with the instruction that wrote it.
    pub fn read(&self, addr: Addr) -> Result<(Option<Block2<ComplexFixed>>, Option<usize>)> {
        let s = self.slot(addr)?;
        Ok((s.value, s.writer))
    }

    pub fn write(&mut self, addr: Addr, value: Block2<ComplexFixed>, writer: usize) -> Result<()> {
        self.slot(addr)?;
        let slot = match addr {
            Addr::Block { row, col } => {
                let i = self.tri(row, col);
                &mut self.blocks[i]
            }
            Addr::Dinv(j) => &mut self.dinv[j],
            Addr::Scratch(_) => unreachable!("checked by slot()"),
        };
        *slot = Slot {
            value: Some(value),
            writer: Some(writer),
        };
        Ok(())
    }

    /// Upper block as currently stored.
    pub fn block(&self, row: usize, col: usize) -> Option<Block2<ComplexFixed>> {
        self.slot(Addr::Block { row, col }).ok().and_then(|s| s.value)
    }

    pub fn dinv(&self, j: usize) -> Option<Block2<ComplexFixed>> {
        self.slot(Addr::Dinv(j)).ok().and_then(|s| s.value)
    }

    /// Reads back `L`, `D` and `D⁻¹` after the factorization phase: `D_jj`
    /// sits in diagonal slots, `L_ij` in the slot that held `A_ji`.
    pub fn factors(&self) -> Result<BldlFactors<ComplexFixed>> {
        let n = self.n;
        let missing = |what: String| Error::Hazard(format!("{what} was never written"));
        let mut l = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 1..n {
            for j in 0..i {
                l.push(self.block(j, i).ok_or_else(|| missing(format!("L{}{}", i + 1, j + 1)))?);
            }
        }
        let d = (0..n)
            .map(|j| self.block(j, j).ok_or_else(|| missing(format!("D{}{}", j + 1, j + 1))))
            .collect::<Result<Vec<_>>>()?;
        let dinv = (0..n)
            .map(|j| self.dinv(j).ok_or_else(|| missing(format!("Dinv{}", j + 1))))
            .collect::<Result<Vec<_>>>()?;
        Ok(BldlFactors::from_parts(n, l, d, dinv, self.scale_exp))
    }
}
