use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Gram,
    Bldl,
    Backsub,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Gram => "gram",
            Phase::Bldl => "bldl",
            Phase::Backsub => "backsub",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub cycle: u64,
    pub phase: Phase,
    pub unit: String,
    pub instruction: String,
    pub operands: String,
    pub result: String,
}

/// Per-cycle event log; a disabled trace records nothing.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    enabled: bool,
    events: Vec<TraceEvent>,
}

impl Trace {
    pub fn enabled() -> Self {
        Self {
            enabled: true,
            events: Vec::new(),
        }
    }

    pub fn disabled() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub(crate) fn push(
        &mut self,
        cycle: u64,
        phase: Phase,
        unit: &str,
        instruction: String,
        operands: String,
        result: String,
    ) {
        if self.enabled {
            self.events.push(TraceEvent {
                cycle,
                phase,
                unit: unit.to_string(),
                instruction,
                operands,
                result,
            });
        }
    }

    pub const CSV_HEADER: &'static str = "cycle,phase,unit,instruction,operands,result";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for e in &self.events {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.cycle, e.phase, e.unit, e.instruction, e.operands, e.result
            ));
        }
        s
    }
}
