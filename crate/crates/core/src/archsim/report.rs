use std::fmt::Write as _;

/// Per-phase cycle counts of one preprocessing run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleReport {
    pub gram_cycles: u64,
    pub bldl_cycles: u64,
    pub backsub_cycles: u64,
    pub handoff_cycles: u64,
    pub total_cycles: u64,
    pub clock_hz: f64,
}

impl CycleReport {
    pub fn new(gram: u64, bldl: u64, backsub: u64, handoff: u64, clock_hz: f64) -> Self {
        Self {
            gram_cycles: gram,
            bldl_cycles: bldl,
            backsub_cycles: backsub,
            handoff_cycles: handoff,
            total_cycles: gram + bldl + backsub + handoff,
            clock_hz,
        }
    }

    pub fn latency_s(&self) -> f64 {
        self.total_cycles as f64 / self.clock_hz
    }

    /// Matrices per second with phases of consecutive matrices not overlapped.
    pub fn throughput_mat_per_s(&self) -> f64 {
        self.clock_hz / self.total_cycles as f64
    }

    pub const CSV_HEADER: &'static str =
        "gram_cycles,bldl_cycles,backsub_cycles,handoff_cycles,total_cycles,clock_hz,latency_s,throughput_mat_per_s";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:e},{:e}",
            self.gram_cycles,
            self.bldl_cycles,
            self.backsub_cycles,
            self.handoff_cycles,
            self.total_cycles,
            self.clock_hz,
            self.latency_s(),
            self.throughput_mat_per_s()
        )
    }

    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        for (k, v) in [
            ("gram_cycles", self.gram_cycles.to_string()),
            ("bldl_cycles", self.bldl_cycles.to_string()),
            ("backsub_cycles", self.backsub_cycles.to_string()),
            ("handoff_cycles", self.handoff_cycles.to_string()),
            ("total_cycles", self.total_cycles.to_string()),
            ("clock_hz", self.clock_hz.to_string()),
            ("latency_s", format!("{:e}", self.latency_s())),
            ("throughput_mat_per_s", format!("{:e}", self.throughput_mat_per_s())),
        ] {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}
