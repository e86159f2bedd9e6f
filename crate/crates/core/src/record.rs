use std::fmt;

/// Scheme identifier carried by a [`RunRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    Constant,
    Dynamic,
    Framed,
    RlraDc,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Constant => "constant",
            SchemeKind::Dynamic => "dynamic",
            SchemeKind::Framed => "framed",
            SchemeKind::RlraDc => "rlra-dc",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub scheme: SchemeKind,
    pub delay: u32,
    pub stations: u32,
    /// `p` for p-constant and framed, `alpha` for p-dynamic, the estimated
    /// station count for RLRA-DC runs driven by the estimator.
    pub param: Option<f64>,
    pub seed: u64,
    pub slots: u64,
    pub delivered: u64,
    pub expired: u64,
    /// `delivered / slots`.
    pub throughput: f64,
    /// Throughput over the slots after the first 10% of the run.
    pub settled_throughput: f64,
}
