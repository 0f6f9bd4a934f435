//! Deliberately broken rule variants, used to show the differential checks can fail.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mutant {
    /// Big-step tuple rule returns `<W, V>`.
    BigPairSwap,
    /// Small-step let rule binds the components crosswise.
    SmallLetSwap,
    /// Small-step apply rule forgets the appended gates.
    SmallApplyKeepsCircuit,
    /// Stacked step-out builds `(ℓ', D, ℓ)`.
    StackedStepOutSwap,
    /// Machine tuple-join builds `<W, V>`.
    MachineTupleJoinSwap,
    /// Machine box-close continues with the inner circuit.
    MachineBoxCloseKeepsInner,
    /// Machine let-join binds the components crosswise.
    MachineLetJoinSwap,
}

impl Mutant {
    pub const ALL: [Mutant; 7] = [
        Mutant::BigPairSwap,
        Mutant::SmallLetSwap,
        Mutant::SmallApplyKeepsCircuit,
        Mutant::StackedStepOutSwap,
        Mutant::MachineTupleJoinSwap,
        Mutant::MachineBoxCloseKeepsInner,
        Mutant::MachineLetJoinSwap,
    ];

    pub fn family(self) -> &'static str {
        match self {
            Mutant::BigPairSwap => "big",
            Mutant::SmallLetSwap | Mutant::SmallApplyKeepsCircuit => "small",
            Mutant::StackedStepOutSwap => "stacked",
            Mutant::MachineTupleJoinSwap | Mutant::MachineBoxCloseKeepsInner | Mutant::MachineLetJoinSwap => {
                "machine"
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalOptions {
    pub mutant: Option<Mutant>,
}

impl EvalOptions {
    pub fn with_mutant(m: Mutant) -> Self {
        EvalOptions { mutant: Some(m) }
    }

    pub fn is(&self, m: Mutant) -> bool {
        self.mutant == Some(m)
    }
}

/// Step budget shared by a run and every nested box evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fuel {
    pub remaining: u64,
    pub used: u64,
}

impl Fuel {
    pub fn new(n: u64) -> Self {
        Fuel { remaining: n, used: 0 }
    }

    pub fn tick(&mut self) -> bool {
        if self.remaining == 0 {
            return false;
        }
        self.remaining -= 1;
        self.used += 1;
        true
    }
}
