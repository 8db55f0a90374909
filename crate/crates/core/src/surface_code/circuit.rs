//! The `|0>` memory experiment circuit.
//!
//! Cycle 0 prepares every data qubit in `|0>`. Each extraction cycle
//! `1..=n` runs six time steps: ancilla preparation, four CNOT layers and
//! ancilla measurement. Data qubits are measured in the Z basis after cycle
//! `n`. Z ancillas are prepared in `|0>` and act as CNOT targets; X ancillas
//! are prepared in `|+>`, act as CNOT controls and are measured in the X
//! basis.

use serde::{Deserialize, Serialize};

use super::layout::{Layout, PauliType};
use crate::error::{Error, Result};

/// Time steps inside one extraction cycle.
pub const PREP_STEP: usize = 0;
pub const MEASURE_STEP: usize = 5;
pub const STEPS_PER_CYCLE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OpKind {
    PrepareZ { qubit: usize },
    PrepareX { qubit: usize },
    Cnot { control: usize, target: usize },
    Idle { qubit: usize },
    MeasureZ { qubit: usize },
    MeasureX { qubit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operation {
    pub kind: OpKind,
    /// 0 for data preparation, `1..=n` for extraction, `n + 1` for the final
    /// data measurement.
    pub cycle: usize,
    pub step: usize,
}

/// Partner of a qubit in one CNOT layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CnotPartner {
    pub other: usize,
    pub is_control: bool,
}

#[derive(Debug, Clone)]
pub struct Circuit {
    pub layout: Layout,
    pub rounds: usize,
    pub ops: Vec<Operation>,
    /// `cnot_layers[k][q]` is the partner of qubit `q` at CNOT step `k + 1`.
    pub(crate) cnot_layers: [Vec<Option<CnotPartner>>; 4],
}

impl Circuit {
    pub fn num_qubits(&self) -> usize {
        self.layout.num_qubits()
    }

    pub fn is_data(&self, q: usize) -> bool {
        q < self.layout.num_data()
    }

    /// Returns the check type and index measured by ancilla `q`.
    pub fn ancilla_check(&self, q: usize) -> Option<(PauliType, usize)> {
        let nd = self.layout.num_data();
        let nz = self.layout.z_checks.len();
        if q < nd {
            None
        } else if q < nd + nz {
            Some((PauliType::Z, q - nd))
        } else {
            Some((PauliType::X, q - nd - nz))
        }
    }

    pub fn cnot_partner(&self, step: usize, q: usize) -> Option<CnotPartner> {
        debug_assert!((1..=4).contains(&step));
        self.cnot_layers[step - 1][q]
    }
}

pub fn build_memory_circuit(layout: &Layout, rounds: usize) -> Result<Circuit> {
    if rounds < 1 {
        return Err(Error::InvalidRounds(rounds));
    }
    let nq = layout.num_qubits();
    let nd = layout.num_data();

    let mut cnot_layers: [Vec<Option<CnotPartner>>; 4] = std::array::from_fn(|_| vec![None; nq]);
    for pauli in [PauliType::Z, PauliType::X] {
        for (idx, check) in layout.checks(pauli).iter().enumerate() {
            let anc = layout.ancilla(pauli, idx);
            for (k, data) in check.schedule.iter().enumerate() {
                let Some(q) = *data else { continue };
                let (control, target) = match pauli {
                    PauliType::Z => (q, anc),
                    PauliType::X => (anc, q),
                };
                cnot_layers[k][control] = Some(CnotPartner {
                    other: target,
                    is_control: true,
                });
                cnot_layers[k][target] = Some(CnotPartner {
                    other: control,
                    is_control: false,
                });
            }
        }
    }

    let mut ops = Vec::new();
    for q in 0..nd {
        ops.push(Operation {
            kind: OpKind::PrepareZ { qubit: q },
            cycle: 0,
            step: PREP_STEP,
        });
    }
    for cycle in 1..=rounds {
        for q in 0..nq {
            let kind = match layout_ancilla(layout, q) {
                None => OpKind::Idle { qubit: q },
                Some(PauliType::Z) => OpKind::PrepareZ { qubit: q },
                Some(PauliType::X) => OpKind::PrepareX { qubit: q },
            };
            ops.push(Operation {
                kind,
                cycle,
                step: PREP_STEP,
            });
        }
        for (k, layer) in cnot_layers.iter().enumerate() {
            let step = k + 1;
            for q in 0..nq {
                let kind = match layer[q] {
                    Some(p) if p.is_control => OpKind::Cnot {
                        control: q,
                        target: p.other,
                    },
                    Some(_) => continue,
                    None => OpKind::Idle { qubit: q },
                };
                ops.push(Operation { kind, cycle, step });
            }
        }
        for q in 0..nq {
            let kind = match layout_ancilla(layout, q) {
                None => OpKind::Idle { qubit: q },
                Some(PauliType::Z) => OpKind::MeasureZ { qubit: q },
                Some(PauliType::X) => OpKind::MeasureX { qubit: q },
            };
            ops.push(Operation {
                kind,
                cycle,
                step: MEASURE_STEP,
            });
        }
    }
    for q in 0..nd {
        ops.push(Operation {
            kind: OpKind::MeasureZ { qubit: q },
            cycle: rounds + 1,
            step: PREP_STEP,
        });
    }

    Ok(Circuit {
        layout: layout.clone(),
        rounds,
        ops,
        cnot_layers,
    })
}

fn layout_ancilla(layout: &Layout, q: usize) -> Option<PauliType> {
    let nd = layout.num_data();
    let nz = layout.z_checks.len();
    if q < nd {
        None
    } else if q < nd + nz {
        Some(PauliType::Z)
    } else {
        Some(PauliType::X)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface_code::layout::build_layout;

    #[test]
    fn rejects_zero_rounds() {
        let layout = build_layout(3).unwrap();
        assert!(matches!(
            build_memory_circuit(&layout, 0),
            Err(Error::InvalidRounds(0))
        ));
    }

    #[test]
    fn ancillas_prepared_and_measured_once_per_cycle() {
        let layout = build_layout(5).unwrap();
        let circuit = build_memory_circuit(&layout, 3).unwrap();
        let nd = layout.num_data();
        for cycle in 1..=3 {
            for q in nd..layout.num_qubits() {
                let preps = circuit
                    .ops
                    .iter()
                    .filter(|op| op.cycle == cycle)
                    .filter(|op| {
                        matches!(op.kind, OpKind::PrepareZ { qubit } | OpKind::PrepareX { qubit } if qubit == q)
                    })
                    .count();
                let meas = circuit
                    .ops
                    .iter()
                    .filter(|op| op.cycle == cycle)
                    .filter(|op| {
                        matches!(op.kind, OpKind::MeasureZ { qubit } | OpKind::MeasureX { qubit } if qubit == q)
                    })
                    .count();
                assert_eq!((preps, meas), (1, 1));
            }
        }
        let data_meas = circuit
            .ops
            .iter()
            .filter(|op| op.cycle == 4 && matches!(op.kind, OpKind::MeasureZ { .. }))
            .count();
        assert_eq!(data_meas, nd);
        let data_prep = circuit.ops.iter().filter(|op| op.cycle == 0).count();
        assert_eq!(data_prep, nd);
    }

    #[test]
    fn each_qubit_has_one_op_per_step() {
        let layout = build_layout(3).unwrap();
        let circuit = build_memory_circuit(&layout, 2).unwrap();
        for cycle in 1..=2 {
            for step in 0..STEPS_PER_CYCLE {
                let mut count = vec![0; layout.num_qubits()];
                for op in circuit.ops.iter().filter(|o| o.cycle == cycle && o.step == step) {
                    match op.kind {
                        OpKind::Cnot { control, target } => {
                            count[control] += 1;
                            count[target] += 1;
                        }
                        OpKind::PrepareZ { qubit }
                        | OpKind::PrepareX { qubit }
                        | OpKind::Idle { qubit }
                        | OpKind::MeasureZ { qubit }
                        | OpKind::MeasureX { qubit } => count[qubit] += 1,
                    }
                }
                assert!(count.iter().all(|&c| c == 1), "cycle {cycle} step {step}");
            }
        }
    }
}
