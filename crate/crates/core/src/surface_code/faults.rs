//! Enumeration of every elementary fault of the memory circuit.
//!
//! A fault is propagated as a sparse Pauli frame to the end of the cycle it
//! occurs in. A clean extraction cycle leaves the data frame unchanged, so
//! from then on the fault flips every later syndrome identically and only
//! the two detector layers straddling its own cycle see it.

use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, OpKind, MEASURE_STEP, PREP_STEP};
use super::layout::PauliType;
use crate::error::{Error, Result};

const PX: u8 = 1;
const PZ: u8 = 2;

/// Where a fault comes from, used to group faults by cycle for shot reuse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaultOrigin {
    /// Data qubit preparation before the first cycle.
    Preparation,
    /// Any fault inside extraction cycle `c` (1-based).
    Cycle(usize),
    /// Flip of a final data qubit measurement outcome.
    FinalMeasurement,
}

/// For single-detector faults, whether the lone detector sits there because
/// of a data error (space boundary) or a measurement/preparation error of an
/// ancilla at the edge of the record (time boundary).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundaryKind {
    Space,
    Time,
}

/// The elementary operation a fault is attached to, and the Pauli applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultSite {
    Prepare { qubit: usize, pauli: char },
    Measure { qubit: usize },
    Idle { qubit: usize, pauli: char },
    Cnot { control: usize, target: usize, paulis: [char; 2] },
    FinalMeasure { qubit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaultLocation {
    pub cycle: usize,
    pub step: usize,
    pub site: FaultSite,
}

impl std::fmt::Display for FaultLocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.site {
            FaultSite::FinalMeasure { qubit } => write!(f, "final meas q{qubit}"),
            FaultSite::Prepare { qubit, pauli } if self.cycle == 0 => {
                write!(f, "prep {pauli} q{qubit}")
            }
            site => {
                write!(f, "c{}s{} ", self.cycle, self.step)?;
                match site {
                    FaultSite::Prepare { qubit, pauli } => write!(f, "prep {pauli} q{qubit}"),
                    FaultSite::Measure { qubit } => write!(f, "meas flip q{qubit}"),
                    FaultSite::Idle { qubit, pauli } => write!(f, "idle {pauli} q{qubit}"),
                    FaultSite::Cnot { control, target, paulis } => {
                        write!(f, "cnot {}{} q{control},q{target}", paulis[0], paulis[1])
                    }
                    FaultSite::FinalMeasure { .. } => unreachable!(),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultClass {
    pub location: FaultLocation,
    pub origin: FaultOrigin,
    /// Flipped Z detectors, global ids, sorted.
    pub z_detectors: Vec<usize>,
    /// Flipped X detectors, global ids, sorted.
    pub x_detectors: Vec<usize>,
    pub z_kind: BoundaryKind,
    pub x_kind: BoundaryKind,
    pub logical_flip: bool,
    pub probability: f64,
}

impl FaultClass {
    pub fn detectors(&self, pauli: PauliType) -> &[usize] {
        match pauli {
            PauliType::Z => &self.z_detectors,
            PauliType::X => &self.x_detectors,
        }
    }

    pub fn kind(&self, pauli: PauliType) -> BoundaryKind {
        match pauli {
            PauliType::Z => self.z_kind,
            PauliType::X => self.x_kind,
        }
    }
}

/// Global id of the Z detector of `check` in layer `layer` (1-based).
pub fn z_detector(nz: usize, layer: usize, check: usize) -> usize {
    (layer - 1) * nz + check
}

/// Global id of the X detector of `check` in layer `layer` (2..=n).
pub fn x_detector(nx: usize, layer: usize, check: usize) -> usize {
    (layer - 2) * nx + check
}

fn toggle(set: &mut Vec<usize>, v: usize) {
    if let Some(pos) = set.iter().position(|&x| x == v) {
        set.swap_remove(pos);
    } else {
        set.push(v);
    }
}

fn toggle_frame(frame: &mut Vec<(usize, u8)>, q: usize, bits: u8) {
    if bits == 0 {
        return;
    }
    if let Some(pos) = frame.iter().position(|&(x, _)| x == q) {
        frame[pos].1 ^= bits;
        if frame[pos].1 == 0 {
            frame.swap_remove(pos);
        }
    } else {
        frame.push((q, bits));
    }
}

struct Propagator<'a> {
    circuit: &'a Circuit,
    z_of_data: Vec<Vec<usize>>,
    x_of_data: Vec<Vec<usize>>,
    in_row: Vec<bool>,
    nz: usize,
    nx: usize,
}

struct CycleEffect {
    m_z: Vec<usize>,
    m_x: Vec<usize>,
    data_frame: Vec<(usize, u8)>,
}

impl Propagator<'_> {
    /// Propagates `frame`, present right after time step `after_step`, to the
    /// end of the current cycle.
    fn run(&self, after_step: usize, mut frame: Vec<(usize, u8)>) -> CycleEffect {
        let mut additions = Vec::with_capacity(4);
        for step in (after_step + 1)..=4 {
            additions.clear();
            for &(q, bits) in &frame {
                if let Some(p) = self.circuit.cnot_partner(step, q) {
                    if p.is_control && bits & PX != 0 {
                        additions.push((p.other, PX));
                    }
                    if !p.is_control && bits & PZ != 0 {
                        additions.push((p.other, PZ));
                    }
                }
            }
            for &(q, b) in &additions {
                toggle_frame(&mut frame, q, b);
            }
        }
        let mut effect = CycleEffect {
            m_z: Vec::new(),
            m_x: Vec::new(),
            data_frame: Vec::new(),
        };
        for (q, bits) in frame {
            match self.circuit.ancilla_check(q) {
                None => effect.data_frame.push((q, bits)),
                Some((PauliType::Z, c)) if after_step < MEASURE_STEP && bits & PX != 0 => {
                    effect.m_z.push(c)
                }
                Some((PauliType::X, c)) if after_step < MEASURE_STEP && bits & PZ != 0 => {
                    effect.m_x.push(c)
                }
                Some(_) => {}
            }
        }
        effect
    }

    fn syndrome(&self, frame: &[(usize, u8)], pauli: PauliType) -> Vec<usize> {
        let mut out = Vec::new();
        for &(q, bits) in frame {
            match pauli {
                PauliType::Z if bits & PX != 0 => {
                    for &c in &self.z_of_data[q] {
                        toggle(&mut out, c);
                    }
                }
                PauliType::X if bits & PZ != 0 => {
                    for &c in &self.x_of_data[q] {
                        toggle(&mut out, c);
                    }
                }
                _ => {}
            }
        }
        out
    }

    fn logical(&self, frame: &[(usize, u8)]) -> bool {
        frame
            .iter()
            .filter(|&&(q, bits)| bits & PX != 0 && self.in_row[q])
            .count()
            % 2
            == 1
    }

    /// Turns the effect of a fault in `cycle` into a fault class.
    fn classify(
        &self,
        cycle: usize,
        effect: CycleEffect,
        location: FaultLocation,
        probability: f64,
    ) -> FaultClass {
        let n = self.circuit.rounds;
        let syn_z = self.syndrome(&effect.data_frame, PauliType::Z);
        let syn_x = self.syndrome(&effect.data_frame, PauliType::X);

        let mut z = Vec::new();
        if cycle >= 1 {
            for &c in &effect.m_z {
                toggle(&mut z, z_detector(self.nz, cycle, c));
            }
        }
        for &c in effect.m_z.iter().chain(&syn_z) {
            toggle(&mut z, z_detector(self.nz, cycle + 1, c));
        }

        let mut x = Vec::new();
        if (2..=n).contains(&cycle) {
            for &c in &effect.m_x {
                toggle(&mut x, x_detector(self.nx, cycle, c));
            }
        }
        if (2..=n).contains(&(cycle + 1)) {
            for &c in effect.m_x.iter().chain(&syn_x) {
                toggle(&mut x, x_detector(self.nx, cycle + 1, c));
            }
        }
        z.sort_unstable();
        x.sort_unstable();
        let kind = |syn: &[usize]| {
            if syn.is_empty() {
                BoundaryKind::Time
            } else {
                BoundaryKind::Space
            }
        };
        FaultClass {
            location,
            origin: if cycle == 0 {
                FaultOrigin::Preparation
            } else {
                FaultOrigin::Cycle(cycle)
            },
            z_detectors: z,
            x_detectors: x,
            z_kind: kind(&syn_z),
            x_kind: kind(&syn_x),
            logical_flip: self.logical(&effect.data_frame),
            probability,
        }
    }
}

fn pauli_name(bits: u8) -> char {
    match bits {
        0 => 'I',
        PX => 'X',
        PZ => 'Z',
        _ => 'Y',
    }
}

/// Enumerates one fault class per elementary fault location and Pauli.
///
/// Preparation flips and measurement flips occur with probability `p`; a
/// qubit idling for a time step suffers each of X, Y, Z with `p / 3`; each
/// CNOT is followed by each of the 15 non-trivial two-qubit Paulis with
/// `p / 15`. The logical bit is the parity of the final Z measurements on
/// data row `observable_row`.
pub fn enumerate_fault_classes(
    circuit: &Circuit,
    p: f64,
    observable_row: usize,
) -> Result<Vec<FaultClass>> {
    if !(0.0..0.5).contains(&p) {
        return Err(Error::InvalidErrorRate(p));
    }
    let layout = &circuit.layout;
    let d = layout.d;
    assert!(observable_row < d, "observable row out of range");
    let mut in_row = vec![false; layout.num_data()];
    for c in 0..d {
        in_row[layout.data_index(observable_row, c)] = true;
    }
    let prop = Propagator {
        circuit,
        z_of_data: layout.data_to_checks(PauliType::Z),
        x_of_data: layout.data_to_checks(PauliType::X),
        in_row,
        nz: layout.z_checks.len(),
        nx: layout.x_checks.len(),
    };
    let n = circuit.rounds;
    let mut out = Vec::new();

    for op in &circuit.ops {
        let (cycle, step) = (op.cycle, op.step);
        let at = |site| FaultLocation { cycle, step, site };
        match op.kind {
            OpKind::PrepareZ { qubit } if cycle == 0 => {
                let effect = CycleEffect {
                    m_z: vec![],
                    m_x: vec![],
                    data_frame: vec![(qubit, PX)],
                };
                let site = FaultSite::Prepare { qubit, pauli: 'X' };
                out.push(prop.classify(0, effect, at(site), p));
            }
            OpKind::MeasureZ { qubit } if cycle == n + 1 => {
                let mut z: Vec<usize> = prop.z_of_data[qubit]
                    .iter()
                    .map(|&c| z_detector(prop.nz, n + 1, c))
                    .collect();
                z.sort_unstable();
                out.push(FaultClass {
                    location: at(FaultSite::FinalMeasure { qubit }),
                    origin: FaultOrigin::FinalMeasurement,
                    z_detectors: z,
                    x_detectors: vec![],
                    z_kind: BoundaryKind::Space,
                    x_kind: BoundaryKind::Space,
                    logical_flip: prop.in_row[qubit],
                    probability: p,
                });
            }
            OpKind::PrepareZ { qubit } | OpKind::PrepareX { qubit } => {
                let bits = if matches!(op.kind, OpKind::PrepareZ { .. }) { PX } else { PZ };
                let effect = prop.run(PREP_STEP, vec![(qubit, bits)]);
                let site = FaultSite::Prepare { qubit, pauli: pauli_name(bits) };
                out.push(prop.classify(cycle, effect, at(site), p));
            }
            OpKind::MeasureZ { qubit } | OpKind::MeasureX { qubit } => {
                let (pauli, check) = circuit
                    .ancilla_check(qubit)
                    .expect("extraction measurements act on ancillas");
                let effect = CycleEffect {
                    m_z: if pauli == PauliType::Z { vec![check] } else { vec![] },
                    m_x: if pauli == PauliType::X { vec![check] } else { vec![] },
                    data_frame: vec![],
                };
                out.push(prop.classify(cycle, effect, at(FaultSite::Measure { qubit }), p));
            }
            OpKind::Idle { qubit } => {
                for bits in [PX, PZ, PX | PZ] {
                    let effect = prop.run(step, vec![(qubit, bits)]);
                    let site = FaultSite::Idle { qubit, pauli: pauli_name(bits) };
                    out.push(prop.classify(cycle, effect, at(site), p / 3.0));
                }
            }
            OpKind::Cnot { control, target } => {
                for pc in 0..4u8 {
                    for pt in 0..4u8 {
                        if pc == 0 && pt == 0 {
                            continue;
                        }
                        let pc_bits = [0, PX, PX | PZ, PZ][pc as usize];
                        let pt_bits = [0, PX, PX | PZ, PZ][pt as usize];
                        let mut frame = Vec::with_capacity(2);
                        toggle_frame(&mut frame, control, pc_bits);
                        toggle_frame(&mut frame, target, pt_bits);
                        let effect = prop.run(step, frame);
                        let site = FaultSite::Cnot {
                            control,
                            target,
                            paulis: [pauli_name(pc_bits), pauli_name(pt_bits)],
                        };
                        out.push(prop.classify(cycle, effect, at(site), p / 15.0));
                    }
                }
            }
        }
    }

    for fault in &out {
        if fault.logical_flip && fault.z_detectors.is_empty() {
            return Err(Error::UndetectableLogical(fault.location.to_string()));
        }
        for pauli in [PauliType::Z, PauliType::X] {
            let count = fault.detectors(pauli).len();
            if count > 2 {
                return Err(Error::FaultTooWide {
                    location: fault.location.to_string(),
                    pauli: pauli.name(),
                    count,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface_code::circuit::build_memory_circuit;
    use crate::surface_code::layout::build_layout;

    fn faults(d: usize, n: usize) -> (Circuit, Vec<FaultClass>) {
        let layout = build_layout(d).unwrap();
        let circuit = build_memory_circuit(&layout, n).unwrap();
        let f = enumerate_fault_classes(&circuit, 0.01, 0).unwrap();
        (circuit, f)
    }

    #[test]
    fn at_most_two_detectors_per_type() {
        for d in [3, 5, 7] {
            let (_, f) = faults(d, 4);
            assert!(f.iter().all(|f| f.z_detectors.len() <= 2 && f.x_detectors.len() <= 2));
        }
    }

    #[test]
    fn x_on_top_row_data_is_a_single_open_detector() {
        let (circuit, f) = faults(5, 3);
        let layout = &circuit.layout;
        // X idle error on a top-row data qubit during the measurement step of
        // cycle 1 shows up only in layer 2.
        for c in 0..5 {
            let q = layout.data_index(0, c);
            let label = format!("c1s5 idle X q{q}");
            let fault = f.iter().find(|x| x.location.to_string() == label).unwrap();
            assert_eq!(fault.z_detectors.len(), 1, "{label}");
            assert!(fault.logical_flip);
        }
    }

    #[test]
    fn last_cycle_z_measurement_flip_pairs_layers_n_and_n_plus_one() {
        let n = 3;
        let (circuit, f) = faults(5, n);
        let nz = circuit.layout.z_checks.len();
        let q = circuit.layout.ancilla(PauliType::Z, 4);
        let label = format!("c{n}s5 meas flip q{q}");
        let fault = f.iter().find(|x| x.location.to_string() == label).unwrap();
        assert_eq!(
            fault.z_detectors,
            vec![z_detector(nz, n, 4), z_detector(nz, n + 1, 4)]
        );
        assert!(fault.x_detectors.is_empty());
        assert!(!fault.logical_flip);
    }

    #[test]
    fn final_data_measurement_flip_has_one_or_two_defects_in_last_layer() {
        let n = 2;
        let (circuit, f) = faults(5, n);
        let nz = circuit.layout.z_checks.len();
        let finals: Vec<_> = f
            .iter()
            .filter(|x| x.origin == FaultOrigin::FinalMeasurement)
            .collect();
        assert_eq!(finals.len(), 25);
        for fault in finals {
            assert!((1..=2).contains(&fault.z_detectors.len()));
            assert!(fault
                .z_detectors
                .iter()
                .all(|&v| v >= z_detector(nz, n + 1, 0)));
        }
    }

    #[test]
    fn probability_mass_matches_location_count() {
        let (circuit, f) = faults(3, 3);
        let total: f64 = f.iter().map(|x| x.probability).sum();
        let expected = 0.01 * circuit.ops.len() as f64;
        assert!((total - expected).abs() < 1e-9, "{total} vs {expected}");
    }

    #[test]
    fn no_undetectable_single_fault_flips_logical() {
        for row in 0..3 {
            let layout = build_layout(3).unwrap();
            let circuit = build_memory_circuit(&layout, 3).unwrap();
            let f = enumerate_fault_classes(&circuit, 0.01, row).unwrap();
            assert!(f
                .iter()
                .all(|x| !(x.z_detectors.is_empty() && x.logical_flip)));
        }
    }

    #[test]
    fn rejects_bad_probability() {
        let layout = build_layout(3).unwrap();
        let circuit = build_memory_circuit(&layout, 1).unwrap();
        assert!(enumerate_fault_classes(&circuit, 0.5, 0).is_err());
        assert!(enumerate_fault_classes(&circuit, -0.1, 0).is_err());
    }

    #[test]
    fn single_round_has_no_x_detectors() {
        let (_, f) = faults(3, 1);
        assert!(f.iter().all(|x| x.x_detectors.is_empty()));
        assert!(f
            .iter()
            .flat_map(|x| x.z_detectors.iter())
            .all(|&v| v < 8));
    }
}
