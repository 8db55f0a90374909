//! Rotated surface code geometry.
//!
//! Data qubit `(r, c)` with `0 <= r, c < d` sits on a plaquette corner and
//! plaquette `(i, j)` with `0 <= i, j <= d` touches the data qubits
//! `(i-1, j-1)`, `(i-1, j)`, `(i, j-1)` and `(i, j)` that exist. Plaquettes
//! alternate type in a checkerboard: `(i + j)` even is X-type, odd is
//! Z-type. Weight-two plaquettes on the top and bottom rows are X-type and
//! those on the left and right columns are Z-type, so an X error on a
//! top-row or bottom-row data qubit is seen by a single Z check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliType {
    X,
    Z,
}

impl PauliType {
    pub fn name(self) -> &'static str {
        match self {
            PauliType::X => "X",
            PauliType::Z => "Z",
        }
    }
}

/// Corner of a plaquette, used to index [`Check::corners`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corner {
    NorthWest = 0,
    NorthEast = 1,
    SouthWest = 2,
    SouthEast = 3,
}

/// Z checks visit corners in an "N" shape, X checks in a "Z" shape. The last
/// two qubits touched by a Z check form a vertical pair and those of an X
/// check a horizontal pair, so a single ancilla fault half-way through
/// extraction spreads perpendicular to the logical operator it could
/// otherwise shorten.
pub const Z_ORDER: [Corner; 4] = [
    Corner::NorthWest,
    Corner::SouthWest,
    Corner::NorthEast,
    Corner::SouthEast,
];
pub const X_ORDER: [Corner; 4] = [
    Corner::NorthWest,
    Corner::NorthEast,
    Corner::SouthWest,
    Corner::SouthEast,
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub pauli: PauliType,
    /// Plaquette coordinate `(i, j)`.
    pub plaquette: (usize, usize),
    /// Data qubit index at each corner, `None` on weight-two boundary checks.
    pub corners: [Option<usize>; 4],
    /// Data qubit interacted with at CNOT time steps 1..=4.
    pub schedule: [Option<usize>; 4],
}

impl Check {
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.corners.iter().flatten().copied()
    }

    pub fn weight(&self) -> usize {
        self.corners.iter().flatten().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub d: usize,
    /// Z-type checks ordered by plaquette `(row, column)`.
    pub z_checks: Vec<Check>,
    /// X-type checks ordered by plaquette `(row, column)`.
    pub x_checks: Vec<Check>,
}

impl Layout {
    pub fn num_data(&self) -> usize {
        self.d * self.d
    }

    pub fn data_index(&self, row: usize, col: usize) -> usize {
        row * self.d + col
    }

    pub fn data_coord(&self, q: usize) -> (usize, usize) {
        (q / self.d, q % self.d)
    }

    pub fn checks(&self, pauli: PauliType) -> &[Check] {
        match pauli {
            PauliType::X => &self.x_checks,
            PauliType::Z => &self.z_checks,
        }
    }

    /// Number of checks of one type, `(d^2 - 1) / 2`.
    pub fn checks_per_type(&self) -> usize {
        (self.d * self.d - 1) / 2
    }

    /// Total qubit count: data qubits first, then Z ancillas, then X ancillas.
    pub fn num_qubits(&self) -> usize {
        self.num_data() + self.z_checks.len() + self.x_checks.len()
    }

    pub fn ancilla(&self, pauli: PauliType, check: usize) -> usize {
        match pauli {
            PauliType::Z => self.num_data() + check,
            PauliType::X => self.num_data() + self.z_checks.len() + check,
        }
    }

    /// For each data qubit, the indices of the checks of `pauli` type that
    /// contain it.
    pub fn data_to_checks(&self, pauli: PauliType) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_data()];
        for (idx, check) in self.checks(pauli).iter().enumerate() {
            for q in check.support() {
                out[q].push(idx);
            }
        }
        out
    }
}

/// Builds the `[[d^2, 1, d]]` rotated surface code layout with its CNOT
/// schedule.
pub fn build_layout(d: usize) -> Result<Layout> {
    if d < 3 || d % 2 == 0 {
        return Err(Error::InvalidDistance(d));
    }
    let mut z_checks = Vec::new();
    let mut x_checks = Vec::new();
    for i in 0..=d {
        for j in 0..=d {
            let pauli = if (i + j) % 2 == 0 { PauliType::X } else { PauliType::Z };
            let on_top_or_bottom = i == 0 || i == d;
            let on_left_or_right = j == 0 || j == d;
            let exists = match (on_top_or_bottom, on_left_or_right) {
                (true, true) => false,
                (true, false) => pauli == PauliType::X,
                (false, true) => pauli == PauliType::Z,
                (false, false) => true,
            };
            if !exists {
                continue;
            }
            let corner = |r: Option<usize>, c: Option<usize>| match (r, c) {
                (Some(r), Some(c)) if r < d && c < d => Some(r * d + c),
                _ => None,
            };
            let north = i.checked_sub(1);
            let west = j.checked_sub(1);
            let corners = [
                corner(north, west),
                corner(north, Some(j)),
                corner(Some(i), west),
                corner(Some(i), Some(j)),
            ];
            let order = match pauli {
                PauliType::Z => Z_ORDER,
                PauliType::X => X_ORDER,
            };
            let schedule = order.map(|c| corners[c as usize]);
            let check = Check {
                pauli,
                plaquette: (i, j),
                corners,
                schedule,
            };
            match pauli {
                PauliType::Z => z_checks.push(check),
                PauliType::X => x_checks.push(check),
            }
        }
    }
    Ok(Layout {
        d,
        z_checks,
        x_checks,
    })
}
