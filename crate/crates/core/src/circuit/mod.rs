//! Parameterized circuit IR, ansatz constructors, depth and routing.

mod ansatz;
mod routing;

pub use ansatz::{
    build_cyclic, build_ora, build_real_amplitudes, build_tailored, tailored_grid_layout,
    DEFAULT_CYCLIC_RANGES, DEFAULT_ORA_REPS,
};
pub use routing::{logical_depth, route_and_depth, CouplingMap, RoutedCircuit};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("cyclic block of range {d} on {n_q} qubits maps every control onto its target")]
    DegenerateBlock { n_q: usize, d: usize },
    #[error("ORA ansatz needs at least two time steps (got {0})")]
    TooFewTimeSteps(usize),
    #[error("coupling map is disconnected between physical qubits {0} and {1}")]
    DisconnectedMap(usize, usize),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("invalid circuit: {0}")]
    Invalid(String),
    #[error("invalid coupling map at line {line}: {message}")]
    MapParse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Ry,
    Rx,
    Rz,
    Rzz,
    Cnot,
    Swap,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Ry | GateKind::Rx | GateKind::Rz => 1,
            GateKind::Rzz | GateKind::Cnot | GateKind::Swap => 2,
        }
    }

    pub fn is_rotation(self) -> bool {
        !matches!(self, GateKind::Cnot | GateKind::Swap)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateKind::Ry => "RY",
            GateKind::Rx => "RX",
            GateKind::Rz => "RZ",
            GateKind::Rzz => "RZZ",
            GateKind::Cnot => "CNOT",
            GateKind::Swap => "SWAP",
        };
        f.write_str(s)
    }
}

/// Rotation angle: a slot in the parameter vector or a literal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Param(usize),
    Fixed(f64),
}

impl Angle {
    pub fn resolve(self, params: &[f64]) -> f64 {
        match self {
            Angle::Param(slot) => params[slot],
            Angle::Fixed(value) => value,
        }
    }
}

/// One gate. For CNOT the qubits are `(control, target)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    kind: GateKind,
    qubits: [usize; 2],
    angle: Option<Angle>,
}

impl Gate {
    pub fn ry(qubit: usize, angle: Angle) -> Self {
        Self::rotation(GateKind::Ry, qubit, angle)
    }

    pub fn rx(qubit: usize, angle: Angle) -> Self {
        Self::rotation(GateKind::Rx, qubit, angle)
    }

    pub fn rz(qubit: usize, angle: Angle) -> Self {
        Self::rotation(GateKind::Rz, qubit, angle)
    }

    pub fn rzz(a: usize, b: usize, angle: Angle) -> Self {
        Self {
            kind: GateKind::Rzz,
            qubits: [a, b],
            angle: Some(angle),
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cnot,
            qubits: [control, target],
            angle: None,
        }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self {
            kind: GateKind::Swap,
            qubits: [a, b],
            angle: None,
        }
    }

    fn rotation(kind: GateKind, qubit: usize, angle: Angle) -> Self {
        Self {
            kind,
            qubits: [qubit, qubit],
            angle: Some(angle),
        }
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    pub fn angle(&self) -> Option<Angle> {
        self.angle
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind.arity() == 2
    }

    /// Same gate acting on relabelled qubits.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Self {
        let mut g = *self;
        g.qubits = [map(self.qubits[0]), map(self.qubits[1])];
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    n_params: usize,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            n_params: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Reserves the next parameter slot.
    pub fn fresh_param(&mut self) -> Angle {
        self.n_params += 1;
        Angle::Param(self.n_params - 1)
    }

    /// Appends a gate. Panics on out-of-range or repeated qubits; use
    /// [`Circuit::validate`] for untrusted input.
    pub fn push(&mut self, gate: Gate) {
        if let Err(e) = self.check_gate(&gate) {
            panic!("{e}");
        }
        self.gates.push(gate);
    }

    pub fn ry_fresh(&mut self, qubit: usize) {
        let angle = self.fresh_param();
        self.push(Gate::ry(qubit, angle));
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    pub fn cnots(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .filter(|g| g.kind == GateKind::Cnot)
            .map(|g| (g.qubits[0], g.qubits[1]))
            .collect()
    }

    fn check_gate(&self, gate: &Gate) -> Result<(), CircuitError> {
        let qs = gate.qubits();
        if let Some(&q) = qs.iter().find(|&&q| q >= self.n_qubits) {
            return Err(CircuitError::Invalid(format!(
                "{} on qubit {q} of a {}-qubit circuit",
                gate.kind, self.n_qubits
            )));
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(CircuitError::Invalid(format!(
                "{} needs two distinct qubits, got {} twice",
                gate.kind, qs[0]
            )));
        }
        match (gate.kind.is_rotation(), gate.angle) {
            (true, None) => Err(CircuitError::Invalid(format!("{} without angle", gate.kind))),
            (false, Some(_)) => Err(CircuitError::Invalid(format!("{} with angle", gate.kind))),
            _ => Ok(()),
        }
    }

    /// Checks qubit ranges and that parameter slots cover `[0, n_params)`.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let mut used = vec![false; self.n_params];
        for gate in &self.gates {
            self.check_gate(gate)?;
            if let Some(Angle::Param(slot)) = gate.angle {
                match used.get_mut(slot) {
                    Some(u) => *u = true,
                    None => {
                        return Err(CircuitError::Invalid(format!(
                            "parameter slot {slot} >= n_params {}",
                            self.n_params
                        )))
                    }
                }
            }
        }
        if let Some(slot) = used.iter().position(|u| !u) {
            return Err(CircuitError::Invalid(format!(
                "parameter slot {slot} is never used"
            )));
        }
        Ok(())
    }

    pub(crate) fn from_parts(
        n_qubits: usize,
        gates: Vec<Gate>,
        n_params: usize,
    ) -> Result<Self, CircuitError> {
        let c = Self {
            n_qubits,
            gates,
            n_params,
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Serialize, Deserialize)]
struct GateWire {
    kind: GateKind,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param_slot: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct CircuitWire {
    n_qubits: usize,
    n_params: usize,
    gates: Vec<GateWire>,
}

impl Serialize for Circuit {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let wire = CircuitWire {
            n_qubits: self.n_qubits,
            n_params: self.n_params,
            gates: self
                .gates
                .iter()
                .map(|g| GateWire {
                    kind: g.kind,
                    qubits: g.qubits().to_vec(),
                    param_slot: match g.angle {
                        Some(Angle::Param(s)) => Some(s),
                        _ => None,
                    },
                    angle: match g.angle {
                        Some(Angle::Fixed(v)) => Some(v),
                        _ => None,
                    },
                })
                .collect(),
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let wire = CircuitWire::deserialize(deserializer)?;
        let mut gates = Vec::with_capacity(wire.gates.len());
        for g in wire.gates {
            if g.qubits.len() != g.kind.arity() {
                return Err(D::Error::custom(format!(
                    "{} expects {} qubits",
                    g.kind,
                    g.kind.arity()
                )));
            }
            let angle = match (g.param_slot, g.angle) {
                (Some(s), None) => Some(Angle::Param(s)),
                (None, Some(v)) => Some(Angle::Fixed(v)),
                (None, None) => None,
                (Some(_), Some(_)) => {
                    return Err(D::Error::custom("gate has both param_slot and angle"))
                }
            };
            let q1 = if g.kind.arity() == 2 { g.qubits[1] } else { g.qubits[0] };
            gates.push(Gate {
                kind: g.kind,
                qubits: [g.qubits[0], q1],
                angle,
            });
        }
        Circuit::from_parts(wire.n_qubits, gates, wire.n_params).map_err(D::Error::custom)
    }
}
