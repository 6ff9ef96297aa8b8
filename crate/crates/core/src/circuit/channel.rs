use num_complex::Complex64;

use super::gate::check_distinct;
use super::CircuitError;

/// Tolerance for `Σ K†K = I`.
pub const KRAUS_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelKind {
    /// `(1-p)ρ + p XρX`
    BitFlip(f64),
    /// `(1-p)ρ + p ZρZ`
    PhaseFlip(f64),
    /// `Σ K ρ K†`, each operator row-major over the targets.
    Kraus(Vec<Vec<Complex64>>),
}

/// A noise channel in operator-sum form acting on `targets`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub kind: ChannelKind,
    pub targets: Vec<usize>,
}

/// One weighted term `w K ρ K†`; `None` stands for the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelTerm {
    pub weight: f64,
    pub operator: Option<Vec<Complex64>>,
}

fn check_probability(p: f64) -> Result<(), CircuitError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CircuitError::InvalidProbability(p));
    }
    Ok(())
}

fn r(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl Channel {
    pub fn bit_flip(qubit: usize, p: f64) -> Result<Channel, CircuitError> {
        check_probability(p)?;
        Ok(Channel {
            kind: ChannelKind::BitFlip(p),
            targets: vec![qubit],
        })
    }

    pub fn phase_flip(qubit: usize, p: f64) -> Result<Channel, CircuitError> {
        check_probability(p)?;
        Ok(Channel {
            kind: ChannelKind::PhaseFlip(p),
            targets: vec![qubit],
        })
    }

    /// Validated Kraus channel.
    pub fn kraus(targets: Vec<usize>, operators: Vec<Vec<Complex64>>) -> Result<Channel, CircuitError> {
        if targets.is_empty() || operators.is_empty() {
            return Err(CircuitError::IncompleteKraus);
        }
        check_distinct(targets.iter().copied())?;
        let dim = 1usize << targets.len();
        if operators.iter().any(|k| k.len() != dim * dim) {
            return Err(CircuitError::BadPayload {
                name: "kraus".into(),
                message: format!("every operator needs {} entries", dim * dim),
            });
        }
        for i in 0..dim {
            for j in 0..dim {
                let s: Complex64 = operators
                    .iter()
                    .map(|k| (0..dim).map(|m| k[m * dim + i].conj() * k[m * dim + j]).sum::<Complex64>())
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (s - r(want)).norm() > KRAUS_TOL {
                    return Err(CircuitError::IncompleteKraus);
                }
            }
        }
        Ok(Channel {
            kind: ChannelKind::Kraus(operators),
            targets,
        })
    }

    /// Single-qubit depolarizing channel as a Kraus set.
    pub fn depolarizing(qubit: usize, p: f64) -> Result<Channel, CircuitError> {
        check_probability(p)?;
        let a = (1.0 - 3.0 * p / 4.0).sqrt();
        let b = (p / 4.0).sqrt();
        let (o, i) = (r(0.0), Complex64::new(0.0, 1.0));
        Channel::kraus(
            vec![qubit],
            vec![
                vec![r(a), o, o, r(a)],
                vec![o, r(b), r(b), o],
                vec![o, -i * b, i * b, o],
                vec![r(b), o, o, r(-b)],
            ],
        )
    }

    /// Single-qubit amplitude damping with decay probability `gamma`.
    pub fn amplitude_damping(qubit: usize, gamma: f64) -> Result<Channel, CircuitError> {
        check_probability(gamma)?;
        let o = r(0.0);
        Channel::kraus(
            vec![qubit],
            vec![
                vec![r(1.0), o, o, r((1.0 - gamma).sqrt())],
                vec![o, r(gamma.sqrt()), o, o],
            ],
        )
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ChannelKind::BitFlip(_) => "bitflip",
            ChannelKind::PhaseFlip(_) => "phaseflip",
            ChannelKind::Kraus(_) => "kraus",
        }
    }

    /// Operator-sum terms with zero weights dropped.
    pub fn terms(&self) -> Vec<ChannelTerm> {
        let flip = |p: f64, op: Vec<Complex64>| {
            [
                ChannelTerm {
                    weight: 1.0 - p,
                    operator: None,
                },
                ChannelTerm {
                    weight: p,
                    operator: Some(op),
                },
            ]
            .into_iter()
            .filter(|t| t.weight != 0.0)
            .collect()
        };
        match &self.kind {
            ChannelKind::BitFlip(p) => flip(*p, vec![r(0.0), r(1.0), r(1.0), r(0.0)]),
            ChannelKind::PhaseFlip(p) => flip(*p, vec![r(1.0), r(0.0), r(0.0), r(-1.0)]),
            ChannelKind::Kraus(ops) => ops
                .iter()
                .map(|k| ChannelTerm {
                    weight: 1.0,
                    operator: Some(k.clone()),
                })
                .collect(),
        }
    }
}
