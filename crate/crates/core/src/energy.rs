//! First-order radio dissipation model and per-node energy accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::NodeState;

/// Radio constants, all in SI units (J/bit, J/bit/m², J/bit/m⁴).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub e_elec: f64,
    pub eps_fs: f64,
    pub eps_mp: f64,
    /// Aggregation cost per bit per fused message.
    pub e_da: f64,
    pub packet_bits: u64,
}

impl RadioParams {
    /// The literal values of the parameter table: E_elec = 5 nJ/bit,
    /// ε_fs = 10 pJ/bit/m², ε_mp = 0.0013 pJ/bit/m⁴, E_DA = 5 nJ/bit,
    /// 4000-bit messages.
    pub const fn table() -> Self {
        Self {
            e_elec: 5e-9,
            eps_fs: 10e-12,
            eps_mp: 0.0013e-12,
            e_da: 5e-9,
            packet_bits: 4000,
        }
    }

    /// Defaults used by scenarios: the table values with the customary
    /// 50 nJ/bit electronics cost, which is the value the reported
    /// lifetimes and energy curves correspond to.
    pub const fn calibrated() -> Self {
        Self {
            e_elec: 50e-9,
            ..Self::table()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("e_elec", self.e_elec),
            ("eps_fs", self.eps_fs),
            ("eps_mp", self.eps_mp),
            ("e_da", self.e_da),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("{v} must be positive")));
            }
        }
        if self.packet_bits == 0 {
            return Err(Error::config("packet_bits", "must be positive"));
        }
        Ok(())
    }

    pub fn d0(&self) -> f64 {
        d0_threshold(self)
    }
}

impl Default for RadioParams {
    fn default() -> Self {
        Self::calibrated()
    }
}

/// Crossover distance between the free-space and multipath amplifier
/// regimes.
pub fn d0_threshold(params: &RadioParams) -> f64 {
    (params.eps_fs / params.eps_mp).sqrt()
}

/// Energy to transmit `bits` over `distance` meters.
pub fn tx_energy(bits: u64, distance: f64, params: &RadioParams) -> f64 {
    let k = bits as f64;
    let amp = if distance < d0_threshold(params) {
        params.eps_fs * distance * distance
    } else {
        params.eps_mp * distance.powi(4)
    };
    k * params.e_elec + k * amp
}

pub fn rx_energy(bits: u64, params: &RadioParams) -> f64 {
    bits as f64 * params.e_elec
}

/// Cost of fusing `n_signals` messages of `bits` each into one packet.
/// `n_signals` includes the aggregator's own reading.
pub fn aggregate_energy(bits: u64, n_signals: usize, params: &RadioParams) -> f64 {
    params.e_da * bits as f64 * n_signals as f64
}

/// Outcome of charging a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDebit {
    pub requested: f64,
    pub paid: f64,
    /// The node could not pay in full, or was drained to exactly zero.
    /// The action being paid for did not happen.
    pub fatal: bool,
}

impl EnergyDebit {
    pub fn succeeded(&self) -> bool {
        !self.fatal
    }
}

/// Charges `amount` joules to `node`. A node drained to zero dies.
pub fn debit(node: &mut NodeState, amount: f64) -> Result<EnergyDebit> {
    if !node.alive {
        return Err(Error::DeadNode { node: node.id, amount });
    }
    debug_assert!(amount >= 0.0, "negative debit {amount}");
    let before = node.e_residual;
    if amount >= before {
        node.e_residual = 0.0;
        node.alive = false;
        node.is_ch_this_round = false;
        Ok(EnergyDebit {
            requested: amount,
            paid: before,
            fatal: true,
        })
    } else {
        node.e_residual = before - amount;
        Ok(EnergyDebit {
            requested: amount,
            paid: amount,
            fatal: false,
        })
    }
}
