//! Cluster-head election kernels for LEACH, DEEC and Ad-LEACH.
//!
//! Everything here is a pure function of node state, an
//! [`ElectionContext`] and an explicit random stream. The only mutation
//! is the eligibility bookkeeping done by [`elect_cluster_heads`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{NodeKind, NodeState};

/// Lower bound for the estimated average energy, so late rounds
/// (`r >= R`) never divide by zero.
pub const E_AVG_FLOOR: f64 = 1e-9;

/// Smallest probability handed to the threshold; bounds the rotation
/// epoch at one million rounds.
pub const P_MIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProtocolKind {
    #[serde(rename = "leach")]
    Leach,
    #[serde(rename = "deec")]
    Deec,
    #[serde(rename = "adleach")]
    AdLeach,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 3] = [ProtocolKind::Leach, ProtocolKind::Deec, ProtocolKind::AdLeach];

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolKind::Leach => "leach",
            ProtocolKind::Deec => "deec",
            ProtocolKind::AdLeach => "adleach",
        }
    }

    /// Whether elections run independently inside each static cluster.
    pub fn uses_static_clusters(&self) -> bool {
        matches!(self, ProtocolKind::AdLeach)
    }

    pub fn is_energy_aware(&self) -> bool {
        !matches!(self, ProtocolKind::Leach)
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "leach" => Ok(ProtocolKind::Leach),
            "deec" => Ok(ProtocolKind::Deec),
            "adleach" => Ok(ProtocolKind::AdLeach),
            other => Err(Error::config("protocol", format!("unknown protocol `{other}`"))),
        }
    }
}

/// Network-wide knowledge a node uses to decide whether to stand as
/// cluster head in a given round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectionContext {
    pub round: u64,
    pub p_opt: f64,
    pub m: f64,
    pub a: f64,
    /// Total initial energy broadcast by the base station.
    pub e_total: f64,
    /// Estimated network lifetime in rounds.
    pub r_estimate: f64,
    /// Estimated average residual energy at `round`.
    pub e_avg: f64,
    /// Population the average is taken over.
    pub scope_size: usize,
}

impl ElectionContext {
    /// Same context at round `r`, with the average energy recomputed.
    pub fn at_round(&self, r: u64) -> Self {
        let mut ctx = Self { round: r, ..*self };
        ctx.e_avg = average_energy(r, &ctx);
        ctx
    }
}

/// Linearly decaying estimate of the average residual energy:
/// `e_total / scope_size * (1 - r / R)`, floored at [`E_AVG_FLOOR`].
pub fn average_energy(r: u64, ctx: &ElectionContext) -> f64 {
    let n = ctx.scope_size.max(1) as f64;
    let avg = ctx.e_total / n * (1.0 - r as f64 / ctx.r_estimate);
    avg.max(E_AVG_FLOOR)
}

/// Lifetime estimate `e_total / e_round`.
pub fn estimate_r(e_total: f64, e_round: f64) -> Result<f64> {
    if e_round.is_nan() || e_round <= 0.0 || !e_round.is_finite() {
        return Err(Error::Estimation(e_round));
    }
    Ok(e_total / e_round)
}

/// DEEC's two-level energy-weighted election probability. Advanced nodes
/// get the extra `(1 + a)` factor.
pub fn reference_probability(node: &NodeState, ctx: &ElectionContext) -> f64 {
    debug_assert!(node.alive, "probability requested for dead node {}", node.id);
    let normal = ctx.p_opt * node.e_residual / ((1.0 + ctx.a * ctx.m) * ctx.e_avg);
    let p = match node.kind {
        NodeKind::Normal => normal,
        NodeKind::Advanced => normal * (1.0 + ctx.a),
    };
    p.clamp(P_MIN, 1.0)
}

/// LEACH ignores energy and node kind entirely.
pub fn leach_probability(node: &NodeState, p_opt: f64) -> f64 {
    assert!(node.alive, "probability requested for dead node {}", node.id);
    p_opt
}

/// Rotation epoch, in rounds, for a node standing with probability `p`.
pub fn epoch_length(p: f64) -> u64 {
    (1.0 / p).round().max(1.0) as u64
}

/// First round of the rotation epoch following the one containing `r`.
///
/// Eligibility resets on epoch boundaries shared by every node with the
/// same epoch length. A per-node sliding window would drift nodes toward
/// the last phase of the epoch, where the threshold is 1, and elect them
/// all in the same round.
pub fn next_epoch_start(r: u64, p: f64) -> u64 {
    let len = epoch_length(p);
    (r / len + 1) * len
}

/// Rotating threshold `p / (1 - p * (r mod round(1/p)))`, zero for
/// ineligible nodes and clamped to 1.
pub fn election_threshold(p: f64, r: u64, eligible: bool) -> f64 {
    if !eligible {
        return 0.0;
    }
    let phase = (r % epoch_length(p)) as f64;
    let denom = 1.0 - p * phase;
    if denom <= 0.0 {
        1.0
    } else {
        (p / denom).min(1.0)
    }
}

/// Per-node election probability under `kind`.
pub fn election_probability(node: &NodeState, ctx: &ElectionContext, kind: ProtocolKind) -> f64 {
    match kind {
        ProtocolKind::Leach => leach_probability(node, ctx.p_opt),
        ProtocolKind::Deec | ProtocolKind::AdLeach => reference_probability(node, ctx),
    }
}

/// Runs one election over the nodes indexed by `scope`. Every node draws
/// exactly one uniform variate, in scope order. Winners are flagged as
/// cluster heads and barred for the rest of their rotation epoch, i.e.
/// until the next multiple of `round(1/p_i)` with `p_i` taken at
/// election time.
pub fn elect_cluster_heads<R: Rng + ?Sized>(
    nodes: &mut [NodeState],
    scope: &[usize],
    ctx: &ElectionContext,
    kind: ProtocolKind,
    rng: &mut R,
) -> Vec<usize> {
    let r = ctx.round;
    let mut heads = Vec::new();
    for &i in scope {
        let node = &mut nodes[i];
        debug_assert!(node.alive);
        let p = election_probability(node, ctx, kind);
        let threshold = election_threshold(p, r, node.is_eligible(r));
        let u: f64 = rng.gen();
        if u < threshold {
            node.is_ch_this_round = true;
            node.ineligible_until = next_epoch_start(r, p);
            heads.push(i);
        }
    }
    heads
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::Point;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx(m: f64, a: f64) -> ElectionContext {
        ElectionContext {
            round: 0,
            p_opt: 0.1,
            m,
            a,
            e_total: 50.0,
            r_estimate: 2500.0,
            e_avg: 0.5,
            scope_size: 100,
        }
    }

    fn node(id: usize, kind: NodeKind, residual: f64) -> NodeState {
        let mut n = NodeState::new(id, Point::new(0.0, 0.0), kind, residual.max(0.5), 0);
        n.e_residual = residual;
        n
    }

    #[test]
    fn average_energy_ramp() {
        let c = ctx(0.1, 0.0);
        assert!((average_energy(0, &c) - 0.5).abs() < 1e-15);
        assert!((average_energy(1250, &c) - 0.25).abs() < 1e-15);
        assert_eq!(average_energy(2500, &c), E_AVG_FLOOR);
        assert_eq!(average_energy(9000, &c), E_AVG_FLOOR);
    }

    #[test]
    fn lifetime_estimates() {
        assert!((estimate_r(50.0, 0.02).unwrap() - 2500.0).abs() < 1e-9);
        assert!((estimate_r(55.0, 0.02).unwrap() - 2750.0).abs() < 1e-9);
        assert!((estimate_r(50.0, 0.5).unwrap() - 100.0).abs() < 1e-12);
        assert!(matches!(estimate_r(50.0, 0.0), Err(Error::Estimation(_))));
        assert!(estimate_r(50.0, -1.0).is_err());
    }

    #[test]
    fn two_level_probabilities() {
        let c = ctx(0.1, 1.0);
        let normal = reference_probability(&node(0, NodeKind::Normal, 0.5), &c);
        let adv = reference_probability(&node(1, NodeKind::Advanced, 0.5), &c);
        assert!((normal - 0.1 / 1.1).abs() < 1e-15);
        assert!((adv - 0.2 / 1.1).abs() < 1e-15);

        let h = ctx(0.1, 0.0);
        assert_eq!(reference_probability(&node(0, NodeKind::Normal, 0.5), &h), 0.1);
        assert_eq!(reference_probability(&node(1, NodeKind::Advanced, 0.5), &h), 0.1);
    }

    #[test]
    fn probability_is_clamped() {
        let mut c = ctx(0.1, 0.0);
        c.e_avg = E_AVG_FLOOR;
        assert_eq!(reference_probability(&node(0, NodeKind::Normal, 0.4), &c), 1.0);
        c.e_avg = 1e6;
        assert_eq!(reference_probability(&node(0, NodeKind::Normal, 1e-12), &c), P_MIN);
    }

    #[test]
    fn leach_ignores_energy() {
        assert_eq!(leach_probability(&node(0, NodeKind::Normal, 0.5), 0.1), 0.1);
        assert_eq!(leach_probability(&node(0, NodeKind::Advanced, 2.5), 0.1), 0.1);
    }

    #[test]
    #[should_panic(expected = "dead node")]
    fn leach_rejects_dead_nodes() {
        let mut n = node(3, NodeKind::Normal, 0.5);
        n.alive = false;
        leach_probability(&n, 0.1);
    }

    #[test]
    fn threshold_examples() {
        assert!((election_threshold(0.1, 0, true) - 0.1).abs() < 1e-15);
        assert_eq!(election_threshold(0.1, 9, true), 1.0);
        assert_eq!(election_threshold(0.1, 5, false), 0.0);
        assert_eq!(election_threshold(1.0, 17, true), 1.0);
        assert!((election_threshold(0.1, 10, true) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn nobody_eligible_nobody_elected() {
        let mut nodes: Vec<_> = (0..20).map(|i| node(i, NodeKind::Normal, 0.5)).collect();
        for n in &mut nodes {
            n.ineligible_until = 5;
        }
        let scope: Vec<usize> = (0..20).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let heads = elect_cluster_heads(&mut nodes, &scope, &ctx(0.1, 0.0), ProtocolKind::Deec, &mut rng);
        assert!(heads.is_empty());
    }

    #[test]
    fn certain_election() {
        let mut nodes = vec![node(0, NodeKind::Normal, 0.5)];
        let mut c = ctx(0.1, 0.0);
        c.round = 9;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let heads = elect_cluster_heads(&mut nodes, &[0], &c, ProtocolKind::Leach, &mut rng);
        assert_eq!(heads, vec![0]);
        assert!(nodes[0].is_ch_this_round);
        assert_eq!(nodes[0].ineligible_until, 10);
    }

    #[test]
    fn epoch_boundaries() {
        assert_eq!(next_epoch_start(0, 0.1), 10);
        assert_eq!(next_epoch_start(9, 0.1), 10);
        assert_eq!(next_epoch_start(10, 0.1), 20);
        assert_eq!(next_epoch_start(7, 1.0), 8);
        assert_eq!(next_epoch_start(7, 0.25), 8);
    }

    #[test]
    fn parse_protocol_names() {
        assert_eq!("Ad-LEACH".parse::<ProtocolKind>().unwrap(), ProtocolKind::AdLeach);
        assert_eq!("deec".parse::<ProtocolKind>().unwrap(), ProtocolKind::Deec);
        assert!("sep".parse::<ProtocolKind>().is_err());
    }
}
