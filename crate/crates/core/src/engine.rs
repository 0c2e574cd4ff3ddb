//! Round loop: election, advertisement, association, one TDMA frame of
//! data per member, aggregation and delivery to the base station.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{EnergyScope, RMode, ScenarioConfig};
use crate::energy::{aggregate_energy, debit, rx_energy, tx_energy, RadioParams};
use crate::error::Result;
use crate::layout::{place_nodes, total_initial_energy, FieldLayout, NodeState};
use crate::protocol::{elect_cluster_heads, estimate_r, ElectionContext, ProtocolKind};

/// Random stream used for node deployment.
pub const PLACEMENT_STREAM: u64 = 0;
/// Random stream used for per-round elections.
pub const ELECTION_STREAM: u64 = 1;
/// Random stream used by the discarded round-0 dry run.
pub const DRY_RUN_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: u64,
    pub alive: usize,
    pub dead: usize,
    pub ch_count: usize,
    pub energy_round: f64,
    pub energy_cum: f64,
    pub packets_bs_round: u64,
    pub packets_bs_cum: u64,
    pub packets_ch_round: u64,
    /// Direct-to-BS transmissions attempted by nodes in scopes without a
    /// cluster head. Not part of the CSV trace.
    #[serde(skip)]
    pub direct_round: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Round in which the first node died, if any did.
    pub first_death_round: Option<u64>,
    /// Round in which the last node died, if the network was exhausted.
    pub last_death_round: Option<u64>,
    /// Rounds before the first death.
    pub stable_region: Option<u64>,
    /// Rounds from first to last death.
    pub unstable_region: Option<u64>,
    pub total_packets_bs: u64,
    pub rounds_simulated: u64,
    pub seed: u64,
    /// Lifetime estimate used by the energy-aware elections.
    pub r_estimate: f64,
    pub total_initial_energy: f64,
    pub config_echo: ScenarioConfig,
}

/// Nodes that elect their cluster heads together.
#[derive(Debug, Clone, PartialEq)]
pub struct Scope {
    /// Static cluster index, or `None` for a network-wide scope.
    pub cluster: Option<usize>,
    /// Indices of the alive nodes in the scope, ascending.
    pub members: Vec<usize>,
    /// Range an advertisement must cover.
    pub radius: f64,
}

/// Election scopes for `kind`: the whole network for LEACH and DEEC, one
/// per non-empty static cluster for Ad-LEACH.
pub fn scope_of(kind: ProtocolKind, layout: &FieldLayout, nodes: &[NodeState]) -> Vec<Scope> {
    if kind.uses_static_clusters() {
        let mut per_cluster: Vec<Vec<usize>> = vec![Vec::new(); layout.q()];
        for n in nodes.iter().filter(|n| n.alive) {
            per_cluster[n.cluster_id].push(n.id);
        }
        per_cluster
            .into_iter()
            .enumerate()
            .filter(|(_, members)| !members.is_empty())
            .map(|(c, members)| Scope {
                cluster: Some(c),
                members,
                radius: layout.clusters[c].circumradius(),
            })
            .collect()
    } else {
        let members: Vec<usize> = nodes.iter().filter(|n| n.alive).map(|n| n.id).collect();
        if members.is_empty() {
            return Vec::new();
        }
        vec![Scope {
            cluster: None,
            members,
            radius: layout.bounds().circumradius(),
        }]
    }
}

/// One charge applied during a round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebitRecord {
    pub round: u64,
    pub node: usize,
    pub paid: f64,
}

/// Mutable simulation state: geometry, nodes and running totals.
#[derive(Debug, Clone)]
pub struct Network {
    pub layout: FieldLayout,
    pub nodes: Vec<NodeState>,
    pub radio: RadioParams,
    pub control_bits: u64,
    e_total: f64,
    /// Initial energy and node count per static cluster.
    cluster_energy: Vec<(f64, usize)>,
    energy_cum: f64,
    packets_bs_cum: u64,
    round_paid: f64,
    current_round: u64,
    debit_log: Option<Vec<DebitRecord>>,
}

impl Network {
    pub fn new(layout: FieldLayout, nodes: Vec<NodeState>, radio: RadioParams, control_bits: u64) -> Self {
        let mut cluster_energy = vec![(0.0, 0usize); layout.q()];
        for n in &nodes {
            let slot = &mut cluster_energy[n.cluster_id];
            slot.0 += n.e_init;
            slot.1 += 1;
        }
        Self {
            e_total: total_initial_energy(&nodes),
            layout,
            nodes,
            radio,
            control_bits,
            cluster_energy,
            energy_cum: 0.0,
            packets_bs_cum: 0,
            round_paid: 0.0,
            current_round: 0,
            debit_log: None,
        }
    }

    /// Lays out the field and deploys nodes as described by `config`.
    pub fn from_config<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let layout = FieldLayout::new(config.field_w, config.field_h, config.q)?;
        let nodes = place_nodes(&layout, config.n, &config.heterogeneity(), rng);
        Ok(Self::new(layout, nodes, config.radio, config.control_bits))
    }

    pub fn total_initial_energy(&self) -> f64 {
        self.e_total
    }

    pub fn alive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn residual_energy(&self) -> f64 {
        self.nodes.iter().map(|n| n.e_residual).sum()
    }

    pub fn energy_cum(&self) -> f64 {
        self.energy_cum
    }

    /// Starts recording every debit; see [`Network::take_debit_log`].
    pub fn record_debits(&mut self) {
        self.debit_log.get_or_insert_with(Vec::new);
    }

    pub fn take_debit_log(&mut self) -> Vec<DebitRecord> {
        self.debit_log.take().unwrap_or_default()
    }

    /// Charges node `i`; returns whether the paid-for action went through.
    fn charge(&mut self, i: usize, amount: f64) -> bool {
        let d = debit(&mut self.nodes[i], amount).expect("round loop only charges alive nodes");
        self.round_paid += d.paid;
        if let Some(log) = self.debit_log.as_mut() {
            log.push(DebitRecord {
                round: self.current_round,
                node: i,
                paid: d.paid,
            });
        }
        d.succeeded()
    }

    fn distance(&self, a: usize, b: usize) -> f64 {
        self.nodes[a].position.distance(&self.nodes[b].position)
    }

    fn distance_to_bs(&self, i: usize) -> f64 {
        self.nodes[i].position.distance(&self.layout.bs_position)
    }

    fn scope_context(&self, base: &ElectionContext, scope: &Scope, e_scope: EnergyScope, r: u64) -> ElectionContext {
        let mut ctx = ElectionContext {
            e_total: self.e_total,
            scope_size: self.nodes.len(),
            ..*base
        };
        if let (EnergyScope::Cluster, Some(c)) = (e_scope, scope.cluster) {
            let (e, count) = self.cluster_energy[c];
            ctx.e_total = e;
            ctx.scope_size = count;
        }
        ctx.at_round(r)
    }

    /// Executes round `r`. `base` supplies `p_opt`, `m`, `a` and the
    /// lifetime estimate; the average-energy estimate is recomputed per
    /// scope from `e_scope`.
    pub fn run_round<R: Rng + ?Sized>(
        &mut self,
        r: u64,
        kind: ProtocolKind,
        base: &ElectionContext,
        e_scope: EnergyScope,
        rng: &mut R,
    ) -> RoundMetrics {
        self.current_round = r;
        self.round_paid = 0.0;
        for n in &mut self.nodes {
            n.is_ch_this_round = false;
        }

        let packet = self.radio.packet_bits;
        let control = self.control_bits;
        let radio = self.radio;
        let mut ch_count = 0;
        let mut packets_bs = 0u64;
        let mut packets_ch = 0u64;
        let mut direct = 0u64;

        for scope in scope_of(kind, &self.layout, &self.nodes) {
            let ctx = self.scope_context(base, &scope, e_scope, r);
            let elected = elect_cluster_heads(&mut self.nodes, &scope.members, &ctx, kind, rng);

            // Advertisement.
            let adv_cost = tx_energy(control, scope.radius, &radio);
            let heads: Vec<usize> = elected
                .into_iter()
                .filter(|&h| self.charge(h, adv_cost))
                .collect();

            if heads.is_empty() {
                for &i in &scope.members {
                    if self.nodes[i].alive {
                        direct += 1;
                        let cost = tx_energy(packet, self.distance_to_bs(i), &radio);
                        if self.charge(i, cost) {
                            packets_bs += 1;
                        }
                    }
                }
                continue;
            }
            ch_count += heads.len();

            let listen_cost = rx_energy(control, &radio);
            for &i in &scope.members {
                let node = &self.nodes[i];
                if !node.alive || node.is_ch_this_round {
                    continue;
                }
                for _ in &heads {
                    if !self.charge(i, listen_cost) {
                        break;
                    }
                }
            }

            // Association: nearest alive head, ties to the lowest id.
            let mut members_of: Vec<Vec<usize>> = vec![Vec::new(); heads.len()];
            for &i in &scope.members {
                let node = &self.nodes[i];
                if !node.alive || node.is_ch_this_round {
                    continue;
                }
                let nearest = heads
                    .iter()
                    .enumerate()
                    .filter(|(_, &h)| self.nodes[h].alive)
                    .map(|(slot, &h)| (slot, h, self.distance(i, h)))
                    .min_by(|a, b| a.2.total_cmp(&b.2).then(a.1.cmp(&b.1)));
                let Some((slot, h, d)) = nearest else {
                    continue;
                };
                if self.charge(i, tx_energy(control, d, &radio)) && self.charge(h, rx_energy(control, &radio)) {
                    members_of[slot].push(i);
                }
            }

            // Steady state: one frame per member, then aggregate and relay.
            let data_rx = rx_energy(packet, &radio);
            for (slot, &h) in heads.iter().enumerate() {
                let mut received = 0usize;
                for &i in &members_of[slot] {
                    if !self.nodes[h].alive {
                        break;
                    }
                    if !self.nodes[i].alive {
                        continue;
                    }
                    let cost = tx_energy(packet, self.distance(i, h), &radio);
                    if self.charge(i, cost) && self.charge(h, data_rx) {
                        received += 1;
                    }
                }
                packets_ch += received as u64;
                if !self.nodes[h].alive {
                    continue;
                }
                let fused = aggregate_energy(packet, received + 1, &radio);
                if self.charge(h, fused) {
                    let uplink = tx_energy(packet, self.distance_to_bs(h), &radio);
                    if self.charge(h, uplink) {
                        packets_bs += 1;
                    }
                }
            }
        }

        self.energy_cum += self.round_paid;
        self.packets_bs_cum += packets_bs;
        let alive = self.alive_count();
        RoundMetrics {
            round: r,
            alive,
            dead: self.nodes.len() - alive,
            ch_count,
            energy_round: self.round_paid,
            energy_cum: self.energy_cum,
            packets_bs_round: packets_bs,
            packets_bs_cum: self.packets_bs_cum,
            packets_ch_round: packets_ch,
            direct_round: direct,
        }
    }
}

/// Full result of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub trace: Vec<RoundMetrics>,
    pub summary: RunSummary,
}

/// Election context shared by every round of a run, before the
/// per-round average-energy update.
pub fn base_context(config: &ScenarioConfig, net: &Network, r_estimate: f64) -> ElectionContext {
    let mut ctx = ElectionContext {
        round: 0,
        p_opt: config.p_opt,
        m: config.m,
        a: config.a,
        e_total: net.total_initial_energy(),
        r_estimate,
        e_avg: 0.0,
        scope_size: net.nodes.len(),
    };
    ctx.e_avg = crate::protocol::average_energy(0, &ctx);
    ctx
}

/// Resolves the lifetime estimate for a freshly built network.
pub fn bootstrap_r(config: &ScenarioConfig, net: &Network) -> f64 {
    let e_total = net.total_initial_energy();
    let fallback = config.max_rounds.max(1) as f64;
    match config.r_mode {
        RMode::Fixed(r) => r,
        RMode::Analytic(e_round) => estimate_r(e_total, e_round).unwrap_or(fallback),
        RMode::Measured => {
            let mut dry = net.clone();
            let ctx = base_context(config, &dry, f64::INFINITY);
            let mut rng = stream(config.seed, DRY_RUN_STREAM);
            let m = dry.run_round(0, config.protocol, &ctx, config.e_avg_scope, &mut rng);
            estimate_r(e_total, m.energy_round).unwrap_or(fallback)
        }
    }
}

/// Seeded ChaCha stream `stream_id` for run `seed`.
pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Runs `config` from deployment until every node is dead or
/// `max_rounds` rounds have been played. Output depends only on the
/// config (including its seed).
pub fn run_simulation(config: &ScenarioConfig) -> Result<SimulationOutput> {
    config.validate()?;
    let mut placement = stream(config.seed, PLACEMENT_STREAM);
    let mut net = Network::from_config(config, &mut placement)?;
    let mut rng = stream(config.seed, ELECTION_STREAM);
    Ok(run_network(config, &mut net, &mut rng))
}

/// Drives an already-built network with the given election stream.
pub fn run_network<R: Rng + ?Sized>(config: &ScenarioConfig, net: &mut Network, rng: &mut R) -> SimulationOutput {
    let r_estimate = bootstrap_r(config, net);
    let ctx = base_context(config, net, r_estimate);
    let n = net.nodes.len();

    let mut trace = Vec::new();
    let mut first_death = None;
    let mut last_death = None;
    let mut r = 0u64;
    while r < config.max_rounds && net.alive_count() > 0 {
        let m = net.run_round(r, config.protocol, &ctx, config.e_avg_scope, rng);
        if m.dead > 0 && first_death.is_none() {
            first_death = Some(r);
        }
        if m.dead == n {
            last_death = Some(r);
        }
        trace.push(m);
        r += 1;
    }

    let summary = RunSummary {
        first_death_round: first_death,
        last_death_round: last_death,
        stable_region: first_death,
        unstable_region: first_death.zip(last_death).map(|(f, l)| l - f),
        total_packets_bs: trace.last().map_or(0, |m| m.packets_bs_cum),
        rounds_simulated: trace.len() as u64,
        seed: config.seed,
        r_estimate,
        total_initial_energy: net.total_initial_energy(),
        config_echo: config.clone(),
    };
    SimulationOutput { trace, summary }
}
