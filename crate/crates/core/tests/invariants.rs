use hetsim_core::energy::{debit, rx_energy, tx_energy, RadioParams};
use hetsim_core::layout::{partition_field, place_nodes, total_initial_energy, FieldLayout, HeterogeneityConfig, NodeKind};
use hetsim_core::protocol::{election_threshold, epoch_length, reference_probability, ElectionContext};
use hetsim_core::{NodeState, Point};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ctx(m: f64, a: f64, e_avg: f64) -> ElectionContext {
    ElectionContext {
        round: 0,
        p_opt: 0.1,
        m,
        a,
        e_total: 50.0,
        r_estimate: 1000.0,
        e_avg,
        scope_size: 100,
    }
}

fn node(kind: NodeKind, residual: f64) -> NodeState {
    let mut n = NodeState::new(0, Point::new(0.0, 0.0), kind, 10.0, 0);
    n.e_residual = residual;
    n
}

#[test]
fn advanced_count_is_exact() {
    let layout = FieldLayout::new(100.0, 50.0, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in [0.0, 0.1, 0.5, 1.0] {
        for n in 1..=200usize {
            let het = HeterogeneityConfig { m, a: 1.0, e0: 0.5 };
            let nodes = place_nodes(&layout, n, &het, &mut rng);
            let adv = nodes.iter().filter(|x| x.kind == NodeKind::Advanced).count();
            assert_eq!(adv, (m * n as f64).round() as usize, "m={m} n={n}");
        }
    }
}

proptest! {
    #[test]
    fn partition_tiles_the_field(w in 0.5f64..1e4, h in 0.5f64..1e4, q in 1usize..64) {
        let cells = partition_field(w, h, q).unwrap();
        prop_assert_eq!(cells.len(), q);
        let area: f64 = cells.iter().map(|c| c.area()).sum();
        prop_assert!(((area - w * h) / (w * h)).abs() <= 1e-12);
        prop_assert!(cells.iter().all(|c| c.area() > 0.0));
        for (i, a) in cells.iter().enumerate() {
            for b in &cells[i + 1..] {
                let ox = (a.x1.min(b.x1) - a.x0.max(b.x0)).max(0.0);
                let oy = (a.y1.min(b.y1) - a.y0.max(b.y0)).max(0.0);
                prop_assert!(ox * oy == 0.0, "overlapping cells {:?} {:?}", a, b);
            }
        }
    }

    #[test]
    fn nodes_land_in_exactly_one_cluster(seed in any::<u64>(), q in 1usize..13, n in 1usize..300) {
        let layout = FieldLayout::new(100.0, 50.0, q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let het = HeterogeneityConfig { m: 0.1, a: 1.0, e0: 0.5 };
        for node in place_nodes(&layout, n, &het, &mut rng) {
            let owners = layout.clusters.iter().filter(|c| c.contains_half_open(&node.position)).count();
            prop_assert_eq!(owners, 1);
            prop_assert!(layout.clusters[node.cluster_id].contains_half_open(&node.position));
        }
    }

    #[test]
    fn total_energy_matches_cluster_closed_form(seed in any::<u64>(), m in 0.0f64..=1.0, a in 0.0f64..5.0) {
        let layout = FieldLayout::new(100.0, 50.0, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let het = HeterogeneityConfig { m, a, e0: 0.5 };
        let nodes = place_nodes(&layout, 100, &het, &mut rng);
        let closed: f64 = (0..layout.q())
            .map(|c| {
                let members: Vec<_> = nodes.iter().filter(|n| n.cluster_id == c).collect();
                if members.is_empty() {
                    return 0.0;
                }
                let n_cls = members.len() as f64;
                let m_cls = members.iter().filter(|n| n.kind == NodeKind::Advanced).count() as f64 / n_cls;
                n_cls * het.e0 * (1.0 + a * m_cls)
            })
            .sum();
        let direct = total_initial_energy(&nodes);
        prop_assert!(((direct - closed) / closed).abs() <= 1e-12);
    }

    #[test]
    fn tx_is_monotone_and_dominates_rx(k in 0u64..100_000, d in 0.0f64..500.0, dk in 0u64..1000, dd in 0.0f64..50.0) {
        let p = RadioParams::table();
        let base = tx_energy(k, d, &p);
        prop_assert!(tx_energy(k + dk, d, &p) >= base);
        prop_assert!(tx_energy(k, d + dd, &p) >= base);
        prop_assert!(base >= rx_energy(k, &p));
    }

    #[test]
    fn debits_conserve_energy(amounts in prop::collection::vec(0.0f64..1e-3, 1..2000)) {
        let mut n = node(NodeKind::Normal, 0.5);
        n.e_init = 0.5;
        let mut paid = 0.0;
        for a in amounts {
            if !n.alive {
                break;
            }
            let d = debit(&mut n, a).unwrap();
            prop_assert!(d.paid <= d.requested);
            prop_assert!(n.e_residual >= 0.0 && n.e_residual <= n.e_init);
            paid += d.paid;
        }
        prop_assert!(((n.e_init - n.e_residual) - paid).abs() <= 1e-12 * n.e_init);
    }

    #[test]
    fn homogeneous_reduction(m in 0.0f64..=1.0, residual in 1e-6f64..0.5, e_avg in 0.01f64..0.5) {
        let c = ctx(m, 0.0, e_avg);
        let expected = (0.1 * residual / e_avg).clamp(hetsim_core::protocol::P_MIN, 1.0);
        for kind in [NodeKind::Normal, NodeKind::Advanced] {
            let p = reference_probability(&node(kind, residual), &c);
            prop_assert!(((p - expected) / expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn advanced_to_normal_ratio(m in 0.0f64..=1.0, a in 0.0f64..4.0, residual in 0.1f64..0.5) {
        // e_avg large enough that neither probability is clamped.
        let c = ctx(m, a, 10.0);
        let normal = reference_probability(&node(NodeKind::Normal, residual), &c);
        let advanced = reference_probability(&node(NodeKind::Advanced, residual), &c);
        prop_assert!(advanced < 1.0);
        prop_assert_eq!(advanced, normal * (1.0 + a));
    }

    #[test]
    fn threshold_rises_through_the_epoch(p in 0.01f64..=1.0, epoch in 0u64..50) {
        let len = epoch_length(p);
        let start = epoch * len;
        prop_assert_eq!(election_threshold(p, start, true), p);
        for r in start..start + len {
            let t = election_threshold(p, r, true);
            prop_assert!(t >= p && t <= 1.0);
            prop_assert_eq!(election_threshold(p, r, false), 0.0);
        }
    }
}
