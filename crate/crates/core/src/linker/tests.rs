use super::*;
use crate::chain::{Block, Transaction, TxEntry};
use crate::synth::{
    generate, ConsolidationPolicy, GroundTruth, MinerSpec, NonceProfile, SynthOptions,
};
use alloc::format;
use alloc::vec;

fn addr(s: &str) -> Address {
    Address::new(s).unwrap()
}

fn truth_tags(truth: &GroundTruth) -> Vec<(Address, String)> {
    truth
        .sorted_entries()
        .into_iter()
        .map(|(a, id)| (a, format!("agent{id}")))
        .collect()
}

fn score(chain: &Chain, truth: &GroundTruth, params: &LinkerParams) -> ValidationReport {
    let result = run_pipeline(chain, params);
    validate(&result.catalog, &truth_tags(truth)).unwrap()
}

#[test]
fn no_edges_means_one_agent_per_address() {
    let (chain, _) = generate(
        &[MinerSpec {
            consolidation: ConsolidationPolicy::Never,
            ..MinerSpec::default_client(1, 1.0)
        }],
        50,
        3,
        &SynthOptions::default(),
    )
    .unwrap();
    let catalog = assemble_agents(&chain, &[], &[], &LinkerParams::default());
    assert_eq!(catalog.agent_count(), chain.address_count());
    assert_eq!(catalog.address_count(), chain.address_count());
}

#[test]
fn catalog_is_a_partition() {
    let miners = vec![
        MinerSpec::default_client(1, 2.0),
        MinerSpec {
            consolidation: ConsolidationPolicy::RoundBatch(20),
            ..MinerSpec::default_client(2, 1.0)
        },
    ];
    let (chain, _) = generate(&miners, 2000, 7, &SynthOptions::default()).unwrap();
    let result = run_pipeline(&chain, &LinkerParams::default());
    // Total and disjoint: every chain address appears exactly once.
    assert_eq!(result.catalog.address_count(), chain.address_count());
    for a in chain.addresses() {
        assert!(result.catalog.agent_of(a).is_some());
    }
    // Dense ids 1..=K.
    let k = result.catalog.agent_count() as u32;
    for s in result.catalog.summaries() {
        assert!(s.agent_id >= 1 && s.agent_id <= k);
    }
}

#[test]
fn default_miners_recover_ground_truth() {
    let miners = vec![
        MinerSpec {
            mean_session_blocks: 600.0,
            ..MinerSpec::default_client(1, 3.0)
        },
        MinerSpec {
            mean_session_blocks: 900.0,
            nonce_profile: NonceProfile::Uniform,
            ..MinerSpec::default_client(2, 2.0)
        },
        MinerSpec {
            mean_session_blocks: 800.0,
            consolidation: ConsolidationPolicy::RoundBatch(20),
            ..MinerSpec::default_client(3, 1.0)
        },
    ];
    let (chain, truth) = generate(&miners, 6000, 42, &SynthOptions::default()).unwrap();
    let report = score(&chain, &truth, &LinkerParams::default());
    assert!(report.sensitivity >= 0.99, "{report:?}");
    assert!(report.specificity >= 0.99, "{report:?}");
}

#[test]
fn perfect_catalog_scores_perfectly() {
    let miners = vec![
        MinerSpec::default_client(1, 1.0),
        MinerSpec::default_client(2, 1.0),
    ];
    let (chain, truth) = generate(&miners, 400, 9, &SynthOptions::default()).unwrap();
    let mut assignment = HashMap::new();
    for (a, id) in truth.iter() {
        assignment.insert(a.clone(), id);
    }
    let catalog = AgentCatalog::from_assignment(&chain, &assignment);
    let report = validate(&catalog, &truth_tags(&truth)).unwrap();
    assert_eq!(report.sensitivity, 1.0);
    assert_eq!(report.specificity, 1.0);
    assert_eq!(report.fn_, 0);
    assert_eq!(report.fp, 0);
}

#[test]
fn validation_arithmetic_matches_published_counts() {
    let report = ValidationReport::from_counts(2978, 4, 13221, 87);
    assert!((report.sensitivity - 2978.0 / 2982.0).abs() < 1e-12);
    assert!((report.specificity - 13221.0 / 13308.0).abs() < 1e-12);
    assert_eq!((report.sensitivity * 10000.0).round() / 100.0, 99.87);
    assert_eq!((report.specificity * 10000.0).round() / 100.0, 99.35);
}

#[test]
fn validate_requires_tagged_pairs() {
    let (chain, _) = generate(
        &[MinerSpec::default_client(1, 1.0)],
        10,
        1,
        &SynthOptions::default(),
    )
    .unwrap();
    let catalog = assemble_agents(&chain, &[], &[], &LinkerParams::default());
    assert!(matches!(
        validate(&catalog, &[]),
        Err(LinkError::NoTaggedPairs)
    ));
    let one = vec![(addr("b1"), String::from("x"))];
    assert!(validate(&catalog, &one).is_err());
}

#[test]
fn baseline_never_has_fewer_agents() {
    for seed in [1u64, 5, 9] {
        let miners = vec![
            MinerSpec::default_client(1, 2.0),
            MinerSpec {
                consolidation: ConsolidationPolicy::RoundBatch(20),
                ..MinerSpec::default_client(2, 1.0)
            },
            MinerSpec {
                nonce_profile: NonceProfile::Uniform,
                ..MinerSpec::default_client(3, 0.5)
            },
        ];
        let (chain, _) = generate(&miners, 3000, seed, &SynthOptions::default()).unwrap();
        let full = run_pipeline(&chain, &LinkerParams::default());
        let base = run_pipeline(&chain, &LinkerParams::same_input_only());
        assert!(
            base.catalog.agent_count() >= full.catalog.agent_count(),
            "seed {seed}: baseline {} vs full {}",
            base.catalog.agent_count(),
            full.catalog.agent_count()
        );
    }
}

#[test]
fn adding_same_input_edges_never_splits_agents() {
    // Single-machine agents: extra intra-agent same-input evidence can only
    // merge further.
    let miners = vec![
        MinerSpec::default_client(1, 1.0),
        MinerSpec::default_client(2, 1.5),
    ];
    let (mut chain, truth) = generate(&miners, 1500, 33, &SynthOptions::default()).unwrap();
    let before = run_pipeline(&chain, &LinkerParams::default());

    // Forge an extra spend that co-signs two of agent 1's coinbases.
    let mine: Vec<Address> = truth
        .sorted_entries()
        .into_iter()
        .filter(|(a, id)| *id == 1 && a.as_str().starts_with('b'))
        .map(|(a, _)| a)
        .take(2)
        .collect();
    assert_eq!(mine.len(), 2);
    let mut blocks = chain.blocks().to_vec();
    let last = blocks.len() - 1;
    blocks[last].txs.push(Transaction {
        txid: "extra".into(),
        is_coinbase: false,
        inputs: vec![
            TxEntry::new(mine[0].clone(), 50_0000_0000),
            TxEntry::new(mine[1].clone(), 50_0000_0000),
        ],
        outputs: vec![TxEntry::new(addr("extra_out"), 100_0000_0000)],
    });
    chain = Chain::new(blocks);
    let after = run_pipeline(&chain, &LinkerParams::default());

    // Every pair of addresses together before stays together after.
    let mut by_agent: HashMap<u32, Vec<&Address>> = HashMap::new();
    for (a, g) in before.catalog.sorted_assignments() {
        by_agent.entry(g).or_default().push(a);
    }
    for (_, members) in by_agent {
        let target = after.catalog.agent_of(members[0]).unwrap();
        for m in &members[1..] {
            assert_eq!(after.catalog.agent_of(m), Some(target), "split at {m}");
        }
    }
}

#[test]
fn overlapping_distinct_trajectories_do_not_merge() {
    // Two single-machine miners with concurrent sessions: their
    // trajectories overlap in time but are distinct lines, so nothing in
    // steps e-h merges them.
    let miners = vec![
        MinerSpec {
            mean_session_blocks: 1e12,
            consolidation: ConsolidationPolicy::Never,
            ..MinerSpec::default_client(1, 1.0)
        },
        MinerSpec {
            mean_session_blocks: 1e12,
            consolidation: ConsolidationPolicy::Never,
            gpu_like: false,
            ..MinerSpec::default_client(2, 1.0)
        },
    ];
    let (chain, truth) = generate(&miners, 300, 15, &SynthOptions::default()).unwrap();
    let result = run_pipeline(&chain, &LinkerParams::default());
    // No sweeps, no edges: every coinbase its own agent, and in particular
    // no cross-agent contamination.
    for (a, id) in truth.iter() {
        for (b, id2) in truth.iter() {
            if a < b && id != id2 {
                assert_ne!(
                    result.catalog.agent_of(a),
                    result.catalog.agent_of(b),
                    "{a} and {b} merged across agents"
                );
            }
        }
    }
}

#[test]
fn patoshi_blocks_go_to_a_reserved_agent() {
    let miners = vec![
        MinerSpec {
            gpu_like: true,
            consolidation: ConsolidationPolicy::Never,
            mean_session_blocks: 700.0,
            ..MinerSpec::default_client(1, 2.0)
        },
        MinerSpec::default_client(2, 1.0),
    ];
    let (chain, truth) = generate(&miners, 3000, 77, &SynthOptions::default()).unwrap();
    let result = run_pipeline(&chain, &LinkerParams::default());
    let patoshi = result.catalog.patoshi_agent().expect("reserved agent");
    // The reserved agent holds only the gpu miner's blocks.
    for (a, g) in result.catalog.sorted_assignments() {
        if g == patoshi {
            assert_eq!(truth.owner(a), Some(1), "{a}");
        }
    }
    // And it captures nearly all of them.
    let gpu_total = chain
        .blocks()
        .iter()
        .filter(|b| truth.owner(&b.coinbase_outputs()[0].address) == Some(1))
        .count();
    assert!(result.patoshi_heights.len() as f64 >= 0.95 * gpu_total as f64);
    // Largest miner ranks first, like the original.
    assert_eq!(patoshi, 1);
}

#[test]
fn round_batch_merge_without_extranonce() {
    // A hidden-extranonce miner that consolidates every 20 rewards into one
    // lifetime address: each batch is a separate same-input component, and
    // only the round-count rule can sew them to the shared target.
    let miners = vec![
        MinerSpec {
            extranonce_visible: false,
            consolidation: ConsolidationPolicy::RoundBatch(20),
            mean_session_blocks: 1e12,
            nonce_profile: NonceProfile::Uniform,
            ..MinerSpec::default_client(1, 1.0)
        },
        MinerSpec {
            mean_session_blocks: 500.0,
            ..MinerSpec::default_client(2, 3.0)
        },
    ];
    let (chain, truth) = generate(&miners, 4000, 5, &SynthOptions::default()).unwrap();

    let mut with_rule = LinkerParams::default();
    with_rule.enable_round_rule = true;
    let mut without_rule = LinkerParams::default();
    without_rule.enable_round_rule = false;

    let on = score(&chain, &truth, &with_rule);
    let off = score(&chain, &truth, &without_rule);
    assert!(
        on.fn_ < off.fn_,
        "round rule should recover batches: {} vs {}",
        on.fn_,
        off.fn_
    );
    let result = run_pipeline(&chain, &with_rule);
    assert!(result.stats.round_consolidation_merges > 0);
}

#[test]
fn round_rule_respects_nonce_veto() {
    // Two hand-built 20-block pseudo-agents sweeping to one address, with
    // clashing nonce styles: the counter-profile one merges with the
    // target, the uniform one is vetoed.
    let mut blocks: Vec<Block> = Vec::new();
    let coinbase = |h: u64, to: &str| Transaction {
        txid: format!("cb{h}"),
        is_coinbase: true,
        inputs: vec![],
        outputs: vec![TxEntry::new(addr(to), 50)],
    };
    let mk_block = |height: u64, nonce: u32, txs: Vec<Transaction>| Block {
        height,
        timestamp: height as i64 * 600,
        nonce,
        extranonce: None,
        txs,
    };
    // Agent X: 20 blocks, counter nonces (low values).
    for i in 0..20u32 {
        let h = i as u64 + 1;
        blocks.push(mk_block(h, i * 100, vec![coinbase(h, &format!("x{i}"))]));
    }
    // Agent Y: 20 blocks, uniform nonces.
    for i in 0..20u32 {
        let h = i as u64 + 21;
        blocks.push(mk_block(
            h,
            i.wrapping_mul(214_748_364).rotate_left(7) | 0x8000_0000,
            vec![coinbase(h, &format!("y{i}"))],
        ));
    }
    // Sweeps to the shared target Z, one per agent.
    let sweep_x = Transaction {
        txid: "swx".into(),
        is_coinbase: false,
        inputs: (0..20).map(|i| TxEntry::new(addr(&format!("x{i}")), 50)).collect(),
        outputs: vec![TxEntry::new(addr("Z"), 1000)],
    };
    let sweep_y = Transaction {
        txid: "swy".into(),
        is_coinbase: false,
        inputs: (0..20).map(|i| TxEntry::new(addr(&format!("y{i}")), 50)).collect(),
        outputs: vec![TxEntry::new(addr("Z"), 1000)],
    };
    blocks.push(mk_block(41, 3, vec![coinbase(41, "m_end"), sweep_x, sweep_y]));
    let chain = Chain::new(blocks);

    let catalog = run_pipeline(&chain, &LinkerParams::default()).catalog;
    let zx = catalog.agent_of(&addr("Z")).unwrap();
    let x0 = catalog.agent_of(&addr("x0")).unwrap();
    let y0 = catalog.agent_of(&addr("y0")).unwrap();
    // X's batch reaches Z first (deterministic order) and Y is vetoed: the
    // nonce profiles of X and Y are incompatible.
    assert_eq!(zx, x0);
    assert_ne!(zx, y0);
    // All of X's and Y's own blocks stay internally linked by same-input.
    assert_eq!(catalog.agent_of(&addr("x7")), Some(x0));
    assert_eq!(catalog.agent_of(&addr("y7")), Some(y0));
}

#[test]
fn multi_machine_agent_survives_quarantine() {
    // One agent, two concurrently mining machines pooling their rewards:
    // sweeps co-spend both machines' coinbases, so same-input evidence keeps
    // the agent whole even though its trajectories overlap in time and the
    // consolidation edges get quarantined.
    let miners = vec![
        MinerSpec {
            mean_session_blocks: 700.0,
            ..MinerSpec::default_client(1, 1.0)
        },
        MinerSpec {
            mean_session_blocks: 900.0,
            ..MinerSpec::default_client(1, 1.0)
        },
        MinerSpec::default_client(2, 1.0),
    ];
    let (chain, truth) = generate(&miners, 4000, 13, &SynthOptions::default()).unwrap();
    let report = score(&chain, &truth, &LinkerParams::default());
    assert!(report.sensitivity > 0.98, "{report:?}");
    assert!(report.specificity > 0.99, "{report:?}");
}

#[test]
fn ranking_orders_by_coin_mined() {
    let miners = vec![
        MinerSpec::default_client(1, 1.0),
        MinerSpec::default_client(2, 4.0),
    ];
    let (chain, truth) = generate(&miners, 2000, 3, &SynthOptions::default()).unwrap();
    let result = run_pipeline(&chain, &LinkerParams::default());
    let summaries = result.catalog.summaries();
    for w in summaries.windows(2) {
        assert!(w[0].satoshi_mined >= w[1].satoshi_mined);
    }
    // Agent ranked 1 is the heavy miner.
    let heavy_block = chain
        .blocks()
        .iter()
        .find(|b| truth.owner(&b.coinbase_outputs()[0].address) == Some(2))
        .unwrap();
    assert_eq!(
        result
            .catalog
            .agent_of(&heavy_block.coinbase_outputs()[0].address),
        Some(1)
    );
}
