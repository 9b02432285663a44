fn acceptance_roster() -> Vec<MinerSpec> {
    let mut m = Vec::new();
    m.push(MinerSpec {
        agent_id: 1, hashrate_weight: 6.0, mean_session_blocks: 3000.0,
        nonce_profile: NonceProfile::RestrictedRange { lo: 0x1000_0000, hi: 0x27ff_ffff },
        consolidation: ConsolidationPolicy::Never, gpu_like: true, extranonce_visible: true,
    });
    for k in 2..=25u32 {
        let profile = match k % 3 {
            0 => NonceProfile::Uniform,
            1 => NonceProfile::Counter,
            _ => NonceProfile::RestrictedRange { lo: 0x4000_0000 + k * 0x100_0000, hi: 0x6000_0000 + k * 0x100_0000 },
        };
        m.push(MinerSpec {
            agent_id: k, hashrate_weight: 3.0 / k as f64,
            mean_session_blocks: 1500.0 + 150.0 * k as f64,
            nonce_profile: profile,
            consolidation: ConsolidationPolicy::PerSession { delay_blocks: 100 + 4 * k as u64 },
            gpu_like: false, extranonce_visible: true,
        });
    }
    for k in 26..=32u32 {
        m.push(MinerSpec {
            agent_id: k, hashrate_weight: 2.5 / k as f64,
            mean_session_blocks: 2000.0 + 100.0 * k as f64,
            nonce_profile: if k % 2 == 0 { NonceProfile::Counter } else { NonceProfile::Uniform },
            consolidation: ConsolidationPolicy::RoundBatch(if k % 2 == 0 { 20 } else { 40 }),
            gpu_like: false, extranonce_visible: true,
        });
    }
    for k in 33..=34u32 {
        m.push(MinerSpec {
            agent_id: k, hashrate_weight: 0.04,
            mean_session_blocks: 4000.0,
            nonce_profile: NonceProfile::Uniform,
            consolidation: ConsolidationPolicy::RoundBatch(20),
            gpu_like: false, extranonce_visible: false,
        });
    }
    for k in 35..=36u32 {
        m.push(MinerSpec {
            agent_id: k, hashrate_weight: 0.02,
            mean_session_blocks: 3000.0,
            nonce_profile: NonceProfile::Counter,
            consolidation: ConsolidationPolicy::Never,
            gpu_like: false, extranonce_visible: true,
        });
    }
    for _ in 0..2 {
        m.push(MinerSpec {
            agent_id: 37, hashrate_weight: 0.3,
            mean_session_blocks: 2500.0,
            nonce_profile: NonceProfile::Counter,
            consolidation: ConsolidationPolicy::PerSession { delay_blocks: 120 },
            gpu_like: false, extranonce_visible: true,
        });
    }
    for k in 38..=40u32 {
        m.push(MinerSpec {
            agent_id: k, hashrate_weight: 0.15,
            mean_session_blocks: 2800.0,
            nonce_profile: NonceProfile::Uniform,
            consolidation: ConsolidationPolicy::PerSession { delay_blocks: 150 },
            gpu_like: false, extranonce_visible: true,
        });
    }
    m
}
