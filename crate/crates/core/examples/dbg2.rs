use agentlens_core::linker::{run_pipeline, LinkerParams};
use agentlens_core::synth::*;
use std::collections::HashMap;

include!("roster.rs");

fn main() {
    let (chain, truth) = generate(&acceptance_roster(), 50_000, 20090103, &SynthOptions::default()).unwrap();
    let res = run_pipeline(&chain, &LinkerParams::default());
    // per-agent fragmentation with FN mass
    let mut per_agent: HashMap<u32, HashMap<u32, u64>> = HashMap::new();
    for (a, g) in truth.iter() {
        *per_agent.entry(g).or_default().entry(res.catalog.agent_of(a).unwrap()).or_insert(0) += 1;
    }
    let mut rows: Vec<(u64, u32, usize, Vec<u64>)> = Vec::new();
    for (g, comps) in per_agent {
        let mut sizes: Vec<u64> = comps.values().copied().collect();
        sizes.sort_by_key(|&n| std::cmp::Reverse(n));
        let total: u64 = sizes.iter().sum();
        let same_pairs: u64 = total * (total - 1) / 2;
        let tp: u64 = sizes.iter().map(|&n| n * (n - 1) / 2).sum();
        rows.push((same_pairs - tp, g, sizes.len(), sizes.into_iter().take(5).collect()));
    }
    rows.sort_by_key(|&(fnm, _, _, _)| std::cmp::Reverse(fnm));
    for (fnm, g, ncomp, top) in rows.iter().take(12) {
        println!("agent {g}: fn {fnm}, {ncomp} comps, top sizes {top:?}");
    }
}
