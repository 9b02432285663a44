use agentlens_core::linker::{detect_trajectories, link_consolidation, link_same_input, LinkerParams, UnionFind};
use agentlens_core::synth::*;
use agentlens_core::Address;
use std::collections::{HashMap, HashSet};

include!("roster.rs");

fn main() {
    let (chain, truth) = generate(&acceptance_roster(), 50_000, 20090103, &SynthOptions::default()).unwrap();
    let params = LinkerParams::default();
    let trajs = detect_trajectories(&chain, &params);
    println!("{} trajectories", trajs.len());
    // slope histogram
    let steep = trajs.iter().filter(|t| t.slope >= 1.5).count();
    println!("steep: {steep}");

    // intern addresses
    let mut idx: HashMap<Address, u32> = HashMap::new();
    let mut addrs: Vec<Address> = Vec::new();
    for (_, tx) in chain.transactions() {
        for e in tx.inputs.iter().chain(tx.outputs.iter()) {
            idx.entry(e.address.clone()).or_insert_with(|| { addrs.push(e.address.clone()); addrs.len() as u32 - 1 });
        }
    }
    let mut uf = UnionFind::new(addrs.len());
    for e in link_same_input(&chain).iter().chain(link_consolidation(&chain, &trajs).iter()) {
        uf.union(idx[&e.a], idx[&e.b]);
    }
    // coinbase height map + traj membership
    let mut mined_at: HashMap<u32, u64> = HashMap::new();
    for b in chain.blocks() {
        for e in b.coinbase_outputs() { mined_at.insert(idx[&e.address], b.height); }
    }
    let mut traj_of: HashMap<u64, usize> = HashMap::new();
    for t in &trajs { for &(h, _) in &t.points { traj_of.insert(h, t.id); } }
    let mut comp_trajs: HashMap<u32, HashSet<usize>> = HashMap::new();
    for (&a, &h) in &mined_at {
        if let Some(&t) = traj_of.get(&h) { comp_trajs.entry(uf.find(a)).or_default().insert(t); }
    }
    let mut n_susp = 0;
    for (comp, ts) in &comp_trajs {
        let v: Vec<usize> = { let mut v: Vec<usize> = ts.iter().copied().collect(); v.sort(); v };
        'outer: for (i, &a) in v.iter().enumerate() {
            for &b in &v[i+1..] {
                let ta = &trajs[a]; let tb = &trajs[b];
                let lo = ta.start_height().max(tb.start_height());
                let hi = ta.end_height().min(tb.end_height());
                if (hi + 1).saturating_sub(lo) > 2 {
                    n_susp += 1;
                    // true owners of the two trajectories
                    let owner = |t: &agentlens_core::linker::Trajectory| {
                        let mut owners: HashMap<u32, usize> = HashMap::new();
                        for &(h, _) in &t.points {
                            let cb = &chain.block_at(h).unwrap().coinbase_outputs()[0].address;
                            *owners.entry(truth.owner(cb).unwrap()).or_insert(0) += 1;
                        }
                        let mut v: Vec<_> = owners.into_iter().collect();
                        v.sort_by_key(|&(_, n)| std::cmp::Reverse(n));
                        v
                    };
                    if n_susp <= 8 {
                        println!("comp {comp}: traj {a} [{}..{}] len {} slope {:.3} owners {:?}  x  traj {b} [{}..{}] len {} slope {:.3} owners {:?}",
                            ta.start_height(), ta.end_height(), ta.len(), ta.slope, owner(ta),
                            tb.start_height(), tb.end_height(), tb.len(), tb.slope, owner(tb));
                    }
                    break 'outer;
                }
            }
        }
    }
    println!("suspicious components: {n_susp}");
}
