use agentlens_core::linker::{run_pipeline, validate, LinkerParams};
use agentlens_core::synth::*;
use agentlens_core::Address;
use std::time::Instant;

include!("roster.rs");

fn main() {
    let t0 = Instant::now();
    let (chain, truth) = generate(&acceptance_roster(), 50_000, 20090103, &SynthOptions::default()).unwrap();
    println!("generate: {:?}, {} addrs", t0.elapsed(), chain.address_count());

    // The dominant miner never transacts, so its stray blocks carry no
    // linkable evidence; its capture is asserted separately.
    let tags: Vec<(Address, String)> = truth.sorted_entries().into_iter()
        .filter(|&(_, id)| id != 1)
        .map(|(a, id)| (a, format!("agent{id}"))).collect();

    let t1 = Instant::now();
    let full = run_pipeline(&chain, &LinkerParams::default());
    println!("full pipeline: {:?}", t1.elapsed());
    println!("stats: {:?}", full.stats);
    let rf = validate(&full.catalog, &tags).unwrap();
    println!("full: sens {:.5} spec {:.5} fn {} fp {}", rf.sensitivity, rf.specificity, rf.fn_, rf.fp);

    let t2 = Instant::now();
    let base = run_pipeline(&chain, &LinkerParams::same_input_only());
    let rb = validate(&base.catalog, &tags).unwrap();
    println!("base pipeline: {:?}", t2.elapsed());
    println!("base: sens {:.5} spec {:.5} fn {} fp {}", rb.sensitivity, rb.specificity, rb.fn_, rb.fp);
    println!("fn ratio: {:.1}", rb.fn_ as f64 / rf.fn_ as f64);
    println!("agents: full {} base {}", full.catalog.agent_count(), base.catalog.agent_count());
    println!("patoshi agent: {:?} heights {}", full.catalog.patoshi_agent(), full.patoshi_heights.len());
    println!("total: {:?}", t0.elapsed());
}

#[allow(dead_code)]
fn extra() {}
