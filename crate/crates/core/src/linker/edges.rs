//! Transaction-triggered address-linking heuristics.
//!
//! Three rules, each keyed to a transaction shape: same-input (all inputs of
//! one transaction belong to one agent), the change rule (a 2-output spend
//! where exactly one output is brand new), and mining consolidation (many
//! coinbase rewards lying on one extranonce trajectory swept to a single
//! address).

use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};

use crate::chain::{Address, Chain};
use crate::linker::trajectory::Trajectory;
use crate::linker::LinkerParams;

/// The kind of evidence behind a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    SameInput,
    Change,
    Consolidation,
    /// Step-f merge: two components with many addresses on one trajectory.
    SharedTrajectory,
    /// Step-h merge: a round block count swept to a shared address.
    RoundConsolidation,
}

/// An undirected evidence edge between two addresses, stored canonically
/// (a < b). `provenance` names the transaction or trajectory behind it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkEdge {
    pub a: Address,
    pub b: Address,
    pub kind: EdgeKind,
    pub provenance: String,
}

impl LinkEdge {
    pub fn new(a: Address, b: Address, kind: EdgeKind, provenance: String) -> Option<Self> {
        if a == b {
            return None;
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Some(LinkEdge {
            a,
            b,
            kind,
            provenance,
        })
    }
}

/// Interned edge used by the pipeline; `provenance` is a transaction
/// ordinal or trajectory id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct RawEdge {
    pub a: u32,
    pub b: u32,
    pub kind: EdgeKind,
    pub provenance: u32,
}

/// Address interning table. Ids follow first appearance in chain order, so
/// they are deterministic for a given chain.
pub(crate) struct AddrTable {
    addrs: Vec<Address>,
    index: HashMap<Address, u32>,
}

impl AddrTable {
    pub fn build(chain: &Chain) -> Self {
        let mut t = AddrTable {
            addrs: Vec::new(),
            index: HashMap::new(),
        };
        for (_, tx) in chain.transactions() {
            for e in tx.inputs.iter().chain(tx.outputs.iter()) {
                t.intern(&e.address);
            }
        }
        t
    }

    fn intern(&mut self, a: &Address) -> u32 {
        if let Some(&id) = self.index.get(a) {
            return id;
        }
        let id = self.addrs.len() as u32;
        self.addrs.push(a.clone());
        self.index.insert(a.clone(), id);
        id
    }

    pub fn id(&self, a: &Address) -> Option<u32> {
        self.index.get(a).copied()
    }

    pub fn address(&self, id: u32) -> &Address {
        &self.addrs[id as usize]
    }

    pub fn len(&self) -> usize {
        self.addrs.len()
    }
}

/// Emits pairwise links for a set of co-owned addresses. Small sets expand
/// to the full clique exactly as the heuristics are written; large sets
/// collapse to a star, which yields identical connected components without
/// the quadratic edge count.
fn emit_group(ids: &[u32], kind: EdgeKind, provenance: u32, cap: usize, out: &mut Vec<RawEdge>) {
    if ids.len() <= cap {
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                if a != b {
                    out.push(RawEdge {
                        a: a.min(b),
                        b: a.max(b),
                        kind,
                        provenance,
                    });
                }
            }
        }
    } else {
        let hub = *ids.iter().min().unwrap();
        for &b in ids {
            if b != hub {
                out.push(RawEdge {
                    a: hub.min(b),
                    b: hub.max(b),
                    kind,
                    provenance,
                });
            }
        }
    }
}

pub(crate) fn same_input_raw(chain: &Chain, table: &mut AddrTable, cap: usize) -> Vec<RawEdge> {
    let mut out = Vec::new();
    for (txo, (_, tx)) in chain.transactions().enumerate() {
        if tx.inputs.len() > 1 {
            let mut ids: Vec<u32> = tx.inputs.iter().map(|e| table.intern(&e.address)).collect();
            ids.sort_unstable();
            ids.dedup();
            if ids.len() > 1 {
                emit_group(&ids, EdgeKind::SameInput, txo as u32, cap, &mut out);
            }
        }
    }
    out
}

pub(crate) fn change_raw(chain: &Chain, table: &mut AddrTable) -> Vec<RawEdge> {
    let mut out = Vec::new();
    let mut seen: HashSet<u32> = HashSet::new();
    for (txo, (_, tx)) in chain.transactions().enumerate() {
        let in_ids: Vec<u32> = tx.inputs.iter().map(|e| table.intern(&e.address)).collect();
        let out_ids: Vec<u32> = tx.outputs.iter().map(|e| table.intern(&e.address)).collect();
        if !tx.is_coinbase && out_ids.len() == 2 {
            let fresh: Vec<u32> = out_ids
                .iter()
                .copied()
                .filter(|id| !seen.contains(id))
                .collect();
            let outputs_disjoint_from_inputs =
                out_ids.iter().all(|id| !in_ids.contains(id));
            if fresh.len() == 1 && outputs_disjoint_from_inputs {
                let change = fresh[0];
                for &i in &in_ids {
                    if let Some(e) = checked_raw(i, change, EdgeKind::Change, txo as u32) {
                        out.push(e);
                    }
                }
            }
        }
        seen.extend(in_ids);
        seen.extend(out_ids);
    }
    out
}

pub(crate) fn consolidation_raw(
    chain: &Chain,
    trajectories: &[Trajectory],
    table: &mut AddrTable,
) -> Vec<RawEdge> {
    let traj_of_height = super::trajectory::height_to_trajectory(trajectories);
    // Coinbase reward address -> height it was mined at.
    let mut mined_at: HashMap<u32, u64> = HashMap::new();
    for b in chain.blocks() {
        for e in b.coinbase_outputs() {
            mined_at.insert(table.intern(&e.address), b.height);
        }
    }

    let mut out = Vec::new();
    for (txo, (_, tx)) in chain.transactions().enumerate() {
        if tx.is_coinbase || tx.inputs.len() < 3 || tx.outputs.len() != 1 {
            continue;
        }
        let in_ids: Vec<u32> = tx.inputs.iter().map(|e| table.intern(&e.address)).collect();
        // Count inputs per trajectory; the rule fires if any single
        // trajectory carries at least three of the spent rewards.
        let mut per_traj: HashMap<usize, usize> = HashMap::new();
        for id in &in_ids {
            if let Some(h) = mined_at.get(id) {
                if let Some(t) = traj_of_height.get(h) {
                    *per_traj.entry(*t).or_insert(0) += 1;
                }
            }
        }
        if per_traj.values().any(|&c| c >= 3) {
            let target = table.intern(&tx.outputs[0].address);
            for &i in &in_ids {
                if let Some(e) = checked_raw(i, target, EdgeKind::Consolidation, txo as u32) {
                    out.push(e);
                }
            }
        }
    }
    out
}

fn checked_raw(a: u32, b: u32, kind: EdgeKind, provenance: u32) -> Option<RawEdge> {
    if a == b {
        None
    } else {
        Some(RawEdge {
            a: a.min(b),
            b: a.max(b),
            kind,
            provenance,
        })
    }
}

fn materialize(chain: &Chain, raw: &[RawEdge], table: &AddrTable) -> Vec<LinkEdge> {
    let txids: Vec<&str> = chain.transactions().map(|(_, tx)| tx.txid.as_str()).collect();
    raw.iter()
        .filter_map(|e| {
            LinkEdge::new(
                table.address(e.a).clone(),
                table.address(e.b).clone(),
                e.kind,
                String::from(txids[e.provenance as usize]),
            )
        })
        .collect()
}

/// Links every pair of input addresses of each multi-input transaction.
pub fn link_same_input(chain: &Chain) -> Vec<LinkEdge> {
    let mut table = AddrTable::build(chain);
    let raw = same_input_raw(chain, &mut table, LinkerParams::default().clique_cap);
    materialize(chain, &raw, &table)
}

/// The change rule: a non-coinbase transaction with exactly two outputs,
/// exactly one of which has never been seen before, and neither of which is
/// among the inputs, links the inputs to the fresh output.
///
/// Disabled in the default pipeline configuration; the validation work
/// behind this toolkit found it degrades specificity.
pub fn link_change(chain: &Chain) -> Vec<LinkEdge> {
    let mut table = AddrTable::build(chain);
    let raw = change_raw(chain, &mut table);
    materialize(chain, &raw, &table)
}

/// Mining consolidation: >= 3 inputs sweeping to exactly one output where at
/// least three of the spent coinbase rewards lie on one extranonce
/// trajectory links every input to the output.
pub fn link_consolidation(chain: &Chain, trajectories: &[Trajectory]) -> Vec<LinkEdge> {
    let mut table = AddrTable::build(chain);
    let raw = consolidation_raw(chain, trajectories, &mut table);
    materialize(chain, &raw, &table)
}
