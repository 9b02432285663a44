//! The address-linking pipeline.
//!
//! Builds typed evidence edges over the transaction graph, detects
//! extranonce trajectories, and assembles agents as connected components
//! with a sequence of merge and curation rules:
//!
//! * edge extraction: same-input always; mining consolidation constrained by
//!   trajectories; the change rule exists but is off by default,
//! * dominant-miner removal: steep long trajectories go to a reserved agent
//!   and their blocks leave the dataset,
//! * components whose trajectories overlap in time have their consolidation
//!   edges quarantined and selectively reintroduced,
//! * components sharing many addresses on common trajectories merge,
//! * components that mined a round block count (20/40) and swept it to one
//!   shared address merge unless nonce profiles or trajectory overlap veto.
//!
//! The catalog ranks agents by coin mined, largest first.

pub mod edges;
pub mod nonce;
pub mod trajectory;
mod union_find;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::{HashMap, HashSet};

pub use edges::{link_change, link_consolidation, link_same_input, EdgeKind, LinkEdge};
pub use nonce::{classify_nonces, nonce_profile_compatible, NonceClass};
pub use trajectory::{detect_patoshi, detect_trajectories, Trajectory};
pub use union_find::UnionFind;

use crate::chain::{Address, Chain};
use edges::{AddrTable, RawEdge};

/// Tuning knobs for trajectory detection and the merge rules. Every default
/// is a config key, not a law; the trajectory numbers in particular are
/// engineering choices validated against seeded synthetic chains.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkerParams {
    /// Max |predicted - observed| extranonce for extending a mature run.
    /// Extranonces are integers on near-exact lines, so anything below 1.0
    /// separates parallel sessions that start a few blocks apart; raise it
    /// for noisy data.
    pub tolerance: f64,
    /// Acceptable slope band for extending a single-point run.
    pub slope_min: f64,
    pub slope_max: f64,
    /// A run closes after this many heights of silence (~1 day).
    pub gap_limit: u64,
    pub min_trajectory_len: usize,
    /// Slope and length thresholds for the reserved dominant-miner agent.
    pub patoshi_slope_min: f64,
    pub patoshi_len_min: usize,
    /// Two trajectories "overlap" if their height spans share more than
    /// this many blocks.
    pub overlap_tol: u64,
    /// Step f: components sharing at least this many addresses on common
    /// trajectories merge.
    pub share_min: usize,
    /// Step h: the round block counts that suggest batch consolidation.
    pub round_counts: Vec<u64>,
    /// Clique cap for pairwise edge expansion; larger input sets emit a
    /// star, which yields the same components.
    pub clique_cap: usize,
    pub enable_consolidation_rule: bool,
    /// Off by default: change linking costs specificity.
    pub enable_change_rule: bool,
    /// Steps e-g (overlap quarantine and trajectory-share merging).
    pub enable_trajectory_steps: bool,
    /// Step h (round-count consolidation merging).
    pub enable_round_rule: bool,
}

impl Default for LinkerParams {
    fn default() -> Self {
        LinkerParams {
            tolerance: 0.5,
            slope_min: 0.8,
            slope_max: 10.0,
            gap_limit: 144,
            min_trajectory_len: 3,
            patoshi_slope_min: 1.5,
            patoshi_len_min: 20,
            overlap_tol: 2,
            share_min: 3,
            round_counts: alloc::vec![20, 40],
            clique_cap: 64,
            enable_consolidation_rule: true,
            enable_change_rule: false,
            enable_trajectory_steps: true,
            enable_round_rule: true,
        }
    }
}

impl LinkerParams {
    /// The comparison baseline: same-input edges and nothing else.
    pub fn same_input_only() -> Self {
        LinkerParams {
            enable_consolidation_rule: false,
            enable_change_rule: false,
            enable_trajectory_steps: false,
            enable_round_rule: false,
            ..LinkerParams::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinkError {
    /// validate() needs at least two tagged addresses present in the catalog.
    NoTaggedPairs,
}

impl fmt::Display for LinkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkError::NoTaggedPairs => write!(f, "no tagged address pairs to compare"),
        }
    }
}

impl core::error::Error for LinkError {}

/// Per-agent aggregate in the final catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentSummary {
    pub agent_id: u32,
    pub addresses: u64,
    pub blocks_mined: u64,
    pub satoshi_mined: u64,
    pub first_active: i64,
    pub last_active: i64,
}

/// Total assignment of every chain address to a dense agent id, ranked by
/// coin mined (largest agent = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct AgentCatalog {
    assignment: HashMap<Address, u32>,
    summaries: Vec<AgentSummary>,
    patoshi_agent: Option<u32>,
}

impl AgentCatalog {
    pub fn agent_of(&self, address: &Address) -> Option<u32> {
        self.assignment.get(address).copied()
    }

    pub fn agent_count(&self) -> usize {
        self.summaries.len()
    }

    pub fn address_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn summaries(&self) -> &[AgentSummary] {
        &self.summaries
    }

    /// The reserved agent produced by dominant-miner removal, if one exists.
    pub fn patoshi_agent(&self) -> Option<u32> {
        self.patoshi_agent
    }

    /// (address, agent) rows sorted by address for deterministic output.
    pub fn sorted_assignments(&self) -> Vec<(&Address, u32)> {
        let mut rows: Vec<(&Address, u32)> = self.assignment.iter().map(|(a, &g)| (a, g)).collect();
        rows.sort_by(|x, y| x.0.cmp(y.0));
        rows
    }

    /// Builds a ranked catalog from an arbitrary total assignment (for
    /// example a synthetic ground truth).
    pub fn from_assignment(chain: &Chain, assignment: &HashMap<Address, u32>) -> Self {
        let mut groups: HashMap<u32, Vec<Address>> = HashMap::new();
        for (addr, &g) in assignment {
            groups.entry(g).or_default().push(addr.clone());
        }
        let mut keys: Vec<u32> = groups.keys().copied().collect();
        keys.sort_unstable();
        let components: Vec<Vec<Address>> = keys
            .into_iter()
            .map(|k| {
                let mut v = groups.remove(&k).unwrap();
                v.sort();
                v
            })
            .collect();
        rank_components(chain, components, None)
    }
}

/// Pairwise tag-validation counts and rates.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
    pub sensitivity: f64,
    pub specificity: f64,
}

impl ValidationReport {
    /// Rates from raw pair counts; vacuous denominators yield 1.0.
    pub fn from_counts(tp: u64, fn_: u64, tn: u64, fp: u64) -> Self {
        let ratio = |num: u64, den: u64| {
            if den == 0 {
                1.0
            } else {
                num as f64 / den as f64
            }
        };
        ValidationReport {
            tp,
            tn,
            fp,
            fn_,
            sensitivity: ratio(tp, tp + fn_),
            specificity: ratio(tn, tn + fp),
        }
    }
}

/// Scores a catalog against tagged ground truth over all pairs of tagged
/// addresses present in the catalog: same tag and same agent is a true
/// positive, different tag and different agent a true negative, and so on.
///
/// Pair counts come from the (tag, agent) contingency table, so this is
/// O(n) in the number of tagged addresses rather than O(n^2).
pub fn validate(
    catalog: &AgentCatalog,
    tags: &[(Address, String)],
) -> Result<ValidationReport, LinkError> {
    let mut cell: HashMap<(u32, &str), u64> = HashMap::new();
    let mut per_tag: HashMap<&str, u64> = HashMap::new();
    let mut per_agent: HashMap<u32, u64> = HashMap::new();
    let mut n: u64 = 0;
    for (addr, tag) in tags {
        let Some(agent) = catalog.agent_of(addr) else {
            continue;
        };
        *cell.entry((agent, tag.as_str())).or_insert(0) += 1;
        *per_tag.entry(tag.as_str()).or_insert(0) += 1;
        *per_agent.entry(agent).or_insert(0) += 1;
        n += 1;
    }
    if n < 2 {
        return Err(LinkError::NoTaggedPairs);
    }
    let choose2 = |k: u64| k * k.saturating_sub(1) / 2;
    let tp: u64 = cell.values().map(|&k| choose2(k)).sum();
    let same_tag: u64 = per_tag.values().map(|&k| choose2(k)).sum();
    let same_agent: u64 = per_agent.values().map(|&k| choose2(k)).sum();
    let total = choose2(n);
    let fn_ = same_tag - tp;
    let fp = same_agent - tp;
    let tn = total - same_tag - fp;
    Ok(ValidationReport::from_counts(tp, fn_, tn, fp))
}

/// Edge and merge counters for pipeline audits.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PipelineStats {
    pub same_input_edges: usize,
    pub consolidation_edges: usize,
    pub change_edges: usize,
    pub edges_dropped_patoshi: usize,
    pub quarantined: usize,
    pub reintroduced: usize,
    pub shared_trajectory_merges: usize,
    pub round_consolidation_merges: usize,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub catalog: AgentCatalog,
    pub trajectories: Vec<Trajectory>,
    pub patoshi_heights: HashSet<u64>,
    pub stats: PipelineStats,
}

/// Runs the full pipeline on a chain.
pub fn run_pipeline(chain: &Chain, params: &LinkerParams) -> PipelineResult {
    let trajectories = if params.enable_consolidation_rule || params.enable_trajectory_steps {
        detect_trajectories(chain, params)
    } else {
        Vec::new()
    };
    let patoshi_heights = detect_patoshi(&trajectories, params);

    let mut table = AddrTable::build(chain);
    let mut raw: Vec<RawEdge> = Vec::new();
    let mut stats = PipelineStats::default();

    let same_input = edges::same_input_raw(chain, &mut table, params.clique_cap);
    stats.same_input_edges = same_input.len();
    raw.extend(same_input);
    if params.enable_consolidation_rule {
        let cons = edges::consolidation_raw(chain, &trajectories, &mut table);
        stats.consolidation_edges = cons.len();
        raw.extend(cons);
    }
    if params.enable_change_rule {
        let change = edges::change_raw(chain, &mut table);
        stats.change_edges = change.len();
        raw.extend(change);
    }

    let catalog = assemble_raw(
        chain,
        raw,
        &trajectories,
        &patoshi_heights,
        &mut table,
        params,
        &mut stats,
    );
    PipelineResult {
        catalog,
        trajectories,
        patoshi_heights,
        stats,
    }
}

/// Spec-level assembly entry point over materialized edges; the pipeline
/// uses the interned path directly.
pub fn assemble_agents(
    chain: &Chain,
    link_edges: &[LinkEdge],
    trajectories: &[Trajectory],
    params: &LinkerParams,
) -> AgentCatalog {
    let mut table = AddrTable::build(chain);
    let patoshi_heights = detect_patoshi(trajectories, params);
    let tx_ordinal: HashMap<&str, u32> = chain
        .transactions()
        .enumerate()
        .map(|(i, (_, tx))| (tx.txid.as_str(), i as u32))
        .collect();
    let raw: Vec<RawEdge> = link_edges
        .iter()
        .filter_map(|e| {
            let a = table.id(&e.a)?;
            let b = table.id(&e.b)?;
            Some(RawEdge {
                a: a.min(b),
                b: a.max(b),
                kind: e.kind,
                provenance: tx_ordinal.get(e.provenance.as_str()).copied().unwrap_or(0),
            })
        })
        .collect();
    let mut stats = PipelineStats::default();
    assemble_raw(
        chain,
        raw,
        trajectories,
        &patoshi_heights,
        &mut table,
        params,
        &mut stats,
    )
}

fn assemble_raw(
    chain: &Chain,
    mut raw: Vec<RawEdge>,
    trajectories: &[Trajectory],
    patoshi_heights: &HashSet<u64>,
    table: &mut AddrTable,
    params: &LinkerParams,
    stats: &mut PipelineStats,
) -> AgentCatalog {
    // Reward bookkeeping: coinbase address id -> height mined.
    let mut mined_at: HashMap<u32, u64> = HashMap::new();
    for b in chain.blocks() {
        for e in b.coinbase_outputs() {
            let id = table.id(&e.address).expect("interned");
            mined_at.entry(id).or_insert(b.height);
        }
    }
    let patoshi_ids: HashSet<u32> = mined_at
        .iter()
        .filter(|(_, &h)| patoshi_heights.contains(&h))
        .map(|(&id, _)| id)
        .collect();

    // The dominant miner's blocks leave the dataset: any evidence touching
    // them is discarded before component construction.
    let before = raw.len();
    raw.retain(|e| !patoshi_ids.contains(&e.a) && !patoshi_ids.contains(&e.b));
    stats.edges_dropped_patoshi = before - raw.len();

    let n = table.len();
    let traj_of_height = trajectory::height_to_trajectory(trajectories);

    // Step d: union over same-input and consolidation evidence.
    let mut uf = UnionFind::new(n);
    for e in &raw {
        uf.union(e.a, e.b);
    }

    // Step e: quarantine consolidation edges of components that show
    // distinct trajectories overlapping in time, then recompute.
    let mut quarantined: Vec<RawEdge> = Vec::new();
    if params.enable_trajectory_steps {
        let suspicious =
            suspicious_components(&mut uf, &mined_at, &traj_of_height, trajectories, params);
        if !suspicious.is_empty() {
            let mut kept = Vec::with_capacity(raw.len());
            for e in raw {
                if e.kind == EdgeKind::Consolidation && suspicious.contains(&uf.find(e.a)) {
                    quarantined.push(e);
                } else {
                    kept.push(e);
                }
            }
            raw = kept;
            stats.quarantined = quarantined.len();
            uf = UnionFind::new(n);
            for e in &raw {
                uf.union(e.a, e.b);
            }
        }
    }

    // Trajectory membership per current component, maintained across the
    // remaining merge steps.
    let mut comp_trajs: HashMap<u32, HashSet<usize>> = HashMap::new();
    let mut comp_traj_counts: HashMap<(u32, usize), usize> = HashMap::new();
    for (&addr, &h) in &mined_at {
        if patoshi_ids.contains(&addr) {
            continue;
        }
        if let Some(&t) = traj_of_height.get(&h) {
            let c = uf.find(addr);
            comp_trajs.entry(c).or_default().insert(t);
            *comp_traj_counts.entry((c, t)).or_insert(0) += 1;
        }
    }

    // Step f: merge component pairs whose combined address count on shared
    // trajectories is large enough. The combined count (rather than the
    // smaller side) lets a consolidated component absorb the stray
    // unconsolidated rewards riding its own session lines, while two bare
    // single-block components never reach the threshold on their own, so
    // trajectories alone still never link anything.
    if params.enable_trajectory_steps {
        let mut per_traj: HashMap<usize, Vec<(u32, usize)>> = HashMap::new();
        for (&(c, t), &count) in &comp_traj_counts {
            per_traj.entry(t).or_default().push((c, count));
        }
        let mut scores: HashMap<(u32, u32), usize> = HashMap::new();
        let mut traj_ids: Vec<usize> = per_traj.keys().copied().collect();
        traj_ids.sort_unstable();
        for t in traj_ids {
            let mut comps = per_traj.remove(&t).unwrap();
            comps.sort_unstable();
            for i in 0..comps.len() {
                for j in (i + 1)..comps.len() {
                    let (c1, n1) = comps[i];
                    let (c2, n2) = comps[j];
                    *scores.entry((c1, c2)).or_insert(0) += n1 + n2;
                }
            }
        }
        let mut merges: Vec<(u32, u32)> = scores
            .into_iter()
            .filter(|&(_, s)| s >= params.share_min)
            .map(|(pair, _)| pair)
            .collect();
        merges.sort_unstable();
        for (c1, c2) in merges {
            if merge_components(&mut uf, &mut comp_trajs, c1, c2) {
                stats.shared_trajectory_merges += 1;
            }
        }
    }

    // Step g: curate the quarantined consolidation edges per consolidation
    // event (source transaction). An event is reintroduced when (i) the
    // trajectory-bearing components it links pairwise share a trajectory
    // (vacuous when at most one side has extranonce evidence, e.g. a bare
    // sweep target) and (ii) the combined agent shows no overlapping
    // trajectories.
    if params.enable_trajectory_steps {
        let mut by_tx: Vec<(u32, Vec<&RawEdge>)> = Vec::new();
        {
            let mut groups: HashMap<u32, Vec<&RawEdge>> = HashMap::new();
            for e in &quarantined {
                groups.entry(e.provenance).or_default().push(e);
            }
            let mut keys: Vec<u32> = groups.keys().copied().collect();
            keys.sort_unstable();
            for k in keys {
                by_tx.push((k, groups.remove(&k).unwrap()));
            }
        }
        for (_, group) in by_tx {
            let mut comps: Vec<u32> = group
                .iter()
                .flat_map(|e| [uf.find(e.a), uf.find(e.b)])
                .collect();
            comps.sort_unstable();
            comps.dedup();
            if comps.len() < 2 {
                stats.reintroduced += group.len();
                continue;
            }
            let with_trajs: Vec<&HashSet<usize>> = comps
                .iter()
                .filter_map(|c| comp_trajs.get(c).filter(|ts| !ts.is_empty()))
                .collect();
            let shares = with_trajs.len() < 2
                || with_trajs.iter().enumerate().all(|(i, ta)| {
                    with_trajs
                        .iter()
                        .skip(i + 1)
                        .all(|tb| ta.iter().any(|t| tb.contains(t)))
                });
            if !shares {
                continue;
            }
            let merged: Vec<usize> = {
                let mut v: Vec<usize> = with_trajs.iter().flat_map(|ts| ts.iter().copied()).collect();
                v.sort_unstable();
                v.dedup();
                v
            };
            if has_overlap(&merged, trajectories, params.overlap_tol) {
                continue;
            }
            let first = comps[0];
            for &c in &comps[1..] {
                merge_components(&mut uf, &mut comp_trajs, first, c);
            }
            stats.reintroduced += group.len();
        }
    }

    // Step h: round-count batch consolidations swept to a shared address.
    if params.enable_round_rule {
        round_consolidation_merges(
            chain,
            table,
            &mut uf,
            &mut comp_trajs,
            &mined_at,
            &patoshi_ids,
            trajectories,
            params,
            stats,
        );
    }

    // Final grouping; the dominant miner's addresses form one reserved
    // component of their own.
    let labels = uf.canonical_labels();
    let mut groups: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut patoshi_group: Vec<u32> = Vec::new();
    for id in 0..n as u32 {
        if patoshi_ids.contains(&id) {
            patoshi_group.push(id);
        } else {
            groups.entry(labels[id as usize]).or_default().push(id);
        }
    }
    let mut keys: Vec<u32> = groups.keys().copied().collect();
    keys.sort_unstable();
    let mut components: Vec<Vec<Address>> = Vec::with_capacity(keys.len() + 1);
    let mut patoshi_index = None;
    if !patoshi_group.is_empty() {
        patoshi_index = Some(0);
        components.push(
            patoshi_group
                .iter()
                .map(|&id| table.address(id).clone())
                .collect(),
        );
    }
    for k in keys {
        components.push(
            groups
                .remove(&k)
                .unwrap()
                .iter()
                .map(|&id| table.address(id).clone())
                .collect(),
        );
    }
    rank_components(chain, components, patoshi_index)
}

/// Components whose coinbase blocks ride two distinct trajectories that
/// overlap in time by more than the tolerance.
fn suspicious_components(
    uf: &mut UnionFind,
    mined_at: &HashMap<u32, u64>,
    traj_of_height: &HashMap<u64, usize>,
    trajectories: &[Trajectory],
    params: &LinkerParams,
) -> HashSet<u32> {
    let mut comp_trajs: HashMap<u32, HashSet<usize>> = HashMap::new();
    for (&addr, &h) in mined_at {
        if let Some(&t) = traj_of_height.get(&h) {
            comp_trajs.entry(uf.find(addr)).or_default().insert(t);
        }
    }
    comp_trajs
        .into_iter()
        .filter(|(_, ts)| {
            let mut v: Vec<usize> = ts.iter().copied().collect();
            v.sort_unstable();
            has_overlap(&v, trajectories, params.overlap_tol)
        })
        .map(|(c, _)| c)
        .collect()
}

fn has_overlap(traj_ids: &[usize], trajectories: &[Trajectory], tol: u64) -> bool {
    for (i, &a) in traj_ids.iter().enumerate() {
        for &b in &traj_ids[i + 1..] {
            if trajectories[a].overlap_blocks(&trajectories[b]) > tol {
                return true;
            }
        }
    }
    false
}

fn merge_components(
    uf: &mut UnionFind,
    comp_trajs: &mut HashMap<u32, HashSet<usize>>,
    a: u32,
    b: u32,
) -> bool {
    let (ra, rb) = (uf.find(a), uf.find(b));
    if ra == rb {
        return false;
    }
    uf.union(ra, rb);
    let root = uf.find(ra);
    for loser in [ra, rb] {
        if loser != root {
            if let Some(ts) = comp_trajs.remove(&loser) {
                comp_trajs.entry(root).or_default().extend(ts);
            }
        }
    }
    true
}

#[allow(clippy::too_many_arguments)]
fn round_consolidation_merges(
    chain: &Chain,
    table: &AddrTable,
    uf: &mut UnionFind,
    comp_trajs: &mut HashMap<u32, HashSet<usize>>,
    mined_at: &HashMap<u32, u64>,
    patoshi_ids: &HashSet<u32>,
    trajectories: &[Trajectory],
    params: &LinkerParams,
    stats: &mut PipelineStats,
) {
    // First spend of each address -> single-output target (None when the
    // spending transaction has another shape).
    let mut spend_target: HashMap<u32, Option<u32>> = HashMap::new();
    for (_, tx) in chain.transactions() {
        if tx.is_coinbase {
            continue;
        }
        let target = if tx.outputs.len() == 1 {
            table.id(&tx.outputs[0].address)
        } else {
            None
        };
        for e in &tx.inputs {
            if let Some(id) = table.id(&e.address) {
                spend_target.entry(id).or_insert(target);
            }
        }
    }

    // Group component coinbase rewards.
    let labels = uf.canonical_labels();
    let mut comp_rewards: HashMap<u32, Vec<u32>> = HashMap::new();
    for &addr in mined_at.keys() {
        if !patoshi_ids.contains(&addr) {
            comp_rewards
                .entry(labels[addr as usize])
                .or_default()
                .push(addr);
        }
    }

    // Candidates: components that mined exactly a round count and sent every
    // reward, via single-output spends, to one common address.
    let mut by_target: HashMap<u32, Vec<u32>> = HashMap::new();
    for (comp, rewards) in &comp_rewards {
        if !params.round_counts.contains(&(rewards.len() as u64)) {
            continue;
        }
        let mut common: Option<u32> = None;
        let mut ok = true;
        for &r in rewards {
            match spend_target.get(&r) {
                Some(Some(t)) => match common {
                    None => common = Some(*t),
                    Some(c) if c == *t => {}
                    _ => {
                        ok = false;
                        break;
                    }
                },
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            if let Some(t) = common {
                by_target.entry(t).or_default().push(*comp);
            }
        }
    }

    let mut targets: Vec<u32> = by_target.keys().copied().collect();
    targets.sort_unstable();
    for t in targets {
        let mut comps = by_target.remove(&t).unwrap();
        comps.sort_unstable();
        for comp in comps {
            let (ct, cc) = (uf.find(t), uf.find(comp));
            if ct == cc {
                continue;
            }
            // Veto on incompatible nonce profiles (vacuous when either side
            // has no blocks).
            let nonces_a = component_nonces(chain, uf, comp, mined_at);
            let nonces_b = component_nonces(chain, uf, t, mined_at);
            if !nonces_a.is_empty()
                && !nonces_b.is_empty()
                && !nonce_profile_compatible(&nonces_a, &nonces_b)
            {
                continue;
            }
            // Veto when the merged agent would show overlapping trajectories.
            let merged: Vec<usize> = {
                let mut v: Vec<usize> = comp_trajs
                    .get(&ct)
                    .into_iter()
                    .chain(comp_trajs.get(&cc))
                    .flatten()
                    .copied()
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            };
            if has_overlap(&merged, trajectories, params.overlap_tol) {
                continue;
            }
            merge_components(uf, comp_trajs, ct, cc);
            stats.round_consolidation_merges += 1;
        }
    }
}

/// Nonces of the blocks whose coinbase rewards sit in the live component
/// containing `member`.
fn component_nonces(
    chain: &Chain,
    uf: &mut UnionFind,
    member: u32,
    mined_at: &HashMap<u32, u64>,
) -> Vec<u32> {
    let root = uf.find(member);
    let heights: HashSet<u64> = mined_at
        .iter()
        .filter(|(&addr, _)| uf.find(addr) == root)
        .map(|(_, &h)| h)
        .collect();
    nonce::nonces_for_heights(chain, &heights)
}

/// Builds the ranked catalog from final address components. Ranking key:
/// satoshi mined descending, then first-active timestamp, then smallest
/// address.
fn rank_components(
    chain: &Chain,
    components: Vec<Vec<Address>>,
    patoshi_index: Option<usize>,
) -> AgentCatalog {
    struct Agg {
        satoshi: u64,
        heights: HashSet<u64>,
        first_active: i64,
        last_active: i64,
        min_address: Address,
    }

    let mut comp_of: HashMap<&Address, usize> = HashMap::new();
    for (i, comp) in components.iter().enumerate() {
        for a in comp {
            comp_of.insert(a, i);
        }
    }

    let mut aggs: Vec<Agg> = components
        .iter()
        .map(|comp| Agg {
            satoshi: 0,
            heights: HashSet::new(),
            first_active: i64::MAX,
            last_active: i64::MIN,
            min_address: comp.iter().min().cloned().expect("non-empty component"),
        })
        .collect();

    for b in chain.blocks() {
        for tx in &b.txs {
            for e in tx.inputs.iter().chain(tx.outputs.iter()) {
                if let Some(&i) = comp_of.get(&e.address) {
                    let agg = &mut aggs[i];
                    agg.first_active = agg.first_active.min(b.timestamp);
                    agg.last_active = agg.last_active.max(b.timestamp);
                }
            }
            if tx.is_coinbase {
                for e in &tx.outputs {
                    if let Some(&i) = comp_of.get(&e.address) {
                        aggs[i].satoshi += e.value;
                        aggs[i].heights.insert(b.height);
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..components.len()).collect();
    order.sort_by(|&x, &y| {
        aggs[y]
            .satoshi
            .cmp(&aggs[x].satoshi)
            .then(aggs[x].first_active.cmp(&aggs[y].first_active))
            .then(aggs[x].min_address.cmp(&aggs[y].min_address))
    });

    let mut assignment = HashMap::new();
    let mut summaries = Vec::with_capacity(components.len());
    let mut patoshi_agent = None;
    for (rank, &i) in order.iter().enumerate() {
        let agent_id = rank as u32 + 1;
        if Some(i) == patoshi_index {
            patoshi_agent = Some(agent_id);
        }
        let agg = &aggs[i];
        summaries.push(AgentSummary {
            agent_id,
            addresses: components[i].len() as u64,
            blocks_mined: agg.heights.len() as u64,
            satoshi_mined: agg.satoshi,
            first_active: if agg.first_active == i64::MAX {
                0
            } else {
                agg.first_active
            },
            last_active: if agg.last_active == i64::MIN {
                0
            } else {
                agg.last_active
            },
        });
        for a in &components[i] {
            assignment.insert(a.clone(), agent_id);
        }
    }

    AgentCatalog {
        assignment,
        summaries,
        patoshi_agent,
    }
}

#[cfg(test)]
mod tests;
