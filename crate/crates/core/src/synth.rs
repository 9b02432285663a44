//! Seeded generator of synthetic chains with known per-address ownership.
//!
//! Reproduces the behavioral patterns the linker exploits: extranonce
//! session trajectories (reset to zero on restart, advancing with every
//! network block), nonce-generation styles, reward consolidation habits, and
//! change outputs. The returned [`GroundTruth`] is total over every address
//! the generator creates, making it the oracle for linking accuracy tests.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::chain::{Address, Block, Chain, Transaction, TxEntry};
use crate::fx;

/// How a miner's winning nonce values are distributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonceProfile {
    /// Counting up from zero each attempt: wins concentrate in the low
    /// quarter of the 32-bit range.
    Counter,
    /// Uniform over the full 32-bit range.
    Uniform,
    /// Uniform over an arbitrary sub-range.
    RestrictedRange { lo: u32, hi: u32 },
}

/// When a miner sweeps its accumulated coinbase rewards into one address.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsolidationPolicy {
    Never,
    /// Sweep everything unspent a few blocks after each session ends. The
    /// delay means the sweep usually also catches the first rewards of the
    /// next session, which is exactly the cross-session pattern seen in
    /// real spending.
    PerSession { delay_blocks: u64 },
    /// Sweep as soon as exactly `n` coinbase rewards have accumulated (20
    /// and 40 are the batch sizes agents used in practice).
    RoundBatch(u32),
}

/// One mining machine. Model a multi-machine agent as several specs sharing
/// an `agent_id`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinerSpec {
    pub agent_id: u32,
    pub hashrate_weight: f64,
    /// Mean session length in network blocks (geometric distribution).
    pub mean_session_blocks: f64,
    pub nonce_profile: NonceProfile,
    pub consolidation: ConsolidationPolicy,
    /// GPU-style mining advances the extranonce several times per network
    /// block, so its trajectories have slope well above one.
    pub gpu_like: bool,
    /// Probability per network block of one extra extranonce increment from
    /// nonce exhaustion. Scales with hash power in practice; it is what
    /// keeps two concurrent session lines from ever being identical.
    pub extranonce_jitter: f64,
    /// Non-default mining software does not expose an extranonce at all.
    pub extranonce_visible: bool,
}

impl MinerSpec {
    /// A default-software CPU miner.
    pub fn default_client(agent_id: u32, hashrate_weight: f64) -> Self {
        MinerSpec {
            agent_id,
            hashrate_weight,
            mean_session_blocks: 400.0,
            nonce_profile: NonceProfile::Counter,
            consolidation: ConsolidationPolicy::PerSession { delay_blocks: 30 },
            gpu_like: false,
            extranonce_jitter: 0.0,
            extranonce_visible: true,
        }
    }
}

/// Total map from generated address to owning agent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    map: HashMap<Address, u32>,
}

impl GroundTruth {
    pub fn owner(&self, address: &Address) -> Option<u32> {
        self.map.get(address).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Address, u32)> {
        self.map.iter().map(|(a, &id)| (a, id))
    }

    /// Entries sorted by address, for deterministic serialization.
    pub fn sorted_entries(&self) -> Vec<(Address, u32)> {
        let mut v: Vec<_> = self.map.iter().map(|(a, &id)| (a.clone(), id)).collect();
        v.sort();
        v
    }

    pub fn insert(&mut self, address: Address, agent: u32) {
        self.map.insert(address, agent);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    /// Block subsidy in satoshi (50 coins during the studied era).
    pub reward: u64,
    /// Mean spacing between blocks, seconds.
    pub mean_block_interval: f64,
    /// Extranonce advance per network block for gpu-like miners.
    pub gpu_extranonce_rate: u64,
    pub start_timestamp: i64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            reward: 50_0000_0000,
            mean_block_interval: 600.0,
            gpu_extranonce_rate: 3,
            start_timestamp: 1_231_006_505,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynthError {
    NoMiners,
    /// Weights must be positive and finite.
    BadWeights,
    ZeroBlocks,
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthError::NoMiners => write!(f, "at least one miner required"),
            SynthError::BadWeights => write!(f, "hashrate weights must be positive"),
            SynthError::ZeroBlocks => write!(f, "need at least one block"),
        }
    }
}

impl core::error::Error for SynthError {}

struct MinerState {
    extranonce: u64,
    session_remaining: u64,
    nonce_counter: u32,
}

/// Per-agent wallet: machines of one agent pool their rewards and sweep them
/// into one lifetime consolidation address, the "keep everything in one
/// place" habit that leaks so much linkage information.
#[derive(Default)]
struct AgentWallet {
    unswept: Vec<(Address, u64)>,
    target: Option<Address>,
}

struct PendingSweep {
    due_height: u64,
    agent: u32,
    /// Explicit inputs (round batches) or empty meaning "every reward
    /// unswept when the sweep fires" (session sweeps).
    inputs: Vec<(Address, u64)>,
}

/// Generates a chain of `n_blocks` blocks. Each block's miner is chosen with
/// probability proportional to `hashrate_weight`; everything downstream of
/// the seed is deterministic.
pub fn generate(
    miners: &[MinerSpec],
    n_blocks: u64,
    seed: u64,
    options: &SynthOptions,
) -> Result<(Chain, GroundTruth), SynthError> {
    if miners.is_empty() {
        return Err(SynthError::NoMiners);
    }
    if n_blocks == 0 {
        return Err(SynthError::ZeroBlocks);
    }
    let mut cumulative = Vec::with_capacity(miners.len());
    let mut total = 0.0;
    for m in miners {
        if !(m.hashrate_weight > 0.0) || !m.hashrate_weight.is_finite() {
            return Err(SynthError::BadWeights);
        }
        total += m.hashrate_weight;
        cumulative.push(total);
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut truth = GroundTruth::default();
    let mut blocks = Vec::with_capacity(n_blocks as usize);
    let mut pending: Vec<PendingSweep> = Vec::new();
    let mut wallets: HashMap<u32, AgentWallet> = HashMap::new();
    let mut sweep_serial = 0u64;
    let mut timestamp = options.start_timestamp;

    // Miners are already mid-session when the window opens: stagger their
    // initial extranonce offsets so the first sessions do not all trace the
    // same line from height 1.
    let mut states: Vec<MinerState> = miners
        .iter()
        .map(|m| {
            let session = draw_session(&mut rng, m.mean_session_blocks);
            let elapsed = rng.gen_range(0..session.max(2));
            let rate = if m.gpu_like {
                options.gpu_extranonce_rate
            } else {
                1
            };
            MinerState {
                extranonce: elapsed * rate,
                session_remaining: session - elapsed,
                nonce_counter: 0,
            }
        })
        .collect();

    for height in 1..=n_blocks {
        timestamp += draw_interval(&mut rng, options.mean_block_interval);
        let winner = pick_weighted(&mut rng, &cumulative, total);
        let spec = &miners[winner];

        let mut txs = Vec::new();
        let coinbase_addr = Address::new(format!("b{height}")).unwrap();
        truth.insert(coinbase_addr.clone(), spec.agent_id);
        txs.push(Transaction {
            txid: format!("cb{height}"),
            is_coinbase: true,
            inputs: vec![],
            outputs: vec![TxEntry::new(coinbase_addr.clone(), options.reward)],
        });

        // Fire any sweeps due by now; inputs never include this block's
        // coinbase because the snapshot happens before it lands in the
        // wallet.
        let mut due: Vec<PendingSweep> = Vec::new();
        pending.retain_mut(|p| {
            if p.due_height <= height {
                due.push(PendingSweep {
                    due_height: p.due_height,
                    agent: p.agent,
                    inputs: core::mem::take(&mut p.inputs),
                });
                false
            } else {
                true
            }
        });
        for p in due {
            let wallet = wallets.entry(p.agent).or_default();
            let inputs = if p.inputs.is_empty() {
                core::mem::take(&mut wallet.unswept)
            } else {
                p.inputs
            };
            if inputs.len() < 2 {
                // Nothing worth sweeping; keep it for next time.
                wallet.unswept.extend(inputs);
                continue;
            }
            let value: u64 = inputs.iter().map(|(_, v)| v).sum();
            sweep_serial += 1;
            let target = wallet
                .target
                .get_or_insert_with(|| {
                    Address::new(format!("t{sweep_serial}")).unwrap()
                })
                .clone();
            truth.insert(target.clone(), p.agent);
            txs.push(Transaction {
                txid: format!("sw{sweep_serial}"),
                is_coinbase: false,
                inputs: inputs
                    .into_iter()
                    .map(|(a, v)| TxEntry::new(a, v))
                    .collect(),
                outputs: vec![TxEntry::new(target, value)],
            });
        }

        blocks.push(Block {
            height,
            timestamp,
            nonce: draw_nonce(&mut rng, spec, &mut states[winner]),
            extranonce: spec
                .extranonce_visible
                .then_some(states[winner].extranonce),
            txs,
        });

        // Reward bookkeeping and round-batch trigger for the winner.
        if !matches!(spec.consolidation, ConsolidationPolicy::Never) {
            let wallet = wallets.entry(spec.agent_id).or_default();
            wallet.unswept.push((coinbase_addr, options.reward));
            if let ConsolidationPolicy::RoundBatch(n) = spec.consolidation {
                let n = (n as usize).max(2);
                if wallet.unswept.len() >= n {
                    // Sweep the oldest n rewards next block.
                    let rest = wallet.unswept.split_off(n);
                    let taken = core::mem::replace(&mut wallet.unswept, rest);
                    pending.push(PendingSweep {
                        due_height: height + 1,
                        agent: spec.agent_id,
                        inputs: taken,
                    });
                }
            }
        }

        // Advance every running session one network block; nonce
        // exhaustion occasionally adds an extra step.
        for (idx, spec) in miners.iter().enumerate() {
            let st = &mut states[idx];
            st.extranonce += if spec.gpu_like {
                options.gpu_extranonce_rate
            } else {
                1
            };
            if spec.extranonce_jitter > 0.0 && rng.gen_range(0.0..1.0) < spec.extranonce_jitter {
                st.extranonce += 1;
            }
            st.session_remaining -= 1;
            if st.session_remaining == 0 {
                st.extranonce = 0;
                st.session_remaining = draw_session(&mut rng, spec.mean_session_blocks);
                if let ConsolidationPolicy::PerSession { delay_blocks } = spec.consolidation {
                    pending.push(PendingSweep {
                        due_height: height + delay_blocks.max(1),
                        agent: spec.agent_id,
                        inputs: Vec::new(),
                    });
                }
            }
        }
    }

    Ok((Chain::new(blocks), truth))
}

fn draw_session(rng: &mut ChaCha12Rng, mean: f64) -> u64 {
    if mean <= 1.0 {
        return 1;
    }
    // Geometric with success probability 1/mean, support {1, 2, ...}.
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let len = fx::ceil(fx::ln(u) / fx::ln_1p(-1.0 / mean));
    (len as u64).max(1)
}

fn draw_interval(rng: &mut ChaCha12Rng, mean: f64) -> i64 {
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    ((-mean * fx::ln(u)) as i64).max(1)
}

fn pick_weighted(rng: &mut ChaCha12Rng, cumulative: &[f64], total: f64) -> usize {
    let x: f64 = rng.gen_range(0.0..total);
    cumulative
        .partition_point(|&c| c <= x)
        .min(cumulative.len() - 1)
}

fn draw_nonce(rng: &mut ChaCha12Rng, spec: &MinerSpec, state: &mut MinerState) -> u32 {
    match spec.nonce_profile {
        NonceProfile::Counter => {
            // Counting from zero finds wins early: concentrate in the low
            // quarter of the range, drifting with the counter.
            state.nonce_counter = state.nonce_counter.wrapping_add(rng.gen_range(1..=1 << 16));
            state.nonce_counter & 0x3FFF_FFFF
        }
        NonceProfile::Uniform => rng.gen(),
        NonceProfile::RestrictedRange { lo, hi } => rng.gen_range(lo..=hi),
    }
}

/// Adds 2-output spend transactions (payee plus a fresh change address) on
/// top of an existing chain. Each swept balance is spent with probability
/// `rate`; the payee is a fresh address of a random *other* agent and the
/// change returns to the spender. Ground truth is extended accordingly.
pub fn inject_change_txs(chain: &Chain, truth: &mut GroundTruth, rate: f64, seed: u64) -> Chain {
    if rate <= 0.0 || chain.is_empty() {
        return chain.clone();
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x6368_616e_6765);
    let agents: Vec<u32> = {
        let mut ids: Vec<u32> = truth.map.values().copied().collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    };

    // Eligible balances: sweep-target addresses that are never themselves
    // spent. A change spend takes the balance accumulated up to one of the
    // target's receipts and is inserted after it.
    let mut spent: hashbrown::HashSet<&str> = hashbrown::HashSet::new();
    for (_, tx) in chain.transactions() {
        for e in &tx.inputs {
            spent.insert(e.address.as_str());
        }
    }
    let last_height = chain.blocks().last().map(|b| b.height).unwrap_or(0);
    // Receipts per unspent single-output target, in chain order.
    let mut receipts: Vec<(Address, Vec<(u64, u64)>)> = Vec::new();
    let mut receipt_index: HashMap<Address, usize> = HashMap::new();
    for (block, tx) in chain.transactions() {
        if tx.is_coinbase || tx.outputs.len() != 1 {
            continue;
        }
        let out = &tx.outputs[0];
        if spent.contains(out.address.as_str()) {
            continue;
        }
        let idx = *receipt_index.entry(out.address.clone()).or_insert_with(|| {
            receipts.push((out.address.clone(), Vec::new()));
            receipts.len() - 1
        });
        receipts[idx].1.push((block.height, out.value));
    }

    struct ChangeSpend {
        insert_at: u64,
        input: (Address, u64),
        owner: u32,
    }
    let mut spends = Vec::new();
    for (address, recs) in receipts {
        let Some(owner) = truth.owner(&address) else {
            continue;
        };
        // Pick a prefix of receipts whose balance gets spent; the receipt
        // must leave room for the spend before the chain ends.
        let usable = recs.partition_point(|&(h, _)| h < last_height);
        if usable == 0 {
            continue;
        }
        if rng.gen_range(0.0..1.0) >= rate {
            continue;
        }
        let cut = rng.gen_range(0..usable);
        let (cut_height, _) = recs[cut];
        let balance: u64 = recs[..=cut].iter().map(|(_, v)| v).sum();
        if balance < 2 {
            continue;
        }
        let insert_at = rng.gen_range(cut_height + 1..=last_height.min(cut_height + 500));
        spends.push(ChangeSpend {
            insert_at,
            input: (address, balance),
            owner,
        });
    }

    let mut serial = 0u64;
    let first_height = chain.blocks()[0].height;
    let mut blocks: Vec<Block> = chain.blocks().to_vec();
    for s in spends {
        serial += 1;
        let payee_agent = if agents.len() > 1 {
            let mut a = agents[rng.gen_range(0..agents.len())];
            while a == s.owner {
                a = agents[rng.gen_range(0..agents.len())];
            }
            a
        } else {
            s.owner
        };
        let payee = Address::new(format!("p{serial}")).unwrap();
        let change = Address::new(format!("c{serial}")).unwrap();
        truth.insert(payee.clone(), payee_agent);
        truth.insert(change.clone(), s.owner);
        let pay_value = rng.gen_range(1..s.input.1);
        let tx = Transaction {
            txid: format!("ch{serial}"),
            is_coinbase: false,
            inputs: vec![TxEntry::new(s.input.0, s.input.1)],
            outputs: vec![
                TxEntry::new(payee, pay_value),
                TxEntry::new(change, s.input.1 - pay_value),
            ],
        };
        blocks[(s.insert_at - first_height) as usize].txs.push(tx);
    }
    Chain::new(blocks)
}

/// Formats a miner roster in the plain-text form read back by
/// [`parse_miner_specs`]; one miner per line.
pub fn format_miner_specs(miners: &[MinerSpec]) -> String {
    let mut out = String::new();
    out.push_str("# agent_id weight mean_session nonce_profile consolidation gpu jitter extranonce\n");
    for m in miners {
        let nonce = match m.nonce_profile {
            NonceProfile::Counter => String::from("counter"),
            NonceProfile::Uniform => String::from("uniform"),
            NonceProfile::RestrictedRange { lo, hi } => format!("range:{lo}:{hi}"),
        };
        let cons = match m.consolidation {
            ConsolidationPolicy::Never => String::from("never"),
            ConsolidationPolicy::PerSession { delay_blocks } => format!("session:{delay_blocks}"),
            ConsolidationPolicy::RoundBatch(n) => format!("batch:{n}"),
        };
        out.push_str(&format!(
            "{} {} {} {} {} {} {} {}\n",
            m.agent_id,
            m.hashrate_weight,
            m.mean_session_blocks,
            nonce,
            cons,
            if m.gpu_like { "gpu" } else { "cpu" },
            m.extranonce_jitter,
            if m.extranonce_visible {
                "visible"
            } else {
                "hidden"
            },
        ));
    }
    out
}

/// Parses the plain-text miner roster format. Lines starting with `#` and
/// blank lines are ignored; fields are whitespace-separated.
pub fn parse_miner_specs(text: &str) -> Result<Vec<MinerSpec>, String> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 8 {
            return Err(format!(
                "line {}: expected 8 fields, got {}",
                lineno + 1,
                fields.len()
            ));
        }
        let err = |what: &str| format!("line {}: bad {what}", lineno + 1);
        let agent_id: u32 = fields[0].parse().map_err(|_| err("agent_id"))?;
        let hashrate_weight: f64 = fields[1].parse().map_err(|_| err("weight"))?;
        let mean_session_blocks: f64 = fields[2].parse().map_err(|_| err("session length"))?;
        let nonce_profile = if fields[3] == "counter" {
            NonceProfile::Counter
        } else if fields[3] == "uniform" {
            NonceProfile::Uniform
        } else if let Some(rest) = fields[3].strip_prefix("range:") {
            let (lo, hi) = rest.split_once(':').ok_or_else(|| err("nonce range"))?;
            NonceProfile::RestrictedRange {
                lo: lo.parse().map_err(|_| err("nonce range"))?,
                hi: hi.parse().map_err(|_| err("nonce range"))?,
            }
        } else {
            return Err(err("nonce profile"));
        };
        let consolidation = if fields[4] == "never" {
            ConsolidationPolicy::Never
        } else if let Some(d) = fields[4].strip_prefix("session:") {
            ConsolidationPolicy::PerSession {
                delay_blocks: d.parse().map_err(|_| err("consolidation"))?,
            }
        } else if let Some(n) = fields[4].strip_prefix("batch:") {
            ConsolidationPolicy::RoundBatch(n.parse().map_err(|_| err("consolidation"))?)
        } else {
            return Err(err("consolidation"));
        };
        let gpu_like = match fields[5] {
            "gpu" => true,
            "cpu" => false,
            _ => return Err(err("gpu flag")),
        };
        let extranonce_jitter: f64 = fields[6].parse().map_err(|_| err("jitter"))?;
        let extranonce_visible = match fields[7] {
            "visible" => true,
            "hidden" => false,
            _ => return Err(err("extranonce flag")),
        };
        out.push(MinerSpec {
            agent_id,
            hashrate_weight,
            mean_session_blocks,
            nonce_profile,
            consolidation,
            gpu_like,
            extranonce_jitter,
            extranonce_visible,
        });
    }
    Ok(out)
}
