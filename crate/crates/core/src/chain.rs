//! Canonical ledger types shared by every analysis module.
//!
//! All types are plain immutable data: once a [`Chain`] is constructed it is
//! never mutated, so it can be shared freely across threads. Monetary values
//! are integer satoshi throughout (1 coin = 10^8 satoshi); conversion to
//! whole coins is a display concern.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;

/// Pseudonymous identifier that holds coin. Treated as an opaque token;
/// comparison is exact string equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(String);

impl Address {
    /// Returns `None` for an empty token.
    pub fn new<S: Into<String>>(s: S) -> Option<Self> {
        let s = s.into();
        if s.is_empty() {
            None
        } else {
            Some(Address(s))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Address {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// One (address, satoshi) pair on the input or output side of a transaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxEntry {
    pub address: Address,
    pub value: u64,
}

impl TxEntry {
    pub fn new(address: Address, value: u64) -> Self {
        TxEntry { address, value }
    }
}

/// A transfer: lists of input and output (address, value) pairs.
/// Coinbase transactions create coin and have no inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub txid: String,
    pub is_coinbase: bool,
    pub inputs: Vec<TxEntry>,
    pub outputs: Vec<TxEntry>,
}

impl Transaction {
    pub fn input_total(&self) -> u64 {
        self.inputs.iter().map(|e| e.value).sum()
    }

    pub fn output_total(&self) -> u64 {
        self.outputs.iter().map(|e| e.value).sum()
    }
}

/// One mined block: consensus metadata plus the transactions it bundles.
///
/// `extranonce` is optional; miners running non-default software do not
/// expose one, which only excludes the block from trajectory analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub height: u64,
    /// Self-reported by the miner, seconds UTC. Monotonicity is not assumed.
    pub timestamp: i64,
    pub nonce: u32,
    pub extranonce: Option<u64>,
    pub txs: Vec<Transaction>,
}

impl Block {
    /// The block's coinbase transaction, if it carries exactly one.
    pub fn coinbase(&self) -> Option<&Transaction> {
        let mut it = self.txs.iter().filter(|t| t.is_coinbase);
        match (it.next(), it.next()) {
            (Some(t), None) => Some(t),
            _ => None,
        }
    }

    /// The (address, value) pairs credited by the coinbase.
    pub fn coinbase_outputs(&self) -> &[TxEntry] {
        self.coinbase().map(|t| t.outputs.as_slice()).unwrap_or(&[])
    }
}

/// Height-indexed sequence of blocks with an address-to-first-seen index.
///
/// Heights are contiguous starting at 1. The index is derived from the
/// blocks at construction and is therefore always consistent with them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    blocks: Vec<Block>,
    address_index: HashMap<Address, u64>,
}

impl Chain {
    pub fn new(blocks: Vec<Block>) -> Self {
        let mut address_index = HashMap::new();
        for b in &blocks {
            for tx in &b.txs {
                for e in tx.inputs.iter().chain(tx.outputs.iter()) {
                    address_index.entry(e.address.clone()).or_insert(b.height);
                }
            }
        }
        Chain {
            blocks,
            address_index,
        }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block at the given height (heights start at 1).
    pub fn block_at(&self, height: u64) -> Option<&Block> {
        if height == 0 {
            return None;
        }
        let first = self.blocks.first()?.height;
        self.blocks.get(height.checked_sub(first)? as usize)
    }

    /// Height of the block in which an address first appears.
    pub fn first_seen(&self, address: &Address) -> Option<u64> {
        self.address_index.get(address).copied()
    }

    pub fn addresses(&self) -> impl Iterator<Item = &Address> {
        self.address_index.keys()
    }

    pub fn address_count(&self) -> usize {
        self.address_index.len()
    }

    pub fn transactions(&self) -> impl Iterator<Item = (&Block, &Transaction)> {
        self.blocks
            .iter()
            .flat_map(|b| b.txs.iter().map(move |t| (b, t)))
    }
}

/// A broken invariant, reported as data rather than as a failure so that a
/// caller can collect every problem in one pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Height of the offending block (0 when the problem is chain-global).
    pub height: u64,
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "height {}: {} ({})", self.height, self.rule, self.detail)
    }
}

/// Checks every structural invariant and returns the violations found.
///
/// An empty result means the chain is well-formed: heights are contiguous
/// from 1, every block carries exactly one coinbase paying at least one
/// output, non-coinbase transactions conserve value, and all entry values
/// are positive.
pub fn validate_chain(chain: &Chain) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut expected = 1u64;
    for b in chain.blocks() {
        if b.height != expected {
            if b.height > expected {
                out.push(Violation {
                    height: expected,
                    rule: "height-gap",
                    detail: alloc::format!(
                        "gap at height {expected} (next block has height {})",
                        b.height
                    ),
                });
            } else {
                out.push(Violation {
                    height: b.height,
                    rule: "duplicate-or-regressing-height",
                    detail: alloc::format!("expected {expected}, found {}", b.height),
                });
            }
            expected = b.height;
        }
        expected = expected.saturating_add(1);

        let n_coinbase = b.txs.iter().filter(|t| t.is_coinbase).count();
        if n_coinbase != 1 {
            out.push(Violation {
                height: b.height,
                rule: "coinbase-count",
                detail: alloc::format!("expected 1 coinbase transaction, found {n_coinbase}"),
            });
        }
        for tx in &b.txs {
            if tx.is_coinbase {
                if !tx.inputs.is_empty() {
                    out.push(Violation {
                        height: b.height,
                        rule: "coinbase-with-inputs",
                        detail: tx.txid.clone(),
                    });
                }
                if tx.outputs.is_empty() {
                    out.push(Violation {
                        height: b.height,
                        rule: "coinbase-empty",
                        detail: tx.txid.clone(),
                    });
                }
            } else {
                if tx.inputs.is_empty() {
                    out.push(Violation {
                        height: b.height,
                        rule: "missing-inputs",
                        detail: tx.txid.clone(),
                    });
                } else if tx.input_total() < tx.output_total() {
                    out.push(Violation {
                        height: b.height,
                        rule: "value-creation",
                        detail: alloc::format!(
                            "{}: inputs {} < outputs {}",
                            tx.txid,
                            tx.input_total(),
                            tx.output_total()
                        ),
                    });
                }
            }
            for e in tx.inputs.iter().chain(tx.outputs.iter()) {
                if e.value == 0 {
                    out.push(Violation {
                        height: b.height,
                        rule: "zero-value",
                        detail: alloc::format!("{}: {}", tx.txid, e.address),
                    });
                }
            }
        }
    }
    out
}

/// Optional rule: consecutive timestamps never decrease. True for the real
/// early chain but not an invariant of the type, so it is reported
/// separately from [`validate_chain`].
pub fn check_monotone_timestamps(chain: &Chain) -> Vec<Violation> {
    let mut out = Vec::new();
    for pair in chain.blocks().windows(2) {
        if pair[1].timestamp < pair[0].timestamp {
            out.push(Violation {
                height: pair[1].height,
                rule: "timestamp-regression",
                detail: alloc::format!("{} < {}", pair[1].timestamp, pair[0].timestamp),
            });
        }
    }
    out
}
