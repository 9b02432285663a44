//! Extranonce trajectory detection.
//!
//! Plotting extranonce against block height, one mining session shows up as
//! a near-linear run of points: the counter starts at zero when the client
//! starts and advances with every block added to the ledger. Blocks are
//! assigned greedily in height order; a block claimed by two active
//! trajectories at once is left unassigned rather than guessed.

use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};

use crate::chain::Chain;
use crate::linker::LinkerParams;

/// One detected mining session: a maximal near-linear run of
/// (height, extranonce) points.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: usize,
    /// (height, extranonce) members, ascending in both coordinates.
    pub points: Vec<(u64, u64)>,
    /// Least-squares slope of extranonce per height.
    pub slope: f64,
    /// Largest absolute deviation of a member from the fitted line.
    pub residual: f64,
}

impl Trajectory {
    pub fn start_height(&self) -> u64 {
        self.points[0].0
    }

    pub fn end_height(&self) -> u64 {
        self.points[self.points.len() - 1].0
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of heights the two trajectories' spans have in common.
    pub fn overlap_blocks(&self, other: &Trajectory) -> u64 {
        let lo = self.start_height().max(other.start_height());
        let hi = self.end_height().min(other.end_height());
        (hi + 1).saturating_sub(lo)
    }
}

struct ActiveRun {
    points: Vec<(u64, u64)>,
}

impl ActiveRun {
    fn last(&self) -> (u64, u64) {
        self.points[self.points.len() - 1]
    }

    fn slope(&self) -> f64 {
        let (h0, e0) = self.points[0];
        let (h1, e1) = self.last();
        (e1 as f64 - e0 as f64) / (h1 as f64 - h0 as f64)
    }

    fn mature(&self) -> bool {
        self.points.len() >= 2
    }

    /// Whether the block could extend this run under the given params.
    fn matches(&self, height: u64, extranonce: u64, params: &LinkerParams) -> bool {
        let (last_h, last_e) = self.last();
        if extranonce <= last_e {
            return false;
        }
        let dh = (height - last_h) as f64;
        if self.mature() {
            let predicted = last_e as f64 + self.slope() * dh;
            (extranonce as f64 - predicted).abs() <= params.tolerance
        } else {
            let implied = (extranonce as f64 - last_e as f64) / dh;
            (params.slope_min..=params.slope_max).contains(&implied)
        }
    }
}

fn finish(run: ActiveRun, out: &mut Vec<Trajectory>, params: &LinkerParams) {
    if run.points.len() < params.min_trajectory_len {
        return;
    }
    // Least-squares line through the members, centered on the first point
    // so the sums stay well inside exact f64 integer range.
    let n = run.points.len() as f64;
    let (mut sh, mut se, mut shh, mut she) = (0.0, 0.0, 0.0, 0.0);
    let h0 = run.points[0].0 as f64;
    let e0 = run.points[0].1 as f64;
    for &(h, e) in &run.points {
        let (hf, ef) = (h as f64 - h0, e as f64 - e0);
        sh += hf;
        se += ef;
        shh += hf * hf;
        she += hf * ef;
    }
    let denom = n * shh - sh * sh;
    let slope = if denom == 0.0 {
        0.0
    } else {
        (n * she - sh * se) / denom
    };
    let intercept = (se - slope * sh) / n;
    let residual = run
        .points
        .iter()
        .map(|&(h, e)| (e as f64 - e0 - (intercept + slope * (h as f64 - h0))).abs())
        .fold(0.0_f64, f64::max);
    out.push(Trajectory {
        id: 0, // assigned after sorting
        points: run.points,
        slope,
        residual,
    });
}

/// Greedy sequential trajectory assignment over every extranonce-bearing
/// block, ascending by height.
///
/// A block extends the unique active run it matches; matching two or more
/// runs leaves it unassigned, and matching none seeds a new run. Runs close
/// after `gap_limit` heights of silence and are kept only if they reach
/// `min_trajectory_len` members. Returned trajectories are ordered (and get
/// their ids) by start height.
pub fn detect_trajectories(chain: &Chain, params: &LinkerParams) -> Vec<Trajectory> {
    let mut active: Vec<ActiveRun> = Vec::new();
    let mut done: Vec<Trajectory> = Vec::new();

    for block in chain.blocks() {
        let Some(e) = block.extranonce else {
            continue;
        };
        let h = block.height;

        // Retire runs that have been silent past the gap limit.
        let mut i = 0;
        while i < active.len() {
            if active[i].last().0 + params.gap_limit < h {
                finish(active.swap_remove(i), &mut done, params);
            } else {
                i += 1;
            }
        }

        // Runs with an established slope take precedence; a lone seed point
        // is not yet a trajectory, so its wide acceptance cone must not turn
        // an exact line continuation into an ambiguity.
        let mut mature = active
            .iter()
            .enumerate()
            .filter(|(_, run)| run.mature() && run.matches(h, e, params))
            .map(|(i, _)| i);
        match (mature.next(), mature.next()) {
            (Some(i), None) => active[i].points.push((h, e)),
            (Some(_), Some(_)) => {} // two established lines claim it: unassigned
            (None, _) => {
                let mut seeds = active
                    .iter()
                    .enumerate()
                    .filter(|(_, run)| !run.mature() && run.matches(h, e, params))
                    .map(|(i, _)| i);
                match (seeds.next(), seeds.next()) {
                    (Some(i), None) => active[i].points.push((h, e)),
                    (Some(_), Some(_)) => {} // two seeds claim it: unassigned
                    (None, _) => active.push(ActiveRun {
                        points: alloc::vec![(h, e)],
                    }),
                }
            }
        }
    }
    for run in active {
        finish(run, &mut done, params);
    }

    done.sort_by_key(|t| (t.start_height(), t.end_height()));
    for (id, t) in done.iter_mut().enumerate() {
        t.id = id;
    }
    done
}

/// Heights riding trajectories whose slope is well above the unit slope of
/// the default client (the signature of the dominant early miner). These
/// blocks are excluded from all subsequent agent identification and land in
/// a reserved agent.
pub fn detect_patoshi(trajectories: &[Trajectory], params: &LinkerParams) -> HashSet<u64> {
    let mut heights = HashSet::new();
    for t in trajectories {
        if t.slope >= params.patoshi_slope_min && t.len() >= params.patoshi_len_min {
            heights.extend(t.points.iter().map(|&(h, _)| h));
        }
    }
    heights
}

/// height -> trajectory id lookup for the consolidation rule.
pub fn height_to_trajectory(trajectories: &[Trajectory]) -> HashMap<u64, usize> {
    let mut map = HashMap::new();
    for t in trajectories {
        for &(h, _) in &t.points {
            map.insert(h, t.id);
        }
    }
    map
}
