//! Exact evolutionary dynamics of the N-player Centipede game in a finite
//! population: closed-form expected payoffs under group sampling, Moran
//! fixation probabilities, and the low-mutation stationary distribution over
//! monomorphic states, evaluated on (w, d) parameter grids.
//!
//! Everything here is semi-analytic; there is no Monte Carlo anywhere.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::centipede::Strategy;
use crate::fx;

#[derive(Debug, Clone, PartialEq)]
pub struct EvoParams {
    /// Population size M (>= 2).
    pub population: usize,
    /// Rounds per game N; the strategy set is {0, ..., N}.
    pub n_rounds: usize,
    /// Appreciation factor d > 1.
    pub d: f64,
    /// Defector bonus b > 1. Unlike the bare game engine this does not
    /// require b > d: the default heatmap sweeps d up to b, and the solver
    /// is well-defined either way.
    pub b: f64,
    /// Selection strength w in [0, 1]; fitness is f = 1 - w + w * payoff.
    pub w: f64,
    /// When true, the other seats sample types from the population with the
    /// focal individual removed ((i-1)/(M-1)); when false (default), every
    /// seat samples from the full population with replacement (i/M).
    pub exclude_self: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvoError {
    BadParams,
    /// The embedded-chain solve hit a zero pivot; cannot happen while every
    /// fixation probability stays inside (0, 1).
    SingularSystem,
}

impl fmt::Display for EvoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvoError::BadParams => write!(f, "need M >= 2, N >= 2, b > d > 1, 0 <= w <= 1"),
            EvoError::SingularSystem => write!(f, "stationary system is singular"),
        }
    }
}

impl core::error::Error for EvoError {}

impl EvoParams {
    pub fn new(
        population: usize,
        n_rounds: usize,
        d: f64,
        b: f64,
        w: f64,
    ) -> Result<Self, EvoError> {
        let p = EvoParams {
            population,
            n_rounds,
            d,
            b,
            w,
            exclude_self: false,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), EvoError> {
        if self.population < 2
            || self.n_rounds < 2
            || !(self.d > 1.0 && self.b > 1.0)
            || !(0.0..=1.0).contains(&self.w)
        {
            return Err(EvoError::BadParams);
        }
        Ok(())
    }
}

/// Exact expected payoff of a focal individual of type `s_focal` when `i` of
/// the M individuals share that type and the rest are of type `s_other`.
///
/// The focal's seat is uniform over rounds 1..=N and every other seat draws
/// its type independently (probability i/M for the focal type, or
/// (i-1)/(M-1) with `exclude_self`). The expectation is evaluated in closed
/// form by conditioning on the first defecting round.
pub fn expected_payoff(params: &EvoParams, s_focal: Strategy, s_other: Strategy, i: usize) -> f64 {
    let n = params.n_rounds;
    let m = params.population;
    debug_assert!(i >= 1 && i <= m);
    let x = if params.exclude_self {
        (i - 1) as f64 / (m - 1) as f64
    } else {
        i as f64 / m as f64
    };

    // Per-round probability that a non-focal seat cooperates.
    let mut coop = vec![0.0; n + 1];
    for (round, c) in coop.iter_mut().enumerate().skip(1) {
        *c = x * (s_focal.cooperates_at(round) as u8 as f64)
            + (1.0 - x) * (s_other.cooperates_at(round) as u8 as f64);
    }
    let mut d_pow = vec![1.0; n + 1];
    for e in 1..=n {
        d_pow[e] = d_pow[e - 1] * params.d;
    }

    let mut total = 0.0;
    for seat in 1..=n {
        if !s_focal.cooperates_at(seat) {
            // Focal takes at their own round if the game survives that far.
            let mut survive = 1.0;
            for c in coop.iter().take(seat).skip(1) {
                survive *= c;
            }
            total += survive * params.b * d_pow[seat - 1];
        } else {
            // Focal passes; they cash out if a later seat defects at round
            // `stop` (collecting d^(stop-1)), or everyone passes (d^N).
            let mut survive = 1.0; // all seats strictly before `stop`, focal excluded
            for c in coop.iter().take(seat).skip(1) {
                survive *= c;
            }
            for stop in (seat + 1)..=n {
                total += survive * (1.0 - coop[stop]) * d_pow[stop - 1];
                survive *= coop[stop];
            }
            total += survive * d_pow[n];
        }
    }
    total / n as f64
}

fn fitness(params: &EvoParams, payoff: f64) -> f64 {
    1.0 - params.w + params.w * payoff
}

/// Probability that a single mutant of type `s_mutant` fixates in a resident
/// population of type `s_resident` under the Moran birth-death process with
/// fitness-proportional birth and uniform death.
///
/// rho = [sum_{q=0}^{M-1} prod_{i=1}^{q} f_res(i)/f_mut(i)]^(-1), evaluated
/// in log space so strong selection at M ~ 100 does not underflow.
pub fn fixation_probability(params: &EvoParams, s_mutant: Strategy, s_resident: Strategy) -> f64 {
    let m = params.population;
    if s_mutant == s_resident {
        // Identical fitness at every count: neutral drift.
        return 1.0 / m as f64;
    }
    // Partial sums of ln gamma_i; log-sum-exp of [0, ln P_1, ..., ln P_{M-1}].
    let mut ln_partial = Vec::with_capacity(m);
    ln_partial.push(0.0);
    let mut acc = 0.0;
    for i in 1..m {
        let f_mut = fitness(params, expected_payoff(params, s_mutant, s_resident, i));
        let f_res = fitness(params, expected_payoff(params, s_resident, s_mutant, m - i));
        acc += fx::ln(f_res) - fx::ln(f_mut);
        ln_partial.push(acc);
    }
    let max = ln_partial.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let sum: f64 = ln_partial.iter().map(|&lp| fx::exp(lp - max)).sum();
    // exp(-max)/sum rather than exp(-(max + ln sum)): keeps the neutral
    // case (all partials zero) exactly at 1/M.
    fx::exp(-max) / sum
}

/// Long-run statistics of the embedded mutation-selection chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryResult {
    /// Asymptotic frequency of each monomorphic strategy state, index = s.
    pub frequencies: Vec<f64>,
    /// Argmax of `frequencies`; ties break toward the smallest s.
    pub most_frequent: Strategy,
    /// fixation[mutant][resident]; the diagonal holds the neutral 1/M.
    pub fixation: Vec<Vec<f64>>,
}

impl StationaryResult {
    /// Frequency of the always-defect strategy; the only strategy that
    /// defects in round 1.
    pub fn p_defect_round1(&self) -> f64 {
        self.frequencies[0]
    }
}

/// Low-mutation-limit stationary distribution over the N+1 monomorphic
/// states. A rare mutant strategy is drawn uniformly from the N alternatives
/// and either fixates or vanishes before the next arises, giving an embedded
/// Markov chain whose stationary vector is solved exactly.
pub fn stationary_distribution(params: &EvoParams) -> Result<StationaryResult, EvoError> {
    params.validate()?;
    let s_count = params.n_rounds + 1;
    let mut fixation = vec![vec![0.0; s_count]; s_count];
    for (s_mut, row) in fixation.iter_mut().enumerate() {
        for (s_res, slot) in row.iter_mut().enumerate() {
            *slot = fixation_probability(params, Strategy(s_mut), Strategy(s_res));
        }
    }

    // A fully symmetric chain (all invasion rates identical, e.g. the w = 0
    // neutral limit) is uniform by symmetry; return that exactly instead of
    // routing it through the elimination and picking up rounding.
    let first = fixation[1][0];
    let symmetric = (0..s_count).all(|s_mut| {
        (0..s_count).all(|s_res| s_mut == s_res || fixation[s_mut][s_res] == first)
    });
    if symmetric {
        return Ok(StationaryResult {
            frequencies: vec![1.0 / s_count as f64; s_count],
            most_frequent: Strategy(0),
            fixation,
        });
    }

    // Transition matrix of the embedded chain (row = current resident).
    let alternatives = (s_count - 1) as f64;
    let mut t = vec![vec![0.0; s_count]; s_count];
    for s in 0..s_count {
        let mut leave = 0.0;
        for sp in 0..s_count {
            if sp != s {
                let rate = fixation[sp][s] / alternatives;
                t[s][sp] = rate;
                leave += rate;
            }
        }
        t[s][s] = 1.0 - leave;
    }

    // Solve pi T = pi with sum(pi) = 1: rows of (T^t - I), last replaced by 1s.
    let mut a = vec![vec![0.0; s_count]; s_count];
    let mut rhs = vec![0.0; s_count];
    for r in 0..s_count {
        for c in 0..s_count {
            a[r][c] = t[c][r] - if r == c { 1.0 } else { 0.0 };
        }
    }
    for slot in a[s_count - 1].iter_mut() {
        *slot = 1.0;
    }
    rhs[s_count - 1] = 1.0;
    let frequencies = solve_linear(&mut a, &mut rhs).ok_or(EvoError::SingularSystem)?;

    let mut best = 0;
    for (s, &f) in frequencies.iter().enumerate() {
        if f > frequencies[best] {
            best = s;
        }
    }
    Ok(StationaryResult {
        frequencies,
        most_frequent: Strategy(best),
        fixation,
    })
}

/// Gaussian elimination with partial pivoting; small dense systems only.
fn solve_linear(a: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r1, &r2| {
            a[r1][col]
                .abs()
                .partial_cmp(&a[r2][col].abs())
                .unwrap_or(core::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for c in col..n {
                    a[row][c] -= factor * a[col][c];
                }
                rhs[row] -= factor * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut sum = rhs[row];
        for c in (row + 1)..n {
            sum -= a[row][c] * x[c];
        }
        x[row] = sum / a[row][row];
    }
    Some(x)
}

/// One evaluated grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapCell {
    pub w: f64,
    pub d: f64,
    pub n_rounds: usize,
    pub population: usize,
    pub b: f64,
    pub most_frequent: Strategy,
    pub p_defect_round1: f64,
    pub frequencies: Vec<f64>,
}

/// Grid specification for the (w, d) heatmaps.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid {
    pub w_values: Vec<f64>,
    pub d_values: Vec<f64>,
    pub n_values: Vec<usize>,
    pub population: usize,
    pub b: f64,
    pub exclude_self: bool,
}

impl HeatmapGrid {
    /// Default grid: selection strength log-spaced over [1e-3, 1],
    /// appreciation linear over [1.1, 4], b = 4, M = 25, N = 8.
    pub fn default_grid(steps: usize) -> Self {
        HeatmapGrid {
            w_values: log_space(1e-3, 1.0, steps),
            d_values: lin_space(1.1, 4.0, steps),
            n_values: vec![8],
            population: 25,
            b: 4.0,
            exclude_self: false,
        }
    }
}

pub fn log_space(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    assert!(steps >= 2 && lo > 0.0 && hi > lo);
    let (ln_lo, ln_hi) = (fx::ln(lo), fx::ln(hi));
    (0..steps)
        .map(|i| fx::exp(ln_lo + (ln_hi - ln_lo) * i as f64 / (steps - 1) as f64))
        .collect()
}

pub fn lin_space(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    assert!(steps >= 2 && hi > lo);
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// Evaluates the stationary distribution on every (n, w, d) grid cell, in
/// deterministic order (n outermost, then w, then d).
pub fn heatmap(grid: &HeatmapGrid) -> Result<Vec<HeatmapCell>, EvoError> {
    let mut cells =
        Vec::with_capacity(grid.n_values.len() * grid.w_values.len() * grid.d_values.len());
    for &n in &grid.n_values {
        for &w in &grid.w_values {
            for &d in &grid.d_values {
                let mut params = EvoParams::new(grid.population, n, d, grid.b, w)?;
                params.exclude_self = grid.exclude_self;
                let res = stationary_distribution(&params)?;
                cells.push(HeatmapCell {
                    w,
                    d,
                    n_rounds: n,
                    population: grid.population,
                    b: grid.b,
                    most_frequent: res.most_frequent,
                    p_defect_round1: res.p_defect_round1(),
                    frequencies: res.frequencies,
                });
            }
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(m: usize, n: usize, d: f64, w: f64) -> EvoParams {
        EvoParams::new(m, n, d, 4.0, w).unwrap()
    }

    #[test]
    fn monomorphic_payoffs() {
        let p = base(25, 8, 2.0, 1.0);
        // All-cooperate: nobody ever defects, everyone collects d^N.
        let pay = expected_payoff(&p, Strategy(8), Strategy(8), 25);
        assert_eq!(pay, 256.0);
        // All-defect: the focal collects b only when seated first.
        let pay = expected_payoff(&p, Strategy(0), Strategy(0), 25);
        assert_eq!(pay, 4.0 / 8.0);
    }

    // Brute-force oracle: enumerate every assignment of types to the other
    // N-1 seats and every focal seat position.
    fn brute_expected_payoff(p: &EvoParams, s_focal: Strategy, s_other: Strategy, i: usize) -> f64 {
        use crate::centipede::{play, GameParams, Variant};
        let n = p.n_rounds;
        let x = if p.exclude_self {
            (i - 1) as f64 / (p.population - 1) as f64
        } else {
            i as f64 / p.population as f64
        };
        let game = GameParams::new(n, p.d, p.b, 1.0, Variant::Standard).unwrap();
        let mut total = 0.0;
        for seat in 0..n {
            for mask in 0..(1usize << (n - 1)) {
                let mut prob = 1.0;
                let mut profile = alloc::vec::Vec::with_capacity(n);
                let mut bit = 0;
                for pos in 0..n {
                    if pos == seat {
                        profile.push(s_focal);
                    } else {
                        if mask >> bit & 1 == 1 {
                            profile.push(s_focal);
                            prob *= x;
                        } else {
                            profile.push(s_other);
                            prob *= 1.0 - x;
                        }
                        bit += 1;
                    }
                }
                let outcome = play(&game, &profile).unwrap();
                total += prob * outcome.payoffs[seat];
            }
        }
        total / n as f64
    }

    #[test]
    fn expected_payoff_matches_enumeration() {
        for &(m, n) in &[(3usize, 3usize), (5, 4), (4, 2), (5, 3)] {
            for exclude_self in [false, true] {
                let mut p = base(m, n, 1.7, 0.9);
                p.exclude_self = exclude_self;
                for sf in 0..=n {
                    for so in 0..=n {
                        for i in 1..=m {
                            let fast = expected_payoff(&p, Strategy(sf), Strategy(so), i);
                            let slow = brute_expected_payoff(&p, Strategy(sf), Strategy(so), i);
                            assert!(
                                (fast - slow).abs() <= 1e-12 * slow.abs().max(1.0),
                                "m={m} n={n} sf={sf} so={so} i={i}: {fast} vs {slow}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn neutral_fixation_is_one_over_m() {
        for m in [2usize, 5, 25, 100] {
            let p = base(m, 8, 2.0, 0.0);
            let rho = fixation_probability(&p, Strategy(3), Strategy(7));
            assert_eq!(rho, 1.0 / m as f64);
        }
    }

    #[test]
    fn dominant_mutant_beats_drift() {
        // Large d favors cooperators; an all-cooperate mutant in an
        // always-defect population under strong selection.
        let p = base(10, 8, 3.9, 1.0);
        let rho = fixation_probability(&p, Strategy(8), Strategy(0));
        assert!(rho > 1.0 / 10.0, "rho = {rho}");
    }

    // Absorbing-chain oracle: gambler's-ruin recurrence on mutant count with
    // absorbing boundaries, absorption-at-M probability from one mutant.
    fn fixation_oracle(p: &EvoParams, s_mut: Strategy, s_res: Strategy) -> f64 {
        let m = p.population;
        let gamma: alloc::vec::Vec<f64> = (1..m)
            .map(|i| {
                let fm = fitness(p, expected_payoff(p, s_mut, s_res, i));
                let fr = fitness(p, expected_payoff(p, s_res, s_mut, m - i));
                fr / fm
            })
            .collect();
        let mut denom = 1.0;
        let mut prod = 1.0;
        for g in &gamma {
            prod *= g;
            denom += prod;
        }
        1.0 / denom
    }

    #[test]
    fn fixation_matches_chain_solve() {
        let p = base(4, 3, 2.0, 0.8);
        for sm in 0..=3 {
            for sr in 0..=3 {
                if sm == sr {
                    continue;
                }
                let fast = fixation_probability(&p, Strategy(sm), Strategy(sr));
                let slow = fixation_oracle(&p, Strategy(sm), Strategy(sr));
                assert!((fast - slow).abs() < 1e-10, "{sm}->{sr}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn neutral_stationary_is_uniform() {
        let p = base(25, 8, 2.0, 0.0);
        let res = stationary_distribution(&p).unwrap();
        for &f in &res.frequencies {
            assert_eq!(f, 1.0 / 9.0);
        }
        assert_eq!(res.most_frequent, Strategy(0)); // tie broken downward
        let total: f64 = res.frequencies.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frequencies_always_normalized() {
        for &(d, w) in &[(1.2, 0.01), (2.0, 0.5), (3.8, 1.0)] {
            let res = stationary_distribution(&base(25, 8, d, w)).unwrap();
            let total: f64 = res.frequencies.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(res.frequencies.iter().all(|&f| f >= 0.0));
        }
    }

    #[test]
    fn strong_selection_small_d_favors_defection() {
        let res = stationary_distribution(&base(25, 8, 1.1, 1.0)).unwrap();
        assert_eq!(res.most_frequent, Strategy(0));
        assert!(res.p_defect_round1() > 0.99);
    }

    #[test]
    fn large_d_favors_cooperation() {
        let res = stationary_distribution(&base(25, 8, 4.0, 1.0)).unwrap();
        assert!(res.most_frequent.0 >= 7, "{:?}", res.most_frequent);
    }

    #[test]
    fn heatmap_single_cell_consistent() {
        let grid = HeatmapGrid {
            w_values: alloc::vec![0.1],
            d_values: alloc::vec![2.0],
            n_values: alloc::vec![8],
            population: 25,
            b: 4.0,
            exclude_self: false,
        };
        let cells = heatmap(&grid).unwrap();
        assert_eq!(cells.len(), 1);
        let direct = stationary_distribution(&base(25, 8, 2.0, 0.1)).unwrap();
        assert_eq!(cells[0].frequencies, direct.frequencies);
        assert_eq!(cells[0].most_frequent, direct.most_frequent);
    }

    #[test]
    fn fixation_matrix_diagonal_is_neutral() {
        let res = stationary_distribution(&base(10, 4, 2.0, 0.7)).unwrap();
        for s in 0..=4 {
            assert_eq!(res.fixation[s][s], 0.1);
        }
    }
}
