//! N-player Centipede game engine: exact payoff evaluation, backward
//! induction, and seeded session simulation.
//!
//! One anonymous player moves per round. Passing multiplies the commodity by
//! `d`; taking ends the game with the taker collecting a `b`-fold bonus on
//! the current value. Strategy `s` is the last round at which a player still
//! cooperates: `s = 0` always defects, `s = N` always cooperates.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::fx;

/// Payoff rule variants. High-stakes and four-player versions of the
/// experiment are parameterizations (unit x10, N = 4), not separate rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// Everyone who has played before the defection round n collects
    /// d^(n-1); the defector collects b * d^(n-1).
    #[default]
    Standard,
    /// "LR": the player who cooperated in round n-1 keeps d^(n-1), but all
    /// earlier cooperators only collect d^(n-2), so the defector cannot be
    /// punished by (or reciprocate to) the player immediately before them.
    LimitedReciprocity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameParams {
    /// Number of rounds; also the number of seats in the N-player form.
    pub n_rounds: usize,
    /// Appreciation factor per pass (d > 1).
    pub d: f64,
    /// Defector bonus multiplier (b > d).
    pub b: f64,
    /// Base payoff scale; one unit is the value of the commodity before the
    /// first round.
    pub unit: f64,
    pub variant: Variant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameError {
    /// Requires b > d > 1.
    BadAppreciation,
    /// Profile length must equal the round count.
    ProfileLength { expected: usize, got: usize },
    /// Session simulation needs at least N players in the population.
    PopulationTooSmall { need: usize, got: usize },
}

impl fmt::Display for GameError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameError::BadAppreciation => write!(f, "requires b > d > 1"),
            GameError::ProfileLength { expected, got } => {
                write!(f, "profile length {got}, expected {expected}")
            }
            GameError::PopulationTooSmall { need, got } => {
                write!(f, "population of {got} cannot seat {need} players")
            }
        }
    }
}

impl core::error::Error for GameError {}

impl GameParams {
    pub fn new(n_rounds: usize, d: f64, b: f64, unit: f64, variant: Variant) -> Result<Self, GameError> {
        if !(d > 1.0 && b > d) || n_rounds < 2 {
            return Err(GameError::BadAppreciation);
        }
        Ok(GameParams {
            n_rounds,
            d,
            b,
            unit,
            variant,
        })
    }

    /// The experiment's anchor configuration: 8 rounds, passing doubles the
    /// pot, taking quadruples the taker's personal payoff, and the unit is
    /// scaled so the maximum payoff is 1.28 currency units.
    pub fn experiment_default() -> Self {
        GameParams {
            n_rounds: 8,
            d: 2.0,
            b: 4.0,
            unit: 1.28 / 256.0,
            variant: Variant::Standard,
        }
    }

    /// Identical rules with all payouts multiplied by ten ("HS").
    pub fn high_stakes(mut self) -> Self {
        self.unit *= 10.0;
        self
    }

    /// Identical rules with four players and four rounds ("4P").
    pub fn four_player(mut self) -> Self {
        self.n_rounds = 4;
        self
    }

    fn pot(&self, exponent: i32) -> f64 {
        self.unit * fx::powi(self.d, exponent)
    }
}

/// The last round in which a player will cooperate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Strategy(pub usize);

impl Strategy {
    pub fn cooperates_at(&self, round: usize) -> bool {
        self.0 >= round
    }
}

/// Result of playing one game to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Round of the first defection, or N+1 when every seat passed.
    pub end_round: usize,
    /// Per-seat payoffs, index 0 = the round-1 seat.
    pub payoffs: Vec<f64>,
}

/// Plays one game given a full seating profile (`profile[q]` is the strategy
/// of the seat that moves in round q+1).
pub fn play(params: &GameParams, profile: &[Strategy]) -> Result<Outcome, GameError> {
    let n = params.n_rounds;
    if profile.len() != n {
        return Err(GameError::ProfileLength {
            expected: n,
            got: profile.len(),
        });
    }
    let defect_round = (1..=n).find(|&round| !profile[round - 1].cooperates_at(round));
    let mut payoffs = alloc::vec![0.0; n];
    match defect_round {
        Some(round) => {
            let exp = round as i32 - 1;
            for (seat, pay) in payoffs.iter_mut().enumerate().take(round - 1) {
                *pay = match params.variant {
                    Variant::Standard => params.pot(exp),
                    Variant::LimitedReciprocity => {
                        if seat + 1 == round - 1 {
                            params.pot(exp)
                        } else {
                            params.pot(exp - 1)
                        }
                    }
                };
            }
            payoffs[round - 1] = params.b * params.pot(exp);
            Ok(Outcome {
                end_round: round,
                payoffs,
            })
        }
        None => {
            let all = params.pot(n as i32);
            payoffs.iter_mut().for_each(|p| *p = all);
            Ok(Outcome {
                end_round: n + 1,
                payoffs,
            })
        }
    }
}

/// One row of the backward-induction audit table.
#[derive(Debug, Clone, PartialEq)]
pub struct InductionRow {
    pub round: usize,
    /// What the mover collects by taking now.
    pub take_payoff: f64,
    /// What the mover collects by passing, given that every later mover
    /// plays their already-computed best response.
    pub pass_payoff: f64,
}

/// Backward induction over the game tree. With b > d the unique
/// subgame-perfect equilibrium is immediate defection at every seat, so the
/// returned profile is all-zeros; the audit table shows the take-vs-pass
/// comparison that forces each round.
pub fn spne(params: &GameParams) -> (Vec<Strategy>, Vec<InductionRow>) {
    let n = params.n_rounds;
    let mut table = Vec::with_capacity(n);
    // Earliest defection round among movers after `round` under equilibrium
    // play; starts at "game completes" and is updated walking backwards.
    let mut next_defection: Option<usize> = None;
    for round in (1..=n).rev() {
        let take = params.b * params.pot(round as i32 - 1);
        let pass = match next_defection {
            // A later mover defects at round m: a cooperator from round
            // `round` collects the cash-out value of that ending.
            Some(m) => match params.variant {
                Variant::Standard => params.pot(m as i32 - 1),
                Variant::LimitedReciprocity => {
                    if round == m - 1 {
                        params.pot(m as i32 - 1)
                    } else {
                        params.pot(m as i32 - 2)
                    }
                }
            },
            None => params.pot(n as i32),
        };
        if take > pass {
            next_defection = Some(round);
        }
        table.push(InductionRow {
            round,
            take_payoff: take,
            pass_payoff: pass,
        });
    }
    table.reverse();
    let profile = alloc::vec![
        Strategy(0);
        n
    ];
    debug_assert_eq!(next_defection, Some(1), "b > d forces defection everywhere");
    (profile, table)
}

/// Stop-round tallies from a batch of simulated games.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopHistogram {
    /// counts[r-1] = games whose first defection was in round r;
    /// counts[N] = games in which every seat passed.
    pub counts: Vec<u64>,
    pub n_games: u64,
}

impl StopHistogram {
    pub fn frequencies(&self) -> Vec<f64> {
        crate::stats::normalize_counts(&self.counts)
    }
}

/// Simulates `n_games` one-shot games. Each game seats `N` distinct players
/// drawn uniformly from the population in random order, mirroring the
/// random anonymous matching of the experiment. Deterministic per seed.
pub fn simulate_sessions(
    params: &GameParams,
    population: &[Strategy],
    n_games: u64,
    seed: u64,
) -> Result<StopHistogram, GameError> {
    let n = params.n_rounds;
    if population.len() < n {
        return Err(GameError::PopulationTooSmall {
            need: n,
            got: population.len(),
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut counts = alloc::vec![0u64; n + 1];
    let mut indices: Vec<usize> = (0..population.len()).collect();
    for _ in 0..n_games {
        let (seated, _) = indices.partial_shuffle(&mut rng, n);
        let stop = (1..=n)
            .find(|&round| !population[seated[round - 1]].cooperates_at(round))
            .unwrap_or(n + 1);
        counts[stop - 1] += 1;
    }
    Ok(StopHistogram {
        counts,
        n_games,
    })
}

/// Exact stop-round distribution over all ordered seatings of `N` distinct
/// players from the population; the enumeration oracle for
/// [`simulate_sessions`].
pub fn enumerate_stop_distribution(params: &GameParams, population: &[Strategy]) -> Vec<f64> {
    let n = params.n_rounds;
    assert!(population.len() >= n, "population too small to enumerate");
    let mut counts = alloc::vec![0u64; n + 1];
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut used = alloc::vec![false; population.len()];
    enumerate_rec(population, n, &mut chosen, &mut used, &mut counts);
    crate::stats::normalize_counts(&counts)
}

fn enumerate_rec(
    population: &[Strategy],
    n: usize,
    chosen: &mut Vec<usize>,
    used: &mut Vec<bool>,
    counts: &mut [u64],
) {
    if chosen.len() == n {
        let stop = (1..=n)
            .find(|&round| !population[chosen[round - 1]].cooperates_at(round))
            .unwrap_or(n + 1);
        counts[stop - 1] += 1;
        return;
    }
    for i in 0..population.len() {
        if !used[i] {
            used[i] = true;
            chosen.push(i);
            enumerate_rec(population, n, chosen, used, counts);
            chosen.pop();
            used[i] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn params() -> GameParams {
        GameParams::experiment_default()
    }

    #[test]
    fn all_pass_pays_d_to_the_n() {
        let p = params();
        let profile = vec![Strategy(8); 8];
        let o = play(&p, &profile).unwrap();
        assert_eq!(o.end_round, 9);
        for pay in &o.payoffs {
            assert_eq!(*pay, 256.0 * p.unit);
        }
    }

    #[test]
    fn immediate_defection_pays_bonus_only() {
        let p = params();
        let mut profile = vec![Strategy(8); 8];
        profile[0] = Strategy(0);
        let o = play(&p, &profile).unwrap();
        assert_eq!(o.end_round, 1);
        assert_eq!(o.payoffs[0], 4.0 * p.unit);
        assert!(o.payoffs[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn defection_at_round_five() {
        let p = params();
        let mut profile = vec![Strategy(8); 8];
        profile[4] = Strategy(4); // cooperates through round 4, defects at 5
        let o = play(&p, &profile).unwrap();
        assert_eq!(o.end_round, 5);
        for seat in 0..4 {
            assert_eq!(o.payoffs[seat], 16.0 * p.unit);
        }
        assert_eq!(o.payoffs[4], 64.0 * p.unit);
        assert!(o.payoffs[5..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn defector_to_cooperator_ratio_is_b() {
        let p = params();
        for stop in 2..=8usize {
            let mut profile = vec![Strategy(8); 8];
            profile[stop - 1] = Strategy(stop - 1);
            let o = play(&p, &profile).unwrap();
            assert_eq!(o.payoffs[stop - 1] / o.payoffs[0], p.b);
        }
    }

    #[test]
    fn limited_reciprocity_payoffs() {
        let mut p = params();
        p.variant = Variant::LimitedReciprocity;
        let mut profile = vec![Strategy(8); 8];
        profile[4] = Strategy(4);
        let o = play(&p, &profile).unwrap();
        // Seats 1..3 collect d^(n-2), seat 4 keeps d^(n-1), defector b*d^(n-1).
        for seat in 0..3 {
            assert_eq!(o.payoffs[seat], 8.0 * p.unit);
        }
        assert_eq!(o.payoffs[3], 16.0 * p.unit);
        assert_eq!(o.payoffs[4], 64.0 * p.unit);
    }

    #[test]
    fn lr_matches_standard_for_first_round_or_no_defection() {
        let std_p = params();
        let mut lr_p = params();
        lr_p.variant = Variant::LimitedReciprocity;
        for profile in [vec![Strategy(0); 8], vec![Strategy(8); 8]] {
            let a = play(&std_p, &profile).unwrap();
            let b = play(&lr_p, &profile).unwrap();
            assert_eq!(a, b);
        }
        // Defection at round 2 also coincides: there is no "round 0 cohort".
        let mut profile = vec![Strategy(8); 8];
        profile[1] = Strategy(1);
        assert_eq!(
            play(&std_p, &profile).unwrap(),
            play(&lr_p, &profile).unwrap()
        );
    }

    #[test]
    fn spne_is_all_defect() {
        let (profile, table) = spne(&params());
        assert!(profile.iter().all(|s| s.0 == 0));
        assert_eq!(table.len(), 8);
        // Last round: take b*d^(N-1) vs pass d^N; b > d makes take win.
        let last = &table[7];
        assert_eq!(last.take_payoff, 4.0 * 128.0 * params().unit);
        assert_eq!(last.pass_payoff, 256.0 * params().unit);
        assert!(table.iter().all(|r| r.take_payoff > r.pass_payoff));
    }

    #[test]
    fn spne_for_two_rounds() {
        let p = GameParams::new(2, 1.5, 2.0, 1.0, Variant::Standard).unwrap();
        let (profile, _) = spne(&p);
        assert!(profile.iter().all(|s| s.0 == 0));
    }

    #[test]
    fn spne_invariant_to_unit_scale() {
        let a = spne(&params());
        let mut scaled = params();
        scaled.unit *= 1000.0;
        let b = spne(&scaled);
        assert_eq!(a.0, b.0);
    }

    #[test]
    fn simulation_degenerate_populations() {
        let p = params();
        let all_defect = vec![Strategy(0); 20];
        let h = simulate_sessions(&p, &all_defect, 500, 7).unwrap();
        assert_eq!(h.counts[0], 500);

        let all_pass = vec![Strategy(8); 20];
        let h = simulate_sessions(&p, &all_pass, 500, 7).unwrap();
        assert_eq!(h.counts[8], 500);
    }

    #[test]
    fn simulation_matches_enumeration() {
        let p = GameParams::new(3, 2.0, 4.0, 1.0, Variant::Standard).unwrap();
        let population = vec![
            Strategy(0),
            Strategy(1),
            Strategy(2),
            Strategy(3),
            Strategy(3),
        ];
        let exact = enumerate_stop_distribution(&p, &population);
        let sim = simulate_sessions(&p, &population, 100_000, 11).unwrap();
        let freqs = sim.frequencies();
        let tv: f64 = exact
            .iter()
            .zip(freqs.iter())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.01, "total variation {tv}");
    }

    #[test]
    fn simulation_is_deterministic_per_seed() {
        let p = params();
        let pop: Vec<Strategy> = (0..40).map(|i| Strategy(i % 9)).collect();
        let a = simulate_sessions(&p, &pop, 2000, 42).unwrap();
        let b = simulate_sessions(&p, &pop, 2000, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_sessions(&p, &pop, 2000, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn population_too_small_errors() {
        let p = params();
        assert!(matches!(
            simulate_sessions(&p, &[Strategy(0); 3], 10, 1),
            Err(GameError::PopulationTooSmall { .. })
        ));
    }
}
