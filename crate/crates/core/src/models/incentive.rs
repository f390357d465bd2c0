//! Monotonic incentive networks and their Shapley chain.

use nalgebra::DMatrix;

use super::clear_rounding;
use super::shapley::{shapley_exact, Coalition, FnGame, MAX_EXACT_PLAYERS};
use crate::markov::MarkovChain;
use crate::pagerank::PprMatrix;
use crate::{Error, Result};

const MONOTONE_TOL: f64 = 1e-12;
const NORMALIZED_TOL: f64 = 1e-9;

/// Utilities `u_s(T)` for `T ⊆ V ∖ {s}`, stored as full tables.
#[derive(Debug, Clone, PartialEq)]
pub struct IncentiveNetwork {
    n: usize,
    /// `table[s][T]`; entries with bit `s` set are unused.
    table: Vec<Vec<f64>>,
}

impl IncentiveNetwork {
    /// Tabulates `u(s, T)` over every `T` not containing `s` and checks that
    /// each utility is monotone, non-negative and normalized.
    pub fn from_fn(n: usize, u: impl Fn(usize, Coalition) -> f64) -> Result<Self> {
        if n > MAX_EXACT_PLAYERS {
            return Err(Error::TooManyPlayers { n, max: MAX_EXACT_PLAYERS });
        }
        let table = (0..n)
            .map(|s| {
                (0..1u64 << n)
                    .map(|t| if t >> s & 1 == 1 { 0.0 } else { u(s, t) })
                    .collect()
            })
            .collect();
        let net = Self { n, table };
        net.validate()?;
        Ok(net)
    }

    /// `u_s(T) = Σ_{v∈T} PPR[s, v] / (1 − PPR[s, s])`, rescaled so that
    /// `u_s(V ∖ {s}) = 1`.
    pub fn from_ppr(ppr: &PprMatrix) -> Result<Self> {
        let n = ppr.n();
        for s in 0..n {
            if 1.0 - ppr.get(s, s) <= 0.0 {
                return Err(Error::NotNormalized { player: s, value: 0.0 });
            }
        }
        Self::from_fn(n, |s, t| {
            let mass: f64 = (0..n).filter(|&v| t >> v & 1 == 1).map(|v| ppr.get(s, v)).sum();
            mass / (1.0 - ppr.get(s, s))
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `u_s(T ∖ {s})`.
    pub fn utility(&self, s: usize, t: Coalition) -> f64 {
        self.table[s][(t & !(1 << s)) as usize]
    }

    /// `Σ_{s∈S} u_s(S ∖ {s})`.
    pub fn social_utility(&self, set: Coalition) -> f64 {
        (0..self.n).filter(|&s| set >> s & 1 == 1).map(|s| self.utility(s, set)).sum()
    }

    fn validate(&self) -> Result<()> {
        let full: Coalition = (1 << self.n) - 1;
        for s in 0..self.n {
            let bit = 1 << s;
            let empty = self.utility(s, 0);
            if empty < 0.0 {
                return Err(Error::NegativeUtility { player: s, value: empty });
            }
            for t in (0..=full).filter(|t| t & bit == 0) {
                let here = self.utility(s, t);
                for v in (0..self.n).filter(|&v| v != s && t >> v & 1 == 0) {
                    if self.utility(s, t | 1 << v) < here - MONOTONE_TOL {
                        return Err(Error::NotMonotone { player: s });
                    }
                }
            }
            let top = self.utility(s, full & !bit);
            if (top - 1.0).abs() > NORMALIZED_TOL {
                return Err(Error::NotNormalized { player: s, value: top });
            }
        }
        Ok(())
    }
}

/// Row `s` is the Shapley value of `τ_s(T) = [s ∈ T] · u_s(T ∖ {s})`; the
/// centrality is the Shapley value of the social utility.
pub fn incentive_chain(net: &IncentiveNetwork) -> Result<(MarkovChain, Vec<f64>)> {
    let n = net.n();
    let mut m = DMatrix::zeros(n, n);
    for s in 0..n {
        let game = FnGame::new(n, |t| if t >> s & 1 == 1 { net.utility(s, t) } else { 0.0 });
        for (v, x) in shapley_exact(&game)?.into_iter().enumerate() {
            m[(s, v)] = x;
        }
    }
    clear_rounding(&mut m);
    let centrality = shapley_exact(&FnGame::new(n, |t| net.social_utility(t)))?;
    Ok((MarkovChain::new(m)?, centrality))
}
