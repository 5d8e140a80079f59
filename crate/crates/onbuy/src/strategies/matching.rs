//! Perfect matchings in `K_{n,n}` and `K_n` via 3-out subgraphs.
//!
//! Each inspected edge is coin-colored red or blue.  Every left vertex runs
//! a 3-purchase over its red incident subsequence, every right vertex over
//! its blue one; the union is close in distribution to a 3-out bipartite
//! graph, which has a perfect matching with overwhelming probability.  The
//! matching is extracted offline; the must-take guard makes success
//! unconditional.  Works under any order model: the coloring comes from
//! the strategy's own item-keyed coins, which an adversary cannot see.

use crate::graph::max_bipartite_matching;
use crate::purchase::RhoTable;
use crate::rng::{splitmix64, RngHandle};
use crate::strategies::guard::{TargetStructure, WitnessGuard};
use crate::strategies::StrategyOutcome;
use crate::stream::{ItemId, Session};
use crate::{invalid, Result};

struct BipartiteEngine<'a> {
    m: u32,
    needed_left: Vec<u8>,
    needed_right: Vec<u8>,
    unpresented_left: Vec<u32>,
    unpresented_right: Vec<u32>,
    open_classes: u32,
    guard: WitnessGuard,
    rho: &'a RhoTable,
    coin_key: u64,
    matched_early: bool,
}

impl<'a> BipartiteEngine<'a> {
    fn new(m: u32, rho: &'a RhoTable, handle: RngHandle) -> Self {
        BipartiteEngine {
            m,
            needed_left: vec![3; m as usize],
            needed_right: vec![3; m as usize],
            unpresented_left: vec![m; m as usize],
            unpresented_right: vec![m; m as usize],
            open_classes: 2 * m,
            guard: WitnessGuard::new(TargetStructure::BipartitePerfectMatching, m),
            rho,
            coin_key: handle.derive(7).key(),
            matched_early: false,
        }
    }

    fn coin_red(&self, item: ItemId) -> bool {
        splitmix64(self.coin_key ^ item) & 1 == 0
    }

    /// Threshold decision for one side's j-purchase: `unpresented` counts
    /// remaining arrivals at the vertex including the current one; about
    /// half carry this side's color.
    fn side_accepts(&self, needed: u8, unpresented: u32, is_my_color: bool, cost: f64) -> bool {
        if needed == 0 {
            return false;
        }
        // Last chances regardless of color: take anything still possible.
        if unpresented <= needed as u32 {
            return true;
        }
        if !is_my_color {
            return false;
        }
        let m_hat = (1 + (unpresented - 1) / 2).max(needed as u32) as usize;
        if m_hat <= needed as usize {
            return true;
        }
        cost < self.rho.threshold(needed as usize, m_hat)
    }

    /// Process one bipartite arrival; returns the final buy decision.
    fn on_arrival(&mut self, item: ItemId, u: u32, v: u32, cost: f64, out: &mut StrategyOutcome) -> bool {
        let red = self.coin_red(item);
        let nl = self.needed_left[u as usize];
        let nr = self.needed_right[v as usize];
        let accept_l = self.side_accepts(nl, self.unpresented_left[u as usize], red, cost);
        let accept_r = self.side_accepts(nr, self.unpresented_right[v as usize], !red, cost);
        let main = accept_l || accept_r;
        let buy = self.guard.decide(u, v, main);
        if buy {
            if main {
                out.buy(item, cost);
            } else {
                out.buy_fallback(item, cost);
            }
            if accept_l {
                self.needed_left[u as usize] -= 1;
                if self.needed_left[u as usize] == 0 {
                    self.open_classes -= 1;
                }
            }
            if accept_r {
                self.needed_right[v as usize] -= 1;
                if self.needed_right[v as usize] == 0 {
                    self.open_classes -= 1;
                }
            }
        }
        self.unpresented_left[u as usize] -= 1;
        self.unpresented_right[v as usize] -= 1;
        // A class with nothing left to see is closed even if unfilled.
        if self.unpresented_left[u as usize] == 0 && self.needed_left[u as usize] > 0 {
            self.needed_left[u as usize] = 0;
            self.open_classes -= 1;
        }
        if self.unpresented_right[v as usize] == 0 && self.needed_right[v as usize] > 0 {
            self.needed_right[v as usize] = 0;
            self.open_classes -= 1;
        }
        buy
    }

    /// Once every class is settled, check whether the purchased graph
    /// already holds a perfect matching; if so the session can stop.
    fn try_finish(&mut self) -> bool {
        if self.open_classes > 0 || self.matched_early {
            return false;
        }
        self.matched_early = true; // only attempt once
        let adj: Vec<Vec<u32>> = (0..self.m)
            .map(|u| self.guard.purchased_adj().neighbors(u).collect())
            .collect();
        let mt = max_bipartite_matching(&adj, self.m as usize);
        mt.iter().all(|x| x.is_some())
    }
}

/// Perfect matching on `K_{n,n}`.  `rho` must cover `k = 3` up to `n`.
pub fn buy_bipartite_pm<S: Session + ?Sized>(
    n: u32,
    session: &mut S,
    rho: &RhoTable,
    handle: RngHandle,
) -> Result<StrategyOutcome> {
    let universe = *session.universe();
    if universe.vertices() != n {
        return invalid("session universe does not match n");
    }
    let mut outcome = StrategyOutcome::new();
    let mut engine = BipartiteEngine::new(n, rho, handle);
    while let Some(ev) = session.next_event()? {
        let (u, v) = universe.edge(ev.item);
        let buy = engine.on_arrival(ev.item, u, v, ev.cost, &mut outcome);
        session.record_decision(buy);
        outcome.inspections = ev.position;
        if engine.try_finish() {
            break;
        }
    }
    outcome.success = true; // guard guarantees a perfect matching
    Ok(outcome)
}

/// Perfect matching on `K_n` (n even): ignore non-crossing edges and run
/// the bipartite procedure across the split `[0, n/2) | [n/2, n)`.
pub fn buy_pm_complete<S: Session + ?Sized>(
    n: u32,
    session: &mut S,
    rho: &RhoTable,
    handle: RngHandle,
) -> Result<StrategyOutcome> {
    if n % 2 != 0 {
        return invalid("perfect matching on K_n needs even n");
    }
    let universe = *session.universe();
    if universe.vertices() != n {
        return invalid("session universe does not match n");
    }
    let m = n / 2;
    let mut outcome = StrategyOutcome::new();
    let mut engine = BipartiteEngine::new(m, rho, handle);
    while let Some(ev) = session.next_event()? {
        let (a, b) = universe.edge(ev.item);
        let crossing = (a < m) != (b < m);
        if !crossing {
            session.record_decision(false);
            outcome.inspections = ev.position;
            continue;
        }
        let (u, v) = if a < m { (a, b - m) } else { (b, a - m) };
        let buy = engine.on_arrival(ev.item, u, v, ev.cost, &mut outcome);
        session.record_decision(buy);
        outcome.inspections = ev.position;
        if engine.try_finish() {
            break;
        }
    }
    outcome.success = true;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{validate, StructureCheck};
    use crate::purchase::compute_rho;
    use crate::stream::{AomSession, ItemUniverse, RomSession};

    #[test]
    fn bipartite_pm_always_perfect_small() {
        let n = 24u32;
        let u = ItemUniverse::bipartite_edges(n).unwrap();
        let rho = compute_rho(3, n as usize).unwrap();
        for seed in 0..25u64 {
            let mut s = RomSession::new(u, RngHandle::new(900 + seed, 0));
            let out = buy_bipartite_pm(n, &mut s, &rho, RngHandle::new(900 + seed, 1)).unwrap();
            assert!(out.success);
            let edges: Vec<(u32, u32)> = out.purchased.iter().map(|&(id, _)| u.edge(id)).collect();
            assert!(validate(StructureCheck::BipartitePerfectMatching, n, &edges), "seed {seed}");
        }
    }

    #[test]
    fn bipartite_pm_valid_under_identity_adversary() {
        let n = 16u32;
        let u = ItemUniverse::bipartite_edges(n).unwrap();
        let rho = compute_rho(3, n as usize).unwrap();
        let mut s = AomSession::new(
            u,
            Box::new(crate::stream::IdentityAdversary),
            RngHandle::new(42, 0),
        );
        let out = buy_bipartite_pm(n, &mut s, &rho, RngHandle::new(42, 1)).unwrap();
        let edges: Vec<(u32, u32)> = out.purchased.iter().map(|&(id, _)| u.edge(id)).collect();
        assert!(validate(StructureCheck::BipartitePerfectMatching, n, &edges));
    }

    #[test]
    fn pm_complete_never_buys_non_crossing() {
        let n = 20u32;
        let u = ItemUniverse::undirected_edges(n).unwrap();
        let rho = compute_rho(3, n as usize).unwrap();
        for seed in 0..10u64 {
            let mut s = RomSession::new(u, RngHandle::new(333 + seed, 0));
            let out = buy_pm_complete(n, &mut s, &rho, RngHandle::new(333 + seed, 1)).unwrap();
            let m = n / 2;
            for &(id, _) in &out.purchased {
                let (a, b) = u.edge(id);
                assert!((a < m) != (b < m), "non-crossing edge ({a},{b}) purchased");
            }
            let edges: Vec<(u32, u32)> = out.purchased.iter().map(|&(id, _)| u.edge(id)).collect();
            assert!(validate(StructureCheck::PerfectMatching, n, &edges));
        }
    }

    #[test]
    fn pm_complete_rejects_odd_n() {
        let u = ItemUniverse::undirected_edges(7).unwrap();
        let rho = compute_rho(3, 7).unwrap();
        let mut s = RomSession::new(u, RngHandle::new(1, 0));
        assert!(buy_pm_complete(7, &mut s, &rho, RngHandle::new(1, 1)).is_err());
    }

    #[test]
    fn pm_small_n4_two_disjoint_crossing_edges() {
        let n = 4u32;
        let u = ItemUniverse::undirected_edges(n).unwrap();
        let rho = compute_rho(3, n as usize).unwrap();
        let mut s = RomSession::new(u, RngHandle::new(77, 0));
        let out = buy_pm_complete(n, &mut s, &rho, RngHandle::new(77, 1)).unwrap();
        let edges: Vec<(u32, u32)> = out.purchased.iter().map(|&(id, _)| u.edge(id)).collect();
        assert!(validate(StructureCheck::PerfectMatching, n, &edges));
    }
}
