//! Cheap paths between the two terminal vertices `0` and `n-1`.
//!
//! ROM variant: the stream thirds X, Y, Z grow a layered ball around each
//! terminal (vertex 0 over X, vertex n-1 over Y) and close with one cheap
//! Z-edge between the balls, chosen by the 1-purchase rule over the exact
//! count of unpresented cross pairs.  Ball sizes scale like `n^{alpha/2}`
//! so the growth and closing costs balance at `n^{-2/3}`-order totals.
//!
//! The order-agnostic variant grows an internal reservoir component and
//! attaches both terminals to it; it runs under any order model and is the
//! strategy evaluated against the endpoints-last adversary.

use crate::graph::DisjointSet;
use crate::purchase::RhoTable;
use crate::strategies::guard::{TargetStructure, WitnessGuard};
use crate::strategies::StrategyOutcome;
use crate::stream::Session;
use crate::{invalid, Result};

#[derive(Debug, Clone, Copy)]
pub struct PathParams {
    /// Pair exponent: each ball targets `ball_coeff * n^{alpha/2}` vertices.
    pub alpha: f64,
    /// Layer count; 0 derives `max(2, ceil(log10 log10 n))`.
    pub layers: usize,
    pub ball_coeff: f64,
    /// Reliability margin folded into layer thresholds.
    pub margin: f64,
    /// Cap on any single layer purchase, as a multiple of the base layer
    /// threshold (bounds the forced tail of each layer class).
    pub cost_cap_mult: f64,
}

impl Default for PathParams {
    fn default() -> Self {
        PathParams { alpha: 2.0 / 3.0, layers: 0, ball_coeff: 0.75, margin: 0.5, cost_cap_mult: 6.0 }
    }
}

impl PathParams {
    fn layer_count(&self, n: u32) -> usize {
        if self.layers > 0 {
            return self.layers;
        }
        let ll = (n as f64).log10().log10().ceil();
        (ll as usize).max(2)
    }

    pub fn ball_size(&self, n: u32) -> usize {
        ((self.ball_coeff * (n as f64).powf(self.alpha / 2.0)).round() as usize).clamp(2, n as usize / 4)
    }
}

struct BallGrower {
    /// tier[v] = Some(t): v sits in layer t (0 = the root).
    tier: Vec<Option<u8>>,
    members: Vec<u32>,
    caps: Vec<usize>,
    filled: Vec<usize>,
    cost_caps: Vec<f64>,
}

impl BallGrower {
    fn new(n: u32, root: u32, caps: Vec<usize>, cost_caps: Vec<f64>) -> Self {
        let mut tier = vec![None; n as usize];
        tier[root as usize] = Some(0);
        let filled = vec![0; caps.len()];
        BallGrower { tier, members: vec![root], caps, filled, cost_caps }
    }

    fn size(&self) -> usize {
        self.members.len()
    }

    fn contains(&self, v: u32) -> bool {
        self.tier[v as usize].is_some()
    }

    /// Try to extend with edge (u inside, w outside).  `m_hat` is the
    /// expected number of frontier arrivals left in this phase, `rho` the
    /// threshold table.
    fn try_extend(
        &mut self,
        u: u32,
        w: u32,
        cost: f64,
        frontier_pairs: u64,
        phase_frac: f64,
        rho: &RhoTable,
    ) -> bool {
        let Some(t) = self.tier[u as usize] else { return false };
        let next = t as usize + 1;
        if next >= self.caps.len() {
            return false;
        }
        let needed = self.caps[next] - self.filled[next];
        if needed == 0 {
            // Cascade: a full layer's vertex may still seed the one after.
            return false;
        }
        if cost > self.cost_caps[next] {
            return false;
        }
        let m_hat = ((frontier_pairs as f64 * phase_frac).round() as u64).max(1);
        let accept = m_hat <= needed as u64 || cost < rho.threshold(needed, m_hat as usize);
        if accept {
            self.tier[w as usize] = Some(next as u8);
            self.members.push(w);
            self.filled[next] += 1;
        }
        accept
    }

    /// Count of (layer-t vertices) x (outside) pairs feeding layer t+1,
    /// summed over currently extendable layers.
    fn frontier_width(&self, n: u32, other_ball: usize) -> u64 {
        let outside = n as u64 - self.size() as u64 - other_ball as u64;
        let mut width = 0u64;
        for (t, &cap) in self.caps.iter().enumerate().skip(1) {
            if self.filled[t] < cap {
                let feeders = self.filled[t - 1].max(if t == 1 { 1 } else { 0 });
                width += feeders as u64 * outside;
            }
        }
        width.max(1)
    }
}

/// Layered ROM path strategy between vertices `0` and `n-1`.
///
/// `rho` must cover `k` up to the ball size and `m` up to `n` squared over
/// four (the closing class can touch `|T| * |T'|` pairs).
pub fn buy_shortest_path_rom<S: Session + ?Sized>(
    n: u32,
    session: &mut S,
    params: PathParams,
    rho: &RhoTable,
) -> Result<StrategyOutcome> {
    let universe = *session.universe();
    if universe.vertices() != n {
        return invalid("session universe does not match n");
    }
    let (s, t) = (0u32, n - 1);
    let mut outcome = StrategyOutcome::new();
    let mut guard = WitnessGuard::new(TargetStructure::Path { s, t }, n);

    if n == 2 {
        // The single edge is forced.
        if let Some(ev) = session.next_event()? {
            session.record_decision(true);
            outcome.buy(ev.item, ev.cost);
            outcome.inspections = ev.position;
        }
        outcome.success = true;
        return Ok(outcome);
    }

    let total = universe.item_count();
    let x_end = total / 3;
    let y_end = 2 * total / 3;
    let k = params.layer_count(n);
    let ball = params.ball_size(n);
    // Doubly geometric caps: exponent (1 - 2^-t) / (1 - 2^-k).
    let denom = 1.0 - 0.5f64.powi(k as i32);
    let mut caps = vec![1usize];
    let mut cost_caps = vec![0.0f64];
    for t in 1..=k {
        let a = (1.0 - 0.5f64.powi(t as i32)) / denom;
        let cap = ((ball as f64).powf(a).round() as usize).max(1);
        caps.push(cap);
        let base = 3.0 * k as f64 * (1.0 + params.margin) * cap as f64
            / (caps[t - 1] as f64 * n as f64);
        cost_caps.push((params.cost_cap_mult * base).min(1.0));
    }
    let mut ball_a = BallGrower::new(n, s, caps.clone(), cost_caps.clone());
    let mut ball_b = BallGrower::new(n, t, caps, cost_caps);

    // Closing-class candidate count; initialized exactly when Z starts.
    let mut closing_m: Option<u64> = None;
    let words = (n as usize).div_ceil(64);

    while let Some(ev) = session.next_event()? {
        let (u, v) = universe.edge(ev.item);
        let pos = ev.position;
        let mut main = false;

        let a_has_u = ball_a.contains(u);
        let a_has_v = ball_a.contains(v);
        let b_has_u = ball_b.contains(u);
        let b_has_v = ball_b.contains(v);

        if (a_has_u && b_has_v) || (a_has_v && b_has_u) {
            // Cross pair: the closing class once Z begins.
            if pos > y_end {
                let m_hat = *closing_m.get_or_insert_with(|| {
                    let mut mask = vec![0u64; words];
                    for &m in &ball_b.members {
                        mask[(m / 64) as usize] |= 1 << (m % 64);
                    }
                    ball_a
                        .members
                        .iter()
                        .map(|&a| guard.unpresented_count_row(a, &mask))
                        .sum::<u64>()
                        .max(1)
                });
                main = m_hat <= 1 || ev.cost < rho.threshold(1, m_hat as usize);
                closing_m = Some(m_hat.saturating_sub(1).max(1));
            }
        } else if pos <= x_end && (a_has_u != a_has_v) && !b_has_u && !b_has_v {
            // X phase: grow the ball at vertex 0.
            let (inside, outside) = if a_has_u { (u, v) } else { (v, u) };
            let frontier = ball_a.frontier_width(n, ball_b.size());
            let frac = (x_end - pos + 1) as f64 / (total - pos + 1) as f64;
            main = ball_a.try_extend(inside, outside, ev.cost, frontier, frac, rho);
        } else if pos > x_end && pos <= y_end && (b_has_u != b_has_v) && !a_has_u && !a_has_v {
            // Y phase: mirror ball at vertex n-1.
            let (inside, outside) = if b_has_u { (u, v) } else { (v, u) };
            let frontier = ball_b.frontier_width(n, ball_a.size());
            let frac = (y_end - pos + 1) as f64 / (total - pos + 1) as f64;
            main = ball_b.try_extend(inside, outside, ev.cost, frontier, frac, rho);
        }

        let buy = guard.decide(u, v, main);
        session.record_decision(buy);
        outcome.inspections = ev.position;
        if buy {
            if main {
                outcome.buy(ev.item, ev.cost);
            } else {
                outcome.buy_fallback(ev.item, ev.cost);
            }
            // Any buy joining the two balls finishes the path.
            if (a_has_u && b_has_v) || (a_has_v && b_has_u) {
                outcome.success = true;
                return Ok(outcome);
            }
        }
    }
    // Exhausted: the guard's witness path is fully purchased.
    outcome.success = true;
    Ok(outcome)
}

#[derive(Debug, Clone, Copy)]
pub struct AnyPathParams {
    /// Reservoir size target, as a multiple of sqrt(n).
    pub reservoir_coeff: f64,
    /// Cost threshold for reservoir edges, as a multiple of 1/n.
    pub reservoir_beta: f64,
}

impl Default for AnyPathParams {
    fn default() -> Self {
        AnyPathParams { reservoir_coeff: 1.0, reservoir_beta: 2.5 }
    }
}

/// Order-agnostic path strategy: grow one internal reservoir component,
/// then attach both terminals by 1-purchases over the exact remaining
/// cross pairs.  Valid under POM, ROM, and any adversary.
pub fn buy_path_any<S: Session + ?Sized>(
    n: u32,
    session: &mut S,
    params: AnyPathParams,
    rho1: &RhoTable,
) -> Result<StrategyOutcome> {
    let universe = *session.universe();
    if universe.vertices() != n {
        return invalid("session universe does not match n");
    }
    let (s, t) = (0u32, n - 1);
    let mut outcome = StrategyOutcome::new();
    let mut guard = WitnessGuard::new(TargetStructure::Path { s, t }, n);
    if n == 2 {
        if let Some(ev) = session.next_event()? {
            session.record_decision(true);
            outcome.buy(ev.item, ev.cost);
            outcome.inspections = ev.position;
        }
        outcome.success = true;
        return Ok(outcome);
    }

    let sigma = ((params.reservoir_coeff * (n as f64).sqrt()).round() as usize).clamp(2, n as usize - 2);
    let thr = params.reservoir_beta / n as f64;
    let mut dsu = DisjointSet::new(n as usize);
    let mut members: Vec<Vec<u32>> = (0..n).map(|v| vec![v]).collect();
    // The reservoir is named by any member vertex; roots move under union.
    let mut reservoir_vertex: Option<u32> = None;
    let words = (n as usize).div_ceil(64);

    // Exact unpresented cross-pair count between two component member sets.
    let cross_m = |guard: &WitnessGuard, a: &[u32], b: &[u32]| -> u64 {
        let mut mask = vec![0u64; words];
        for &x in b {
            mask[(x / 64) as usize] |= 1 << (x % 64);
        }
        a.iter().map(|&x| guard.unpresented_count_row(x, &mask)).sum::<u64>().max(1)
    };

    while let Some(ev) = session.next_event()? {
        let (u, v) = universe.edge(ev.item);
        let (ru, rv) = (dsu.find(u), dsu.find(v));
        let (r_s, r_t) = (dsu.find(s), dsu.find(t));
        let rr = reservoir_vertex.map(|x| dsu.find(x));
        let mut main = false;
        let closing = (ru == r_s && rv == r_t) || (ru == r_t && rv == r_s);
        if closing {
            let m = cross_m(&guard, &members[r_s as usize], &members[r_t as usize]);
            main = m <= 1 || ev.cost < rho1.threshold(1, m as usize);
        } else if rr.is_some_and(|rr| {
            ((ru == rr) != (rv == rr))
                && (ru == r_s || ru == r_t || rv == r_s || rv == r_t)
        }) {
            // Attach a terminal component to the reservoir.
            let rr = rr.unwrap();
            let term = if ru == rr { rv } else { ru };
            let m = cross_m(&guard, &members[term as usize], &members[rr as usize]);
            main = m <= 1 || ev.cost < rho1.threshold(1, m as usize);
        } else if ru != rv && ru != r_s && rv != r_s && ru != r_t && rv != r_t {
            // Internal growth.
            match rr {
                None => {
                    if ev.cost <= thr {
                        main = true;
                        reservoir_vertex = Some(u);
                    }
                }
                Some(rr) => {
                    let touches = ru == rr || rv == rr;
                    let fresh = members[ru as usize].len() == 1 || members[rv as usize].len() == 1;
                    if touches && fresh && members[rr as usize].len() < sigma && ev.cost <= thr {
                        main = true;
                    }
                }
            }
        }
        let buy = guard.decide(u, v, main);
        session.record_decision(buy);
        outcome.inspections = ev.position;
        if buy {
            if main {
                outcome.buy(ev.item, ev.cost);
            } else {
                outcome.buy_fallback(ev.item, ev.cost);
            }
            if ru != rv {
                dsu.union(u, v);
                let root = dsu.find(u);
                let mut merged = std::mem::take(&mut members[ru as usize]);
                merged.append(&mut members[rv as usize]);
                members[root as usize] = merged;
            }
            if dsu.same(s, t) {
                outcome.success = true;
                return Ok(outcome);
            }
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
    use crate::rng::RngHandle;
    use crate::stream::{AomSession, ItemUniverse, RomSession};
    use crate::strategies::adversary::adversary_shortest_path;

    #[test]
    fn n2_single_forced_edge() {
        let u = ItemUniverse::undirected_edges(2).unwrap();
        let rho = compute_rho(2, 4).unwrap();
        let mut s = RomSession::new(u, RngHandle::new(1, 0));
        let out = buy_shortest_path_rom(2, &mut s, PathParams::default(), &rho).unwrap();
        assert!(out.success);
        assert_eq!(out.purchased.len(), 1);
        assert!(out.total_cost() <= 1.0);
    }

    #[test]
    fn rom_path_small_instances_valid() {
        let n = 120u32;
        let u = ItemUniverse::undirected_edges(n).unwrap();
        let ball = PathParams::default().ball_size(n);
        let rho = compute_rho(ball.max(2), (n as usize * n as usize) / 4).unwrap();
        for seed in 0..15u64 {
            let mut s = RomSession::new(u, RngHandle::new(7000 + seed, 0));
            let out = buy_shortest_path_rom(n, &mut s, PathParams::default(), &rho).unwrap();
            assert!(out.success);
            let edges: Vec<(u32, u32)> = out.purchased.iter().map(|&(id, _)| u.edge(id)).collect();
            assert!(
                validate(StructureCheck::Path { s: 0, t: n - 1 }, n, &edges),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn any_path_valid_under_endpoints_last_adversary() {
        let n = 80u32;
        let u = ItemUniverse::undirected_edges(n).unwrap();
        let rho = compute_rho(1, (n as usize) * (n as usize)).unwrap();
        for seed in 0..10u64 {
            let mut s = AomSession::new(u, adversary_shortest_path(), RngHandle::new(7100 + seed, 0));
            let out = buy_path_any(n, &mut s, AnyPathParams::default(), &rho).unwrap();
            assert!(out.success);
            let edges: Vec<(u32, u32)> = out.purchased.iter().map(|&(id, _)| u.edge(id)).collect();
            assert!(
                validate(StructureCheck::Path { s: 0, t: n - 1 }, n, &edges),
                "seed {seed}"
            );
        }
    }
}
