//! Cliques `K_r` by hub-star recursion.
//!
//! The first half of the stream buys a star `K_{1,l}` at a fixed hub via an
//! l-purchase over the hub's incident arrivals; the second half recursively
//! buys `K_{r-1}` among the star's leaves, whose unpresented pairs behave
//! like a half-density random graph (formula thresholds are doubled per
//! nesting level to compensate).  The base case is the triangle core.

use crate::purchase::{clique_exponent, RhoTable};
use crate::strategies::guard::{TargetStructure, WitnessGuard};
use crate::strategies::wedges::{triangle_wedge_count, TriangleCore};
use crate::strategies::StrategyOutcome;
use crate::stream::Session;
use crate::{invalid, Result};

#[derive(Debug, Clone, Copy)]
pub struct CliqueParams {
    /// Multiplier on the star size `n^{1/(d_{r-1}+2)}`.
    pub leaf_coeff: f64,
    pub threshold_mult: f64,
}

impl Default for CliqueParams {
    fn default() -> Self {
        CliqueParams { leaf_coeff: 1.0, threshold_mult: 1.0 }
    }
}

/// The star size used for `K_r` on `m` vertices.
pub fn star_size(r: usize, m: u64, coeff: f64) -> u64 {
    let d = clique_exponent(r as u32 - 1);
    let l = coeff * (m as f64).powf(1.0 / (d + 2.0));
    (l.round() as u64).clamp(3 * (r as u64 - 1), (m - 1).max(1))
}

enum Inner {
    Ctx(Box<CliqueCtx>),
    Tri(TriangleCore),
}

struct CliqueCtx {
    in_set: Vec<bool>,
    r: usize,
    depth: u32,
    m_total: u64,
    seen: u64,
    red_end: u64,
    hub: u32,
    star_needed: usize,
    star: Vec<u32>,
    hub_unpresented: u64,
    inner: Option<Inner>,
    done: Option<Vec<u32>>,
    failed: bool,
    coeff: f64,
    threshold_mult: f64,
}

impl CliqueCtx {
    fn new(
        verts: &[u32],
        n_global: u32,
        r: usize,
        depth: u32,
        m_total: u64,
        hub_unpresented: u64,
        coeff: f64,
        threshold_mult: f64,
    ) -> Self {
        let mut in_set = vec![false; n_global as usize];
        for &v in verts {
            in_set[v as usize] = true;
        }
        let l = star_size(r, verts.len() as u64, coeff) as usize;
        CliqueCtx {
            in_set,
            r,
            depth,
            m_total,
            seen: 0,
            red_end: m_total.div_ceil(2),
            hub: verts[0],
            star_needed: l,
            star: Vec::new(),
            hub_unpresented,
            inner: None,
            done: None,
            failed: false,
            coeff,
            threshold_mult,
        }
    }

    fn contains(&self, v: u32) -> bool {
        self.in_set[v as usize]
    }

    fn activate_inner(&mut self, guard: &WitnessGuard) {
        if self.star.len() < self.r - 1 {
            self.failed = true;
            return;
        }
        let leaves = self.star.clone();
        let mut m_inner = 0u64;
        for i in 0..leaves.len() {
            for j in (i + 1)..leaves.len() {
                if guard.is_unpresented(leaves[i].min(leaves[j]), leaves[i].max(leaves[j])) {
                    m_inner += 1;
                }
            }
        }
        if self.r - 1 == 3 {
            let lw = triangle_wedge_count(leaves.len() as u64)
                .min((leaves.len() as u64 - 1) / 2)
                .max(1);
            let penalty = self.threshold_mult * 2f64.powi(self.depth as i32 + 1);
            let core =
                TriangleCore::new(leaves.len() as u64, m_inner.max(1), lw, 0, penalty, true, false);
            self.inner = Some(Inner::Tri(core));
            self.star_leaf_mask_only(leaves);
        } else {
            let new_hub = leaves[0];
            let mut hub_up = 0u64;
            for &x in &leaves[1..] {
                if guard.is_unpresented(new_hub.min(x), new_hub.max(x)) {
                    hub_up += 1;
                }
            }
            let ctx = CliqueCtx::new(
                &leaves,
                self.in_set.len() as u32,
                self.r - 1,
                self.depth + 1,
                m_inner.max(1),
                hub_up,
                self.coeff,
                self.threshold_mult,
            );
            self.inner = Some(Inner::Ctx(Box::new(ctx)));
            self.star_leaf_mask_only(leaves);
        }
    }

    /// After activation, only arrivals among the leaves matter.
    fn star_leaf_mask_only(&mut self, leaves: Vec<u32>) {
        for flag in self.in_set.iter_mut() {
            *flag = false;
        }
        for &v in &leaves {
            self.in_set[v as usize] = true;
        }
    }

    fn on_arrival(
        &mut self,
        u: u32,
        v: u32,
        cost: f64,
        rho_star: &RhoTable,
        rho1: &RhoTable,
        guard: &WitnessGuard,
    ) -> bool {
        if self.done.is_some() || self.failed {
            return false;
        }
        match &mut self.inner {
            Some(Inner::Tri(core)) => {
                if !self.in_set[u as usize] || !self.in_set[v as usize] {
                    return false;
                }
                let main =
                    core.on_arrival(u, v, cost, rho1, |a, b| guard.is_unpresented(a, b));
                if let Some([(a, c), (_, w), _]) = core.triangle {
                    self.done = Some(vec![self.hub, a, c, w]);
                }
                main
            }
            Some(Inner::Ctx(ctx)) => {
                if !ctx.contains(u) || !ctx.contains(v) {
                    return false;
                }
                let main = ctx.on_arrival(u, v, cost, rho_star, rho1, guard);
                if let Some(inner_done) = ctx.done.clone() {
                    let mut all = vec![self.hub];
                    all.extend(inner_done);
                    self.done = Some(all);
                } else if ctx.failed {
                    self.failed = true;
                }
                main
            }
            None => {
                if !self.in_set[u as usize] || !self.in_set[v as usize] {
                    return false;
                }
                self.seen += 1;
                let mut main = false;
                if u == self.hub || v == self.hub {
                    let leaf = if u == self.hub { v } else { u };
                    if self.star_needed > 0 && self.seen <= self.red_end {
                        let rem_red = self.red_end - (self.seen - 1);
                        let rem_total = self.m_total.saturating_sub(self.seen - 1).max(1);
                        let m_hat = ((self.hub_unpresented as f64 * rem_red as f64
                            / rem_total as f64)
                            .round() as u64)
                            .max(1);
                        let j = self.star_needed;
                        if m_hat <= j as u64 || cost < rho_star.threshold(j, m_hat as usize) {
                            self.star.push(leaf);
                            self.star_needed -= 1;
                            main = true;
                        }
                    }
                    self.hub_unpresented = self.hub_unpresented.saturating_sub(1);
                }
                if self.inner.is_none() && (self.star_needed == 0 || self.seen >= self.red_end) {
                    self.activate_inner(guard);
                }
                main
            }
        }
    }
}

/// Buy a clique `K_r`, `r >= 3`, under ROM.
///
/// `rho_star` must cover `k` up to the top-level star size and `m` up to
/// `n`; `rho1` covers the 1-purchase closings.
pub fn buy_clique_rom<S: Session + ?Sized>(
    n: u32,
    r: usize,
    session: &mut S,
    params: CliqueParams,
    rho_star: &RhoTable,
    rho1: &RhoTable,
) -> Result<StrategyOutcome> {
    if r < 3 {
        return invalid("clique size must be at least 3");
    }
    if r == 3 {
        return crate::strategies::wedges::buy_triangle_rom(
            n,
            session,
            crate::strategies::wedges::WedgeParams {
                threshold_mult: params.threshold_mult,
                ..Default::default()
            },
            rho1,
        );
    }
    if (n as u64) < 4 * star_size(r, n as u64, params.leaf_coeff) {
        return invalid(format!("n = {n} too small for a K_{r} star recursion"));
    }
    let universe = *session.universe();
    let verts: Vec<u32> = (0..n).collect();
    let mut ctx = CliqueCtx::new(
        &verts,
        n,
        r,
        0,
        universe.item_count(),
        n as u64 - 1,
        params.leaf_coeff,
        params.threshold_mult,
    );
    let mut guard = WitnessGuard::new(TargetStructure::Clique { r }, n);
    let mut outcome = StrategyOutcome::new();
    while let Some(ev) = session.next_event()? {
        let (u, v) = universe.edge(ev.item);
        let main = ctx.on_arrival(u, v, ev.cost, rho_star, rho1, &guard);
        let buy = guard.decide(u, v, main);
        session.record_decision(buy);
        outcome.inspections = ev.position;
        if buy {
            if main {
                outcome.buy(ev.item, ev.cost);
            } else {
                outcome.buy_fallback(ev.item, ev.cost);
            }
        }
        if ctx.done.is_some() {
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
    use crate::rng::RngHandle;
    use crate::stream::{ItemUniverse, RomSession};

    #[test]
    fn star_sizes_follow_exponents() {
        // K_4 star ~ n^{7/18}; K_5 star ~ n^{9/20}.
        let s4 = star_size(4, 4000, 1.0);
        assert!((s4 as f64 - 4000f64.powf(7.0 / 18.0)).abs() <= 1.0, "s4 = {s4}");
        let s5 = star_size(5, 4000, 1.0);
        assert!((s5 as f64 - 4000f64.powf(9.0 / 20.0)).abs() <= 1.0, "s5 = {s5}");
    }

    #[test]
    fn k4_small_instances_always_valid() {
        let n = 400u32;
        let u = ItemUniverse::undirected_edges(n).unwrap();
        let rho_star = compute_rho(40, n as usize).unwrap();
        let rho1 = compute_rho(1, 40_000).unwrap();
        for seed in 0..8u64 {
            let mut s = RomSession::new(u, RngHandle::new(6000 + seed, 0));
            let out =
                buy_clique_rom(n, 4, &mut s, CliqueParams::default(), &rho_star, &rho1).unwrap();
            assert!(out.success);
            let edges: Vec<(u32, u32)> = out.purchased.iter().map(|&(id, _)| u.edge(id)).collect();
            assert!(validate(StructureCheck::Clique { r: 4 }, n, &edges), "seed {seed}");
        }
    }

    #[test]
    fn r3_delegates_to_triangle() {
        let n = 100u32;
        let u = ItemUniverse::undirected_edges(n).unwrap();
        let rho_star = compute_rho(4, n as usize).unwrap();
        let rho1 = compute_rho(1, 5000).unwrap();
        let mut s = RomSession::new(u, RngHandle::new(6100, 0));
        let out = buy_clique_rom(n, 3, &mut s, CliqueParams::default(), &rho_star, &rho1).unwrap();
        let edges: Vec<(u32, u32)> = out.purchased.iter().map(|&(id, _)| u.edge(id)).collect();
        assert!(validate(StructureCheck::Triangle, n, &edges));
    }
}
