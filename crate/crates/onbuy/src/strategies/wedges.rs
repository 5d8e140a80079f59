//! Paths of length two and triangles.
//!
//! The stream is split into thirds by position: red edges seed `k` disjoint
//! cheap edges, blue edges extend them into `l` wedges (paths of length two
//! with pairwise distinct endpoint pairs), and green edges close one wedge
//! into a triangle using the 1-purchase threshold rule over the remaining
//! closable pairs.  The same core runs inside the clique recursion on a
//! sub-stream, with thresholds inflated by the random-subgraph penalty.

use crate::purchase::RhoTable;
use crate::strategies::guard::{TargetStructure, WitnessGuard};
use crate::strategies::StrategyOutcome;
use crate::stream::Session;
use crate::{invalid, Result};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy)]
pub struct WedgeParams {
    /// Number of wedges to build; 0 picks the triangle-optimal count.
    pub l_target: u64,
    /// Seed-edge count; 0 derives `(l^2 n / 5)^{1/3}`.
    pub k_target: u64,
    /// Multiplier on both formula thresholds.
    pub threshold_mult: f64,
}

impl Default for WedgeParams {
    fn default() -> Self {
        WedgeParams { l_target: 0, k_target: 0, threshold_mult: 1.0 }
    }
}

/// The optimized wedge count for triangle building: `(3/4)^{3/7} n^{4/7}`.
pub fn triangle_wedge_count(n: u64) -> u64 {
    let l = (0.75f64).powf(3.0 / 7.0) * (n as f64).powf(4.0 / 7.0);
    (l.round() as u64).max(1)
}

pub(crate) fn derive_k(l: u64, n: u64) -> u64 {
    (((l * l) as f64 * n as f64 / 5.0).powf(1.0 / 3.0).ceil() as u64).max(1)
}

/// One wedge: path `a - c - w` (center `c`), closing pair `{a, w}`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Wedge {
    pub a: u32,
    pub c: u32,
    pub w: u32,
}

/// Position-free wedge/triangle machinery, reused at top level (phases by
/// absolute stream position) and inside the clique recursion (phases by
/// sub-arrival count).
pub(crate) struct TriangleCore {
    seen: u64,
    red_end: u64,
    blue_end: u64,
    /// When false, phase boundaries are ignored (order-agnostic variant).
    positional: bool,
    k_target: u64,
    red_thr: f64,
    l_target: u64,
    blue_thr: f64,
    used: HashMap<u32, u32>, // structure vertex -> red partner (self for wedge tips)
    red_count: u64,
    pub wedges: Vec<Wedge>,
    /// Closing pairs still unpresented, keyed by normalized pair.
    open: HashMap<(u32, u32), Wedge>,
    pub triangle: Option<[(u32, u32); 3]>,
    /// Build wedges only (no closing phase).
    wedges_only: bool,
}

impl TriangleCore {
    pub fn new(
        n_sub: u64,
        m_total: u64,
        l_target: u64,
        k_target: u64,
        penalty: f64,
        positional: bool,
        wedges_only: bool,
    ) -> Self {
        let k = if k_target == 0 { derive_k(l_target, n_sub) } else { k_target };
        let nf = n_sub as f64;
        TriangleCore {
            seen: 0,
            red_end: m_total.div_ceil(3),
            blue_end: (2 * m_total).div_ceil(3),
            positional,
            k_target: k,
            red_thr: (penalty * 10.0 * k as f64 / (nf * nf)).min(1.0),
            l_target,
            blue_thr: (penalty * 2.0 * l_target as f64 / (k as f64 * nf)).min(1.0),
            used: HashMap::new(),
            red_count: 0,
            wedges: Vec::new(),
            open: HashMap::new(),
            triangle: None,
            wedges_only,
        }
    }

    pub fn done(&self) -> bool {
        if self.wedges_only {
            self.wedges.len() as u64 >= self.l_target
        } else {
            self.triangle.is_some()
        }
    }

    /// Handle one arrival within the core's vertex set.  Returns the main
    /// accept decision.  `is_unpresented` reports whether a pair has not
    /// yet been presented (used to register closable pairs).
    pub fn on_arrival(
        &mut self,
        u: u32,
        v: u32,
        cost: f64,
        rho1: &RhoTable,
        is_unpresented: impl Fn(u32, u32) -> bool,
    ) -> bool {
        self.seen += 1;
        if self.done() {
            return false;
        }
        let pos = self.seen;
        let pair = (u.min(v), u.max(v));

        // Closing pairs are consumed on arrival whatever the phase; they
        // are only accepted in the green third.
        if let Some(wedge) = self.open.get(&pair).copied() {
            let m_hat = self.open.len() as u64;
            let green = !self.positional || pos > self.blue_end;
            if green && !self.wedges_only {
                let accept =
                    m_hat <= 1 || cost < rho1.threshold(1, m_hat as usize);
                self.open.remove(&pair);
                if accept {
                    self.triangle =
                        Some([(wedge.a, wedge.c), (wedge.c, wedge.w), (wedge.a, wedge.w)]);
                    return true;
                }
                return false;
            }
            self.open.remove(&pair);
            return false;
        }

        let u_used = self.used.contains_key(&u);
        let v_used = self.used.contains_key(&v);

        // Red: disjoint seed edges below the red threshold.
        let red_active = !self.positional || pos <= self.red_end || self.red_count == 0;
        if red_active
            && self.red_count < self.k_target
            && !u_used
            && !v_used
            && cost <= self.red_thr
        {
            self.used.insert(u, v);
            self.used.insert(v, u);
            self.red_count += 1;
            return true;
        }

        // Blue: extend a seed endpoint to a fresh vertex.
        let blue_active = !self.positional
            || (pos > self.red_end && pos <= self.blue_end)
            || (pos > self.blue_end && self.open.is_empty());
        if blue_active && (self.wedges.len() as u64) < self.l_target && cost <= self.blue_thr {
            let (center, fresh) = if u_used && !v_used {
                (u, v)
            } else if v_used && !u_used {
                (v, u)
            } else {
                return false;
            };
            let partner = self.used[&center];
            if partner == center {
                return false; // wedge tip, not a seed endpoint
            }
            let wedge = Wedge { a: partner, c: center, w: fresh };
            self.used.insert(fresh, fresh);
            self.wedges.push(wedge);
            let cp = (wedge.a.min(wedge.w), wedge.a.max(wedge.w));
            if !self.wedges_only && is_unpresented(cp.0, cp.1) {
                self.open.insert(cp, wedge);
            }
            return true;
        }
        false
    }
}

/// Buy `l` vertex-fresh paths of length two under ROM.
pub fn buy_paths_len2_rom<S: Session + ?Sized>(
    n: u32,
    l: u64,
    session: &mut S,
    params: WedgeParams,
    rho1: &RhoTable,
) -> Result<StrategyOutcome> {
    if l == 0 || l as u64 > n as u64 / 10 + 1 {
        return invalid(format!("need 1 <= l <= n/10, got l={l}, n={n}"));
    }
    let universe = *session.universe();
    let mut core = TriangleCore::new(
        n as u64,
        universe.item_count(),
        l,
        params.k_target,
        params.threshold_mult,
        true,
        true,
    );
    let mut guard = WitnessGuard::new(TargetStructure::PathsLenTwo { count: l as usize }, n);
    let mut outcome = StrategyOutcome::new();
    while let Some(ev) = session.next_event()? {
        let (u, v) = universe.edge(ev.item);
        let main = core.on_arrival(u, v, ev.cost, rho1, |a, b| guard.is_unpresented(a, b));
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
        if core.done() {
            break;
        }
    }
    outcome.success = true; // guard completes the wedges if the core stalls
    Ok(outcome)
}

/// Buy a triangle under ROM: wedges, then a green closing edge chosen by
/// the 1-purchase rule over the still-closable pairs.
pub fn buy_triangle_rom<S: Session + ?Sized>(
    n: u32,
    session: &mut S,
    params: WedgeParams,
    rho1: &RhoTable,
) -> Result<StrategyOutcome> {
    if n < 10 {
        return invalid("triangle strategy needs n >= 10");
    }
    let universe = *session.universe();
    let l = if params.l_target == 0 { triangle_wedge_count(n as u64) } else { params.l_target };
    let mut core = TriangleCore::new(
        n as u64,
        universe.item_count(),
        l,
        params.k_target,
        params.threshold_mult,
        true,
        false,
    );
    run_triangle_loop(n, session, &mut core, rho1)
}

/// Order-agnostic triangle strategy (any order model, including AOM): the
/// same seed/extend/close rules without positional phases.
pub fn buy_triangle_any<S: Session + ?Sized>(
    n: u32,
    session: &mut S,
    params: WedgeParams,
    rho1: &RhoTable,
) -> Result<StrategyOutcome> {
    if n < 10 {
        return invalid("triangle strategy needs n >= 10");
    }
    let universe = *session.universe();
    let l = if params.l_target == 0 { triangle_wedge_count(n as u64) } else { params.l_target };
    let mut core = TriangleCore::new(
        n as u64,
        universe.item_count(),
        l,
        params.k_target,
        params.threshold_mult,
        false,
        false,
    );
    run_triangle_loop(n, session, &mut core, rho1)
}

fn run_triangle_loop<S: Session + ?Sized>(
    n: u32,
    session: &mut S,
    core: &mut TriangleCore,
    rho1: &RhoTable,
) -> Result<StrategyOutcome> {
    let universe = *session.universe();
    let mut guard = WitnessGuard::new(TargetStructure::Triangle, n);
    let mut outcome = StrategyOutcome::new();
    while let Some(ev) = session.next_event()? {
        let (u, v) = universe.edge(ev.item);
        let main = core.on_arrival(u, v, ev.cost, rho1, |a, b| guard.is_unpresented(a, b));
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
        if core.done() {
            break;
        }
    }
    outcome.success = true;
    Ok(outcome)
}
