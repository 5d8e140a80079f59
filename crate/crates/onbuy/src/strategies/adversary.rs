//! Inspection-order adversaries.
//!
//! Adversaries choose the presentation order adaptively from the history of
//! presented items and accept/reject decisions; they never see costs.

use crate::stream::{Adversary, IdentityAdversary, ItemId, ItemUniverse};

/// Presents every edge not touching the path terminals first (in id
/// order), then the edges incident with vertices `0` and `n-1` last.
pub struct EndpointsLastAdversary {
    internal: Vec<ItemId>,
    terminal: Vec<ItemId>,
    built: bool,
}

impl EndpointsLastAdversary {
    pub fn new() -> Self {
        EndpointsLastAdversary { internal: Vec::new(), terminal: Vec::new(), built: false }
    }

    fn build(&mut self, universe: &ItemUniverse) {
        let n = universe.vertices();
        for id in 0..universe.item_count() {
            let (u, v) = universe.edge(id);
            if u == 0 || v == 0 || u == n - 1 || v == n - 1 {
                self.terminal.push(id);
            } else {
                self.internal.push(id);
            }
        }
        // Present by popping, so store reversed.
        self.internal.reverse();
        self.terminal.reverse();
        self.built = true;
    }
}

impl Default for EndpointsLastAdversary {
    fn default() -> Self {
        Self::new()
    }
}

impl Adversary for EndpointsLastAdversary {
    fn name(&self) -> &'static str {
        "endpoints-last"
    }

    fn next_item(&mut self, universe: &ItemUniverse, _presented: u64) -> ItemId {
        if !self.built {
            self.build(universe);
        }
        self.internal.pop().or_else(|| self.terminal.pop()).expect("universe exhausted")
    }

    fn observe(&mut self, _universe: &ItemUniverse, _item: ItemId, _accepted: bool) {}
}

/// Sweeps the vertices: for each vertex `s` in turn, present all
/// unpresented edges at `s`, then all unpresented edges inside the set of
/// accepted neighbors of `s`, then move on.
pub struct VertexSweepAdversary {
    presented: Vec<u64>,
    accepted: Vec<u64>,
    sweep: u32,
    /// Queue for the current stage; refilled on demand.
    queue: Vec<ItemId>,
    stage_b: bool,
    built: bool,
}

impl VertexSweepAdversary {
    pub fn new() -> Self {
        VertexSweepAdversary {
            presented: Vec::new(),
            accepted: Vec::new(),
            sweep: 0,
            queue: Vec::new(),
            stage_b: false,
            built: false,
        }
    }

    fn bit(v: &[u64], id: ItemId) -> bool {
        v[(id / 64) as usize] >> (id % 64) & 1 == 1
    }

    fn set_bit(v: &mut [u64], id: ItemId) {
        v[(id / 64) as usize] |= 1 << (id % 64);
    }

    fn refill(&mut self, universe: &ItemUniverse) {
        let n = universe.vertices();
        loop {
            if !self.stage_b {
                // Stage A for `sweep`: all unpresented edges at the sweep
                // vertex, ascending neighbor order.
                let s = self.sweep;
                let mut items = Vec::new();
                for u in 0..n {
                    if u == s {
                        continue;
                    }
                    let id = universe.edge_id(s.min(u), s.max(u));
                    if !Self::bit(&self.presented, id) {
                        items.push(id);
                    }
                }
                self.stage_b = true;
                if !items.is_empty() {
                    items.reverse();
                    self.queue = items;
                    return;
                }
            } else {
                // Stage B: unpresented pairs inside the accepted
                // neighborhood of the sweep vertex.
                let s = self.sweep;
                let tips: Vec<u32> = (0..n)
                    .filter(|&u| {
                        u != s && Self::bit(&self.accepted, universe.edge_id(s.min(u), s.max(u)))
                    })
                    .collect();
                let mut items = Vec::new();
                for i in 0..tips.len() {
                    for j in (i + 1)..tips.len() {
                        let id = universe.edge_id(tips[i].min(tips[j]), tips[i].max(tips[j]));
                        if !Self::bit(&self.presented, id) {
                            items.push(id);
                        }
                    }
                }
                self.stage_b = false;
                self.sweep += 1;
                if !items.is_empty() {
                    items.sort_unstable();
                    items.reverse();
                    self.queue = items;
                    return;
                }
            }
        }
    }
}

impl Default for VertexSweepAdversary {
    fn default() -> Self {
        Self::new()
    }
}

impl Adversary for VertexSweepAdversary {
    fn name(&self) -> &'static str {
        "vertex-sweep"
    }

    fn next_item(&mut self, universe: &ItemUniverse, _presented: u64) -> ItemId {
        if !self.built {
            let words = (universe.item_count() as usize).div_ceil(64);
            self.presented = vec![0; words];
            self.accepted = vec![0; words];
            self.built = true;
        }
        loop {
            if let Some(id) = self.queue.pop() {
                if Self::bit(&self.presented, id) {
                    continue; // presented meanwhile by an earlier stage
                }
                Self::set_bit(&mut self.presented, id);
                return id;
            }
            self.refill(universe);
        }
    }

    fn observe(&mut self, _universe: &ItemUniverse, item: ItemId, accepted: bool) {
        if accepted {
            Self::set_bit(&mut self.accepted, item);
        }
    }
}

/// The adversary that delays all edges at the path terminals.
pub fn adversary_shortest_path() -> Box<dyn Adversary> {
    Box::new(EndpointsLastAdversary::new())
}

/// The vertex-sweep triangle adversary.
pub fn adversary_triangle() -> Box<dyn Adversary> {
    Box::new(VertexSweepAdversary::new())
}

/// Registry lookup by name (the `aom:<name>` CLI suffix).
pub fn make_adversary(name: &str) -> Option<Box<dyn Adversary>> {
    match name {
        "endpoints-last" => Some(adversary_shortest_path()),
        "vertex-sweep" => Some(adversary_triangle()),
        "identity" => Some(Box::new(IdentityAdversary)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngHandle;
    use crate::stream::{AomSession, ItemUniverse, Session};

    #[test]
    fn endpoints_last_order_audit() {
        // n = 4: the 2(n-2)+1 = 5 edges meeting vertices 0 and 3 come last.
        let u = ItemUniverse::undirected_edges(4).unwrap();
        let mut s = AomSession::new(u, adversary_shortest_path(), RngHandle::new(1, 0));
        let mut order = Vec::new();
        while let Some(ev) = s.next_event().unwrap() {
            order.push(u.edge(ev.item));
            s.record_decision(false);
        }
        assert_eq!(order.len(), 6);
        let touches_terminal = |&(a, b): &(u32, u32)| a == 0 || b == 0 || a == 3 || b == 3;
        assert!(!touches_terminal(&order[0]), "first edge must be internal");
        for e in &order[1..] {
            assert!(touches_terminal(e));
        }
    }

    #[test]
    fn endpoints_last_covers_everything_once() {
        let u = ItemUniverse::undirected_edges(9).unwrap();
        let mut s = AomSession::new(u, adversary_shortest_path(), RngHandle::new(2, 0));
        let mut seen = std::collections::HashSet::new();
        while let Some(ev) = s.next_event().unwrap() {
            assert!(seen.insert(ev.item));
            s.record_decision(false);
        }
        assert_eq!(seen.len() as u64, u.item_count());
    }

    #[test]
    fn vertex_sweep_covers_everything_once() {
        let u = ItemUniverse::undirected_edges(8).unwrap();
        let mut s = AomSession::new(u, adversary_triangle(), RngHandle::new(3, 0));
        let mut seen = std::collections::HashSet::new();
        let mut count = 0u64;
        while let Some(ev) = s.next_event().unwrap() {
            assert!(seen.insert(ev.item));
            count += 1;
            // Accept cheap edges so stage B has material.
            s.record_decision(ev.cost < 0.3);
        }
        assert_eq!(count, u.item_count());
    }

    #[test]
    fn vertex_sweep_presents_accepted_neighborhood_next() {
        let n = 10;
        let u = ItemUniverse::undirected_edges(n).unwrap();
        let mut s = AomSession::new(u, adversary_triangle(), RngHandle::new(4, 0));
        // Accept the first two edges at vertex 0: {0,1} and {0,2}.
        let mut presented = Vec::new();
        for _ in 0..2 {
            let ev = s.next_event().unwrap().unwrap();
            presented.push(u.edge(ev.item));
            s.record_decision(true);
        }
        // Reject the rest of vertex 0's edges.
        for _ in 2..(n - 1) {
            let ev = s.next_event().unwrap().unwrap();
            let (a, _b) = u.edge(ev.item);
            assert_eq!(a, 0);
            s.record_decision(false);
        }
        // Next item must be the within-A pair {1, 2}.
        let ev = s.next_event().unwrap().unwrap();
        assert_eq!(u.edge(ev.item), (1, 2));
        s.record_decision(false);
        // After that, sweep moves to vertex 1.
        let ev = s.next_event().unwrap().unwrap();
        let (a, _) = u.edge(ev.item);
        assert_eq!(a, 1);
    }

    #[test]
    fn purchaser_accepting_nothing_moves_sweep_on() {
        let u = ItemUniverse::undirected_edges(5).unwrap();
        let mut s = AomSession::new(u, adversary_triangle(), RngHandle::new(5, 0));
        // Reject all of vertex 0's edges; next must be at vertex 1.
        for _ in 0..4 {
            s.next_event().unwrap().unwrap();
            s.record_decision(false);
        }
        let ev = s.next_event().unwrap().unwrap();
        assert_eq!(u.edge(ev.item).0, 1);
    }
}
