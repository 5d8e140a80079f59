//! Item universes and inspection sessions.
//!
//! A universe enumerates the purchasable items (abstract indices, edges of
//! `K_n`, arcs of the complete digraph, or edges of `K_{n,n}`) with a
//! deterministic O(1) id ↔ edge mapping.  A session presents the items one
//! at a time with independent uniform `[0,1]` costs, under one of the three
//! order models.  Sessions are lazy: the order and the costs are sampled at
//! inspection time, so a strategy that stops after `t` inspections does
//! `O(t)` work regardless of the universe size.

use crate::rng::{splitmix64, u64_to_unit_f64, RngHandle};
use crate::{invalid, Error, Result};

pub type ItemId = u64;

/// What the items of a universe stand for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniverseKind {
    /// `N` featureless items.
    Abstract,
    /// Edges `{u,v}`, `u < v`, of the complete graph on `n` vertices.
    UndirectedEdges,
    /// Arcs `(tail, head)`, `tail != head`, of the complete digraph.
    DirectedArcs,
    /// Edges `(u, v)` of `K_{n,n}`; `u` indexes one side, `v` the other.
    BipartiteEdges,
}

/// The set of purchasable items.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ItemUniverse {
    kind: UniverseKind,
    /// Vertex count per side for graph kinds; 0 for abstract universes.
    n: u32,
    item_count: u64,
}

impl ItemUniverse {
    pub fn abstract_items(count: u64) -> Result<Self> {
        if count < 1 {
            return invalid("abstract universe needs at least one item");
        }
        Ok(ItemUniverse { kind: UniverseKind::Abstract, n: 0, item_count: count })
    }

    pub fn undirected_edges(n: u32) -> Result<Self> {
        if n < 2 {
            return invalid("undirected universe needs n >= 2");
        }
        Ok(ItemUniverse {
            kind: UniverseKind::UndirectedEdges,
            n,
            item_count: n as u64 * (n as u64 - 1) / 2,
        })
    }

    pub fn directed_arcs(n: u32) -> Result<Self> {
        if n < 2 {
            return invalid("directed universe needs n >= 2");
        }
        Ok(ItemUniverse { kind: UniverseKind::DirectedArcs, n, item_count: n as u64 * (n as u64 - 1) })
    }

    pub fn bipartite_edges(n: u32) -> Result<Self> {
        if n < 1 {
            return invalid("bipartite universe needs n >= 1");
        }
        Ok(ItemUniverse { kind: UniverseKind::BipartiteEdges, n, item_count: n as u64 * n as u64 })
    }

    pub fn kind(&self) -> UniverseKind {
        self.kind
    }

    /// Vertex count per side (0 for abstract universes).
    pub fn vertices(&self) -> u32 {
        self.n
    }

    pub fn item_count(&self) -> u64 {
        self.item_count
    }

    /// Encode an edge/arc as an item id.
    ///
    /// Undirected edges require `u < v`; arcs require `tail != head`;
    /// bipartite pairs index each side from 0.
    pub fn edge_id(&self, u: u32, v: u32) -> ItemId {
        let n = self.n as u64;
        match self.kind {
            UniverseKind::Abstract => panic!("abstract universes have no edges"),
            UniverseKind::UndirectedEdges => {
                debug_assert!(u < v && (v as u64) < n);
                let (u, v) = (u as u64, v as u64);
                u * n - u * (u + 1) / 2 + (v - u - 1)
            }
            UniverseKind::DirectedArcs => {
                debug_assert!(u != v && (u as u64) < n && (v as u64) < n);
                let head = if v > u { v - 1 } else { v };
                u as u64 * (n - 1) + head as u64
            }
            UniverseKind::BipartiteEdges => {
                debug_assert!((u as u64) < n && (v as u64) < n);
                u as u64 * n + v as u64
            }
        }
    }

    /// Decode an item id back to its edge/arc.  Inverse of [`edge_id`].
    ///
    /// [`edge_id`]: ItemUniverse::edge_id
    pub fn edge(&self, id: ItemId) -> (u32, u32) {
        debug_assert!(id < self.item_count);
        let n = self.n as u64;
        match self.kind {
            UniverseKind::Abstract => panic!("abstract universes have no edges"),
            UniverseKind::UndirectedEdges => {
                // Invert the triangular row offset, then correct for rounding.
                let mut u = ((2.0 * n as f64 - 1.0
                    - ((2.0 * n as f64 - 1.0).powi(2) - 8.0 * id as f64).sqrt())
                    / 2.0) as u64;
                loop {
                    let row_start = u * n - u * (u + 1) / 2;
                    if row_start > id {
                        u -= 1;
                        continue;
                    }
                    let row_end = (u + 1) * n - (u + 1) * (u + 2) / 2;
                    if id >= row_end {
                        u += 1;
                        continue;
                    }
                    let v = id - row_start + u + 1;
                    return (u as u32, v as u32);
                }
            }
            UniverseKind::DirectedArcs => {
                let tail = id / (n - 1);
                let mut head = id % (n - 1);
                if head >= tail {
                    head += 1;
                }
                (tail as u32, head as u32)
            }
            UniverseKind::BipartiteEdges => ((id / n) as u32, (id % n) as u32),
        }
    }
}

/// Create a universe of the given kind; `size` is `n` for graph kinds and
/// the item count for abstract universes.
pub fn make_universe(kind: UniverseKind, size: u64) -> Result<ItemUniverse> {
    match kind {
        UniverseKind::Abstract => ItemUniverse::abstract_items(size),
        UniverseKind::UndirectedEdges => ItemUniverse::undirected_edges(size.try_into().map_err(|_| Error::InvalidArgument("n too large".into()))?),
        UniverseKind::DirectedArcs => ItemUniverse::directed_arcs(size.try_into().map_err(|_| Error::InvalidArgument("n too large".into()))?),
        UniverseKind::BipartiteEdges => ItemUniverse::bipartite_edges(size.try_into().map_err(|_| Error::InvalidArgument("n too large".into()))?),
    }
}

/// One inspected item.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InspectionEvent {
    pub item: ItemId,
    /// Uniform `[0,1]` cost, revealed at inspection.
    pub cost: f64,
    /// 1-based step index within the session.
    pub position: u64,
}

/// Which order model a session runs under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderModel {
    Pom,
    Rom,
    /// Adversarially ordered; carries the registered adversary name.
    Aom(String),
}

impl std::fmt::Display for OrderModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OrderModel::Pom => write!(f, "pom"),
            OrderModel::Rom => write!(f, "rom"),
            OrderModel::Aom(name) => write!(f, "aom:{name}"),
        }
    }
}

/// A push/pull inspection session.
///
/// Protocol: call [`next_event`], decide, then report the decision with
/// [`record_decision`] before asking for the next event.  ROM sessions
/// ignore decisions; AOM sessions feed them to the adversary (which never
/// sees costs).
///
/// [`next_event`]: Session::next_event
/// [`record_decision`]: Session::record_decision
pub trait Session {
    fn universe(&self) -> &ItemUniverse;
    /// `Ok(None)` once every item has been presented.
    fn next_event(&mut self) -> Result<Option<InspectionEvent>>;
    fn record_decision(&mut self, accepted: bool);
    /// Number of items presented so far.
    fn presented(&self) -> u64;

    fn remaining(&self) -> u64 {
        self.universe().item_count() - self.presented()
    }
}

/// Incremental Fisher–Yates over `0..len`: produces a uniformly random
/// permutation one element at a time, storing only displaced positions.
///
/// Memory is proportional to the number of elements drawn, so early-stopping
/// strategies over huge universes stay cheap.  A small open-addressed map
/// keyed by `u64` position avoids hashing overhead in the hot loop.
struct LazyShuffle {
    len: u64,
    next: u64,
    // slot = (key << 32) | value for positions < 2^32; larger universes are
    // rejected at construction (item counts stay far below that in practice).
    table: Vec<u64>,
    mask: u64,
    entries: u64,
}

const EMPTY_SLOT: u64 = u64::MAX;

impl LazyShuffle {
    fn new(len: u64) -> Self {
        assert!(len < u32::MAX as u64, "universe too large for lazy shuffle");
        LazyShuffle { len, next: 0, table: vec![EMPTY_SLOT; 64], mask: 63, entries: 0 }
    }

    #[inline]
    fn lookup(&self, pos: u64) -> Option<u64> {
        let mut i = splitmix64(pos) & self.mask;
        loop {
            let slot = self.table[i as usize];
            if slot == EMPTY_SLOT {
                return None;
            }
            if slot >> 32 == pos {
                return Some(slot & 0xffff_ffff);
            }
            i = (i + 1) & self.mask;
        }
    }

    #[inline]
    fn insert(&mut self, pos: u64, value: u64) {
        if self.entries * 2 >= self.table.len() as u64 {
            self.grow();
        }
        let mut i = splitmix64(pos) & self.mask;
        loop {
            let slot = self.table[i as usize];
            if slot == EMPTY_SLOT {
                self.table[i as usize] = (pos << 32) | value;
                self.entries += 1;
                return;
            }
            if slot >> 32 == pos {
                self.table[i as usize] = (pos << 32) | value;
                return;
            }
            i = (i + 1) & self.mask;
        }
    }

    fn grow(&mut self) {
        let old = std::mem::replace(&mut self.table, vec![EMPTY_SLOT; 0]);
        let new_len = old.len() * 2;
        self.table = vec![EMPTY_SLOT; new_len];
        self.mask = new_len as u64 - 1;
        self.entries = 0;
        for slot in old {
            if slot != EMPTY_SLOT {
                let pos = slot >> 32;
                let mut i = splitmix64(pos) & self.mask;
                while self.table[i as usize] != EMPTY_SLOT {
                    i = (i + 1) & self.mask;
                }
                self.table[i as usize] = slot;
                self.entries += 1;
            }
        }
    }

    /// Draw the next element of the permutation; `die` supplies a uniform
    /// index in `[self.next, self.len)`.
    #[inline]
    fn draw(&mut self, j: u64) -> u64 {
        debug_assert!(self.next <= j && j < self.len);
        let t = self.next;
        let out = self.lookup(j).unwrap_or(j);
        if j != t {
            let displaced = self.lookup(t).unwrap_or(t);
            self.insert(j, displaced);
        }
        self.next = t + 1;
        out
    }
}

/// Randomly ordered session: a uniform permutation of the universe, each
/// item carrying an independent uniform cost.
pub struct RomSession {
    universe: ItemUniverse,
    shuffle: LazyShuffle,
    order_rng: rand_chacha::ChaCha12Rng,
    cost_handle: RngHandle,
    presented: u64,
}

impl RomSession {
    /// `handle` drives both the order and the costs.  Costs are keyed by
    /// item id (lane 1), so two sessions sharing `handle` but differing in
    /// order model see identical per-item costs — the pairing used by the
    /// adversarial-separation experiments.
    pub fn new(universe: ItemUniverse, handle: RngHandle) -> Self {
        RomSession {
            universe,
            shuffle: LazyShuffle::new(universe.item_count()),
            order_rng: handle.derive(0).rng(),
            cost_handle: handle.derive(1),
            presented: 0,
        }
    }
}

impl Session for RomSession {
    fn universe(&self) -> &ItemUniverse {
        &self.universe
    }

    fn next_event(&mut self) -> Result<Option<InspectionEvent>> {
        if self.presented == self.universe.item_count() {
            return Ok(None);
        }
        let lo = self.shuffle.next;
        let j = rand::Rng::random_range(&mut self.order_rng, lo..self.universe.item_count());
        let item = self.shuffle.draw(j);
        self.presented += 1;
        Ok(Some(InspectionEvent {
            item,
            cost: self.cost_handle.item_cost(item),
            position: self.presented,
        }))
    }

    fn record_decision(&mut self, _accepted: bool) {}

    fn presented(&self) -> u64 {
        self.presented
    }
}

/// Purchaser-ordered session: the caller asks for specific items.
pub struct PomSession {
    universe: ItemUniverse,
    cost_handle: RngHandle,
    inspected: Vec<u64>,
    inspected_count: u64,
}

impl PomSession {
    pub fn new(universe: ItemUniverse, handle: RngHandle) -> Self {
        let words = (universe.item_count() as usize).div_ceil(64);
        PomSession {
            universe,
            cost_handle: handle.derive(1),
            inspected: vec![0u64; words],
            inspected_count: 0,
        }
    }

    pub fn universe(&self) -> &ItemUniverse {
        &self.universe
    }

    pub fn inspected(&self, item: ItemId) -> bool {
        self.inspected[(item / 64) as usize] >> (item % 64) & 1 == 1
    }

    pub fn inspected_count(&self) -> u64 {
        self.inspected_count
    }

    /// Reveal the cost of `item`.  Each item may be inspected once.
    pub fn inspect(&mut self, item: ItemId) -> Result<f64> {
        if item >= self.universe.item_count() {
            return invalid(format!("item {item} outside universe"));
        }
        if self.inspected(item) {
            return Err(Error::ProtocolViolation(format!("item {item} already inspected")));
        }
        self.inspected[(item / 64) as usize] |= 1 << (item % 64);
        self.inspected_count += 1;
        Ok(self.cost_handle.item_cost(item))
    }
}

/// Wrap a POM universe as a [`Session`] by self-randomizing the inspection
/// order.  Strategies designed for ROM run unchanged this way: choosing a
/// uniformly random order is always within the purchaser's power.
pub fn pom_self_randomized(universe: ItemUniverse, handle: RngHandle) -> RomSession {
    RomSession::new(universe, handle)
}

/// An adaptive inspection-order adversary.
///
/// Adversaries see which items were presented and how the purchaser decided,
/// never any costs.  They must present every item exactly once.
pub trait Adversary: Send {
    fn name(&self) -> &'static str;
    /// Pick the next item to present, given that `presented` items have
    /// already been shown.
    fn next_item(&mut self, universe: &ItemUniverse, presented: u64) -> ItemId;
    /// Observe the purchaser's decision on the item just presented.
    fn observe(&mut self, universe: &ItemUniverse, item: ItemId, accepted: bool);
}

/// Adversarially ordered session.
pub struct AomSession {
    universe: ItemUniverse,
    adversary: Box<dyn Adversary>,
    cost_handle: RngHandle,
    seen: Vec<u64>,
    presented: u64,
    last_item: Option<ItemId>,
}

impl AomSession {
    pub fn new(universe: ItemUniverse, adversary: Box<dyn Adversary>, handle: RngHandle) -> Self {
        let words = (universe.item_count() as usize).div_ceil(64);
        AomSession {
            universe,
            adversary,
            cost_handle: handle.derive(1),
            seen: vec![0u64; words],
            presented: 0,
            last_item: None,
        }
    }
}

impl Session for AomSession {
    fn universe(&self) -> &ItemUniverse {
        &self.universe
    }

    fn next_event(&mut self) -> Result<Option<InspectionEvent>> {
        if self.presented == self.universe.item_count() {
            return Ok(None);
        }
        let item = self.adversary.next_item(&self.universe, self.presented);
        if item >= self.universe.item_count() {
            return Err(Error::ProtocolViolation(format!(
                "adversary presented item {item} outside the universe"
            )));
        }
        let word = (item / 64) as usize;
        let bit = 1u64 << (item % 64);
        if self.seen[word] & bit != 0 {
            return Err(Error::ProtocolViolation(format!(
                "adversary re-presented item {item}"
            )));
        }
        self.seen[word] |= bit;
        self.presented += 1;
        self.last_item = Some(item);
        Ok(Some(InspectionEvent {
            item,
            cost: self.cost_handle.item_cost(item),
            position: self.presented,
        }))
    }

    fn record_decision(&mut self, accepted: bool) {
        if let Some(item) = self.last_item.take() {
            self.adversary.observe(&self.universe, item, accepted);
        }
    }

    fn presented(&self) -> u64 {
        self.presented
    }
}

/// Fixed-order adversary: presents items in id order.  Makes an AOM session
/// equivalent to a deterministic fixed-order session.
pub struct IdentityAdversary;

impl Adversary for IdentityAdversary {
    fn name(&self) -> &'static str {
        "identity"
    }

    fn next_item(&mut self, _universe: &ItemUniverse, presented: u64) -> ItemId {
        presented
    }

    fn observe(&mut self, _universe: &ItemUniverse, _item: ItemId, _accepted: bool) {}
}

/// Split a uniform cost into the minimum of `m` latent values.
///
/// Returns `(z_1, ..., z_m)` with `z_1 = cost` and, for `j >= 2`, `z_j`
/// drawn from the latent law `Pr(Z >= x) = (1 - x)^{1/m}` conditioned on
/// `Z >= cost`.  The latent law is exactly the one whose m-fold minimum is
/// uniform on `[0,1]`, so the output is distributed as m independent latent
/// values given that their minimum equals `cost` (with the minimum placed
/// at index 1).  The minimum of the output always equals the input.
pub fn decompose_min_of_m(cost: f64, m: u32, rng: &mut impl rand::Rng) -> Vec<f64> {
    assert!((0.0..=1.0).contains(&cost), "cost must lie in [0,1]");
    assert!(m >= 1);
    let mut out = Vec::with_capacity(m as usize);
    out.push(cost);
    for _ in 1..m {
        // Inverse transform of the conditional survival
        // ((1 - x) / (1 - cost))^{1/m}:  x = 1 - (1 - cost) * u^m.
        let u: f64 = rng.random();
        out.push(1.0 - (1.0 - cost) * u.powi(m as i32));
    }
    out
}

/// Conditional CDF of a latent value given `Z >= cost` under the min-of-m
/// law; the probability integral transform used by the distribution tests.
pub fn min_of_m_conditional_cdf(cost: f64, m: u32, z: f64) -> f64 {
    if z <= cost {
        return 0.0;
    }
    1.0 - ((1.0 - z) / (1.0 - cost)).powf(1.0 / m as f64)
}

/// Sample the latent law `Pr(Z >= x) = (1 - x)^{1/d}` directly.
pub fn sample_latent(d: f64, rng: &mut impl rand::Rng) -> f64 {
    let u: f64 = rng.random();
    1.0 - u.powf(d)
}

/// Item-keyed latent value: the `j`-th coordinate of the min-of-m
/// decomposition of `item`'s cost, deterministic per `(handle, item, j)`.
///
/// With `symmetric_slot` unset, coordinate 0 carries the minimum (the
/// observed cost itself), matching [`decompose_min_of_m`]; when set, a
/// deterministic per-item pseudo-random slot carries it instead, so every
/// coordinate class sees the latent law marginally.
pub fn latent_coordinate(
    handle: &RngHandle,
    item: ItemId,
    cost: f64,
    m: u32,
    j: u32,
    symmetric_slot: bool,
) -> f64 {
    debug_assert!(j < m);
    let min_slot = if symmetric_slot {
        (splitmix64(handle.key() ^ splitmix64(item ^ 0x5851_f42d_4c95_7f2d)) % m as u64) as u32
    } else {
        0
    };
    if j == min_slot {
        return cost;
    }
    let bits = splitmix64(
        handle.key() ^ splitmix64(item.wrapping_mul(0x2545_f491_4f6c_dd1d) ^ (j as u64) << 32),
    );
    let u = u64_to_unit_f64(bits);
    1.0 - (1.0 - cost) * u.powi(m as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn universe_counts() {
        assert_eq!(ItemUniverse::undirected_edges(4).unwrap().item_count(), 6);
        assert_eq!(ItemUniverse::directed_arcs(3).unwrap().item_count(), 6);
        assert_eq!(ItemUniverse::bipartite_edges(5).unwrap().item_count(), 25);
        assert!(ItemUniverse::undirected_edges(1).is_err());
        assert!(ItemUniverse::abstract_items(0).is_err());
    }

    #[test]
    fn edge_id_round_trip() {
        for n in [2u32, 3, 5, 17, 100] {
            let u = ItemUniverse::undirected_edges(n).unwrap();
            let mut seen = HashSet::new();
            for a in 0..n {
                for b in (a + 1)..n {
                    let id = u.edge_id(a, b);
                    assert!(id < u.item_count());
                    assert!(seen.insert(id), "duplicate id {id}");
                    assert_eq!(u.edge(id), (a, b));
                }
            }
            assert_eq!(seen.len() as u64, u.item_count());
        }
        for n in [2u32, 3, 10] {
            let u = ItemUniverse::directed_arcs(n).unwrap();
            let mut seen = HashSet::new();
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    let id = u.edge_id(a, b);
                    assert!(seen.insert(id));
                    assert_eq!(u.edge(id), (a, b));
                }
            }
            assert_eq!(seen.len() as u64, u.item_count());
        }
        let u = ItemUniverse::bipartite_edges(7).unwrap();
        for a in 0..7 {
            for b in 0..7 {
                assert_eq!(u.edge(u.edge_id(a, b)), (a, b));
            }
        }
    }

    #[test]
    fn rom_session_is_a_permutation_with_unit_costs() {
        let u = ItemUniverse::abstract_items(3).unwrap();
        let mut s = RomSession::new(u, RngHandle::new(11, 0));
        let mut items = Vec::new();
        while let Some(ev) = s.next_event().unwrap() {
            assert!((0.0..1.0).contains(&ev.cost));
            items.push(ev.item);
            s.record_decision(false);
        }
        items.sort_unstable();
        assert_eq!(items, vec![0, 1, 2]);
    }

    #[test]
    fn rom_session_deterministic() {
        let u = ItemUniverse::undirected_edges(20).unwrap();
        let run = |seed| {
            let mut s = RomSession::new(u, RngHandle::new(seed, 4));
            let mut events = Vec::new();
            while let Some(ev) = s.next_event().unwrap() {
                events.push((ev.item, ev.cost.to_bits(), ev.position));
                s.record_decision(false);
            }
            events
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn rom_first_item_frequency() {
        // With N = 2 the first presented item is item 1 about half the time.
        let u = ItemUniverse::abstract_items(2).unwrap();
        let trials = 100_000;
        let mut ones = 0u32;
        for t in 0..trials {
            let mut s = RomSession::new(u, RngHandle::new(99, t as u64));
            if s.next_event().unwrap().unwrap().item == 1 {
                ones += 1;
            }
        }
        let freq = ones as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn pom_rejects_reinspection() {
        let u = ItemUniverse::abstract_items(10).unwrap();
        let mut s = PomSession::new(u, RngHandle::new(3, 0));
        s.inspect(7).unwrap();
        assert!(matches!(s.inspect(7), Err(Error::ProtocolViolation(_))));
        // All remaining items yield distinct inspections.
        for i in 0..10 {
            if i != 7 {
                s.inspect(i).unwrap();
            }
        }
        assert_eq!(s.inspected_count(), 10);
    }

    #[test]
    fn pom_first_cost_mean() {
        let trials = 100_000;
        let u = ItemUniverse::abstract_items(4).unwrap();
        let mut sum = 0.0;
        for t in 0..trials {
            let mut s = PomSession::new(u, RngHandle::new(17, t as u64));
            sum += s.inspect(0).unwrap();
        }
        let mean = sum / trials as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn aom_identity_matches_fixed_order() {
        let u = ItemUniverse::abstract_items(6).unwrap();
        let mut s = AomSession::new(u, Box::new(IdentityAdversary), RngHandle::new(1, 1));
        let mut pos = 0;
        while let Some(ev) = s.next_event().unwrap() {
            assert_eq!(ev.item, pos);
            pos += 1;
            s.record_decision(false);
        }
        assert_eq!(pos, 6);
    }

    /// A deliberately broken adversary for the protocol test.
    struct RepeatingAdversary;
    impl Adversary for RepeatingAdversary {
        fn name(&self) -> &'static str {
            "repeating"
        }
        fn next_item(&mut self, _u: &ItemUniverse, _presented: u64) -> ItemId {
            5
        }
        fn observe(&mut self, _u: &ItemUniverse, _item: ItemId, _accepted: bool) {}
    }

    #[test]
    fn aom_detects_repeats() {
        let u = ItemUniverse::abstract_items(10).unwrap();
        let mut s = AomSession::new(u, Box::new(RepeatingAdversary), RngHandle::new(1, 1));
        s.next_event().unwrap();
        s.record_decision(false);
        assert!(matches!(s.next_event(), Err(Error::ProtocolViolation(_))));
    }

    #[test]
    fn decompose_endpoints() {
        let mut rng = RngHandle::new(8, 8).rng();
        assert_eq!(decompose_min_of_m(1.0, 3, &mut rng), vec![1.0, 1.0, 1.0]);
        let z = decompose_min_of_m(0.0, 10, &mut rng);
        assert_eq!(z.len(), 10);
        assert_eq!(z.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
    }

    #[test]
    fn decompose_min_equals_input() {
        let mut rng = RngHandle::new(12, 0).rng();
        for _ in 0..1000 {
            let cost: f64 = rand::Rng::random(&mut rng);
            let z = decompose_min_of_m(cost, 10, &mut rng);
            let min = z.iter().cloned().fold(f64::INFINITY, f64::min);
            assert_eq!(min, cost);
            assert!(z.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    /// Kolmogorov–Smirnov statistic of a sample against uniform [0,1].
    fn ks_uniform(mut sample: Vec<f64>) -> f64 {
        sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sample.len() as f64;
        sample
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let lo = (x - i as f64 / n).abs();
                let hi = ((i + 1) as f64 / n - x).abs();
                lo.max(hi)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn decompose_conditional_law_ks() {
        // Probability-integral-transform each latent coordinate through its
        // conditional CDF; the result must be uniform.  The latent values
        // are f64-rounded, which collapses the thin upper tail onto exact
        // 1.0 (the conditional density blows up there), so the transform
        // uses the randomized PIT standard for discretized data: spread
        // each sample uniformly over the CDF mass of its rounding cell.
        // KS threshold at alpha ~ 1e-3 for 1e5 samples.
        let m = 10;
        let samples = 100_000;
        let mut rng = RngHandle::new(21, 7).rng();
        let mut pit = Vec::with_capacity(samples);
        for _ in 0..samples {
            let cost: f64 = rand::Rng::random(&mut rng);
            let z = decompose_min_of_m(cost, m, &mut rng);
            // Coordinate 2 (any j >= 2 is distributed identically).
            let p_hi = min_of_m_conditional_cdf(cost, m, z[2]);
            let p_lo = min_of_m_conditional_cdf(cost, m, z[2].next_down());
            let u: f64 = rand::Rng::random(&mut rng);
            pit.push(p_lo + u * (p_hi - p_lo));
        }
        let d = ks_uniform(pit);
        let crit = 1.949 / (samples as f64).sqrt();
        assert!(d < crit, "KS statistic {d} exceeds {crit}");
    }

    #[test]
    fn latent_coordinate_min_is_cost() {
        let h = RngHandle::new(5, 5);
        for item in 0..2000u64 {
            let cost = h.item_cost(item);
            let min = (0..10)
                .map(|j| latent_coordinate(&h, item, cost, 10, j, true))
                .fold(f64::INFINITY, f64::min);
            assert_eq!(min, cost);
        }
    }

    #[test]
    fn rom_permutation_uniformity_small() {
        // All 3! orders of a 3-item universe appear with equal frequency,
        // within 4 standard deviations.
        let u = ItemUniverse::abstract_items(3).unwrap();
        let trials = 120_000u64;
        let mut counts = [0u64; 6];
        for t in 0..trials {
            let mut s = RomSession::new(u, RngHandle::new(31, t));
            let mut order = [0u64; 3];
            for slot in order.iter_mut() {
                *slot = s.next_event().unwrap().unwrap().item;
                s.record_decision(false);
            }
            let idx = match order {
                [0, 1, 2] => 0,
                [0, 2, 1] => 1,
                [1, 0, 2] => 2,
                [1, 2, 0] => 3,
                [2, 0, 1] => 4,
                [2, 1, 0] => 5,
                _ => unreachable!(),
            };
            counts[idx] += 1;
        }
        let expect = trials as f64 / 6.0;
        let sd = (trials as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - expect).abs() < 4.0 * sd,
                "order {i} count {c} vs {expect} (sd {sd})"
            );
        }
    }

    #[test]
    fn rom_position_cost_independence() {
        // Sample correlation between position and cost across sessions.
        let u = ItemUniverse::abstract_items(16).unwrap();
        let trials = 100_000 / 16;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for t in 0..trials {
            let mut s = RomSession::new(u, RngHandle::new(77, t as u64));
            while let Some(ev) = s.next_event().unwrap() {
                xs.push(ev.position as f64);
                ys.push(ev.cost);
                s.record_decision(false);
            }
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        let mut syy = 0.0;
        for i in 0..xs.len() {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
            syy += (ys[i] - my) * (ys[i] - my);
        }
        let corr = sxy / (sxx * syy).sqrt();
        assert!(corr.abs() < 0.01, "corr {corr}");
    }
}
