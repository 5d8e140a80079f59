//! Spanning arborescences of the complete digraph under ROM.
//!
//! The red phase (all but the last `eps` fraction of arrivals) runs one
//! 1-purchase per vertex over its out-arcs, so every vertex picks a cheap
//! successor and the picks form a random functional digraph.  Deleting one
//! cycle arc per component leaves rooted trees; the blue phase merges them
//! by buying arcs from a current root into a different tree.  The merge
//! threshold starts at `n^{-3/4}` and rises adaptively if the blue stream
//! is running out faster than merges happen (the stall fallback).

use crate::graph::{decompose_functional, DisjointSet};
use crate::purchase::RhoTable;
use crate::strategies::guard::{TargetStructure, WitnessGuard};
use crate::strategies::StrategyOutcome;
use crate::stream::Session;
use crate::{invalid, Result};

#[derive(Debug, Clone, Copy)]
pub struct ArborescenceParams {
    /// Blue fraction of the stream; 0 derives `1 / ln n`.
    pub eps: f64,
    /// Base blue-phase merge threshold; 0 derives `n^{-3/4}`.
    pub merge_threshold: f64,
    /// Safety factor for the adaptive stall threshold.
    pub stall_margin: f64,
}

impl Default for ArborescenceParams {
    fn default() -> Self {
        ArborescenceParams { eps: 0.0, merge_threshold: 0.0, stall_margin: 3.0 }
    }
}

/// Outcome plus the component count observed after the mapping phase.
#[derive(Debug, Clone)]
pub struct ArborescenceRun {
    pub outcome: StrategyOutcome,
    /// Number of functional-digraph components (= deleted cycle arcs).
    pub components: usize,
}

pub fn buy_arborescence_rom<S: Session + ?Sized>(
    n: u32,
    session: &mut S,
    params: ArborescenceParams,
    rho1: &RhoTable,
) -> Result<ArborescenceRun> {
    let universe = *session.universe();
    if universe.vertices() != n || universe.kind() != crate::stream::UniverseKind::DirectedArcs {
        return invalid("arborescence needs a directed-arc session over n vertices");
    }
    if n < 3 {
        return invalid("arborescence strategy needs n >= 3");
    }
    let total = universe.item_count();
    let eps = if params.eps > 0.0 { params.eps } else { 1.0 / (n as f64).log2() };
    let merge_threshold = if params.merge_threshold > 0.0 {
        params.merge_threshold
    } else {
        (n as f64).powf(-0.75)
    };
    let red_end = ((1.0 - eps) * total as f64).floor() as u64;

    let mut outcome = StrategyOutcome::new();
    let mut guard = WitnessGuard::new(TargetStructure::Arborescence, n);
    // f(v): the successor chosen by v's 1-purchase.
    let mut successor: Vec<Option<u32>> = vec![None; n as usize];
    let mut unpresented_out: Vec<u32> = vec![n - 1; n as usize];
    let mut unmapped = n;

    // Red phase: build the mapping.
    while session.presented() < red_end && unmapped > 0 {
        let Some(ev) = session.next_event()? else { break };
        let (u, v) = universe.edge(ev.item);
        let mut main = false;
        if successor[u as usize].is_none() {
            let rem_red = red_end - (ev.position - 1);
            let rem_total = total - (ev.position - 1);
            let m_hat = ((unpresented_out[u as usize] as f64 * rem_red as f64 / rem_total as f64)
                .round() as u64)
                .max(1);
            if m_hat <= 1 || ev.cost < rho1.threshold(1, m_hat as usize) {
                main = true;
            }
        }
        let buy = guard.decide(u, v, main);
        session.record_decision(buy);
        outcome.inspections = ev.position;
        if buy {
            if main {
                outcome.buy(ev.item, ev.cost);
                successor[u as usize] = Some(v);
                unmapped -= 1;
            } else {
                outcome.buy_fallback(ev.item, ev.cost);
            }
        }
        unpresented_out[u as usize] -= 1;
    }

    // Vertices the estimator left unmapped grab their next out-arc at any
    // cost (rare; the estimator undershoots only at extreme tails).
    // Decompose what we have into cycles with hanging trees.
    let mut fill_pending = unmapped;
    let mut f: Vec<u32> = (0..n).map(|v| successor[v as usize].unwrap_or((v + 1) % n)).collect();

    // Blue phase state is set up lazily once the mapping is complete.
    let mut trees: Option<DisjointSet> = None;
    let mut roots: Vec<bool> = vec![false; n as usize];
    let mut root_count = 0usize;
    let mut components = 0usize;

    let finish_mapping =
        |f: &mut Vec<u32>, successor: &[Option<u32>], components: &mut usize| {
            for v in 0..n as usize {
                if let Some(s) = successor[v] {
                    f[v] = s;
                }
            }
            let d = decompose_functional(f);
            *components = d.component_count();
            let mut dsu = DisjointSet::new(n as usize);
            let mut is_root = vec![false; n as usize];
            for cycle in &d.cycles {
                // Delete the arc out of the first cycle vertex: it roots
                // this component's tree.
                is_root[cycle[0] as usize] = true;
            }
            for v in 0..n as usize {
                if !is_root[v] {
                    dsu.union(v as u32, f[v]);
                }
            }
            (dsu, is_root)
        };

    if fill_pending == 0 {
        let (dsu, is_root) = finish_mapping(&mut f, &successor, &mut components);
        root_count = is_root.iter().filter(|&&b| b).count();
        roots = is_root;
        trees = Some(dsu);
    }

    // Blue phase: merge trees root-by-root.
    while root_count != 1 || fill_pending > 0 {
        let Some(ev) = session.next_event()? else { break };
        let (u, v) = universe.edge(ev.item);
        let mut main = false;
        let mut mapped_now = false;
        if fill_pending > 0 {
            if successor[u as usize].is_none() {
                main = true;
                mapped_now = true;
            }
        } else if let Some(dsu) = trees.as_mut() {
            if ev.position > red_end && roots[u as usize] && !dsu.same(u, v) {
                // Adaptive threshold: spend the remaining blue stream so
                // the expected number of accepted merges stays a safe
                // multiple of what is still needed.
                let remaining = (total - ev.position + 1) as f64;
                let stall = params.stall_margin * n as f64 / remaining.max(1.0);
                let tau = merge_threshold.max(stall).min(1.0);
                if ev.cost <= tau {
                    main = true;
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
            if mapped_now {
                successor[u as usize] = Some(v);
                fill_pending -= 1;
                if fill_pending == 0 {
                    let (dsu, is_root) = finish_mapping(&mut f, &successor, &mut components);
                    root_count = is_root.iter().filter(|&&b| b).count();
                    roots = is_root;
                    trees = Some(dsu);
                }
            } else if main {
                if let Some(dsu) = trees.as_mut() {
                    dsu.union(u, v);
                    roots[u as usize] = false;
                    root_count -= 1;
                }
            } else if let Some(dsu) = trees.as_mut() {
                // Guard-forced arc: keep the forest bookkeeping coherent
                // if it happens to be a root merge.
                if roots[u as usize] && !dsu.same(u, v) {
                    dsu.union(u, v);
                    roots[u as usize] = false;
                    root_count -= 1;
                }
            }
        }
    }

    outcome.success = true;
    Ok(ArborescenceRun { outcome, components })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{validate, StructureCheck};
    use crate::purchase::compute_rho;
    use crate::rng::RngHandle;
    use crate::stream::{ItemUniverse, RomSession};

    #[test]
    fn small_instances_always_valid() {
        let n = 40u32;
        let u = ItemUniverse::directed_arcs(n).unwrap();
        let rho1 = compute_rho(1, n as usize).unwrap();
        for seed in 0..15u64 {
            let mut s = RomSession::new(u, RngHandle::new(8000 + seed, 0));
            let run =
                buy_arborescence_rom(n, &mut s, ArborescenceParams::default(), &rho1).unwrap();
            assert!(run.outcome.success);
            let edges: Vec<(u32, u32)> =
                run.outcome.purchased.iter().map(|&(id, _)| u.edge(id)).collect();
            assert!(
                validate(StructureCheck::Arborescence, n, &edges),
                "seed {seed}"
            );
            assert!(run.components >= 1);
        }
    }

    #[test]
    fn rejects_undirected_universe() {
        let u = ItemUniverse::undirected_edges(10).unwrap();
        let rho1 = compute_rho(1, 10).unwrap();
        let mut s = RomSession::new(u, RngHandle::new(1, 0));
        assert!(buy_arborescence_rom(10, &mut s, ArborescenceParams::default(), &rho1).is_err());
    }
}
