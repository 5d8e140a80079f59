//! Incremental graph bookkeeping and offline combinatorial subroutines.

use crate::util::KahanSum;

// ---------------------------------------------------------------------------
// Disjoint sets
// ---------------------------------------------------------------------------

/// Union-find with union by size and path halving.  Strategies only ever
/// add edges, so no deletions are supported.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<u32>,
    size: Vec<u32>,
    components: usize,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    /// Merge the sets containing `a` and `b`; false if already joined.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        self.components -= 1;
        true
    }

    pub fn same(&mut self, a: u32, b: u32) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn component_size(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.size[r as usize]
    }

    pub fn components(&self) -> usize {
        self.components
    }
}

// ---------------------------------------------------------------------------
// Purchased graph
// ---------------------------------------------------------------------------

/// The growing (di)graph of accepted edges with component tracking and a
/// compensated running cost.
#[derive(Debug, Clone)]
pub struct PurchasedGraph {
    n: u32,
    directed: bool,
    edges: Vec<(u32, u32, f64)>,
    dsu: DisjointSet,
    total: KahanSum,
}

impl PurchasedGraph {
    pub fn new(n: u32, directed: bool) -> Self {
        PurchasedGraph {
            n,
            directed,
            edges: Vec::new(),
            dsu: DisjointSet::new(n as usize),
            total: KahanSum::new(),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn add_edge(&mut self, u: u32, v: u32, cost: f64) {
        debug_assert!(u != v && u < self.n && v < self.n);
        self.edges.push((u, v, cost));
        self.dsu.union(u, v);
        self.total.add(cost);
    }

    /// True iff `u` and `v` are connected by purchased edges (ignoring
    /// orientation).
    pub fn same_component(&mut self, u: u32, v: u32) -> bool {
        self.dsu.same(u, v)
    }

    pub fn components(&self) -> usize {
        self.dsu.components()
    }

    pub fn component_size(&mut self, v: u32) -> u32 {
        self.dsu.component_size(v)
    }

    pub fn edges(&self) -> &[(u32, u32, f64)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_cost(&self) -> f64 {
        self.total.value()
    }

    /// Adjacency lists (undirected view adds both directions).
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n as usize];
        for &(u, v, _) in &self.edges {
            adj[u as usize].push(v);
            if !self.directed {
                adj[v as usize].push(u);
            }
        }
        adj
    }
}

// ---------------------------------------------------------------------------
// Bit-matrix adjacency
// ---------------------------------------------------------------------------

/// Dense bitset adjacency over `n` vertices; one row of `ceil(n/64)` words
/// per vertex.  Used by the must-take guard to represent the "available"
/// graph (purchased plus uninspected) with O(1) edge updates and fast row
/// scans.
#[derive(Debug, Clone)]
pub struct BitAdj {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl BitAdj {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitAdj { n, words, rows: vec![0; n * words] }
    }

    /// Complete graph (no loops).
    pub fn complete(n: usize) -> Self {
        let mut a = BitAdj::empty(n);
        for u in 0..n {
            let row = &mut a.rows[u * a.words..(u + 1) * a.words];
            for (w, slot) in row.iter_mut().enumerate() {
                let lo = w * 64;
                let bits = if lo + 64 <= n { u64::MAX } else if lo >= n { 0 } else { (1u64 << (n - lo)) - 1 };
                *slot = bits;
            }
            a.clear(u as u32, u as u32);
        }
        a
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn set(&mut self, u: u32, v: u32) {
        self.rows[u as usize * self.words + (v / 64) as usize] |= 1 << (v % 64);
    }

    #[inline]
    pub fn clear(&mut self, u: u32, v: u32) {
        self.rows[u as usize * self.words + (v / 64) as usize] &= !(1 << (v % 64));
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32) -> bool {
        self.rows[u as usize * self.words + (v / 64) as usize] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn row(&self, u: u32) -> &[u64] {
        &self.rows[u as usize * self.words..(u as usize + 1) * self.words]
    }

    pub fn degree(&self, u: u32) -> u32 {
        self.row(u).iter().map(|w| w.count_ones()).sum()
    }

    /// First vertex in `row(u) & mask`, if any.
    pub fn first_common(&self, u: u32, mask: &[u64]) -> Option<u32> {
        for (i, (&a, &b)) in self.row(u).iter().zip(mask).enumerate() {
            let and = a & b;
            if and != 0 {
                return Some((i * 64 + and.trailing_zeros() as usize) as u32);
            }
        }
        None
    }

    /// Iterate set bits of a row.
    pub fn neighbors(&self, u: u32) -> impl Iterator<Item = u32> + '_ {
        self.row(u).iter().enumerate().flat_map(|(i, &w)| {
            let base = (i * 64) as u32;
            BitIter { word: w, base }
        })
    }
}

struct BitIter {
    word: u64,
    base: u32,
}

impl Iterator for BitIter {
    type Item = u32;
    fn next(&mut self) -> Option<u32> {
        if self.word == 0 {
            return None;
        }
        let tz = self.word.trailing_zeros();
        self.word &= self.word - 1;
        Some(self.base + tz)
    }
}

// ---------------------------------------------------------------------------
// Bipartite matching
// ---------------------------------------------------------------------------

/// Maximum bipartite matching by breadth-layered augmentation
/// (Hopcroft–Karp).  `adj[u]` lists the right-side neighbors of left vertex
/// `u`.  Returns `match_left[u] = Some(v)`.
pub fn max_bipartite_matching(adj: &[Vec<u32>], n_right: usize) -> Vec<Option<u32>> {
    let n_left = adj.len();
    const NIL: u32 = u32::MAX;
    let mut match_l = vec![NIL; n_left];
    let mut match_r = vec![NIL; n_right];
    let mut dist = vec![u32::MAX; n_left];
    let mut queue = std::collections::VecDeque::new();

    loop {
        // BFS phase: layer free left vertices.
        queue.clear();
        for u in 0..n_left {
            if match_l[u] == NIL {
                dist[u] = 0;
                queue.push_back(u as u32);
            } else {
                dist[u] = u32::MAX;
            }
        }
        let mut found_free = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u as usize] {
                let w = match_r[v as usize];
                if w == NIL {
                    found_free = true;
                } else if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found_free {
            break;
        }
        // DFS phase: vertex-disjoint augmenting paths along layers.
        fn augment(
            u: u32,
            adj: &[Vec<u32>],
            match_l: &mut [u32],
            match_r: &mut [u32],
            dist: &mut [u32],
        ) -> bool {
            for &v in &adj[u as usize] {
                let w = match_r[v as usize];
                if w == NIL
                    || (dist[w as usize] == dist[u as usize] + 1
                        && augment(w, adj, match_l, match_r, dist))
                {
                    match_l[u as usize] = v;
                    match_r[v as usize] = u;
                    return true;
                }
            }
            dist[u as usize] = u32::MAX;
            false
        }
        for u in 0..n_left {
            if match_l[u] == NIL {
                augment(u as u32, adj, &mut match_l, &mut match_r, &mut dist);
            }
        }
    }
    match_l.iter().map(|&v| (v != NIL).then_some(v)).collect()
}

/// Independent maximality check: a second, unrelated search (single-path
/// Kuhn augmentation) must find no augmenting path from any free vertex.
pub fn verify_matching_maximum(adj: &[Vec<u32>], n_right: usize, match_left: &[Option<u32>]) -> bool {
    let n_left = adj.len();
    let mut match_r = vec![None; n_right];
    for (u, &mv) in match_left.iter().enumerate() {
        if let Some(v) = mv {
            if !adj[u].contains(&v) || match_r[v as usize].is_some() {
                return false; // not a matching on the given graph
            }
            match_r[v as usize] = Some(u as u32);
        }
    }
    fn try_augment(
        u: usize,
        adj: &[Vec<u32>],
        match_r: &mut [Option<u32>],
        seen: &mut [bool],
    ) -> bool {
        for &v in &adj[u] {
            if seen[v as usize] {
                continue;
            }
            seen[v as usize] = true;
            if match_r[v as usize].is_none()
                || try_augment(match_r[v as usize].unwrap() as usize, adj, match_r, seen)
            {
                match_r[v as usize] = Some(u as u32);
                return true;
            }
        }
        false
    }
    for u in 0..n_left {
        if match_left[u].is_none() {
            let mut seen = vec![false; n_right];
            let mut mr = match_r.clone();
            if try_augment(u, adj, &mut mr, &mut seen) {
                return false; // augmenting path exists: not maximum
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// General maximum matching (blossom)
// ---------------------------------------------------------------------------

/// Maximum matching in a general graph (blossom contraction).  Quadratic
/// per augmentation; fine at validation sizes.
pub fn max_general_matching(n: usize, edges: &[(u32, u32)]) -> Vec<Option<u32>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u != v {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
    }
    const NIL: u32 = u32::MAX;
    let mut mate = vec![NIL; n];
    let mut parent = vec![NIL; n];
    let mut base: Vec<u32> = (0..n as u32).collect();
    let mut queue = Vec::new();
    let mut in_queue = vec![false; n];
    let mut in_blossom = vec![false; n];

    fn lca(u: u32, v: u32, base: &[u32], parent: &[u32], mate: &[u32], n: usize) -> u32 {
        let mut used = vec![false; n];
        let mut a = u;
        loop {
            a = base[a as usize];
            used[a as usize] = true;
            if mate[a as usize] == u32::MAX {
                break;
            }
            a = parent[mate[a as usize] as usize];
        }
        let mut b = v;
        loop {
            b = base[b as usize];
            if used[b as usize] {
                return b;
            }
            b = parent[mate[b as usize] as usize];
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn mark_path(
        mut v: u32,
        b: u32,
        mut child: u32,
        base: &[u32],
        parent: &mut [u32],
        mate: &[u32],
        in_blossom: &mut [bool],
    ) {
        while base[v as usize] != b {
            in_blossom[base[v as usize] as usize] = true;
            in_blossom[base[mate[v as usize] as usize] as usize] = true;
            parent[v as usize] = child;
            child = mate[v as usize];
            v = parent[mate[v as usize] as usize];
        }
    }

    for start in 0..n as u32 {
        if mate[start as usize] != NIL {
            continue;
        }
        // BFS forest from `start` looking for an augmenting path.
        for x in parent.iter_mut() {
            *x = NIL;
        }
        for (i, b) in base.iter_mut().enumerate() {
            *b = i as u32;
        }
        for q in in_queue.iter_mut() {
            *q = false;
        }
        queue.clear();
        queue.push(start);
        in_queue[start as usize] = true;
        let mut finish = NIL;
        let mut qi = 0;
        'bfs: while qi < queue.len() {
            let u = queue[qi];
            qi += 1;
            let nbrs = adj[u as usize].clone();
            for v in nbrs {
                if base[u as usize] == base[v as usize] || mate[u as usize] == v {
                    continue;
                }
                if v == start || (mate[v as usize] != NIL && parent[mate[v as usize] as usize] != NIL)
                {
                    // Odd cycle: contract the blossom.
                    let b = lca(u, v, &base, &parent, &mate, n);
                    for x in in_blossom.iter_mut() {
                        *x = false;
                    }
                    mark_path(u, b, v, &base, &mut parent, &mate, &mut in_blossom);
                    mark_path(v, b, u, &base, &mut parent, &mate, &mut in_blossom);
                    for i in 0..n {
                        if in_blossom[base[i] as usize] {
                            base[i] = b;
                            if !in_queue[i] {
                                in_queue[i] = true;
                                queue.push(i as u32);
                            }
                        }
                    }
                } else if parent[v as usize] == NIL {
                    parent[v as usize] = u;
                    if mate[v as usize] == NIL {
                        finish = v;
                        break 'bfs;
                    }
                    let w = mate[v as usize];
                    if !in_queue[w as usize] {
                        in_queue[w as usize] = true;
                        queue.push(w);
                    }
                }
            }
        }
        // Flip matched edges along the augmenting path.
        let mut v = finish;
        while v != NIL {
            let pv = parent[v as usize];
            let ppv = mate[pv as usize];
            mate[v as usize] = pv;
            mate[pv as usize] = v;
            v = ppv;
        }
    }
    mate.iter().map(|&v| (v != NIL).then_some(v)).collect()
}

// ---------------------------------------------------------------------------
// Hamilton cycle search
// ---------------------------------------------------------------------------

/// Result of a budgeted Hamilton-cycle search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HamiltonResult {
    /// A cycle, as a vertex sequence of length n (closing edge implicit).
    Found(Vec<u32>),
    /// Search-space exhausted with a proof of absence (claimed only for
    /// small n, or for cheap structural obstructions at any n).
    Absent,
    /// Budget exhausted; absence is inconclusive.
    Cutoff,
}

/// Backtracking Hamilton-cycle search.
///
/// Candidate extensions are tried in the order given by `adj`; callers
/// wanting the ascending-degree heuristic should pre-sort (see
/// [`sort_adjacency_by_degree`]).  Three sound prunes keep the search
/// effective on sparse random graphs: a vertex with no unvisited entry arc
/// must be the immediate successor of the head (the move is forced); a
/// vertex with no unvisited exit arc must be the final vertex; and the
/// unvisited region must stay reachable between head and start.  `budget`
/// bounds node expansions.  Exhaustive completion proves absence only for
/// `n <= 12`; larger searches report [`HamiltonResult::Cutoff`] instead.
pub fn find_hamilton_cycle(adj: &[Vec<u32>], directed: bool, budget: u64) -> HamiltonResult {
    let n = adj.len();
    if n < 3 {
        return HamiltonResult::Absent;
    }
    // Structural obstructions: degree and connectivity.
    let mut radj = vec![Vec::new(); n];
    if directed {
        for (u, list) in adj.iter().enumerate() {
            for &v in list {
                radj[v as usize].push(u as u32);
            }
        }
        if adj.iter().any(|l| l.is_empty()) || radj.iter().any(|l| l.is_empty()) {
            return HamiltonResult::Absent;
        }
    } else if adj.iter().any(|l| l.len() < 2) {
        return HamiltonResult::Absent;
    }
    if !connected(adj, &radj, directed) {
        return HamiltonResult::Absent;
    }

    let mut search = HamiltonSearch {
        adj,
        radj: &radj,
        directed,
        n,
        visited: vec![false; n],
        out_avail: adj.iter().map(|l| l.len() as u32).collect(),
        in_avail: if directed {
            radj.iter().map(|l| l.len() as u32).collect()
        } else {
            adj.iter().map(|l| l.len() as u32).collect()
        },
        stamp: vec![0u32; n],
        stamp_gen: 0,
        reach_stack: Vec::with_capacity(n),
        nodes: 0,
        budget,
    };
    search.visited[0] = true;
    search.adjust(0, -1);
    let mut path = vec![0u32];
    match search.extend(&mut path) {
        Some(found) => {
            if found {
                HamiltonResult::Found(path)
            } else if n <= 12 {
                HamiltonResult::Absent
            } else {
                HamiltonResult::Cutoff
            }
        }
        None => HamiltonResult::Cutoff,
    }
}

struct HamiltonSearch<'a> {
    adj: &'a [Vec<u32>],
    radj: &'a [Vec<u32>],
    directed: bool,
    n: usize,
    visited: Vec<bool>,
    /// Unvisited out-neighbors per vertex (entry/exit symmetric when
    /// undirected).
    out_avail: Vec<u32>,
    in_avail: Vec<u32>,
    stamp: Vec<u32>,
    stamp_gen: u32,
    reach_stack: Vec<u32>,
    nodes: u64,
    budget: u64,
}

impl HamiltonSearch<'_> {
    fn adjust(&mut self, w: u32, delta: i32) {
        if self.directed {
            for &x in &self.radj[w as usize] {
                self.out_avail[x as usize] = (self.out_avail[x as usize] as i32 + delta) as u32;
            }
            for &x in &self.adj[w as usize] {
                self.in_avail[x as usize] = (self.in_avail[x as usize] as i32 + delta) as u32;
            }
        } else {
            for &x in &self.adj[w as usize] {
                self.out_avail[x as usize] = (self.out_avail[x as usize] as i32 + delta) as u32;
                self.in_avail[x as usize] = (self.in_avail[x as usize] as i32 + delta) as u32;
            }
        }
    }

    fn has_arc(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].contains(&v)
    }

    /// Sound local constraints after moving onto `head`, with `rem`
    /// unvisited vertices left.  Returns `Err(())` when the branch is dead,
    /// otherwise the forced successor if one exists.
    fn local_constraints(&self, head: u32, rem: usize) -> Result<Option<u32>, ()> {
        // The final vertex will be one of the unvisited vertices and must
        // carry the closing arc into the start.
        if rem >= 1 && self.in_avail[0] == 0 {
            return Err(());
        }
        // Only neighbors of `head` can have just changed availability;
        // older transitions were handled when they appeared.
        let mut forced: Option<u32> = None;
        let nbrs = self.adj[head as usize].iter();
        let all: Box<dyn Iterator<Item = &u32>> = if self.directed {
            Box::new(nbrs.chain(self.radj[head as usize].iter()))
        } else {
            Box::new(nbrs)
        };
        for &x in all {
            if self.visited[x as usize] {
                continue;
            }
            let no_entry = self.in_avail[x as usize] == 0;
            let no_exit = self.out_avail[x as usize] == 0;
            if self.directed {
                // No unvisited entry: x must be the immediate successor.
                if no_entry {
                    if !self.has_arc(head, x) {
                        return Err(());
                    }
                    if forced.is_some() && forced != Some(x) {
                        return Err(());
                    }
                    forced = Some(x);
                }
                // No unvisited exit: x must be the final vertex.
                if no_exit && (!self.has_arc(x, 0) || (no_entry && rem > 1)) {
                    return Err(());
                }
            } else {
                if no_entry {
                    // Entry must be from head now and exit to the start:
                    // x is both next and final.
                    if rem > 1 || !self.has_arc(head, x) || !self.has_arc(x, 0) {
                        return Err(());
                    }
                    if forced.is_some() && forced != Some(x) {
                        return Err(());
                    }
                    forced = Some(x);
                } else if self.out_avail[x as usize] == 1 && x != 0 && !self.has_arc(x, 0) {
                    // One unvisited neighbor left and no closing edge: the
                    // only traversal enters from the head right now and
                    // leaves through that neighbor.
                    if !self.has_arc(head, x) {
                        return Err(());
                    }
                    if forced.is_some() && forced != Some(x) {
                        return Err(());
                    }
                    forced = Some(x);
                }
            }
        }
        Ok(forced)
    }

    /// All unvisited vertices must be reachable from `head` through
    /// unvisited vertices (undirected also implies they can reach start).
    /// Directed additionally requires reaching the start backwards.
    fn connectivity_ok(&mut self, head: u32, rem: usize) -> bool {
        if rem == 0 {
            return true;
        }
        // Forward sweep from head over unvisited vertices.
        self.stamp_gen += 1;
        let gen = self.stamp_gen;
        self.reach_stack.clear();
        self.reach_stack.push(head);
        self.stamp[head as usize] = gen;
        let mut seen = 0usize;
        while let Some(x) = self.reach_stack.pop() {
            for &y in &self.adj[x as usize] {
                if self.stamp[y as usize] != gen && !self.visited[y as usize] {
                    self.stamp[y as usize] = gen;
                    seen += 1;
                    self.reach_stack.push(y);
                }
            }
        }
        if seen != rem {
            return false;
        }
        if self.directed {
            // Backward sweep from start: every unvisited vertex must be
            // able to reach the start through unvisited vertices.
            self.stamp_gen += 1;
            let gen = self.stamp_gen;
            self.reach_stack.clear();
            self.reach_stack.push(0);
            self.stamp[0] = gen;
            let mut seen = 0usize;
            while let Some(x) = self.reach_stack.pop() {
                for &y in &self.radj[x as usize] {
                    if self.stamp[y as usize] != gen && !self.visited[y as usize] {
                        self.stamp[y as usize] = gen;
                        seen += 1;
                        self.reach_stack.push(y);
                    }
                }
            }
            if seen != rem {
                return false;
            }
        }
        true
    }

    /// Depth-first extension from the current head.  Constraints for the
    /// head are evaluated on entry, so forced-move chains propagate.
    /// `Some(true)`: cycle completed (path holds it).  `Some(false)`:
    /// subtree exhausted.  `None`: budget exceeded.
    fn extend(&mut self, path: &mut Vec<u32>) -> Option<bool> {
        let head = *path.last().unwrap();
        if path.len() == self.n {
            return Some(self.has_arc(head, 0));
        }
        let rem = self.n - path.len();
        let forced = match self.local_constraints(head, rem) {
            Err(()) => return Some(false),
            Ok(f) => f,
        };
        if !self.connectivity_ok(head, rem) {
            return Some(false);
        }
        let candidates: Vec<u32> = match forced {
            Some(f) => vec![f],
            None => {
                // Ascending degree in the remaining graph: scarce vertices
                // must be routed through before they strand.
                let mut c: Vec<u32> = self.adj[head as usize]
                    .iter()
                    .copied()
                    .filter(|&w| !self.visited[w as usize])
                    .collect();
                c.sort_by_key(|&w| (self.out_avail[w as usize], w));
                c
            }
        };
        for w in candidates {
            self.nodes += 1;
            if self.nodes > self.budget {
                return None;
            }
            self.visited[w as usize] = true;
            self.adjust(w, -1);
            path.push(w);
            let verdict = self.extend(path);
            match verdict {
                Some(true) => return Some(true),
                None => {
                    path.pop();
                    self.visited[w as usize] = false;
                    self.adjust(w, 1);
                    return None;
                }
                Some(false) => {
                    path.pop();
                    self.visited[w as usize] = false;
                    self.adjust(w, 1);
                }
            }
        }
        Some(false)
    }
}

fn connected(adj: &[Vec<u32>], radj: &[Vec<u32>], directed: bool) -> bool {
    let n = adj.len();
    let bfs = |lists: &[Vec<u32>]| -> usize {
        let mut seen = vec![false; n];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &lists[u as usize] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count
    };
    if directed {
        bfs(adj) == n && bfs(radj) == n
    } else {
        bfs(adj) == n
    }
}

/// Sort each adjacency list by ascending degree of the target vertex
/// (low-degree vertices are scarcer and should be routed through first).
pub fn sort_adjacency_by_degree(adj: &mut [Vec<u32>]) {
    let deg: Vec<u32> = adj.iter().map(|l| l.len() as u32).collect();
    for list in adj.iter_mut() {
        list.sort_by_key(|&v| deg[v as usize]);
    }
}

// ---------------------------------------------------------------------------
// Functional digraphs
// ---------------------------------------------------------------------------

/// Decomposition of the digraph `{(v, f(v))}` into directed cycles with
/// in-trees hanging off them.
#[derive(Debug, Clone)]
pub struct FunctionalDigraph {
    pub n: usize,
    pub f: Vec<u32>,
    /// The directed cycles, one per component.
    pub cycles: Vec<Vec<u32>>,
    /// Component id per vertex.
    pub component: Vec<u32>,
    pub on_cycle: Vec<bool>,
}

impl FunctionalDigraph {
    /// Number of components (equals the number of cycles).
    pub fn component_count(&self) -> usize {
        self.cycles.len()
    }
}

/// Decompose a functional digraph.  `f[v] != v` is required.
pub fn decompose_functional(f: &[u32]) -> FunctionalDigraph {
    let n = f.len();
    for (v, &fv) in f.iter().enumerate() {
        assert!(fv as usize != v && (fv as usize) < n, "f must be total with f(v) != v");
    }
    const UNSEEN: u32 = u32::MAX;
    let mut component = vec![UNSEEN; n];
    let mut on_cycle = vec![false; n];
    let mut cycles = Vec::new();
    // state: UNSEEN, or walk id (temporarily), or final component id.
    // We mark vertices with walk id = n + walk_index to detect self-meet.
    let mut mark = vec![u32::MAX; n];
    for start in 0..n {
        if component[start] != UNSEEN {
            continue;
        }
        // Walk until we meet something already resolved or our own trail.
        let walk_id = start as u32;
        let mut path = Vec::new();
        let mut v = start;
        while component[v] == UNSEEN && mark[v] != walk_id {
            mark[v] = walk_id;
            path.push(v as u32);
            v = f[v] as usize;
        }
        let comp_id;
        if component[v] != UNSEEN {
            // Ran into an existing component: everything on the path is a
            // tree vertex of that component.
            comp_id = component[v];
        } else {
            // Met our own trail at v: the tail of `path` from v is a new cycle.
            comp_id = cycles.len() as u32;
            let pos = path.iter().position(|&x| x as usize == v).unwrap();
            let cycle: Vec<u32> = path[pos..].to_vec();
            for &c in &cycle {
                on_cycle[c as usize] = true;
            }
            cycles.push(cycle);
        }
        for &p in &path {
            component[p as usize] = comp_id;
        }
    }
    FunctionalDigraph { n, f: f.to_vec(), cycles, component, on_cycle }
}

// ---------------------------------------------------------------------------
// Structure validators
// ---------------------------------------------------------------------------

/// Target structures a purchased edge set can be validated against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StructureCheck {
    SpanningTree,
    /// Directed: all non-root vertices reach a common root along arcs.
    Arborescence,
    /// Contains a perfect matching (general graph).
    PerfectMatching,
    /// Bipartite sides indexed separately: edge (u, v), u in U, v in V.
    BipartitePerfectMatching,
    HamiltonCycle,
    HamiltonCycleDirected,
    Triangle,
    Path { s: u32, t: u32 },
    /// `count` paths of length two with pairwise distinct endpoint pairs.
    PathsLenTwo { count: usize },
    Clique { r: usize },
}

/// True iff the edge set contains the claimed structure.
///
/// For `BipartitePerfectMatching`, `n` is the size of each side and edges
/// are (left, right) pairs; everywhere else vertices index `0..n`.
pub fn validate(check: StructureCheck, n: u32, edges: &[(u32, u32)]) -> bool {
    match check {
        StructureCheck::SpanningTree => {
            let mut dsu = DisjointSet::new(n as usize);
            for &(u, v) in edges {
                dsu.union(u, v);
            }
            dsu.components() == 1
        }
        StructureCheck::Arborescence => {
            // Root candidates: vertices from which... reverse: every vertex
            // must REACH the root, so BFS on reversed arcs from each
            // candidate; a vertex with out-degree 0 is the only candidate.
            let mut radj = vec![Vec::new(); n as usize];
            let mut outdeg = vec![0u32; n as usize];
            for &(u, v) in edges {
                radj[v as usize].push(u);
                outdeg[u as usize] += 1;
            }
            let reaches_all = |root: u32| -> bool {
                let mut seen = vec![false; n as usize];
                let mut stack = vec![root];
                seen[root as usize] = true;
                let mut count = 1u32;
                while let Some(x) = stack.pop() {
                    for &y in &radj[x as usize] {
                        if !seen[y as usize] {
                            seen[y as usize] = true;
                            count += 1;
                            stack.push(y);
                        }
                    }
                }
                count == n
            };
            (0..n).any(|r| outdeg[r as usize] == 0 && reaches_all(r))
                || (0..n).any(reaches_all)
        }
        StructureCheck::PerfectMatching => {
            if n % 2 != 0 {
                return false;
            }
            let mate = max_general_matching(n as usize, edges);
            mate.iter().filter(|m| m.is_some()).count() as u32 == n
        }
        StructureCheck::BipartitePerfectMatching => {
            let mut adj = vec![Vec::new(); n as usize];
            for &(u, v) in edges {
                adj[u as usize].push(v);
            }
            let m = max_bipartite_matching(&adj, n as usize);
            m.iter().filter(|x| x.is_some()).count() as u32 == n
        }
        StructureCheck::HamiltonCycle | StructureCheck::HamiltonCycleDirected => {
            let directed = check == StructureCheck::HamiltonCycleDirected;
            let mut adj = vec![Vec::new(); n as usize];
            for &(u, v) in edges {
                adj[u as usize].push(v);
                if !directed {
                    adj[v as usize].push(u);
                }
            }
            sort_adjacency_by_degree(&mut adj);
            matches!(find_hamilton_cycle(&adj, directed, 50_000_000), HamiltonResult::Found(_))
        }
        StructureCheck::Triangle => {
            let mut adj = vec![Vec::new(); n as usize];
            for &(u, v) in edges {
                adj[u as usize].push(v);
                adj[v as usize].push(u);
            }
            for &(u, v) in edges {
                for &w in &adj[u as usize] {
                    if w != v && adj[v as usize].contains(&w) {
                        return true;
                    }
                }
            }
            false
        }
        StructureCheck::Path { s, t } => {
            let mut dsu = DisjointSet::new(n as usize);
            for &(u, v) in edges {
                dsu.union(u, v);
            }
            dsu.same(s, t)
        }
        StructureCheck::PathsLenTwo { count } => {
            // Wedges u-c-v with pairwise distinct endpoint pairs {u, v}.
            let mut adj = vec![Vec::new(); n as usize];
            for &(u, v) in edges {
                adj[u as usize].push(v);
                adj[v as usize].push(u);
            }
            let mut pairs = std::collections::HashSet::new();
            for c in 0..n as usize {
                for i in 0..adj[c].len() {
                    for j in (i + 1)..adj[c].len() {
                        let (a, b) = (adj[c][i].min(adj[c][j]), adj[c][i].max(adj[c][j]));
                        if a != b {
                            pairs.insert((a, b));
                        }
                    }
                }
            }
            pairs.len() >= count
        }
        StructureCheck::Clique { r } => {
            let mut bits = BitAdj::empty(n as usize);
            let mut verts: Vec<u32> = Vec::new();
            for &(u, v) in edges {
                bits.set(u, v);
                bits.set(v, u);
                verts.push(u);
                verts.push(v);
            }
            verts.sort_unstable();
            verts.dedup();
            find_clique_among(&bits, &verts, r).is_some()
        }
    }
}

/// Greedy-with-backtracking search for an r-clique among `candidates`
/// (vertices assumed to carry the relevant edges in `bits`).
pub fn find_clique_among(bits: &BitAdj, candidates: &[u32], r: usize) -> Option<Vec<u32>> {
    fn extend(
        bits: &BitAdj,
        cand: &[u32],
        chosen: &mut Vec<u32>,
        r: usize,
        nodes: &mut u64,
    ) -> bool {
        if chosen.len() == r {
            return true;
        }
        if chosen.len() + cand.len() < r || *nodes > 2_000_000 {
            return false;
        }
        for (i, &v) in cand.iter().enumerate() {
            *nodes += 1;
            chosen.push(v);
            let next: Vec<u32> = cand[i + 1..]
                .iter()
                .copied()
                .filter(|&w| bits.get(v, w))
                .collect();
            if extend(bits, &next, chosen, r, nodes) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    let mut chosen = Vec::new();
    let mut nodes = 0u64;
    extend(bits, candidates, &mut chosen, r, &mut nodes).then_some(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngHandle;
    use rand::Rng;

    #[test]
    fn dsu_basics() {
        let mut g = PurchasedGraph::new(5, false);
        assert!(!g.same_component(1, 2));
        g.add_edge(1, 2, 0.3);
        assert!(g.same_component(1, 2));
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.components(), 4);
        g.add_edge(2, 3, 0.1);
        assert!(g.same_component(1, 3));
        assert!((g.total_cost() - 0.4).abs() < 1e-12);
        g.add_edge(0, 4, 0.2);
        g.add_edge(0, 1, 0.2);
        assert_eq!(g.components(), 1);
    }

    #[test]
    fn dsu_insertion_order_irrelevant() {
        // Any permutation of the same insertions yields identical queries.
        let edges = [(0u32, 1u32), (2, 3), (1, 2), (5, 6), (4, 5)];
        let mut orders = vec![edges.to_vec()];
        let mut rev = edges.to_vec();
        rev.reverse();
        orders.push(rev);
        let mut answers = Vec::new();
        for order in orders {
            let mut d = DisjointSet::new(8);
            for (u, v) in order {
                d.union(u, v);
            }
            let mut ans = Vec::new();
            for a in 0..8 {
                for b in 0..8 {
                    ans.push(d.same(a, b));
                }
            }
            answers.push(ans);
        }
        assert_eq!(answers[0], answers[1]);
    }

    #[test]
    fn hopcroft_karp_complete_and_empty() {
        let adj = vec![vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2]];
        let m = max_bipartite_matching(&adj, 3);
        assert_eq!(m.iter().filter(|x| x.is_some()).count(), 3);
        assert!(verify_matching_maximum(&adj, 3, &m));

        let empty: Vec<Vec<u32>> = vec![vec![], vec![]];
        let m = max_bipartite_matching(&empty, 2);
        assert_eq!(m.iter().filter(|x| x.is_some()).count(), 0);
        assert!(verify_matching_maximum(&empty, 2, &m));
    }

    #[test]
    fn three_out_bipartite_has_pm_with_high_frequency() {
        let n = 200usize;
        let samples = 1000;
        let mut perfect = 0;
        for s in 0..samples {
            let mut rng = RngHandle::new(1234, s).rng();
            let mut adj = vec![Vec::new(); n];
            // Each left vertex picks 3 random right vertices and vice versa.
            for u in 0..n {
                for _ in 0..3 {
                    adj[u].push(rng.random_range(0..n as u32));
                }
            }
            for v in 0..n as u32 {
                for _ in 0..3 {
                    let u = rng.random_range(0..n);
                    adj[u].push(v);
                }
            }
            let m = max_bipartite_matching(&adj, n);
            if m.iter().all(|x| x.is_some()) {
                perfect += 1;
            }
        }
        assert!(perfect >= 990, "perfect {perfect}/1000");
    }

    #[test]
    fn hk_agrees_with_kuhn_on_randoms() {
        for s in 0..50 {
            let mut rng = RngHandle::new(4321, s).rng();
            let nl = rng.random_range(1..12usize);
            let nr = rng.random_range(1..12usize);
            let mut adj = vec![Vec::new(); nl];
            for (u, row) in adj.iter_mut().enumerate() {
                for v in 0..nr as u32 {
                    if rng.random::<f64>() < 0.3 {
                        row.push(v);
                    }
                    let _ = u;
                }
            }
            let m = max_bipartite_matching(&adj, nr);
            assert!(verify_matching_maximum(&adj, nr, &m), "seed {s}");
        }
    }

    #[test]
    fn hamilton_cycle_c5() {
        let mut adj = vec![Vec::new(); 5];
        for i in 0..5u32 {
            let j = (i + 1) % 5;
            adj[i as usize].push(j);
            adj[j as usize].push(i);
        }
        match find_hamilton_cycle(&adj, false, 10_000) {
            HamiltonResult::Found(cycle) => {
                assert_eq!(cycle.len(), 5);
                let mut sorted = cycle.clone();
                sorted.sort_unstable();
                assert_eq!(sorted, vec![0, 1, 2, 3, 4]);
                for w in cycle.windows(2) {
                    assert!(adj[w[0] as usize].contains(&w[1]));
                }
                assert!(adj[cycle[4] as usize].contains(&cycle[0]));
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn hamilton_star_absent() {
        // K_{1,4}: leaves have degree 1.
        let mut adj = vec![Vec::new(); 5];
        for leaf in 1..5u32 {
            adj[0].push(leaf);
            adj[leaf as usize].push(0);
        }
        assert_eq!(find_hamilton_cycle(&adj, false, 10_000), HamiltonResult::Absent);
    }

    #[test]
    fn hamilton_absent_by_exhaustion_small() {
        // Two triangles sharing one vertex: degree >= 2 everywhere,
        // connected, but no Hamilton cycle.
        let edges = [(0u32, 1u32), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)];
        let mut adj = vec![Vec::new(); 5];
        for &(u, v) in &edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        assert_eq!(find_hamilton_cycle(&adj, false, 1_000_000), HamiltonResult::Absent);
    }

    #[test]
    fn hamilton_ten_out_found_with_high_frequency() {
        let n = 100usize;
        let samples = 200;
        let mut found = 0;
        for s in 0..samples {
            let mut rng = RngHandle::new(777, s).rng();
            let mut adj = vec![Vec::new(); n];
            for u in 0..n as u32 {
                for _ in 0..10 {
                    let v = loop {
                        let v = rng.random_range(0..n as u32);
                        if v != u {
                            break v;
                        }
                    };
                    if !adj[u as usize].contains(&v) {
                        adj[u as usize].push(v);
                    }
                    if !adj[v as usize].contains(&u) {
                        adj[v as usize].push(u);
                    }
                }
            }
            sort_adjacency_by_degree(&mut adj);
            if matches!(find_hamilton_cycle(&adj, false, 10_000_000), HamiltonResult::Found(_)) {
                found += 1;
            }
        }
        assert!(found * 100 >= samples * 95, "found {found}/{samples}");
    }

    #[test]
    fn hamilton_directed_cycle() {
        let mut adj = vec![Vec::new(); 4];
        for i in 0..4u32 {
            adj[i as usize].push((i + 1) % 4);
        }
        assert!(matches!(find_hamilton_cycle(&adj, true, 1000), HamiltonResult::Found(_)));
        // Reverse one arc: in-degree obstruction.
        let adj2 = vec![vec![1u32], vec![2], vec![3], vec![2]];
        assert_eq!(find_hamilton_cycle(&adj2, true, 1000), HamiltonResult::Absent);
    }

    #[test]
    fn functional_decomposition_cases() {
        // Cyclic shift: one n-cycle, no tree vertices.
        let n = 12u32;
        let f: Vec<u32> = (0..n).map(|v| (v + 1) % n).collect();
        let d = decompose_functional(&f);
        assert_eq!(d.component_count(), 1);
        assert_eq!(d.cycles[0].len(), 12);
        assert!(d.on_cycle.iter().all(|&b| b));

        // f(v) = 0 for v >= 1, f(0) = 1: a 2-cycle {0,1} with a star.
        let mut f = vec![0u32; 8];
        f[0] = 1;
        let d = decompose_functional(&f);
        assert_eq!(d.component_count(), 1);
        assert_eq!(d.cycles[0].len(), 2);
        assert_eq!(d.on_cycle.iter().filter(|&&b| b).count(), 2);
        // Cycle + tree vertices account for everything.
        let cyc: usize = d.cycles.iter().map(|c| c.len()).sum();
        let trees = d.on_cycle.iter().filter(|&&b| !b).count();
        assert_eq!(cyc + trees, 8);
    }

    #[test]
    fn functional_random_mapping_component_count() {
        // Mean component count of a uniform random mapping on [n] is about
        // (1/2) ln n for large n.
        let n = 10_000u32;
        let samples = 1000;
        let mut total = 0usize;
        for s in 0..samples {
            let mut rng = RngHandle::new(31337, s).rng();
            let f: Vec<u32> = (0..n)
                .map(|v| loop {
                    let w = rng.random_range(0..n);
                    if w != v {
                        break w;
                    }
                })
                .collect();
            let d = decompose_functional(&f);
            let cyc: usize = d.cycles.iter().map(|c| c.len()).sum();
            let trees = d.on_cycle.iter().filter(|&&b| !b).count();
            assert_eq!(cyc + trees, n as usize);
            total += d.component_count();
        }
        let mean = total as f64 / samples as f64;
        let target = 0.5 * (n as f64).ln();
        assert!(
            (mean - target).abs() < 0.15 * target,
            "mean {mean} vs {target}"
        );
    }

    #[test]
    fn validators_spot_checks() {
        // Triangle.
        assert!(validate(StructureCheck::Triangle, 3, &[(0, 1), (1, 2), (0, 2)]));
        assert!(!validate(StructureCheck::Triangle, 4, &[(0, 1), (1, 2), (2, 3)]));
        // Spanning tree: n-1 edges with a cycle is invalid.
        assert!(!validate(StructureCheck::SpanningTree, 4, &[(0, 1), (1, 2), (0, 2)]));
        assert!(validate(StructureCheck::SpanningTree, 4, &[(0, 1), (1, 2), (2, 3)]));
        // Path.
        assert!(validate(StructureCheck::Path { s: 0, t: 3 }, 4, &[(0, 1), (1, 3)]));
        assert!(!validate(StructureCheck::Path { s: 0, t: 3 }, 4, &[(0, 1), (2, 3)]));
        // Arborescence toward root 0.
        assert!(validate(StructureCheck::Arborescence, 4, &[(1, 0), (2, 1), (3, 1)]));
        assert!(!validate(StructureCheck::Arborescence, 4, &[(1, 0), (2, 1)]));
        // Perfect matchings.
        assert!(validate(StructureCheck::PerfectMatching, 4, &[(0, 2), (1, 3)]));
        assert!(!validate(StructureCheck::PerfectMatching, 4, &[(0, 2), (0, 3)]));
        assert!(validate(
            StructureCheck::BipartitePerfectMatching,
            2,
            &[(0, 1), (1, 0)]
        ));
        // Hamilton cycle.
        assert!(validate(
            StructureCheck::HamiltonCycle,
            4,
            &[(0, 1), (1, 2), (2, 3), (3, 0)]
        ));
        // Wedges.
        assert!(validate(StructureCheck::PathsLenTwo { count: 2 }, 5, &[(0, 1), (1, 2), (3, 1)]));
        // Clique.
        assert!(validate(
            StructureCheck::Clique { r: 4 },
            5,
            &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        ));
        assert!(!validate(StructureCheck::Clique { r: 4 }, 5, &[(0, 1), (0, 2), (0, 3)]));
    }

    #[test]
    fn blossom_handles_odd_cycles() {
        // 5-cycle: maximum matching has size 2.
        let edges = [(0u32, 1u32), (1, 2), (2, 3), (3, 4), (4, 0)];
        let m = max_general_matching(5, &edges);
        assert_eq!(m.iter().filter(|x| x.is_some()).count(), 4);
        // Two triangles joined by an edge: perfect matching exists (n=6).
        let edges = [(0u32, 1u32), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3)];
        assert!(validate(StructureCheck::PerfectMatching, 6, &edges));
    }

    #[test]
    fn bitadj_complete_and_ops() {
        let mut a = BitAdj::complete(70);
        assert!(!a.get(3, 3));
        assert!(a.get(3, 69));
        assert_eq!(a.degree(5), 69);
        a.clear(3, 69);
        assert!(!a.get(3, 69));
        let nbrs: Vec<u32> = a.neighbors(68).collect();
        assert_eq!(nbrs.len(), 69);
    }
}
