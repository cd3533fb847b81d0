//! Exact minimum-weight perfect matching on small dense graphs.
//!
//! The core is the classic O(n³) primal-dual blossom algorithm for
//! *maximum*-weight matching (dual labels per vertex, slack bookkeeping per
//! tree, odd cycles shrunk into "flower" super-nodes). Minimization is the
//! profit transform `profit = top − cost + 1` on a complete graph: with all
//! profits positive, a maximum-weight matching is automatically perfect, and
//! forbidden pairs are priced so any matching that avoids them beats any
//! matching that does not.
//!
//! Weights are `f64`; all tightness tests compare slacks against a small
//! absolute epsilon. Callers keep weight magnitudes moderate (path lengths of
//! log-likelihood ratios), so the epsilon comfortably dominates accumulated
//! rounding while staying far below genuine weight differences.

use std::collections::VecDeque;

use crate::error::{Error, Result};

const EPS: f64 = 1e-8;

#[derive(Clone, Copy)]
struct Edge {
    u: usize,
    v: usize,
    w: f64,
}

/// Primal-dual state, 1-indexed; ids `n+1..=2n` are blossom super-nodes.
struct Matcher {
    n: usize,
    n_x: usize,
    g: Vec<Vec<Edge>>,
    lab: Vec<f64>,
    mate: Vec<usize>,
    slack: Vec<usize>,
    st: Vec<usize>,
    pa: Vec<usize>,
    flower_from: Vec<Vec<usize>>,
    flower: Vec<Vec<usize>>,
    s: Vec<i8>,
    vis: Vec<usize>,
    q: VecDeque<usize>,
    stamp: usize,
}

impl Matcher {
    /// `profit` is a symmetric 0-indexed matrix of positive profits on a
    /// complete graph with an even number of vertices.
    fn new(profit: &[Vec<f64>]) -> Matcher {
        let n = profit.len();
        let cap = 2 * n + 1;
        let mut g = Vec::with_capacity(cap);
        for u in 0..cap {
            let mut row = Vec::with_capacity(cap);
            for v in 0..cap {
                row.push(Edge { u, v, w: 0.0 });
            }
            g.push(row);
        }
        for u in 1..=n {
            for v in 1..=n {
                if u != v {
                    g[u][v].w = profit[u - 1][v - 1];
                }
            }
        }
        let mut flower_from = vec![vec![0usize; n + 1]; cap];
        for (u, row) in flower_from.iter_mut().enumerate().take(n + 1).skip(1) {
            row[u] = u;
        }
        let mut wmax = 0.0f64;
        for u in 1..=n {
            for v in 1..=n {
                wmax = wmax.max(g[u][v].w);
            }
        }
        let mut lab = vec![0.0f64; cap];
        for l in lab.iter_mut().take(n + 1).skip(1) {
            *l = wmax;
        }
        Matcher {
            n,
            n_x: n,
            g,
            lab,
            mate: vec![0; cap],
            slack: vec![0; cap],
            st: (0..cap).collect(),
            pa: vec![0; cap],
            flower_from,
            flower: vec![Vec::new(); cap],
            s: vec![-1; cap],
            vis: vec![0; cap],
            q: VecDeque::new(),
            stamp: 0,
        }
    }

    #[inline]
    fn e_delta(&self, e: Edge) -> f64 {
        self.lab[e.u] + self.lab[e.v] - 2.0 * e.w
    }

    fn update_slack(&mut self, u: usize, x: usize) {
        if self.slack[x] == 0
            || self.e_delta(self.g[u][x]) < self.e_delta(self.g[self.slack[x]][x])
        {
            self.slack[x] = u;
        }
    }

    fn set_slack(&mut self, x: usize) {
        self.slack[x] = 0;
        for u in 1..=self.n {
            if self.g[u][x].w > 0.5 && self.st[u] != x && self.s[self.st[u]] == 0 {
                self.update_slack(u, x);
            }
        }
    }

    fn q_push(&mut self, x: usize) {
        if x <= self.n {
            self.q.push_back(x);
        } else {
            let children = self.flower[x].clone();
            for c in children {
                self.q_push(c);
            }
        }
    }

    fn set_st(&mut self, x: usize, b: usize) {
        self.st[x] = b;
        if x > self.n {
            let children = self.flower[x].clone();
            for c in children {
                self.set_st(c, b);
            }
        }
    }

    /// Position of child `xr` in blossom `b`'s cycle, reversing the cycle
    /// direction when needed so the position is even.
    fn get_pr(&mut self, b: usize, xr: usize) -> usize {
        let pr = self.flower[b]
            .iter()
            .position(|&y| y == xr)
            .expect("child must sit in its blossom cycle");
        if pr % 2 == 1 {
            self.flower[b][1..].reverse();
            self.flower[b].len() - pr
        } else {
            pr
        }
    }

    fn set_match(&mut self, u: usize, v: usize) {
        let e = self.g[u][v];
        self.mate[u] = e.v;
        if u > self.n {
            let xr = self.flower_from[u][e.u];
            let pr = self.get_pr(u, xr);
            for i in 0..pr {
                let a = self.flower[u][i];
                let b = self.flower[u][i ^ 1];
                self.set_match(a, b);
            }
            self.set_match(xr, v);
            self.flower[u].rotate_left(pr);
        }
    }

    fn augment(&mut self, mut u: usize, mut v: usize) {
        loop {
            let xnv = self.st[self.mate[u]];
            self.set_match(u, v);
            if xnv == 0 {
                return;
            }
            let p = self.st[self.pa[xnv]];
            self.set_match(xnv, p);
            u = p;
            v = xnv;
        }
    }

    fn get_lca(&mut self, mut u: usize, mut v: usize) -> usize {
        self.stamp += 1;
        let t = self.stamp;
        while u != 0 || v != 0 {
            if u != 0 {
                if self.vis[u] == t {
                    return u;
                }
                self.vis[u] = t;
                u = self.st[self.mate[u]];
                if u != 0 {
                    u = self.st[self.pa[u]];
                }
            }
            std::mem::swap(&mut u, &mut v);
        }
        0
    }

    fn add_blossom(&mut self, u: usize, lca: usize, v: usize) {
        let mut b = self.n + 1;
        while b <= self.n_x && self.st[b] != 0 {
            b += 1;
        }
        if b > self.n_x {
            self.n_x += 1;
        }
        debug_assert!(b < self.g.len(), "blossom id overflow");
        self.lab[b] = 0.0;
        self.s[b] = 0;
        self.mate[b] = self.mate[lca];
        let mut fl = vec![lca];
        let mut x = u;
        while x != lca {
            fl.push(x);
            let y = self.st[self.mate[x]];
            fl.push(y);
            self.q_push(y);
            x = self.st[self.pa[y]];
        }
        fl[1..].reverse();
        let mut x = v;
        while x != lca {
            fl.push(x);
            let y = self.st[self.mate[x]];
            fl.push(y);
            self.q_push(y);
            x = self.st[self.pa[y]];
        }
        self.flower[b] = fl;
        self.set_st(b, b);
        for x in 1..=self.n_x {
            self.g[b][x].w = 0.0;
            self.g[x][b].w = 0.0;
        }
        for x in 1..=self.n {
            self.flower_from[b][x] = 0;
        }
        let children = self.flower[b].clone();
        for &xs in &children {
            for x in 1..=self.n_x {
                let cand = self.g[xs][x];
                if self.g[b][x].w < 0.5
                    || (cand.w > 0.5 && self.e_delta(cand) < self.e_delta(self.g[b][x]))
                {
                    self.g[b][x] = cand;
                    self.g[x][b] = self.g[x][xs];
                }
            }
            for x in 1..=self.n {
                if self.flower_from[xs][x] != 0 {
                    self.flower_from[b][x] = xs;
                }
            }
        }
        self.set_slack(b);
    }

    fn expand_blossom(&mut self, b: usize) {
        let children = self.flower[b].clone();
        for &xs in &children {
            self.set_st(xs, xs);
        }
        let entry_real = self.g[b][self.pa[b]].u;
        let xr = self.flower_from[b][entry_real];
        let pr = self.get_pr(b, xr);
        let mut i = 0;
        while i < pr {
            let xs = self.flower[b][i];
            let xns = self.flower[b][i + 1];
            self.pa[xs] = self.g[xns][xs].u;
            self.s[xs] = 1;
            self.s[xns] = 0;
            self.slack[xs] = 0;
            self.set_slack(xns);
            self.q_push(xns);
            i += 2;
        }
        self.s[xr] = 1;
        self.pa[xr] = self.pa[b];
        let len = self.flower[b].len();
        for i in pr + 1..len {
            let xs = self.flower[b][i];
            self.s[xs] = -1;
            self.set_slack(xs);
        }
        self.st[b] = 0;
        self.flower[b].clear();
    }

    fn on_found_edge(&mut self, e: Edge) -> bool {
        let u = self.st[e.u];
        let v = self.st[e.v];
        if self.s[v] == -1 {
            self.pa[v] = e.u;
            self.s[v] = 1;
            let nu = self.st[self.mate[v]];
            self.slack[v] = 0;
            self.slack[nu] = 0;
            self.s[nu] = 0;
            self.q_push(nu);
        } else if self.s[v] == 0 {
            let lca = self.get_lca(u, v);
            if lca == 0 {
                self.augment(u, v);
                self.augment(v, u);
                return true;
            }
            self.add_blossom(u, lca, v);
        }
        false
    }

    /// Grow alternating trees from all free vertices until one augmenting
    /// path is flipped (true) or provably none exists (false).
    fn matching(&mut self) -> Result<bool> {
        for x in 1..=self.n_x {
            self.s[x] = -1;
            self.slack[x] = 0;
        }
        self.q.clear();
        let mut any_root = false;
        for x in 1..=self.n_x {
            if self.st[x] == x && self.mate[x] == 0 {
                self.pa[x] = 0;
                self.s[x] = 0;
                self.q_push(x);
                any_root = true;
            }
        }
        if !any_root {
            return Ok(false);
        }
        let budget = 1000 + 200 * (self.n + 2) * (self.n + 2);
        for _ in 0..budget {
            while let Some(u) = self.q.pop_front() {
                if self.s[self.st[u]] == 1 {
                    continue;
                }
                for v in 1..=self.n {
                    if self.g[u][v].w > 0.5 && self.st[u] != self.st[v] {
                        let e = self.g[u][v];
                        if self.e_delta(e) <= EPS {
                            if self.on_found_edge(e) {
                                return Ok(true);
                            }
                        } else {
                            let sv = self.st[v];
                            self.update_slack(u, sv);
                        }
                    }
                }
            }
            let mut d = f64::INFINITY;
            for b in self.n + 1..=self.n_x {
                if self.st[b] == b && self.s[b] == 1 {
                    d = d.min(self.lab[b] * 0.5);
                }
            }
            for x in 1..=self.n_x {
                if self.st[x] == x && self.slack[x] != 0 {
                    let e = self.g[self.slack[x]][x];
                    match self.s[x] {
                        -1 => d = d.min(self.e_delta(e)),
                        0 => d = d.min(self.e_delta(e) * 0.5),
                        _ => {}
                    }
                }
            }
            for u in 1..=self.n {
                if self.s[self.st[u]] == 0 {
                    d = d.min(self.lab[u]);
                }
            }
            if !d.is_finite() {
                return Ok(false);
            }
            let d = d.max(0.0);
            for u in 1..=self.n {
                match self.s[self.st[u]] {
                    0 => self.lab[u] -= d,
                    1 => self.lab[u] += d,
                    _ => {}
                }
            }
            for b in self.n + 1..=self.n_x {
                if self.st[b] == b {
                    match self.s[b] {
                        0 => self.lab[b] += 2.0 * d,
                        1 => self.lab[b] -= 2.0 * d,
                        _ => {}
                    }
                }
            }
            self.q.clear();
            for x in 1..=self.n_x {
                if self.st[x] == x && self.slack[x] != 0 && self.st[self.slack[x]] != x {
                    let e = self.g[self.slack[x]][x];
                    if self.e_delta(e) <= EPS && self.on_found_edge(e) {
                        return Ok(true);
                    }
                }
            }
            for b in self.n + 1..=self.n_x {
                if self.st[b] == b && self.s[b] == 1 && self.lab[b] < EPS {
                    self.expand_blossom(b);
                }
            }
        }
        Err(Error::ConvergenceFailure(
            "blossom matching exceeded its dual-adjustment budget".into(),
        ))
    }

    fn solve(&mut self) -> Result<()> {
        while self.matching()? {}
        Ok(())
    }
}

/// Minimum-weight perfect matching on a complete graph.
///
/// `w` is a symmetric 0-indexed cost matrix (diagonal ignored);
/// `f64::INFINITY` marks a forbidden pair. The caller must guarantee that a
/// perfect matching avoiding all forbidden pairs exists. Returns `mate` with
/// `mate[i] = j ⇔ mate[j] = i`.
pub fn min_weight_perfect_matching(w: &[Vec<f64>]) -> Result<Vec<usize>> {
    let n = w.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n % 2 == 1 {
        return Err(Error::DomainError(
            "perfect matching needs an even number of nodes".into(),
        ));
    }
    for (i, row) in w.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DomainError("weight matrix must be square".into()));
        }
        for (j, &x) in row.iter().enumerate() {
            if i != j && !x.is_finite() && !(x == f64::INFINITY) {
                return Err(Error::DomainError(format!("weight w[{i}][{j}] = {x}")));
            }
        }
    }
    let mut wmax = 0.0f64;
    for (i, row) in w.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if i != j && x.is_finite() {
                if x < 0.0 {
                    return Err(Error::DomainError("weights must be non-negative".into()));
                }
                wmax = wmax.max(x);
            }
        }
    }
    // Forbidden pairs cost more than all finite pairs combined, so any
    // matching avoiding them beats any matching using one; the profit
    // transform keeps every profit >= 1, making the maximum-weight matching
    // perfect on a complete graph.
    let forbidden_cost = (wmax + 1.0) * (n as f64 + 1.0);
    let top = forbidden_cost;
    let mut profit = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let c = if w[i][j].is_finite() { w[i][j] } else { forbidden_cost };
                profit[i][j] = top - c + 1.0;
            }
        }
    }
    let mut m = Matcher::new(&profit);
    m.solve()?;
    let mut mate = vec![usize::MAX; n];
    for i in 1..=n {
        if m.mate[i] == 0 {
            return Err(Error::ConvergenceFailure(
                "blossom matching left a node unmatched".into(),
            ));
        }
        mate[i - 1] = m.mate[i] - 1;
    }
    for i in 0..n {
        if mate[i] >= n || mate[mate[i]] != i {
            return Err(Error::ConvergenceFailure(
                "blossom matching produced an inconsistent pairing".into(),
            ));
        }
    }
    Ok(mate)
}

/// Total cost of a matching under the original weight matrix.
pub fn matching_weight(w: &[Vec<f64>], mate: &[usize]) -> f64 {
    (0..w.len()).filter(|&i| i < mate[i]).map(|i| w[i][mate[i]]).sum()
}

/// Exhaustive minimum-weight perfect matching, O((n−1)!!); the oracle the
/// fast matcher is validated against. Returns `None` if no perfect matching
/// of finite weight exists.
pub fn brute_force_min_matching(w: &[Vec<f64>]) -> Option<(Vec<usize>, f64)> {
    let n = w.len();
    if n % 2 == 1 {
        return None;
    }
    let mut mate = vec![usize::MAX; n];
    let mut best: Option<(Vec<usize>, f64)> = None;

    fn rec(
        w: &[Vec<f64>],
        mate: &mut Vec<usize>,
        cost: f64,
        best: &mut Option<(Vec<usize>, f64)>,
    ) {
        let n = w.len();
        let Some(i) = (0..n).find(|&i| mate[i] == usize::MAX) else {
            if best.as_ref().is_none_or(|(_, bc)| cost < *bc) {
                *best = Some((mate.clone(), cost));
            }
            return;
        };
        for j in i + 1..n {
            if mate[j] == usize::MAX && w[i][j].is_finite() {
                // Prune on the running cost; weights are non-negative.
                if best.as_ref().is_some_and(|(_, bc)| cost + w[i][j] >= *bc) {
                    continue;
                }
                mate[i] = j;
                mate[j] = i;
                rec(w, mate, cost + w[i][j], best);
                mate[i] = usize::MAX;
                mate[j] = usize::MAX;
            }
        }
    }

    rec(w, &mut mate, 0.0, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn symmetric(n: usize, upper: &[f64]) -> Vec<Vec<f64>> {
        let mut w = vec![vec![0.0f64; n]; n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                w[i][j] = upper[k];
                w[j][i] = upper[k];
                k += 1;
            }
        }
        w
    }

    #[test]
    fn two_nodes_match_each_other() {
        let w = symmetric(2, &[3.5]);
        let mate = min_weight_perfect_matching(&w).expect("match");
        assert_eq!(mate, vec![1, 0]);
        assert!((matching_weight(&w, &mate) - 3.5).abs() < 1e-12);
    }

    #[test]
    fn four_nodes_pick_the_cheap_pairing() {
        // Pairing (0,1)+(2,3) costs 2; the alternatives cost 20.
        let mut w = vec![vec![10.0f64; 4]; 4];
        w[0][1] = 1.0;
        w[1][0] = 1.0;
        w[2][3] = 1.0;
        w[3][2] = 1.0;
        let mate = min_weight_perfect_matching(&w).expect("match");
        assert_eq!(mate, vec![1, 0, 3, 2]);
    }

    #[test]
    fn odd_cycle_structure_forces_blossoms() {
        // Two triangles of cheap edges joined by one moderate bridge: the
        // optimum must break both triangles, which the algorithm discovers
        // only by shrinking them.
        let n = 6;
        let mut w = vec![vec![50.0f64; n]; n];
        for &(a, b) in &[(0, 1), (1, 2), (0, 2)] {
            w[a][b] = 1.0;
            w[b][a] = 1.0;
        }
        for &(a, b) in &[(3, 4), (4, 5), (3, 5)] {
            w[a][b] = 1.0;
            w[b][a] = 1.0;
        }
        w[2][3] = 5.0;
        w[3][2] = 5.0;
        let mate = min_weight_perfect_matching(&w).expect("match");
        let (bm, bc) = brute_force_min_matching(&w).expect("brute");
        assert!((matching_weight(&w, &mate) - bc).abs() < 1e-9);
        assert_eq!(mate, bm, "unique optimum must match exactly");
        // Sanity: the optimum uses the bridge.
        assert_eq!(mate[2], 3);
    }

    #[test]
    fn forbidden_pairs_are_avoided() {
        // Twin construction: 2 defects + 2 twins; cross defect-twin pairs
        // forbidden.
        let inf = f64::INFINITY;
        let w = vec![
            vec![0.0, 7.0, 3.0, inf],
            vec![7.0, 0.0, inf, 3.0],
            vec![3.0, inf, 0.0, 0.0],
            vec![inf, 3.0, 0.0, 0.0],
        ];
        let mate = min_weight_perfect_matching(&w).expect("match");
        // Boundary twice (3 + 3 = 6) beats pairing the defects (7 + 0 = 7).
        assert_eq!(mate, vec![2, 3, 0, 1]);
        // Flip the economics: now pairing wins.
        let w2 = vec![
            vec![0.0, 5.0, 3.0, inf],
            vec![5.0, 0.0, inf, 3.0],
            vec![3.0, inf, 0.0, 0.0],
            vec![inf, 3.0, 0.0, 0.0],
        ];
        let mate2 = min_weight_perfect_matching(&w2).expect("match");
        assert_eq!(mate2, vec![1, 0, 3, 2]);
    }

    #[test]
    fn repeated_runs_are_deterministic() {
        let upper: Vec<f64> =
            (0..15).map(|k| 1.0 + ((k * 7919 % 97) as f64) * 0.37).collect();
        let w = symmetric(6, &upper);
        let a = min_weight_perfect_matching(&w).expect("match");
        let b = min_weight_perfect_matching(&w).expect("match");
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn agrees_with_brute_force_on_random_complete_graphs(
            half in prop::sample::select(vec![1usize, 2, 3, 4, 5]),
            upper in prop::collection::vec(0.1f64..100.0, 45),
        ) {
            let n = 2 * half;
            let w = symmetric(n, &upper[..n * (n - 1) / 2]);
            let mate = min_weight_perfect_matching(&w).unwrap();
            let (_, bc) = brute_force_min_matching(&w).unwrap();
            let got = matching_weight(&w, &mate);
            prop_assert!((got - bc).abs() < 1e-9 * (1.0 + bc.abs()),
                "blossom {got} vs brute {bc}");
        }

        #[test]
        fn agrees_with_brute_force_on_twin_instances(
            k in prop::sample::select(vec![1usize, 2, 3, 4]),
            pair_w in prop::collection::vec(0.1f64..50.0, 6),
            bound_w in prop::collection::vec(0.1f64..50.0, 4),
        ) {
            // Decoder-shaped instance: k defects, k twins; defect-defect and
            // defect-own-twin finite, defect-other-twin forbidden, twin-twin
            // free.
            let n = 2 * k;
            let mut w = vec![vec![0.0f64; n]; n];
            let mut idx = 0;
            for i in 0..k {
                for j in i + 1..k {
                    w[i][j] = pair_w[idx % pair_w.len()];
                    w[j][i] = w[i][j];
                    idx += 1;
                }
            }
            for i in 0..k {
                w[i][k + i] = bound_w[i % bound_w.len()];
                w[k + i][i] = w[i][k + i];
                for j in 0..k {
                    if j != i {
                        w[i][k + j] = f64::INFINITY;
                        w[k + j][i] = f64::INFINITY;
                    }
                }
            }
            let mate = min_weight_perfect_matching(&w).unwrap();
            let (_, bc) = brute_force_min_matching(&w).unwrap();
            let got = matching_weight(&w, &mate);
            prop_assert!((got - bc).abs() < 1e-9 * (1.0 + bc.abs()),
                "blossom {got} vs brute {bc}");
            for i in 0..k {
                prop_assert!(mate[i] < k || mate[i] == k + i, "forbidden twin pair used");
            }
        }
    }
}
