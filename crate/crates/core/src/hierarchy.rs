//! Hierarchical-clustering trees, Dasgupta costs, vertex-weighted recursive
//! sparsest cut and an exact optimal-tree oracle for small contracted graphs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ContractedGraph, Graph};

/// Largest `k` for exhaustive sparsest cuts.
pub const MAX_CUT_NODES: usize = 24;
/// Largest `k` for the subset dynamic program.
pub const MAX_BRUTEFORCE_NODES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Node {
    Leaf(usize),
    Internal(Vec<usize>),
}

/// Rooted tree stored as an arena. Leaves carry item ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierTree {
    nodes: Vec<Node>,
    root: usize,
}

impl HierTree {
    pub fn leaf(id: usize) -> Self {
        HierTree {
            nodes: vec![Node::Leaf(id)],
            root: 0,
        }
    }

    /// New root over the given subtrees.
    pub fn join(children: Vec<HierTree>) -> Result<Self> {
        if children.len() < 2 {
            return Err(Error::Parameter("internal node needs at least two children".into()));
        }
        let mut nodes = Vec::new();
        let mut roots = Vec::with_capacity(children.len());
        for c in children {
            let off = nodes.len();
            roots.push(c.root + off);
            nodes.extend(c.nodes.into_iter().map(|n| match n {
                Node::Leaf(id) => Node::Leaf(id),
                Node::Internal(ch) => Node::Internal(ch.into_iter().map(|x| x + off).collect()),
            }));
        }
        nodes.push(Node::Internal(roots));
        let root = nodes.len() - 1;
        Ok(HierTree { nodes, root })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn children(&self, u: usize) -> &[usize] {
        match &self.nodes[u] {
            Node::Leaf(_) => &[],
            Node::Internal(c) => c,
        }
    }

    pub fn leaves(&self) -> Vec<usize> {
        self.leaves_under(self.root)
    }

    pub fn leaves_under(&self, u: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![u];
        while let Some(v) = stack.pop() {
            match &self.nodes[v] {
                Node::Leaf(id) => out.push(*id),
                Node::Internal(c) => stack.extend(c.iter().rev()),
            }
        }
        out
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    pub fn is_binary(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| !matches!(n, Node::Internal(c) if c.len() != 2))
    }

    /// Checks that the leaves are exactly `0..m`.
    pub fn check_leaves(&self, m: usize) -> Result<()> {
        let mut seen = vec![false; m];
        for id in self.leaves() {
            if id >= m || std::mem::replace(&mut seen[id], true) {
                return Err(Error::LeafMismatch);
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(Error::LeafMismatch)
        }
    }

    /// Parent pointers, depths and the node holding each leaf id.
    fn index(&self, m: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut parent = vec![usize::MAX; self.nodes.len()];
        let mut depth = vec![0; self.nodes.len()];
        let mut leaf_node = vec![usize::MAX; m];
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            match &self.nodes[u] {
                Node::Leaf(id) => leaf_node[*id] = u,
                Node::Internal(c) => {
                    for &ch in c {
                        parent[ch] = u;
                        depth[ch] = depth[u] + 1;
                        stack.push(ch);
                    }
                }
            }
        }
        (parent, depth, leaf_node)
    }

    /// Total item weight below every node.
    fn node_weights(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes.len()];
        self.fill_weights(self.root, w, &mut out);
        out
    }

    fn fill_weights(&self, u: usize, w: &[f64], out: &mut [f64]) -> f64 {
        let v = match &self.nodes[u] {
            Node::Leaf(id) => w[*id],
            Node::Internal(c) => c.iter().map(|&ch| self.fill_weights(ch, w, out)).sum(),
        };
        out[u] = v;
        v
    }

    fn write(&self, u: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.nodes[u] {
            Node::Leaf(id) => write!(f, "{id}"),
            Node::Internal(c) => {
                write!(f, "(")?;
                for (i, &ch) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    self.write(ch, f)?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for HierTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.root, f)
    }
}

impl FromStr for HierTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let t = parse_tree(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(parse_err(pos, "trailing input"));
        }
        Ok(t)
    }
}

fn parse_err(pos: usize, msg: &str) -> Error {
    Error::Parse {
        line: 1,
        msg: format!("column {}: {msg}", pos + 1),
    }
}

fn parse_tree(c: &[char], pos: &mut usize) -> Result<HierTree> {
    match c.get(*pos) {
        Some('(') => {
            *pos += 1;
            let mut kids = vec![parse_tree(c, pos)?];
            loop {
                match c.get(*pos) {
                    Some(',') => {
                        *pos += 1;
                        kids.push(parse_tree(c, pos)?);
                    }
                    Some(')') => {
                        *pos += 1;
                        break;
                    }
                    _ => return Err(parse_err(*pos, "expected ',' or ')'")),
                }
            }
            HierTree::join(kids).map_err(|_| parse_err(*pos, "internal node with one child"))
        }
        Some(d) if d.is_ascii_digit() => {
            let start = *pos;
            while c.get(*pos).is_some_and(|d| d.is_ascii_digit()) {
                *pos += 1;
            }
            let s: String = c[start..*pos].iter().collect();
            s.parse()
                .map(HierTree::leaf)
                .map_err(|_| parse_err(start, "bad leaf id"))
        }
        _ => Err(parse_err(*pos, "expected '(' or leaf id")),
    }
}

fn lca(parent: &[usize], depth: &[usize], mut a: usize, mut b: usize) -> usize {
    while depth[a] > depth[b] {
        a = parent[a];
    }
    while depth[b] > depth[a] {
        b = parent[b];
    }
    while a != b {
        a = parent[a];
        b = parent[b];
    }
    a
}

/// `Σ_{(x,y) ∈ E} |leaves(T[lca(x, y)])|` over non-loop edges with
/// multiplicity.
pub fn dasgupta_cost(g: &Graph, t: &HierTree) -> Result<f64> {
    t.check_leaves(g.n())?;
    let (parent, depth, leaf_node) = t.index(g.n());
    let sizes = t.node_weights(&vec![1.0; g.n()]);
    Ok(g.edges()
        .map(|(x, y, m)| m as f64 * sizes[lca(&parent, &depth, leaf_node[x], leaf_node[y])])
        .sum())
}

/// `Σ_{i<j} W(i, j) · w(leaves(T[lca(i, j)]))`.
pub fn weighted_dasgupta_cost(q: &ContractedGraph, t: &HierTree) -> Result<f64> {
    let k = q.k();
    t.check_leaves(k)?;
    let (parent, depth, leaf_node) = t.index(k);
    let weights = t.node_weights(q.sizes());
    let mut cost = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            let w = q.weight(i, j);
            if w != 0.0 {
                cost += w * weights[lca(&parent, &depth, leaf_node[i], leaf_node[j])];
            }
        }
    }
    Ok(cost)
}

/// Partition of the items into the maximal tree nodes of weight at most `s`.
/// Items heavier than `s` stay singletons.
pub fn maximal_clusters(t: &HierTree, w: &[f64], s: f64) -> Vec<Vec<usize>> {
    let weights = t.node_weights(w);
    let mut out = Vec::new();
    let mut stack = vec![t.root];
    while let Some(u) = stack.pop() {
        if weights[u] <= s {
            out.push(t.leaves_under(u));
            continue;
        }
        match &t.nodes[u] {
            Node::Leaf(id) => out.push(vec![*id]),
            Node::Internal(c) => stack.extend(c.iter().rev()),
        }
    }
    out
}

/// Total weight of edges cut by the maximal clusters of weight at most `s`.
pub fn cut_at_level(q: &ContractedGraph, t: &HierTree, s: f64) -> f64 {
    let mut label = vec![0usize; q.k()];
    for (c, members) in maximal_clusters(t, q.sizes(), s).iter().enumerate() {
        for &v in members {
            label[v] = c;
        }
    }
    let mut cut = 0.0;
    for i in 0..q.k() {
        for j in i + 1..q.k() {
            if label[i] != label[j] {
                cut += q.weight(i, j);
            }
        }
    }
    cut
}

/// `Σ_{s=0}^{ℓ} W_{T(s)}` for integer vertex weights with total `ℓ`.
pub fn cost_as_cuts(q: &ContractedGraph, t: &HierTree) -> Result<f64> {
    t.check_leaves(q.k())?;
    if q.sizes().iter().any(|w| w.fract() != 0.0) {
        return Err(Error::Parameter("cost-as-cuts needs integer vertex weights".into()));
    }
    let total = q.sizes().iter().sum::<f64>() as u64;
    Ok((0..=total).map(|s| cut_at_level(q, t, s as f64)).sum())
}

/// `W(S, S̄) / (w(S) · w(S̄))`.
pub fn sparsity(q: &ContractedGraph, s: &[usize]) -> Result<f64> {
    let k = q.k();
    let mut inside = vec![false; k];
    for &i in s {
        if i >= k {
            return Err(Error::NotSubset);
        }
        inside[i] = true;
    }
    let count = inside.iter().filter(|&&b| b).count();
    if count == 0 || count == k {
        return Err(Error::EmptyOrFullSet);
    }
    let mut cut = 0.0;
    let (mut ws, mut wc) = (0.0, 0.0);
    for i in 0..k {
        if inside[i] {
            ws += q.sizes()[i];
        } else {
            wc += q.sizes()[i];
        }
        for j in 0..k {
            if inside[i] && !inside[j] {
                cut += q.weight(i, j);
            }
        }
    }
    Ok(cut / (ws * wc))
}

/// Lexicographic order of the sorted member lists of two bitmasks.
fn lex_less(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    // members below the lowest differing element are shared
    let e = diff.trailing_zeros();
    let above = if e == 63 { 0 } else { u64::MAX << (e + 1) };
    if a >> e & 1 == 1 {
        b & above != 0
    } else {
        a & above == 0
    }
}

/// Exact minimum-sparsity cut over sets containing the first node, found by
/// Gray-code enumeration. Ties go to the lexicographically smallest set.
pub fn min_sparsity_cut(q: &ContractedGraph) -> Result<(Vec<usize>, f64)> {
    let all: Vec<usize> = (0..q.k()).collect();
    let (mask, sp) = min_cut_within(q, &all)?;
    Ok(((0..q.k()).filter(|&i| mask >> i & 1 == 1).collect(), sp))
}

/// Minimum-sparsity cut of the subgraph induced by `nodes`; returns the side
/// containing `nodes[0]` as a bitmask of original ids.
fn min_cut_within(q: &ContractedGraph, nodes: &[usize]) -> Result<(u64, f64)> {
    let m = nodes.len();
    if m > MAX_CUT_NODES {
        return Err(Error::TooManyNodes {
            k: m,
            cap: MAX_CUT_NODES,
        });
    }
    if m < 2 {
        return Err(Error::EmptyOrFullSet);
    }
    let w: Vec<f64> = nodes.iter().map(|&i| q.sizes()[i]).collect();
    let total: f64 = w.iter().sum();
    let wt = |a: usize, b: usize| q.weight(nodes[a], nodes[b]);
    let exact = |local: u64| -> f64 {
        let mut cut = 0.0;
        let mut ws = 0.0;
        for a in 0..m {
            if local >> a & 1 == 1 {
                ws += w[a];
                for b in 0..m {
                    if local >> b & 1 == 0 {
                        cut += wt(a, b);
                    }
                }
            }
        }
        cut / (ws * (total - ws))
    };
    let to_global = |local: u64| -> u64 { (0..m).filter(|&a| local >> a & 1 == 1).fold(0, |g, a| g | 1 << nodes[a]) };

    // `set` always contains local node 0; bits 1..m are flipped in Gray order
    let full: u64 = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut set: u64 = 1;
    let mut ws = w[0];
    let mut cut: f64 = (1..m).map(|b| wt(0, b)).sum();
    let mut best: Option<(u64, f64, u64)> = None;
    let steps: u64 = 1 << (m - 1);
    for step in 0..steps {
        if step > 0 {
            let bit = step.trailing_zeros() as usize + 1;
            let adding = set >> bit & 1 == 0;
            let mut delta = 0.0;
            for b in 0..m {
                if b != bit {
                    let x = wt(bit, b);
                    if set >> b & 1 == 1 {
                        delta -= x;
                    } else {
                        delta += x;
                    }
                }
            }
            if adding {
                cut += delta;
                ws += w[bit];
            } else {
                cut -= delta;
                ws -= w[bit];
            }
            set ^= 1 << bit;
        }
        if set == full {
            continue;
        }
        let sp = cut / (ws * (total - ws));
        let candidate = match best {
            None => true,
            Some((_, b, gmask)) => {
                let tol = 1e-9 * b.abs().max(1e-300);
                if sp < b - tol {
                    true
                } else if sp <= b + tol {
                    let e = exact(set);
                    let g = to_global(set);
                    e < b || (e == b && lex_less(g, gmask))
                } else {
                    false
                }
            }
        };
        if candidate {
            let e = exact(set);
            best = Some((set, e, to_global(set)));
        }
    }
    let (_, sp, g) = best.expect("at least one proper cut");
    Ok((g, sp))
}

/// Vertex-weighted recursive sparsest cut, splitting by exact minimum cuts.
pub fn wrsc(q: &ContractedGraph) -> Result<HierTree> {
    if q.k() > MAX_CUT_NODES {
        return Err(Error::TooManyNodes {
            k: q.k(),
            cap: MAX_CUT_NODES,
        });
    }
    let all: Vec<usize> = (0..q.k()).collect();
    wrsc_rec(q, &all)
}

fn wrsc_rec(q: &ContractedGraph, nodes: &[usize]) -> Result<HierTree> {
    if nodes.len() == 1 {
        return Ok(HierTree::leaf(nodes[0]));
    }
    let (mask, _) = min_cut_within(q, nodes)?;
    let (a, b): (Vec<usize>, Vec<usize>) = nodes.iter().partition(|&&i| mask >> i & 1 == 1);
    HierTree::join(vec![wrsc_rec(q, &a)?, wrsc_rec(q, &b)?])
}

/// Minimum weighted Dasgupta cost by dynamic programming over subsets.
pub fn optimal_tree_bruteforce(q: &ContractedGraph) -> Result<(HierTree, f64)> {
    let k = q.k();
    if k > MAX_BRUTEFORCE_NODES {
        return Err(Error::TooManyNodes {
            k,
            cap: MAX_BRUTEFORCE_NODES,
        });
    }
    if k == 0 {
        return Err(Error::Parameter("empty contracted graph".into()));
    }
    let full = (1usize << k) - 1;
    let mut weight = vec![0.0; full + 1];
    let mut inner = vec![0.0; full + 1];
    for s in 1..=full {
        let v = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        weight[s] = weight[rest] + q.sizes()[v];
        inner[s] = inner[rest] + (0..k).filter(|&u| rest >> u & 1 == 1).map(|u| q.weight(v, u)).sum::<f64>();
    }
    let mut opt = vec![0.0; full + 1];
    let mut split = vec![0usize; full + 1];
    let mut by_size: Vec<usize> = (1..=full).collect();
    by_size.sort_by_key(|s| s.count_ones());
    for s in by_size {
        if s.count_ones() == 1 {
            continue;
        }
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        let mut best = f64::INFINITY;
        let mut arg = 0;
        // A ranges over subsets of `s` that contain its lowest element
        let mut sub = rest;
        loop {
            let a = sub | low;
            if a != s {
                let b = s ^ a;
                let cross = inner[s] - inner[a] - inner[b];
                let c = weight[s] * cross + opt[a] + opt[b];
                if c < best {
                    best = c;
                    arg = a;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        opt[s] = best;
        split[s] = arg;
    }
    fn build(s: usize, split: &[usize]) -> HierTree {
        if s.count_ones() == 1 {
            return HierTree::leaf(s.trailing_zeros() as usize);
        }
        let a = split[s];
        HierTree::join(vec![build(a, split), build(s ^ a, split)]).expect("binary split")
    }
    Ok((build(full, &split), opt[full]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn q(k: usize, edges: &[(usize, usize, f64)], w: &[f64]) -> ContractedGraph {
        let mut m = DMatrix::zeros(k, k);
        for &(i, j, x) in edges {
            m[(i, j)] += x;
            m[(j, i)] += x;
        }
        ContractedGraph::new(m, w.to_vec()).unwrap()
    }

    fn path4() -> ContractedGraph {
        q(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)], &[1.0; 4])
    }

    /// Every binary tree over the given items.
    fn all_binary(items: &[usize]) -> Vec<HierTree> {
        if items.len() == 1 {
            return vec![HierTree::leaf(items[0])];
        }
        let first = items[0];
        let rest = &items[1..];
        let mut out = Vec::new();
        for mask in 0..(1u32 << rest.len()) - 1 {
            let mut a = vec![first];
            let mut b = Vec::new();
            for (i, &x) in rest.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    a.push(x);
                } else {
                    b.push(x);
                }
            }
            for ta in all_binary(&a) {
                for tb in all_binary(&b) {
                    out.push(HierTree::join(vec![ta.clone(), tb]).unwrap());
                }
            }
        }
        out
    }

    #[test]
    fn parse_and_print() {
        let t: HierTree = "((0,1),(2, 3))".parse().unwrap();
        assert_eq!(t.to_string(), "((0,1),(2,3))");
        assert!(t.is_binary());
        let n: HierTree = "(0,1,2)".parse().unwrap();
        assert!(!n.is_binary());
        assert!("(0)".parse::<HierTree>().is_err());
        assert!("(0,1".parse::<HierTree>().is_err());
        assert!("(0,1))".parse::<HierTree>().is_err());
    }

    #[test]
    fn small_dasgupta_costs() {
        let k2 = Graph::from_edges(2, 1, [(0, 1)]).unwrap();
        assert_eq!(dasgupta_cost(&k2, &"(0,1)".parse().unwrap()).unwrap(), 2.0);
        let k3 = Graph::from_edges(3, 2, [(0, 1), (1, 2), (0, 2)]).unwrap();
        for t in all_binary(&[0, 1, 2]) {
            assert_eq!(dasgupta_cost(&k3, &t).unwrap(), 8.0);
        }
        let c4 = cycle(4);
        assert_eq!(dasgupta_cost(&c4, &"((0,1),(2,3))".parse().unwrap()).unwrap(), 12.0);
        let best = all_binary(&[0, 1, 2, 3])
            .iter()
            .map(|t| dasgupta_cost(&c4, t).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(best, 12.0);
        assert!(matches!(dasgupta_cost(&c4, &"(0,1,2)".parse().unwrap()), Err(Error::LeafMismatch)));
        assert!(matches!(dasgupta_cost(&c4, &"((0,1),(2,2))".parse().unwrap()), Err(Error::LeafMismatch)));
    }

    #[test]
    fn weighted_cost_reduces_to_leaf_counts() {
        let (g, _) = two_cliques();
        let m = DMatrix::from_fn(8, 8, |i, j| if i == j { 0.0 } else { g.multiplicity(i, j) as f64 });
        let h = ContractedGraph::new(m, vec![1.0; 8]).unwrap();
        let t: HierTree = "(((0,1),(2,3)),((4,5),(6,7)))".parse().unwrap();
        assert_eq!(weighted_dasgupta_cost(&h, &t).unwrap(), dasgupta_cost(&g, &t).unwrap());
        let two = q(2, &[(0, 1, 3.0)], &[2.0, 5.0]);
        assert_eq!(weighted_dasgupta_cost(&two, &"(0,1)".parse().unwrap()).unwrap(), 21.0);
    }

    #[test]
    fn sparsity_examples() {
        let two = q(2, &[(0, 1, 1.0)], &[4.0, 4.0]);
        assert_eq!(sparsity(&two, &[0]).unwrap(), 1.0 / 16.0);
        let p = path4();
        assert_eq!(sparsity(&p, &[0, 1]).unwrap(), 0.25);
        assert!((sparsity(&p, &[0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(sparsity(&p, &[0, 2]).unwrap(), sparsity(&p, &[1, 3]).unwrap());
        assert!(matches!(sparsity(&p, &[]), Err(Error::EmptyOrFullSet)));
        assert!(matches!(sparsity(&p, &[0, 1, 2, 3]), Err(Error::EmptyOrFullSet)));
        assert!(matches!(sparsity(&p, &[9]), Err(Error::NotSubset)));
    }

    #[test]
    fn min_cut_examples() {
        assert_eq!(min_sparsity_cut(&path4()).unwrap(), (vec![0, 1], 0.25));
        let two = q(2, &[(0, 1, 1.0)], &[1.0, 2.0]);
        assert_eq!(min_sparsity_cut(&two).unwrap().0, vec![0]);
        let split = q(4, &[(0, 1, 2.0), (2, 3, 1.0)], &[1.0; 4]);
        let (s, sp) = min_sparsity_cut(&split).unwrap();
        assert_eq!(sp, 0.0);
        assert_eq!(s, vec![0, 1]);
        let big = ContractedGraph::new(DMatrix::zeros(25, 25), vec![1.0; 25]).unwrap();
        assert!(matches!(wrsc(&big), Err(Error::TooManyNodes { .. })));
    }

    #[test]
    fn tie_break_is_lexicographic() {
        // unit 4-cycle: {0,1}, {0,3} tie at 1/2; {0,1} is smaller
        let c = q(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)], &[1.0; 4]);
        assert_eq!(min_sparsity_cut(&c).unwrap(), (vec![0, 1], 0.5));
        assert!(lex_less(0b011, 0b101));
        assert!(lex_less(0b001, 0b011));
        assert!(!lex_less(0b011, 0b001));
        assert!(!lex_less(0b1011, 0b0011));
        assert!(lex_less(0b0011, 0b1011));
    }

    #[test]
    fn wrsc_and_bruteforce_examples() {
        let p = path4();
        let t = wrsc(&p).unwrap();
        assert_eq!(t.to_string(), "((0,1),(2,3))");
        assert_eq!(weighted_dasgupta_cost(&p, &t).unwrap(), 8.0);
        assert_eq!(optimal_tree_bruteforce(&p).unwrap().1, 8.0);
        let tri = q(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], &[1.0; 3]);
        assert_eq!(optimal_tree_bruteforce(&tri).unwrap().1, 8.0);
        let two = q(2, &[(0, 1, 1.0)], &[1.0, 1.0]);
        assert_eq!(wrsc(&two).unwrap().to_string(), "(0,1)");
        assert_eq!(optimal_tree_bruteforce(&two).unwrap().0.to_string(), "(0,1)");
        let single = q(1, &[], &[3.0]);
        assert_eq!(optimal_tree_bruteforce(&single).unwrap(), (HierTree::leaf(0), 0.0));
    }

    #[test]
    fn bruteforce_matches_enumeration() {
        let c = q(
            5,
            &[(0, 1, 3.0), (1, 2, 1.0), (2, 3, 2.0), (3, 4, 5.0), (0, 4, 1.0), (1, 3, 0.5)],
            &[1.0, 2.0, 1.0, 3.0, 1.0],
        );
        let best = all_binary(&[0, 1, 2, 3, 4])
            .iter()
            .map(|t| weighted_dasgupta_cost(&c, t).unwrap())
            .fold(f64::INFINITY, f64::min);
        let (t, cost) = optimal_tree_bruteforce(&c).unwrap();
        assert!((best - cost).abs() < 1e-9);
        assert!((weighted_dasgupta_cost(&c, &t).unwrap() - cost).abs() < 1e-9);
    }

    #[test]
    fn maximal_clusters_partition() {
        let t: HierTree = "((0,1),(2,(3,4)))".parse().unwrap();
        let w = [1.0, 1.0, 2.0, 1.0, 1.0];
        let mut c = maximal_clusters(&t, &w, 2.0);
        c.iter_mut().for_each(|x| x.sort());
        c.sort();
        assert_eq!(c, vec![vec![0, 1], vec![2], vec![3, 4]]);
        assert_eq!(maximal_clusters(&t, &w, 0.0).len(), 5);
        assert_eq!(maximal_clusters(&t, &w, 6.0).len(), 1);
    }

    fn arb_q() -> impl Strategy<Value = ContractedGraph> {
        (2usize..=7).prop_flat_map(|k| {
            (
                proptest::collection::vec(0u8..4, k * k),
                proptest::collection::vec(1u8..5, k),
            )
                .prop_map(move |(e, w)| {
                    let m = DMatrix::from_fn(k, k, |i, j| {
                        let (a, b) = (i.min(j), i.max(j));
                        if a == b { 0.0 } else { e[a * k + b] as f64 }
                    });
                    ContractedGraph::new(m, w.into_iter().map(f64::from).collect()).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn cost_as_cuts_identity(h in arb_q(), seed in any::<u64>()) {
            // a random binary tree built by random splits
            use rand::{Rng, SeedableRng};
            let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            fn random_tree(items: Vec<usize>, r: &mut rand_chacha::ChaCha8Rng) -> HierTree {
                if items.len() == 1 {
                    return HierTree::leaf(items[0]);
                }
                let (mut a, mut b) = (Vec::new(), Vec::new());
                for (i, &x) in items.iter().enumerate() {
                    match i {
                        0 => a.push(x),
                        1 => b.push(x),
                        _ if r.gen_bool(0.5) => a.push(x),
                        _ => b.push(x),
                    }
                }
                HierTree::join(vec![random_tree(a, r), random_tree(b, r)]).unwrap()
            }
            let t = random_tree((0..h.k()).collect(), &mut r);
            let direct = weighted_dasgupta_cost(&h, &t).unwrap();
            let cuts = cost_as_cuts(&h, &t).unwrap();
            prop_assert!((direct - cuts).abs() < 1e-9, "{direct} vs {cuts}");
        }

        #[test]
        fn wrsc_never_beats_optimum(h in arb_q()) {
            let t = wrsc(&h).unwrap();
            prop_assert!(t.is_binary());
            t.check_leaves(h.k()).unwrap();
            let (_, opt) = optimal_tree_bruteforce(&h).unwrap();
            prop_assert!(weighted_dasgupta_cost(&h, &t).unwrap() >= opt - 1e-9);
        }

        #[test]
        fn sparsity_symmetric(h in arb_q(), mask in 1u32..127) {
            let k = h.k();
            let s: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
            prop_assume!(!s.is_empty() && s.len() < k);
            let c: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 0).collect();
            let a = sparsity(&h, &s).unwrap();
            let b = sparsity(&h, &c).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            let (_, best) = min_sparsity_cut(&h).unwrap();
            prop_assert!(best <= a + 1e-12);
        }

        #[test]
        fn tree_text_roundtrip(h in arb_q()) {
            let t = wrsc(&h).unwrap();
            let back: HierTree = t.to_string().parse().unwrap();
            prop_assert_eq!(back.to_string(), t.to_string());
        }
    }
}
