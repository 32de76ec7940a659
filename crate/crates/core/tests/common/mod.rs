//! Random inputs and brute-force reference implementations shared by the
//! integration tests and the acceptance runner.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;

use dpg_core::dataset::Dataset;
use dpg_core::dpg::{Dpg, DpgEdge, Provenance};
use dpg_core::ensemble::{
    ClassSchema, Condition, Decision, DecisionTree, FeatureSchema, Predicate, SplitRule, TreeEnsemble, TreeNode,
};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Thresholds sit near a quarter-unit grid with small offsets, so distinct
/// raw thresholds often collapse to one canonical predicate.
fn threshold<R: Rng>(rng: &mut R) -> f64 {
    let base = rng.random_range(-16i32..=16) as f64 * 0.25;
    let jitter = [0.0, 0.001, -0.001, 0.004, -0.004, 0.13][rng.random_range(0..6)];
    base + jitter
}

struct Shape {
    max_depth: usize,
    leaf_prob: f64,
    features: usize,
    classes: usize,
}

fn grow<R: Rng>(rng: &mut R, nodes: &mut Vec<TreeNode>, depth: usize, s: &Shape) -> usize {
    let (f, k) = (s.features, s.classes);
    let id = nodes.len();
    if depth == s.max_depth || (depth > 0 && rng.random_bool(s.leaf_prob)) {
        nodes.push(TreeNode::Leaf { class: rng.random_range(0..k) });
        return id;
    }
    nodes.push(TreeNode::Leaf { class: 0 });
    let feature = rng.random_range(0..f);
    let t = threshold(rng);
    let left = grow(rng, nodes, depth + 1, s);
    let right = grow(rng, nodes, depth + 1, s);
    nodes[id] = TreeNode::Split { feature, rule: SplitRule::Threshold(t), left, right };
    id
}

pub fn random_tree<R: Rng>(rng: &mut R, n_features: usize, n_classes: usize, max_depth: usize) -> DecisionTree {
    let mut nodes = Vec::new();
    let shape = Shape { max_depth, leaf_prob: 0.25, features: n_features, classes: n_classes };
    let root = grow(rng, &mut nodes, 0, &shape);
    DecisionTree { root, nodes }
}

/// Every leaf at exactly `depth`.
pub fn full_tree<R: Rng>(rng: &mut R, n_features: usize, n_classes: usize, depth: usize) -> DecisionTree {
    let mut nodes = Vec::new();
    let shape = Shape { max_depth: depth, leaf_prob: 0.0, features: n_features, classes: n_classes };
    let root = grow(rng, &mut nodes, 0, &shape);
    DecisionTree { root, nodes }
}

pub fn random_ensemble<R: Rng>(
    rng: &mut R,
    n_trees: usize,
    n_features: usize,
    n_classes: usize,
    max_depth: usize,
) -> TreeEnsemble {
    let trees = (0..n_trees).map(|_| random_tree(rng, n_features, n_classes, max_depth)).collect();
    TreeEnsemble::new(
        FeatureSchema::numeric(names("f", n_features)).unwrap(),
        ClassSchema::new(names("c", n_classes)).unwrap(),
        trees,
        Default::default(),
    )
    .unwrap()
}

pub fn random_dataset<R: Rng>(rng: &mut R, n_rows: usize, n_features: usize) -> Dataset {
    let rows = (0..n_rows)
        .map(|_| (0..n_features).map(|_| (rng.random_range(-4000..=4000) as f64) / 1000.0).collect())
        .collect();
    Dataset::new(FeatureSchema::numeric(names("f", n_features)).unwrap(), rows).unwrap()
}

/// Nearest multiple of `10^-decimals`, ties to even. Exact for the grid used
/// by `random_tree`, which never lands on a tie.
fn round(t: f64, decimals: u32) -> f64 {
    let s = 10f64.powi(decimals as i32);
    (t * s).round_ties_even() / s
}

/// Root-to-leaf predicates for `x`, walking the node table directly.
pub fn oracle_trace(tree: &DecisionTree, x: &[f64], decimals: u32) -> Vec<Predicate> {
    let mut out = Vec::new();
    let mut id = tree.root;
    loop {
        match &tree.nodes[id] {
            TreeNode::Leaf { class } => {
                out.push(Predicate::Class(*class));
                return out;
            }
            TreeNode::Split { feature, rule: SplitRule::Threshold(t), left, right } => {
                let r = round(*t, decimals);
                if x[*feature] <= *t {
                    out.push(Predicate::Decision(Decision::le(*feature, r).unwrap()));
                    id = *left;
                } else {
                    out.push(Predicate::Decision(Decision::gt(*feature, r).unwrap()));
                    id = *right;
                }
            }
            TreeNode::Split { .. } => panic!("oracle handles numeric splits only"),
        }
    }
}

pub struct TraceCounts {
    pub edges: HashMap<(Predicate, Predicate), u64>,
    pub starts: HashMap<Predicate, u64>,
    pub total_transitions: u64,
}

/// Recounts every transition of every (tree, sample) trace.
pub fn recount(m: &TreeEnsemble, d: &Dataset, decimals: u32) -> TraceCounts {
    let mut c = TraceCounts { edges: HashMap::new(), starts: HashMap::new(), total_transitions: 0 };
    for tree in m.trees() {
        for x in d.rows() {
            let steps = oracle_trace(tree, x, decimals);
            *c.starts.entry(steps[0].clone()).or_insert(0) += 1;
            for w in steps.windows(2) {
                *c.edges.entry((w[0].clone(), w[1].clone())).or_insert(0) += 1;
                c.total_transitions += 1;
            }
        }
    }
    c
}

/// Random graph with `n` nodes, two of them class sinks, at random
/// positions. Decisions link to any node with probability `p`, self-loops
/// included.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Dpg {
    assert!(n >= 2);
    let mut preds: Vec<Predicate> =
        (0..n - 2).map(|i| Predicate::Decision(Decision::le(0, i as f64).unwrap())).collect();
    preds.push(Predicate::Class(0));
    preds.push(Predicate::Class(1));
    preds.shuffle(rng);
    let mut edges = Vec::new();
    for (u, pred) in preds.iter().enumerate() {
        if pred.is_class() {
            continue;
        }
        for v in 0..n {
            if rng.random_bool(p) {
                edges.push(DpgEdge { src: u, dst: v, weight: rng.random_range(1..=5) });
            }
        }
    }
    Dpg::from_parts(preds, edges, vec![0; n], provenance(1, 2)).unwrap()
}

/// Two random graphs side by side with no edge between them.
pub fn disjoint_pair<R: Rng>(rng: &mut R, n_a: usize, n_b: usize, p: f64) -> (Dpg, usize) {
    let a = random_graph(rng, n_a, p);
    let b = random_graph(rng, n_b, p);
    let mut preds: Vec<Predicate> = a.nodes().iter().map(|n| n.predicate.clone()).collect();
    // Shift b's decisions onto a second feature and its classes to 2 and 3.
    for n in b.nodes() {
        preds.push(match &n.predicate {
            Predicate::Class(c) => Predicate::Class(c + 2),
            Predicate::Decision(d) => Predicate::Decision(Decision { feature: 1, condition: d.condition.clone() }),
        });
    }
    let mut edges: Vec<DpgEdge> = a.edges().to_vec();
    edges.extend(b.edges().iter().map(|e| DpgEdge { src: e.src + n_a, dst: e.dst + n_a, weight: e.weight }));
    let g = Dpg::from_parts(preds, edges, vec![0; n_a + n_b], provenance(2, 4)).unwrap();
    (g, n_a)
}

pub fn provenance(n_features: usize, n_classes: usize) -> Provenance {
    Provenance {
        features: names("f", n_features),
        classes: names("c", n_classes),
        decimals: 2,
        trees: 1,
        samples: 1,
        model: Default::default(),
    }
}

fn adjacency(g: &Dpg) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; g.len()]; g.len()];
    for e in g.edges() {
        a[e.src][e.dst] = true;
    }
    a
}

/// Betweenness by shortest-path counting: distances by Floyd-Warshall,
/// path counts as walk counts of the shortest length from adjacency matrix
/// powers, then `sigma(s,v) * sigma(v,t) / sigma(s,t)` summed over pairs.
pub fn brute_force_betweenness(g: &Dpg) -> Vec<f64> {
    let n = g.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let a = adjacency(g);
    const INF: usize = usize::MAX / 4;
    let mut dist = vec![vec![INF; n]; n];
    for i in 0..n {
        dist[i][i] = 0;
        for j in 0..n {
            if i != j && a[i][j] {
                dist[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if dist[i][k] + dist[k][j] < dist[i][j] {
                    dist[i][j] = dist[i][k] + dist[k][j];
                }
            }
        }
    }
    // walks[l][i][j]: number of walks of exactly l edges.
    let mut walks = vec![identity(n)];
    let am: Vec<Vec<u128>> = a.iter().map(|r| r.iter().map(|&b| u128::from(b)).collect()).collect();
    for l in 1..n {
        let prev = &walks[l - 1];
        let mut next = vec![vec![0u128; n]; n];
        for i in 0..n {
            for k in 0..n {
                if prev[i][k] == 0 {
                    continue;
                }
                for j in 0..n {
                    next[i][j] += prev[i][k] * am[k][j];
                }
            }
        }
        walks.push(next);
    }
    let sigma = |s: usize, t: usize| -> u128 {
        if s == t {
            1
        } else if dist[s][t] >= INF {
            0
        } else {
            walks[dist[s][t]][s][t]
        }
    };
    let mut bc = vec![0.0; n];
    for v in 0..n {
        for s in 0..n {
            for t in 0..n {
                if s == t || s == v || t == v || dist[s][t] >= INF {
                    continue;
                }
                if dist[s][v] < INF && dist[v][t] < INF && dist[s][v] + dist[v][t] == dist[s][t] {
                    bc[v] += (sigma(s, v) * sigma(v, t)) as f64 / sigma(s, t) as f64;
                }
            }
        }
    }
    let norm = ((n - 1) * (n - 2)) as f64;
    bc.iter().map(|b| b / norm).collect()
}

fn identity(n: usize) -> Vec<Vec<u128>> {
    (0..n).map(|i| (0..n).map(|j| u128::from(i == j)).collect()).collect()
}

/// Nodes reachable from `v` by recursive DFS, `v` itself excluded unless on
/// a cycle through it.
pub fn dfs_reachable(g: &Dpg, v: usize) -> Vec<bool> {
    fn go(a: &[Vec<usize>], u: usize, seen: &mut [bool]) {
        for &w in &a[u] {
            if !seen[w] {
                seen[w] = true;
                go(a, w, seen);
            }
        }
    }
    let mut a = vec![Vec::new(); g.len()];
    for e in g.edges() {
        a[e.src].push(e.dst);
    }
    let mut seen = vec![false; g.len()];
    go(&a, v, &mut seen);
    seen
}

pub fn reachable_fraction(g: &Dpg, v: usize) -> f64 {
    if g.len() < 2 {
        return 0.0;
    }
    let seen = dfs_reachable(g, v);
    let count = seen.iter().enumerate().filter(|&(u, &s)| s && u != v).count();
    count as f64 / (g.len() - 1) as f64
}

/// A simple path `v -> ... -> target` found by backtracking search, if any.
pub fn witness_path(g: &Dpg, v: usize, target: usize) -> Option<Vec<usize>> {
    let mut a = vec![Vec::new(); g.len()];
    for e in g.edges() {
        a[e.src].push(e.dst);
    }
    // Nodes proven unable to reach `target`; keeps the search polynomial.
    let mut dead = vec![false; g.len()];
    let mut on_path = vec![false; g.len()];
    let mut path = vec![v];
    on_path[v] = true;
    fn search(a: &[Vec<usize>], target: usize, path: &mut Vec<usize>, on: &mut [bool], dead: &mut [bool]) -> bool {
        let u = *path.last().unwrap();
        if u == target {
            return true;
        }
        for &w in &a[u] {
            if on[w] || dead[w] {
                continue;
            }
            path.push(w);
            on[w] = true;
            if search(a, target, path, on, dead) {
                return true;
            }
            on[w] = false;
            path.pop();
        }
        dead[u] = true;
        false
    }
    search(&a, target, &mut path, &mut on_path, &mut dead).then_some(path)
}

/// Reference per-feature bounds for `class`: `(feature -> (lower, upper))`
/// over every decision lying on some path into the class node.
pub fn brute_force_constraints(g: &Dpg, class: usize) -> BTreeMap<usize, (f64, f64)> {
    let target = g.nodes().iter().position(|n| n.predicate == Predicate::Class(class)).unwrap();
    let mut gts: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut les: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for v in 0..g.len() {
        let Predicate::Decision(d) = g.predicate(v) else { continue };
        let Some(path) = witness_path(g, v, target) else { continue };
        assert_eq!(*path.last().unwrap(), target);
        for w in path.windows(2) {
            assert!(g.edges().iter().any(|e| e.src == w[0] && e.dst == w[1]));
        }
        match &d.condition {
            Condition::Gt(t) => gts.entry(d.feature).or_default().push(t.value()),
            Condition::Le(t) => les.entry(d.feature).or_default().push(t.value()),
            _ => panic!("numeric graphs only"),
        }
    }
    let mut out = BTreeMap::new();
    for f in gts.keys().chain(les.keys()) {
        let lower = gts.get(f).map_or(f64::NEG_INFINITY, |v| v.iter().copied().fold(f64::INFINITY, f64::min));
        let upper = les.get(f).map_or(f64::INFINITY, |v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        out.insert(*f, (lower, upper));
    }
    out
}
