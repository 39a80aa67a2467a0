//! Rooted binary trees over labeled leaves, queried through leaf triples.
//!
//! A query is an `m`-subset of the leaves; its components are the `C(m,3)` triples
//! inside it, in lexicographic order. The answer on a triple `x < y < z` is the
//! topology of the tree restricted to those three leaves, encoded by the pair
//! that merges first: 0 = `xy|z`, 1 = `xz|y`, 2 = `yz|x`.

use std::collections::HashMap;
use std::fmt;

use serde_json::json;

use super::HypothesisSpace;
use crate::error::{Error, Result};
use crate::protocol::{Answer, ComponentIndex, HypothesisId, QueryDistribution, QueryId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tree {
    Leaf(usize),
    Node(Box<Tree>, Box<Tree>),
}

impl Tree {
    pub fn node(left: Tree, right: Tree) -> Tree {
        Tree::Node(Box::new(left), Box::new(right))
    }

    pub fn min_leaf(&self) -> usize {
        match self {
            Tree::Leaf(x) => *x,
            Tree::Node(l, r) => l.min_leaf().min(r.min_leaf()),
        }
    }

    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            Tree::Leaf(x) => out.push(*x),
            Tree::Node(l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
        }
    }

    /// Children ordered by smallest leaf, recursively. Two trees are the same
    /// hierarchy iff their canonical forms are equal.
    pub fn canonical(self) -> Tree {
        match self {
            Tree::Leaf(x) => Tree::Leaf(x),
            Tree::Node(l, r) => {
                let (l, r) = (l.canonical(), r.canonical());
                if l.min_leaf() <= r.min_leaf() {
                    Tree::node(l, r)
                } else {
                    Tree::node(r, l)
                }
            }
        }
    }

    /// The tree induced on `keep`, with unary nodes contracted. `None` if no leaf survives.
    pub fn restrict(&self, keep: &[usize]) -> Option<Tree> {
        match self {
            Tree::Leaf(x) => keep.contains(x).then_some(Tree::Leaf(*x)),
            Tree::Node(l, r) => match (l.restrict(keep), r.restrict(keep)) {
                (Some(a), Some(b)) => Some(Tree::node(a, b)),
                (Some(a), None) | (None, Some(a)) => Some(a),
                (None, None) => None,
            },
        }
    }

    /// Root-to-leaf paths as left/right turns, indexed by leaf.
    fn paths(&self, n: usize) -> Vec<Vec<bool>> {
        fn walk(t: &Tree, prefix: &mut Vec<bool>, out: &mut [Vec<bool>]) {
            match t {
                Tree::Leaf(x) => out[*x] = prefix.clone(),
                Tree::Node(l, r) => {
                    prefix.push(false);
                    walk(l, prefix, out);
                    prefix.pop();
                    prefix.push(true);
                    walk(r, prefix, out);
                    prefix.pop();
                }
            }
        }
        let mut out = vec![Vec::new(); n];
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn to_newick(&self, labels: &[String]) -> String {
        format!("{};", self.newick_body(labels))
    }

    fn newick_body(&self, labels: &[String]) -> String {
        match self {
            Tree::Leaf(x) => labels[*x].clone(),
            Tree::Node(l, r) => format!("({},{})", l.newick_body(labels), r.newick_body(labels)),
        }
    }

    /// Parses a binary Newick string using `labels` as the leaf alphabet.
    pub fn from_newick(text: &str, labels: &[String]) -> Result<Tree> {
        let mut p = NewickParser {
            bytes: text.trim().as_bytes(),
            pos: 0,
            labels,
        };
        let tree = p.subtree()?;
        p.skip_ws();
        if p.peek() == Some(b';') {
            p.pos += 1;
        }
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(Error::Parse(format!("trailing input at byte {}", p.pos)));
        }
        let mut leaves = tree.leaves();
        leaves.sort_unstable();
        let n = leaves.len();
        leaves.dedup();
        if leaves.len() != n {
            return Err(Error::Parse("a leaf appears twice".into()));
        }
        Ok(tree)
    }
}

struct NewickParser<'a> {
    bytes: &'a [u8],
    pos: usize,
    labels: &'a [String],
}

impl NewickParser<'_> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "expected '{}' at byte {}",
                b as char, self.pos
            )))
        }
    }

    fn subtree(&mut self) -> Result<Tree> {
        self.skip_ws();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let left = self.subtree()?;
            self.expect(b',')?;
            let right = self.subtree()?;
            self.skip_ws();
            if self.peek() == Some(b',') {
                return Err(Error::Parse("only binary trees are supported".into()));
            }
            self.expect(b')')?;
            Ok(Tree::node(left, right))
        } else {
            let start = self.pos;
            while self
                .peek()
                .is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii");
            if name.is_empty() {
                return Err(Error::Parse(format!(
                    "expected a leaf label at byte {start}"
                )));
            }
            self.labels
                .iter()
                .position(|l| l == name)
                .map(Tree::Leaf)
                .ok_or_else(|| Error::Parse(format!("unknown leaf '{name}'")))
        }
    }
}

/// Topology of `tree` on leaves `x < y < z`.
pub fn triplet_topology(tree: &Tree, n: usize, triple: [usize; 3]) -> Answer {
    topology_from_paths(&tree.paths(n), triple)
}

fn topology_from_paths(paths: &[Vec<bool>], [x, y, z]: [usize; 3]) -> Answer {
    let common = |a: usize, b: usize| {
        paths[a]
            .iter()
            .zip(&paths[b])
            .take_while(|(p, q)| p == q)
            .count()
    };
    let (xy, xz, yz) = (common(x, y), common(x, z), common(y, z));
    if xy > xz && xy > yz {
        Answer(0)
    } else if xz > yz {
        Answer(1)
    } else {
        Answer(2)
    }
}

/// `(2n - 3)!!`, the number of rooted binary trees on `n >= 2` labeled leaves.
pub fn rooted_tree_count(n: usize) -> u128 {
    (1..n.max(2) as u128).map(|k| 2 * k - 1).product()
}

/// All rooted binary trees on leaves `0..n`, by inserting each new leaf above
/// every node of every tree on the previous leaves.
pub fn enumerate_trees(n: usize) -> Vec<Tree> {
    fn insert_everywhere(t: &Tree, leaf: usize, out: &mut Vec<Tree>) {
        out.push(Tree::node(t.clone(), Tree::Leaf(leaf)));
        if let Tree::Node(l, r) = t {
            let mut below = Vec::new();
            insert_everywhere(l, leaf, &mut below);
            out.extend(below.into_iter().map(|nl| Tree::node(nl, (**r).clone())));
            let mut below = Vec::new();
            insert_everywhere(r, leaf, &mut below);
            out.extend(below.into_iter().map(|nr| Tree::node((**l).clone(), nr)));
        }
    }
    if n == 0 {
        return Vec::new();
    }
    let mut trees = vec![Tree::Leaf(0)];
    for leaf in 1..n {
        let mut next = Vec::with_capacity(trees.len() * (2 * leaf - 1));
        for t in &trees {
            insert_everywhere(t, leaf, &mut next);
        }
        trees = next;
    }
    trees.into_iter().map(Tree::canonical).collect()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Labels `a, b, c, ...` for up to 26 leaves, `x1, x2, ...` beyond.
pub fn default_labels(n: usize) -> Vec<String> {
    if n <= 26 {
        (0..n)
            .map(|i| ((b'a' + i as u8) as char).to_string())
            .collect()
    } else {
        (1..=n).map(|i| format!("x{i}")).collect()
    }
}

pub struct TripletTreeSpace {
    labels: Vec<String>,
    subset_size: usize,
    trees: Vec<Tree>,
    by_newick: HashMap<String, usize>,
    /// Topology of each tree on each leaf triple, `[tree][triple]`.
    topologies: Vec<Vec<u8>>,
    triples: Vec<[usize; 3]>,
    queries: Vec<Vec<usize>>,
    /// Global triple index of each component of each query.
    query_triples: Vec<Vec<usize>>,
    target: HypothesisId,
    distribution: QueryDistribution,
}

impl fmt::Debug for TripletTreeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TripletTreeSpace")
            .field("leaves", &self.labels.len())
            .field("subset_size", &self.subset_size)
            .field("trees", &self.trees.len())
            .finish()
    }
}

impl TripletTreeSpace {
    pub fn new(leaves: usize, subset_size: usize, cap: usize) -> Result<Self> {
        if leaves < 3 {
            return Err(Error::MalformedSpec("need at least 3 leaves".into()));
        }
        if subset_size < 3 || subset_size > leaves {
            return Err(Error::MalformedSpec(format!(
                "query subset size m = {subset_size} must satisfy 3 <= m <= n = {leaves}"
            )));
        }
        let size = rooted_tree_count(leaves);
        if size > cap as u128 {
            return Err(Error::BudgetExceeded { size, cap });
        }
        let labels = default_labels(leaves);
        let trees = enumerate_trees(leaves);
        let triples: Vec<[usize; 3]> = combinations(leaves, 3)
            .into_iter()
            .map(|t| [t[0], t[1], t[2]])
            .collect();
        let triple_index: HashMap<[usize; 3], usize> =
            triples.iter().enumerate().map(|(i, t)| (*t, i)).collect();
        let topologies = trees
            .iter()
            .map(|t| {
                let paths = t.paths(leaves);
                triples
                    .iter()
                    .map(|&tr| topology_from_paths(&paths, tr).0)
                    .collect()
            })
            .collect();
        let queries = combinations(leaves, subset_size);
        let query_triples = queries
            .iter()
            .map(|q| {
                combinations(q.len(), 3)
                    .into_iter()
                    .map(|c| triple_index[&[q[c[0]], q[c[1]], q[c[2]]]])
                    .collect()
            })
            .collect();
        let by_newick = trees
            .iter()
            .enumerate()
            .map(|(i, t)| (t.to_newick(&labels), i))
            .collect();
        let distribution = QueryDistribution::uniform(queries.len())?;
        Ok(Self {
            labels,
            subset_size,
            trees,
            by_newick,
            topologies,
            triples,
            queries,
            query_triples,
            target: HypothesisId(0),
            distribution,
        })
    }

    /// Uses the tree given in Newick form as the target.
    pub fn with_target_newick(mut self, newick: &str) -> Result<Self> {
        self.target = self.find(newick)?;
        Ok(self)
    }

    pub fn with_target(mut self, h: HypothesisId) -> Result<Self> {
        if h.0 >= self.trees.len() {
            return Err(Error::InvalidHypothesis(h.0, self.trees.len()));
        }
        self.target = h;
        Ok(self)
    }

    /// Hypothesis id of the tree written in Newick form.
    pub fn find(&self, newick: &str) -> Result<HypothesisId> {
        let tree = Tree::from_newick(newick, &self.labels)?;
        if tree.leaves().len() != self.labels.len() {
            return Err(Error::Parse(format!(
                "tree has {} leaves, the space has {}",
                tree.leaves().len(),
                self.labels.len()
            )));
        }
        let key = tree.canonical().to_newick(&self.labels);
        self.by_newick
            .get(&key)
            .map(|&i| HypothesisId(i))
            .ok_or_else(|| Error::Parse(format!("tree {key} not enumerated")))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn tree(&self, h: HypothesisId) -> &Tree {
        &self.trees[h.0]
    }

    pub fn query_leaves(&self, q: QueryId) -> &[usize] {
        &self.queries[q.0]
    }

    pub fn component_triple(&self, q: QueryId, j: ComponentIndex) -> [usize; 3] {
        self.triples[self.query_triples[q.0][j.0]]
    }

    /// Newick text of `h` restricted to the leaves of `q`.
    pub fn restriction_newick(&self, h: HypothesisId, q: QueryId) -> String {
        self.trees[h.0]
            .restrict(&self.queries[q.0])
            .expect("queries are non-empty")
            .canonical()
            .to_newick(&self.labels)
    }

    /// Text form of a topology on a triple, e.g. `ab|c`.
    pub fn topology_label(&self, [x, y, z]: [usize; 3], a: Answer) -> String {
        let l = &self.labels;
        match a.0 {
            0 => format!("{}{}|{}", l[x], l[y], l[z]),
            1 => format!("{}{}|{}", l[x], l[z], l[y]),
            _ => format!("{}{}|{}", l[y], l[z], l[x]),
        }
    }
}

impl HypothesisSpace for TripletTreeSpace {
    fn kind(&self) -> &'static str {
        "triplet"
    }

    fn describe(&self) -> String {
        format!("triplet(n={}, m={})", self.labels.len(), self.subset_size)
    }

    fn num_hypotheses(&self) -> usize {
        self.trees.len()
    }

    fn num_queries(&self) -> usize {
        self.queries.len()
    }

    fn components(&self) -> usize {
        self.query_triples[0].len()
    }

    fn alphabet_size(&self) -> usize {
        3
    }

    fn distribution(&self) -> &QueryDistribution {
        &self.distribution
    }

    fn answer(&self, h: HypothesisId, q: QueryId, j: ComponentIndex) -> Answer {
        Answer(self.topologies[h.0][self.query_triples[q.0][j.0]])
    }

    fn default_target(&self) -> HypothesisId {
        self.target
    }

    fn render_hypothesis(&self, h: HypothesisId) -> String {
        self.trees[h.0].to_newick(&self.labels)
    }

    fn render_component(&self, q: QueryId, j: ComponentIndex) -> String {
        let [x, y, z] = self.component_triple(q, j);
        format!(
            "{{{},{},{}}}",
            self.labels[x], self.labels[y], self.labels[z]
        )
    }

    fn render_answer(&self, q: QueryId, j: ComponentIndex, a: Answer) -> String {
        self.topology_label(self.component_triple(q, j), a)
    }

    fn render_display(&self, h: HypothesisId, q: QueryId) -> Option<String> {
        Some(self.restriction_newick(h, q))
    }

    fn parse_hypothesis(&self, text: &str) -> Option<HypothesisId> {
        match text.trim().parse::<usize>() {
            Ok(i) => (i < self.trees.len()).then_some(HypothesisId(i)),
            Err(_) => self.find(text).ok(),
        }
    }

    fn query_payload(&self, q: QueryId) -> serde_json::Value {
        let leaves: Vec<&str> = self.queries[q.0]
            .iter()
            .map(|&i| self.labels[i].as_str())
            .collect();
        let triplets: Vec<serde_json::Value> = (0..self.components())
            .map(|j| {
                let triple = self.component_triple(q, ComponentIndex(j));
                let options: Vec<String> = (0..3)
                    .map(|a| self.topology_label(triple, Answer(a)))
                    .collect();
                json!({
                    "component": j,
                    "leaves": triple.iter().map(|&i| self.labels[i].as_str()).collect::<Vec<_>>(),
                    "options": options,
                })
            })
            .collect();
        json!({ "query": q.0, "leaves": leaves, "triplets": triplets })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn labels4() -> Vec<String> {
        default_labels(4)
    }

    #[test]
    fn tree_counts_match_brute_force() {
        // (2n-3)!!: 1, 3, 15, 105, 945
        for (n, expected) in [(2, 1), (3, 3), (4, 15), (5, 105), (6, 945)] {
            let trees = enumerate_trees(n);
            assert_eq!(trees.len(), expected, "n = {n}");
            assert_eq!(rooted_tree_count(n), expected as u128);
            let distinct: HashSet<String> = trees
                .iter()
                .map(|t| t.to_newick(&default_labels(n)))
                .collect();
            assert_eq!(distinct.len(), expected, "duplicates at n = {n}");
        }
    }

    #[test]
    fn newick_round_trip_and_topology() {
        let l = labels4();
        let t = Tree::from_newick("((a,b),(c,d));", &l).unwrap();
        assert_eq!(t.to_newick(&l), "((a,b),(c,d));");
        assert_eq!(triplet_topology(&t, 4, [0, 1, 2]), Answer(0)); // ab|c
        assert_eq!(triplet_topology(&t, 4, [0, 2, 3]), Answer(2)); // cd|a
        let swapped = Tree::from_newick("((d,c),(b,a))", &l).unwrap().canonical();
        assert_eq!(swapped, t.canonical());
        assert!(Tree::from_newick("((a,b,c),d);", &l).is_err());
        assert!(Tree::from_newick("((a,a),(c,d));", &l).is_err());
        assert!(Tree::from_newick("((a,b),(c,e));", &l).is_err());
    }

    #[test]
    fn space_answers_are_restrictions() {
        let s = TripletTreeSpace::new(4, 4, 1_000_000).unwrap();
        assert_eq!(s.num_hypotheses(), 15);
        assert_eq!(s.components(), 4);
        assert_eq!(s.num_queries(), 1);
        let h = s.find("((a,b),(c,d));").unwrap();
        let q = QueryId(0);
        // components in lexicographic order: abc, abd, acd, bcd
        assert_eq!(
            s.render_answer(q, ComponentIndex(0), s.answer(h, q, ComponentIndex(0))),
            "ab|c"
        );
        assert_eq!(
            s.render_answer(q, ComponentIndex(2), s.answer(h, q, ComponentIndex(2))),
            "cd|a"
        );
        assert_eq!(s.restriction_newick(h, q), "((a,b),(c,d));");
    }

    #[test]
    fn triplets_identify_trees() {
        for n in 3..=6 {
            let s = TripletTreeSpace::new(n, 3, 1_000_000).unwrap();
            let distinct: HashSet<&Vec<u8>> = s.topologies.iter().collect();
            assert_eq!(distinct.len(), s.num_hypotheses(), "n = {n}");
        }
    }

    #[test]
    fn restriction_drops_unary_nodes() {
        let l = default_labels(5);
        let t = Tree::from_newick("(((a,b),c),(d,e));", &l).unwrap();
        let r = t.restrict(&[0, 2, 3]).unwrap();
        assert_eq!(r.to_newick(&l), "((a,c),d);");
    }

    #[test]
    fn budget_cap() {
        assert!(matches!(
            TripletTreeSpace::new(9, 4, 1_000_000),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
