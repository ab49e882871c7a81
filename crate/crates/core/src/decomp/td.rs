use std::cmp::Ordering;
use std::fmt::Write;

use crate::epquery::Graph;
use crate::sharpcore::set_text;
use crate::{Error, Result, Var, VarSet};

/// A rooted tree decomposition; exactly one node has no parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<VarSet>,
    pub parent: Vec<Option<usize>>,
}

impl TreeDecomposition {
    pub fn single(bag: VarSet) -> Self {
        TreeDecomposition {
            bags: vec![bag],
            parent: vec![None],
        }
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn add_node(&mut self, bag: VarSet, parent: Option<usize>) -> usize {
        self.bags.push(bag);
        self.parent.push(parent);
        self.bags.len() - 1
    }

    pub fn root(&self) -> usize {
        self.parent
            .iter()
            .position(Option::is_none)
            .expect("a decomposition has a root")
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len()];
        for (i, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                out[*p].push(i);
            }
        }
        out
    }

    pub fn depth(&self, mut t: usize) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent[t] {
            d += 1;
            t = p;
        }
        d
    }

    pub fn is_ancestor_or_self(&self, anc: usize, mut t: usize) -> bool {
        loop {
            if t == anc {
                return true;
            }
            match self.parent[t] {
                Some(p) => t = p,
                None => return false,
            }
        }
    }

    /// Largest bag size.
    pub fn max_bag(&self) -> usize {
        self.bags.iter().map(VarSet::len).max().unwrap_or(0)
    }

    /// Largest bag size minus one; 0 when every bag is empty.
    pub fn width(&self) -> usize {
        self.max_bag().saturating_sub(1)
    }

    /// Highest node whose bag holds `v`.
    pub fn top(&self, v: &str) -> Option<usize> {
        (0..self.len())
            .filter(|&t| self.bags[t].contains(v))
            .min_by_key(|&t| (self.depth(t), t))
    }

    /// Checks tree shape, vertex and edge coverage and connectivity.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let roots = self.parent.iter().filter(|p| p.is_none()).count();
        if roots != 1 {
            return Err(Error::pre(format!("decomposition has {roots} roots")));
        }
        for t in 0..self.len() {
            let mut seen = 0;
            let mut u = t;
            while let Some(p) = self.parent[u] {
                u = p;
                seen += 1;
                if seen > self.len() {
                    return Err(Error::pre("decomposition has a cycle"));
                }
            }
        }
        for v in g.names() {
            let holders: Vec<usize> = (0..self.len()).filter(|&t| self.bags[t].contains(v)).collect();
            if holders.is_empty() {
                return Err(Error::pre(format!("vertex {v} is in no bag")));
            }
            // Connected iff exactly one holder has a parent outside the holders.
            let tops = holders
                .iter()
                .filter(|&&t| self.parent[t].is_none_or(|p| !self.bags[p].contains(v)))
                .count();
            if tops != 1 {
                return Err(Error::pre(format!("bags holding {v} are not connected")));
            }
        }
        for (a, b) in g.edges() {
            let (a, b) = (g.name(a), g.name(b));
            if !self.bags.iter().any(|bag| bag.contains(a) && bag.contains(b)) {
                return Err(Error::pre(format!("edge {a}-{b} is not covered")));
            }
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        render(self, |_| "-".to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Leaf,
    Introduce(Var),
    Forget(Var),
    Join,
}

impl NodeKind {
    pub fn label(&self) -> &'static str {
        match self {
            NodeKind::Leaf => "leaf",
            NodeKind::Introduce(_) => "introduce",
            NodeKind::Forget(_) => "forget",
            NodeKind::Join => "join",
        }
    }
}

/// A nice decomposition whose root bag is empty. The decomposition of the
/// empty graph is a single leaf with an empty bag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceTreeDecomposition {
    pub td: TreeDecomposition,
    pub kinds: Vec<NodeKind>,
}

impl NiceTreeDecomposition {
    pub fn root(&self) -> usize {
        self.td.root()
    }

    pub fn max_bag(&self) -> usize {
        self.td.max_bag()
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        self.td.validate(g)?;
        let td = &self.td;
        if !td.bags[td.root()].is_empty() {
            return Err(Error::pre("root bag is not empty"));
        }
        let children = td.children();
        for (t, ch) in children.iter().enumerate() {
            let bag = &td.bags[t];
            let ok = match &self.kinds[t] {
                NodeKind::Leaf => ch.is_empty() && (bag.len() == 1 || td.len() == 1 && bag.is_empty()),
                NodeKind::Introduce(v) => {
                    ch.len() == 1 && bag.contains(v) && !td.bags[ch[0]].contains(v) && {
                        let mut b = td.bags[ch[0]].clone();
                        b.insert(v.clone());
                        &b == bag
                    }
                }
                NodeKind::Forget(v) => {
                    ch.len() == 1 && !bag.contains(v) && td.bags[ch[0]].contains(v) && {
                        let mut b = td.bags[ch[0]].clone();
                        b.remove(v);
                        &b == bag
                    }
                }
                NodeKind::Join => ch.len() == 2 && ch.iter().all(|&c| &td.bags[c] == bag),
            };
            if !ok {
                return Err(Error::pre(format!("node {t} is not a valid {}", self.kinds[t].label())));
            }
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        render(&self.td, |t| self.kinds[t].label().to_string())
    }
}

fn render(td: &TreeDecomposition, kind: impl Fn(usize) -> String) -> String {
    let mut out = String::new();
    for t in 0..td.len() {
        let parent = td.parent[t].map_or("none".to_string(), |p| p.to_string());
        let _ = writeln!(out, "node {t} parent {parent} kind {} bag {}", kind(t), set_text(&td.bags[t]));
    }
    out
}

struct NiceBuilder<'a, F> {
    src: &'a TreeDecomposition,
    children: Vec<Vec<usize>>,
    forget_before: F,
    out: TreeDecomposition,
    kinds: Vec<NodeKind>,
}

impl<F: Fn(&str, &str) -> Ordering> NiceBuilder<'_, F> {
    fn node(&mut self, bag: VarSet, kind: NodeKind, kids: &[usize]) -> usize {
        let id = self.out.add_node(bag, None);
        self.kinds.push(kind);
        for &k in kids {
            self.out.parent[k] = Some(id);
        }
        id
    }

    /// Forgets then introduces until the top bag equals `target`.
    fn chain(&mut self, mut top: usize, target: &VarSet) -> usize {
        let mut drop: Vec<Var> = self.out.bags[top].difference(target).cloned().collect();
        drop.sort_by(|a, b| (self.forget_before)(a, b));
        for v in drop {
            let mut bag = self.out.bags[top].clone();
            bag.remove(&v);
            top = self.node(bag, NodeKind::Forget(v), &[top]);
        }
        let add: Vec<Var> = target.difference(&self.out.bags[top]).cloned().collect();
        for v in add {
            let mut bag = self.out.bags[top].clone();
            bag.insert(v.clone());
            top = self.node(bag, NodeKind::Introduce(v), &[top]);
        }
        top
    }

    fn build(&mut self, t: usize) -> Option<usize> {
        let bag = self.src.bags[t].clone();
        let kids = self.children[t].clone();
        let mut tops = Vec::new();
        for c in kids {
            if let Some(top) = self.build(c) {
                tops.push(self.chain(top, &bag));
            }
        }
        if tops.is_empty() {
            let mut vars = bag.iter();
            let first = vars.next()?;
            let mut top = self.node(std::iter::once(first.clone()).collect(), NodeKind::Leaf, &[]);
            for v in vars {
                let mut b = self.out.bags[top].clone();
                b.insert(v.clone());
                top = self.node(b, NodeKind::Introduce(v.clone()), &[top]);
            }
            return Some(top);
        }
        let mut acc = tops[0];
        for &next in &tops[1..] {
            acc = self.node(bag.clone(), NodeKind::Join, &[acc, next]);
        }
        Some(acc)
    }
}

/// Nice form rooted at `root` with an empty root bag. Along each chain,
/// vertices are forgotten in the order given by `forget_before`.
pub fn make_nice_with<F>(td: &TreeDecomposition, root: usize, forget_before: F) -> NiceTreeDecomposition
where
    F: Fn(&str, &str) -> Ordering,
{
    let mut rerooted = td.clone();
    reroot(&mut rerooted, root);
    let mut b = NiceBuilder {
        children: rerooted.children(),
        src: &rerooted,
        forget_before,
        out: TreeDecomposition {
            bags: Vec::new(),
            parent: Vec::new(),
        },
        kinds: Vec::new(),
    };
    match b.build(root) {
        Some(top) => {
            b.chain(top, &VarSet::new());
        }
        None => {
            b.node(VarSet::new(), NodeKind::Leaf, &[]);
        }
    }
    NiceTreeDecomposition {
        td: b.out,
        kinds: b.kinds,
    }
}

pub fn make_nice(td: &TreeDecomposition, root: usize) -> NiceTreeDecomposition {
    make_nice_with(td, root, |a, b| a.cmp(b))
}

/// Re-hangs the tree from `root`.
pub fn reroot(td: &mut TreeDecomposition, root: usize) {
    let mut path = vec![root];
    while let Some(p) = td.parent[*path.last().expect("nonempty")] {
        path.push(p);
    }
    for w in path.windows(2).rev() {
        td.parent[w[1]] = Some(w[0]);
    }
    td.parent[root] = None;
}
