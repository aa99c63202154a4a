use ndarray::Array2;
use serde_json::{json, Map, Value};

use super::{UmSpace, UnionFind};
use crate::error::{Error, Result};
use crate::gw::{CanonicalForm, SigMode};
use crate::tol::{quantize, TAU_METRIC};

/// Node of a [`Dendrogram`]. Leaves carry the index of the point they stand for.
#[derive(Debug, Clone, PartialEq)]
pub struct DNode {
    pub height: f64,
    pub mass: f64,
    pub children: Vec<usize>,
    pub point: Option<usize>,
    pub id: Option<String>,
}

impl DNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Rooted merge tree of a finite ultra-dissimilarity space.
///
/// Internal node heights are merge levels and strictly decrease towards the
/// leaves. Leaf heights are the self-dissimilarities `u[i][i]`, so an
/// ultrametric gives an ordinary dendrogram and a tree-shape space gives a
/// treegram with positive birth heights. Children are ordered by their
/// canonical signature.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    nodes: Vec<DNode>,
    root: usize,
}

impl Dendrogram {
    pub fn from_space(space: &UmSpace) -> Self {
        let n = space.len();
        let u = space.u();
        let mu = space.mu();
        let mut nodes: Vec<DNode> = (0..n)
            .map(|i| DNode {
                height: u[[i, i]],
                mass: mu[i],
                children: Vec::new(),
                point: Some(i),
                id: Some(space.ids()[i].clone()),
            })
            .collect();

        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((u[[i, j]], i, j));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        // node currently representing each union-find root
        let mut node_of: Vec<usize> = (0..n).collect();
        let mut uf = UnionFind::new(n);
        let mut start = 0;
        while start < pairs.len() {
            let level = pairs[start].0;
            let mut end = start;
            while end < pairs.len() && pairs[end].0 - level <= TAU_METRIC {
                end += 1;
            }
            // roots touched at this level, with the node they carried before it
            let mut touched: Vec<(usize, usize)> = Vec::new();
            for &(_, i, j) in &pairs[start..end] {
                let (ri, rj) = (uf.find(i), uf.find(j));
                if ri == rj {
                    continue;
                }
                for r in [ri, rj] {
                    if !touched.iter().any(|&(root, _)| root == r) {
                        touched.push((r, node_of[r]));
                    }
                }
                uf.union(ri, rj);
            }
            let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
            for (old_root, old_node) in touched {
                let r = uf.find(old_root);
                match groups.iter_mut().find(|(root, _)| *root == r) {
                    Some((_, members)) => members.push(old_node),
                    None => groups.push((r, vec![old_node])),
                }
            }
            for (r, children) in groups {
                let mass = children.iter().map(|&c| nodes[c].mass).sum();
                nodes.push(DNode {
                    height: level,
                    mass,
                    children,
                    point: None,
                    id: None,
                });
                node_of[r] = nodes.len() - 1;
            }
            start = end;
        }
        let root = if n == 0 { 0 } else { node_of[uf.find(0)] };
        let mut d = Dendrogram { nodes, root };
        d.sort_children();
        d
    }

    /// Rebuild the space: `u[i][j]` is the height of the lowest common
    /// ancestor of leaves `i` and `j`, and `u[i][i]` the leaf height.
    pub fn to_space(&self) -> Result<UmSpace> {
        let leaves = self.leaves(self.root);
        let n = leaves.len();
        let mut index = vec![usize::MAX; self.nodes.len()];
        let mut by_point: Vec<Option<usize>> = vec![None; n];
        for &l in &leaves {
            let p = self.nodes[l]
                .point
                .ok_or_else(|| Error::Format("leaf without point index".into()))?;
            if p >= n || by_point[p].is_some() {
                return Err(Error::Format(format!("bad leaf point index {p}")));
            }
            by_point[p] = Some(l);
            index[l] = p;
        }
        let mut u = Array2::<f64>::zeros((n, n));
        let mut mu = vec![0.0; n];
        let mut ids = vec![String::new(); n];
        for &l in &leaves {
            let p = index[l];
            u[[p, p]] = self.nodes[l].height;
            mu[p] = self.nodes[l].mass;
            ids[p] = self.nodes[l].id.clone().unwrap_or_else(|| p.to_string());
        }
        for node in &self.nodes {
            if node.children.len() < 2 {
                continue;
            }
            let groups: Vec<Vec<usize>> = node
                .children
                .iter()
                .map(|&c| self.leaves(c).into_iter().map(|l| index[l]).collect())
                .collect();
            for (a, ga) in groups.iter().enumerate() {
                for gb in &groups[a + 1..] {
                    for &i in ga {
                        for &j in gb {
                            u[[i, j]] = node.height;
                            u[[j, i]] = node.height;
                        }
                    }
                }
            }
        }
        UmSpace::new(ids, u, mu)
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, i: usize) -> &DNode {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[DNode] {
        &self.nodes
    }

    /// Parent of every node (`None` for the root).
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                parent[c] = Some(i);
            }
        }
        parent
    }

    /// Leaves under `node`, left to right.
    pub fn leaves(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(v) = stack.pop() {
            let nd = &self.nodes[v];
            if nd.is_leaf() {
                out.push(v);
            } else {
                stack.extend(nd.children.iter().rev());
            }
        }
        out
    }

    /// Dendrogram of the weighted quotient at level `t`: every maximal subtree
    /// of height `<= t + TAU_METRIC` collapses to a leaf of height 0 carrying
    /// the subtree mass. Collapsed leaves record the points they contain in
    /// `id` as a `+`-joined list of point indices.
    pub fn cut(&self, t: f64) -> Dendrogram {
        let mut nodes = Vec::new();
        let root = self.cut_rec(self.root, t, &mut nodes);
        let mut d = Dendrogram { nodes, root };
        d.sort_children();
        d
    }

    fn cut_rec(&self, v: usize, t: f64, out: &mut Vec<DNode>) -> usize {
        let nd = &self.nodes[v];
        if nd.is_leaf() || nd.height <= t + TAU_METRIC {
            let members: Vec<String> = self
                .leaves(v)
                .into_iter()
                .filter_map(|l| self.nodes[l].point)
                .map(|p| p.to_string())
                .collect();
            out.push(DNode {
                height: 0.0,
                mass: nd.mass,
                children: Vec::new(),
                point: None,
                id: Some(members.join("+")),
            });
            return out.len() - 1;
        }
        let children = nd.children.iter().map(|&c| self.cut_rec(c, t, out)).collect();
        out.push(DNode {
            height: nd.height,
            mass: nd.mass,
            children,
            point: None,
            id: None,
        });
        out.len() - 1
    }

    pub fn canonical_form(&self, mode: SigMode) -> CanonicalForm {
        self.signature(self.root, mode)
    }

    pub fn signature(&self, v: usize, mode: SigMode) -> CanonicalForm {
        let nd = &self.nodes[v];
        let height = quantize(nd.height);
        let mass = match mode {
            SigMode::Unweighted => 0,
            _ => quantize(nd.mass),
        };
        if nd.is_leaf() {
            let id = match mode {
                SigMode::Labeled => nd.id.clone(),
                _ => None,
            };
            return CanonicalForm::Leaf { height, mass, id };
        }
        let mut children: Vec<CanonicalForm> =
            nd.children.iter().map(|&c| self.signature(c, mode)).collect();
        children.sort();
        CanonicalForm::Node {
            height,
            mass,
            children,
        }
    }

    fn sort_children(&mut self) {
        if self.nodes.is_empty() {
            return;
        }
        // post-order so children are settled before their parent
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((v, done)) = stack.pop() {
            if done {
                order.push(v);
            } else {
                stack.push((v, true));
                for &c in &self.nodes[v].children {
                    stack.push((c, false));
                }
            }
        }
        for v in order {
            if self.nodes[v].children.len() < 2 {
                continue;
            }
            let mut keyed: Vec<(CanonicalForm, usize)> = self.nodes[v]
                .children
                .iter()
                .map(|&c| (self.signature(c, SigMode::Labeled), c))
                .collect();
            keyed.sort();
            self.nodes[v].children = keyed.into_iter().map(|(_, c)| c).collect();
        }
    }

    /// Nested JSON: internal nodes `{"h", "mass", "children"}`, leaves `{"id", "mass", "h"}`.
    pub fn to_json(&self) -> Value {
        self.node_json(self.root)
    }

    fn node_json(&self, v: usize) -> Value {
        let nd = &self.nodes[v];
        if nd.is_leaf() {
            let id = nd
                .id
                .clone()
                .or_else(|| nd.point.map(|p| p.to_string()))
                .unwrap_or_default();
            json!({"id": id, "mass": nd.mass, "h": nd.height})
        } else {
            let children: Vec<Value> = nd.children.iter().map(|&c| self.node_json(c)).collect();
            json!({"h": nd.height, "mass": nd.mass, "children": children})
        }
    }

    /// Parse the nested JSON layout. Leaves are numbered in document order.
    pub fn from_json(value: &Value) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut next_point = 0;
        let root = Self::parse_node(value, &mut nodes, &mut next_point)?;
        Ok(Dendrogram { nodes, root })
    }

    fn parse_node(value: &Value, nodes: &mut Vec<DNode>, next_point: &mut usize) -> Result<usize> {
        let obj: &Map<String, Value> = value
            .as_object()
            .ok_or_else(|| Error::Format("dendrogram node must be an object".into()))?;
        let num = |key: &str| -> Result<f64> {
            obj.get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Format(format!("dendrogram node missing numeric '{key}'")))
        };
        let height = num("h")?;
        let mass = num("mass")?;
        match obj.get("children") {
            Some(Value::Array(kids)) if !kids.is_empty() => {
                let children = kids
                    .iter()
                    .map(|k| Self::parse_node(k, nodes, next_point))
                    .collect::<Result<Vec<_>>>()?;
                nodes.push(DNode {
                    height,
                    mass,
                    children,
                    point: None,
                    id: None,
                });
            }
            _ => {
                let id = obj.get("id").and_then(Value::as_str).map(str::to_string);
                nodes.push(DNode {
                    height,
                    mass,
                    children: Vec::new(),
                    point: Some(*next_point),
                    id,
                });
                *next_point += 1;
            }
        }
        Ok(nodes.len() - 1)
    }
}
