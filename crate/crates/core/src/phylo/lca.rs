//! Lowest common ancestors by Euler tour and a sparse table of depth minima.

use super::PhyloTree;

pub(super) struct Lca {
    first: Vec<usize>,
    depth: Vec<usize>,
    table: Vec<Vec<usize>>,
}

impl Lca {
    pub(super) fn new(tree: &PhyloTree) -> Self {
        let n = tree.nodes.len();
        let mut first = vec![usize::MAX; n];
        let mut depth = vec![0; n];
        let mut euler = Vec::with_capacity(2 * n);
        // (node, index of next child to visit)
        let mut stack = vec![(tree.root, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (v, next) = *top;
            if next == 0 {
                first[v] = euler.len();
            }
            euler.push(v);
            let kids = &tree.nodes[v].children;
            if next < kids.len() {
                let c = kids[next];
                top.1 += 1;
                depth[c] = depth[v] + 1;
                stack.push((c, 0));
            } else {
                stack.pop();
            }
        }
        let len = euler.len();
        let mut table = vec![euler.clone()];
        let mut w = 1;
        while 2 * w <= len {
            let prev = table.last().expect("level 0 exists");
            let row: Vec<usize> = (0..=len - 2 * w)
                .map(|i| {
                    let (a, b) = (prev[i], prev[i + w]);
                    if depth[a] <= depth[b] {
                        a
                    } else {
                        b
                    }
                })
                .collect();
            table.push(row);
            w *= 2;
        }
        Self {
            first,
            depth,
            table,
        }
    }

    pub(super) fn query(&self, a: usize, b: usize) -> usize {
        let (mut l, mut r) = (self.first[a], self.first[b]);
        if l > r {
            std::mem::swap(&mut l, &mut r);
        }
        let span = r - l + 1;
        let k = usize::BITS as usize - 1 - span.leading_zeros() as usize;
        let (x, y) = (self.table[k][l], self.table[k][r + 1 - (1 << k)]);
        if self.depth[x] <= self.depth[y] {
            x
        } else {
            y
        }
    }
}
