//! Minimal static 2-D k-d tree for nearest-neighbor queries over object
//! positions. Ties resolve by insertion index so queries are deterministic.

pub struct KdTree {
    // (x, y, original index), reordered in place during construction.
    nodes: Vec<(f64, f64, usize)>,
}

impl KdTree {
    pub fn build(points: &[(f64, f64)]) -> Self {
        let mut nodes: Vec<(f64, f64, usize)> =
            points.iter().enumerate().map(|(i, p)| (p.0, p.1, i)).collect();
        if !nodes.is_empty() {
            let len = nodes.len();
            build_rec(&mut nodes, 0, len, 0);
        }
        KdTree { nodes }
    }

    /// Indices of the `k` nearest points to `query`, excluding `exclude`,
    /// ordered by ascending distance (then index).
    pub fn knn(&self, query: (f64, f64), k: usize, exclude: usize) -> Vec<usize> {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        self.search(0, self.nodes.len(), 0, query, k, exclude, &mut best);
        best.into_iter().map(|(_, i)| i).collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        lo: usize,
        hi: usize,
        axis: usize,
        query: (f64, f64),
        k: usize,
        exclude: usize,
        best: &mut Vec<(f64, usize)>,
    ) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let node = self.nodes[mid];
        if node.2 != exclude {
            let d2 = (node.0 - query.0).powi(2) + (node.1 - query.1).powi(2);
            let pos = best
                .binary_search_by(|probe| {
                    probe
                        .0
                        .partial_cmp(&d2)
                        .unwrap()
                        .then(probe.1.cmp(&node.2))
                })
                .unwrap_or_else(|e| e);
            best.insert(pos, (d2, node.2));
            best.truncate(k);
        }
        let split = if axis == 0 { node.0 } else { node.1 };
        let qv = if axis == 0 { query.0 } else { query.1 };
        let (near, far) = if qv < split {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(near.0, near.1, 1 - axis, query, k, exclude, best);
        let plane_d2 = (qv - split).powi(2);
        if best.len() < k || plane_d2 <= best.last().unwrap().0 {
            self.search(far.0, far.1, 1 - axis, query, k, exclude, best);
        }
    }
}

fn build_rec(nodes: &mut [(f64, f64, usize)], lo: usize, hi: usize, axis: usize) {
    if hi - lo <= 1 {
        return;
    }
    let mid = (lo + hi) / 2;
    nodes[lo..hi].select_nth_unstable_by(mid - lo, |a, b| {
        let (ka, kb) = if axis == 0 { (a.0, b.0) } else { (a.1, b.1) };
        ka.partial_cmp(&kb).unwrap().then(a.2.cmp(&b.2))
    });
    build_rec(nodes, lo, mid, 1 - axis);
    build_rec(nodes, mid + 1, hi, 1 - axis);
}
