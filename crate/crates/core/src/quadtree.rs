//! Polar quadtree over the Poincaré disk.
//!
//! Points are bucketed by their hyperbolic polar coordinates `(r, φ)` with
//! `r = d(0, p)`. The root cell is the annulus `[0, r_max] × [0, 2π)` sized to
//! the data; every split cuts a cell into four children at an angular midpoint
//! `(min_φ + max_φ)/2` and a radial midpoint chosen by the [`SplitRule`].
//! Leaves hold a single distinct point location (exact duplicates pile up in
//! one leaf); a depth cap keeps adversarial near-duplicates from splitting
//! forever.
//!
//! Every node maintains a rolling Einstein-midpoint accumulator in Klein
//! coordinates, so inserting a point touches `O(depth)` nodes and summaries
//! are available without a separate pass. The far-field traversal applies the
//! Barnes-Hut criterion `r_cell / d(query, midpoint) < θ` per node, emitting
//! one summary visit for culled subtrees and exact per-point visits at leaves.

use std::f64::consts::TAU;
use std::fmt;

use smallvec::SmallVec;

use crate::geometry::{
    from_polar, hyperbolic_distance, polar_coords, poincare_to_klein, KleinPoint,
    MidpointAccumulator, PoincarePoint,
};

/// Depth cap: beyond this a leaf accepts distinct locations rather than split.
pub const MAX_DEPTH: u8 = 50;

const NO_CHILD: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub enum QuadtreeError {
    /// Inserted point has polar radius beyond the root annulus.
    OutsideRoot { r: f64, max_r: f64 },
}

impl fmt::Display for QuadtreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadtreeError::OutsideRoot { r, max_r } => {
                write!(f, "point radius {r} exceeds root annulus radius {max_r}")
            }
        }
    }
}

impl std::error::Error for QuadtreeError {}

/// How the radial midpoint of a cell split is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitRule {
    /// Arithmetic midpoint `(min_r + max_r) / 2`.
    EqualLength,
    /// Midpoint equalizing hyperbolic area: `acosh((cosh min_r + cosh max_r)/2)`.
    EqualArea,
}

impl fmt::Display for SplitRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitRule::EqualLength => write!(f, "equal-length"),
            SplitRule::EqualArea => write!(f, "equal-area"),
        }
    }
}

impl std::str::FromStr for SplitRule {
    type Err = String;

    fn from_str(s: &str) -> Result<SplitRule, String> {
        match s {
            "equal-length" => Ok(SplitRule::EqualLength),
            "equal-area" => Ok(SplitRule::EqualArea),
            other => Err(format!("unknown split rule '{other}' (expected equal-length or equal-area)")),
        }
    }
}

/// Radial midpoint of `[min_r, max_r]` under the given rule.
#[inline]
pub fn radial_split(min_r: f64, max_r: f64, rule: SplitRule) -> f64 {
    match rule {
        SplitRule::EqualLength => 0.5 * (min_r + max_r),
        SplitRule::EqualArea => (0.5 * (min_r.cosh() + max_r.cosh())).acosh(),
    }
}

/// A polar quadrilateral `[min_r, max_r] × [min_φ, max_φ]` in hyperbolic
/// polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarCell {
    pub min_r: f64,
    pub max_r: f64,
    pub min_phi: f64,
    pub max_phi: f64,
}

impl PolarCell {
    /// Inclusive containment in polar coordinates.
    pub fn contains(&self, r: f64, phi: f64) -> bool {
        self.min_r <= r && r <= self.max_r && self.min_phi <= phi && phi <= self.max_phi
    }

    /// Conservative cell extent: the largest of the corner diagonal, the outer
    /// arc chord (both corners at `max_r`), and the radial edge length, each
    /// measured hyperbolically. For angular spans up to π this bounds the
    /// distance between any two points of the cell.
    pub fn cell_size(&self) -> f64 {
        let diagonal = hyperbolic_distance(
            from_polar(self.min_r, self.min_phi),
            from_polar(self.max_r, self.max_phi),
        );
        let outer_chord = hyperbolic_distance(
            from_polar(self.max_r, self.min_phi),
            from_polar(self.max_r, self.max_phi),
        );
        let radial_edge = self.max_r - self.min_r;
        diagonal.max(outer_chord).max(radial_edge)
    }

    /// Child quadrant cell. Bit 0 picks the radial half (1 = outer), bit 1 the
    /// angular half (1 = upper); the four children tile the parent exactly.
    fn child(&self, mid_r: f64, mid_phi: f64, quadrant: usize) -> PolarCell {
        let (min_r, max_r) = if quadrant & 1 == 0 { (self.min_r, mid_r) } else { (mid_r, self.max_r) };
        let (min_phi, max_phi) =
            if quadrant & 2 == 0 { (self.min_phi, mid_phi) } else { (mid_phi, self.max_phi) };
        PolarCell { min_r, max_r, min_phi, max_phi }
    }
}

#[inline]
fn quadrant_of(mid_r: f64, mid_phi: f64, r: f64, phi: f64) -> usize {
    ((r >= mid_r) as usize) | (((phi >= mid_phi) as usize) << 1)
}

/// One far-field traversal event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Visit {
    /// Exact visit of a stored point (never the query itself).
    Point { index: u32, point: PoincarePoint },
    /// Culled subtree summarized by its point count and Einstein midpoint.
    Summary { count: u32, midpoint: PoincarePoint },
}

#[derive(Debug, Clone, Copy)]
struct FarEntry {
    x: f64,
    y: f64,
    index: u32,
}

/// 64 bytes: one cache line per node.
#[derive(Debug, Clone, Copy)]
struct FarNode {
    mid_x: f64,
    mid_y: f64,
    alpha_mid: f64,
    /// `cosh(r_cell/θ) − 1` for internal nodes, unused for leaves.
    thresh: f64,
    count: u32,
    entry_start: u32,
    entry_len: u32,
    children: [u32; 4],
}

/// Traversal plan for a fixed θ: the tree compacted breadth-first with leaf
/// points flattened into one array and the θ test reduced to a per-node
/// multiply-compare. Built once per gradient evaluation, queried n times.
#[derive(Debug)]
pub struct FarField {
    nodes: Vec<FarNode>,
    entries: Vec<FarEntry>,
}

impl FarField {
    /// Far-field walk for one query point. Internal nodes whose midpoint
    /// differs from the query are culled into a single summary visit when
    /// `r_cell < θ · d(query, midpoint)`; leaves emit exact per-point visits,
    /// skipping any entry whose coordinates equal the query's bit-for-bit.
    pub fn visit<F: FnMut(Visit)>(&self, query: PoincarePoint, visitor: &mut F) {
        if self.nodes.is_empty() {
            return;
        }
        let alpha_q = 1.0 - query.norm_sq();
        let mut stack: SmallVec<[u32; 64]> = SmallVec::new();
        stack.push(0);
        while let Some(idx) = stack.pop() {
            let node = &self.nodes[idx as usize];
            if node.entry_len > 0 {
                let start = node.entry_start as usize;
                for entry in &self.entries[start..start + node.entry_len as usize] {
                    if entry.x != query.x || entry.y != query.y {
                        visitor(Visit::Point {
                            index: entry.index,
                            point: PoincarePoint { x: entry.x, y: entry.y },
                        });
                    }
                }
                continue;
            }
            if node.mid_x != query.x || node.mid_y != query.y {
                let dx = query.x - node.mid_x;
                let dy = query.y - node.mid_y;
                // 2‖q−m‖² > (cosh(r_cell/θ)−1)·α_q·α_m  ⟺  r_cell < θ·d.
                // A NaN threshold (degenerate midpoint) compares false and
                // the walk descends to exact leaves.
                if 2.0 * (dx * dx + dy * dy) > node.thresh * (alpha_q * node.alpha_mid) {
                    visitor(Visit::Summary {
                        count: node.count,
                        midpoint: PoincarePoint { x: node.mid_x, y: node.mid_y },
                    });
                    continue;
                }
            }
            // Reverse push so children pop in quadrant order.
            for &child in node.children.iter().rev() {
                if child != NO_CHILD {
                    stack.push(child);
                }
            }
        }
    }
}

struct Node {
    cell: PolarCell,
    /// Split midpoints; set when the node becomes internal.
    mid_r: f64,
    mid_phi: f64,
    /// Cell extent for the θ test; set when the node becomes internal.
    r_cell: f64,
    midpoint: PoincarePoint,
    acc: MidpointAccumulator,
    count: u32,
    depth: u8,
    is_leaf: bool,
    children: [u32; 4],
    entries: SmallVec<[(u32, PoincarePoint); 1]>,
}

impl Node {
    fn leaf(cell: PolarCell, depth: u8) -> Node {
        Node {
            cell,
            mid_r: 0.0,
            mid_phi: 0.0,
            r_cell: 0.0,
            midpoint: PoincarePoint::ORIGIN,
            acc: MidpointAccumulator::new(),
            count: 0,
            depth,
            is_leaf: true,
            children: [NO_CHILD; 4],
            entries: SmallVec::new(),
        }
    }
}

struct Entry {
    index: u32,
    point: PoincarePoint,
    r: f64,
    phi: f64,
    klein: KleinPoint,
}

impl Entry {
    fn new(index: u32, point: PoincarePoint) -> Entry {
        let (r, phi) = polar_coords(point);
        Entry { index, point, r, phi, klein: poincare_to_klein(point) }
    }
}

/// Audit report over the whole tree; see [`PolarQuadtree::audit`].
#[derive(Debug, Clone)]
pub struct TreeAudit {
    pub nodes: usize,
    pub leaves: usize,
    pub total_points: u32,
    /// Internal counts equal the sum of child counts; leaf counts equal entries.
    pub count_consistent: bool,
    /// Every stored point lies inside its leaf cell and every child cell
    /// inside its parent (inclusive polar bounds).
    pub containment_ok: bool,
    /// No leaf below the depth cap holds two distinct locations.
    pub leaf_distinct_ok: bool,
    /// Max coordinate deviation between rolling node midpoints and batch
    /// Einstein midpoints over the node's subtree.
    pub midpoint_max_err: f64,
    pub mean_leaf_depth: f64,
    pub max_depth: u8,
}

/// The polar quadtree. Built fresh from an embedding each iteration.
pub struct PolarQuadtree {
    rule: SplitRule,
    nodes: Vec<Node>,
    n_points: u32,
}

impl PolarQuadtree {
    /// Build by inserting every point in index order. The root annulus spans
    /// `[0, max_i d(0, p_i)]`.
    pub fn build(points: &[PoincarePoint], rule: SplitRule) -> PolarQuadtree {
        let mut max_r = 0.0f64;
        let entries: Vec<Entry> = points
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let e = Entry::new(i as u32, p);
                max_r = max_r.max(e.r);
                e
            })
            .collect();
        let mut tree = PolarQuadtree {
            rule,
            nodes: Vec::with_capacity(2 * points.len() + 1),
            n_points: 0,
        };
        if entries.is_empty() {
            return tree;
        }
        tree.nodes.push(Node::leaf(
            PolarCell { min_r: 0.0, max_r, min_phi: 0.0, max_phi: TAU },
            0,
        ));
        for e in entries {
            tree.insert_entry(e);
            tree.n_points += 1;
        }
        tree
    }

    pub fn len(&self) -> u32 {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn rule(&self) -> SplitRule {
        self.rule
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root_cell(&self) -> Option<PolarCell> {
        self.nodes.first().map(|n| n.cell)
    }

    /// Insert a point after the build. The point must fit the existing root
    /// annulus; [`PolarQuadtree::build`] sizes the root to its inputs, so this
    /// only errors for radii beyond the original maximum.
    pub fn insert(&mut self, index: u32, point: PoincarePoint) -> Result<(), QuadtreeError> {
        let e = Entry::new(index, point);
        match self.nodes.first() {
            None => return Err(QuadtreeError::OutsideRoot { r: e.r, max_r: 0.0 }),
            Some(root) if e.r > root.cell.max_r => {
                return Err(QuadtreeError::OutsideRoot { r: e.r, max_r: root.cell.max_r })
            }
            _ => {}
        }
        self.insert_entry(e);
        self.n_points += 1;
        Ok(())
    }

    fn insert_entry(&mut self, e: Entry) {
        let mut idx = 0usize;
        loop {
            let node = &mut self.nodes[idx];
            node.count += 1;
            node.acc.fold_klein(e.klein, 1.0);
            if node.is_leaf {
                let matches_existing = node
                    .entries
                    .first()
                    .map(|(_, p)| p.x == e.point.x && p.y == e.point.y)
                    .unwrap_or(true);
                if matches_existing {
                    node.entries.push((e.index, e.point));
                    node.midpoint = node.entries[0].1;
                    return;
                }
                if node.depth >= MAX_DEPTH {
                    // Depth cap: mixed leaf, summarized by its accumulator.
                    node.entries.push((e.index, e.point));
                    node.midpoint = node.acc.finalize().expect("non-empty");
                    return;
                }
                self.split_leaf(idx);
            }
            // Internal (possibly freshly split): refresh the midpoint and
            // descend. The count/fold above already covered this node.
            let node = &mut self.nodes[idx];
            node.midpoint = node.acc.finalize().expect("non-empty");
            let q = quadrant_of(node.mid_r, node.mid_phi, e.r, e.phi);
            let depth = node.depth;
            idx = self.ensure_child(idx, q, depth + 1);
        }
    }

    /// Convert a leaf into an internal node, pushing its (identical) entries
    /// one level down. The caller's descent then continues into the children.
    fn split_leaf(&mut self, idx: usize) {
        let node = &mut self.nodes[idx];
        let cell = node.cell;
        let mid_r = radial_split(cell.min_r, cell.max_r, self.rule);
        let mid_phi = 0.5 * (cell.min_phi + cell.max_phi);
        node.mid_r = mid_r;
        node.mid_phi = mid_phi;
        node.r_cell = cell.cell_size();
        node.is_leaf = false;
        node.midpoint = node.acc.finalize().expect("non-empty");
        let old: SmallVec<[(u32, PoincarePoint); 1]> = std::mem::take(&mut node.entries);
        let depth = node.depth;
        if let Some(&(_, first)) = old.first() {
            let (r, phi) = polar_coords(first);
            let klein = poincare_to_klein(first);
            let q = quadrant_of(mid_r, mid_phi, r, phi);
            let child = self.ensure_child(idx, q, depth + 1);
            for (i, p) in old {
                let child_node = &mut self.nodes[child];
                child_node.count += 1;
                child_node.acc.fold_klein(klein, 1.0);
                child_node.entries.push((i, p));
                child_node.midpoint = child_node.entries[0].1;
            }
        }
    }

    fn ensure_child(&mut self, idx: usize, quadrant: usize, depth: u8) -> usize {
        let existing = self.nodes[idx].children[quadrant];
        if existing != NO_CHILD {
            return existing as usize;
        }
        let parent = &self.nodes[idx];
        let cell = parent.cell.child(parent.mid_r, parent.mid_phi, quadrant);
        let child = self.nodes.len();
        self.nodes.push(Node::leaf(cell, depth));
        self.nodes[idx].children[quadrant] = child as u32;
        child
    }

    /// One-off far-field walk; see [`FarField`]. Batch users (the gradient
    /// evaluates all n queries against the same tree) should build the
    /// [`PolarQuadtree::far_field`] plan once and reuse it.
    pub fn traverse_far_field<F: FnMut(Visit)>(
        &self,
        query: PoincarePoint,
        theta: f64,
        visitor: &mut F,
    ) {
        self.far_field(theta).visit(query, visitor);
    }

    /// Compact the tree into a breadth-first, cache-line-sized node layout
    /// and precompute each internal node's culling threshold for one θ.
    ///
    /// The Barnes-Hut test `r_cell < θ · d` is applied in the form
    /// `2‖q − m‖² > (cosh(r_cell/θ) − 1) · (1 − ‖q‖²)(1 − ‖m‖²)`, which is
    /// the same predicate through `cosh d = γ` but costs three
    /// multiplications per node instead of an acosh. θ = 0 makes every
    /// threshold +∞, so no subtree is ever culled.
    pub fn far_field(&self, theta: f64) -> FarField {
        assert!(theta >= 0.0, "theta must be nonnegative");
        let mut far = FarField {
            nodes: Vec::with_capacity(self.nodes.len()),
            entries: Vec::with_capacity(self.n_points as usize),
        };
        if self.nodes.is_empty() {
            return far;
        }
        // Breadth-first order keeps the hot top levels packed together and
        // every node's children adjacent.
        let mut order: Vec<u32> = Vec::with_capacity(self.nodes.len());
        let mut renumbered: Vec<u32> = vec![NO_CHILD; self.nodes.len()];
        order.push(0);
        renumbered[0] = 0;
        let mut head = 0;
        while head < order.len() {
            let old = order[head] as usize;
            head += 1;
            for &c in &self.nodes[old].children {
                if c != NO_CHILD {
                    renumbered[c as usize] = order.len() as u32;
                    order.push(c);
                }
            }
        }
        for &old in &order {
            let node = &self.nodes[old as usize];
            let mut children = [NO_CHILD; 4];
            for (slot, &c) in node.children.iter().enumerate() {
                if c != NO_CHILD {
                    children[slot] = renumbered[c as usize];
                }
            }
            let (entry_start, entry_len) = if node.is_leaf {
                let start = far.entries.len() as u32;
                for &(index, point) in &node.entries {
                    far.entries.push(FarEntry { x: point.x, y: point.y, index });
                }
                (start, node.entries.len() as u32)
            } else {
                (0, 0)
            };
            let thresh = if node.is_leaf { 0.0 } else { (node.r_cell / theta).cosh() - 1.0 };
            far.nodes.push(FarNode {
                mid_x: node.midpoint.x,
                mid_y: node.midpoint.y,
                alpha_mid: 1.0 - node.midpoint.norm_sq(),
                thresh,
                count: node.count,
                entry_start,
                entry_len,
                children,
            });
        }
        far
    }

    /// Structural self-check; see [`TreeAudit`].
    pub fn audit(&self) -> TreeAudit {
        let mut audit = TreeAudit {
            nodes: self.nodes.len(),
            leaves: 0,
            total_points: self.n_points,
            count_consistent: true,
            containment_ok: true,
            leaf_distinct_ok: true,
            midpoint_max_err: 0.0,
            mean_leaf_depth: 0.0,
            max_depth: 0,
        };
        if self.nodes.is_empty() {
            return audit;
        }
        let mut leaf_depth_sum = 0u64;
        let subtree = self.audit_node(0, &mut audit, &mut leaf_depth_sum);
        if subtree.len() as u32 != self.nodes[0].count || self.nodes[0].count != self.n_points {
            audit.count_consistent = false;
        }
        if audit.leaves > 0 {
            audit.mean_leaf_depth = leaf_depth_sum as f64 / audit.leaves as f64;
        }
        audit
    }

    fn audit_node(
        &self,
        idx: usize,
        audit: &mut TreeAudit,
        leaf_depth_sum: &mut u64,
    ) -> Vec<PoincarePoint> {
        let node = &self.nodes[idx];
        audit.max_depth = audit.max_depth.max(node.depth);
        let points: Vec<PoincarePoint> = if node.is_leaf {
            audit.leaves += 1;
            *leaf_depth_sum += node.depth as u64;
            if node.count as usize != node.entries.len() {
                audit.count_consistent = false;
            }
            if node.depth < MAX_DEPTH {
                let first = node.entries.first();
                if let Some(&(_, f)) = first {
                    if node.entries.iter().any(|&(_, p)| p != f) {
                        audit.leaf_distinct_ok = false;
                    }
                }
            }
            for &(_, p) in &node.entries {
                let (r, phi) = polar_coords(p);
                if !node.cell.contains(r, phi) {
                    audit.containment_ok = false;
                }
            }
            node.entries.iter().map(|&(_, p)| p).collect()
        } else {
            let mut pts = Vec::with_capacity(node.count as usize);
            let mut child_total = 0u32;
            for &child in &node.children {
                if child == NO_CHILD {
                    continue;
                }
                let c = &self.nodes[child as usize];
                if c.cell.min_r < node.cell.min_r - 1e-12
                    || c.cell.max_r > node.cell.max_r + 1e-12
                    || c.cell.min_phi < node.cell.min_phi - 1e-12
                    || c.cell.max_phi > node.cell.max_phi + 1e-12
                {
                    audit.containment_ok = false;
                }
                child_total += c.count;
                pts.extend(self.audit_node(child as usize, audit, leaf_depth_sum));
            }
            if child_total != node.count {
                audit.count_consistent = false;
            }
            pts
        };
        if !points.is_empty() {
            let weights = vec![1.0; points.len()];
            let batch = crate::geometry::einstein_midpoint(&points, &weights).expect("non-empty");
            let err = (batch.x - node.midpoint.x).abs().max((batch.y - node.midpoint.y).abs());
            audit.midpoint_max_err = audit.midpoint_max_err.max(err);
        }
        points
    }
}
