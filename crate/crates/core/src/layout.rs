//! Static field geometry: the field rectangle, the base station, the
//! fixed cluster grid and random node deployment.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when comparing cell aspect ratios.
const ASPECT_TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    /// Radius of the smallest circle enclosing the rectangle.
    pub fn circumradius(&self) -> f64 {
        0.5 * self.width().hypot(self.height())
    }

    /// Half-open containment `[x0, x1) × [y0, y1)`.
    pub fn contains_half_open(&self, p: &Point) -> bool {
        p.x >= self.x0 && p.x < self.x1 && p.y >= self.y0 && p.y < self.y1
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }
}

/// Grid shape chosen by [`partition_field`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
}

/// Picks the rows×cols factorisation of `q` whose cells are closest to
/// square. Equal aspect ratios prefer the grid with `rows` closest to
/// `cols`, then the one with more columns.
pub fn grid_shape(width: f64, height: f64, q: usize) -> Result<GridShape> {
    if q == 0 {
        return Err(Error::config("q", "cluster count must be at least 1"));
    }
    if !(width > 0.0 && height > 0.0) || !width.is_finite() || !height.is_finite() {
        return Err(Error::config("field", "field sides must be positive"));
    }

    let mut best: Option<(f64, GridShape)> = None;
    for rows in (1..=q).filter(|r| q.is_multiple_of(*r)) {
        let cols = q / rows;
        let cell_w = width / cols as f64;
        let cell_h = height / rows as f64;
        let aspect = (cell_w / cell_h).max(cell_h / cell_w);
        let candidate = GridShape { rows, cols };
        best = match best {
            None => Some((aspect, candidate)),
            Some((best_aspect, current)) => {
                if aspect < best_aspect * (1.0 - ASPECT_TIE_EPS) {
                    Some((aspect, candidate))
                } else if aspect <= best_aspect * (1.0 + ASPECT_TIE_EPS)
                    && prefer_on_tie(candidate, current)
                {
                    Some((best_aspect.min(aspect), candidate))
                } else {
                    Some((best_aspect, current))
                }
            }
        };
    }
    Ok(best.expect("q >= 1 has at least one factor pair").1)
}

fn prefer_on_tie(candidate: GridShape, current: GridShape) -> bool {
    let skew = |g: GridShape| g.rows.abs_diff(g.cols);
    match skew(candidate).cmp(&skew(current)) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => candidate.cols > current.cols,
    }
}

/// Splits the field into `q` equal grid cells, ordered row-major from
/// the origin corner.
pub fn partition_field(width: f64, height: f64, q: usize) -> Result<Vec<Rect>> {
    let GridShape { rows, cols } = grid_shape(width, height, q)?;
    // Edges are computed from the integer index so that adjacent cells
    // share bit-identical boundaries.
    let xs: Vec<f64> = (0..=cols).map(|c| width * c as f64 / cols as f64).collect();
    let ys: Vec<f64> = (0..=rows).map(|r| height * r as f64 / rows as f64).collect();
    let mut cells = Vec::with_capacity(q);
    for r in 0..rows {
        for c in 0..cols {
            cells.push(Rect {
                x0: xs[c],
                y0: ys[r],
                x1: xs[c + 1],
                y1: ys[r + 1],
            });
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldLayout {
    pub width: f64,
    pub height: f64,
    pub bs_position: Point,
    pub clusters: Vec<Rect>,
}

impl FieldLayout {
    pub fn new(width: f64, height: f64, q: usize) -> Result<Self> {
        let clusters = partition_field(width, height, q)?;
        Ok(Self {
            width,
            height,
            bs_position: Point::new(width / 2.0, height / 2.0),
            clusters,
        })
    }

    pub fn q(&self) -> usize {
        self.clusters.len()
    }

    pub fn bounds(&self) -> Rect {
        Rect {
            x0: 0.0,
            y0: 0.0,
            x1: self.width,
            y1: self.height,
        }
    }

    /// Index of the cluster owning `p`. Shared edges belong to the cell
    /// on the far side; points on the outer top/right edge fall back to
    /// closed containment.
    pub fn cluster_of(&self, p: &Point) -> Option<usize> {
        self.clusters
            .iter()
            .position(|c| c.contains_half_open(p))
            .or_else(|| self.clusters.iter().position(|c| c.contains(p)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Normal,
    Advanced,
}

/// Two-level energy heterogeneity: a fraction `m` of the nodes start
/// with `e0 * (1 + a)` joules, the rest with `e0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneityConfig {
    pub m: f64,
    pub a: f64,
    pub e0: f64,
}

impl HeterogeneityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.m) {
            return Err(Error::config("m", format!("{} is outside [0, 1]", self.m)));
        }
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(Error::config("a", format!("{} must be a finite value >= 0", self.a)));
        }
        if !(self.e0 > 0.0 && self.e0.is_finite()) {
            return Err(Error::config("e0", format!("{} must be positive", self.e0)));
        }
        Ok(())
    }

    pub fn initial_energy(&self, kind: NodeKind) -> f64 {
        match kind {
            NodeKind::Normal => self.e0,
            NodeKind::Advanced => self.e0 * (1.0 + self.a),
        }
    }

    /// Number of advanced nodes in a population of `n`.
    pub fn advanced_count(&self, n: usize) -> usize {
        (self.m * n as f64).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub id: usize,
    pub position: Point,
    pub kind: NodeKind,
    pub e_init: f64,
    pub e_residual: f64,
    pub cluster_id: usize,
    pub alive: bool,
    /// First round in which the node may be elected again.
    pub ineligible_until: u64,
    pub is_ch_this_round: bool,
}

impl NodeState {
    pub fn new(id: usize, position: Point, kind: NodeKind, e_init: f64, cluster_id: usize) -> Self {
        Self {
            id,
            position,
            kind,
            e_init,
            e_residual: e_init,
            cluster_id,
            alive: true,
            ineligible_until: 0,
            is_ch_this_round: false,
        }
    }

    pub fn is_eligible(&self, round: u64) -> bool {
        round >= self.ineligible_until
    }
}

/// Deploys `n` nodes uniformly over the whole field and marks exactly
/// `round(m * n)` of them, chosen uniformly, as advanced.
pub fn place_nodes<R: Rng + ?Sized>(
    layout: &FieldLayout,
    n: usize,
    het: &HeterogeneityConfig,
    rng: &mut R,
) -> Vec<NodeState> {
    let positions: Vec<Point> = (0..n)
        .map(|_| {
            Point::new(
                rng.gen_range(0.0..layout.width),
                rng.gen_range(0.0..layout.height),
            )
        })
        .collect();

    let mut kinds = vec![NodeKind::Normal; n];
    for i in index::sample(rng, n, het.advanced_count(n).min(n)) {
        kinds[i] = NodeKind::Advanced;
    }

    positions
        .into_iter()
        .zip(kinds)
        .enumerate()
        .map(|(id, (position, kind))| {
            let cluster_id = layout
                .cluster_of(&position)
                .expect("sampled position lies inside the field");
            NodeState::new(id, position, kind, het.initial_energy(kind), cluster_id)
        })
        .collect()
}

pub fn total_initial_energy(nodes: &[NodeState]) -> f64 {
    nodes.iter().map(|n| n.e_init).sum()
}
