use serde::{Deserialize, Serialize};

use crate::bounds::a_n_interval;
use crate::error::{Error, Result};
use crate::sampling::{cell_coord, Point};

/// Largest fine grid the plan will materialize, per side.
const MAX_FINE_SIDE: usize = 1 << 14;

/// Coarse `t × t` squares `S_l` refined into fine `a × a` squares `R_j`.
///
/// Fine squares are addressed two ways: by cell id `row * G + col` (row 0 at
/// `y = 0`, `G = W·L`) and by serpentine label, a 0-based position in an
/// order where consecutive squares share an edge. Label `j` here is `R_{j+1}`
/// in one-based notation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilingPlan {
    pub n_ref: usize,
    pub radius: f64,
    /// Requested box parameter `A`.
    pub a_target: f64,
    pub w: usize,
    pub l: usize,
    pub t: f64,
    /// Fine square side `t / L`.
    pub a: f64,
    /// Realized `sqrt(n) · a`.
    pub a_eff: f64,
    pub a_interval: (f64, f64),
    /// Whether `a_eff` landed in `a_interval`.
    pub a_feasible: bool,
    /// `r·W − 2√2`, the realized offset in `t = r / (2√2 + δ)`.
    pub delta: f64,
    /// Whether `delta` lies in `[√r, 2√r)`.
    pub delta_in_window: bool,
    /// Cell id of each label.
    pub order: Vec<u32>,
    /// Label of each cell id.
    pub rank: Vec<u32>,
}

/// Picks `W` and `L` for `n` nodes at radius `r` and target box parameter `a_target`.
pub fn plan_tiling(n: usize, r: f64, a_target: f64) -> Result<TilingPlan> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Parameter(format!("radius must lie in (0, 1], got {r}")));
    }
    if !(a_target > 0.0 && a_target.is_finite()) {
        return Err(Error::Parameter(format!("A must be positive, got {a_target}")));
    }
    if n < 2 {
        return Err(Error::Parameter("tiling needs n >= 2".into()));
    }
    let w = smallest_odd_at_least((2.0 * std::f64::consts::SQRT_2 + r.sqrt()) / r);
    if w < 3 {
        return Err(Error::Parameter(format!("radius {r} admits no odd W >= 3")));
    }
    let t = 1.0 / w as f64;
    let span = (n as f64).sqrt() * t;
    let (lo, hi) = a_n_interval(a_target, n);

    // A_eff = span / L is decreasing in L: the largest odd L with A_eff >= lo
    // is the only candidate worth testing against hi.
    let mut l_max = smallest_odd_at_least(span / lo);
    if l_max as f64 > span / lo {
        l_max = l_max.saturating_sub(2);
    }
    let (l, feasible) = if l_max >= 1 && span / (l_max as f64) < hi {
        (l_max, true)
    } else {
        (nearest_odd_l(span, a_target), false)
    };
    TilingPlan::from_grid(n, r, a_target, w, l, feasible)
}

fn smallest_odd_at_least(x: f64) -> usize {
    let c = x.ceil().max(1.0) as usize;
    if c % 2 == 1 {
        c
    } else {
        c + 1
    }
}

fn nearest_odd_l(span: f64, a_target: f64) -> usize {
    let guess = (span / a_target).max(1.0);
    let below = {
        let f = guess.floor() as usize;
        if f % 2 == 1 {
            f
        } else {
            f.saturating_sub(1).max(1)
        }
    };
    let above = smallest_odd_at_least(guess);
    let err = |l: usize| (span / l as f64 - a_target).abs();
    if err(below) <= err(above) {
        below
    } else {
        above
    }
}

impl TilingPlan {
    /// A plan with explicit odd `w` and `l`; `a_feasible` is recorded as given.
    pub fn from_grid(
        n_ref: usize,
        radius: f64,
        a_target: f64,
        w: usize,
        l: usize,
        a_feasible: bool,
    ) -> Result<Self> {
        if w.is_multiple_of(2) || l.is_multiple_of(2) || w == 0 || l == 0 {
            return Err(Error::Parameter(format!("W and L must be odd, got {w} and {l}")));
        }
        let side = w
            .checked_mul(l)
            .filter(|&g| g <= MAX_FINE_SIDE)
            .ok_or_else(|| Error::Parameter(format!("fine grid {w}x{l} per side is too large")))?;
        let t = 1.0 / w as f64;
        let a = 1.0 / side as f64;
        let delta = radius * w as f64 - 2.0 * std::f64::consts::SQRT_2;
        let sr = radius.sqrt();
        let order = serpentine(w, l);
        let mut rank = vec![0u32; side * side];
        for (label, &cell) in order.iter().enumerate() {
            rank[cell as usize] = label as u32;
        }
        Ok(Self {
            n_ref,
            radius,
            a_target,
            w,
            l,
            t,
            a,
            a_eff: (n_ref as f64).sqrt() * a,
            a_interval: a_n_interval(a_target, n_ref.max(2)),
            a_feasible,
            delta,
            delta_in_window: delta >= sr && delta < 2.0 * sr,
            order,
            rank,
        })
    }

    /// Fine squares per side, `W·L`.
    pub fn side(&self) -> usize {
        self.w * self.l
    }

    pub fn fine_count(&self) -> usize {
        self.side() * self.side()
    }

    pub fn coarse_count(&self) -> usize {
        self.w * self.w
    }

    /// `(col, row)` of the fine square containing `p`.
    pub fn fine_cell(&self, p: Point) -> (usize, usize) {
        let g = self.side();
        (cell_coord(p.x, g), cell_coord(p.y, g))
    }

    pub fn label_of(&self, p: Point) -> usize {
        let (c, r) = self.fine_cell(p);
        self.rank[r * self.side() + c] as usize
    }

    /// Coarse square id `row * W + col` of a fine cell.
    pub fn coarse_of_cell(&self, col: usize, row: usize) -> usize {
        (row / self.l) * self.w + col / self.l
    }

    /// `(col, row)` of the fine square with the given label.
    pub fn cell_of_label(&self, label: usize) -> (usize, usize) {
        let id = self.order[label] as usize;
        (id % self.side(), id / self.side())
    }

    /// `2√2·t < r`: nodes in corner-sharing coarse squares are adjacent.
    pub fn corner_adjacency_holds(&self) -> bool {
        2.0 * std::f64::consts::SQRT_2 * self.t < self.radius
    }

    /// Whether every pair of consecutive labels shares a full edge.
    pub fn labels_edge_adjacent(&self) -> bool {
        self.order.windows(2).all(|w| {
            let g = self.side();
            let (a, b) = (w[0] as usize, w[1] as usize);
            let (ac, ar, bc, br) = (a % g, a / g, b % g, b / g);
            ac.abs_diff(bc) + ar.abs_diff(br) == 1
        })
    }
}

/// Cell ids in block-serpentine order.
///
/// Coarse blocks are visited row by row, alternating direction. Inside a block
/// the fine squares are swept column by column, entering at the bottom or top
/// corner of the entry side in alternation; the last block of each row (except
/// the top row) is swept row by row instead so the walk leaves through its top
/// edge. Since `W` is odd the turning blocks are always entered at the bottom.
fn serpentine(w: usize, l: usize) -> Vec<u32> {
    let g = w * l;
    let mut order = Vec::with_capacity(g * g);
    for br in 0..w {
        let rightward = br % 2 == 0;
        for k in 0..w {
            let bc = if rightward { k } else { w - 1 - k };
            let (x0, y0) = (bc * l, br * l);
            let from_bottom = k % 2 == 0;
            let turning = k == w - 1 && br != w - 1;
            if turning {
                for lr in 0..l {
                    let forward = (lr % 2 == 0) == rightward;
                    for s in 0..l {
                        let lc = if forward { s } else { l - 1 - s };
                        order.push(((y0 + lr) * g + x0 + lc) as u32);
                    }
                }
            } else {
                for s in 0..l {
                    let lc = if rightward { s } else { l - 1 - s };
                    let up = (s % 2 == 0) == from_bottom;
                    for v in 0..l {
                        let lr = if up { v } else { l - 1 - v };
                        order.push(((y0 + lr) * g + x0 + lc) as u32);
                    }
                }
            }
        }
    }
    order
}
