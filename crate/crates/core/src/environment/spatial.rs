//! Exact fixed-radius neighbour queries over 3D points.
//!
//! [`PointIndex`] is an immutable uniform grid in compressed-row layout, used
//! for obstacle clouds. [`PointGrid`] is a hashed grid that accepts inserts,
//! used for the planner's closed set. Neither approximates: every query
//! checks true Euclidean distances of all points in the overlapped cells.

use rustc_hash::FxHashMap;

use crate::geometry::Vec3;

const MAX_CELLS: usize = 1 << 24;

#[derive(Debug, Clone)]
pub struct PointIndex {
    points: Vec<Vec3>,
    origin: Vec3,
    cell: f64,
    dims: [usize; 3],
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl PointIndex {
    /// Builds the index; `cell_size` is a hint, grown if the grid would be too large.
    pub fn build(points: Vec<Vec3>, cell_size: f64) -> Self {
        assert!(cell_size > 0.0, "cell size must be positive");
        let (lo, hi) = bounding_box(&points);
        let extent = hi - lo;
        let mut cell = cell_size;
        let dims = loop {
            let dims = [0, 1, 2].map(|i| ((extent[i] / cell).floor() as usize + 1).max(1));
            if dims.iter().product::<usize>() <= MAX_CELLS {
                break dims;
            }
            cell *= 1.5;
        };
        let n_cells = dims.iter().product::<usize>();
        let cell_of = |p: &Vec3| -> usize {
            let c = [0, 1, 2].map(|i| (((p[i] - lo[i]) / cell).floor() as usize).min(dims[i] - 1));
            (c[2] * dims[1] + c[1]) * dims[0] + c[0]
        };
        let mut counts = vec![0u32; n_cells + 1];
        for p in &points {
            counts[cell_of(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut items = vec![0u32; points.len()];
        for (i, p) in points.iter().enumerate() {
            let c = cell_of(p);
            items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        Self {
            points,
            origin: lo,
            cell,
            dims,
            starts,
            items,
        }
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn cell_range(&self, p: &Vec3, radius: f64) -> Option<[(usize, usize); 3]> {
        let mut out = [(0, 0); 3];
        for i in 0..3 {
            let lo = ((p[i] - radius - self.origin[i]) / self.cell).floor();
            let hi = ((p[i] + radius - self.origin[i]) / self.cell).floor();
            if hi < 0.0 || lo > (self.dims[i] - 1) as f64 {
                return None;
            }
            out[i] = (lo.max(0.0) as usize, (hi as usize).min(self.dims[i] - 1));
        }
        Some(out)
    }

    fn cell_items(&self, x: usize, y: usize, z: usize) -> &[u32] {
        let c = (z * self.dims[1] + y) * self.dims[0] + x;
        &self.items[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    /// Calls `f` for every point with `‖point − p‖ ≤ radius`; stops early when `f` returns false.
    fn visit_within(&self, p: &Vec3, radius: f64, mut f: impl FnMut(usize) -> bool) {
        if self.points.is_empty() || !(radius >= 0.0) {
            return;
        }
        let Some([(x0, x1), (y0, y1), (z0, z1)]) = self.cell_range(p, radius) else {
            return;
        };
        let r2 = radius * radius;
        for z in z0..=z1 {
            for y in y0..=y1 {
                for x in x0..=x1 {
                    for &i in self.cell_items(x, y, z) {
                        if (self.points[i as usize] - p).norm_squared() <= r2 && !f(i as usize) {
                            return;
                        }
                    }
                }
            }
        }
    }

    /// Indices of all points within `radius` (inclusive) of `p`, ascending.
    pub fn within(&self, p: &Vec3, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit_within(p, radius, |i| {
            out.push(i);
            true
        });
        out.sort_unstable();
        out
    }

    pub fn any_within(&self, p: &Vec3, radius: f64) -> bool {
        let mut found = false;
        self.visit_within(p, radius, |_| {
            found = true;
            false
        });
        found
    }

    /// Nearest point and its distance.
    pub fn nearest(&self, p: &Vec3) -> Option<(usize, f64)> {
        self.nearest_where(p, |_| true)
    }

    /// Nearest point among those whose index passes `keep`.
    pub fn nearest_where(&self, p: &Vec3, keep: impl Fn(usize) -> bool) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let clamped = Vec3::from_fn(|i, _| {
            let hi = self.origin[i] + self.dims[i] as f64 * self.cell;
            p[i].clamp(self.origin[i], hi)
        });
        let outside = (p - clamped).norm();
        let home = [0, 1, 2].map(|i| {
            (((clamped[i] - self.origin[i]) / self.cell).floor() as isize).clamp(0, self.dims[i] as isize - 1)
        });
        let max_shell = *self.dims.iter().max().unwrap() as isize;
        let mut best: Option<(usize, f64)> = None;
        for shell in 0..=max_shell {
            let lo = home.map(|h| h - shell);
            let hi = home.map(|h| h + shell);
            for z in lo[2].max(0)..=hi[2].min(self.dims[2] as isize - 1) {
                for y in lo[1].max(0)..=hi[1].min(self.dims[1] as isize - 1) {
                    for x in lo[0].max(0)..=hi[0].min(self.dims[0] as isize - 1) {
                        let on_shell = x == lo[0] || x == hi[0] || y == lo[1] || y == hi[1] || z == lo[2] || z == hi[2];
                        if !on_shell {
                            continue;
                        }
                        for &i in self.cell_items(x as usize, y as usize, z as usize) {
                            if !keep(i as usize) {
                                continue;
                            }
                            let d = (self.points[i as usize] - p).norm();
                            if best.is_none_or(|(_, b)| d < b) {
                                best = Some((i as usize, d));
                            }
                        }
                    }
                }
            }
            // anything in a later shell is at least `shell · cell` from the clamped point
            if let Some((_, b)) = best {
                if b <= shell as f64 * self.cell - outside {
                    break;
                }
            }
        }
        best
    }
}

fn bounding_box(points: &[Vec3]) -> (Vec3, Vec3) {
    if points.is_empty() {
        return (Vec3::zeros(), Vec3::zeros());
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

/// Insertable hashed grid carrying a `u32` payload per point.
#[derive(Debug, Clone)]
pub struct PointGrid {
    cell: f64,
    cells: FxHashMap<[i64; 3], Vec<(Vec3, u32)>>,
    len: usize,
}

impl PointGrid {
    pub fn new(cell: f64) -> Self {
        assert!(cell > 0.0, "cell size must be positive");
        Self {
            cell,
            cells: FxHashMap::default(),
            len: 0,
        }
    }

    fn key(&self, p: &Vec3) -> [i64; 3] {
        [0, 1, 2].map(|i| (p[i] / self.cell).floor() as i64)
    }

    pub fn insert(&mut self, p: Vec3, payload: u32) {
        let key = self.key(&p);
        self.cells.entry(key).or_default().push((p, payload));
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Visits points with `‖point − p‖ ≤ radius`; stops early when `f` returns true.
    pub fn find_within(&self, p: &Vec3, radius: f64, mut f: impl FnMut(&Vec3, u32) -> bool) -> bool {
        if self.len == 0 || !(radius >= 0.0) {
            return false;
        }
        let lo = self.key(&p.add_scalar(-radius));
        let hi = self.key(&p.add_scalar(radius));
        let r2 = radius * radius;
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    if let Some(bucket) = self.cells.get(&[x, y, z]) {
                        for (q, payload) in bucket {
                            if (q - p).norm_squared() <= r2 && f(q, *payload) {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }

    pub fn nearest_within(&self, p: &Vec3, radius: f64) -> Option<(u32, f64)> {
        let mut best: Option<(u32, f64)> = None;
        self.find_within(p, radius, |q, id| {
            let d = (q - p).norm();
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((id, d));
            }
            false
        });
        best
    }
}
