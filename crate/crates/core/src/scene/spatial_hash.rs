use super::Aabb;
use crate::Vec3;

/// Dense cell grids are capped at this many cells per point (plus a
/// constant); coarser cells are used beyond that. Cell size only affects
/// speed, never results.
const MAX_CELLS_PER_POINT: usize = 8;

/// Uniform-grid spatial hash over a fixed point set.
///
/// Nearest-neighbour queries search rings of cells outward from the query
/// cell and stop once no unvisited cell can hold a closer point, so results
/// are exact. Ties resolve to the lowest point index.
#[derive(Debug, Clone)]
pub struct SpatialHash {
    cell: f64,
    points: Vec<Vec3>,
    lo: [i64; 3],
    hi: [i64; 3],
    dims: [usize; 3],
    /// Point indices grouped by cell, ascending within a cell.
    items: Vec<usize>,
    /// `items[starts[c]..starts[c + 1]]` lie in cell `c`.
    starts: Vec<usize>,
}

impl SpatialHash {
    pub fn new(points: &[Vec3], cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "cell size must be positive");
        let mut cell = cell;
        let budget = MAX_CELLS_PER_POINT * points.len() + 4096;
        let (lo, hi, dims) = loop {
            let mut lo = [i64::MAX; 3];
            let mut hi = [i64::MIN; 3];
            for p in points {
                let key = Self::key_for(cell, p);
                for a in 0..3 {
                    lo[a] = lo[a].min(key[a]);
                    hi[a] = hi[a].max(key[a]);
                }
            }
            if points.is_empty() {
                break ([0; 3], [-1; 3], [0; 3]);
            }
            let dims = [0, 1, 2].map(|a| (hi[a] - lo[a] + 1) as usize);
            let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
            match total {
                Some(t) if t <= budget => break (lo, hi, dims),
                _ => cell *= 2.0,
            }
        };
        let ncells = dims[0] * dims[1] * dims[2];
        let cell_of = |p: &Vec3| {
            let k = Self::key_for(cell, p);
            let r = [0, 1, 2].map(|a| (k[a] - lo[a]) as usize);
            r[0] + dims[0] * (r[1] + dims[1] * r[2])
        };
        let mut starts = vec![0usize; ncells + 1];
        for p in points {
            starts[cell_of(p) + 1] += 1;
        }
        for c in 0..ncells {
            starts[c + 1] += starts[c];
        }
        let mut fill = starts.clone();
        let mut items = vec![0usize; points.len()];
        for (i, p) in points.iter().enumerate() {
            let c = cell_of(p);
            items[fill[c]] = i;
            fill[c] += 1;
        }
        Self {
            cell,
            points: points.to_vec(),
            lo,
            hi,
            dims,
            items,
            starts,
        }
    }

    /// Cell size proportional to the mean point spacing inside the bounding
    /// box of `points`.
    pub fn with_auto_cell(points: &[Vec3]) -> Self {
        Self::new(points, auto_cell(points))
    }

    #[inline]
    fn cell_items(&self, key: [i64; 3]) -> Option<&[usize]> {
        let mut r = [0usize; 3];
        for a in 0..3 {
            if key[a] < self.lo[a] || key[a] > self.hi[a] {
                return None;
            }
            r[a] = (key[a] - self.lo[a]) as usize;
        }
        let c = r[0] + self.dims[0] * (r[1] + self.dims[1] * r[2]);
        let s = &self.items[self.starts[c]..self.starts[c + 1]];
        (!s.is_empty()).then_some(s)
    }

    fn key_for(cell: f64, p: &Vec3) -> [i64; 3] {
        [
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        ]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    fn brute_nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.points.iter().enumerate() {
            let d2 = (p - q).norm_squared();
            if best.is_none_or(|(_, b)| d2 < b) {
                best = Some((i, d2));
            }
        }
        best
    }

    /// Index of the nearest point and its squared distance.
    pub fn nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let qk = Self::key_for(self.cell, q);
        // rings needed to cover every occupied cell
        let mut max_ring = 0i64;
        for a in 0..3 {
            max_ring = max_ring.max((qk[a] - self.lo[a]).abs()).max((self.hi[a] - qk[a]).abs());
        }
        let mut best: Option<(usize, f64)> = None;
        let mut visited_cells = 0usize;
        for k in 0..=max_ring {
            let ring_cells = if k == 0 { 1 } else { (2 * k + 1).pow(3) - (2 * k - 1).pow(3) } as usize;
            if visited_cells + ring_cells > 8 * self.points.len() + 64 {
                return self.brute_nearest(q);
            }
            visited_cells += ring_cells;
            self.visit_ring(qk, k, |idx| {
                for &i in idx {
                    let d2 = (self.points[i] - q).norm_squared();
                    let better = match best {
                        None => true,
                        Some((bi, bd)) => d2 < bd || (d2 == bd && i < bi),
                    };
                    if better {
                        best = Some((i, d2));
                    }
                }
            });
            if let Some((_, bd)) = best {
                let reach = k as f64 * self.cell;
                if bd <= reach * reach {
                    break;
                }
            }
        }
        best
    }

    /// Indices of all points within `radius` of `q`, ascending.
    pub fn within(&self, q: &Vec3, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.points.is_empty() || radius < 0.0 {
            return out;
        }
        let mut lo = Self::key_for(self.cell, &(q - Vec3::repeat(radius)));
        let mut hi = Self::key_for(self.cell, &(q + Vec3::repeat(radius)));
        for a in 0..3 {
            lo[a] = lo[a].max(self.lo[a]);
            hi[a] = hi[a].min(self.hi[a]);
            if lo[a] > hi[a] {
                return out;
            }
        }
        let span: i64 = (0..3).map(|a| hi[a] - lo[a] + 1).product();
        let r2 = radius * radius;
        if span as usize > 8 * self.points.len() + 64 {
            out.extend(
                self.points
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| (*p - q).norm_squared() <= r2)
                    .map(|(i, _)| i),
            );
            return out;
        }
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    if let Some(idx) = self.cell_items([x, y, z]) {
                        out.extend(idx.iter().copied().filter(|&i| (self.points[i] - q).norm_squared() <= r2));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn visit_ring(&self, c: [i64; 3], k: i64, mut f: impl FnMut(&[usize])) {
        for dz in -k..=k {
            for dy in -k..=k {
                let on_shell = dz.abs() == k || dy.abs() == k;
                let step = if on_shell || k == 0 { 1 } else { 2 * k };
                let mut dx = -k;
                while dx <= k {
                    if let Some(idx) = self.cell_items([c[0] + dx, c[1] + dy, c[2] + dz]) {
                        f(idx);
                    }
                    dx += step;
                }
            }
        }
    }
}

pub(crate) fn auto_cell(points: &[Vec3]) -> f64 {
    let Some(bb) = Aabb::from_points(points) else {
        return 1.0;
    };
    let diag = bb.diagonal();
    if !(diag > 0.0 && diag.is_finite()) {
        return 1.0;
    }
    let e = bb.extent();
    let floor = diag * 1e-3;
    let vol = e.x.max(floor) * e.y.max(floor) * e.z.max(floor);
    let cell = 2.0 * (vol / points.len() as f64).cbrt();
    if cell > 0.0 && cell.is_finite() {
        cell
    } else {
        1.0
    }
}
