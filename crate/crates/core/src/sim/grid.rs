//! Uniform grid over the cell, bucketed by cached file, for nearest-helper
//! queries within the collaboration distance.

use std::collections::HashMap;

use crate::model::Topology;

/// Distance between two points of the square cell `[0, side)²`.
pub fn distance(a: [f64; 2], b: [f64; 2], side: f64, topology: Topology) -> f64 {
    let mut dx = (a[0] - b[0]).abs();
    let mut dy = (a[1] - b[1]).abs();
    if topology == Topology::Torus {
        dx = dx.min(side - dx);
        dy = dy.min(side - dy);
    }
    dx.hypot(dy)
}

/// Helpers bucketed by `(file, cell_x, cell_y)` with cells at least `radius`
/// wide, so every helper within `radius` of a point lies in the 3×3 block of
/// cells around it.
pub struct HelperIndex {
    side: f64,
    topology: Topology,
    cells_per_axis: usize,
    cell_size: f64,
    buckets: HashMap<(u32, u32, u32), Vec<u32>>,
}

impl HelperIndex {
    pub fn new(positions: &[[f64; 2]], cached_file: &[u32], side: f64, radius: f64, topology: Topology) -> Self {
        let cells_per_axis = ((side / radius).floor() as usize).max(1);
        let cell_size = side / cells_per_axis as f64;
        let mut buckets: HashMap<(u32, u32, u32), Vec<u32>> = HashMap::new();
        let mut index = Self { side, topology, cells_per_axis, cell_size, buckets: HashMap::new() };
        for (user, (pos, &file)) in positions.iter().zip(cached_file).enumerate() {
            let (cx, cy) = index.cell_of(*pos);
            buckets.entry((file, cx, cy)).or_default().push(user as u32);
        }
        index.buckets = buckets;
        index
    }

    fn cell_of(&self, p: [f64; 2]) -> (u32, u32) {
        let last = self.cells_per_axis - 1;
        let cx = ((p[0] / self.cell_size) as usize).min(last);
        let cy = ((p[1] / self.cell_size) as usize).min(last);
        (cx as u32, cy as u32)
    }

    fn neighbour_cells(&self, c: u32) -> Vec<u32> {
        let g = self.cells_per_axis as i64;
        if g <= 3 {
            return (0..g as u32).collect();
        }
        let c = c as i64;
        (c - 1..=c + 1)
            .filter_map(|k| match self.topology {
                Topology::Torus => Some(k.rem_euclid(g) as u32),
                Topology::BoundedSquare => (0..g).contains(&k).then_some(k as u32),
            })
            .collect()
    }

    /// Nearest user other than `exclude` caching `file` within `radius` of
    /// `query`. Ties go to the lower user index.
    pub fn nearest(&self, positions: &[[f64; 2]], query: [f64; 2], file: u32, exclude: usize, radius: f64) -> Option<(usize, f64)> {
        let (cx, cy) = self.cell_of(query);
        let xs = self.neighbour_cells(cx);
        let ys = self.neighbour_cells(cy);
        let mut best: Option<(usize, f64)> = None;
        for &x in &xs {
            for &y in &ys {
                let Some(bucket) = self.buckets.get(&(file, x, y)) else { continue };
                for &v in bucket {
                    let v = v as usize;
                    if v == exclude {
                        continue;
                    }
                    let d = distance(query, positions[v], self.side, self.topology);
                    if d > radius {
                        continue;
                    }
                    best = match best {
                        Some((bv, bd)) if bd < d || (bd == d && bv < v) => Some((bv, bd)),
                        _ => Some((v, d)),
                    };
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(positions: &[[f64; 2]], files: &[u32], q: usize, radius: f64, side: f64, topo: Topology) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (v, p) in positions.iter().enumerate() {
            if v == q || files[v] != files[q] {
                continue;
            }
            let d = distance(positions[q], *p, side, topo);
            if d <= radius && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((v, d));
            }
        }
        best
    }

    #[test]
    fn torus_wraps() {
        let d = distance([1.0, 1.0], [99.0, 99.0], 100.0, Topology::Torus);
        assert!((d - 8f64.sqrt()).abs() < 1e-12);
        let d = distance([1.0, 1.0], [99.0, 99.0], 100.0, Topology::BoundedSquare);
        assert!((d - 98.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for topo in [Topology::Torus, Topology::BoundedSquare] {
            for radius in [3.0, 12.5, 40.0, 90.0] {
                let side = 100.0;
                let positions: Vec<[f64; 2]> = (0..600).map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side]).collect();
                let files: Vec<u32> = (0..600).map(|_| rng.random_range(0..5)).collect();
                let idx = HelperIndex::new(&positions, &files, side, radius, topo);
                for q in 0..positions.len() {
                    let got = idx.nearest(&positions, positions[q], files[q], q, radius);
                    let want = brute(&positions, &files, q, radius, side, topo);
                    assert_eq!(got.map(|g| g.0), want.map(|w| w.0), "{topo:?} r={radius} q={q}");
                }
            }
        }
    }
}
