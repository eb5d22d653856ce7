use super::{Point3, SimplicialMesh};

/// Barycentric tolerance for accepting a point as inside a cell.
const INSIDE_TOL: f64 = 1e-10;

/// A cell containing a query point and the point's barycentric coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Location {
    pub cell: usize,
    pub bary: [f64; 4],
}

/// Uniform bucket grid over cell bounding boxes.
#[derive(Debug, Clone)]
pub struct CellLocator {
    lo: Point3,
    inv_h: f64,
    dims: [usize; 3],
    start: Vec<usize>,
    items: Vec<u32>,
}

impl CellLocator {
    pub fn new(mesh: &SimplicialMesh) -> Self {
        let n = mesh.num_cells().max(1);
        let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for p in mesh.vertices() {
            lo = Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
        if !lo.is_finite() {
            lo = Point3::ORIGIN;
            hi = Point3::ORIGIN;
        }
        let ext = hi - lo;
        let span = ext.x.max(ext.y).max(ext.z).max(1e-300);
        // Roughly one bucket per cell along the longest axis scaled by volume share.
        let per_axis = ((n as f64).cbrt().ceil() as usize).clamp(1, 256);
        let h = span / per_axis as f64;
        let dims = [
            ((ext.x / h).ceil() as usize).max(1),
            ((ext.y / h).ceil() as usize).max(1),
            ((ext.z / h).ceil() as usize).max(1),
        ];
        let inv_h = 1.0 / h;
        let nb = dims[0] * dims[1] * dims[2];
        let ranges: Vec<([usize; 3], [usize; 3])> = (0..mesh.num_cells())
            .map(|c| {
                let p = mesh.cell_points(c);
                let mut a = p[0];
                let mut b = p[0];
                for q in &p[1..] {
                    a = Point3::new(a.x.min(q.x), a.y.min(q.y), a.z.min(q.z));
                    b = Point3::new(b.x.max(q.x), b.y.max(q.y), b.z.max(q.z));
                }
                (bucket_index(lo, inv_h, dims, a), bucket_index(lo, inv_h, dims, b))
            })
            .collect();
        let mut counts = vec![0usize; nb + 1];
        for (a, b) in &ranges {
            for i in a[0]..=b[0] {
                for j in a[1]..=b[1] {
                    for k in a[2]..=b[2] {
                        counts[(i * dims[1] + j) * dims[2] + k + 1] += 1;
                    }
                }
            }
        }
        for i in 0..nb {
            counts[i + 1] += counts[i];
        }
        let start = counts.clone();
        let mut fill = counts;
        let mut items = vec![0u32; start[nb]];
        for (c, (a, b)) in ranges.iter().enumerate() {
            for i in a[0]..=b[0] {
                for j in a[1]..=b[1] {
                    for k in a[2]..=b[2] {
                        let bi = (i * dims[1] + j) * dims[2] + k;
                        items[fill[bi]] = c as u32;
                        fill[bi] += 1;
                    }
                }
            }
        }
        CellLocator { lo, inv_h, dims, start, items }
    }

    /// Returns the candidate cell whose smallest barycentric coordinate is
    /// largest, provided the point lies inside it up to a small tolerance.
    pub fn locate(&self, mesh: &SimplicialMesh, p: Point3) -> Option<Location> {
        let rel = p - self.lo;
        let f = [rel.x * self.inv_h, rel.y * self.inv_h, rel.z * self.inv_h];
        if f.iter().zip(self.dims.iter()).any(|(&v, &d)| v < -1e-9 || v > d as f64 + 1e-9) {
            return None;
        }
        let b = bucket_index(self.lo, self.inv_h, self.dims, p);
        let bi = (b[0] * self.dims[1] + b[1]) * self.dims[2] + b[2];
        let mut best: Option<Location> = None;
        let mut best_min = f64::NEG_INFINITY;
        for &c in &self.items[self.start[bi]..self.start[bi + 1]] {
            let c = c as usize;
            let bary = barycentric(&mesh.cell_points(c), p);
            let m = bary.iter().copied().fold(f64::INFINITY, f64::min);
            if m > best_min {
                best_min = m;
                best = Some(Location { cell: c, bary });
            }
        }
        best.filter(|_| best_min >= -INSIDE_TOL)
    }
}

fn bucket_index(lo: Point3, inv_h: f64, dims: [usize; 3], p: Point3) -> [usize; 3] {
    let r = p - lo;
    let clampi = |v: f64, d: usize| -> usize { (v.max(0.0) as usize).min(d - 1) };
    [
        clampi(r.x * inv_h, dims[0]),
        clampi(r.y * inv_h, dims[1]),
        clampi(r.z * inv_h, dims[2]),
    ]
}

/// Barycentric coordinates of `p` with respect to tetrahedron `t`.
pub fn barycentric(t: &[Point3; 4], p: Point3) -> [f64; 4] {
    let vol = super::signed_volume(t[0], t[1], t[2], t[3]);
    let l1 = super::signed_volume(t[0], p, t[2], t[3]) / vol;
    let l2 = super::signed_volume(t[0], t[1], p, t[3]) / vol;
    let l3 = super::signed_volume(t[0], t[1], t[2], p) / vol;
    [1.0 - l1 - l2 - l3, l1, l2, l3]
}
