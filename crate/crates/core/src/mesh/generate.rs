use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{signed_area, Rect, Vec2};

use super::{ElementGeometry, MeshError, PolyMesh, Result};

/// Seed used by [`generate_mesh`] for the randomised families.
pub const DEFAULT_MESH_SEED: u64 = 0x005e_ed0f_0afe;

/// Relative jitter bound for the perturbed-quadrilateral family.
const QUAD_JITTER: f64 = 0.2;
/// Depth of the notch, relative to the row height, for the non-convex family.
const NOTCH_DEPTH: f64 = 0.25;
const LLOYD_ITERATIONS: usize = 3;

/// The six mesh families used in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeshFamily {
    /// Structured right triangles (two per grid square).
    Triangles,
    /// Uniform squares.
    Squares,
    /// Squares whose interior horizontal edges are bent into chevrons, giving
    /// one concave notch vertex per cell (all rows except the top one).
    NonConvex,
    /// Quadrilaterals with randomly jittered interior vertices.
    DistortedQuads,
    /// Hexagon-dominant tiling clipped to the domain.
    Hexagons,
    /// Lloyd-relaxed Voronoi tessellation of uniform random seeds.
    Voronoi,
}

impl MeshFamily {
    pub const ALL: [MeshFamily; 6] = [
        MeshFamily::Triangles,
        MeshFamily::Squares,
        MeshFamily::NonConvex,
        MeshFamily::DistortedQuads,
        MeshFamily::Hexagons,
        MeshFamily::Voronoi,
    ];

    /// Short tag `T1` … `T6`.
    pub fn tag(self) -> &'static str {
        match self {
            MeshFamily::Triangles => "T1",
            MeshFamily::Squares => "T2",
            MeshFamily::NonConvex => "T3",
            MeshFamily::DistortedQuads => "T4",
            MeshFamily::Hexagons => "T5",
            MeshFamily::Voronoi => "T6",
        }
    }

    /// Whether `h` decreases strictly with the resolution parameter.
    pub fn is_structured(self) -> bool {
        !matches!(self, MeshFamily::Voronoi)
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, MeshFamily::DistortedQuads | MeshFamily::Voronoi)
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for MeshFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let f = match s.trim().to_ascii_lowercase().as_str() {
            "t1" | "triangles" => MeshFamily::Triangles,
            "t2" | "squares" => MeshFamily::Squares,
            "t3" | "nonconvex" | "non-convex" => MeshFamily::NonConvex,
            "t4" | "distorted" | "quads" => MeshFamily::DistortedQuads,
            "t5" | "hexagons" => MeshFamily::Hexagons,
            "t6" | "voronoi" => MeshFamily::Voronoi,
            other => return Err(format!("unknown mesh family `{other}`")),
        };
        Ok(f)
    }
}

/// Generates a mesh of `domain` with the default seed.
///
/// For the grid-based families `n` is the number of cells per side; for the
/// hexagonal family it is the number of hexagon columns; for the Voronoi
/// family it is the number of seeds (and hence cells).
pub fn generate_mesh(family: MeshFamily, n: usize, domain: Rect) -> Result<PolyMesh> {
    generate_mesh_seeded(family, n, domain, DEFAULT_MESH_SEED)
}

pub fn generate_mesh_seeded(
    family: MeshFamily,
    n: usize,
    domain: Rect,
    seed: u64,
) -> Result<PolyMesh> {
    if n == 0 {
        return Err(MeshError::InvalidResolution(n));
    }
    if domain.is_degenerate() {
        return Err(MeshError::DegenerateDomain(domain));
    }
    match family {
        MeshFamily::Triangles => grid_mesh(n, domain, None, GridCells::Triangles),
        MeshFamily::Squares => grid_mesh(n, domain, None, GridCells::Quads),
        MeshFamily::DistortedQuads => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            grid_mesh(n, domain, Some(&mut rng), GridCells::Quads)
        }
        MeshFamily::NonConvex => chevron_mesh(n, domain),
        MeshFamily::Hexagons => hexagon_mesh(n, domain),
        MeshFamily::Voronoi => voronoi_mesh(n, domain, seed),
    }
}

enum GridCells {
    Triangles,
    Quads,
}

fn grid_mesh(
    n: usize,
    domain: Rect,
    jitter: Option<&mut ChaCha8Rng>,
    kind: GridCells,
) -> Result<PolyMesh> {
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(domain.lerp(i as f64 / n as f64, j as f64 / n as f64));
        }
    }
    if let Some(rng) = jitter {
        let radius = QUAD_JITTER * (domain.width().min(domain.height()) / n as f64);
        for j in 1..n {
            for i in 1..n {
                // Uniform in a disc of the given radius.
                let r = radius * rng.gen::<f64>().sqrt();
                let th = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
                vertices[idx(i, j)] += Vec2::new(th.cos(), th.sin()) * r;
            }
        }
    }
    let mut cells = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            match kind {
                GridCells::Triangles => {
                    cells.push(vec![a, b, c]);
                    cells.push(vec![a, c, d]);
                }
                GridCells::Quads => cells.push(vec![a, b, c, d]),
            }
        }
    }
    PolyMesh::new(vertices, cells)
}

fn chevron_mesh(n: usize, domain: Rect) -> Result<PolyMesh> {
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(domain.lerp(i as f64 / n as f64, j as f64 / n as f64));
        }
    }
    let dy = domain.height() / n as f64;
    // Midpoint vertices on interior horizontal lines, pushed down into the
    // cell below.
    let mut mid = HashMap::new();
    for j in 1..n {
        for i in 0..n {
            let p = domain.lerp((i as f64 + 0.5) / n as f64, j as f64 / n as f64)
                - Vec2::new(0.0, NOTCH_DEPTH * dy);
            mid.insert((i, j), vertices.len());
            vertices.push(p);
        }
    }
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let mut c = vec![idx(i, j)];
            if let Some(&m) = mid.get(&(i, j)) {
                c.push(m);
            }
            c.push(idx(i + 1, j));
            c.push(idx(i + 1, j + 1));
            if let Some(&m) = mid.get(&(i, j + 1)) {
                c.push(m);
            }
            c.push(idx(i, j + 1));
            cells.push(c);
        }
    }
    PolyMesh::new(vertices, cells)
}

fn hexagon_mesh(n: usize, domain: Rect) -> Result<PolyMesh> {
    // Flat-topped hexagons centred on a staggered lattice; boundary columns and
    // rows are centred on the domain boundary and get cut in half.
    let dx = domain.width() / n as f64;
    let side = dx / 1.5;
    let regular_dy = 3f64.sqrt() * side;
    let k = ((domain.height() / regular_dy).round() as usize).max(1);
    let dy = domain.height() / k as f64;
    let half = 0.5 * dy;
    let mut polys = Vec::new();
    for i in 0..=n {
        let cx = domain.min.x + i as f64 * dx;
        let centers: Vec<f64> = if i % 2 == 0 {
            (0..=k).map(|j| domain.min.y + j as f64 * dy).collect()
        } else {
            (0..k).map(|j| domain.min.y + (j as f64 + 0.5) * dy).collect()
        };
        for cy in centers {
            let c = Vec2::new(cx, cy);
            let hex = vec![
                c + Vec2::new(side, 0.0),
                c + Vec2::new(0.5 * side, half),
                c + Vec2::new(-0.5 * side, half),
                c + Vec2::new(-side, 0.0),
                c + Vec2::new(-0.5 * side, -half),
                c + Vec2::new(0.5 * side, -half),
            ];
            let clipped = clip_to_rect(hex, domain);
            if clipped.len() >= 3 {
                polys.push(clipped);
            }
        }
    }
    weld_polygons(polys, domain)
}

fn voronoi_mesh(n: usize, domain: Rect, seed: u64) -> Result<PolyMesh> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds: Vec<Vec2> = (0..n)
        .map(|_| domain.lerp(rng.gen::<f64>(), rng.gen::<f64>()))
        .collect();
    for _ in 0..LLOYD_ITERATIONS {
        let cells = voronoi_cells(&seeds, domain);
        seeds = cells
            .into_iter()
            .map(|c| ElementGeometry::from_polygon(c).centroid)
            .collect();
    }
    weld_polygons(voronoi_cells(&seeds, domain), domain)
}

/// Voronoi cells of `seeds` restricted to `domain`, one convex CCW polygon per
/// seed, built by successive half-plane clipping against nearby seeds.
pub(crate) fn voronoi_cells(seeds: &[Vec2], domain: Rect) -> Vec<Vec<Vec2>> {
    let n = seeds.len();
    let g = ((n as f64).sqrt().ceil() as usize).max(1);
    let bw = domain.width() / g as f64;
    let bh = domain.height() / g as f64;
    let bucket_of = |p: Vec2| {
        let bx = (((p.x - domain.min.x) / bw) as isize).clamp(0, g as isize - 1);
        let by = (((p.y - domain.min.y) / bh) as isize).clamp(0, g as isize - 1);
        (bx, by)
    };
    let mut buckets = vec![Vec::new(); g * g];
    for (i, &s) in seeds.iter().enumerate() {
        let (bx, by) = bucket_of(s);
        buckets[by as usize * g + bx as usize].push(i);
    }
    let eps = 1e-14 * domain.diameter();
    let min_bucket = bw.min(bh);

    let mut out = Vec::with_capacity(n);
    for (i, &si) in seeds.iter().enumerate() {
        let mut cell = domain.corners().to_vec();
        let (bx, by) = bucket_of(si);
        let mut ring = 0isize;
        loop {
            let mut candidates = Vec::new();
            for qy in (by - ring)..=(by + ring) {
                for qx in (bx - ring)..=(bx + ring) {
                    if (qx - bx).abs() != ring && (qy - by).abs() != ring {
                        continue;
                    }
                    if qx < 0 || qy < 0 || qx >= g as isize || qy >= g as isize {
                        continue;
                    }
                    candidates.extend_from_slice(&buckets[qy as usize * g + qx as usize]);
                }
            }
            candidates.sort_by(|&a, &b| {
                (seeds[a] - si)
                    .norm_sq()
                    .total_cmp(&(seeds[b] - si).norm_sq())
                    .then(a.cmp(&b))
            });
            for j in candidates {
                if j == i || (seeds[j] - si).norm() < eps {
                    continue;
                }
                let normal = seeds[j] - si;
                let mid = (seeds[j] + si) * 0.5;
                cell = clip_half_plane(&cell, mid, normal);
            }
            let reach = cell.iter().map(|&v| (v - si).norm()).fold(0.0, f64::max);
            // Every seed outside the visited rings is at least ring*min_bucket
            // away and cannot cut the current cell once that exceeds 2*reach.
            if ring as f64 * min_bucket > 2.0 * reach || ring as usize > g {
                break;
            }
            ring += 1;
        }
        out.push(cell);
    }
    out
}

/// Keeps the part of a convex polygon with `(p − origin)·normal ≤ 0`.
pub(crate) fn clip_half_plane(poly: &[Vec2], origin: Vec2, normal: Vec2) -> Vec<Vec2> {
    let m = poly.len();
    let mut out = Vec::with_capacity(m + 1);
    for k in 0..m {
        let p = poly[k];
        let q = poly[(k + 1) % m];
        let dp = (p - origin).dot(normal);
        let dq = (q - origin).dot(normal);
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let t = dp / (dp - dq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

fn clip_to_rect(poly: Vec<Vec2>, r: Rect) -> Vec<Vec2> {
    let mut p = poly;
    p = clip_half_plane(&p, r.min, Vec2::new(-1.0, 0.0));
    p = clip_half_plane(&p, r.max, Vec2::new(1.0, 0.0));
    p = clip_half_plane(&p, r.min, Vec2::new(0.0, -1.0));
    p = clip_half_plane(&p, r.max, Vec2::new(0.0, 1.0));
    p
}

/// Merges coincident vertices of independently built polygons, snaps
/// near-boundary coordinates onto the domain boundary and drops degenerate
/// pieces.
fn weld_polygons(polys: Vec<Vec<Vec2>>, domain: Rect) -> Result<PolyMesh> {
    let tol = 1e-10 * domain.diameter();
    let snap = |mut p: Vec2| {
        for (v, lo, hi) in [
            (&mut p.x, domain.min.x, domain.max.x),
            (&mut p.y, domain.min.y, domain.max.y),
        ] {
            if (*v - lo).abs() <= tol {
                *v = lo;
            } else if (*v - hi).abs() <= tol {
                *v = hi;
            }
        }
        p
    };
    let cell_size = 4.0 * tol;
    let key = |p: Vec2| {
        (
            ((p.x - domain.min.x) / cell_size).floor() as i64,
            ((p.y - domain.min.y) / cell_size).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut vertices: Vec<Vec2> = Vec::new();
    let mut cells = Vec::with_capacity(polys.len());
    for poly in polys {
        let mut ids: Vec<usize> = Vec::with_capacity(poly.len());
        for p in poly {
            let p = snap(p);
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                        for &v in list {
                            if (vertices[v] - p).norm() <= tol {
                                found = Some(v);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let id = found.unwrap_or_else(|| {
                vertices.push(p);
                grid.entry((kx, ky)).or_default().push(vertices.len() - 1);
                vertices.len() - 1
            });
            if ids.last() != Some(&id) {
                ids.push(id);
            }
        }
        while ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        if ids.len() < 3 {
            continue;
        }
        let pts: Vec<Vec2> = ids.iter().map(|&v| vertices[v]).collect();
        if signed_area(&pts) <= tol * tol {
            continue;
        }
        cells.push(ids);
    }
    PolyMesh::new(vertices, cells)
}
