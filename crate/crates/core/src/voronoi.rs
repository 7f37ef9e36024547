//! Voronoi diagrams on the unit torus.
//!
//! Each cell is built in the frame centered on its site: start from the
//! square `[-½, ½]²` around the site (every torus point has exactly one
//! representative there) and clip it by the bisector half-plane of each
//! relevant lattice copy `q + (i, j)`, `i, j ∈ {-1, 0, 1}`, of every other
//! site `q`.
//!
//! Candidates are clipped in a canonical order: increasing squared offset,
//! then site index, then shift. The grid-accelerated build walks bucket
//! rings around the site and releases candidates from a heap only once no
//! unvisited ring can hold a nearer one, stopping when the next candidate
//! is farther than twice the cell's current radius. Its clip sequence is
//! therefore a prefix of the exhaustive build's sequence, and the tail the
//! exhaustive build adds leaves the polygon untouched. Both routes produce
//! bit-identical cells.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::torus::{torus_distance, GridIndex, TorusPoint};

/// Sites closer than this are treated as coincident.
pub const MIN_SITE_SEPARATION: f64 = 1e-12;

/// Extra reach added to the `2r` pruning radius so that every skipped
/// bisector misses the polygon by a margin far above rounding error.
const PRUNE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiCell {
    pub site_index: usize,
    /// Convex, counter-clockwise, in absolute coordinates of the frame
    /// `[x − ½, x + ½] × [y − ½, y + ½]` centered at the site.
    pub polygon: Vec<[f64; 2]>,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiDiagram {
    pub sites: Vec<TorusPoint>,
    pub cells: Vec<VoronoiCell>,
}

impl VoronoiDiagram {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    pub fn area(&self, site: usize) -> f64 {
        self.cells[site].area
    }
}

/// Signed shoelace area of a closed polygon.
pub fn shoelace(polygon: &[[f64; 2]]) -> f64 {
    let n = polygon.len();
    let mut twice = 0.0;
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        twice += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * twice
}

/// Shoelace area of a cell polygon; rejects fewer than three vertices and
/// non-positive area.
pub fn cell_area(cell: &VoronoiCell) -> Result<f64> {
    polygon_area(&cell.polygon)
}

pub fn polygon_area(polygon: &[[f64; 2]]) -> Result<f64> {
    if polygon.len() < 3 {
        return Err(Error::DegenerateCell);
    }
    let a = shoelace(polygon);
    if a <= 0.0 {
        return Err(Error::DegenerateCell);
    }
    Ok(a)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist2: f64,
    site: u32,
    shift: (i8, i8),
    offset: [f64; 2],
}

impl Candidate {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.site.cmp(&other.site))
            .then(self.shift.cmp(&other.shift))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// reversed so that BinaryHeap pops the smallest key
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other.key_cmp(self)
    }
}

#[inline]
fn candidate(p: &TorusPoint, q: &TorusPoint, site: usize, sx: i8, sy: i8) -> Candidate {
    let dx = q.x + f64::from(sx) - p.x;
    let dy = q.y + f64::from(sy) - p.y;
    Candidate { dist2: dx * dx + dy * dy, site: site as u32, shift: (sx, sy), offset: [dx, dy] }
}

/// Convex polygon in the site-relative frame with a scratch buffer.
struct Clipper {
    poly: Vec<[f64; 2]>,
    scratch: Vec<[f64; 2]>,
    radius2: f64,
}

impl Clipper {
    fn new() -> Self {
        Self { poly: Vec::with_capacity(16), scratch: Vec::with_capacity(16), radius2: 0.0 }
    }

    fn reset(&mut self) {
        self.poly.clear();
        self.poly.extend_from_slice(&[[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]);
        self.radius2 = 0.5;
    }

    /// Intersects the polygon with `{v : v·d ≤ |d|²/2}`. Leaves it
    /// untouched when no vertex lies strictly outside.
    fn clip(&mut self, d: [f64; 2], dist2: f64) {
        let h = 0.5 * dist2;
        let side = |v: &[f64; 2]| v[0] * d[0] + v[1] * d[1] - h;
        if self.poly.iter().all(|v| side(v) <= 0.0) {
            return;
        }
        self.scratch.clear();
        let n = self.poly.len();
        for i in 0..n {
            let a = self.poly[i];
            let b = self.poly[(i + 1) % n];
            let sa = side(&a);
            let sb = side(&b);
            if sa <= 0.0 {
                self.scratch.push(a);
            }
            if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
                let t = sa / (sa - sb);
                self.scratch.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        std::mem::swap(&mut self.poly, &mut self.scratch);
        self.radius2 = self.poly.iter().map(|v| v[0] * v[0] + v[1] * v[1]).fold(0.0, f64::max);
    }

    /// Squared pruning radius: candidates at or beyond it cannot cut.
    fn reach2(&self) -> f64 {
        let reach = 2.0 * self.radius2.sqrt() + PRUNE_SLACK;
        reach * reach
    }

    fn apply(&mut self, site: usize, c: &Candidate) -> Result<()> {
        if c.dist2 < MIN_SITE_SEPARATION * MIN_SITE_SEPARATION {
            return Err(Error::CoincidentSites(site.min(c.site as usize), site.max(c.site as usize)));
        }
        self.clip(c.offset, c.dist2);
        Ok(())
    }

    fn finish(&self, site_index: usize, p: &TorusPoint) -> Result<VoronoiCell> {
        let area = polygon_area(&self.poly)?;
        let polygon = self.poly.iter().map(|v| [p.x + v[0], p.y + v[1]]).collect();
        Ok(VoronoiCell { site_index, polygon, area })
    }
}

fn check_input(sites: &[TorusPoint]) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::EmptyInput);
    }
    if sites.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::NonFiniteCoordinate);
    }
    Ok(())
}

/// Builds the torus Voronoi diagram using a `⌈√n⌉` bucket grid to prune
/// far candidates.
pub fn build_voronoi(sites: &[TorusPoint]) -> Result<VoronoiDiagram> {
    check_input(sites)?;
    let index = GridIndex::with_default_resolution(sites);
    let mut clipper = Clipper::new();
    let mut heap = BinaryHeap::with_capacity(64);
    let cells = (0..sites.len())
        .map(|i| build_cell(i, sites, &index, &mut clipper, &mut heap))
        .collect::<Result<Vec<_>>>()?;
    Ok(VoronoiDiagram { sites: sites.to_vec(), cells })
}

fn build_cell(
    i: usize,
    sites: &[TorusPoint],
    index: &GridIndex,
    clipper: &mut Clipper,
    heap: &mut BinaryHeap<Candidate>,
) -> Result<VoronoiCell> {
    let p = &sites[i];
    let (bx, by) = index.bucket_of(p);
    clipper.reset();
    heap.clear();
    let mut ring = 0usize;
    loop {
        let reach2 = clipper.reach2();
        let lb = index.ring_lower_bound(p, ring);
        let lb2 = lb * lb;
        match heap.peek() {
            Some(top) if top.dist2 < lb2 => {
                if top.dist2 >= reach2 {
                    break;
                }
                let c = heap.pop().expect("peeked");
                clipper.apply(i, &c)?;
                continue;
            }
            _ => {}
        }
        if lb2 >= reach2 {
            break;
        }
        push_ring(i, p, sites, index, bx, by, ring, heap);
        ring += 1;
    }
    clipper.finish(i, p)
}

#[allow(clippy::too_many_arguments)]
fn push_ring(
    i: usize,
    p: &TorusPoint,
    sites: &[TorusPoint],
    index: &GridIndex,
    bx: usize,
    by: usize,
    ring: usize,
    heap: &mut BinaryHeap<Candidate>,
) {
    let k = ring as isize;
    let mut visit = |ox: isize, oy: isize| {
        let (bucket, (sx, sy)) = index.wrapped_bucket(bx, by, ox, oy);
        // copies beyond the 3×3 block are at distance ≥ 1 and never cut
        // once the nearer copy of the same site has been applied
        if sx.abs() > 1 || sy.abs() > 1 {
            return;
        }
        for &s in bucket {
            let s = s as usize;
            if s != i {
                heap.push(candidate(p, &sites[s], s, sx as i8, sy as i8));
            }
        }
    };
    if k == 0 {
        visit(0, 0);
        return;
    }
    for o in -k..=k {
        visit(o, -k);
        visit(o, k);
    }
    for o in (-k + 1)..k {
        visit(-k, o);
        visit(k, o);
    }
}

/// Exhaustive construction: every cell is clipped against all `9(n − 1)`
/// copies in canonical order. Quadratic; meant as a cross-check.
pub fn build_voronoi_unpruned(sites: &[TorusPoint]) -> Result<VoronoiDiagram> {
    check_input(sites)?;
    let mut clipper = Clipper::new();
    let mut all = Vec::with_capacity(9 * sites.len());
    let mut cells = Vec::with_capacity(sites.len());
    for (i, p) in sites.iter().enumerate() {
        all.clear();
        for (j, q) in sites.iter().enumerate() {
            if j == i {
                continue;
            }
            for sx in -1..=1 {
                for sy in -1..=1 {
                    all.push(candidate(p, q, j, sx, sy));
                }
            }
        }
        all.sort_unstable_by(Candidate::key_cmp);
        clipper.reset();
        for c in &all {
            clipper.apply(i, c)?;
        }
        cells.push(clipper.finish(i, p)?);
    }
    Ok(VoronoiDiagram { sites: sites.to_vec(), cells })
}

/// Index and area of the largest cell; ties go to the smallest index.
pub fn largest_cell(diagram: &VoronoiDiagram) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, c) in diagram.cells.iter().enumerate() {
        if c.area > best.1 {
            best = (i, c.area);
        }
    }
    best
}

/// Index of the nearest site by brute force; ties go to the smallest index.
pub fn nearest_site_brute_force(sites: &[TorusPoint], q: &TorusPoint) -> usize {
    let mut best = (0, f64::INFINITY);
    for (j, s) in sites.iter().enumerate() {
        let d = torus_distance(q, s);
        if d < best.1 {
            best = (j, d);
        }
    }
    best.0
}

/// Monte Carlo estimate of every cell's area with binomial standard errors.
/// Samples are uniform torus points assigned to their brute-force nearest
/// site; this path shares no code with the clipping construction.
pub fn mc_area_oracle_all(sites: &[TorusPoint], samples: u64, seed: u64) -> Vec<(f64, f64)> {
    let mut hits = vec![0u64; sites.len()];
    let mut r = rng::from_seed(seed);
    for _ in 0..samples {
        let q = TorusPoint { x: r.gen(), y: r.gen() };
        hits[nearest_site_brute_force(sites, &q)] += 1;
    }
    let m = samples.max(1) as f64;
    hits.into_iter()
        .map(|h| {
            let est = h as f64 / m;
            (est, (est * (1.0 - est) / m).sqrt())
        })
        .collect()
}

/// Monte Carlo estimate of one cell's area: `(hit fraction, standard error)`.
pub fn mc_area_oracle(sites: &[TorusPoint], site_index: usize, samples: u64, seed: u64) -> (f64, f64) {
    mc_area_oracle_all(sites, samples, seed)[site_index]
}

/// Monte Carlo estimate of the fraction of the planar unit square made of
/// points strictly closer to `p` than to the square's boundary.
pub fn point_vs_boundary_fraction(p: [f64; 2], inner_samples: u64, seed: u64) -> f64 {
    let mut r = rng::from_seed(seed);
    point_vs_boundary_fraction_with(p, inner_samples, &mut r)
}

pub(crate) fn point_vs_boundary_fraction_with(p: [f64; 2], inner_samples: u64, r: &mut impl Rng) -> f64 {
    let mut hits = 0u64;
    for _ in 0..inner_samples {
        let qx: f64 = r.gen();
        let qy: f64 = r.gen();
        let to_boundary = qx.min(1.0 - qx).min(qy).min(1.0 - qy);
        let dx = qx - p[0];
        let dy = qy - p[1];
        if dx * dx + dy * dy < to_boundary * to_boundary {
            hits += 1;
        }
    }
    hits as f64 / inner_samples.max(1) as f64
}

/// Side of the inner square `C′` in a square of side 1 whose points keep
/// clearance `√2·side` to the boundary: `1 / (1 + 2√2)`.
pub fn inner_square_side() -> f64 {
    1.0 / (1.0 + 2.0 * std::f64::consts::SQRT_2)
}
