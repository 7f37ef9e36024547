//! The unit torus `[0,1)²`: canonical points, the wraparound metric and a
//! uniform bucket grid for neighbor queries.

use crate::error::{Error, Result};

/// Largest possible torus distance, reached at offset `(½, ½)`.
pub const MAX_TORUS_DISTANCE: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A point of the unit torus. Coordinates live in the half-open interval
/// `[0, 1)`; build one with [`canonicalize`] when the input may lie outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    pub x: f64,
    pub y: f64,
}

impl TorusPoint {
    /// Wraps `(x, y)` onto the torus. See [`canonicalize`].
    pub fn new(x: f64, y: f64) -> Result<Self> {
        canonicalize(x, y)
    }

    pub fn distance(&self, other: &TorusPoint) -> f64 {
        torus_distance(self, other)
    }
}

fn wrap_unit(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    // rem_euclid of a tiny negative value rounds up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Reduces both coordinates modulo 1 into `[0, 1)`.
pub fn canonicalize(x: f64, y: f64) -> Result<TorusPoint> {
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::NonFiniteCoordinate);
    }
    Ok(TorusPoint { x: wrap_unit(x), y: wrap_unit(y) })
}

#[inline]
fn axis_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Euclidean distance with per-axis wraparound. Both points must be canonical.
#[inline]
pub fn torus_distance(p: &TorusPoint, q: &TorusPoint) -> f64 {
    let dx = axis_gap(p.x, q.x);
    let dy = axis_gap(p.y, q.y);
    (dx * dx + dy * dy).sqrt()
}

/// `resolution × resolution` buckets over the torus holding site indices.
///
/// Bucket `(bx, by)` covers `[bx/g, (bx+1)/g) × [by/g, (by+1)/g)`; buckets
/// are stored row-major by `by`. The index can be grown one site at a time
/// with [`GridIndex::insert`], which is how the game engine keeps an index
/// of the revealed prefix.
#[derive(Debug, Clone)]
pub struct GridIndex {
    resolution: usize,
    buckets: Vec<Vec<u32>>,
    len: usize,
}

/// Default resolution `⌈√n⌉`, at least 1.
pub fn default_resolution(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).max(1)
}

impl GridIndex {
    pub fn empty(resolution: usize) -> Result<Self> {
        if resolution < 1 {
            return Err(Error::InvalidResolution(resolution));
        }
        Ok(Self { resolution, buckets: vec![Vec::new(); resolution * resolution], len: 0 })
    }

    /// Indexes `sites` in order; site `i` is stored under index `i`.
    pub fn build(sites: &[TorusPoint], resolution: usize) -> Result<Self> {
        let mut index = Self::empty(resolution)?;
        for (i, p) in sites.iter().enumerate() {
            index.insert(i, p);
        }
        Ok(index)
    }

    pub fn with_default_resolution(sites: &[TorusPoint]) -> Self {
        Self::build(sites, default_resolution(sites.len())).expect("default resolution is positive")
    }

    pub fn insert(&mut self, site: usize, p: &TorusPoint) {
        let (bx, by) = self.bucket_of(p);
        self.buckets[by * self.resolution + bx].push(site as u32);
        self.len += 1;
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Number of indexed sites.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn cell_size(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    /// `(⌊x·g⌋, ⌊y·g⌋)`, clamped to `g − 1` against rounding at the top edge.
    pub fn bucket_of(&self, p: &TorusPoint) -> (usize, usize) {
        let g = self.resolution;
        let b = |v: f64| ((v * g as f64).floor() as usize).min(g - 1);
        (b(p.x), b(p.y))
    }

    pub fn bucket(&self, bx: usize, by: usize) -> &[u32] {
        &self.buckets[by * self.resolution + bx]
    }

    /// Bucket reached from `(bx, by)` by an unwrapped offset, together with
    /// the lattice shift that maps points of that bucket onto the offset
    /// copy: a site `q` stored there appears at `q + shift`.
    pub(crate) fn wrapped_bucket(&self, bx: usize, by: usize, ox: isize, oy: isize) -> (&[u32], (i64, i64)) {
        let g = self.resolution as isize;
        let ux = bx as isize + ox;
        let uy = by as isize + oy;
        let (wx, sx) = (ux.rem_euclid(g), ux.div_euclid(g));
        let (wy, sy) = (uy.rem_euclid(g), uy.div_euclid(g));
        (self.bucket(wx as usize, wy as usize), (sx as i64, sy as i64))
    }

    /// Lower bound on the distance from `p` to anything in Chebyshev ring
    /// `k` of unwrapped buckets around `p`'s bucket.
    pub(crate) fn ring_lower_bound(&self, p: &TorusPoint, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let h = self.cell_size();
        let (bx, by) = self.bucket_of(p);
        let lx = (p.x - bx as f64 * h).clamp(0.0, h);
        let ly = (p.y - by as f64 * h).clamp(0.0, h);
        let margin = lx.min(h - lx).min(ly).min(h - ly);
        // slack absorbs floor() disagreeing with the subtraction above
        ((k - 1) as f64 * h + margin - 1e-12).max(0.0)
    }

    /// Calls `visit` once for every indexed site whose bucket can hold
    /// points within `radius` of `p`. Sites are visited in bucket order,
    /// so callers must still test the actual distance.
    pub fn for_each_candidate(&self, p: &TorusPoint, radius: f64, mut visit: impl FnMut(usize) -> bool) {
        let g = self.resolution;
        let reach = (radius * g as f64).ceil() as usize + 1;
        if 2 * reach + 1 >= g {
            for bucket in &self.buckets {
                for &s in bucket {
                    if !visit(s as usize) {
                        return;
                    }
                }
            }
            return;
        }
        let (bx, by) = self.bucket_of(p);
        let reach = reach as isize;
        for oy in -reach..=reach {
            for ox in -reach..=reach {
                let (bucket, _) = self.wrapped_bucket(bx, by, ox, oy);
                for &s in bucket {
                    if !visit(s as usize) {
                        return;
                    }
                }
            }
        }
    }

    /// Whether some indexed site other than `exclude` lies at torus
    /// distance strictly less than `radius` from `p`.
    pub fn any_within(&self, sites: &[TorusPoint], p: &TorusPoint, radius: f64, exclude: Option<usize>) -> bool {
        let mut found = false;
        self.for_each_candidate(p, radius, |s| {
            if Some(s) != exclude && torus_distance(p, &sites[s]) < radius {
                found = true;
            }
            !found
        });
        found
    }

    /// Number of indexed sites other than `exclude` strictly within `radius`.
    pub fn count_within(&self, sites: &[TorusPoint], p: &TorusPoint, radius: f64, exclude: Option<usize>) -> usize {
        let mut count = 0;
        self.for_each_candidate(p, radius, |s| {
            if Some(s) != exclude && torus_distance(p, &sites[s]) < radius {
                count += 1;
            }
            true
        });
        count
    }
}

/// Distance from site `i` to its nearest other site, by expanding ring
/// search over `index`.
pub fn nearest_other_site_distance(i: usize, sites: &[TorusPoint], index: &GridIndex) -> Result<f64> {
    if sites.len() < 2 {
        return Err(Error::NoOtherSite);
    }
    if i >= sites.len() {
        return Err(Error::IndexOutOfRange { index: i, len: sites.len() });
    }
    let p = &sites[i];
    let g = index.resolution();
    let (bx, by) = index.bucket_of(p);
    let mut best = f64::INFINITY;
    let mut k = 0usize;
    loop {
        if index.ring_lower_bound(p, k) >= best {
            break;
        }
        // once 2(k−1)+1 ≥ g every bucket has been scanned at least once
        if k >= 1 && 2 * (k - 1) + 1 >= g {
            break;
        }
        let kk = k as isize;
        for oy in -kk..=kk {
            for ox in -kk..=kk {
                if ox.abs().max(oy.abs()) != kk {
                    continue;
                }
                let (bucket, _) = index.wrapped_bucket(bx, by, ox, oy);
                for &s in bucket {
                    let s = s as usize;
                    if s != i {
                        best = best.min(torus_distance(p, &sites[s]));
                    }
                }
            }
        }
        k += 1;
    }
    Ok(best)
}
