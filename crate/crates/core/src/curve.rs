//! Hitting measure of a rerooted, randomly rotated curve on the boundary of a
//! polygonal domain.
//!
//! The curve is a finite polyline anchored at a root vertex. For a fixed root
//! point inside the domain, a uniform rotation angle is pushed forward to the
//! point where the curve first leaves the domain, parameterised by normalised
//! boundary arclength in `[0, 1)`. The entropy of the dyadic binning of that
//! measure, as a function of depth, gives an information-dimension estimate.

use std::f64::consts::TAU;
use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon, point_segment_distance, segment_intersection, signed_area2, Point};
use crate::paths::{sample_bm, TimeGrid};
use crate::rng::{par_replicates, RngStream};
use crate::stats::{bootstrap_half_width, entropy_of_counts, wls_fit};

/// Deepest dyadic level stored by a [`BoundaryMeasure`].
pub const MAX_DEPTH: u32 = 24;

/// Average bin occupancy required for a depth to count as resolved.
pub const STABLE_OCCUPANCY: f64 = 10.0;

/// Polyline standing in for a one-sided curve; `root_index` marks the vertex
/// that gets anchored at the root point.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarPath {
    points: Vec<Point>,
    root_index: usize,
}

impl PlanarPath {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        Self::with_root(points, 0)
    }

    pub fn with_root(points: Vec<Point>, root_index: usize) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGeometry("a curve needs at least two points".into()));
        }
        if root_index >= points.len() {
            return Err(Error::InvalidGeometry(format!("root index {root_index} out of range")));
        }
        if let Some(i) = points.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::InvalidGeometry(format!("consecutive points {i} and {} coincide", i + 1)));
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite coordinate".into()));
        }
        Ok(Self { points, root_index })
    }

    /// Straight segment of length `length` from the origin along angle
    /// `theta`.
    pub fn ray(theta: f64, length: f64) -> Self {
        Self {
            points: vec![Point::default(), Point::new(length * theta.cos(), length * theta.sin())],
            root_index: 0,
        }
    }

    /// Planar Brownian path with `steps` steps over time `horizon`, rooted at
    /// the origin.
    pub fn brownian(steps: usize, horizon: f64, rng: &RngStream) -> Result<Self> {
        let grid = Arc::new(TimeGrid::uniform(horizon, steps)?);
        let mut r = rng.rng();
        let xs = sample_bm(&grid, &mut r)?;
        let ys = sample_bm(&grid, &mut r)?;
        let points = xs
            .values()
            .iter()
            .zip(ys.values())
            .map(|(&x, &y)| Point::new(x, y))
            .collect();
        Ok(Self { points, root_index: 0 })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn root_index(&self) -> usize {
        self.root_index
    }

    pub fn root(&self) -> Point {
        self.points[self.root_index]
    }

    /// Reads `x,y` rows (header optional).
    pub fn from_csv<R: std::io::Read>(input: R) -> Result<Self> {
        Self::new(read_points_csv(input)?)
    }
}

/// Moves the curve rigidly so that its root vertex sits at `root`, then
/// rotates it by `theta` about that point.
pub fn reroot_rotate(curve: &PlanarPath, root: Point, theta: f64) -> PlanarPath {
    let motion = RigidMotion::new(curve.root(), root, theta);
    PlanarPath {
        points: curve.points.iter().map(|&p| motion.apply(p)).collect(),
        root_index: curve.root_index,
    }
}

#[derive(Debug, Clone, Copy)]
struct RigidMotion {
    from: Point,
    to: Point,
    cos: f64,
    sin: f64,
}

impl RigidMotion {
    fn new(from: Point, to: Point, theta: f64) -> Self {
        let (sin, cos) = theta.sin_cos();
        Self { from, to, cos, sin }
    }

    fn apply(&self, p: Point) -> Point {
        let d = p - self.from;
        Point::new(
            self.to.x + self.cos * d.x - self.sin * d.y,
            self.to.y + self.sin * d.x + self.cos * d.y,
        )
    }
}

fn read_points_csv<R: std::io::Read>(input: R) -> Result<Vec<Point>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let mut points = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::InvalidGeometry(format!("csv line {}: {e}", line + 1)))?;
        if rec.len() < 2 {
            return Err(Error::InvalidGeometry(format!("csv line {}: expected x,y", line + 1)));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => points.push(Point::new(x, y)),
            // tolerate a header row
            _ if line == 0 => continue,
            _ => return Err(Error::InvalidGeometry(format!("csv line {}: not a number", line + 1))),
        }
    }
    Ok(points)
}

/// Simple counterclockwise polygon with an arclength parameterisation that
/// starts at vertex 0.
#[derive(Debug, Clone)]
pub struct Domain {
    boundary: Vec<Point>,
    /// cumulative arclength at each vertex; last entry is the perimeter
    cumulative: Vec<f64>,
    index: EdgeIndex,
}

impl Domain {
    pub fn new(boundary: Vec<Point>) -> Result<Self> {
        let n = boundary.len();
        if n < 3 {
            return Err(Error::InvalidGeometry("a domain needs at least three vertices".into()));
        }
        if (0..n).any(|i| boundary[i] == boundary[(i + 1) % n]) {
            return Err(Error::InvalidGeometry("repeated consecutive boundary vertex".into()));
        }
        if !(signed_area2(&boundary) > 0.0) {
            return Err(Error::InvalidGeometry("boundary must be counterclockwise".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a0, a1) = (boundary[i], boundary[(i + 1) % n]);
                let (b0, b1) = (boundary[j], boundary[(j + 1) % n]);
                if segment_intersection(a0, a1, b0, b1).is_some() {
                    return Err(Error::InvalidGeometry(format!("edges {i} and {j} intersect")));
                }
            }
        }
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        for i in 0..n {
            let len = boundary[i].dist(boundary[(i + 1) % n]);
            cumulative.push(cumulative[i] + len);
        }
        let index = EdgeIndex::new(&boundary);
        Ok(Self {
            boundary,
            cumulative,
            index,
        })
    }

    /// Regular `sides`-gon inscribed in the circle; vertex 0 at angle 0.
    pub fn disk(center: Point, radius: f64, sides: usize) -> Result<Self> {
        if !(radius > 0.0) || sides < 3 {
            return Err(Error::InvalidGeometry("disk needs radius > 0 and at least 3 sides".into()));
        }
        Self::new(
            (0..sides)
                .map(|k| {
                    let a = TAU * k as f64 / sides as f64;
                    Point::new(center.x + radius * a.cos(), center.y + radius * a.sin())
                })
                .collect(),
        )
    }

    /// Axis-aligned rectangle; vertex 0 is the lower-left corner.
    pub fn rectangle(min: Point, max: Point) -> Result<Self> {
        Self::new(vec![min, Point::new(max.x, min.y), max, Point::new(min.x, max.y)])
    }

    /// Reads `x,y` rows (header optional).
    pub fn from_csv<R: std::io::Read>(input: R) -> Result<Self> {
        Self::new(read_points_csv(input)?)
    }

    pub fn boundary(&self) -> &[Point] {
        &self.boundary
    }

    pub fn perimeter(&self) -> f64 {
        self.cumulative[self.boundary.len()]
    }

    fn edge(&self, i: usize) -> (Point, Point) {
        (self.boundary[i], self.boundary[(i + 1) % self.boundary.len()])
    }

    /// Inside and farther than a relative 1e-12 from the boundary.
    pub fn contains_strictly(&self, p: Point) -> bool {
        if !point_in_polygon(p, &self.boundary) {
            return false;
        }
        let tol = 1e-12 * self.perimeter();
        (0..self.boundary.len()).all(|i| {
            let (a, b) = self.edge(i);
            point_segment_distance(p, a, b) > tol
        })
    }

    /// Earliest intersection of segment `p -> q` with the boundary, as
    /// `(segment parameter, edge, edge parameter)`.
    fn first_crossing(&self, p: Point, q: Point) -> Option<(f64, usize, f64)> {
        let mut best: Option<(f64, usize, f64)> = None;
        self.index.for_candidates(p, q, |e| {
            let (a, b) = self.edge(e);
            if let Some((t, u)) = segment_intersection(p, q, a, b) {
                if best.map_or(true, |(bt, be, _)| t < bt || (t == bt && e < be)) {
                    best = Some((t, e, u));
                }
            }
        });
        best
    }
}

/// Uniform bucket grid over the boundary edges.
#[derive(Debug, Clone)]
struct EdgeIndex {
    min: Point,
    cell: f64,
    cols: usize,
    rows: usize,
    cells: Vec<Vec<usize>>,
    edges: usize,
}

impl EdgeIndex {
    fn new(poly: &[Point]) -> Self {
        let n = poly.len();
        let (mut min, mut max) = (poly[0], poly[0]);
        for p in poly {
            min = Point::new(min.x.min(p.x), min.y.min(p.y));
            max = Point::new(max.x.max(p.x), max.y.max(p.y));
        }
        let span = (max.x - min.x).max(max.y - min.y);
        let per_side = ((n as f64).sqrt() * 2.0).clamp(4.0, 256.0) as usize;
        let cell = span / per_side as f64 * (1.0 + 1e-9);
        let cols = (((max.x - min.x) / cell).floor() as usize + 1).max(1);
        let rows = (((max.y - min.y) / cell).floor() as usize + 1).max(1);
        let mut idx = Self {
            min,
            cell,
            cols,
            rows,
            cells: vec![Vec::new(); cols * rows],
            edges: n,
        };
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            if let Some((c0, c1, r0, r1)) = idx.cell_range(a, b) {
                for r in r0..=r1 {
                    for c in c0..=c1 {
                        idx.cells[r * cols + c].push(i);
                    }
                }
            }
        }
        idx
    }

    /// Cells overlapped by the (slightly padded) bounding box of `a b`.
    fn cell_range(&self, a: Point, b: Point) -> Option<(usize, usize, usize, usize)> {
        let pad = 1e-9 * self.cell;
        let lo = Point::new(a.x.min(b.x) - pad - self.min.x, a.y.min(b.y) - pad - self.min.y);
        let hi = Point::new(a.x.max(b.x) + pad - self.min.x, a.y.max(b.y) + pad - self.min.y);
        let w = self.cols as f64 * self.cell;
        let h = self.rows as f64 * self.cell;
        if hi.x < 0.0 || hi.y < 0.0 || lo.x > w || lo.y > h {
            return None;
        }
        let clamp = |v: f64, n: usize| ((v / self.cell).floor().max(0.0) as usize).min(n - 1);
        Some((clamp(lo.x, self.cols), clamp(hi.x, self.cols), clamp(lo.y, self.rows), clamp(hi.y, self.rows)))
    }

    fn for_candidates(&self, p: Point, q: Point, mut f: impl FnMut(usize)) {
        let Some((c0, c1, r0, r1)) = self.cell_range(p, q) else {
            return;
        };
        if (c1 - c0 + 1) * (r1 - r0 + 1) > self.edges {
            (0..self.edges).for_each(f);
            return;
        }
        for r in r0..=r1 {
            for c in c0..=c1 {
                for &e in &self.cells[r * self.cols + c] {
                    f(e);
                }
            }
        }
    }
}

/// Where a curve first meets the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryHit {
    pub point: Point,
    /// Arclength from boundary vertex 0, counterclockwise.
    pub arclength: f64,
    /// `arclength / perimeter`, in `[0, 1)`.
    pub fraction: f64,
    /// Index of the curve segment that crosses.
    pub segment: usize,
}

fn walk_to_boundary(
    points: &[Point],
    from: usize,
    dom: &Domain,
    map: impl Fn(Point) -> Point,
) -> Option<BoundaryHit> {
    let mut p = map(points[from]);
    for (k, &raw) in points.iter().enumerate().skip(from + 1) {
        let q = map(raw);
        if p == q {
            continue;
        }
        if let Some((_, e, u)) = dom.first_crossing(p, q) {
            let (a, b) = dom.edge(e);
            let point = a + (b - a) * u;
            let arclength = dom.cumulative[e] + u * a.dist(b);
            let per = dom.perimeter();
            let mut fraction = arclength / per;
            if fraction >= 1.0 {
                fraction -= 1.0;
            }
            return Some(BoundaryHit {
                point,
                arclength: fraction * per,
                fraction,
                segment: k - 1,
            });
        }
        p = q;
    }
    None
}

/// First point where the curve, followed from its root outward, meets the
/// boundary. `Ok(None)` when the finite polyline never leaves the domain.
pub fn first_boundary_hit(curve: &PlanarPath, dom: &Domain) -> Result<Option<BoundaryHit>> {
    if !dom.contains_strictly(curve.root()) {
        return Err(Error::InvalidGeometry("curve root must lie strictly inside the domain".into()));
    }
    Ok(walk_to_boundary(&curve.points, curve.root_index, dom, |p| p))
}

/// Dyadic histogram of boundary hit locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMeasure {
    pub d_max: u32,
    /// Rotation angles sampled.
    pub samples: usize,
    /// Normalised hit locations in `[0, 1)`, in sample order.
    pub locations: Vec<f64>,
    /// Counts over the `2^d_max` finest bins.
    pub finest_counts: Vec<u64>,
    /// Set when fewer than half of the samples hit the boundary.
    pub warning: Option<String>,
}

impl BoundaryMeasure {
    pub fn from_locations(locations: Vec<f64>, d_max: u32, samples: usize) -> Result<Self> {
        if !(1..=MAX_DEPTH).contains(&d_max) {
            return Err(Error::param("d_max", format!("must be in 1..={MAX_DEPTH}, got {d_max}")));
        }
        if let Some(x) = locations.iter().find(|x| !(0.0..1.0).contains(*x)) {
            return Err(Error::param("locations", format!("{x} is outside [0, 1)")));
        }
        let bins = 1usize << d_max;
        let mut finest_counts = vec![0u64; bins];
        for &x in &locations {
            finest_counts[((x * bins as f64) as usize).min(bins - 1)] += 1;
        }
        let hits = locations.len();
        let warning = (2 * hits < samples).then(|| {
            format!("curve too short: only {hits} of {samples} rotations reached the boundary")
        });
        Ok(Self {
            d_max,
            samples,
            locations,
            finest_counts,
            warning,
        })
    }

    pub fn hits(&self) -> usize {
        self.locations.len()
    }

    pub fn hit_fraction(&self) -> f64 {
        self.hits() as f64 / self.samples as f64
    }

    pub fn counts_at(&self, depth: u32) -> Vec<u64> {
        let group = 1usize << (self.d_max - depth);
        self.finest_counts.chunks(group).map(|c| c.iter().sum()).collect()
    }

    /// Bin masses at `depth` (normalised over hits).
    pub fn masses(&self, depth: u32) -> Vec<f64> {
        let n = self.hits().max(1) as f64;
        self.counts_at(depth).into_iter().map(|c| c as f64 / n).collect()
    }

    pub fn entropy_at(&self, depth: u32) -> f64 {
        entropy_of_counts(&self.counts_at(depth))
    }

    /// CSV `depth,bin,mass` for depths `1..=d_max`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["depth", "bin", "mass"])?;
        for d in 1..=self.d_max {
            for (k, m) in self.masses(d).iter().enumerate() {
                w.write_record([d.to_string(), k.to_string(), m.to_string()])?;
            }
        }
        w.flush()
    }
}

/// Pushes uniform rotation angles about `root` forward to boundary hit
/// locations and bins them dyadically down to depth `d_max`.
pub fn boundary_measure(
    curve: &PlanarPath,
    dom: &Domain,
    root: Point,
    angle_samples: usize,
    rng: &RngStream,
    d_max: u32,
) -> Result<BoundaryMeasure> {
    if !dom.contains_strictly(root) {
        return Err(Error::InvalidGeometry("root must lie strictly inside the domain".into()));
    }
    if angle_samples == 0 {
        return Err(Error::param("angle_samples", "must be at least 1"));
    }
    let anchor = curve.root();
    let hits: Vec<Option<f64>> = par_replicates(rng, angle_samples, |r| {
        let theta = TAU * r.gen::<f64>();
        let motion = RigidMotion::new(anchor, root, theta);
        walk_to_boundary(&curve.points, curve.root_index, dom, |p| motion.apply(p)).map(|h| h.fraction)
    });
    BoundaryMeasure::from_locations(hits.into_iter().flatten().collect(), d_max, angle_samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyDimension {
    /// Entropy in bits at depths `1..=d_max`.
    pub entropies: Vec<f64>,
    /// Depths used for the slope (average occupancy >= 10).
    pub stable_depths: (u32, u32),
    pub slope: f64,
    /// Percentile bootstrap half-width of the slope.
    pub half_width: f64,
}

/// Minimum hits required by [`entropy_dimension`].
pub const MIN_EFFECTIVE_SAMPLES: usize = 1000;

fn slope_from_counts(finest: &[u64], d_max: u32, lo: u32, hi: u32) -> Option<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for d in lo..=hi {
        let group = 1usize << (d_max - d);
        let counts: Vec<u64> = finest.chunks(group).map(|c| c.iter().sum()).collect();
        xs.push(f64::from(d));
        ys.push(entropy_of_counts(&counts));
    }
    wls_fit(&xs, &ys, &vec![1.0; xs.len()]).ok().map(|f| f.slope)
}

/// Slope of entropy against depth over the resolved depths, with a
/// bootstrap half-width from resampling hit locations (stream `bootstrap`).
pub fn entropy_dimension(measure: &BoundaryMeasure, bootstrap: &RngStream) -> Result<EntropyDimension> {
    let hits = measure.hits();
    if hits < MIN_EFFECTIVE_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{hits} hit locations, need at least {MIN_EFFECTIVE_SAMPLES}"
        )));
    }
    let entropies: Vec<f64> = (1..=measure.d_max).map(|d| measure.entropy_at(d)).collect();
    let hi = (1..=measure.d_max)
        .take_while(|&d| hits as f64 / f64::powi(2.0, d as i32) >= STABLE_OCCUPANCY)
        .last();
    let hi = match hi {
        Some(h) if h >= 2 => h,
        _ => return Err(Error::InsufficientData("no stable depth range".into())),
    };
    let lo = 1;
    let slope = slope_from_counts(&measure.finest_counts, measure.d_max, lo, hi)
        .ok_or_else(|| Error::DegenerateFit("entropy slope".into()))?;
    let bins = 1usize << hi;
    let half_width = bootstrap_half_width(&measure.locations, bootstrap, |sample| {
        let mut counts = vec![0u64; bins];
        for &x in sample {
            counts[((x * bins as f64) as usize).min(bins - 1)] += 1;
        }
        slope_from_counts(&counts, hi, lo, hi)
    });
    Ok(EntropyDimension {
        entropies,
        stable_depths: (lo, hi),
        slope,
        half_width,
    })
}
