//! Fixed experimental designs on `[0,1]^d`: grids and Halton sequences,
//! fill-distance / separation-radius diagnostics, quasi-uniformity probes,
//! and CSV import/export.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("invalid design: {0}")]
    Invalid(String),
    #[error("unsupported request: {0}")]
    Unsupported(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
}

/// An ordered set of `n` distinct points in `[0,1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    coords: Vec<f64>, // row-major, n * d
    n: usize,
    d: usize,
}

impl Design {
    /// Build a design from row points, validating the unit-cube bounds and
    /// pairwise distinctness.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, DesignError> {
        if points.is_empty() {
            return Err(DesignError::Invalid("design must contain at least one point".into()));
        }
        let d = points[0].len();
        if d == 0 {
            return Err(DesignError::Invalid("points must have dimension >= 1".into()));
        }
        let mut coords = Vec::with_capacity(points.len() * d);
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(DesignError::Invalid(format!(
                    "point {i} has dimension {} but the design is {d}-dimensional",
                    p.len()
                )));
            }
            for &c in p {
                if !(0.0..=1.0).contains(&c) || !c.is_finite() {
                    return Err(DesignError::Invalid(format!(
                        "coordinate {c} of point {i} lies outside [0,1]"
                    )));
                }
            }
            coords.extend_from_slice(p);
        }
        let design = Self {
            coords,
            n: points.len(),
            d,
        };
        for i in 0..design.n {
            for j in (i + 1)..design.n {
                if design.point(i) == design.point(j) {
                    return Err(DesignError::Invalid(format!(
                        "points {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(design)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.d)
    }

    /// Write as CSV with header `x1,...,xd`, one point per row.
    pub fn to_csv(&self, path: &Path) -> Result<(), DesignError> {
        let io_err = |source| DesignError::Io {
            path: path.display().to_string(),
            source,
        };
        let file = fs::File::create(path).map_err(io_err)?;
        let mut w = BufWriter::new(file);
        let header: Vec<String> = (1..=self.d).map(|j| format!("x{j}")).collect();
        writeln!(w, "{}", header.join(",")).map_err(io_err)?;
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
            writeln!(w, "{}", row.join(",")).map_err(io_err)?;
        }
        Ok(())
    }

    /// Read a design written by [`Design::to_csv`].
    pub fn from_csv(path: &Path) -> Result<Self, DesignError> {
        let text = fs::read_to_string(path).map_err(|source| DesignError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| DesignError::Parse {
            path: path.display().to_string(),
            message: "empty file".into(),
        })?;
        let d = header.split(',').count();
        let mut points = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
            let row = row.map_err(|e| DesignError::Parse {
                path: path.display().to_string(),
                message: format!("line {}: {e}", lineno + 2),
            })?;
            if row.len() != d {
                return Err(DesignError::Parse {
                    path: path.display().to_string(),
                    message: format!("line {}: expected {d} columns", lineno + 2),
                });
            }
            points.push(row);
        }
        Design::new(points)
    }
}

/// Fill distance, separation radius and their quasi-uniformity ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignDiagnostics {
    pub fill: f64,
    pub separation: f64,
    pub ratio: f64,
}

/// Equispaced lattice on `[0,1]^d` including the endpoints per axis.
///
/// For `d = 1` the points are `i/(n-1)` (a single midpoint 0.5 when
/// `n = 1`); for `d > 1`, `n` must be a perfect `d`-th power and the grid is
/// the product lattice with `n^(1/d)` points per axis.
pub fn grid_design(n: usize, d: usize) -> Result<Design, DesignError> {
    if n == 0 || d == 0 {
        return Err(DesignError::Invalid("grid requires n >= 1, d >= 1".into()));
    }
    let per_axis = if d == 1 {
        n
    } else {
        let k = (n as f64).powf(1.0 / d as f64).round() as usize;
        if k.pow(d as u32) != n {
            return Err(DesignError::Invalid(format!(
                "grid in d = {d} requires n to be a perfect {d}-th power, got {n}"
            )));
        }
        k
    };
    let axis: Vec<f64> = if per_axis == 1 {
        vec![0.5]
    } else {
        (0..per_axis)
            .map(|i| i as f64 / (per_axis - 1) as f64)
            .collect()
    };
    let mut points = Vec::with_capacity(n);
    let mut idx = vec![0usize; d];
    loop {
        points.push(idx.iter().map(|&i| axis[i]).collect::<Vec<_>>());
        // odometer increment over the d-dimensional index
        let mut axis_no = 0;
        loop {
            if axis_no == d {
                return Design::new(points);
            }
            idx[axis_no] += 1;
            if idx[axis_no] < per_axis {
                break;
            }
            idx[axis_no] = 0;
            axis_no += 1;
        }
    }
}

const HALTON_BASES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// Radical inverse of `i` in the given base.
fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut x = 0.0;
    while i > 0 {
        x += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    x
}

/// First `n` points of the (unscrambled) Halton sequence in `d <= 6`
/// dimensions, 1-indexed so the origin is never produced.
pub fn halton_points(n: usize, d: usize) -> Result<Design, DesignError> {
    if n == 0 || d == 0 {
        return Err(DesignError::Invalid("halton requires n >= 1, d >= 1".into()));
    }
    if d > HALTON_BASES.len() {
        return Err(DesignError::Unsupported(format!(
            "halton designs support d <= {}, got {d}",
            HALTON_BASES.len()
        )));
    }
    let points = (1..=n as u64)
        .map(|i| {
            (0..d)
                .map(|j| radical_inverse(i, HALTON_BASES[j]))
                .collect::<Vec<_>>()
        })
        .collect();
    Design::new(points)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Fill distance `sup_x min_j |x - x_j|`, approximated by maximizing over a
/// `resolution`-per-axis candidate lattice.
///
/// The reported value is a lower bound of the true supremum with additive
/// error at most `sqrt(d) / resolution`.
pub fn fill_distance(design: &Design, resolution: usize) -> Result<f64, DesignError> {
    let d = design.dim();
    let needed = (10.0 * (design.n() as f64).powf(1.0 / d as f64)).ceil() as usize;
    if resolution < needed {
        return Err(DesignError::Invalid(format!(
            "resolution {resolution} under-resolves the design; need >= {needed}"
        )));
    }
    let mut worst = 0.0f64;
    let mut idx = vec![0usize; d];
    let mut candidate = vec![0.0f64; d];
    loop {
        for (c, &i) in candidate.iter_mut().zip(&idx) {
            *c = i as f64 / resolution as f64;
        }
        let nearest = design
            .points()
            .map(|p| dist(p, &candidate))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest);

        let mut axis_no = 0;
        loop {
            if axis_no == d {
                return Ok(worst);
            }
            idx[axis_no] += 1;
            if idx[axis_no] <= resolution {
                break;
            }
            idx[axis_no] = 0;
            axis_no += 1;
        }
    }
}

/// Separation radius: half the minimum pairwise distance (exact pairwise scan).
pub fn separation_radius(design: &Design) -> Result<f64, DesignError> {
    if design.n() < 2 {
        return Err(DesignError::Invalid(
            "separation radius needs at least two points".into(),
        ));
    }
    let mut min = f64::INFINITY;
    for i in 0..design.n() {
        for j in (i + 1)..design.n() {
            min = min.min(dist(design.point(i), design.point(j)));
        }
    }
    Ok(min / 2.0)
}

/// Fill, separation and their ratio in one pass.
pub fn diagnostics(design: &Design, resolution: usize) -> Result<DesignDiagnostics, DesignError> {
    let fill = fill_distance(design, resolution)?;
    let separation = separation_radius(design)?;
    Ok(DesignDiagnostics {
        fill,
        separation,
        ratio: fill / separation,
    })
}

/// Append a near-duplicate of the first point, displaced by `eps` along the
/// first axis (direction flipped if needed to stay inside the cube).
///
/// The resulting separation radius is at most `eps / 2`, so the
/// quasi-uniformity ratio blows up while the fill distance is unchanged.
pub fn perturb_with_near_duplicate(design: &Design, eps: f64) -> Result<Design, DesignError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(DesignError::Invalid(format!("eps must be positive, got {eps}")));
    }
    let sep = separation_radius(design)?;
    if eps >= sep {
        return Err(DesignError::Invalid(format!(
            "eps = {eps} must be below the separation radius {sep}"
        )));
    }
    let first = design.point(0).to_vec();
    let mut shifted = first.clone();
    if first[0] + eps <= 1.0 {
        shifted[0] = first[0] + eps;
    } else if first[0] - eps >= 0.0 {
        shifted[0] = first[0] - eps;
    } else {
        return Err(DesignError::Invalid(format!(
            "displacement {eps} leaves the unit cube in both axis directions"
        )));
    }
    let mut points: Vec<Vec<f64>> = design.points().map(|p| p.to_vec()).collect();
    points.push(shifted);
    Design::new(points)
}
