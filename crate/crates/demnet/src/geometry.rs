//! Point-set generation for every benchmark domain. Integration is a
//! weighted sum: most domains use uniform weights `measure / N` with
//! equal-measure point placement so the uniform weights stay unbiased;
//! the spherical shell uses a uniform-radius grid with r²-proportional
//! weights to resolve steep inner-radius gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub enum Sampling {
    /// Structured points, one count per parameter axis (a single count
    /// is broadcast to every axis). Includes the parameter endpoints.
    Grid(Vec<usize>),
    /// Structured cell-centered points (midpoint rule); unbiased under
    /// the uniform weighting, preferred for computing norms.
    CellGrid(Vec<usize>),
    /// Uniform-measure random points, reproducible for a fixed seed.
    Random { n: usize, seed: u64 },
}

impl Sampling {
    pub fn grid(counts: &[usize]) -> Sampling {
        Sampling::Grid(counts.to_vec())
    }

    pub fn cells(counts: &[usize]) -> Sampling {
        Sampling::CellGrid(counts.to_vec())
    }

    pub(crate) fn counts(&self, axes: usize) -> Vec<usize> {
        let c = match self {
            Sampling::Grid(c) | Sampling::CellGrid(c) => c,
            Sampling::Random { .. } => unreachable!(),
        };
        if c.len() == 1 {
            vec![c[0]; axes]
        } else {
            assert_eq!(c.len(), axes, "grid sampling needs {axes} axis counts");
            c.clone()
        }
    }

    pub(crate) fn centered(&self) -> bool {
        matches!(self, Sampling::CellGrid(_))
    }
}

#[derive(Clone, Debug)]
pub enum DomainSpec {
    Interval { a: f64, b: f64 },
    Rectangle { lb: [f64; 2], ub: [f64; 2] },
    /// x >= 0, y >= 0, Ra <= r <= Rb.
    QuarterAnnulus { ra: f64, rb: f64 },
    /// [0, side]^2 minus the quarter disk of radius `hole_r` at the origin.
    PlateHoleQuarter { side: f64, hole_r: f64 },
    /// One octant (x, y, z >= 0) of the shell Ra <= r <= Rb.
    SphereOctantShell { ra: f64, rb: f64 },
    /// [0, side]^3 minus the octant of the ball of radius `hole_r` at the origin.
    CubeWithSphericalHole { side: f64, hole_r: f64 },
    Disk { r: f64 },
    Annulus { ra: f64, rb: f64 },
    Box3 { lb: [f64; 3], ub: [f64; 3] },
    /// (x, t) domain for time-dependent problems.
    SpaceTimeRect { x: (f64, f64), t: (f64, f64) },
}

/// Points with uniform quadrature weights summing to the measure of the
/// sampled region. Unused trailing coordinates are zero.
#[derive(Clone, Debug)]
pub struct QuadratureSet {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub measure: f64,
    pub dim: usize,
}

impl QuadratureSet {
    fn from_points(points: Vec<[f64; 3]>, measure: f64, dim: usize) -> QuadratureSet {
        assert!(!points.is_empty(), "requested an empty point set");
        let w = measure / points.len() as f64;
        let weights = vec![w; points.len()];
        QuadratureSet { points, weights, measure, dim }
    }

    /// Points with relative weights, rescaled so the weights sum
    /// exactly to `measure`.
    fn from_weighted_points(
        points: Vec<[f64; 3]>,
        rel_weights: Vec<f64>,
        measure: f64,
        dim: usize,
    ) -> QuadratureSet {
        assert!(!points.is_empty(), "requested an empty point set");
        assert_eq!(points.len(), rel_weights.len());
        let total: f64 = rel_weights.iter().sum();
        assert!(total > 0.0, "weights must have positive sum");
        let s = measure / total;
        let weights = rel_weights.into_iter().map(|w| w * s).collect();
        QuadratureSet { points, weights, measure, dim }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn write_csv(&self, path: &std::path::Path) -> std::io::Result<()> {
        use std::io::Write;
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "x,y,z,w")?;
        for (p, w) in self.points.iter().zip(&self.weights) {
            writeln!(f, "{},{},{},{}", p[0], p[1], p[2], w)?;
        }
        Ok(())
    }
}

/// Sum of w_i f(x_i).
pub fn mc_integrate(q: &QuadratureSet, f: impl Fn(&[f64; 3]) -> f64) -> f64 {
    q.points.iter().zip(&q.weights).map(|(p, w)| w * f(p)).sum()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1);
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn centers(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1);
    let h = (b - a) / n as f64;
    (0..n).map(|i| a + (i as f64 + 0.5) * h).collect()
}

fn nodes(a: f64, b: f64, n: usize, centered: bool) -> Vec<f64> {
    if centered {
        centers(a, b, n)
    } else {
        linspace(a, b, n)
    }
}

/// Radius grid that is uniform in enclosed area between ra and rb.
fn radial_area_nodes(ra: f64, rb: f64, n: usize, centered: bool) -> Vec<f64> {
    nodes(0.0, 1.0, n, centered)
        .into_iter()
        .map(|u| (ra * ra + u * (rb * rb - ra * ra)).sqrt())
        .collect()
}

pub fn sample_interior(spec: &DomainSpec, sampling: &Sampling) -> QuadratureSet {
    if let Sampling::Random { n, seed } = sampling {
        return sample_interior_random(spec, *n, *seed);
    }
    let ctr = sampling.centered();
    match *spec {
        DomainSpec::Interval { a, b } => {
            let n = sampling.counts(1)[0];
            let pts = nodes(a, b, n, ctr).into_iter().map(|x| [x, 0.0, 0.0]).collect();
            QuadratureSet::from_points(pts, b - a, 1)
        }
        DomainSpec::Rectangle { lb, ub } => {
            let c = sampling.counts(2);
            let xs = nodes(lb[0], ub[0], c[0], ctr);
            let ys = nodes(lb[1], ub[1], c[1], ctr);
            let mut pts = Vec::with_capacity(c[0] * c[1]);
            for &x in &xs {
                for &y in &ys {
                    pts.push([x, y, 0.0]);
                }
            }
            let measure = (ub[0] - lb[0]) * (ub[1] - lb[1]);
            QuadratureSet::from_points(pts, measure, 2)
        }
        DomainSpec::SpaceTimeRect { x, t } => {
            let c = sampling.counts(2);
            let xs = nodes(x.0, x.1, c[0], ctr);
            let ts = nodes(t.0, t.1, c[1], ctr);
            let mut pts = Vec::with_capacity(c[0] * c[1]);
            for &xi in &xs {
                for &ti in &ts {
                    pts.push([xi, ti, 0.0]);
                }
            }
            QuadratureSet::from_points(pts, (x.1 - x.0) * (t.1 - t.0), 2)
        }
        DomainSpec::QuarterAnnulus { ra, rb } => {
            assert!(ra < rb && ra > 0.0);
            let c = sampling.counts(2);
            let rs = radial_area_nodes(ra, rb, c[0], ctr);
            let thetas = nodes(0.0, PI / 2.0, c[1], ctr);
            let mut pts = Vec::with_capacity(c[0] * c[1]);
            for &r in &rs {
                for &th in &thetas {
                    pts.push([r * th.cos(), r * th.sin(), 0.0]);
                }
            }
            QuadratureSet::from_points(pts, PI * (rb * rb - ra * ra) / 4.0, 2)
        }
        DomainSpec::Annulus { ra, rb } => {
            assert!(ra < rb && ra > 0.0);
            let c = sampling.counts(2);
            let rs = radial_area_nodes(ra, rb, c[0], ctr);
            let thetas = centers(0.0, 2.0 * PI, c[1]);
            let thetas = &thetas;
            let mut pts = Vec::with_capacity(c[0] * c[1]);
            for &r in &rs {
                for &th in thetas {
                    pts.push([r * th.cos(), r * th.sin(), 0.0]);
                }
            }
            QuadratureSet::from_points(pts, PI * (rb * rb - ra * ra), 2)
        }
        DomainSpec::Disk { r } => {
            let c = sampling.counts(2);
            let rs = radial_area_nodes(0.0, r, c[0], ctr);
            let thetas = centers(0.0, 2.0 * PI, c[1]);
            let thetas = &thetas;
            let mut pts = Vec::with_capacity(c[0] * c[1]);
            for &ri in &rs {
                for &th in thetas {
                    pts.push([ri * th.cos(), ri * th.sin(), 0.0]);
                }
            }
            QuadratureSet::from_points(pts, PI * r * r, 2)
        }
        DomainSpec::PlateHoleQuarter { side, hole_r } => {
            assert!(hole_r < side);
            let c = sampling.counts(2);
            let xs = nodes(0.0, side, c[0], ctr);
            let ys = nodes(0.0, side, c[1], ctr);
            let mut pts = Vec::new();
            for &x in &xs {
                for &y in &ys {
                    if x * x + y * y > hole_r * hole_r {
                        pts.push([x, y, 0.0]);
                    }
                }
            }
            let measure = side * side - PI * hole_r * hole_r / 4.0;
            QuadratureSet::from_points(pts, measure, 2)
        }
        DomainSpec::SphereOctantShell { ra, rb } => {
            assert!(ra < rb && ra > 0.0);
            let c = sampling.counts(3);
            let measure = 4.0 * PI / 3.0 * (rb.powi(3) - ra.powi(3)) / 8.0;
            // Uniform in cos(polar angle): the volume element is exactly
            // r² dr d(cos θ) dφ, so a uniform-radius grid with
            // r²-proportional weights is a product midpoint/trapezoid
            // rule that resolves the steep inner-radius gradients.
            let rs = nodes(ra, rb, c[0], ctr);
            let mus = nodes(0.0, 1.0, c[1], ctr);
            let phis = nodes(0.0, PI / 2.0, c[2], ctr);
            let mut pts = Vec::with_capacity(c[0] * c[1] * c[2]);
            let mut wts = Vec::with_capacity(c[0] * c[1] * c[2]);
            for &r in &rs {
                for &mu in &mus {
                    let st = (1.0 - mu * mu).sqrt();
                    for &ph in &phis {
                        pts.push([r * st * ph.cos(), r * st * ph.sin(), r * mu]);
                        wts.push(r * r);
                    }
                }
            }
            QuadratureSet::from_weighted_points(pts, wts, measure, 3)
        }
        DomainSpec::CubeWithSphericalHole { side, hole_r } => {
            assert!(hole_r < side);
            let c = sampling.counts(3);
            let xs = nodes(0.0, side, c[0], ctr);
            let ys = nodes(0.0, side, c[1], ctr);
            let zs = nodes(0.0, side, c[2], ctr);
            let mut pts = Vec::new();
            for &x in &xs {
                for &y in &ys {
                    for &z in &zs {
                        if x * x + y * y + z * z > hole_r * hole_r {
                            pts.push([x, y, z]);
                        }
                    }
                }
            }
            let measure = side.powi(3) - 4.0 * PI / 3.0 * hole_r.powi(3) / 8.0;
            QuadratureSet::from_points(pts, measure, 3)
        }
        DomainSpec::Box3 { lb, ub } => {
            let c = sampling.counts(3);
            let xs = nodes(lb[0], ub[0], c[0], ctr);
            let ys = nodes(lb[1], ub[1], c[1], ctr);
            let zs = nodes(lb[2], ub[2], c[2], ctr);
            let mut pts = Vec::with_capacity(c[0] * c[1] * c[2]);
            for &x in &xs {
                for &y in &ys {
                    for &z in &zs {
                        pts.push([x, y, z]);
                    }
                }
            }
            let measure = (0..3).map(|i| ub[i] - lb[i]).product();
            QuadratureSet::from_points(pts, measure, 3)
        }
    }
}

fn sample_interior_random(spec: &DomainSpec, n: usize, seed: u64) -> QuadratureSet {
    assert!(n > 0, "requested an empty point set");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(n);
    match *spec {
        DomainSpec::Interval { a, b } => {
            for _ in 0..n {
                pts.push([rng.gen_range(a..b), 0.0, 0.0]);
            }
            QuadratureSet::from_points(pts, b - a, 1)
        }
        DomainSpec::Rectangle { lb, ub } => {
            for _ in 0..n {
                pts.push([rng.gen_range(lb[0]..ub[0]), rng.gen_range(lb[1]..ub[1]), 0.0]);
            }
            QuadratureSet::from_points(pts, (ub[0] - lb[0]) * (ub[1] - lb[1]), 2)
        }
        DomainSpec::SpaceTimeRect { x, t } => {
            for _ in 0..n {
                pts.push([rng.gen_range(x.0..x.1), rng.gen_range(t.0..t.1), 0.0]);
            }
            QuadratureSet::from_points(pts, (x.1 - x.0) * (t.1 - t.0), 2)
        }
        DomainSpec::QuarterAnnulus { ra, rb } => {
            for _ in 0..n {
                let r = (rng.gen_range(0.0..1.0f64) * (rb * rb - ra * ra) + ra * ra).sqrt();
                let th = rng.gen_range(0.0..PI / 2.0);
                pts.push([r * th.cos(), r * th.sin(), 0.0]);
            }
            QuadratureSet::from_points(pts, PI * (rb * rb - ra * ra) / 4.0, 2)
        }
        DomainSpec::Annulus { ra, rb } => {
            for _ in 0..n {
                let r = (rng.gen_range(0.0..1.0f64) * (rb * rb - ra * ra) + ra * ra).sqrt();
                let th = rng.gen_range(0.0..2.0 * PI);
                pts.push([r * th.cos(), r * th.sin(), 0.0]);
            }
            QuadratureSet::from_points(pts, PI * (rb * rb - ra * ra), 2)
        }
        DomainSpec::Disk { r } => {
            for _ in 0..n {
                let ri = r * rng.gen_range(0.0..1.0f64).sqrt();
                let th = rng.gen_range(0.0..2.0 * PI);
                pts.push([ri * th.cos(), ri * th.sin(), 0.0]);
            }
            QuadratureSet::from_points(pts, PI * r * r, 2)
        }
        DomainSpec::PlateHoleQuarter { side, hole_r } => {
            let measure = side * side - PI * hole_r * hole_r / 4.0;
            rejection_sample(&mut rng, n, measure / (side * side), &mut pts, |rng| {
                let p = [rng.gen_range(0.0..side), rng.gen_range(0.0..side), 0.0];
                (p, p[0] * p[0] + p[1] * p[1] > hole_r * hole_r)
            });
            QuadratureSet::from_points(pts, measure, 2)
        }
        DomainSpec::SphereOctantShell { ra, rb } => {
            for _ in 0..n {
                let r = (rng.gen_range(0.0..1.0f64) * (rb.powi(3) - ra.powi(3)) + ra.powi(3))
                    .cbrt();
                let mu: f64 = rng.gen_range(0.0..1.0);
                let ph = rng.gen_range(0.0..PI / 2.0);
                let st = (1.0 - mu * mu).sqrt();
                pts.push([r * st * ph.cos(), r * st * ph.sin(), r * mu]);
            }
            let measure = 4.0 * PI / 3.0 * (rb.powi(3) - ra.powi(3)) / 8.0;
            QuadratureSet::from_points(pts, measure, 3)
        }
        DomainSpec::CubeWithSphericalHole { side, hole_r } => {
            let measure = side.powi(3) - 4.0 * PI / 3.0 * hole_r.powi(3) / 8.0;
            rejection_sample(&mut rng, n, measure / side.powi(3), &mut pts, |rng| {
                let p = [
                    rng.gen_range(0.0..side),
                    rng.gen_range(0.0..side),
                    rng.gen_range(0.0..side),
                ];
                (p, p[0] * p[0] + p[1] * p[1] + p[2] * p[2] > hole_r * hole_r)
            });
            QuadratureSet::from_points(pts, measure, 3)
        }
        DomainSpec::Box3 { lb, ub } => {
            for _ in 0..n {
                pts.push([
                    rng.gen_range(lb[0]..ub[0]),
                    rng.gen_range(lb[1]..ub[1]),
                    rng.gen_range(lb[2]..ub[2]),
                ]);
            }
            let measure = (0..3).map(|i| ub[i] - lb[i]).product();
            QuadratureSet::from_points(pts, measure, 3)
        }
    }
}

fn rejection_sample(
    rng: &mut ChaCha8Rng,
    n: usize,
    expected_efficiency: f64,
    pts: &mut Vec<[f64; 3]>,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> ([f64; 3], bool),
) {
    assert!(
        expected_efficiency >= 0.01,
        "rejection efficiency below 1%: degenerate geometry"
    );
    while pts.len() < n {
        let (p, keep) = draw(rng);
        if keep {
            pts.push(p);
        }
    }
}

pub fn sample_boundary(spec: &DomainSpec, piece: &str, sampling: &Sampling) -> QuadratureSet {
    match *spec {
        DomainSpec::Interval { a, b } => {
            let x = match piece {
                "left" => a,
                "right" => b,
                _ => panic!("interval boundary pieces are `left`, `right`; got `{piece}`"),
            };
            QuadratureSet::from_points(vec![[x, 0.0, 0.0]], 1.0, 0)
        }
        DomainSpec::Rectangle { lb, ub } => {
            let (start, end) = rect_edge(lb, ub, piece)
                .unwrap_or_else(|| panic!("unknown rectangle boundary piece `{piece}`"));
            segment_points(start, end, sampling)
        }
        DomainSpec::SpaceTimeRect { x, t } => {
            let (start, end) = match piece {
                "x_lo" => ([x.0, t.0], [x.0, t.1]),
                "x_hi" => ([x.1, t.0], [x.1, t.1]),
                "t_lo" => ([x.0, t.0], [x.1, t.0]),
                "t_hi" => ([x.0, t.1], [x.1, t.1]),
                _ => panic!("unknown space-time boundary piece `{piece}`"),
            };
            segment_points(start, end, sampling)
        }
        DomainSpec::QuarterAnnulus { ra, rb } => match piece {
            "inner" => quarter_arc_points(ra, sampling),
            "outer" => quarter_arc_points(rb, sampling),
            "theta0" => segment_points([ra, 0.0], [rb, 0.0], sampling),
            "theta1" => segment_points([0.0, ra], [0.0, rb], sampling),
            _ => panic!("unknown quarter-annulus boundary piece `{piece}`"),
        },
        DomainSpec::Annulus { ra, rb } => match piece {
            "inner" => circle_points(ra, sampling),
            "outer" => circle_points(rb, sampling),
            _ => panic!("unknown annulus boundary piece `{piece}`"),
        },
        DomainSpec::Disk { r } => match piece {
            "edge" => circle_points(r, sampling),
            _ => panic!("unknown disk boundary piece `{piece}`"),
        },
        DomainSpec::PlateHoleQuarter { side, hole_r } => match piece {
            "hole" => quarter_arc_points(hole_r, sampling),
            "bottom" => segment_points([hole_r, 0.0], [side, 0.0], sampling),
            "left" => segment_points([0.0, hole_r], [0.0, side], sampling),
            "right" => segment_points([side, 0.0], [side, side], sampling),
            "top" => segment_points([0.0, side], [side, side], sampling),
            _ => panic!("unknown plate-with-hole boundary piece `{piece}`"),
        },
        DomainSpec::SphereOctantShell { ra, rb } => match piece {
            "inner" => octant_sphere_points(ra, sampling),
            "outer" => octant_sphere_points(rb, sampling),
            _ => panic!("unknown spherical-shell boundary piece `{piece}`"),
        },
        DomainSpec::Box3 { lb, ub } => box_face_points(lb, ub, piece, 0.0),
        DomainSpec::CubeWithSphericalHole { side, hole_r } => {
            if piece == "hole" {
                return octant_sphere_points(hole_r, sampling);
            }
            // faces through the origin corner contain a quarter-disk cut
            let cut = match piece {
                "x0" | "y0" | "z0" => hole_r,
                _ => 0.0,
            };
            box_face_points([0.0; 3], [side; 3], piece, cut)
        }
    }
}

fn rect_edge(lb: [f64; 2], ub: [f64; 2], piece: &str) -> Option<([f64; 2], [f64; 2])> {
    Some(match piece {
        "left" => ([lb[0], lb[1]], [lb[0], ub[1]]),
        "right" => ([ub[0], lb[1]], [ub[0], ub[1]]),
        "bottom" => ([lb[0], lb[1]], [ub[0], lb[1]]),
        "top" => ([lb[0], ub[1]], [ub[0], ub[1]]),
        _ => return None,
    })
}

fn segment_points(start: [f64; 2], end: [f64; 2], sampling: &Sampling) -> QuadratureSet {
    let length = ((end[0] - start[0]).powi(2) + (end[1] - start[1]).powi(2)).sqrt();
    let us = param_nodes(sampling);
    let pts = us
        .into_iter()
        .map(|u| {
            [start[0] + u * (end[0] - start[0]), start[1] + u * (end[1] - start[1]), 0.0]
        })
        .collect();
    QuadratureSet::from_points(pts, length, 1)
}

fn quarter_arc_points(r: f64, sampling: &Sampling) -> QuadratureSet {
    let pts = param_nodes(sampling)
        .into_iter()
        .map(|u| {
            let th = u * PI / 2.0;
            [r * th.cos(), r * th.sin(), 0.0]
        })
        .collect();
    QuadratureSet::from_points(pts, PI * r / 2.0, 1)
}

fn circle_points(r: f64, sampling: &Sampling) -> QuadratureSet {
    let pts: Vec<[f64; 3]> = match sampling {
        Sampling::Grid(c) | Sampling::CellGrid(c) => {
            let n = c[0];
            let off = if sampling.centered() { 0.5 } else { 0.0 };
            (0..n)
                .map(|i| {
                    let th = 2.0 * PI * (i as f64 + off) / n as f64;
                    [r * th.cos(), r * th.sin(), 0.0]
                })
                .collect()
        }
        Sampling::Random { n, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..*n)
                .map(|_| {
                    let th = rng.gen_range(0.0..2.0 * PI);
                    [r * th.cos(), r * th.sin(), 0.0]
                })
                .collect()
        }
    };
    QuadratureSet::from_points(pts, 2.0 * PI * r, 1)
}

fn param_nodes(sampling: &Sampling) -> Vec<f64> {
    match sampling {
        Sampling::Grid(c) => linspace(0.0, 1.0, c[0]),
        Sampling::CellGrid(c) => centers(0.0, 1.0, c[0]),
        Sampling::Random { n, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..*n).map(|_| rng.gen_range(0.0..1.0)).collect()
        }
    }
}

fn octant_sphere_points(r: f64, sampling: &Sampling) -> QuadratureSet {
    let area = 4.0 * PI * r * r / 8.0;
    let pts: Vec<[f64; 3]> = match sampling {
        Sampling::Grid(c) | Sampling::CellGrid(c) => {
            let c = if c.len() == 1 { vec![c[0]; 2] } else { c.clone() };
            let ctr = sampling.centered();
            let mus = nodes(0.0, 1.0, c[0], ctr);
            let phis = nodes(0.0, PI / 2.0, c[1], ctr);
            let mut pts = Vec::with_capacity(c[0] * c[1]);
            for &mu in &mus {
                let st = (1.0 - mu * mu).sqrt();
                for &ph in &phis {
                    pts.push([r * st * ph.cos(), r * st * ph.sin(), r * mu]);
                }
            }
            pts
        }
        Sampling::Random { n, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..*n)
                .map(|_| {
                    let mu: f64 = rng.gen_range(0.0..1.0);
                    let ph = rng.gen_range(0.0..PI / 2.0);
                    let st = (1.0 - mu * mu).sqrt();
                    [r * st * ph.cos(), r * st * ph.sin(), r * mu]
                })
                .collect()
        }
    };
    QuadratureSet::from_points(pts, area, 2)
}

fn box_face_points(lb: [f64; 3], ub: [f64; 3], piece: &str, corner_cut_r: f64) -> QuadratureSet {
    // `piece` names the fixed axis and side, e.g. `x0` is the face x = lb_x.
    let (axis, side_hi) = match piece {
        "x0" => (0, false),
        "x1" => (0, true),
        "y0" => (1, false),
        "y1" => (1, true),
        "z0" => (2, false),
        "z1" => (2, true),
        _ => panic!("unknown box boundary piece `{piece}`"),
    };
    let (u_axis, v_axis) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    // callers pass grid counts through the free axes via a default
    box_face_points_grid(lb, ub, axis, side_hi, u_axis, v_axis, corner_cut_r, 40)
}

#[allow(clippy::too_many_arguments)]
fn box_face_points_grid(
    lb: [f64; 3],
    ub: [f64; 3],
    axis: usize,
    side_hi: bool,
    u_axis: usize,
    v_axis: usize,
    corner_cut_r: f64,
    n: usize,
) -> QuadratureSet {
    let fixed = if side_hi { ub[axis] } else { lb[axis] };
    let us = linspace(lb[u_axis], ub[u_axis], n);
    let vs = linspace(lb[v_axis], ub[v_axis], n);
    let mut pts = Vec::new();
    for &u in &us {
        for &v in &vs {
            if u * u + v * v <= corner_cut_r * corner_cut_r {
                continue;
            }
            let mut p = [0.0; 3];
            p[axis] = fixed;
            p[u_axis] = u;
            p[v_axis] = v;
            pts.push(p);
        }
    }
    let mut area = (ub[u_axis] - lb[u_axis]) * (ub[v_axis] - lb[v_axis]);
    if corner_cut_r > 0.0 {
        area -= PI * corner_cut_r * corner_cut_r / 4.0;
    }
    QuadratureSet::from_points(pts, area, 2)
}

/// Box face with explicit per-axis grid counts.
pub fn sample_box_face(
    lb: [f64; 3],
    ub: [f64; 3],
    piece: &str,
    counts: [usize; 2],
) -> QuadratureSet {
    let (axis, side_hi) = match piece {
        "x0" => (0, false),
        "x1" => (0, true),
        "y0" => (1, false),
        "y1" => (1, true),
        "z0" => (2, false),
        "z1" => (2, true),
        _ => panic!("unknown box boundary piece `{piece}`"),
    };
    let (u_axis, v_axis) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let fixed = if side_hi { ub[axis] } else { lb[axis] };
    let us = linspace(lb[u_axis], ub[u_axis], counts[0]);
    let vs = linspace(lb[v_axis], ub[v_axis], counts[1]);
    let mut pts = Vec::with_capacity(counts[0] * counts[1]);
    for &u in &us {
        for &v in &vs {
            let mut p = [0.0; 3];
            p[axis] = fixed;
            p[u_axis] = u;
            p[v_axis] = v;
            pts.push(p);
        }
    }
    let area = (ub[u_axis] - lb[u_axis]) * (ub[v_axis] - lb[v_axis]);
    QuadratureSet::from_points(pts, area, 2)
}
