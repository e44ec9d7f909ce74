//! Closed-form added-damping tensors and inertias for standard shapes,
//! and surface samplings of the same shapes for quadrature.
//!
//! Every closed form assumes a constant length scale `dn` and is reported
//! about the centre of mass. Planar shapes have unit depth.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use super::{AddedDampingTensor, BodySurfaceSample, Provenance, SurfacePoint};
use crate::error::{param, Result};

/// Shape parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeSpec {
    /// Circular cylinder of radius `a` and depth `d`, side surface only.
    Disk { a: f64, d: f64 },
    /// Rectangle of width `w` (x) and height `h` (y).
    Rectangle { w: f64, h: f64 },
    /// Trapezoid of width `w` with left side length `a` and right side
    /// length `b`, both centred on `y = 0`.
    Trapezoid { w: f64, a: f64, b: f64 },
    /// L-shape with vertices `(0,0), (2b,0), (2b,a), (b,a), (b,2a), (0,2a)`.
    LShape { a: f64, b: f64 },
    /// Ellipse `(x/a)^2 + (y/b)^2 = 1`.
    Ellipse { a: f64, b: f64 },
    Sphere { a: f64 },
    /// Arbitrary closed polygon, counter-clockwise.
    Polygon { vertices: Vec<[f64; 2]> },
}

/// Complete elliptic integrals `(K(k), E(k))` for modulus `k`, by the
/// arithmetic-geometric mean.
pub fn elliptic_ke(k: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&k) {
        return param("elliptic modulus must lie in [0, 1)");
    }
    let mut a = 1.0_f64;
    let mut b = (1.0 - k * k).sqrt();
    let mut c = k;
    let mut sum = 0.5 * c * c;
    let mut pow = 0.5;
    for _ in 0..64 {
        if c.abs() < 1e-17 {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        pow *= 2.0;
        sum += pow * c * c;
        a = an;
        b = bn;
    }
    let kk = PI / (2.0 * a);
    Ok((kk, kk * (1.0 - sum)))
}

fn positive(vals: &[f64]) -> Result<()> {
    if vals.iter().all(|v| *v > 0.0 && v.is_finite()) {
        Ok(())
    } else {
        param("shape lengths must be positive")
    }
}

fn polygon_props(v: &[[f64; 2]]) -> (f64, [f64; 2], f64) {
    // area, centroid, polar second moment about the centroid (unit density)
    let n = v.len();
    let (mut a2, mut cx, mut cy, mut jo) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let [x0, y0] = v[i];
        let [x1, y1] = v[(i + 1) % n];
        let cr = x0 * y1 - x1 * y0;
        a2 += cr;
        cx += (x0 + x1) * cr;
        cy += (y0 + y1) * cr;
        jo += cr * (x0 * x0 + x0 * x1 + x1 * x1 + y0 * y0 + y0 * y1 + y1 * y1);
    }
    let area = 0.5 * a2;
    let c = [cx / (3.0 * a2), cy / (3.0 * a2)];
    let j_origin = jo / 12.0;
    (area, c, j_origin - area * (c[0] * c[0] + c[1] * c[1]))
}

impl ShapeSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ShapeSpec::Disk { a, d } => positive(&[*a, *d]),
            ShapeSpec::Rectangle { w, h } => positive(&[*w, *h]),
            ShapeSpec::Trapezoid { w, a, b } => positive(&[*w, *a, *b]),
            ShapeSpec::LShape { a, b } => positive(&[*a, *b]),
            ShapeSpec::Ellipse { a, b } => positive(&[*a, *b]),
            ShapeSpec::Sphere { a } => positive(&[*a]),
            ShapeSpec::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return param("a polygon needs at least three vertices");
                }
                if polygon_props(vertices).0 <= 0.0 {
                    return param("polygon must be counter-clockwise with positive area");
                }
                Ok(())
            }
        }
    }

    pub fn is_planar(&self) -> bool {
        !matches!(self, ShapeSpec::Sphere { .. })
    }

    fn vertices(&self) -> Option<Vec<[f64; 2]>> {
        match *self {
            ShapeSpec::Rectangle { w, h } => {
                Some(vec![[-w / 2.0, -h / 2.0], [w / 2.0, -h / 2.0], [w / 2.0, h / 2.0], [-w / 2.0, h / 2.0]])
            }
            ShapeSpec::Trapezoid { w, a, b } => {
                Some(vec![[-w / 2.0, -a / 2.0], [w / 2.0, -b / 2.0], [w / 2.0, b / 2.0], [-w / 2.0, a / 2.0]])
            }
            ShapeSpec::LShape { a, b } => Some(vec![
                [0.0, 0.0],
                [2.0 * b, 0.0],
                [2.0 * b, a],
                [b, a],
                [b, 2.0 * a],
                [0.0, 2.0 * a],
            ]),
            ShapeSpec::Polygon { ref vertices } => Some(vertices.clone()),
            _ => None,
        }
    }

    /// Volume (area times unit depth for planar shapes, or times `d` for
    /// the disk).
    pub fn volume(&self) -> f64 {
        match *self {
            ShapeSpec::Disk { a, d } => PI * a * a * d,
            ShapeSpec::Ellipse { a, b } => PI * a * b,
            ShapeSpec::Sphere { a } => 4.0 / 3.0 * PI * a.powi(3),
            _ => polygon_props(&self.vertices().unwrap()).0,
        }
    }

    /// Centre of mass for constant density.
    pub fn centroid(&self) -> Vector3<f64> {
        match self {
            ShapeSpec::Disk { .. } | ShapeSpec::Ellipse { .. } | ShapeSpec::Sphere { .. } => Vector3::zeros(),
            _ => {
                let c = polygon_props(&self.vertices().unwrap()).1;
                Vector3::new(c[0], c[1], 0.0)
            }
        }
    }

    /// Mass for body density `rho_b`.
    pub fn mass(&self, rho_b: f64) -> f64 {
        rho_b * self.volume()
    }

    /// Inertia tensor about the centre of mass for density `rho_b`.
    pub fn inertia(&self, rho_b: f64) -> Result<Matrix3<f64>> {
        self.validate()?;
        let m = self.mass(rho_b);
        let iz = match *self {
            ShapeSpec::Disk { a, d } => {
                let ix = m * (3.0 * a * a + d * d) / 12.0;
                return Ok(Matrix3::from_diagonal(&Vector3::new(ix, ix, 0.5 * m * a * a)));
            }
            ShapeSpec::Sphere { a } => {
                let i = 0.4 * m * a * a;
                return Ok(Matrix3::from_diagonal(&Vector3::new(i, i, i)));
            }
            ShapeSpec::Rectangle { w, h } => m * (w * w + h * h) / 12.0,
            ShapeSpec::Trapezoid { w, a, b } => {
                let s = a + b;
                rho_b * w / 12.0 * s / 2.0
                    * (w * w * 2.0 / 3.0 * (a * a + 4.0 * a * b + b * b) / (s * s) + (a * a + b * b) / 2.0)
            }
            ShapeSpec::LShape { a, b } => 11.0 / 12.0 * rho_b * a * b * (a * a + b * b),
            ShapeSpec::Ellipse { a, b } => m * (a * a + b * b) / 4.0,
            ShapeSpec::Polygon { ref vertices } => rho_b * polygon_props(vertices).2,
        };
        Ok(Matrix3::from_diagonal(&Vector3::new(0.0, 0.0, iz)))
    }

    /// Closed-form approximate tensors, scaled by `mu / dn`.
    pub fn analytic_tensor(&self, mu: f64, dn: f64) -> Result<AddedDampingTensor> {
        self.validate()?;
        if !(dn > 0.0) {
            return param("dn must be positive");
        }
        let s = mu / dn;
        let diag = |x: f64, y: f64, z: f64| Matrix3::from_diagonal(&Vector3::new(x, y, z));
        let z = Matrix3::zeros();
        let (vv, vw, ww) = match *self {
            ShapeSpec::Disk { a, d } => (diag(PI * a * d, PI * a * d, 0.0), z, diag(0.0, 0.0, 2.0 * PI * a * d * a * a)),
            ShapeSpec::Rectangle { w, h } => (diag(2.0 * w, 2.0 * h, 0.0), z, diag(0.0, 0.0, w * h * (w + h) / 2.0)),
            ShapeSpec::Trapezoid { w, a, b } => {
                let del = (4.0 * w * w + (a - b).powi(2)).sqrt();
                let q = a * a + a * b + b * b;
                let mut vw = z;
                vw[(1, 2)] = w / 3.0 * (b - a) * (1.0 - 2.0 / del * q / (a + b));
                let ww33 = w * w / 9.0 * ((a * a + 7.0 * a * b + b * b) / (a + b) + 4.0 / del * q * q / (a + b).powi(2));
                (diag(4.0 * w * w / del, a + b + (a - b).powi(2) / del, 0.0), vw, diag(0.0, 0.0, ww33))
            }
            ShapeSpec::LShape { a, b } => {
                let mut vw = z;
                vw[(0, 2)] = a * b / 3.0;
                vw[(1, 2)] = -a * b / 3.0;
                (diag(4.0 * b, 4.0 * a, 0.0), vw, diag(0.0, 0.0, 25.0 / 9.0 * a * b * (a + b)))
            }
            ShapeSpec::Ellipse { a, b } => {
                if a == b {
                    (diag(PI * a, PI * a, 0.0), z, diag(0.0, 0.0, 2.0 * PI * a.powi(3)))
                } else if a < b {
                    // same body turned by a quarter: swap the translational entries
                    let t = ShapeSpec::Ellipse { a: b, b: a }.analytic_tensor(1.0, 1.0)?;
                    let v = t.vv();
                    (diag(v[(1, 1)], v[(0, 0)], 0.0), z, t.ww())
                } else {
                    let eta = (a * a - b * b).sqrt() / a;
                    let (k, e) = elliptic_ke(eta)?;
                    let d11 = -4.0 * a * (b * b * k - a * a * e) / (a * a - b * b);
                    let d22 = 4.0 * b * b * a * (k - e) / (a * a - b * b);
                    (diag(d11, d22, 0.0), z, diag(0.0, 0.0, 4.0 * a * b * b * k))
                }
            }
            ShapeSpec::Sphere { a } => {
                let c = 8.0 / 3.0 * PI;
                (diag(c * a * a, c * a * a, c * a * a), z, diag(c * a.powi(4), c * a.powi(4), c * a.powi(4)))
            }
            ShapeSpec::Polygon { .. } => return param("no closed form for a general polygon; use approx_tensors"),
        };
        Ok(AddedDampingTensor::from_blocks(vv, vw, vw.transpose(), ww, Provenance::Analytic).scaled(s))
    }

    /// Surface sample with about `n` points; polygons use the midpoint rule
    /// on equal sub-segments of each edge.
    pub fn sample(&self, n: usize) -> Result<BodySurfaceSample> {
        self.validate()?;
        let n = n.max(8);
        let mut pts = Vec::with_capacity(n);
        let mut push = |x: Vector3<f64>, nrm: Vector3<f64>, w: f64| {
            pts.push(SurfacePoint { position: x, normal: nrm.normalize(), weight: w, normal_spacing: 0.0 });
        };
        match *self {
            ShapeSpec::Disk { a, d } => {
                for i in 0..n {
                    let th = 2.0 * PI * i as f64 / n as f64;
                    let nr = Vector3::new(th.cos(), th.sin(), 0.0);
                    push(a * nr, nr, 2.0 * PI * a * d / n as f64);
                }
            }
            ShapeSpec::Ellipse { a, b } => {
                for i in 0..n {
                    let th = 2.0 * PI * i as f64 / n as f64;
                    let (s, c) = th.sin_cos();
                    let speed = (a * a * s * s + b * b * c * c).sqrt();
                    push(Vector3::new(a * c, b * s, 0.0), Vector3::new(b * c, a * s, 0.0), speed * 2.0 * PI / n as f64);
                }
            }
            ShapeSpec::Sphere { a } => {
                let nt = ((n as f64 / 2.0).sqrt().ceil() as usize).max(4);
                let np = 2 * nt;
                let (dt, dp) = (PI / nt as f64, 2.0 * PI / np as f64);
                for i in 0..nt {
                    let th = (i as f64 + 0.5) * dt;
                    for j in 0..np {
                        let ph = j as f64 * dp;
                        let nr = Vector3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos());
                        // exact band area so the total is 4 pi a^2
                        let band = 2.0 * PI * a * a * ((th - 0.5 * dt).cos() - (th + 0.5 * dt).cos());
                        push(a * nr, nr, band / np as f64);
                    }
                }
            }
            _ => {
                let v = self.vertices().unwrap();
                let perim: f64 = (0..v.len())
                    .map(|i| {
                        let (p, q) = (v[i], v[(i + 1) % v.len()]);
                        (q[0] - p[0]).hypot(q[1] - p[1])
                    })
                    .sum();
                for i in 0..v.len() {
                    let (p, q) = (v[i], v[(i + 1) % v.len()]);
                    let len = (q[0] - p[0]).hypot(q[1] - p[1]);
                    let m = ((n as f64 * len / perim).round() as usize).max(1);
                    let nr = Vector3::new(q[1] - p[1], p[0] - q[0], 0.0);
                    for k in 0..m {
                        let s = (k as f64 + 0.5) / m as f64;
                        let x = Vector3::new(p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1]), 0.0);
                        push(x, nr, len / m as f64);
                    }
                }
            }
        }
        Ok(BodySurfaceSample { points: pts, planar: self.is_planar() })
    }

    /// Parses `kind:key=value,...`, e.g. `rectangle:w=1,h=0.5`.
    pub fn parse(spec: &str) -> Result<ShapeSpec> {
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let mut kv = std::collections::BTreeMap::new();
        for part in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let Some((k, v)) = part.split_once('=') else {
                return param(format!("expected key=value, got '{part}'"));
            };
            let v: f64 = v.trim().parse().map_err(|_| crate::error::Error::Parameter(format!("'{v}' is not a number")))?;
            kv.insert(k.trim().to_string(), v);
        }
        let get = |k: &str| kv.get(k).copied().ok_or_else(|| crate::error::Error::Parameter(format!("shape '{kind}' needs '{k}'")));
        let shape = match kind.trim().to_ascii_lowercase().as_str() {
            "disk" | "cylinder" | "circle" => ShapeSpec::Disk { a: get("a")?, d: kv.get("d").copied().unwrap_or(1.0) },
            "rectangle" | "rect" => ShapeSpec::Rectangle { w: get("w")?, h: get("h")? },
            "trapezoid" => ShapeSpec::Trapezoid { w: get("w")?, a: get("a")?, b: get("b")? },
            "lshape" | "l-shape" => ShapeSpec::LShape { a: get("a")?, b: get("b")? },
            "ellipse" => ShapeSpec::Ellipse { a: get("a")?, b: get("b")? },
            "sphere" => ShapeSpec::Sphere { a: get("a")? },
            other => return param(format!("unknown shape '{other}'")),
        };
        let known: &[&str] = match shape {
            ShapeSpec::Disk { .. } => &["a", "d"],
            ShapeSpec::Rectangle { .. } => &["w", "h"],
            ShapeSpec::Trapezoid { .. } => &["w", "a", "b"],
            ShapeSpec::LShape { .. } | ShapeSpec::Ellipse { .. } => &["a", "b"],
            _ => &["a"],
        };
        if let Some(k) = kv.keys().find(|k| !known.contains(&k.as_str())) {
            return param(format!("unknown parameter '{k}' for shape '{kind}'"));
        }
        shape.validate()?;
        Ok(shape)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elliptic_reference_values() {
        let (k, e) = elliptic_ke(0.5).unwrap();
        assert!((k - 1.685_750_354_812_596).abs() < 1e-14);
        assert!((e - 1.467_462_209_339_427).abs() < 1e-14);
        let (k, e) = elliptic_ke(0.0).unwrap();
        assert!((k - PI / 2.0).abs() < 1e-15 && (e - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn parse_shapes() {
        assert_eq!(ShapeSpec::parse("rectangle:w=1,h=0.5").unwrap(), ShapeSpec::Rectangle { w: 1.0, h: 0.5 });
        assert!(ShapeSpec::parse("rectangle:w=1").is_err());
        assert!(ShapeSpec::parse("blob:a=1").is_err());
        assert!(ShapeSpec::parse("disk:a=-1").is_err());
        assert!(ShapeSpec::parse("disk:a=1,q=2").is_err());
    }

    #[test]
    fn rectangle_matches_quoted_values() {
        let d = ShapeSpec::Rectangle { w: 1.0, h: 0.5 }.analytic_tensor(1.0, 1.0).unwrap();
        assert!((d.vv()[(0, 0)] - 2.0).abs() < 1e-15);
        assert!((d.vv()[(1, 1)] - 1.0).abs() < 1e-15);
        assert!((d.ww()[(2, 2)] - 0.375).abs() < 1e-15);
    }
}
