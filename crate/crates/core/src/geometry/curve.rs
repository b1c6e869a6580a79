use alloc::vec::Vec;

use crate::math::{self, Point3, Vec3};

/// Segments in the coarse arc-length table for curves without a closed form.
pub const ARC_TABLE_SEGMENTS: usize = 256;

const ARC_REL_TOL: f64 = 1e-12;

/// Curve variants flowing through a script. All curves are parameterised over `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    Line { a: Point3, b: Point3 },
    Polyline { vertices: Vec<Point3>, closed: bool },
    Circle { center: Point3, normal: Vec3, radius: f64 },
    Nurbs(BSpline),
}

/// Clamped uniform, non-rational B-spline.
#[derive(Debug, Clone, PartialEq)]
pub struct BSpline {
    control: Vec<Point3>,
    degree: usize,
    knots: Vec<f64>,
}

impl BSpline {
    /// Builds a clamped uniform B-spline. The degree is clamped to `control.len() - 1`.
    /// Returns `None` with fewer than two control points or a zero degree.
    pub fn new(control: Vec<Point3>, degree: usize) -> Option<Self> {
        if control.len() < 2 || degree == 0 {
            return None;
        }
        let degree = degree.min(control.len() - 1);
        let knots = clamped_uniform_knots(control.len(), degree);
        Some(Self { control, degree, knots })
    }

    pub fn control(&self) -> &[Point3] {
        &self.control
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn span(&self, t: f64) -> usize {
        let n = self.control.len() - 1;
        let p = self.degree;
        if t >= self.knots[n + 1] {
            return n;
        }
        if t <= self.knots[p] {
            return p;
        }
        let (mut lo, mut hi) = (p, n + 1);
        let mut mid = (lo + hi) / 2;
        while t < self.knots[mid] || t >= self.knots[mid + 1] {
            if t < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
            mid = (lo + hi) / 2;
        }
        mid
    }

    /// De Boor evaluation.
    pub fn point_at(&self, t: f64) -> Point3 {
        let t = t.clamp(0.0, 1.0);
        let p = self.degree;
        let k = self.span(t);
        let mut d: Vec<Point3> = (0..=p).map(|j| self.control[j + k - p]).collect();
        for r in 1..=p {
            for j in (r..=p).rev() {
                let i = j + k - p;
                let denom = self.knots[i + p + 1 - r] - self.knots[i];
                let alpha = if denom == 0.0 { 0.0 } else { (t - self.knots[i]) / denom };
                d[j] = d[j - 1].lerp(d[j], alpha);
            }
        }
        d[p]
    }

    /// First derivative with respect to `t`, from the degree `p - 1` derivative spline.
    pub fn derivative_at(&self, t: f64) -> Vec3 {
        let t = t.clamp(0.0, 1.0);
        let p = self.degree;
        let k = self.span(t);
        let u = &self.knots;
        let mut d: Vec<Vec3> = (k - p..k)
            .map(|i| {
                let span = u[i + p + 1] - u[i + 1];
                if span == 0.0 {
                    Vec3::ZERO
                } else {
                    (self.control[i + 1] - self.control[i]) * (p as f64 / span)
                }
            })
            .collect();
        // De Boor on the derivative knots `u[1..]`, whose span index is `k - 1`.
        let q = p - 1;
        for r in 1..=q {
            for j in (r..=q).rev() {
                let i = j + k - 1 - q;
                let denom = u[i + q + 2 - r] - u[i + 1];
                let alpha = if denom == 0.0 { 0.0 } else { (t - u[i + 1]) / denom };
                d[j] = d[j - 1] * (1.0 - alpha) + d[j] * alpha;
            }
        }
        d[q]
    }

    /// Arc length between parameters, integrating the speed span by span.
    pub fn arc_length(&self, t0: f64, t1: f64) -> f64 {
        let speed = |t: f64| self.derivative_at(t).length();
        let mut acc = 0.0;
        let mut a = t0;
        let breaks = self.knots.iter().copied().filter(|&k| k > t0 && k < t1);
        for b in breaks.chain(core::iter::once(t1)) {
            if b > a {
                acc += adaptive_gl(&speed, a, b, gauss_legendre(&speed, a, b), 12);
                a = b;
            }
        }
        acc
    }

    /// Value of every basis function at `t`; used to set up interpolation systems.
    pub fn basis_at(&self, t: f64) -> Vec<f64> {
        let n = self.control.len();
        let p = self.degree;
        let t = t.clamp(0.0, 1.0);
        let k = self.span(t);
        let mut out = alloc::vec![0.0; n];
        // Cox-de Boor triangle for the p+1 non-zero functions.
        let mut nb = alloc::vec![0.0; p + 1];
        nb[0] = 1.0;
        let mut left = alloc::vec![0.0; p + 1];
        let mut right = alloc::vec![0.0; p + 1];
        for j in 1..=p {
            left[j] = t - self.knots[k + 1 - j];
            right[j] = self.knots[k + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                let denom = right[r + 1] + left[j - r];
                let temp = if denom == 0.0 { 0.0 } else { nb[r] / denom };
                nb[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            nb[j] = saved;
        }
        for (j, v) in nb.into_iter().enumerate() {
            out[k - p + j] = v;
        }
        out
    }

    /// Greville abscissae of the knot vector, one per control point.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        (0..self.control.len())
            .map(|i| self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64)
            .collect()
    }

    fn translated(&self, v: Vec3) -> Self {
        Self {
            control: self.control.iter().map(|&c| c + v).collect(),
            degree: self.degree,
            knots: self.knots.clone(),
        }
    }
}

/// Knot vector with `degree + 1` repeated end knots and uniform interior knots on `[0, 1]`.
pub fn clamped_uniform_knots(count: usize, degree: usize) -> Vec<f64> {
    let interior = count - degree - 1;
    let mut knots = Vec::with_capacity(count + degree + 1);
    knots.extend(core::iter::repeat(0.0).take(degree + 1));
    for j in 1..=interior {
        knots.push(j as f64 / (interior + 1) as f64);
    }
    knots.extend(core::iter::repeat(1.0).take(degree + 1));
    knots
}

/// B-spline through `points`: clamped uniform knots, control points solved so the curve passes
/// through each point at the Greville abscissae.
pub fn interpolate(points: &[Point3], degree: usize) -> Option<BSpline> {
    let shape = BSpline::new(points.to_vec(), degree)?;
    let params = shape.greville();
    let n = points.len();
    let mut rows: Vec<Vec<f64>> = params.iter().map(|&t| shape.basis_at(t)).collect();
    let mut rhs: Vec<[f64; 3]> = points.iter().map(|p| [p.x, p.y, p.z]).collect();
    // Gaussian elimination with partial pivoting; the collocation matrix is non-singular
    // because the Greville abscissae satisfy the Schoenberg-Whitney condition.
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| math::abs(rows[a][col]).total_cmp(&math::abs(rows[b][col])))?;
        if math::abs(rows[pivot][col]) < 1e-14 {
            return None;
        }
        rows.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in col + 1..n {
            let f = rows[r][col] / rows[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                rows[r][c] -= f * rows[col][c];
            }
            for d in 0..3 {
                rhs[r][d] -= f * rhs[col][d];
            }
        }
    }
    let mut sol = alloc::vec![[0.0f64; 3]; n];
    for r in (0..n).rev() {
        for d in 0..3 {
            let mut acc = rhs[r][d];
            for c in r + 1..n {
                acc -= rows[r][c] * sol[c][d];
            }
            sol[r][d] = acc / rows[r][r];
        }
    }
    BSpline::new(sol.into_iter().map(|[x, y, z]| Point3::new(x, y, z)).collect(), shape.degree)
}

impl Curve {
    pub fn point_at(&self, t: f64) -> Point3 {
        let t = t.clamp(0.0, 1.0);
        match self {
            Curve::Line { a, b } => a.lerp(*b, t),
            Curve::Polyline { vertices, closed } => {
                let segs = segment_count(vertices.len(), *closed);
                let x = t * segs as f64;
                let i = (math::floor(x) as usize).min(segs - 1);
                let a = vertices[i];
                let b = vertices[(i + 1) % vertices.len()];
                a.lerp(b, x - i as f64)
            }
            Curve::Circle { center, normal, radius } => {
                let (u, v) = normal.orthonormal_basis();
                let th = t * math::TAU;
                *center + (u * math::cos(th) + v * math::sin(th)) * *radius
            }
            Curve::Nurbs(b) => b.point_at(t),
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Curve::Line { .. } | Curve::Nurbs(_) => false,
            Curve::Polyline { closed, .. } => *closed,
            Curve::Circle { .. } => true,
        }
    }

    pub fn start(&self) -> Point3 {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Point3 {
        self.point_at(1.0)
    }

    pub fn length(&self) -> f64 {
        match self {
            Curve::Line { a, b } => a.distance(*b),
            Curve::Polyline { vertices, closed } => {
                polyline_cumulative(vertices, *closed).last().copied().unwrap_or(0.0)
            }
            Curve::Circle { radius, .. } => math::TAU * radius,
            Curve::Nurbs(b) => b.arc_length(0.0, 1.0),
        }
    }

    pub fn translated(&self, v: Vec3) -> Curve {
        match self {
            Curve::Line { a, b } => Curve::Line { a: *a + v, b: *b + v },
            Curve::Polyline { vertices, closed } => Curve::Polyline {
                vertices: vertices.iter().map(|&p| p + v).collect(),
                closed: *closed,
            },
            Curve::Circle { center, normal, radius } => Curve::Circle {
                center: *center + v,
                normal: *normal,
                radius: *radius,
            },
            Curve::Nurbs(b) => Curve::Nurbs(b.translated(v)),
        }
    }

    /// Points at the given normalised arc-length fractions (each in `[0, 1]`).
    pub fn points_at_length_fractions(&self, fractions: &[f64]) -> Vec<Point3> {
        match self {
            Curve::Line { .. } | Curve::Circle { .. } => {
                fractions.iter().map(|&f| self.point_at(f)).collect()
            }
            Curve::Polyline { vertices, closed } => {
                let cum = polyline_cumulative(vertices, *closed);
                let total = *cum.last().unwrap_or(&0.0);
                fractions
                    .iter()
                    .map(|&f| polyline_at_length(vertices, *closed, &cum, f.clamp(0.0, 1.0) * total))
                    .collect()
            }
            Curve::Nurbs(_) => {
                let table = ArcTable::new(self);
                fractions.iter().map(|&f| self.point_at(table.param_at_fraction(f))).collect()
            }
        }
    }

    /// Equal arc-length division: `count + 1` points on open curves, `count` on closed curves
    /// (the seam is not repeated).
    pub fn divide(&self, count: usize) -> Vec<Point3> {
        let n = if self.is_closed() { count } else { count + 1 };
        let fractions: Vec<f64> = (0..n).map(|i| i as f64 / count as f64).collect();
        self.points_at_length_fractions(&fractions)
    }
}

fn segment_count(vertices: usize, closed: bool) -> usize {
    if closed {
        vertices
    } else {
        vertices - 1
    }
}

fn polyline_cumulative(vertices: &[Point3], closed: bool) -> Vec<f64> {
    let segs = segment_count(vertices.len(), closed);
    let mut cum = Vec::with_capacity(segs + 1);
    cum.push(0.0);
    let mut acc = 0.0;
    for i in 0..segs {
        acc += vertices[i].distance(vertices[(i + 1) % vertices.len()]);
        cum.push(acc);
    }
    cum
}

fn polyline_at_length(vertices: &[Point3], closed: bool, cum: &[f64], s: f64) -> Point3 {
    let segs = segment_count(vertices.len(), closed);
    let i = match cum.iter().position(|&c| c > s) {
        Some(0) => 0,
        Some(i) => (i - 1).min(segs - 1),
        None => segs - 1,
    };
    let a = vertices[i];
    let b = vertices[(i + 1) % vertices.len()];
    let seg = cum[i + 1] - cum[i];
    if seg <= 0.0 {
        return a;
    }
    a.lerp(b, ((s - cum[i]) / seg).clamp(0.0, 1.0))
}

/// Arc length of `curve` between parameters `t0 <= t1`.
fn arc_between(curve: &Curve, t0: f64, t1: f64) -> f64 {
    match curve {
        Curve::Line { .. } | Curve::Circle { .. } => curve.length() * (t1 - t0),
        Curve::Polyline { vertices, closed } => {
            let segs = segment_count(vertices.len(), *closed) as f64;
            let mut acc = 0.0;
            let mut t = t0;
            while t < t1 {
                let next = ((math::floor(t * segs) + 1.0) / segs).min(t1);
                if next <= t {
                    break;
                }
                acc += curve.point_at(t).distance(curve.point_at(next));
                t = next;
            }
            acc
        }
        Curve::Nurbs(b) => b.arc_length(t0, t1),
    }
}

// 8-point Gauss-Legendre nodes and weights on [-1, 1], positive half.
const GL_NODES: [f64; 4] = [0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363];
const GL_WEIGHTS: [f64; 4] = [0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];

fn gauss_legendre(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

fn adaptive_gl(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let (left, right) = (gauss_legendre(f, a, mid), gauss_legendre(f, mid, b));
    let split = left + right;
    if depth == 0 || math::abs(split - whole) <= ARC_REL_TOL * split.max(1e-300) {
        return split;
    }
    adaptive_gl(f, a, mid, left, depth - 1) + adaptive_gl(f, mid, b, right, depth - 1)
}

/// Cumulative arc length over `ARC_TABLE_SEGMENTS` uniform parameter segments.
pub struct ArcTable<'a> {
    curve: &'a Curve,
    cumulative: Vec<f64>,
}

impl<'a> ArcTable<'a> {
    pub fn new(curve: &'a Curve) -> Self {
        let mut cumulative = Vec::with_capacity(ARC_TABLE_SEGMENTS + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for k in 0..ARC_TABLE_SEGMENTS {
            let t0 = k as f64 / ARC_TABLE_SEGMENTS as f64;
            let t1 = (k + 1) as f64 / ARC_TABLE_SEGMENTS as f64;
            acc += arc_between(curve, t0, t1);
            cumulative.push(acc);
        }
        Self { curve, cumulative }
    }

    pub fn total(&self) -> f64 {
        self.cumulative[ARC_TABLE_SEGMENTS]
    }

    /// Parameter whose arc length from the start is `fraction` of the total.
    pub fn param_at_fraction(&self, fraction: f64) -> f64 {
        let total = self.total();
        let f = fraction.clamp(0.0, 1.0);
        if total <= 0.0 || f == 0.0 {
            return 0.0;
        }
        if f == 1.0 {
            return 1.0;
        }
        let target = f * total;
        let k = match self.cumulative.iter().position(|&c| c >= target) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => ARC_TABLE_SEGMENTS - 1,
        };
        let t_lo = k as f64 / ARC_TABLE_SEGMENTS as f64;
        let local = target - self.cumulative[k];
        let (mut lo, mut hi) = (t_lo, (k + 1) as f64 / ARC_TABLE_SEGMENTS as f64);
        let (mut f_lo, mut f_hi) = (-local, self.cumulative[k + 1] - target);
        // Illinois-modified regula falsi on s(t) - target inside one table segment.
        let mut side = 0i8;
        for _ in 0..60 {
            if f_hi - f_lo == 0.0 {
                break;
            }
            let t = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            let ft = arc_between(self.curve, t_lo, t) - local;
            if math::abs(ft) <= 1e-13 * total {
                return t;
            }
            if ft < 0.0 {
                lo = t;
                f_lo = ft;
                if side == -1 {
                    f_hi *= 0.5;
                }
                side = -1;
            } else {
                hi = t;
                f_hi = ft;
                if side == 1 {
                    f_lo *= 0.5;
                }
                side = 1;
            }
        }
        0.5 * (lo + hi)
    }
}
