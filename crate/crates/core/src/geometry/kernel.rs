//! One pure evaluation function per catalog component.
//!
//! Functions take one item per scalar input port and the whole list for list ports, in the
//! component's input order, and return the value of its single output port. List matching
//! is the evaluator's job.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::curve::{interpolate, BSpline, Curve};
use super::surface::Surface;
use super::value::GeomValue;
use crate::math::{self, Point3, Vec3};
use crate::registry::with_article;

pub type KernelResult = Result<GeomValue, String>;

fn expect(v: &GeomValue, want: &str) -> String {
    format!("expected {want}, got {}", with_article(v.kind().name()))
}

fn num(v: &GeomValue) -> Result<f64, String> {
    match v {
        GeomValue::Number(x) => Ok(*x),
        other => Err(expect(other, "a number")),
    }
}

/// Integer ports accept any number, rounded half away from zero.
fn int(v: &GeomValue) -> Result<i64, String> {
    let x = num(v)?;
    if !x.is_finite() {
        return Err(format!("{x} is not a finite integer"));
    }
    Ok(math::round(x) as i64)
}

fn point(v: &GeomValue) -> Result<Point3, String> {
    match v {
        GeomValue::Point(p) => Ok(*p),
        other => Err(expect(other, "a point")),
    }
}

fn vector(v: &GeomValue) -> Result<Vec3, String> {
    match v {
        GeomValue::Vector(x) => Ok(*x),
        other => Err(expect(other, "a vector")),
    }
}

fn curve(v: &GeomValue) -> Result<&Curve, String> {
    match v {
        GeomValue::Curve(c) => Ok(c),
        other => Err(expect(other, "a curve")),
    }
}

fn items(v: &GeomValue) -> &[GeomValue] {
    match v {
        GeomValue::List(items) => items,
        other => core::slice::from_ref(other),
    }
}

fn points(v: &GeomValue) -> Result<Vec<Point3>, String> {
    items(v).iter().map(point).collect()
}

/// Dispatches on the canonical component name. Params components are handled by the
/// evaluator since their output comes from pins.
pub fn eval_component(name: &str, args: &[GeomValue]) -> KernelResult {
    let a = |i: usize| args.get(i).ok_or_else(|| format!("{name}: missing argument {i}"));
    match name {
        "Construct Point" => Ok(GeomValue::Point(Point3::new(num(a(0)?)?, num(a(1)?)?, num(a(2)?)?))),
        "Unit X" => Ok(GeomValue::Vector(Vec3::X * num(a(0)?)?)),
        "Unit Y" => Ok(GeomValue::Vector(Vec3::Y * num(a(0)?)?)),
        "Unit Z" => Ok(GeomValue::Vector(Vec3::Z * num(a(0)?)?)),
        "Vector XYZ" => Ok(GeomValue::Vector(Vec3::new(num(a(0)?)?, num(a(1)?)?, num(a(2)?)?))),
        "Line" => Ok(GeomValue::Curve(Curve::Line { a: point(a(0)?)?, b: point(a(1)?)? })),
        "Line SDL" => eval_line_sdl(point(a(0)?)?, vector(a(1)?)?, num(a(2)?)?),
        "Polyline" => eval_polyline(&points(a(0)?)?, num(a(1)?)? != 0.0),
        "Circle" => eval_circle(point(a(0)?)?, num(a(1)?)?),
        "Series" => eval_series(num(a(0)?)?, num(a(1)?)?, int(a(2)?)?),
        "Range" => eval_range(num(a(0)?)?, num(a(1)?)?, int(a(2)?)?),
        "Divide Curve" => eval_divide_curve(curve(a(0)?)?, int(a(1)?)?),
        "Move" => eval_move(a(0)?, a(1)?),
        "Extrude Linear" => eval_extrude_linear(curve(a(0)?)?, a(1)?),
        "Loft" => eval_loft(a(0)?),
        "Nurbs Curve" => eval_nurbs(&points(a(0)?)?, int(a(1)?)?),
        "Interpolate Curve" => eval_interpolate(&points(a(0)?)?, int(a(1)?)?),
        "Addition" => Ok(GeomValue::Number(num(a(0)?)? + num(a(1)?)?)),
        "Subtraction" => Ok(GeomValue::Number(num(a(0)?)? - num(a(1)?)?)),
        "Multiplication" => Ok(GeomValue::Number(num(a(0)?)? * num(a(1)?)?)),
        "Division" => eval_division(num(a(0)?)?, num(a(1)?)?),
        "Negative" => Ok(GeomValue::Number(-num(a(0)?)?)),
        "Merge" => Ok(GeomValue::List(args.iter().flat_map(|v| items(v).iter().cloned()).collect())),
        "List Item" => eval_list_item(a(0)?, int(a(1)?)?),
        other => Err(format!("no evaluation function for component {other}")),
    }
}

/// `[start, start + step, ..]` with `count` items.
pub fn eval_series(start: f64, step: f64, count: i64) -> KernelResult {
    if count < 0 {
        return Err(format!("Series count {count} is negative"));
    }
    Ok(GeomValue::List((0..count).map(|i| GeomValue::Number(start + i as f64 * step)).collect()))
}

/// `steps + 1` evenly spaced numbers from `start` to `end` inclusive.
pub fn eval_range(start: f64, end: f64, steps: i64) -> KernelResult {
    if steps < 1 {
        return Err(format!("Range needs at least one step, got {steps}"));
    }
    Ok(GeomValue::List(
        (0..=steps).map(|i| GeomValue::Number(start + (end - start) * i as f64 / steps as f64)).collect(),
    ))
}

pub fn eval_division(a: f64, b: f64) -> KernelResult {
    if b == 0.0 {
        return Err("division by zero".to_string());
    }
    Ok(GeomValue::Number(a / b))
}

pub fn eval_line_sdl(start: Point3, direction: Vec3, length: f64) -> KernelResult {
    let dir = direction.normalized().ok_or("Line SDL direction is zero")?;
    Ok(GeomValue::Curve(Curve::Line { a: start, b: start + dir * length }))
}

pub fn eval_polyline(vertices: &[Point3], closed: bool) -> KernelResult {
    if vertices.len() < 2 {
        return Err(format!("Polyline needs at least 2 vertices, got {}", vertices.len()));
    }
    Ok(GeomValue::Curve(Curve::Polyline { vertices: vertices.to_vec(), closed }))
}

/// Circle in the plane through `center` with normal +Z.
pub fn eval_circle(center: Point3, radius: f64) -> KernelResult {
    if !(radius > 0.0) {
        return Err(format!("Circle radius {radius} must be positive"));
    }
    Ok(GeomValue::Curve(Curve::Circle { center, normal: Vec3::Z, radius }))
}

/// `count + 1` points on open curves and `count` on closed ones, at equal arc length.
pub fn eval_divide_curve(curve: &Curve, count: i64) -> KernelResult {
    if count < 1 {
        return Err(format!("Divide Curve count {count} must be at least 1"));
    }
    Ok(GeomValue::List(curve.divide(count as usize).into_iter().map(GeomValue::Point).collect()))
}

pub fn eval_move(geometry: &GeomValue, motion: &GeomValue) -> KernelResult {
    let GeomValue::Vector(v) = motion else {
        return Err("Move requires a vector input".to_string());
    };
    match geometry {
        GeomValue::Point(_) | GeomValue::Curve(_) | GeomValue::Surface(_) => {
            Ok(geometry.translated(*v).expect("geometry translates"))
        }
        other => Err(expect(other, "geometry")),
    }
}

pub fn eval_extrude_linear(profile: &Curve, axis: &GeomValue) -> KernelResult {
    let GeomValue::Vector(direction) = axis else {
        return Err(format!("Extrude Linear requires an axis input instead of {}", with_article(axis.kind().name())));
    };
    if direction.is_zero() {
        return Err("Extrude Linear axis is zero".to_string());
    }
    Ok(GeomValue::Surface(Surface::Extrusion { profile: profile.clone(), direction: *direction }))
}

pub fn eval_loft(sections: &GeomValue) -> KernelResult {
    let curves = items(sections).iter().map(|v| curve(v).cloned()).collect::<Result<Vec<_>, _>>()?;
    if curves.len() < 2 {
        return Err(format!("Loft needs at least 2 section curves, got {}", curves.len()));
    }
    Ok(GeomValue::Surface(Surface::Loft { sections: curves }))
}

fn spline_degree(degree: i64, count: usize) -> usize {
    (degree.max(1) as usize).min(count.saturating_sub(1).max(1))
}

/// Clamped uniform B-spline; the degree is clamped to `[1, control.len() - 1]`.
pub fn eval_nurbs(control: &[Point3], degree: i64) -> KernelResult {
    if control.len() < 2 {
        return Err(format!("Nurbs Curve needs at least 2 control points, got {}", control.len()));
    }
    let spline = BSpline::new(control.to_vec(), spline_degree(degree, control.len())).ok_or("invalid control polygon")?;
    Ok(GeomValue::Curve(Curve::Nurbs(spline)))
}

/// B-spline passing through every vertex.
pub fn eval_interpolate(vertices: &[Point3], degree: i64) -> KernelResult {
    if vertices.len() < 2 {
        return Err(format!("Interpolate Curve needs at least 2 points, got {}", vertices.len()));
    }
    let spline = interpolate(vertices, spline_degree(degree, vertices.len())).ok_or("interpolation system is singular")?;
    Ok(GeomValue::Curve(Curve::Nurbs(spline)))
}

/// Index wraps around the list length, negative indices count from the end.
pub fn eval_list_item(list: &GeomValue, index: i64) -> KernelResult {
    let list = items(list);
    if list.is_empty() {
        return Err("List Item on an empty list".to_string());
    }
    let i = index.rem_euclid(list.len() as i64) as usize;
    Ok(list[i].clone())
}
