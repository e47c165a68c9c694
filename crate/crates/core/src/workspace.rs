//! Labeled geometric workspace with exact collision queries.

use crate::ltl::{ApSet, Symbol};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Position in the workspace; the z component stays 0 in 2D scenes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point(pub [f64; 3]);

impl Point {
    pub fn new2(x: f64, y: f64) -> Point {
        Point([x, y, 0.0])
    }

    pub fn from_coords(c: &[f64]) -> Point {
        let mut p = [0.0; 3];
        p[..c.len()].copy_from_slice(c);
        Point(p)
    }

    pub fn coords(&self, dimension: usize) -> Vec<f64> {
        self.0[..dimension].to_vec()
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn add(self, o: Point) -> Point {
        Point([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }

    pub fn sub(self, o: Point) -> Point {
        Point([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }

    pub fn scale(self, s: f64) -> Point {
        Point([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn dot(self, o: Point) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Point) -> f64 {
        self.sub(o).norm()
    }

    /// Point at parameter `t` on the segment from `self` to `o`.
    pub fn lerp(self, o: Point, t: f64) -> Point {
        self.add(o.sub(self).scale(t))
    }
}

/// Axis-aligned box or ball; both are closed sets, so boundary contact
/// counts as membership.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Box { min: Point, max: Point },
    Ball { center: Point, radius: f64 },
}

impl Shape {
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Shape::Box { min, max } => (0..3).all(|i| min.0[i] <= p.0[i] && p.0[i] <= max.0[i]),
            Shape::Ball { center, radius } => p.dist(*center) <= *radius,
        }
    }

    pub fn center(&self) -> Point {
        match self {
            Shape::Box { min, max } => min.add(*max).scale(0.5),
            Shape::Ball { center, .. } => *center,
        }
    }

    /// True when the closed segment from `a` to `b` meets the shape.
    pub fn intersects_segment(&self, a: Point, b: Point) -> bool {
        match self {
            Shape::Box { min, max } => segment_hits_box(a, b, *min, *max),
            Shape::Ball { center, radius } => {
                segment_point_distance(a, b, *center) <= *radius
            }
        }
    }

    /// Uniform sample from the shape's interior.
    pub fn sample(&self, dimension: usize, rng: &mut impl Rng) -> Point {
        match self {
            Shape::Box { min, max } => {
                let mut c = [0.0; 3];
                for (i, slot) in c.iter_mut().enumerate().take(dimension) {
                    *slot = rng.random_range(min.0[i]..=max.0[i]);
                }
                Point(c)
            }
            Shape::Ball { center, radius } => loop {
                let mut c = [0.0; 3];
                for slot in c.iter_mut().take(dimension) {
                    *slot = rng.random_range(-1.0..=1.0);
                }
                let p = Point(c);
                if p.norm() <= 1.0 {
                    return center.add(p.scale(*radius));
                }
            },
        }
    }

    fn validate(&self, dimension: usize) -> Result<(), ScenarioError> {
        match self {
            Shape::Box { min, max } => {
                for i in 0..dimension {
                    if min.0[i] >= max.0[i] {
                        return Err(ScenarioError::Invalid(format!(
                            "box min must be below max componentwise, got {min:?} vs {max:?}"
                        )));
                    }
                }
                Ok(())
            }
            Shape::Ball { radius, .. } => {
                if *radius > 0.0 {
                    Ok(())
                } else {
                    Err(ScenarioError::Invalid(format!(
                        "ball radius must be positive, got {radius}"
                    )))
                }
            }
        }
    }
}

// Slab test; closed comparisons keep boundary grazes as hits.
fn segment_hits_box(a: Point, b: Point, min: Point, max: Point) -> bool {
    let d = b.sub(a);
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for i in 0..3 {
        if d.0[i].abs() < 1e-300 {
            if a.0[i] < min.0[i] || a.0[i] > max.0[i] {
                return false;
            }
        } else {
            let inv = 1.0 / d.0[i];
            let mut ta = (min.0[i] - a.0[i]) * inv;
            let mut tb = (max.0[i] - a.0[i]) * inv;
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Distance from `p` to the closed segment `a`-`b`.
pub fn segment_point_distance(a: Point, b: Point, p: Point) -> f64 {
    let d = b.sub(a);
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (p.sub(a).dot(d) / len2).clamp(0.0, 1.0);
    p.dist(a.add(d.scale(t)))
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario JSON at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("point {point:?} is outside the workspace bounds")]
pub struct OutOfBounds {
    pub point: [f64; 3],
}

/// Immutable scene: bounds, labeled regions, obstacles, and the initial
/// position, all tied to the scenario's AP declaration order.
#[derive(Debug, Clone)]
pub struct Workspace {
    dimension: usize,
    bounds_min: Point,
    bounds_max: Point,
    init: Point,
    regions: Vec<(usize, Shape)>,
    obstacles: Vec<Shape>,
    ap: ApSet,
    obstacle_atom: Option<usize>,
}

impl Workspace {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn ap(&self) -> &ApSet {
        &self.ap
    }

    pub fn init(&self) -> Point {
        self.init
    }

    pub fn bounds(&self) -> (Point, Point) {
        (self.bounds_min, self.bounds_max)
    }

    /// Diagonal length of the bounding box; tolerances scale off this.
    pub fn diameter(&self) -> f64 {
        self.bounds_max.sub(self.bounds_min).norm()
    }

    pub fn obstacles(&self) -> &[Shape] {
        &self.obstacles
    }

    pub fn obstacle_atom(&self) -> Option<usize> {
        self.obstacle_atom
    }

    /// Region shapes labeled with atom `idx` (the obstacle atom has none).
    pub fn regions_of(&self, idx: usize) -> impl Iterator<Item = &Shape> {
        self.regions
            .iter()
            .filter(move |(a, _)| *a == idx)
            .map(|(_, s)| s)
    }

    pub fn regions(&self) -> impl Iterator<Item = (usize, &Shape)> {
        self.regions.iter().map(|(a, s)| (*a, s))
    }

    pub fn in_bounds(&self, p: Point) -> bool {
        (0..self.dimension).all(|i| self.bounds_min.0[i] <= p.0[i] && p.0[i] <= self.bounds_max.0[i])
    }

    /// Atoms true at `x`: region labels containing it, plus the obstacle
    /// atom inside any obstacle.
    pub fn label_of(&self, x: Point) -> Result<Symbol, OutOfBounds> {
        if !self.in_bounds(x) {
            return Err(OutOfBounds { point: x.0 });
        }
        let mut sym = Symbol::EMPTY;
        for (atom, shape) in &self.regions {
            if shape.contains(x) {
                sym = sym.with(*atom);
            }
        }
        if let Some(o) = self.obstacle_atom {
            if self.obstacles.iter().any(|s| s.contains(x)) {
                sym = sym.with(o);
            }
        }
        Ok(sym)
    }

    pub fn point_in_obstacle(&self, x: Point) -> bool {
        self.obstacles.iter().any(|s| s.contains(x))
    }

    /// Exact test: does the closed segment avoid every obstacle?
    pub fn segment_collision_free(&self, a: Point, b: Point) -> bool {
        !self
            .obstacles
            .iter()
            .any(|s| s.intersects_segment(a, b))
    }

    /// Transition predicate of the geometric abstraction: within step
    /// radius and collision-free.
    pub fn gwts_transition(&self, a: Point, b: Point, eta: f64) -> bool {
        assert!(eta > 0.0, "step radius must be positive");
        a.dist(b) <= eta && self.segment_collision_free(a, b)
    }

    /// Uniform sample inside the bounds.
    pub fn sample_bounds(&self, rng: &mut impl Rng) -> Point {
        let shape = Shape::Box {
            min: self.bounds_min,
            max: self.bounds_max,
        };
        shape.sample(self.dimension, rng)
    }

    pub fn from_json(text: &str) -> Result<Workspace, ScenarioError> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Workspace::build(file)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Workspace, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Invalid(format!("read {}: {e}", path.display())))?;
        Workspace::from_json(&text)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = ScenarioFile {
            dimension: self.dimension,
            bounds: ShapeSpec::from_shape(
                &Shape::Box {
                    min: self.bounds_min,
                    max: self.bounds_max,
                },
                self.dimension,
            ),
            init: self.init.coords(self.dimension),
            regions: self
                .regions
                .iter()
                .map(|(atom, shape)| RegionSpec {
                    label: self.ap.name(*atom).to_string(),
                    shape: ShapeSpec::from_shape(shape, self.dimension),
                })
                .collect(),
            obstacles: self
                .obstacles
                .iter()
                .map(|s| ShapeSpec::from_shape(s, self.dimension))
                .collect(),
            ap: self.ap.names().to_vec(),
            obstacle_label: self.obstacle_atom.map(|i| self.ap.name(i).to_string()),
        };
        serde_json::to_value(file).expect("scenario serializes")
    }

    fn build(file: ScenarioFile) -> Result<Workspace, ScenarioError> {
        if file.dimension != 2 && file.dimension != 3 {
            return Err(ScenarioError::Invalid(format!(
                "dimension must be 2 or 3, got {}",
                file.dimension
            )));
        }
        let dimension = file.dimension;
        let bounds = file.bounds.to_shape(dimension)?;
        let Shape::Box { min, max } = bounds else {
            return Err(ScenarioError::Invalid(
                "bounds must be an axis-aligned box".to_string(),
            ));
        };
        if file.init.len() != dimension {
            return Err(ScenarioError::Invalid(format!(
                "init must have {dimension} coordinates, got {}",
                file.init.len()
            )));
        }
        let ap = ApSet::new(file.ap.clone());
        let obstacle_atom = match &file.obstacle_label {
            Some(name) => Some(ap.index_of(name).ok_or_else(|| {
                ScenarioError::Invalid(format!(
                    "obstacle label {name:?} is not a declared proposition"
                ))
            })?),
            None => ap.index_of("O"),
        };
        let mut regions = Vec::new();
        for r in &file.regions {
            let atom = ap.index_of(&r.label).ok_or_else(|| {
                ScenarioError::Invalid(format!(
                    "region label {:?} is not a declared proposition",
                    r.label
                ))
            })?;
            let shape = r.shape.to_shape(dimension)?;
            regions.push((atom, shape));
        }
        let mut obstacles = Vec::new();
        for o in &file.obstacles {
            obstacles.push(o.to_shape(dimension)?);
        }
        let ws = Workspace {
            dimension,
            bounds_min: min,
            bounds_max: max,
            init: Point::from_coords(&file.init),
            regions,
            obstacles,
            ap,
            obstacle_atom,
        };
        if !ws.in_bounds(ws.init) {
            return Err(ScenarioError::Invalid(
                "initial position lies outside the bounds".to_string(),
            ));
        }
        for (atom, shape) in &ws.regions {
            if !ws.shape_in_bounds(shape) {
                return Err(ScenarioError::Invalid(format!(
                    "region {:?} extends outside the bounds",
                    ws.ap.name(*atom)
                )));
            }
        }
        Ok(ws)
    }

    fn shape_in_bounds(&self, shape: &Shape) -> bool {
        match shape {
            Shape::Box { min, max } => self.in_bounds(*min) && self.in_bounds(*max),
            Shape::Ball { center, radius } => (0..self.dimension).all(|i| {
                center.0[i] - radius >= self.bounds_min.0[i]
                    && center.0[i] + radius <= self.bounds_max.0[i]
            }),
        }
    }
}

/// Builder used by scenario generators; validates on `build`.
pub struct WorkspaceBuilder {
    dimension: usize,
    bounds: (Vec<f64>, Vec<f64>),
    init: Vec<f64>,
    regions: Vec<(String, ShapeSpec)>,
    obstacles: Vec<ShapeSpec>,
    ap: Vec<String>,
    obstacle_label: Option<String>,
}

impl WorkspaceBuilder {
    pub fn new(dimension: usize, min: &[f64], max: &[f64]) -> WorkspaceBuilder {
        WorkspaceBuilder {
            dimension,
            bounds: (min.to_vec(), max.to_vec()),
            init: vec![0.0; dimension],
            regions: Vec::new(),
            obstacles: Vec::new(),
            ap: Vec::new(),
            obstacle_label: None,
        }
    }

    pub fn init(mut self, coords: &[f64]) -> Self {
        self.init = coords.to_vec();
        self
    }

    pub fn atom(mut self, name: &str) -> Self {
        self.ap.push(name.to_string());
        self
    }

    pub fn obstacle_label(mut self, name: &str) -> Self {
        if !self.ap.iter().any(|a| a == name) {
            self.ap.push(name.to_string());
        }
        self.obstacle_label = Some(name.to_string());
        self
    }

    pub fn region_box(mut self, label: &str, min: &[f64], max: &[f64]) -> Self {
        if !self.ap.iter().any(|a| a == label) {
            self.ap.push(label.to_string());
        }
        self.regions.push((
            label.to_string(),
            ShapeSpec {
                kind: "box".into(),
                min: Some(min.to_vec()),
                max: Some(max.to_vec()),
                center: None,
                radius: None,
            },
        ));
        self
    }

    pub fn region_ball(mut self, label: &str, center: &[f64], radius: f64) -> Self {
        if !self.ap.iter().any(|a| a == label) {
            self.ap.push(label.to_string());
        }
        self.regions.push((
            label.to_string(),
            ShapeSpec {
                kind: "ball".into(),
                min: None,
                max: None,
                center: Some(center.to_vec()),
                radius: Some(radius),
            },
        ));
        self
    }

    pub fn obstacle_box(mut self, min: &[f64], max: &[f64]) -> Self {
        self.obstacles.push(ShapeSpec {
            kind: "box".into(),
            min: Some(min.to_vec()),
            max: Some(max.to_vec()),
            center: None,
            radius: None,
        });
        self
    }

    pub fn obstacle_ball(mut self, center: &[f64], radius: f64) -> Self {
        self.obstacles.push(ShapeSpec {
            kind: "ball".into(),
            min: None,
            max: None,
            center: Some(center.to_vec()),
            radius: Some(radius),
        });
        self
    }

    pub fn build(self) -> Result<Workspace, ScenarioError> {
        let file = ScenarioFile {
            dimension: self.dimension,
            bounds: ShapeSpec {
                kind: "box".into(),
                min: Some(self.bounds.0),
                max: Some(self.bounds.1),
                center: None,
                radius: None,
            },
            init: self.init,
            regions: self
                .regions
                .into_iter()
                .map(|(label, shape)| RegionSpec { label, shape })
                .collect(),
            obstacles: self.obstacles,
            ap: self.ap,
            obstacle_label: self.obstacle_label,
        };
        Workspace::build(file)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioFile {
    dimension: usize,
    bounds: ShapeSpec,
    init: Vec<f64>,
    #[serde(default)]
    regions: Vec<RegionSpec>,
    #[serde(default)]
    obstacles: Vec<ShapeSpec>,
    ap: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    obstacle_label: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RegionSpec {
    label: String,
    shape: ShapeSpec,
}

#[derive(Debug, Serialize, Deserialize)]
struct ShapeSpec {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
}

impl ShapeSpec {
    fn to_shape(&self, dimension: usize) -> Result<Shape, ScenarioError> {
        let coords = |v: &Option<Vec<f64>>, field: &str| -> Result<Point, ScenarioError> {
            let v = v.as_ref().ok_or_else(|| {
                ScenarioError::Invalid(format!("{} shape needs {field}", self.kind))
            })?;
            if v.len() != dimension {
                return Err(ScenarioError::Invalid(format!(
                    "{field} must have {dimension} coordinates, got {}",
                    v.len()
                )));
            }
            Ok(Point::from_coords(v))
        };
        let shape = match self.kind.as_str() {
            "box" => Shape::Box {
                min: coords(&self.min, "min")?,
                max: coords(&self.max, "max")?,
            },
            "ball" => Shape::Ball {
                center: coords(&self.center, "center")?,
                radius: self.radius.ok_or_else(|| {
                    ScenarioError::Invalid("ball shape needs radius".to_string())
                })?,
            },
            other => {
                return Err(ScenarioError::Invalid(format!(
                    "unknown shape type {other:?} (expected box or ball)"
                )))
            }
        };
        shape.validate(dimension)?;
        Ok(shape)
    }

    fn from_shape(shape: &Shape, dimension: usize) -> ShapeSpec {
        match shape {
            Shape::Box { min, max } => ShapeSpec {
                kind: "box".into(),
                min: Some(min.coords(dimension)),
                max: Some(max.coords(dimension)),
                center: None,
                radius: None,
            },
            Shape::Ball { center, radius } => ShapeSpec {
                kind: "ball".into(),
                min: None,
                max: None,
                center: Some(center.coords(dimension)),
                radius: Some(*radius),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn demo_workspace() -> Workspace {
        WorkspaceBuilder::new(2, &[0.0, 0.0], &[10.0, 10.0])
            .init(&[1.0, 1.0])
            .atom("G1")
            .atom("G2")
            .obstacle_label("O")
            .region_box("G1", &[7.0, 1.0], &[9.0, 3.0])
            .region_ball("G2", &[5.0, 8.0], 1.0)
            .obstacle_box(&[4.0, 0.0], &[5.0, 6.0])
            .build()
            .unwrap()
    }

    #[test]
    fn labels_union_over_shapes() {
        let ws = demo_workspace();
        let ap = ws.ap();
        assert_eq!(
            ws.label_of(Point::new2(8.0, 2.0)).unwrap(),
            ap.symbol(&["G1"])
        );
        assert_eq!(ws.label_of(Point::new2(2.0, 2.0)).unwrap(), Symbol::EMPTY);
        assert_eq!(
            ws.label_of(Point::new2(4.5, 3.0)).unwrap(),
            ap.symbol(&["O"])
        );
        // region overlapping an obstacle yields the union
        let ws2 = WorkspaceBuilder::new(2, &[0.0, 0.0], &[10.0, 10.0])
            .init(&[9.0, 9.0])
            .obstacle_label("O")
            .region_box("G1", &[1.0, 1.0], &[3.0, 3.0])
            .obstacle_box(&[2.0, 2.0], &[4.0, 4.0])
            .build()
            .unwrap();
        assert_eq!(
            ws2.label_of(Point::new2(2.5, 2.5)).unwrap(),
            ws2.ap().symbol(&["G1", "O"])
        );
    }

    #[test]
    fn label_of_rejects_out_of_bounds() {
        let ws = demo_workspace();
        assert!(ws.label_of(Point::new2(-1.0, 5.0)).is_err());
        assert!(ws.label_of(Point::new2(5.0, 11.0)).is_err());
    }

    #[test]
    fn boundary_contact_counts_as_membership() {
        let ws = demo_workspace();
        let ap = ws.ap();
        // box edge
        assert_eq!(
            ws.label_of(Point::new2(7.0, 1.0)).unwrap(),
            ap.symbol(&["G1"])
        );
        // ball surface
        assert_eq!(
            ws.label_of(Point::new2(5.0, 7.0)).unwrap(),
            ap.symbol(&["G2"])
        );
    }

    #[test]
    fn segment_collision_cases() {
        let ws = demo_workspace();
        assert!(ws.segment_collision_free(Point::new2(1.0, 8.0), Point::new2(3.0, 9.0)));
        // straight through the obstacle box
        assert!(!ws.segment_collision_free(Point::new2(3.0, 3.0), Point::new2(6.0, 3.0)));
        // endpoint exactly on the obstacle boundary
        assert!(!ws.segment_collision_free(Point::new2(3.0, 3.0), Point::new2(4.0, 3.0)));
        // passes above the obstacle
        assert!(ws.segment_collision_free(Point::new2(3.0, 7.0), Point::new2(6.0, 7.0)));
    }

    #[test]
    fn segment_ball_tests_are_exact() {
        let ws = WorkspaceBuilder::new(2, &[0.0, 0.0], &[10.0, 10.0])
            .init(&[1.0, 1.0])
            .obstacle_ball(&[5.0, 5.0], 1.0)
            .build()
            .unwrap();
        assert!(!ws.segment_collision_free(Point::new2(0.0, 5.0), Point::new2(10.0, 5.0)));
        // tangent line touches the closed ball
        assert!(!ws.segment_collision_free(Point::new2(0.0, 4.0), Point::new2(10.0, 4.0)));
        assert!(ws.segment_collision_free(Point::new2(0.0, 3.9), Point::new2(10.0, 3.9)));
        // short segment ending before the ball
        assert!(ws.segment_collision_free(Point::new2(0.0, 5.0), Point::new2(3.0, 5.0)));
    }

    #[test]
    fn gwts_transition_checks_distance_and_collision() {
        let ws = demo_workspace();
        let eta = 2.0;
        assert!(ws.gwts_transition(Point::new2(1.0, 8.0), Point::new2(2.0, 8.0), eta));
        assert!(!ws.gwts_transition(Point::new2(1.0, 8.0), Point::new2(1.0, 4.0), eta));
        assert!(!ws.gwts_transition(Point::new2(3.5, 3.0), Point::new2(5.5, 3.0), eta));
    }

    #[test]
    fn scenario_round_trips_through_json() {
        let ws = demo_workspace();
        let text = serde_json::to_string_pretty(&ws.to_json()).unwrap();
        let back = Workspace::from_json(&text).unwrap();
        assert_eq!(back.dimension(), ws.dimension());
        assert_eq!(back.ap(), ws.ap());
        assert_eq!(back.obstacle_atom(), ws.obstacle_atom());
        assert_eq!(back.init(), ws.init());
        assert_eq!(back.obstacles(), ws.obstacles());
        for p in [
            Point::new2(8.0, 2.0),
            Point::new2(4.5, 3.0),
            Point::new2(5.0, 8.0),
            Point::new2(0.1, 9.9),
        ] {
            assert_eq!(back.label_of(p).unwrap(), ws.label_of(p).unwrap());
        }
    }

    #[test]
    fn parse_errors_report_location() {
        let err = Workspace::from_json("{ \"dimension\": 2, ").unwrap_err();
        match err {
            ScenarioError::Parse { line, column, .. } => {
                assert!(line >= 1);
                assert!(column >= 1);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_geometry_rejected() {
        let bad_box = WorkspaceBuilder::new(2, &[0.0, 0.0], &[10.0, 10.0])
            .init(&[1.0, 1.0])
            .region_box("G1", &[3.0, 3.0], &[2.0, 4.0])
            .build();
        assert!(bad_box.is_err());
        let out_region = WorkspaceBuilder::new(2, &[0.0, 0.0], &[10.0, 10.0])
            .init(&[1.0, 1.0])
            .region_ball("G1", &[9.5, 9.5], 1.0)
            .build();
        assert!(out_region.is_err());
        let out_init = WorkspaceBuilder::new(2, &[0.0, 0.0], &[10.0, 10.0])
            .init(&[11.0, 1.0])
            .build();
        assert!(out_init.is_err());
    }

    proptest! {
        #[test]
        fn segment_tests_are_symmetric(
            ax in 0.0f64..10.0, ay in 0.0f64..10.0,
            bx in 0.0f64..10.0, by in 0.0f64..10.0,
        ) {
            let ws = demo_workspace();
            let a = Point::new2(ax, ay);
            let b = Point::new2(bx, by);
            prop_assert_eq!(
                ws.segment_collision_free(a, b),
                ws.segment_collision_free(b, a)
            );
        }

        #[test]
        fn labels_match_bruteforce_membership(
            x in 0.0f64..10.0, y in 0.0f64..10.0,
        ) {
            let ws = demo_workspace();
            let p = Point::new2(x, y);
            let sym = ws.label_of(p).unwrap();
            for (atom, shape) in ws.regions() {
                prop_assert_eq!(sym.contains(atom), shape.contains(p));
            }
            let o = ws.obstacle_atom().unwrap();
            prop_assert_eq!(sym.contains(o), ws.point_in_obstacle(p));
        }
    }

    #[test]
    fn exact_segment_tests_agree_with_dense_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ws = demo_workspace();
        let eta = 1.0;
        for _ in 0..10_000 {
            let a = ws.sample_bounds(&mut rng);
            let dir = Point::new2(
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
            );
            let n = dir.norm();
            if n == 0.0 {
                continue;
            }
            let b = a.add(dir.scale(rng.random_range(0.0..=eta) / n));
            if !ws.in_bounds(b) {
                continue;
            }
            let exact_free = ws.segment_collision_free(a, b);
            let mut sampled_hit = false;
            for k in 0..=1000 {
                let p = a.lerp(b, k as f64 / 1000.0);
                if ws.point_in_obstacle(p) {
                    sampled_hit = true;
                    break;
                }
            }
            // a sampled hit point lies on the segment, so the exact test
            // must see it; the converse can miss only sub-resolution grazes
            if sampled_hit {
                assert!(!exact_free, "sampling found a hit the exact test missed");
            }
            assert_eq!(
                !exact_free, sampled_hit,
                "disagreement for segment {a:?} -> {b:?}"
            );
        }
    }
}
