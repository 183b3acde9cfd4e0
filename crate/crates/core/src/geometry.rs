//! Array layouts, point and far-field sources, and angle conventions.
//!
//! Coordinates are meters with `z` along boresight, `x` horizontal and `y`
//! vertical. Azimuth is measured from boresight in the xz-plane (positive
//! toward +x) and elevation is measured toward +y, so a direction has
//! direction cosines `u = sin(az)·cos(el)`, `v = sin(el)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn sub(&self, other: &Vec3) -> Vec3 {
        Vec3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn add(&self, other: &Vec3) -> Vec3 {
        Vec3::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    pub fn scale(&self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    Linear,
    Planar,
}

/// Order in which comb tones are handed out along a linear aperture,
/// counted from the element at the low-x edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TuningOrder {
    #[default]
    Ascending,
    Descending,
}

/// A uniformly spaced linear or rectangular aperture in the xy-plane.
///
/// Element `(m, n)` sits at `origin + (m·dx, n·dy, 0)`; `m` runs along x and
/// `n` along y. Linear arrays have `n = 1` and lie on the x-axis through the
/// origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub kind: ArrayKind,
    pub m: usize,
    pub n: usize,
    pub dx: f64,
    pub dy: f64,
    pub origin: Vec3,
    pub tuning_order: TuningOrder,
}

impl ArrayGeometry {
    pub fn linear(m: usize, dx: f64) -> Result<Self> {
        let geom = Self {
            kind: ArrayKind::Linear,
            m,
            n: 1,
            dx,
            dy: 0.0,
            origin: Vec3::ZERO,
            tuning_order: TuningOrder::Ascending,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn planar(m: usize, n: usize, dx: f64, dy: f64) -> Result<Self> {
        let geom =
            Self { kind: ArrayKind::Planar, m, n, dx, dy, origin: Vec3::ZERO, tuning_order: TuningOrder::Ascending };
        geom.validate()?;
        Ok(geom)
    }

    pub fn with_origin(mut self, origin: Vec3) -> Self {
        self.origin = origin;
        self
    }

    pub fn with_tuning_order(mut self, order: TuningOrder) -> Self {
        self.tuning_order = order;
        self
    }

    /// Moves the origin so the element centroid sits at `(0, 0, 0)`.
    pub fn centered(mut self) -> Self {
        let half_x = 0.5 * (self.m as f64 - 1.0) * self.dx;
        let half_y = match self.kind {
            ArrayKind::Linear => 0.0,
            ArrayKind::Planar => 0.5 * (self.n as f64 - 1.0) * self.dy,
        };
        self.origin = Vec3::new(-half_x, -half_y, 0.0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidGeometry(format!(
                "element counts must be >= 1 (m = {}, n = {})",
                self.m, self.n
            )));
        }
        if !(self.dx.is_finite() && self.dx > 0.0) {
            return Err(Error::InvalidGeometry(format!("dx must be > 0, got {}", self.dx)));
        }
        if !self.origin.is_finite() {
            return Err(Error::InvalidGeometry("origin must be finite".into()));
        }
        match self.kind {
            ArrayKind::Linear if self.n != 1 => {
                Err(Error::InvalidGeometry(format!("linear arrays have n = 1, got {}", self.n)))
            }
            ArrayKind::Planar if !(self.dy.is_finite() && self.dy > 0.0) => {
                Err(Error::InvalidGeometry(format!("dy must be > 0 for planar arrays, got {}", self.dy)))
            }
            _ => Ok(()),
        }
    }

    pub fn num_elements(&self) -> usize {
        self.m * self.n
    }

    /// Flat index of element `(m, n)`; `m` is the outer (slow) index.
    pub fn element_index(&self, m: usize, n: usize) -> usize {
        m * self.n + n
    }

    /// Element positions, `m`-major (`(0,0), (0,1), …, (1,0), …`).
    pub fn element_positions(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.num_elements());
        for m in 0..self.m {
            for n in 0..self.n {
                out.push(self.element_position(m, n));
            }
        }
        out
    }

    pub fn element_position(&self, m: usize, n: usize) -> Vec3 {
        let dy = match self.kind {
            ArrayKind::Linear => 0.0,
            ArrayKind::Planar => self.dy,
        };
        self.origin.add(&Vec3::new(m as f64 * self.dx, n as f64 * dy, 0.0))
    }

    /// Largest physical dimension of the aperture (diagonal for planar).
    pub fn aperture_extent(&self) -> f64 {
        let lx = (self.m as f64 - 1.0) * self.dx;
        let ly = match self.kind {
            ArrayKind::Linear => 0.0,
            ArrayKind::Planar => (self.n as f64 - 1.0) * self.dy,
        };
        lx.hypot(ly)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    /// Point source at a finite position.
    Point(Vec3),
    /// Source at infinity in the direction with cosines `(u, v)`; the
    /// third cosine toward boresight is `√(1 − u² − v²)`.
    FarField { u: f64, v: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub placement: Placement,
    pub amplitude: f64,
    /// Initial phase, radians.
    pub phase: f64,
}

impl Source {
    pub fn point(position: Vec3) -> Self {
        Self { placement: Placement::Point(position), amplitude: 1.0, phase: 0.0 }
    }

    pub fn far_field(u: f64, v: f64) -> Result<Self> {
        let src = Self { placement: Placement::FarField { u, v }, amplitude: 1.0, phase: 0.0 };
        src.validate()?;
        Ok(src)
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::InvalidSource(format!("amplitude must be >= 0, got {}", self.amplitude)));
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidSource("phase must be finite".into()));
        }
        match self.placement {
            Placement::Point(p) if !p.is_finite() => Err(Error::InvalidSource("position must be finite".into())),
            Placement::FarField { u, v } => check_direction(u, v)
                .map_err(|_| Error::InvalidSource(format!("direction cosines outside the unit disk: ({u}, {v})"))),
            _ => Ok(()),
        }
    }

    /// Direction cosines `(u, v)` of the source as seen from the coordinate origin.
    pub fn direction(&self) -> (f64, f64) {
        match self.placement {
            Placement::Point(p) => direction_cosines(&p),
            Placement::FarField { u, v } => (u, v),
        }
    }

    pub fn azimuth_deg(&self) -> f64 {
        match self.placement {
            Placement::Point(p) => azimuth_deg(&p),
            Placement::FarField { u, v } => {
                let w = (1.0 - u * u - v * v).max(0.0).sqrt();
                u.atan2(w).to_degrees()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PropagationModel {
    /// Spherical phase fronts from the exact source-to-element distance.
    #[default]
    ExactSpherical,
    /// Every source is replaced by a plane wave from its direction.
    FarField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub sources: Vec<Source>,
    pub model: PropagationModel,
}

impl Scene {
    pub fn new(sources: Vec<Source>, model: PropagationModel) -> Result<Self> {
        let scene = Self { sources, model };
        scene.validate()?;
        Ok(scene)
    }

    pub fn single(source: Source) -> Result<Self> {
        Self::new(vec![source], PropagationModel::ExactSpherical)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::Empty("scene has no sources".into()));
        }
        self.sources.iter().try_for_each(Source::validate)
    }
}

pub fn distance(a: &Vec3, b: &Vec3) -> f64 {
    a.sub(b).norm()
}

pub(crate) fn check_direction(u: f64, v: f64) -> Result<()> {
    const SLACK: f64 = 1e-12;
    if !(u.is_finite() && v.is_finite())
        || u.abs() > 1.0 + SLACK
        || v.abs() > 1.0 + SLACK
        || u * u + v * v > 1.0 + SLACK
    {
        return Err(Error::AngleOutOfRange(format!("(u, v) = ({u}, {v}) is outside the unit disk")));
    }
    Ok(())
}

pub fn azimuth_elevation_to_uv(az_deg: f64, el_deg: f64) -> Result<(f64, f64)> {
    if !(az_deg.abs() <= 90.0 && el_deg.abs() <= 90.0) {
        return Err(Error::AngleOutOfRange(format!("azimuth {az_deg} / elevation {el_deg} deg must lie within ±90")));
    }
    let (az, el) = (az_deg.to_radians(), el_deg.to_radians());
    Ok((az.sin() * el.cos(), el.sin()))
}

/// Unit vector for an azimuth/elevation pair.
pub fn direction_vector(az_deg: f64, el_deg: f64) -> Vec3 {
    let (az, el) = (az_deg.to_radians(), el_deg.to_radians());
    Vec3::new(az.sin() * el.cos(), el.sin(), az.cos() * el.cos())
}

pub fn source_from_az_range(az_deg: f64, range: f64) -> Result<Source> {
    source_from_az_el_range(az_deg, 0.0, range)
}

pub fn source_from_az_el_range(az_deg: f64, el_deg: f64, range: f64) -> Result<Source> {
    if !(range.is_finite() && range > 0.0) {
        return Err(Error::InvalidSource(format!("range must be > 0, got {range}")));
    }
    if !(az_deg.abs() <= 90.0 && el_deg.abs() <= 90.0) {
        return Err(Error::AngleOutOfRange(format!("azimuth {az_deg} / elevation {el_deg} deg must lie within ±90")));
    }
    Ok(Source::point(direction_vector(az_deg, el_deg).scale(range)))
}

/// Azimuth of a position, degrees from boresight toward +x.
pub fn azimuth_deg(p: &Vec3) -> f64 {
    p.x.atan2(p.z).to_degrees()
}

pub fn elevation_deg(p: &Vec3) -> f64 {
    p.y.atan2(p.x.hypot(p.z)).to_degrees()
}

/// Direction cosines `(x/r, y/r)` of a position relative to the origin.
pub fn direction_cosines(p: &Vec3) -> (f64, f64) {
    let r = p.norm();
    if r == 0.0 {
        return (0.0, 0.0);
    }
    (p.x / r, p.y / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn linear_positions_on_x_axis() {
        let g = ArrayGeometry::linear(3, 0.5).unwrap();
        let p = g.element_positions();
        assert_eq!(p, vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.5, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)]);
    }

    #[test]
    fn planar_grid_points() {
        let g = ArrayGeometry::planar(2, 2, 1.0, 1.0).unwrap();
        let p = g.element_positions();
        assert_eq!(p.len(), 4);
        assert_eq!(p[g.element_index(1, 1)], Vec3::new(1.0, 1.0, 0.0));
        assert_eq!(p[g.element_index(0, 1)], Vec3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn last_element_of_reference_array() {
        let dx = crate::SPEED_OF_LIGHT / 19.005e9 / 2.0;
        let g = ArrayGeometry::linear(21, dx).unwrap();
        let last = *g.element_positions().last().unwrap();
        // 20 · c / (2 · 19.005 GHz), high-precision value
        assert!(close(last.x, 0.157_743_993, 1e-9), "{}", last.x);
    }

    #[test]
    fn geometry_validation() {
        assert!(ArrayGeometry::linear(0, 1.0).is_err());
        assert!(ArrayGeometry::linear(3, 0.0).is_err());
        assert!(ArrayGeometry::planar(3, 3, 1.0, -1.0).is_err());
        let mut g = ArrayGeometry::linear(3, 1.0).unwrap();
        g.n = 2;
        assert!(g.validate().is_err());
    }

    #[test]
    fn centered_array_has_zero_centroid() {
        let g = ArrayGeometry::planar(14, 14, 0.25, 0.25).unwrap().centered();
        let p = g.element_positions();
        let cx: f64 = p.iter().map(|e| e.x).sum::<f64>() / p.len() as f64;
        let cy: f64 = p.iter().map(|e| e.y).sum::<f64>() / p.len() as f64;
        assert!(cx.abs() < 1e-12 && cy.abs() < 1e-12);
    }

    #[test]
    fn distances() {
        let s = Vec3::new(-6.0, 0.0, 6.0);
        assert!(close(distance(&s, &Vec3::ZERO), 8.4853, 1e-4));
        assert_eq!(distance(&s, &s), 0.0);
        // sqrt(6.1577442^2 + 36) evaluated separately
        assert!(close(distance(&s, &Vec3::new(0.1577442, 0.0, 0.0)), 8.597_547_0, 1e-6));
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn az_el_to_uv() {
        assert_eq!(azimuth_elevation_to_uv(0.0, 0.0).unwrap(), (0.0, 0.0));
        let (u, v) = azimuth_elevation_to_uv(-45.0, 0.0).unwrap();
        assert!(close(u, -0.70711, 1e-5) && v == 0.0);
        let (u, v) = azimuth_elevation_to_uv(4.3, 63.4).unwrap();
        // sin(4.3°)·cos(63.4°) and sin(63.4°)
        assert!(close(u, 0.033_572_406, 1e-8), "{u}");
        assert!(close(v, 0.894_154_3, 1e-6), "{v}");
        assert!(azimuth_elevation_to_uv(91.0, 0.0).is_err());
        assert!(azimuth_elevation_to_uv(0.0, -90.5).is_err());
    }

    #[test]
    fn sources_from_azimuth_and_range() {
        let s = source_from_az_range(-45.0, 8.4853).unwrap();
        let Placement::Point(p) = s.placement else { panic!() };
        assert!(close(p.x, -6.0, 1e-3) && p.y == 0.0 && close(p.z, 6.0, 1e-3));
        let Placement::Point(p) = source_from_az_range(53.1, 25.0).unwrap().placement else { panic!() };
        assert!(close(p.x, 19.992_116, 1e-5) && close(p.z, 15.010_506, 1e-5), "{p:?}");
        let Placement::Point(p) = source_from_az_range(0.0, 1.0).unwrap().placement else { panic!() };
        assert_eq!(p, Vec3::new(0.0, 0.0, 1.0));
        assert!(source_from_az_range(10.0, 0.0).is_err());
        assert!(source_from_az_range(10.0, -2.0).is_err());
    }

    #[test]
    fn source_validation() {
        assert!(Source::far_field(0.8, 0.7).is_err());
        assert!(Source::far_field(0.6, 0.8).is_ok());
        assert!(Source::point(Vec3::ZERO).with_amplitude(-1.0).validate().is_err());
        assert!(Scene::new(vec![], PropagationModel::ExactSpherical).is_err());
    }

    fn vec3() -> impl Strategy<Value = Vec3> {
        (-100.0..100.0f64, -100.0..100.0f64, -100.0..100.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(a in vec3(), b in vec3(), c in vec3()) {
            let ab = distance(&a, &b);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, distance(&b, &a));
            prop_assert!(ab <= distance(&a, &c) + distance(&c, &b) + 1e-9);
            prop_assert_eq!(distance(&a, &a), 0.0);
        }

        #[test]
        fn azimuth_round_trip(az in -89.999..89.999f64, range in 1e-3..1e5f64) {
            let s = source_from_az_range(az, range).unwrap();
            prop_assert!((s.azimuth_deg() - az).abs() < 1e-9);
        }

        #[test]
        fn uv_inside_unit_disk(az in -90.0..=90.0f64, el in -90.0..=90.0f64) {
            let (u, v) = azimuth_elevation_to_uv(az, el).unwrap();
            prop_assert!(u * u + v * v <= 1.0 + 1e-12);
        }
    }
}
