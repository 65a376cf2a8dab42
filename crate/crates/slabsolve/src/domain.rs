//! Domain descriptions and finite-difference grids.
//!
//! Supported domains are intervals, axis-aligned boxes, balls (discretized
//! radially), and truncations of an infinite slab. Every domain knows its
//! slab diameter: the smallest width of a slab containing it, which is the
//! quantity controlling the maximum-principle constant.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Geometric description of a computational domain.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    /// Interval of the given width, centered at the origin.
    Interval { width: f64 },
    /// Axis-aligned box with the given widths, centered at the origin.
    Box { widths: Vec<f64> },
    /// Ball of the given radius in `ambient_dim` dimensions, centered at the
    /// origin. Discretized as a one-dimensional radial problem.
    RadialBall { radius: f64, ambient_dim: usize },
    /// Truncation of the slab of width `width`: the set
    /// `{ |x_n| < width/2 } ∩ [-(m+2), m+2]^n` for truncation index `m`.
    /// The first `n-1` axes are longitudinal, the last is transverse.
    SlabTruncation {
        width: f64,
        truncation: usize,
        dim: usize,
    },
}

impl DomainSpec {
    pub fn interval(width: f64) -> Result<Self> {
        let spec = DomainSpec::Interval { width };
        spec.validate()?;
        Ok(spec)
    }

    pub fn boxed(widths: Vec<f64>) -> Result<Self> {
        let spec = DomainSpec::Box { widths };
        spec.validate()?;
        Ok(spec)
    }

    pub fn radial_ball(radius: f64, ambient_dim: usize) -> Result<Self> {
        let spec = DomainSpec::RadialBall {
            radius,
            ambient_dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn slab_truncation(width: f64, truncation: usize, dim: usize) -> Result<Self> {
        let spec = DomainSpec::SlabTruncation {
            width,
            truncation,
            dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Interval { width } => {
                if !(*width > 0.0) {
                    return Err(Error::InvalidDomain(format!(
                        "interval width must be positive, got {width}"
                    )));
                }
            }
            DomainSpec::Box { widths } => {
                if widths.is_empty() {
                    return Err(Error::InvalidDomain("box needs at least one axis".into()));
                }
                for (k, w) in widths.iter().enumerate() {
                    if !(*w > 0.0) {
                        return Err(Error::InvalidDomain(format!(
                            "box width along axis {k} must be positive, got {w}"
                        )));
                    }
                }
            }
            DomainSpec::RadialBall {
                radius,
                ambient_dim,
            } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidDomain(format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
                if *ambient_dim < 1 {
                    return Err(Error::InvalidDomain("ball dimension must be >= 1".into()));
                }
            }
            DomainSpec::SlabTruncation { width, truncation, dim } => {
                if !(*width > 0.0) {
                    return Err(Error::InvalidDomain(format!(
                        "slab width must be positive, got {width}"
                    )));
                }
                if *dim < 2 {
                    return Err(Error::InvalidDomain(
                        "slab truncation needs dimension >= 2".into(),
                    ));
                }
                // The transverse direction must be the narrow one, otherwise
                // the truncation is a box whose slab diameter is not `width`.
                let cap = 2.0 * (*truncation as f64 + 2.0);
                if *width > cap {
                    return Err(Error::InvalidDomain(format!(
                        "slab width {width} exceeds truncation extent {cap}; \
                         the transverse axis must be the narrow one"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } => 1,
            DomainSpec::Box { widths } => widths.len(),
            DomainSpec::RadialBall { ambient_dim, .. } => *ambient_dim,
            DomainSpec::SlabTruncation { dim, .. } => *dim,
        }
    }
}

impl std::fmt::Display for DomainSpec {
    /// Compact single-token form used in config files:
    /// `interval(d)`, `box(w1,w2)`, `ball(R,n)`, `slab(d,m,n)`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DomainSpec::Interval { width } => write!(f, "interval({width})"),
            DomainSpec::Box { widths } => {
                let parts: Vec<String> = widths.iter().map(|w| format!("{w}")).collect();
                write!(f, "box({})", parts.join(","))
            }
            DomainSpec::RadialBall {
                radius,
                ambient_dim,
            } => write!(f, "ball({radius},{ambient_dim})"),
            DomainSpec::SlabTruncation {
                width,
                truncation,
                dim,
            } => write!(f, "slab({width},{truncation},{dim})"),
        }
    }
}

impl std::str::FromStr for DomainSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = s
            .split_once('(')
            .filter(|(_, rest)| rest.ends_with(')'))
            .ok_or_else(|| Error::InvalidDomain(format!("cannot parse domain `{s}`")))?;
        let args: Vec<&str> = rest[..rest.len() - 1].split(',').map(str::trim).collect();
        let num = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::InvalidDomain(format!("bad number `{v}` in `{s}`")))
        };
        let int = |v: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| Error::InvalidDomain(format!("bad integer `{v}` in `{s}`")))
        };
        match (name, args.len()) {
            ("interval", 1) => DomainSpec::interval(num(args[0])?),
            ("box", _) if !args.is_empty() => {
                DomainSpec::boxed(args.iter().map(|a| num(a)).collect::<Result<_>>()?)
            }
            ("ball", 2) => DomainSpec::radial_ball(num(args[0])?, int(args[1])?),
            ("slab", 3) => DomainSpec::slab_truncation(num(args[0])?, int(args[1])?, int(args[2])?),
            _ => Err(Error::InvalidDomain(format!("cannot parse domain `{s}`"))),
        }
    }
}

/// Slab diameter of a domain: the infimum width of a slab (region between
/// two parallel hyperplanes) containing it. Axis-aligned minimum for boxes,
/// the diameter for balls, the slab width for slab truncations.
pub fn slab_diameter(spec: &DomainSpec) -> f64 {
    match spec {
        DomainSpec::Interval { width } => *width,
        DomainSpec::Box { widths } => widths.iter().cloned().fold(f64::INFINITY, f64::min),
        DomainSpec::RadialBall { radius, .. } => 2.0 * radius,
        DomainSpec::SlabTruncation { width, .. } => *width,
    }
}

/// The nested family of slab truncations `m = 0..=m_max`, all sharing the
/// slab width `d`. Each member is contained in the next, and at fixed
/// resolution their grids align node for node on the shared region.
pub fn exhaustion_family(d: f64, dim: usize, m_max: usize) -> Result<Vec<DomainSpec>> {
    (0..=m_max)
        .map(|m| DomainSpec::slab_truncation(d, m, dim))
        .collect()
}

/// One axis of a tensor grid: nodes `lo + j*spacing` for `j = 0..=subintervals`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub spacing: f64,
    pub subintervals: usize,
}

impl Axis {
    pub fn interior_count(&self) -> usize {
        self.subintervals - 1
    }

    pub fn node(&self, j: usize) -> f64 {
        self.lo + j as f64 * self.spacing
    }
}

/// Discretized geometry of a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum GridGeometry {
    /// Radial reduction of a ball: nodes `r_i = i*spacing` on `[0, R]` with
    /// `R = subintervals * spacing`. Unknowns live at `i = 1..subintervals`;
    /// the origin is a symmetry node eliminated through the condition
    /// u'(0) = 0 and the boundary node at `r = R` carries the Dirichlet value.
    Radial {
        ambient_dim: usize,
        spacing: f64,
        subintervals: usize,
    },
    /// Tensor-product grid; the last axis varies fastest in field storage.
    Tensor { axes: Vec<Axis> },
}

/// A finite-difference grid over a domain, with uniform spacing per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: DomainSpec,
    geometry: GridGeometry,
}

impl Grid {
    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    /// Number of interior (unknown) nodes.
    pub fn interior_count(&self) -> usize {
        match &self.geometry {
            GridGeometry::Radial { subintervals, .. } => subintervals - 1,
            GridGeometry::Tensor { axes } => axes.iter().map(Axis::interior_count).product(),
        }
    }

    /// Number of boundary nodes (Dirichlet nodes, value 0).
    pub fn boundary_count(&self) -> usize {
        match &self.geometry {
            GridGeometry::Radial { .. } => 1,
            GridGeometry::Tensor { axes } => {
                let total: usize = axes.iter().map(|a| a.subintervals + 1).product();
                total - self.interior_count()
            }
        }
    }

    /// Smallest spacing over the axes.
    pub fn min_spacing(&self) -> f64 {
        match &self.geometry {
            GridGeometry::Radial { spacing, .. } => *spacing,
            GridGeometry::Tensor { axes } => {
                axes.iter().map(|a| a.spacing).fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Largest spacing over the axes.
    pub fn max_spacing(&self) -> f64 {
        match &self.geometry {
            GridGeometry::Radial { spacing, .. } => *spacing,
            GridGeometry::Tensor { axes } => axes.iter().map(|a| a.spacing).fold(0.0, f64::max),
        }
    }

    /// Interior node counts per axis (length 1 for radial grids).
    pub fn interior_shape(&self) -> Vec<usize> {
        match &self.geometry {
            GridGeometry::Radial { subintervals, .. } => vec![subintervals - 1],
            GridGeometry::Tensor { axes } => axes.iter().map(Axis::interior_count).collect(),
        }
    }

    /// Coordinates of interior node `k` (radial grids report the radius).
    pub fn interior_coords(&self, k: usize) -> Vec<f64> {
        match &self.geometry {
            GridGeometry::Radial { spacing, .. } => vec![(k + 1) as f64 * spacing],
            GridGeometry::Tensor { axes } => {
                let mut idx = k;
                let mut rev = Vec::with_capacity(axes.len());
                for axis in axes.iter().rev() {
                    let count = axis.interior_count();
                    rev.push(axis.node(idx % count + 1));
                    idx /= count;
                }
                rev.reverse();
                rev
            }
        }
    }

    /// Flat interior index from per-axis interior indices (0-based per axis).
    pub fn interior_index(&self, per_axis: &[usize]) -> usize {
        match &self.geometry {
            GridGeometry::Radial { .. } => per_axis[0],
            GridGeometry::Tensor { axes } => {
                let mut idx = 0;
                for (axis, &i) in axes.iter().zip(per_axis) {
                    debug_assert!(i < axis.interior_count());
                    idx = idx * axis.interior_count() + i;
                }
                idx
            }
        }
    }

    /// Evaluate a function of the coordinates at every interior node.
    pub fn evaluate<F>(self: &Arc<Self>, f: F) -> Field
    where
        F: Fn(&[f64]) -> f64,
    {
        let values = (0..self.interior_count())
            .map(|k| f(&self.interior_coords(k)))
            .collect();
        Field {
            grid: Arc::clone(self),
            values,
        }
    }
}

/// Build the finite-difference grid for a domain at the given resolution
/// (target nodes per unit length). Balls reduce to one-dimensional radial
/// grids; all other variants produce tensor grids. Axis subinterval counts
/// are rounded so the exact extents are preserved.
pub fn discretize(spec: &DomainSpec, resolution: u32) -> Result<Grid> {
    spec.validate()?;
    let res = resolution as f64;
    let subint = |extent: f64, axis: String| -> Result<usize> {
        let n = (extent * res).round() as usize;
        if n < 3 {
            return Err(Error::ResolutionTooCoarse {
                axis,
                extent,
                subintervals: n,
                required: 3,
            });
        }
        Ok(n)
    };
    let geometry = match spec {
        DomainSpec::Interval { width } => GridGeometry::Tensor {
            axes: vec![Axis {
                lo: -width / 2.0,
                spacing: width / subint(*width, "0".into())? as f64,
                subintervals: subint(*width, "0".into())?,
            }],
        },
        DomainSpec::Box { widths } => {
            if widths.len() > 2 {
                return Err(Error::Unsupported(format!(
                    "tensor grids are implemented in 1 and 2 dimensions, got {}",
                    widths.len()
                )));
            }
            let mut axes = Vec::with_capacity(widths.len());
            for (k, w) in widths.iter().enumerate() {
                let n = subint(*w, k.to_string())?;
                axes.push(Axis {
                    lo: -w / 2.0,
                    spacing: w / n as f64,
                    subintervals: n,
                });
            }
            GridGeometry::Tensor { axes }
        }
        DomainSpec::RadialBall {
            radius,
            ambient_dim,
        } => {
            let n = subint(*radius, "radial".into())?;
            GridGeometry::Radial {
                ambient_dim: *ambient_dim,
                spacing: radius / n as f64,
                subintervals: n,
            }
        }
        DomainSpec::SlabTruncation {
            width,
            truncation,
            dim,
        } => {
            if *dim != 2 {
                return Err(Error::Unsupported(format!(
                    "slab truncations are discretized in dimension 2, got {dim}"
                )));
            }
            // Longitudinal spacing is exactly 1/resolution so that the grids
            // of the whole exhaustion family align node for node.
            let half = *truncation as f64 + 2.0;
            let n_long = (2.0 * half * res).round() as usize;
            let n_trans = subint(*width, "transverse".into())?;
            GridGeometry::Tensor {
                axes: vec![
                    Axis {
                        lo: -half,
                        spacing: 1.0 / res,
                        subintervals: n_long,
                    },
                    Axis {
                        lo: -width / 2.0,
                        spacing: width / n_trans as f64,
                        subintervals: n_trans,
                    },
                ],
            }
        }
    };
    Ok(Grid {
        domain: spec.clone(),
        geometry,
    })
}

/// A grid function: one value per interior node. Boundary values are zero
/// under the Dirichlet condition.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.interior_count() {
            return Err(Error::InvalidDomain(format!(
                "field length {} does not match interior node count {}",
                values.len(),
                grid.interior_count()
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.interior_count();
        Field {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn constant(grid: Arc<Grid>, value: f64) -> Self {
        let n = grid.interior_count();
        Field {
            grid,
            values: vec![value; n],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    /// Pointwise map.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Field {
        Field {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// self - other, requiring a shared grid.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(Field {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// min over nodes of (self - other).
    pub fn min_difference(&self, other: &Field) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(f64::INFINITY, |m, (a, b)| m.min(a - b)))
    }

    /// sup norm of (self - other).
    pub fn sup_difference(&self, other: &Field) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slab_diameter_of_each_variant() {
        let b = DomainSpec::boxed(vec![3.0, 1.0]).unwrap();
        assert_eq!(slab_diameter(&b), 1.0);
        let ball = DomainSpec::radial_ball(1.0, 2).unwrap();
        assert_eq!(slab_diameter(&ball), 2.0);
        let d = 2.0 * 2.0_f64.sqrt();
        let slab = DomainSpec::slab_truncation(d, 5, 2).unwrap();
        assert_eq!(slab_diameter(&slab), d);
    }

    #[test]
    fn slab_diameter_monotone_in_box_widths() {
        let narrow = DomainSpec::boxed(vec![2.0, 0.5]).unwrap();
        let wider = DomainSpec::boxed(vec![2.0, 0.8]).unwrap();
        assert!(slab_diameter(&narrow) < slab_diameter(&wider));
    }

    #[test]
    fn interval_discretization_counts() {
        let spec = DomainSpec::interval(1.0).unwrap();
        let grid = discretize(&spec, 10).unwrap();
        assert_eq!(grid.interior_count(), 9);
        assert!((grid.min_spacing() - 0.1).abs() < 1e-15);
        assert_eq!(grid.boundary_count(), 2);
    }

    #[test]
    fn radial_discretization_counts() {
        let spec = DomainSpec::radial_ball(1.0, 3).unwrap();
        let grid = discretize(&spec, 100).unwrap();
        assert_eq!(grid.interior_count(), 99);
        assert!((grid.min_spacing() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn box_discretization_counts() {
        let spec = DomainSpec::boxed(vec![2.0, 1.0]).unwrap();
        let grid = discretize(&spec, 10).unwrap();
        assert_eq!(grid.interior_shape(), vec![19, 9]);
        assert_eq!(grid.interior_count(), 19 * 9);
    }

    #[test]
    fn coarse_resolution_names_the_narrow_axis() {
        let spec = DomainSpec::boxed(vec![4.0, 0.2]).unwrap();
        let err = discretize(&spec, 10).unwrap_err();
        match err {
            Error::ResolutionTooCoarse { axis, .. } => assert_eq!(axis, "1"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn grid_reproduces_extents() {
        let spec = DomainSpec::boxed(vec![2.0, 1.0]).unwrap();
        let grid = discretize(&spec, 8).unwrap();
        let mut max_x = [f64::NEG_INFINITY; 2];
        for k in 0..grid.interior_count() {
            let c = grid.interior_coords(k);
            max_x[0] = max_x[0].max(c[0]);
            max_x[1] = max_x[1].max(c[1]);
        }
        // interior nodes come within one spacing of each face
        assert!((max_x[0] - (1.0 - grid.max_spacing())).abs() < 1e-12);
        assert!(max_x[1] > 0.5 - 2.0 * grid.max_spacing());
    }

    #[test]
    fn exhaustion_family_nests() {
        let family = exhaustion_family(1.0, 2, 2).unwrap();
        assert_eq!(family.len(), 3);
        let halves: Vec<f64> = family
            .iter()
            .map(|s| match s {
                DomainSpec::SlabTruncation { truncation, .. } => *truncation as f64 + 2.0,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(halves, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn exhaustion_family_grids_share_transverse_axis() {
        let family = exhaustion_family(2.0 * 2.0_f64.sqrt(), 2, 3).unwrap();
        let grids: Vec<Grid> = family.iter().map(|s| discretize(s, 8).unwrap()).collect();
        let trans: Vec<Axis> = grids
            .iter()
            .map(|g| match g.geometry() {
                GridGeometry::Tensor { axes } => axes[1].clone(),
                _ => unreachable!(),
            })
            .collect();
        for t in &trans[1..] {
            assert_eq!(t, &trans[0]);
        }
    }

    #[test]
    fn invalid_domains_are_rejected() {
        assert!(DomainSpec::interval(0.0).is_err());
        assert!(DomainSpec::boxed(vec![1.0, -2.0]).is_err());
        assert!(DomainSpec::radial_ball(1.0, 0).is_err());
        // transverse axis must be the narrow one
        assert!(DomainSpec::slab_truncation(10.0, 0, 2).is_err());
    }

    #[test]
    fn domain_spec_round_trips_through_text() {
        let specs = [
            DomainSpec::interval(1.5).unwrap(),
            DomainSpec::boxed(vec![2.0, 1.0]).unwrap(),
            DomainSpec::radial_ball(1.0, 3).unwrap(),
            DomainSpec::slab_truncation(2.0 * 2.0_f64.sqrt(), 4, 2).unwrap(),
        ];
        for spec in specs {
            let text = spec.to_string();
            let parsed: DomainSpec = text.parse().unwrap();
            assert_eq!(parsed, spec, "round trip of `{text}`");
        }
        assert!("pyramid(1)".parse::<DomainSpec>().is_err());
        assert!("ball(1)".parse::<DomainSpec>().is_err());
    }

    #[test]
    fn field_length_is_checked() {
        let spec = DomainSpec::interval(1.0).unwrap();
        let grid = Arc::new(discretize(&spec, 10).unwrap());
        assert!(Field::new(Arc::clone(&grid), vec![0.0; 5]).is_err());
        assert!(Field::new(grid, vec![0.0; 9]).is_ok());
    }
}
