//! Scalar density fields on regular grids: ingestion, synthesis, slicing,
//! smoothing, and normalization.
//!
//! A [`ScalarField`] is an immutable 2D or 3D array of samples with physical
//! spacing and origin. Grid lengths are in whatever unit the producing tool
//! used (ångström for solvent densities); nothing in this module converts
//! units. All integrals are trapezoidal on the grid — the only quadrature
//! rule used anywhere in the crate.
//!
//! Memory layout is row-major with the *last* axis fastest, i.e. a 3D field
//! stores `(ix, iy, iz)` at `(ix·ny + iy)·nz + iz`. This matches the OpenDX
//! convention ("z varies fastest"), so `.dx` payloads map 1:1 onto `values`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// On-disk representations understood by [`load_grid`] / [`save_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridFormat {
    /// Minimal OpenDX subset: axis-aligned `gridpositions`, one
    /// `data follows` array. 3D only.
    Dx,
    /// Our own JSON container: `{dims, shape, spacing, origin, values}`,
    /// values flattened row-major (last axis fastest).
    JsonGrid,
}

/// One isotropic Gaussian `A·(2πσ²)^{−d/2}·exp(−|r−µ|²/(2σ²))`.
///
/// With `amplitude` 1 the component integrates to exactly 1 over all of
/// `R^d`, which is what makes the L² expansion in [`crate::ising`] closed
/// form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    /// Mean µ, in grid physical coordinates; length = field dimension.
    pub center: Vec<f64>,
    /// Variance σ² (length²), shared by all axes.
    pub variance: f64,
    /// Positive scale A; 1 (the default) normalizes the component.
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl GaussianComponent {
    /// Unit-amplitude component.
    pub fn new(center: Vec<f64>, variance: f64) -> Self {
        Self {
            center,
            variance,
            amplitude: 1.0,
        }
    }

    /// Component with an explicit amplitude.
    pub fn with_amplitude(center: Vec<f64>, variance: f64, amplitude: f64) -> Self {
        Self {
            center,
            variance,
            amplitude,
        }
    }

    fn validate(&self, dims: usize) -> Result<()> {
        if self.center.len() != dims {
            return Err(Error::Grid(format!(
                "component center has {} coordinates, grid has {} axes",
                self.center.len(),
                dims
            )));
        }
        if !(self.variance > 0.0) {
            return Err(Error::Grid(format!(
                "component variance must be positive, got {}",
                self.variance
            )));
        }
        if !(self.amplitude > 0.0) {
            return Err(Error::Grid(format!(
                "component amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }

    /// Density value at `point` (length must equal the component dimension).
    pub fn density_at(&self, point: &[f64]) -> f64 {
        let d = self.center.len();
        debug_assert_eq!(point.len(), d);
        let norm = (2.0 * std::f64::consts::PI * self.variance).powf(-(d as f64) / 2.0);
        let r2: f64 = point
            .iter()
            .zip(&self.center)
            .map(|(p, c)| (p - c) * (p - c))
            .sum();
        self.amplitude * norm * (-r2 / (2.0 * self.variance)).exp()
    }
}

/// Grid geometry without values — the "template" for synthesizing fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Points per axis (each ≥ 2 so the trapezoidal rule has support).
    pub shape: Vec<usize>,
    /// Grid step per axis, strictly positive.
    pub spacing: Vec<f64>,
    /// Physical coordinate of grid point (0, …, 0).
    pub origin: Vec<f64>,
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        let dims = self.shape.len();
        if dims != 2 && dims != 3 {
            return Err(Error::Grid(format!("grids must be 2D or 3D, got {dims}D")));
        }
        if self.spacing.len() != dims || self.origin.len() != dims {
            return Err(Error::Grid(format!(
                "shape/spacing/origin lengths disagree: {}/{}/{}",
                dims,
                self.spacing.len(),
                self.origin.len()
            )));
        }
        for (axis, &n) in self.shape.iter().enumerate() {
            if n < 2 {
                return Err(Error::Grid(format!(
                    "axis {axis} has {n} points; every axis needs at least 2"
                )));
            }
        }
        for (axis, &s) in self.spacing.iter().enumerate() {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Grid(format!(
                    "axis {axis} spacing must be positive and finite, got {s}"
                )));
            }
        }
        Ok(())
    }

    fn len(&self) -> usize {
        self.shape.iter().product()
    }

    /// Upper corner of the bounding box (position of the last grid point).
    pub fn upper(&self) -> Vec<f64> {
        self.shape
            .iter()
            .zip(&self.spacing)
            .zip(&self.origin)
            .map(|((&n, &s), &o)| o + (n - 1) as f64 * s)
            .collect()
    }

    fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.shape.len()
            && point
                .iter()
                .zip(&self.origin)
                .zip(self.upper())
                .all(|((&p, &lo), hi)| p >= lo && p <= hi)
    }
}

/// Rigid frame tying a 2D slice back to the 3D volume it was cut from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceFrame {
    /// 3D position of the slice's 2D origin.
    pub origin: [f64; 3],
    /// In-plane unit vector carrying the 2D x axis.
    pub ax1: [f64; 3],
    /// In-plane unit vector carrying the 2D y axis.
    pub ax2: [f64; 3],
}

impl SliceFrame {
    /// Lift an in-plane physical coordinate to 3D.
    pub fn lift(&self, p: [f64; 2]) -> [f64; 3] {
        [
            self.origin[0] + p[0] * self.ax1[0] + p[1] * self.ax2[0],
            self.origin[1] + p[0] * self.ax1[1] + p[1] * self.ax2[1],
            self.origin[2] + p[0] * self.ax1[2] + p[1] * self.ax2[2],
        ]
    }
}

/// Plane selection for [`slice_volume`]: an origin, two orthonormal in-plane
/// axes, and the 2D sampling raster laid out along them.
///
/// Slices `k = 0, …, n−1` are translated by `k·spacing` along
/// `normal = ax1 × ax2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicePlane {
    /// 3D position sampled by 2D grid point (0, 0) of slice 0.
    pub origin: [f64; 3],
    /// First in-plane axis (unit length).
    pub ax1: [f64; 3],
    /// Second in-plane axis (unit length, orthogonal to `ax1`).
    pub ax2: [f64; 3],
    /// 2D raster points along (ax1, ax2).
    pub shape: [usize; 2],
    /// 2D raster step along (ax1, ax2).
    pub spacing: [f64; 2],
}

impl SlicePlane {
    fn validate(&self) -> Result<()> {
        let n1 = dot3(self.ax1, self.ax1).sqrt();
        let n2 = dot3(self.ax2, self.ax2).sqrt();
        if (n1 - 1.0).abs() > 1e-6 || (n2 - 1.0).abs() > 1e-6 {
            return Err(Error::Grid(format!(
                "slice plane axes must be unit length (|ax1| = {n1}, |ax2| = {n2})"
            )));
        }
        let d = dot3(self.ax1, self.ax2);
        if d.abs() > 1e-6 {
            return Err(Error::Grid(format!(
                "slice plane axes must be orthogonal (ax1·ax2 = {d})"
            )));
        }
        if self.shape[0] < 2 || self.shape[1] < 2 {
            return Err(Error::Grid(
                "slice raster needs at least 2 points per axis".into(),
            ));
        }
        if !(self.spacing[0] > 0.0) || !(self.spacing[1] > 0.0) {
            return Err(Error::Grid("slice raster spacing must be positive".into()));
        }
        Ok(())
    }

    fn normal(&self) -> [f64; 3] {
        [
            self.ax1[1] * self.ax2[2] - self.ax1[2] * self.ax2[1],
            self.ax1[2] * self.ax2[0] - self.ax1[0] * self.ax2[2],
            self.ax1[0] * self.ax2[1] - self.ax1[1] * self.ax2[0],
        ]
    }
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Scalar density sampled on a regular, axis-aligned grid.
///
/// Construction validates the structural invariants (2 or 3 axes, ≥ 2 points
/// and positive spacing per axis, value count = product of the shape); the
/// struct is immutable afterwards — every operation returns a new field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct ScalarField {
    spec: GridSpec,
    values: Vec<f64>,
    frame: Option<SliceFrame>,
}

/// Wire form of [`ScalarField`] — the `json-grid` schema.
#[derive(Serialize, Deserialize)]
struct RawGrid {
    dims: usize,
    shape: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame: Option<SliceFrame>,
}

impl TryFrom<RawGrid> for ScalarField {
    type Error = Error;
    fn try_from(raw: RawGrid) -> Result<Self> {
        if raw.dims != raw.shape.len() {
            return Err(Error::Grid(format!(
                "dims field says {} but shape has {} axes",
                raw.dims,
                raw.shape.len()
            )));
        }
        let mut field = ScalarField::new(raw.shape, raw.spacing, raw.origin, raw.values)?;
        field.frame = raw.frame;
        Ok(field)
    }
}

impl From<ScalarField> for RawGrid {
    fn from(f: ScalarField) -> Self {
        RawGrid {
            dims: f.spec.shape.len(),
            shape: f.spec.shape,
            spacing: f.spec.spacing,
            origin: f.spec.origin,
            values: f.values,
            frame: f.frame,
        }
    }
}

impl ScalarField {
    /// Build a field, validating every structural invariant.
    pub fn new(
        shape: Vec<usize>,
        spacing: Vec<f64>,
        origin: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let spec = GridSpec {
            shape,
            spacing,
            origin,
        };
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::Grid(format!(
                "shape {:?} implies {} values, got {}",
                spec.shape,
                spec.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Grid(format!("non-finite value {bad} in grid")));
        }
        Ok(Self {
            spec,
            values,
            frame: None,
        })
    }

    /// Number of axes (2 or 3).
    pub fn dims(&self) -> usize {
        self.spec.shape.len()
    }

    /// Points per axis.
    pub fn shape(&self) -> &[usize] {
        &self.spec.shape
    }

    /// Grid step per axis.
    pub fn spacing(&self) -> &[f64] {
        &self.spec.spacing
    }

    /// Physical coordinate of grid point (0, …, 0).
    pub fn origin(&self) -> &[f64] {
        &self.spec.origin
    }

    /// Flat value storage, last axis fastest.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Geometry without the values.
    pub fn grid_spec(&self) -> GridSpec {
        self.spec.clone()
    }

    /// The 3D frame, when this field is a slice of a volume.
    pub fn frame(&self) -> Option<&SliceFrame> {
        self.frame.as_ref()
    }

    /// Attach a 3D frame (used by [`slice_volume`]; exposed for tests and
    /// hand-built slices).
    pub fn with_frame(mut self, frame: SliceFrame) -> Self {
        self.frame = Some(frame);
        self
    }

    /// Flat index of a multi-index.
    pub fn index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims());
        let mut flat = 0;
        for (a, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.spec.shape[a]);
            flat = flat * self.spec.shape[a] + i;
        }
        flat
    }

    /// Value at a multi-index.
    pub fn value(&self, idx: &[usize]) -> f64 {
        self.values[self.index(idx)]
    }

    /// Physical position of a multi-index, written into `out`.
    fn position_into(&self, idx: &[usize], out: &mut [f64]) {
        for a in 0..self.dims() {
            out[a] = self.spec.origin[a] + idx[a] as f64 * self.spec.spacing[a];
        }
    }

    /// Largest stored value.
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trapezoidal integral of `f(value, position)` over the grid.
    ///
    /// End points on each axis carry weight ½ — the plain trapezoidal rule in
    /// every dimension. This is the one quadrature used crate-wide.
    pub fn integrate(&self, mut f: impl FnMut(f64, &[f64]) -> f64) -> f64 {
        let dims = self.dims();
        let cell: f64 = self.spec.spacing.iter().product();
        let mut idx = [0usize; 3];
        let mut pos = [0.0f64; 3];
        let mut acc = 0.0;
        for (flat, &v) in self.values.iter().enumerate() {
            // Unravel the flat index (last axis fastest) and pick up the
            // trapezoid end-point weights as we go.
            let mut rem = flat;
            let mut w = 1.0;
            for a in (0..dims).rev() {
                let n = self.spec.shape[a];
                let i = rem % n;
                rem /= n;
                idx[a] = i;
                if i == 0 || i == n - 1 {
                    w *= 0.5;
                }
            }
            self.position_into(&idx[..dims], &mut pos[..dims]);
            acc += w * f(v, &pos[..dims]);
        }
        acc * cell
    }

    /// Trapezoidal integral of the field itself.
    pub fn integral(&self) -> f64 {
        self.integrate(|v, _| v)
    }

    /// Multilinear interpolation at a physical point; 0 outside the grid.
    pub fn interpolate(&self, point: &[f64]) -> f64 {
        let dims = self.dims();
        debug_assert_eq!(point.len(), dims);
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..dims {
            let u = (point[a] - self.spec.origin[a]) / self.spec.spacing[a];
            // Tiny tolerance so points that are on the boundary up to
            // rounding still count as inside.
            let n = self.spec.shape[a];
            if u < -1e-9 || u > (n - 1) as f64 + 1e-9 {
                return 0.0;
            }
            let clamped = u.clamp(0.0, (n - 1) as f64);
            let i = (clamped.floor() as usize).min(n - 2);
            base[a] = i;
            frac[a] = clamped - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << dims) {
            let mut w = 1.0;
            let mut idx = [0usize; 3];
            for a in 0..dims {
                if corner & (1 << a) != 0 {
                    w *= frac[a];
                    idx[a] = base[a] + 1;
                } else {
                    w *= 1.0 - frac[a];
                    idx[a] = base[a];
                }
            }
            if w != 0.0 {
                acc += w * self.value(&idx[..dims]);
            }
        }
        acc
    }

    /// Clamp negatives to zero, then rescale so the trapezoidal integral is
    /// exactly 1.
    ///
    /// Errors when the clamped field integrates to zero (nothing to
    /// normalize). Idempotent on already-normalized fields.
    pub fn normalize(&self) -> Result<ScalarField> {
        let clamped: Vec<f64> = self.values.iter().map(|&v| v.max(0.0)).collect();
        let mut out = self.clone();
        out.values = clamped;
        let integral = out.integral();
        if !(integral > 0.0) {
            return Err(Error::Grid(
                "field integrates to zero after clamping; cannot normalize".into(),
            ));
        }
        for v in &mut out.values {
            *v /= integral;
        }
        Ok(out)
    }

    /// Band-pass blob detector: Gaussian blur, 5-point Laplacian, negate,
    /// clamp at zero. 2D only; `sigma` is in grid cells.
    ///
    /// The negation turns density blobs into positive peaks and the clamp
    /// discards the surrounding negative ring, so the output is usable as a
    /// density again. Borders are reflect-padded; expect exact zeros for
    /// affine inputs only away from the border.
    pub fn log_smooth(&self, sigma: f64) -> Result<ScalarField> {
        if self.dims() != 2 {
            return Err(Error::Grid(format!(
                "blob filtering is 2D-only, got a {}D field",
                self.dims()
            )));
        }
        if !(sigma > 0.0) {
            return Err(Error::Grid(format!("sigma must be positive, got {sigma}")));
        }
        let (nx, ny) = (self.spec.shape[0], self.spec.shape[1]);

        // 1D kernel, normalized to sum exactly 1 so constants pass through.
        let radius = (4.0 * sigma).ceil() as isize;
        let mut kernel = Vec::with_capacity(2 * radius as usize + 1);
        for i in -radius..=radius {
            kernel.push((-((i * i) as f64) / (2.0 * sigma * sigma)).exp());
        }
        let ksum: f64 = kernel.iter().sum();
        for k in &mut kernel {
            *k /= ksum;
        }

        // scipy-style 'reflect' padding: (c b a | a b c | c b a).
        let reflect = |i: isize, n: usize| -> usize {
            let n = n as isize;
            let mut i = i;
            loop {
                if i < 0 {
                    i = -i - 1;
                } else if i >= n {
                    i = 2 * n - 1 - i;
                } else {
                    return i as usize;
                }
            }
        };

        // Separable blur.
        let at = |buf: &[f64], x: usize, y: usize| buf[x * ny + y];
        let mut pass_x = vec![0.0; nx * ny];
        for x in 0..nx {
            for y in 0..ny {
                let mut acc = 0.0;
                for (k, kw) in kernel.iter().enumerate() {
                    let xi = reflect(x as isize + k as isize - radius, nx);
                    acc += kw * at(&self.values, xi, y);
                }
                pass_x[x * ny + y] = acc;
            }
        }
        let mut blurred = vec![0.0; nx * ny];
        for x in 0..nx {
            for y in 0..ny {
                let mut acc = 0.0;
                for (k, kw) in kernel.iter().enumerate() {
                    let yi = reflect(y as isize + k as isize - radius, ny);
                    acc += kw * at(&pass_x, x, yi);
                }
                blurred[x * ny + y] = acc;
            }
        }

        // −Laplacian (5-point, unit grid step), clamped at 0.
        let mut out = self.clone();
        for x in 0..nx {
            for y in 0..ny {
                let xm = reflect(x as isize - 1, nx);
                let xp = reflect(x as isize + 1, nx);
                let ym = reflect(y as isize - 1, ny);
                let yp = reflect(y as isize + 1, ny);
                let lap = at(&blurred, xm, y)
                    + at(&blurred, xp, y)
                    + at(&blurred, x, ym)
                    + at(&blurred, x, yp)
                    - 4.0 * at(&blurred, x, y);
                out.values[x * ny + y] = (-lap).max(0.0);
            }
        }
        Ok(out)
    }
}

/// Sum of Gaussian components sampled on a template grid.
///
/// Every component center must lie inside the template's bounding box.
pub fn synthesize_mixture(
    components: &[GaussianComponent],
    template: &GridSpec,
) -> Result<ScalarField> {
    template.validate()?;
    if components.is_empty() {
        return Err(Error::Grid("mixture needs at least one component".into()));
    }
    let dims = template.shape.len();
    for (k, c) in components.iter().enumerate() {
        c.validate(dims)?;
        if !template.contains(&c.center) {
            return Err(Error::Grid(format!(
                "component {k} center {:?} is outside the grid box {:?}..{:?}",
                c.center,
                template.origin,
                template.upper()
            )));
        }
    }

    let mut values = vec![0.0; template.len()];
    let mut idx = [0usize; 3];
    let mut pos = [0.0f64; 3];
    for (flat, v) in values.iter_mut().enumerate() {
        let mut rem = flat;
        for a in (0..dims).rev() {
            idx[a] = rem % template.shape[a];
            rem /= template.shape[a];
        }
        for a in 0..dims {
            pos[a] = template.origin[a] + idx[a] as f64 * template.spacing[a];
        }
        *v = components
            .iter()
            .map(|c| c.density_at(&pos[..dims]))
            .sum();
    }
    ScalarField::new(
        template.shape.clone(),
        template.spacing.clone(),
        template.origin.clone(),
        values,
    )
}

/// Cut `n_slices` parallel 2D slices out of a 3D field.
///
/// Slice `k` samples the volume by trilinear interpolation on the plane
/// raster translated by `k·spacing` along the plane normal; points outside
/// the volume read 0. Each slice records its [`SliceFrame`] so placements can
/// be lifted back to 3D. Errors when the base plane lies entirely outside the
/// grid box.
pub fn slice_volume(
    field: &ScalarField,
    plane: &SlicePlane,
    n_slices: usize,
    spacing: f64,
) -> Result<Vec<ScalarField>> {
    if field.dims() != 3 {
        return Err(Error::Grid(format!(
            "slicing needs a 3D field, got {}D",
            field.dims()
        )));
    }
    plane.validate()?;
    if n_slices < 1 {
        return Err(Error::Grid("n_slices must be at least 1".into()));
    }
    if !(spacing > 0.0) {
        return Err(Error::Grid(format!(
            "slice spacing must be positive, got {spacing}"
        )));
    }

    let normal = plane.normal();
    let (nu, nv) = (plane.shape[0], plane.shape[1]);
    let (du, dv) = (plane.spacing[0], plane.spacing[1]);
    let mut slices = Vec::with_capacity(n_slices);
    let mut base_plane_touches_grid = false;
    for k in 0..n_slices {
        let offset = k as f64 * spacing;
        let origin3 = [
            plane.origin[0] + offset * normal[0],
            plane.origin[1] + offset * normal[1],
            plane.origin[2] + offset * normal[2],
        ];
        let mut values = vec![0.0; nu * nv];
        for iu in 0..nu {
            for iv in 0..nv {
                let (su, sv) = (iu as f64 * du, iv as f64 * dv);
                let p = [
                    origin3[0] + su * plane.ax1[0] + sv * plane.ax2[0],
                    origin3[1] + su * plane.ax1[1] + sv * plane.ax2[1],
                    origin3[2] + su * plane.ax1[2] + sv * plane.ax2[2],
                ];
                if k == 0 && field.spec.contains(&p) {
                    base_plane_touches_grid = true;
                }
                values[iu * nv + iv] = field.interpolate(&p);
            }
        }
        let slice = ScalarField::new(vec![nu, nv], vec![du, dv], vec![0.0, 0.0], values)?
            .with_frame(SliceFrame {
                origin: origin3,
                ax1: plane.ax1,
                ax2: plane.ax2,
            });
        slices.push(slice);
    }
    if !base_plane_touches_grid {
        return Err(Error::Grid(
            "slice plane lies entirely outside the grid box".into(),
        ));
    }
    Ok(slices)
}

/// Read a field from disk.
pub fn load_grid(path: impl AsRef<Path>, format: GridFormat) -> Result<ScalarField> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    match format {
        GridFormat::Dx => parse_dx(&text, &path.display().to_string()),
        GridFormat::JsonGrid => serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            msg: e.to_string(),
        }),
    }
}

/// Write a field to disk. Round-trips bit-exactly through either format
/// (floats are printed shortest-roundtrip).
pub fn save_grid(field: &ScalarField, path: impl AsRef<Path>, format: GridFormat) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        GridFormat::Dx => emit_dx(field)?,
        GridFormat::JsonGrid => {
            let mut s = serde_json::to_string_pretty(field).expect("grid serializes");
            s.push('\n');
            s
        }
    };
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.into(),
        line,
        msg: msg.into(),
    }
}

/// Minimal OpenDX reader: `gridpositions` + three axis-aligned `delta` lines
/// + one `data follows` array, z fastest. Anything else is an error with a
/// line number.
fn parse_dx(text: &str, path: &str) -> Result<ScalarField> {
    // (line_number, content) with comments and blanks skipped.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 8
        || toks[..5] != ["object", "1", "class", "gridpositions", "counts"]
    {
        return Err(parse_err(
            path,
            ln,
            "expected `object 1 class gridpositions counts nx ny nz`",
        ));
    }
    let mut shape = Vec::with_capacity(3);
    for t in &toks[5..8] {
        let n: usize = t
            .parse()
            .map_err(|_| parse_err(path, ln, format!("bad grid count `{t}`")))?;
        shape.push(n);
    }

    let (ln, origin_line) = lines
        .next()
        .ok_or_else(|| parse_err(path, ln, "missing origin line"))?;
    let toks: Vec<&str> = origin_line.split_whitespace().collect();
    if toks.len() != 4 || toks[0] != "origin" {
        return Err(parse_err(path, ln, "expected `origin x y z`"));
    }
    let mut origin = Vec::with_capacity(3);
    for t in &toks[1..4] {
        origin.push(
            t.parse::<f64>()
                .map_err(|_| parse_err(path, ln, format!("bad origin component `{t}`")))?,
        );
    }

    let mut spacing = vec![0.0; 3];
    let mut last_ln = ln;
    for axis in 0..3 {
        let (ln, delta_line) = lines
            .next()
            .ok_or_else(|| parse_err(path, last_ln, "missing delta line"))?;
        last_ln = ln;
        let toks: Vec<&str> = delta_line.split_whitespace().collect();
        if toks.len() != 4 || toks[0] != "delta" {
            return Err(parse_err(path, ln, "expected `delta dx dy dz`"));
        }
        let mut d = [0.0f64; 3];
        for (i, t) in toks[1..4].iter().enumerate() {
            d[i] = t
                .parse()
                .map_err(|_| parse_err(path, ln, format!("bad delta component `{t}`")))?;
        }
        for (i, &v) in d.iter().enumerate() {
            if i == axis {
                if !(v > 0.0) {
                    return Err(parse_err(
                        path,
                        ln,
                        format!("axis {axis} spacing must be positive, got {v}"),
                    ));
                }
                spacing[axis] = v;
            } else if v != 0.0 {
                return Err(parse_err(
                    path,
                    ln,
                    "only axis-aligned grids are supported (off-axis delta must be 0)",
                ));
            }
        }
    }

    // Optional `object 2 class gridconnections`, then the data array header.
    let (mut ln, mut line) = lines
        .next()
        .ok_or_else(|| parse_err(path, last_ln, "missing data array header"))?;
    if line.starts_with("object 2 class gridconnections") {
        let next = lines
            .next()
            .ok_or_else(|| parse_err(path, ln, "missing data array header"))?;
        ln = next.0;
        line = next.1;
    }
    if !(line.starts_with("object 3 class array") && line.contains("data follows")) {
        return Err(parse_err(
            path,
            ln,
            "expected `object 3 class array … data follows`",
        ));
    }

    let expected: usize = shape.iter().product();
    let mut values = Vec::with_capacity(expected);
    let mut data_done = false;
    let mut end_ln = ln;
    for (ln, line) in lines {
        if data_done {
            // Trailing metadata is tolerated; more numbers are not.
            if line.starts_with("attribute") || line.starts_with("object") {
                continue;
            }
            return Err(parse_err(path, ln, "unexpected content after data array"));
        }
        for t in line.split_whitespace() {
            if values.len() == expected {
                return Err(parse_err(
                    path,
                    ln,
                    format!("more than {expected} values for counts {shape:?}"),
                ));
            }
            values.push(
                t.parse::<f64>()
                    .map_err(|_| parse_err(path, ln, format!("bad value `{t}`")))?,
            );
        }
        end_ln = ln;
        if values.len() == expected {
            data_done = true;
        }
    }
    if values.len() != expected {
        return Err(parse_err(
            path,
            end_ln,
            format!(
                "counts {shape:?} require {expected} values, found {}",
                values.len()
            ),
        ));
    }
    ScalarField::new(shape, spacing, origin, values)
}

fn emit_dx(field: &ScalarField) -> Result<String> {
    if field.dims() != 3 {
        return Err(Error::Grid(format!(
            "dx output is 3D-only, field is {}D (use json-grid)",
            field.dims()
        )));
    }
    let [nx, ny, nz] = [field.shape()[0], field.shape()[1], field.shape()[2]];
    let sp = field.spacing();
    let or = field.origin();
    let mut s = String::new();
    let _ = writeln!(s, "object 1 class gridpositions counts {nx} {ny} {nz}");
    let _ = writeln!(s, "origin {} {} {}", or[0], or[1], or[2]);
    let _ = writeln!(s, "delta {} 0 0", sp[0]);
    let _ = writeln!(s, "delta 0 {} 0", sp[1]);
    let _ = writeln!(s, "delta 0 0 {}", sp[2]);
    let _ = writeln!(s, "object 2 class gridconnections counts {nx} {ny} {nz}");
    let _ = writeln!(
        s,
        "object 3 class array type double rank 0 items {} data follows",
        field.values().len()
    );
    for chunk in field.values().chunks(3) {
        let line: Vec<String> = chunk.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    Ok(s)
}
