//! Rigid-body transforms, pinhole intrinsics and pixel projection.
//!
//! Conventions used throughout the crate:
//!
//! - Camera frame: x right, y down, z forward. Positive depth is along +z.
//! - Pixel `(row i, col j)` sits at continuous coordinate `(u, v) = (j, i)`.
//! - Euler angles compose as `R = Rz(rz) * Ry(ry) * Rx(rx)`.

use crate::error::{Error, Result};

/// Source-frame depth at or below this value marks a projection invalid.
pub const MIN_SOURCE_DEPTH: f64 = 1e-6;

/// Pinhole camera intrinsics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        let k = Intrinsics {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.fx, self.fy, self.cx, self.cy]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("intrinsics must be finite"));
        }
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(Error::invalid(format!(
                "focal lengths must be positive (fx={}, fy={})",
                self.fx, self.fy
            )));
        }
        if !(self.cx > 0.0 && self.cx < self.width as f64) {
            return Err(Error::invalid(format!(
                "cx={} outside (0, {})",
                self.cx, self.width
            )));
        }
        if !(self.cy > 0.0 && self.cy < self.height as f64) {
            return Err(Error::invalid(format!(
                "cy={} outside (0, {})",
                self.cy, self.height
            )));
        }
        Ok(())
    }

    /// Normalized viewing ray `K^-1 [u, v, 1]` (z component is 1).
    #[inline]
    pub fn unproject(&self, p: PixelCoord) -> [f64; 3] {
        [(p.u - self.cx) / self.fx, (p.v - self.cy) / self.fy, 1.0]
    }

    /// Intrinsics for pyramid `level`: focal lengths, principal point and
    /// image size all divided by `2^level`.
    pub fn scale(&self, level: usize) -> Result<Intrinsics> {
        if level == 0 {
            return Ok(*self);
        }
        if level >= usize::BITS as usize {
            return Err(Error::invalid(format!("pyramid level {level} too deep")));
        }
        let width = self.width >> level;
        let height = self.height >> level;
        if width < 2 || height < 2 {
            return Err(Error::invalid(format!(
                "level {level} would shrink {}x{} image to {}x{}",
                self.width, self.height, width, height
            )));
        }
        let factor = (1u64 << level) as f64;
        Ok(Intrinsics {
            fx: self.fx / factor,
            fy: self.fy / factor,
            cx: self.cx / factor,
            cy: self.cy / factor,
            width,
            height,
        })
    }
}

/// Same as [`Intrinsics::scale`].
pub fn scale_intrinsics(k: &Intrinsics, level: usize) -> Result<Intrinsics> {
    k.scale(level)
}

/// Continuous pixel coordinate, `u` along the width and `v` along the height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelCoord {
    pub u: f64,
    pub v: f64,
}

impl PixelCoord {
    pub fn new(u: f64, v: f64) -> Self {
        PixelCoord { u, v }
    }
}

/// Six-parameter pose: Euler angles (radians) then translation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoseParams {
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
    pub tx: f64,
    pub ty: f64,
    pub tz: f64,
}

impl PoseParams {
    pub fn new(rx: f64, ry: f64, rz: f64, tx: f64, ty: f64, tz: f64) -> Self {
        PoseParams {
            rx,
            ry,
            rz,
            tx,
            ty,
            tz,
        }
    }

    pub fn translation(tx: f64, ty: f64, tz: f64) -> Self {
        PoseParams {
            tx,
            ty,
            tz,
            ..Default::default()
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.rx, self.ry, self.rz, self.tx, self.ty, self.tz]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        PoseParams::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    pub fn rotation(&self) -> Mat3 {
        let (rz, ry, rx) = elemental(self.rx, self.ry, self.rz);
        mat3_mul(&mat3_mul(&rz, &ry), &rx)
    }

    /// Partial derivatives of the rotation matrix with respect to
    /// `(rx, ry, rz)`, in that order.
    pub fn rotation_derivatives(&self) -> [Mat3; 3] {
        let (rz, ry, rx) = elemental(self.rx, self.ry, self.rz);
        let (sa, ca) = self.rx.sin_cos();
        let (sb, cb) = self.ry.sin_cos();
        let (sc, cc) = self.rz.sin_cos();
        let drx = [[0.0, 0.0, 0.0], [0.0, -sa, -ca], [0.0, ca, -sa]];
        let dry = [[-sb, 0.0, cb], [0.0, 0.0, 0.0], [-cb, 0.0, -sb]];
        let drz = [[-sc, -cc, 0.0], [cc, -sc, 0.0], [0.0, 0.0, 0.0]];
        [
            mat3_mul(&mat3_mul(&rz, &ry), &drx),
            mat3_mul(&mat3_mul(&rz, &dry), &rx),
            mat3_mul(&mat3_mul(&drz, &ry), &rx),
        ]
    }
}

fn elemental(rx: f64, ry: f64, rz: f64) -> (Mat3, Mat3, Mat3) {
    let (sa, ca) = rx.sin_cos();
    let (sb, cb) = ry.sin_cos();
    let (sc, cc) = rz.sin_cos();
    let x = [[1.0, 0.0, 0.0], [0.0, ca, -sa], [0.0, sa, ca]];
    let y = [[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]];
    let z = [[cc, -sc, 0.0], [sc, cc, 0.0], [0.0, 0.0, 1.0]];
    (z, y, x)
}

pub type Mat3 = [[f64; 3]; 3];

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

#[inline]
pub fn mat3_vec(a: &Mat3, x: &[f64; 3]) -> [f64; 3] {
    [
        a[0][0] * x[0] + a[0][1] * x[1] + a[0][2] * x[2],
        a[1][0] * x[0] + a[1][1] * x[1] + a[1][2] * x[2],
        a[2][0] * x[0] + a[2][1] * x[1] + a[2][2] * x[2],
    ]
}

/// 4x4 row-major homogeneous rigid transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    m: [[f64; 4]; 4],
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        RigidTransform { m }
    }

    pub fn from_parts(r: &Mat3, t: [f64; 3]) -> Self {
        let mut m = [[0.0; 4]; 4];
        for i in 0..3 {
            m[i][..3].copy_from_slice(&r[i]);
            m[i][3] = t[i];
        }
        m[3][3] = 1.0;
        RigidTransform { m }
    }

    /// Builds a transform from a full matrix after checking the rigid-body
    /// invariants (orthonormal rotation, unit determinant, exact bottom row).
    pub fn from_matrix(m: [[f64; 4]; 4]) -> Result<Self> {
        let t = RigidTransform { m };
        t.check(1e-9)?;
        Ok(t)
    }

    /// Same as `from_matrix` with a caller-chosen orthonormality tolerance.
    /// Text round-trips of long trajectories drift slightly past 1e-9.
    pub fn from_matrix_tol(m: [[f64; 4]; 4], tol: f64) -> Result<Self> {
        let t = RigidTransform { m };
        t.check(tol)?;
        Ok(t)
    }

    pub fn translation_only(t: [f64; 3]) -> Self {
        let mut out = Self::identity();
        for (i, ti) in t.iter().enumerate() {
            out.m[i][3] = *ti;
        }
        out
    }

    pub fn matrix(&self) -> &[[f64; 4]; 4] {
        &self.m
    }

    pub fn rotation(&self) -> Mat3 {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            row.copy_from_slice(&self.m[i][..3]);
        }
        r
    }

    pub fn translation(&self) -> [f64; 3] {
        [self.m[0][3], self.m[1][3], self.m[2][3]]
    }

    pub fn compose(&self, rhs: &RigidTransform) -> RigidTransform {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..4).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        RigidTransform { m }
    }

    pub fn invert(&self) -> RigidTransform {
        let r = self.rotation();
        let t = self.translation();
        let mut rt = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                rt[i][j] = r[j][i];
            }
        }
        let ti = mat3_vec(&rt, &t);
        RigidTransform::from_parts(&rt, [-ti[0], -ti[1], -ti[2]])
    }

    pub fn transform_point(&self, x: &[f64; 3]) -> [f64; 3] {
        let r = mat3_vec(&self.rotation(), x);
        [r[0] + self.m[0][3], r[1] + self.m[1][3], r[2] + self.m[2][3]]
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &RigidTransform) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        worst
    }

    /// Checks orthonormality, determinant and the bottom row.
    pub fn check(&self, tol: f64) -> Result<()> {
        if self.m.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid("transform has non-finite entries"));
        }
        if self.m[3] != [0.0, 0.0, 0.0, 1.0] {
            return Err(Error::invalid("transform bottom row must be (0, 0, 0, 1)"));
        }
        let r = self.rotation();
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - expect).abs() > tol {
                    return Err(Error::invalid(format!(
                        "rotation is not orthonormal (R^T R [{i}][{j}] = {dot})"
                    )));
                }
            }
        }
        let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
        if (det - 1.0).abs() > tol {
            return Err(Error::invalid(format!("rotation determinant is {det}")));
        }
        Ok(())
    }

    /// Recovers Euler angles and translation, inverse of [`pose_to_transform`]
    /// for `|ry| < pi/2`.
    pub fn to_pose(&self) -> PoseParams {
        let r = self.rotation();
        let ry = (-r[2][0]).atan2((r[2][1] * r[2][1] + r[2][2] * r[2][2]).sqrt());
        let rx = r[2][1].atan2(r[2][2]);
        let rz = r[1][0].atan2(r[0][0]);
        let t = self.translation();
        PoseParams::new(rx, ry, rz, t[0], t[1], t[2])
    }
}

/// Converts Euler angles and translation to a rigid transform,
/// `R = Rz(rz) * Ry(ry) * Rx(rx)`.
pub fn pose_to_transform(p: &PoseParams) -> Result<RigidTransform> {
    if !p.is_finite() {
        return Err(Error::invalid(format!("non-finite pose {p:?}")));
    }
    Ok(RigidTransform::from_parts(
        &p.rotation(),
        [p.tx, p.ty, p.tz],
    ))
}

/// Result of projecting a target pixel into a source view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub pixel: PixelCoord,
    /// z coordinate of the point in the source camera frame.
    pub source_depth: f64,
    /// False when the point lands at or behind the source camera.
    pub in_front: bool,
}

/// Intermediate quantities of a projection kept for differentiation.
///
/// The projection is evaluated in inverse-depth-normalized form:
/// `q = R * ray + t / depth`, `p_s = p_t + f * (q.xy / q.z - ray.xy)`.
/// This is algebraically the usual `K T D K^-1 p` but reproduces `p_t`
/// exactly under the identity transform.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ProjectionTerms {
    pub projection: Projection,
    pub ray: [f64; 3],
    /// d(u_s, v_s) / d q.
    pub dpix_dq: [[f64; 3]; 2],
}

#[inline]
pub(crate) fn project_terms(
    p_t: PixelCoord,
    depth: f64,
    k: &Intrinsics,
    r: &Mat3,
    t: &[f64; 3],
) -> ProjectionTerms {
    let ray = k.unproject(p_t);
    let inv_d = 1.0 / depth;
    let rr = mat3_vec(r, &ray);
    let q = [rr[0] + t[0] * inv_d, rr[1] + t[1] * inv_d, rr[2] + t[2] * inv_d];
    let source_depth = q[2] * depth;
    let in_front = source_depth > MIN_SOURCE_DEPTH;
    if !in_front {
        return ProjectionTerms {
            projection: Projection {
                pixel: PixelCoord::new(f64::NAN, f64::NAN),
                source_depth,
                in_front,
            },
            ray,
            dpix_dq: [[0.0; 3]; 2],
        };
    }
    let iz = 1.0 / q[2];
    let xn = q[0] * iz;
    let yn = q[1] * iz;
    let u = p_t.u + k.fx * (xn - ray[0]);
    let v = p_t.v + k.fy * (yn - ray[1]);
    ProjectionTerms {
        projection: Projection {
            pixel: PixelCoord::new(u, v),
            source_depth,
            in_front,
        },
        ray,
        dpix_dq: [
            [k.fx * iz, 0.0, -k.fx * xn * iz],
            [0.0, k.fy * iz, -k.fy * yn * iz],
        ],
    }
}

/// Projects target pixel `p_t` with the given depth into the source view
/// reached by `t_target_to_source`.
pub fn project(
    p_t: PixelCoord,
    depth: f64,
    k: &Intrinsics,
    t_target_to_source: &RigidTransform,
) -> Result<Projection> {
    if !(depth > 0.0) || !depth.is_finite() {
        return Err(Error::invalid(format!("depth must be positive, got {depth}")));
    }
    let r = t_target_to_source.rotation();
    let t = t_target_to_source.translation();
    Ok(project_terms(p_t, depth, k, &r, &t).projection)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn k100() -> Intrinsics {
        Intrinsics::new(100.0, 100.0, 50.0, 50.0, 100, 100).unwrap()
    }

    #[test]
    fn zero_pose_is_exact_identity() {
        let t = pose_to_transform(&PoseParams::default()).unwrap();
        assert_eq!(t, RigidTransform::identity());
    }

    #[test]
    fn quarter_turn_about_z() {
        let t = pose_to_transform(&PoseParams::new(0.0, 0.0, FRAC_PI_2, 0.0, 0.0, 0.0)).unwrap();
        let expect = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        let r = t.rotation();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(r[i][j], expect[i][j], epsilon = 1e-15);
            }
        }
        let x = t.transform_point(&[1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn elemental_product_oracle() {
        // Independent elemental matrices, multiplied in Rz * Ry * Rx order.
        let (a, b, c) = (0.1f64, -0.2f64, 0.3f64);
        let rx = [
            [1.0, 0.0, 0.0],
            [0.0, a.cos(), -a.sin()],
            [0.0, a.sin(), a.cos()],
        ];
        let ry = [
            [b.cos(), 0.0, b.sin()],
            [0.0, 1.0, 0.0],
            [-b.sin(), 0.0, b.cos()],
        ];
        let rz = [
            [c.cos(), -c.sin(), 0.0],
            [c.sin(), c.cos(), 0.0],
            [0.0, 0.0, 1.0],
        ];
        let mul = |p: [[f64; 3]; 3], q: [[f64; 3]; 3]| {
            let mut o = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        o[i][j] += p[i][k] * q[k][j];
                    }
                }
            }
            o
        };
        let expect = mul(mul(rz, ry), rx);
        let t = pose_to_transform(&PoseParams::new(a, b, c, 1.0, 2.0, 3.0)).unwrap();
        let m = t.matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(m[i][j], expect[i][j], epsilon = 1e-15);
            }
        }
        assert_eq!(t.translation(), [1.0, 2.0, 3.0]);
        assert_eq!(m[3], [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn non_finite_pose_rejected() {
        let p = PoseParams::new(f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(pose_to_transform(&p), Err(Error::InvalidArgument(_))));
        let p = PoseParams::translation(0.0, f64::INFINITY, 0.0);
        assert!(pose_to_transform(&p).is_err());
    }

    #[test]
    fn invert_simple_cases() {
        assert_eq!(RigidTransform::identity().invert(), RigidTransform::identity());
        let t = RigidTransform::translation_only([1.0, 2.0, 3.0]);
        assert_eq!(t.invert().translation(), [-1.0, -2.0, -3.0]);
    }

    #[test]
    fn rotation_derivatives_match_finite_differences() {
        let p = PoseParams::new(0.3, -0.4, 0.7, 0.0, 0.0, 0.0);
        let d = p.rotation_derivatives();
        let h = 1e-6;
        for axis in 0..3 {
            let mut plus = p.to_array();
            let mut minus = p.to_array();
            plus[axis] += h;
            minus[axis] -= h;
            let rp = PoseParams::from_array(plus).rotation();
            let rm = PoseParams::from_array(minus).rotation();
            for i in 0..3 {
                for j in 0..3 {
                    let fd = (rp[i][j] - rm[i][j]) / (2.0 * h);
                    assert_abs_diff_eq!(d[axis][i][j], fd, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn to_pose_round_trip() {
        let p = PoseParams::new(0.2, -0.5, 1.1, 0.3, -2.0, 4.0);
        let q = pose_to_transform(&p).unwrap().to_pose();
        for (a, b) in p.to_array().iter().zip(q.to_array()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_projection_is_exact() {
        let k = k100();
        let id = RigidTransform::identity();
        for &(u, v, d) in &[(0.0, 0.0, 0.5), (13.0, 77.0, 3.3), (99.0, 99.0, 97.1)] {
            let p = project(PixelCoord::new(u, v), d, &k, &id).unwrap();
            assert_eq!(p.pixel, PixelCoord::new(u, v));
            assert!(p.in_front);
        }
    }

    #[test]
    fn x_translation_shifts_by_disparity() {
        let k = Intrinsics::new(80.0, 70.0, 40.0, 30.0, 80, 60).unwrap();
        let (d, tx) = (4.0, 0.3);
        let t = RigidTransform::translation_only([tx, 0.0, 0.0]);
        let p = project(PixelCoord::new(12.0, 20.0), d, &k, &t).unwrap();
        assert_abs_diff_eq!(p.pixel.u, 12.0 + 80.0 * tx / d, epsilon = 1e-12);
        assert_abs_diff_eq!(p.pixel.v, 20.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.source_depth, d, epsilon = 1e-12);
    }

    #[test]
    fn on_axis_point_stays_on_axis() {
        let t = RigidTransform::translation_only([0.0, 0.0, -1.0]);
        let p = project(PixelCoord::new(50.0, 50.0), 2.0, &k100(), &t).unwrap();
        assert_abs_diff_eq!(p.pixel.u, 50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.pixel.v, 50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.source_depth, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn behind_camera_is_flagged() {
        let t = RigidTransform::translation_only([0.0, 0.0, -5.0]);
        let p = project(PixelCoord::new(50.0, 50.0), 2.0, &k100(), &t).unwrap();
        assert!(!p.in_front);
        assert!(p.source_depth < 0.0);
        assert!(project(PixelCoord::new(1.0, 1.0), 0.0, &k100(), &t).is_err());
    }

    #[test]
    fn intrinsics_scaling() {
        let k = Intrinsics::new(100.0, 90.0, 64.0, 32.0, 128, 64).unwrap();
        assert_eq!(k.scale(0).unwrap(), k);
        let k1 = scale_intrinsics(&k, 1).unwrap();
        assert_eq!((k1.fx, k1.fy, k1.cx, k1.cy), (50.0, 45.0, 32.0, 16.0));
        assert_eq!((k1.width, k1.height), (64, 32));
        assert!(k.scale(5).is_ok());
        // height 64 >> 6 == 1
        assert!(matches!(k.scale(6), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn intrinsics_validation() {
        assert!(Intrinsics::new(-1.0, 1.0, 5.0, 5.0, 10, 10).is_err());
        assert!(Intrinsics::new(1.0, 1.0, 10.0, 5.0, 10, 10).is_err());
        assert!(Intrinsics::new(1.0, 1.0, 5.0, 0.0, 10, 10).is_err());
    }

    fn arb_pose() -> impl Strategy<Value = PoseParams> {
        (
            -3.0..3.0f64,
            -1.5..1.5f64,
            -3.0..3.0f64,
            -10.0..10.0f64,
            -10.0..10.0f64,
            -10.0..10.0f64,
        )
            .prop_map(|(a, b, c, x, y, z)| PoseParams::new(a, b, c, x, y, z))
    }

    proptest! {
        #[test]
        fn transforms_are_rigid(p in arb_pose()) {
            let t = pose_to_transform(&p).unwrap();
            prop_assert!(t.check(1e-9).is_ok());
        }

        #[test]
        fn inverse_cancels(p in arb_pose()) {
            let t = pose_to_transform(&p).unwrap();
            let prod = t.compose(&t.invert());
            prop_assert!(prod.max_abs_diff(&RigidTransform::identity()) < 1e-9);
            prop_assert!(t.invert().invert().max_abs_diff(&t) < 1e-9);
        }

        #[test]
        fn identity_projection_any_depth(u in 0.0..100.0f64, v in 0.0..100.0f64, d in 1e-3..1e3f64) {
            let p = project(PixelCoord::new(u, v), d, &k100(), &RigidTransform::identity()).unwrap();
            prop_assert!((p.pixel.u - u).abs() < 1e-12);
            prop_assert!((p.pixel.v - v).abs() < 1e-12);
        }

        #[test]
        fn depth_translation_scale_covariance(
            p in arb_pose(), u in 0.0..100.0f64, v in 0.0..100.0f64, s in 0.1..10.0f64
        ) {
            let k = k100();
            let d = 20.0;
            let a = project(PixelCoord::new(u, v), d, &k, &pose_to_transform(&p).unwrap()).unwrap();
            let mut scaled = p;
            scaled.tx *= s;
            scaled.ty *= s;
            scaled.tz *= s;
            let b = project(PixelCoord::new(u, v), d * s, &k, &pose_to_transform(&scaled).unwrap()).unwrap();
            prop_assert_eq!(a.in_front, b.in_front);
            if a.in_front && a.source_depth > 1e-3 * d {
                let tol = 1e-9 * (1.0 + a.pixel.u.abs() + a.pixel.v.abs());
                prop_assert!((a.pixel.u - b.pixel.u).abs() < tol);
                prop_assert!((a.pixel.v - b.pixel.v).abs() < tol);
            }
        }
    }
}
