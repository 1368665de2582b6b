//! Pinhole camera model.
//!
//! Cameras look down their local `-z` axis with `+y` up (right-handed). Pixel
//! coordinates are continuous: pixel `(i, j)` covers `[i, i+1) x [j, j+1)` and
//! has its center at `(i + 0.5, j + 0.5)`; `y` grows downward.

use crate::envmap::UnitDirection;
use crate::error::{validation, Error, Result};
use crate::math::{Mat3, Vec3};
use crate::raster::{sample_clamped, Rgba, RgbaImage};

const ORTHO_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        if !(fx.is_finite() && fy.is_finite() && fx > 0.0 && fy > 0.0) {
            return Err(validation(format!("focal lengths must be finite and positive, got {fx}, {fy}")));
        }
        if width == 0 || height == 0 {
            return Err(validation(format!("image size must be >= 1, got {width}x{height}")));
        }
        if !(0.0..=width as f64).contains(&cx) || !(0.0..=height as f64).contains(&cy) {
            return Err(validation(format!(
                "principal point ({cx}, {cy}) outside the {width}x{height} image"
            )));
        }
        Ok(Self { fx, fy, cx, cy, width, height })
    }

    /// Square pixels, centered principal point, horizontal field of view in degrees.
    pub fn from_fov(fov_deg: f64, width: usize, height: usize) -> Result<Self> {
        if !(fov_deg > 0.0 && fov_deg < 180.0) {
            return Err(validation(format!("field of view must lie in (0, 180), got {fov_deg}")));
        }
        let f = 0.5 * width as f64 / (0.5 * fov_deg.to_radians()).tan();
        Self::new(f, f, 0.5 * width as f64, 0.5 * height as f64, width, height)
    }

    /// Largest angle between the optical axis and a ray through the image rectangle.
    pub fn half_diagonal_fov(&self) -> f64 {
        let dx = self.cx.max(self.width as f64 - self.cx) / self.fx;
        let dy = self.cy.max(self.height as f64 - self.cy) / self.fy;
        dx.hypot(dy).atan()
    }
}

/// Rigid world-to-camera transform `q = R p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraPose {
    rotation: Mat3,
    translation: Vec3,
}

impl CameraPose {
    pub const IDENTITY: CameraPose = CameraPose {
        rotation: Mat3::IDENTITY,
        translation: Vec3::ZERO,
    };

    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self> {
        let rtr = rotation.transpose().mul_mat(&rotation);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                if !((rtr.rows[i][j] - want).abs() <= ORTHO_TOL) {
                    return Err(validation(format!("rotation {rotation:?} is not orthonormal")));
                }
            }
        }
        if !((rotation.determinant() - 1.0).abs() <= ORTHO_TOL) {
            return Err(validation(format!("rotation {rotation:?} has determinant != +1")));
        }
        if !translation.is_finite() {
            return Err(validation("translation must be finite"));
        }
        Ok(Self { rotation, translation })
    }

    /// Camera at `center` whose optical axis points along `forward`.
    pub fn look_along(center: Vec3, forward: UnitDirection, up_hint: Vec3) -> Result<Self> {
        let back = -forward.vec();
        let up_hint = if up_hint.cross(back).length() < 1e-9 {
            // forward parallel to the hint: pick any perpendicular
            if back.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 0.0, 1.0) }
        } else {
            up_hint
        };
        let right = up_hint
            .cross(back)
            .try_normalize()
            .ok_or_else(|| validation("degenerate camera orientation"))?;
        let up = back.cross(right);
        let rotation = Mat3::from_rows(right, up, back);
        Self::new(rotation, -rotation.mul_vec(center))
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> Vec3 {
        self.translation
    }

    /// Camera center in world space, `-R^T t`.
    pub fn center(&self) -> Vec3 {
        -self.rotation.transpose().mul_vec(self.translation)
    }

    /// World-space optical axis.
    pub fn forward(&self) -> Vec3 {
        -self.rotation.row(2)
    }
}

/// Intrinsics plus pose, without an image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    pub intrinsics: CameraIntrinsics,
    pub pose: CameraPose,
}

impl Camera {
    pub fn new(intrinsics: CameraIntrinsics, pose: CameraPose) -> Self {
        Self { intrinsics, pose }
    }

    /// Projects a world point to `(x, y, depth)`.
    pub fn project(&self, p: Vec3) -> Result<(f64, f64, f64)> {
        let q = self.pose.rotation.mul_vec(p) + self.pose.translation;
        if !(q.z < 0.0) {
            return Err(Error::BehindCamera(p.to_array()));
        }
        let (x, y) = self.image_coords(q);
        Ok((x, y, -q.z))
    }

    fn image_coords(&self, q: Vec3) -> (f64, f64) {
        let k = &self.intrinsics;
        let depth = -q.z;
        (k.cx + k.fx * (q.x / depth), k.cy - k.fy * (q.y / depth))
    }

    /// World-space direction of the ray through pixel coordinate `(x, y)`.
    pub fn pixel_to_ray(&self, x: f64, y: f64) -> UnitDirection {
        let k = &self.intrinsics;
        let cam = Vec3::new((x - k.cx) / k.fx, -(y - k.cy) / k.fy, -1.0);
        let world = self.pose.rotation.transpose().mul_vec(cam);
        UnitDirection::from_vec(world).expect("camera ray has nonzero z component")
    }

    /// Image coordinates of direction `d` seen from the camera center, if it lies in front.
    pub fn direction_to_pixel(&self, d: UnitDirection) -> Option<(f64, f64)> {
        let q = self.pose.rotation.mul_vec(d.vec());
        (q.z < 0.0).then(|| self.image_coords(q))
    }
}

/// One camera of the capture rig with its current frame.
#[derive(Clone, Debug, PartialEq)]
pub struct CameraView {
    pub camera: Camera,
    frame: RgbaImage,
}

impl CameraView {
    pub fn new(camera: Camera, frame: RgbaImage) -> Result<Self> {
        let k = &camera.intrinsics;
        if frame.dims() != (k.width, k.height) {
            return Err(validation(format!(
                "frame is {}x{} but the camera is {}x{}",
                frame.width(),
                frame.height(),
                k.width,
                k.height
            )));
        }
        Ok(Self { camera, frame })
    }

    pub fn frame(&self) -> &RgbaImage {
        &self.frame
    }

    pub fn with_frame(&self, frame: RgbaImage) -> Result<Self> {
        Self::new(self.camera, frame)
    }

    pub fn project(&self, p: Vec3) -> Result<(f64, f64, f64)> {
        self.camera.project(p)
    }

    pub fn pixel_to_ray(&self, x: f64, y: f64) -> UnitDirection {
        self.camera.pixel_to_ray(x, y)
    }

    /// Bilinear frame sample along direction `d` from the camera center, or
    /// `None` when the direction falls outside the frame or behind the camera.
    pub fn sample_view(&self, d: UnitDirection) -> Option<Rgba> {
        let (x, y) = self.camera.direction_to_pixel(d)?;
        let k = &self.camera.intrinsics;
        let inside = (0.0..=k.width as f64).contains(&x) && (0.0..=k.height as f64).contains(&y);
        inside.then(|| sample_clamped(&self.frame, x, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Grid;
    use proptest::prelude::*;

    fn test_camera() -> Camera {
        Camera::new(
            CameraIntrinsics::new(100.0, 100.0, 64.0, 64.0, 128, 128).unwrap(),
            CameraPose::IDENTITY,
        )
    }

    #[test]
    fn project_examples() {
        let cam = test_camera();
        assert_eq!(cam.project(Vec3::new(0.0, 0.0, -1.0)).unwrap(), (64.0, 64.0, 1.0));
        let (x, y, d) = cam.project(Vec3::new(0.1, 0.0, -1.0)).unwrap();
        assert!((x - 74.0).abs() < 1e-12 && y == 64.0 && d == 1.0);
        assert!(matches!(cam.project(Vec3::new(0.0, 0.0, 1.0)), Err(Error::BehindCamera(_))));
        assert!(cam.project(Vec3::ZERO).is_err());
    }

    #[test]
    fn pixel_to_ray_examples() {
        let cam = test_camera();
        let d = cam.pixel_to_ray(64.0, 64.0);
        assert!(d.angle_to(UnitDirection::FORWARD) < 1e-15);
        let d = cam.pixel_to_ray(74.0, 64.0);
        let want = UnitDirection::new(0.1, 0.0, -1.0).unwrap();
        assert!(d.angle_to(want) < 1e-12);
    }

    #[test]
    fn intrinsics_validation() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 0.0, 0.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, f64::INFINITY, 0.0, 0.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 5.0, 0.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 0.0, 0.0, 0, 4).is_err());
        assert!(CameraIntrinsics::from_fov(180.0, 4, 4).is_err());
        let k = CameraIntrinsics::from_fov(90.0, 256, 256).unwrap();
        assert!((k.fx - 128.0).abs() < 1e-9);
    }

    #[test]
    fn pose_validation() {
        let mut m = Mat3::IDENTITY;
        m.rows[0][1] = 0.01;
        assert!(CameraPose::new(m, Vec3::ZERO).is_err());
        let reflect = Mat3::from_row_major([-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(CameraPose::new(reflect, Vec3::ZERO).is_err());
    }

    #[test]
    fn look_along_points_the_optical_axis() {
        for f in [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, -1.0, 0.0), (0.3, -0.2, 0.9)] {
            let fwd = UnitDirection::new(f.0, f.1, f.2).unwrap();
            let pose = CameraPose::look_along(Vec3::new(1.0, 2.0, 3.0), fwd, Vec3::new(0.0, 1.0, 0.0)).unwrap();
            assert!((pose.forward() - fwd.vec()).length() < 1e-12);
            assert!((pose.center() - Vec3::new(1.0, 2.0, 3.0)).length() < 1e-12);
        }
    }

    #[test]
    fn sample_view_examples() {
        let cam = test_camera();
        let frame = Grid::from_vec(
            128,
            128,
            (0..128 * 128).map(|i| Rgba::opaque((i % 128) as f32, (i / 128) as f32, 0.0)).collect(),
        )
        .unwrap();
        let view = CameraView::new(cam, frame).unwrap();
        let c = view.sample_view(UnitDirection::FORWARD).unwrap();
        // optical axis lands between pixels 63 and 64
        assert!((c.r - 63.5).abs() < 1e-4 && (c.g - 63.5).abs() < 1e-4);
        assert!(view.sample_view(-UnitDirection::FORWARD).is_none());
        let corner = view.sample_view(view.pixel_to_ray(0.0, 0.0)).unwrap();
        assert!(corner.r.abs() < 1e-4 && corner.g.abs() < 1e-4);
        let far = view.sample_view(view.pixel_to_ray(128.0, 128.0)).unwrap();
        assert!((far.r - 127.0).abs() < 1e-4 && (far.g - 127.0).abs() < 1e-4);
    }

    #[test]
    fn frame_size_must_match() {
        let frame = Grid::filled(10, 10, Rgba::TRANSPARENT).unwrap();
        assert!(CameraView::new(test_camera(), frame).is_err());
    }

    fn pose() -> impl Strategy<Value = CameraPose> {
        (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU, 0.0f64..std::f64::consts::TAU, prop::array::uniform3(-5.0f64..5.0)).prop_map(
            |(z, phi, angle, t)| {
                let r = (1.0 - z * z).sqrt();
                let axis = Vec3::new(r * phi.cos(), r * phi.sin(), z);
                CameraPose::new(Mat3::rotation(axis, angle), Vec3::from_array(t)).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn project_inverts_pixel_to_ray(p in pose(), x in 0.0f64..640.0, y in 0.0f64..480.0, depth in 0.1f64..50.0) {
            let cam = Camera::new(CameraIntrinsics::new(500.0, 480.0, 320.0, 240.0, 640, 480).unwrap(), p);
            let d = cam.pixel_to_ray(x, y);
            let point = p.center() + d.vec() * depth;
            let (px, py, _) = cam.project(point).unwrap();
            prop_assert!((px - x).abs() < 1e-4 && (py - y).abs() < 1e-4);
        }

        #[test]
        fn outside_half_diagonal_is_absent(p in pose(), z in -1.0f64..1.0, phi in 0.0f64..std::f64::consts::TAU) {
            let cam = Camera::new(CameraIntrinsics::from_fov(60.0, 64, 48).unwrap(), p);
            let view = CameraView::new(cam, Grid::filled(64, 48, Rgba::opaque(1.0, 1.0, 1.0)).unwrap()).unwrap();
            let r = (1.0 - z * z).sqrt();
            let d = UnitDirection::new(r * phi.cos(), r * phi.sin(), z).unwrap();
            let axis = UnitDirection::from_vec(p.forward()).unwrap();
            if d.angle_to(axis) > cam.intrinsics.half_diagonal_fov() + 1e-9 {
                prop_assert!(view.sample_view(d).is_none());
            }
        }
    }
}
