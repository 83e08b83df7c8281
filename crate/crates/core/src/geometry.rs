//! Small linear-algebra vocabulary shared by all modules.

use nalgebra::{Isometry3, Matrix3, Point3, Rotation3, Translation3, UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Pt3 = Point3<f64>;
/// Rigid transform (SE(3)).
pub type Pose = Isometry3<f64>;

/// Cross-product matrix `[v]x`.
pub fn skew(v: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Pose whose local z axis is `z` and local x axis is the projection of world
/// +z onto the plane orthogonal to `z` (world +x when that projection vanishes).
pub fn frame_from_axis(origin: &Pt3, z: &Vec3) -> Pose {
    let z = z.normalize();
    let mut x = Vec3::z() - z * z.z;
    if x.norm() < 1e-6 {
        x = Vec3::x() - z * z.x;
    }
    let x = x.normalize();
    let y = z.cross(&x);
    let rot = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z]));
    Pose::from_parts(
        Translation3::from(origin.coords),
        UnitQuaternion::from_rotation_matrix(&rot),
    )
}
