//! Serial-chain forward kinematics, geometric Jacobians, and the dual-arm
//! relative pose / relative Jacobian formulation.
//!
//! Conventions:
//! - all chains are revolute-only; a joint is a fixed parent-to-joint
//!   transform followed by a rotation about a unit axis in the joint frame,
//! - the relative pose of the tool robot (B) is expressed in the reference
//!   robot's (A) TCP frame: `rel = fk_a(q)⁻¹ ∘ fk_b(q)`,
//! - Jacobians stack `[linear; angular]` rows.

use nalgebra::{DMatrix, DVector, Quaternion, UnitQuaternion, UnitVector3, Vector3};

use crate::error::{Error, Result};

pub type JointVec = DVector<f64>;

/// Rigid transform: position plus unit quaternion (w, x, y, z).
#[derive(Clone, Debug, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            position: Vector3::zeros(),
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn new(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Pose {
            position,
            orientation,
        }
    }

    /// Build from raw quaternion components in (w, x, y, z) order.
    ///
    /// Rejects quaternions whose norm deviates from 1 by more than 1e-6 and
    /// renormalizes the rest.
    pub fn from_parts(position: [f64; 3], quat_wxyz: [f64; 4]) -> Result<Self> {
        let q = Quaternion::new(quat_wxyz[0], quat_wxyz[1], quat_wxyz[2], quat_wxyz[3]);
        let norm = q.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
            return Err(Error::contract(format!(
                "quaternion norm {norm} deviates from 1 by more than 1e-6"
            )));
        }
        Ok(Pose {
            position: Vector3::new(position[0], position[1], position[2]),
            orientation: UnitQuaternion::new_normalize(q),
        })
    }

    /// `self ∘ other`: apply `other` in the frame of `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            position: self.position + self.orientation * other.position,
            orientation: renormalize(self.orientation * other.orientation),
        }
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.orientation.inverse();
        Pose {
            position: -(inv * self.position),
            orientation: inv,
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.position + self.orientation * p
    }
}

// Unit quaternion products drift very slowly; keep the invariant tight.
fn renormalize(q: UnitQuaternion<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::new_normalize(q.into_inner())
}

/// One revolute joint: fixed parent-to-joint transform, then rotation about
/// `axis` (unit vector in the joint frame).
#[derive(Clone, Debug)]
pub struct Joint {
    pub axis: UnitVector3<f64>,
    pub origin: Pose,
    pub q_min: f64,
    pub q_max: f64,
    pub vel_max: f64,
    pub acc_max: f64,
}

/// Collision sphere, center in the owning link's frame.
#[derive(Clone, Copy, Debug)]
pub struct Sphere {
    pub center: Vector3<f64>,
    pub radius: f64,
}

/// Kinematic description of one serial arm.
///
/// Link `0` is the base link (frame = chain root); link `i >= 1` is the frame
/// after joint `i`'s rotation. `link_spheres` therefore has `dof + 1` entries.
#[derive(Clone, Debug)]
pub struct ChainModel {
    joints: Vec<Joint>,
    tcp_offset: Pose,
    link_spheres: Vec<Vec<Sphere>>,
}

impl ChainModel {
    pub fn new(joints: Vec<Joint>, tcp_offset: Pose, link_spheres: Vec<Vec<Sphere>>) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::contract("chain must have at least one joint"));
        }
        if link_spheres.len() != joints.len() + 1 {
            return Err(Error::contract(format!(
                "expected {} link sphere lists (base + one per joint), got {}",
                joints.len() + 1,
                link_spheres.len()
            )));
        }
        for (i, j) in joints.iter().enumerate() {
            if !(j.q_min < j.q_max) {
                return Err(Error::contract(format!("joint {i}: q_min must be < q_max")));
            }
            if !(j.vel_max > 0.0) || !(j.acc_max > 0.0) {
                return Err(Error::contract(format!(
                    "joint {i}: vel_max and acc_max must be positive"
                )));
            }
        }
        for (i, spheres) in link_spheres.iter().enumerate() {
            for s in spheres {
                if !(s.radius > 0.0) {
                    return Err(Error::contract(format!(
                        "link {i}: sphere radius must be positive"
                    )));
                }
            }
        }
        Ok(ChainModel {
            joints,
            tcp_offset,
            link_spheres,
        })
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn tcp_offset(&self) -> &Pose {
        &self.tcp_offset
    }

    pub fn link_spheres(&self) -> &[Vec<Sphere>] {
        &self.link_spheres
    }

    fn check_dim(&self, q: &JointVec) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::contract(format!(
                "joint vector length {} does not match chain DoF {}",
                q.len(),
                self.dof()
            )));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("joint vector contains non-finite entries"));
        }
        Ok(())
    }
}

/// Poses of every link frame plus the TCP, all in the chain root frame.
#[derive(Clone, Debug)]
pub struct ChainFrames {
    /// `links[0]` is the root frame; `links[i]` the frame after joint `i`.
    pub links: Vec<Pose>,
    pub tcp: Pose,
}

/// World-frame TCP pose of a chain rooted at the origin.
pub fn forward_kinematics(chain: &ChainModel, q: &JointVec) -> Result<Pose> {
    Ok(chain_frames(chain, q)?.tcp)
}

/// Forward kinematics keeping every intermediate link frame (collision
/// checking needs them).
pub fn chain_frames(chain: &ChainModel, q: &JointVec) -> Result<ChainFrames> {
    chain.check_dim(q)?;
    let mut links = Vec::with_capacity(chain.dof() + 1);
    let mut t = Pose::identity();
    links.push(t.clone());
    for (joint, &qi) in chain.joints.iter().zip(q.iter()) {
        t = t.compose(&joint.origin);
        let rot = UnitQuaternion::from_axis_angle(&joint.axis, qi);
        t = t.compose(&Pose::new(Vector3::zeros(), rot));
        links.push(t.clone());
    }
    let tcp = t.compose(&chain.tcp_offset);
    Ok(ChainFrames { links, tcp })
}

/// Geometric Jacobian of the TCP in the chain root frame, rows
/// `[linear; angular]`, one column per joint.
pub fn geometric_jacobian(chain: &ChainModel, q: &JointVec) -> Result<DMatrix<f64>> {
    let frames = chain_frames(chain, q)?;
    let p_tcp = frames.tcp.position;
    let mut jac = DMatrix::zeros(6, chain.dof());
    for (i, joint) in chain.joints.iter().enumerate() {
        // The joint's own rotation does not move its axis, so the post-rotation
        // link frame gives the same world axis as the pre-rotation frame.
        let frame = &frames.links[i + 1];
        let axis_world = frame.orientation * joint.axis.into_inner();
        let origin_world = frame.position;
        let linear = axis_world.cross(&(p_tcp - origin_world));
        for r in 0..3 {
            jac[(r, i)] = linear[r];
            jac[(r + 3, i)] = axis_world[r];
        }
    }
    Ok(jac)
}

/// Two serial arms with fixed base poses in a common world frame.
///
/// Robot A is the reference robot (targets are expressed in its TCP frame);
/// robot B is the tool robot.
#[derive(Clone, Debug)]
pub struct DualArmSystem {
    pub robot_a: ChainModel,
    pub robot_b: ChainModel,
    pub base_a: Pose,
    pub base_b: Pose,
}

impl DualArmSystem {
    pub fn new(robot_a: ChainModel, robot_b: ChainModel, base_a: Pose, base_b: Pose) -> Self {
        DualArmSystem {
            robot_a,
            robot_b,
            base_a,
            base_b,
        }
    }

    pub fn dof_a(&self) -> usize {
        self.robot_a.dof()
    }

    pub fn dof_b(&self) -> usize {
        self.robot_b.dof()
    }

    /// Combined DoF count `n_T = n_A + n_B`.
    pub fn dof(&self) -> usize {
        self.dof_a() + self.dof_b()
    }

    /// Lower/upper joint limits of the combined system.
    pub fn limits(&self) -> (JointVec, JointVec) {
        let n = self.dof();
        let mut lo = JointVec::zeros(n);
        let mut hi = JointVec::zeros(n);
        for (i, j) in self
            .robot_a
            .joints
            .iter()
            .chain(self.robot_b.joints.iter())
            .enumerate()
        {
            lo[i] = j.q_min;
            hi[i] = j.q_max;
        }
        (lo, hi)
    }

    /// Per-joint velocity limits of the combined system.
    pub fn vel_limits(&self) -> JointVec {
        JointVec::from_iterator(
            self.dof(),
            self.robot_a
                .joints
                .iter()
                .chain(self.robot_b.joints.iter())
                .map(|j| j.vel_max),
        )
    }

    /// Per-joint acceleration limits of the combined system.
    pub fn acc_limits(&self) -> JointVec {
        JointVec::from_iterator(
            self.dof(),
            self.robot_a
                .joints
                .iter()
                .chain(self.robot_b.joints.iter())
                .map(|j| j.acc_max),
        )
    }

    /// World TCP pose of robot A.
    pub fn fk_a(&self, q_a: &JointVec) -> Result<Pose> {
        Ok(self.base_a.compose(&forward_kinematics(&self.robot_a, q_a)?))
    }

    /// World TCP pose of robot B.
    pub fn fk_b(&self, q_b: &JointVec) -> Result<Pose> {
        Ok(self.base_b.compose(&forward_kinematics(&self.robot_b, q_b)?))
    }
}

/// Joint vector for the combined system, `n_T` entries in radians.
#[derive(Clone, Debug, PartialEq)]
pub struct JointConfig {
    values: JointVec,
}

impl JointConfig {
    pub fn new(values: JointVec) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("joint config contains non-finite entries"));
        }
        Ok(JointConfig { values })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(JointVec::from_column_slice(values))
    }

    pub fn values(&self) -> &JointVec {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.len() == 0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }

    /// Split at `n_A` into the per-arm joint vectors.
    pub fn split(&self, sys: &DualArmSystem) -> Result<(JointVec, JointVec)> {
        if self.values.len() != sys.dof() {
            return Err(Error::contract(format!(
                "joint config length {} does not match system DoF {}",
                self.values.len(),
                sys.dof()
            )));
        }
        let na = sys.dof_a();
        let a = JointVec::from_column_slice(&self.values.as_slice()[..na]);
        let b = JointVec::from_column_slice(&self.values.as_slice()[na..]);
        Ok((a, b))
    }

    /// True iff every entry lies inside the system's joint limits.
    pub fn within_limits(&self, sys: &DualArmSystem) -> bool {
        if self.values.len() != sys.dof() {
            return false;
        }
        let (lo, hi) = sys.limits();
        self.values
            .iter()
            .zip(lo.iter().zip(hi.iter()))
            .all(|(&q, (&l, &h))| q >= l && q <= h)
    }
}

/// Batch of combined joint configurations.
pub type JointBatch = Vec<JointConfig>;

/// Relative pose of the tool TCP expressed in the reference TCP frame:
/// `fk_a(q)⁻¹ ∘ fk_b(q)`.
pub fn relative_pose(sys: &DualArmSystem, q: &JointConfig) -> Result<Pose> {
    let (qa, qb) = q.split(sys)?;
    let ta = sys.fk_a(&qa)?;
    let tb = sys.fk_b(&qb)?;
    Ok(ta.inverse().compose(&tb))
}

/// Relative Jacobian: maps combined joint rates to the twist of the relative
/// pose, expressed in the reference TCP frame (6 × `n_T`).
///
/// With world Jacobians `J_A`, `J_B` and `r = p_B − p_A`, robot A's columns
/// are the negated `J_A` block rotated into the reference TCP frame with the
/// lever-arm coupling `skew(r)·Jω_A` in the linear rows; robot B's columns
/// are `J_B` rotated into the same frame.
pub fn relative_jacobian(sys: &DualArmSystem, q: &JointConfig) -> Result<DMatrix<f64>> {
    let (qa, qb) = q.split(sys)?;
    let frames_a = chain_frames(&sys.robot_a, &qa)?;
    let frames_b = chain_frames(&sys.robot_b, &qb)?;
    let ja_root = geometric_jacobian(&sys.robot_a, &qa)?;
    let jb_root = geometric_jacobian(&sys.robot_b, &qb)?;

    let ta = sys.base_a.compose(&frames_a.tcp);
    let tb = sys.base_b.compose(&frames_b.tcp);
    let ra_t = ta.orientation.inverse().to_rotation_matrix();
    let r = tb.position - ta.position;
    let r_skew = skew(&r);

    let na = sys.dof_a();
    let nb = sys.dof_b();
    let mut jac = DMatrix::zeros(6, na + nb);

    let rot_base_a = sys.base_a.orientation.to_rotation_matrix();
    let rot_base_b = sys.base_b.orientation.to_rotation_matrix();
    for i in 0..na {
        let jv = rot_base_a * Vector3::new(ja_root[(0, i)], ja_root[(1, i)], ja_root[(2, i)]);
        let jw = rot_base_a * Vector3::new(ja_root[(3, i)], ja_root[(4, i)], ja_root[(5, i)]);
        let lin = &ra_t * (r_skew * jw - jv);
        let ang = -(&ra_t * jw);
        for k in 0..3 {
            jac[(k, i)] = lin[k];
            jac[(k + 3, i)] = ang[k];
        }
    }
    for i in 0..nb {
        let jv = rot_base_b * Vector3::new(jb_root[(0, i)], jb_root[(1, i)], jb_root[(2, i)]);
        let jw = rot_base_b * Vector3::new(jb_root[(3, i)], jb_root[(4, i)], jb_root[(5, i)]);
        let lin = &ra_t * jv;
        let ang = &ra_t * jw;
        for k in 0..3 {
            jac[(k, na + i)] = lin[k];
            jac[(k + 3, na + i)] = ang[k];
        }
    }
    Ok(jac)
}

fn skew(v: &Vector3<f64>) -> nalgebra::Matrix3<f64> {
    nalgebra::Matrix3::new(0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0)
}

/// Displacement `q1⁻¹ ⊗ q2`, canonicalized to `w >= 0` so the double cover
/// cannot flip the sign of downstream costs.
pub fn quaternion_displacement(
    q1: &UnitQuaternion<f64>,
    q2: &UnitQuaternion<f64>,
) -> Result<UnitQuaternion<f64>> {
    for q in [q1, q2] {
        let norm = q.as_ref().norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::contract(format!(
                "quaternion norm {norm} deviates from 1 by more than 1e-6"
            )));
        }
    }
    let d = q1.inverse() * q2;
    Ok(canonicalize(renormalize(d)))
}

/// Flip to the `w >= 0` hemisphere.
pub fn canonicalize(q: UnitQuaternion<f64>) -> UnitQuaternion<f64> {
    if q.w < 0.0 {
        UnitQuaternion::new_unchecked(-q.into_inner())
    } else {
        q
    }
}

/// Rotation angle of a unit quaternion: `2·atan2(‖v‖, |w|)`, in `[0, π]`.
pub fn rotation_angle(q: &UnitQuaternion<f64>) -> f64 {
    let v = Vector3::new(q.i, q.j, q.k);
    2.0 * v.norm().atan2(q.w.abs())
}

/// Rotation vector (angle · unit axis) of a unit quaternion, using the
/// `w >= 0` hemisphere. Zero for the identity.
pub fn rotation_vector(q: &UnitQuaternion<f64>) -> Vector3<f64> {
    let q = canonicalize(*q);
    let v = Vector3::new(q.i, q.j, q.k);
    let s = v.norm();
    if s < 1e-14 {
        return Vector3::zeros();
    }
    let angle = 2.0 * s.atan2(q.w);
    v * (angle / s)
}
