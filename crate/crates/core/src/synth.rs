//! Deterministic synthetic scenes: a plane (optionally with a box to step
//! onto), a walking stick figure with a closed-form gait, and a static camera
//! whose depth and silhouette images are rendered by z-buffered point
//! splatting.
//!
//! Ground truth is produced in metric units. The scene cloud is emitted in
//! scene-native units (metric divided by `scene_scale`) and the body geometry
//! can be displaced by a time-varying hover, so that the optimizer has
//! something to repair.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::{BodyError, BodyFrame, BodySequence, Keypoint};
use crate::contact::{ContactPair, ContactSet, FrameContacts};
use crate::metrics::JointTrajectory;
use crate::raster::{BinaryImage, DepthMap};
use crate::scene::{CameraFrame, SceneError, ScenePointCloud};
use crate::Vec3;

pub const JOINT_COUNT: usize = 18;
pub const LEFT_FOOT: usize = 7;
pub const RIGHT_FOOT: usize = 11;
pub const JOINT_NAMES: [&str; JOINT_COUNT] = [
    "pelvis", "spine", "chest", "neck", "head", "l_hip", "l_knee", "l_foot", "l_toe", "r_hip",
    "r_knee", "r_foot", "r_toe", "l_shoulder", "l_hand", "r_shoulder", "r_hand", "head_top",
];

/// Fraction of the gait cycle a foot spends on the ground.
pub const STANCE_FRACTION: f64 = 0.6;
const PELVIS_HEIGHT: f64 = 0.95;
const HIP_HALF_WIDTH: f64 = 0.1;
const FOOT_LENGTH: f64 = 0.18;
const ANKLE_HEIGHT: f64 = 0.08;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic scene spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Body(#[from] BodyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerrainKind {
    Plane,
    BoxStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TerrainSpec {
    pub kind: TerrainKind,
    /// Half side length of the square ground patch, meters.
    pub half_extent: f64,
    pub spacing: f64,
    pub box_height: f64,
    /// Box footprint `[x_min, y_min, x_max, y_max]`.
    pub box_footprint: [f64; 4],
}

impl Default for TerrainSpec {
    fn default() -> Self {
        Self {
            kind: TerrainKind::Plane,
            half_extent: 1.6,
            spacing: 0.05,
            box_height: 0.4,
            box_footprint: [0.3, -0.5, 1.3, 0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitSpec {
    /// Walking speed along +x, m/s.
    pub speed: f64,
    /// Foot advance per gait cycle, meters.
    pub stride: f64,
    pub step_height: f64,
    pub start: [f64; 2],
}

impl Default for GaitSpec {
    fn default() -> Self {
        Self {
            speed: 0.5,
            stride: 0.6,
            step_height: 0.08,
            start: [-1.0, 0.0],
        }
    }
}

/// Body displacement `(drift · s, 0, height + variation · (2s − 1))` with
/// `s` running from 0 to 1 over the sequence.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoverSpec {
    pub height: f64,
    pub variation: f64,
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraSpec {
    pub eye: [f64; 3],
    pub target: [f64; 3],
    pub focal: f64,
    pub width: usize,
    pub height: usize,
}

impl Default for CameraSpec {
    fn default() -> Self {
        Self {
            eye: [0.0, -4.0, 1.6],
            target: [0.0, 0.0, 0.6],
            focal: 250.0,
            width: 200,
            height: 150,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub seed: u64,
    pub frames: usize,
    pub fps: f64,
    pub terrain: TerrainSpec,
    pub gait: GaitSpec,
    pub hover: HoverSpec,
    pub camera: CameraSpec,
    /// Metric size of one scene-native unit.
    pub scene_scale: f64,
    /// Scale the emitted body sequence starts from.
    pub initial_scale: f64,
    /// Uniform keypoint noise amplitude, pixels.
    pub keypoint_noise_px: f64,
    pub render: bool,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            frames: 60,
            fps: 30.0,
            terrain: TerrainSpec::default(),
            gait: GaitSpec::default(),
            hover: HoverSpec::default(),
            camera: CameraSpec::default(),
            scene_scale: 1.0,
            initial_scale: 1.0,
            keypoint_noise_px: 0.0,
            render: true,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidSpec(m.to_string()));
        if self.frames == 0 {
            return bad("sequence needs at least one frame");
        }
        let positive = [
            ("fps", self.fps),
            ("terrain.half_extent", self.terrain.half_extent),
            ("terrain.spacing", self.terrain.spacing),
            ("gait.speed", self.gait.speed),
            ("gait.stride", self.gait.stride),
            ("camera.focal", self.camera.focal),
            ("scene_scale", self.scene_scale),
            ("initial_scale", self.initial_scale),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(SynthError::InvalidSpec(format!("{name} must be positive")));
            }
        }
        let finite = [
            self.gait.step_height,
            self.terrain.box_height,
            self.hover.height,
            self.hover.variation,
            self.hover.drift,
            self.keypoint_noise_px,
        ];
        if finite.iter().any(|v| !v.is_finite()) || self.keypoint_noise_px < 0.0 {
            return bad("non-finite or negative amplitude");
        }
        if self.terrain.kind == TerrainKind::BoxStep && !(self.terrain.box_height > 0.0) {
            return bad("box height must be positive");
        }
        let [x0, y0, x1, y1] = self.terrain.box_footprint;
        if self.terrain.kind == TerrainKind::BoxStep && !(x1 > x0 && y1 > y0) {
            return bad("box footprint is empty");
        }
        if self.camera.width == 0 || self.camera.height == 0 {
            return bad("camera image is empty");
        }
        Ok(())
    }

    /// Gait cycle length in seconds.
    pub fn cycle(&self) -> f64 {
        self.gait.stride / self.gait.speed
    }

    /// Ground height under `(x, y)`.
    pub fn ground_height(&self, x: f64, y: f64) -> f64 {
        let t = &self.terrain;
        let [x0, y0, x1, y1] = t.box_footprint;
        if t.kind == TerrainKind::BoxStep && (x0..=x1).contains(&x) && (y0..=y1).contains(&y) {
            t.box_height
        } else {
            0.0
        }
    }

    /// Gait phase in `[0, 1)` of `foot` (0 left, 1 right) at frame `t`, and
    /// the index of the current cycle. Phase below [`STANCE_FRACTION`] is
    /// stance.
    pub fn foot_phase(&self, t: usize, foot: usize) -> (f64, i64) {
        let offset = if foot == 0 { 0.0 } else { 0.5 };
        let c = t as f64 / self.fps / self.cycle() + offset;
        let k = c.floor();
        (c - k, k as i64)
    }

    pub fn in_stance(&self, t: usize, foot: usize) -> bool {
        self.foot_phase(t, foot).0 < STANCE_FRACTION
    }

    fn planted_x(&self, foot: usize, k: i64) -> f64 {
        // planted under the pelvis at mid-stance
        let offset = if foot == 0 { 0.0 } else { 0.5 };
        let t_mid = (k as f64 + STANCE_FRACTION / 2.0 - offset) * self.cycle();
        self.gait.start[0] + self.gait.speed * t_mid
    }

    fn foot_position(&self, t: usize, foot: usize) -> Vec3 {
        let y = self.gait.start[1] + if foot == 0 { HIP_HALF_WIDTH } else { -HIP_HALF_WIDTH };
        let (phase, k) = self.foot_phase(t, foot);
        let x0 = self.planted_x(foot, k);
        let h0 = self.ground_height(x0, y);
        if phase < STANCE_FRACTION {
            return Vec3::new(x0, y, h0);
        }
        let x1 = self.planted_x(foot, k + 1);
        let h1 = self.ground_height(x1, y);
        let s = (phase - STANCE_FRACTION) / (1.0 - STANCE_FRACTION);
        let smooth = |v: f64| {
            let v = v.clamp(0.0, 1.0);
            v * v * (3.0 - 2.0 * v)
        };
        let x = x0 + (x1 - x0) * smooth(s);
        let z = h0 + (h1 - h0) * smooth(s / 0.3) + self.gait.step_height * (PI * s).sin();
        Vec3::new(x, y, z)
    }

    /// Ground-truth joints of frame `t`.
    pub fn joints(&self, t: usize) -> Vec<Vec3> {
        let time = t as f64 / self.fps;
        let lf = self.foot_position(t, 0);
        let rf = self.foot_position(t, 1);
        let ground = 0.5 * (self.ground_height(lf.x, lf.y) + self.ground_height(rf.x, rf.y));
        let px = self.gait.start[0] + self.gait.speed * time;
        let py = self.gait.start[1];
        let sway = 0.02 * (2.0 * PI * time / self.cycle()).sin();
        let pelvis = Vec3::new(px, py + sway, ground + PELVIS_HEIGHT);
        let up = |p: Vec3, dz: f64| p + Vec3::new(0.0, 0.0, dz);
        let spine = up(pelvis, 0.2);
        let chest = up(pelvis, 0.45);
        let neck = up(pelvis, 0.6);
        let head = up(pelvis, 0.72);
        let head_top = up(pelvis, 0.85);
        let l_hip = pelvis + Vec3::new(0.0, HIP_HALF_WIDTH, -0.05);
        let r_hip = pelvis + Vec3::new(0.0, -HIP_HALF_WIDTH, -0.05);
        let knee = |hip: Vec3, foot: Vec3| 0.5 * (hip + foot) + Vec3::new(0.06, 0.0, ANKLE_HEIGHT / 2.0);
        let toe = |foot: Vec3| foot + Vec3::new(FOOT_LENGTH, 0.0, 0.0);
        let arm = (2.0 * PI * time / self.cycle()).sin() * 0.15;
        let l_sh = chest + Vec3::new(0.0, 0.18, 0.1);
        let r_sh = chest + Vec3::new(0.0, -0.18, 0.1);
        vec![
            pelvis,
            spine,
            chest,
            neck,
            head,
            l_hip,
            knee(l_hip, lf),
            lf,
            toe(lf),
            r_hip,
            knee(r_hip, rf),
            rf,
            toe(rf),
            l_sh,
            l_sh + Vec3::new(-arm, 0.03, -0.55),
            r_sh,
            r_sh + Vec3::new(arm, -0.03, -0.55),
            head_top,
        ]
    }

    /// Metric hover displacement added to the emitted body at frame `t`.
    pub fn hover_offset(&self, t: usize) -> Vec3 {
        let s = if self.frames > 1 {
            t as f64 / (self.frames - 1) as f64
        } else {
            0.0
        };
        let h = &self.hover;
        Vec3::new(h.drift * s, 0.0, h.height + h.variation * (2.0 * s - 1.0))
    }
}

/// Surface samples of the stick figure. The layout depends only on the
/// joint topology, so every frame has the same vertex count.
#[derive(Debug, Clone, PartialEq)]
pub struct Skin {
    pub vertices: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    /// Downward-facing sole vertices of the left and right foot.
    pub soles: [Vec<usize>; 2],
}

const RINGS: usize = 6;
const RING_SIZE: usize = 8;

pub fn skin(joints: &[Vec3]) -> Skin {
    let mut s = Skin {
        vertices: Vec::new(),
        normals: Vec::new(),
        soles: [Vec::new(), Vec::new()],
    };
    let ankle = |j: usize| joints[j] + Vec3::new(0.0, 0.0, ANKLE_HEIGHT);
    let limbs: [(Vec3, Vec3, f64); 13] = [
        (joints[0], joints[1], 0.12),
        (joints[1], joints[2], 0.14),
        (joints[2], joints[3], 0.08),
        (joints[3], joints[17], 0.1),
        (joints[5], joints[6], 0.07),
        (joints[6], ankle(7), 0.05),
        (joints[9], joints[10], 0.07),
        (joints[10], ankle(11), 0.05),
        (joints[13], joints[14], 0.045),
        (joints[15], joints[16], 0.045),
        (joints[2], joints[13], 0.05),
        (joints[2], joints[15], 0.05),
        (joints[0], joints[0] + Vec3::new(0.0, 0.0, -0.08), 0.12),
    ];
    for (a, b, r) in limbs {
        let axis = (b - a).try_normalize(1e-12).unwrap_or_else(Vec3::z);
        let helper = if axis.z.abs() < 0.9 { Vec3::z() } else { Vec3::x() };
        let e1 = axis.cross(&helper).normalize();
        let e2 = axis.cross(&e1);
        for i in 0..RINGS {
            let c = a + (b - a) * ((i as f64 + 0.5) / RINGS as f64);
            for k in 0..RING_SIZE {
                let th = 2.0 * PI * k as f64 / RING_SIZE as f64;
                let n = e1 * th.cos() + e2 * th.sin();
                s.vertices.push(c + n * r);
                s.normals.push(n);
            }
        }
    }
    for (side, &j) in [LEFT_FOOT, RIGHT_FOOT].iter().enumerate() {
        let heel = joints[j] + Vec3::new(-0.03, 0.0, 0.0);
        for a in 0..5 {
            for b in 0..3 {
                let p = heel + Vec3::new((FOOT_LENGTH + 0.03) * a as f64 / 4.0, 0.045 * (b as f64 - 1.0), 0.0);
                s.soles[side].push(s.vertices.len());
                s.vertices.push(p);
                s.normals.push(-Vec3::z());
                s.vertices.push(p + Vec3::new(0.0, 0.0, 0.06));
                s.normals.push(Vec3::z());
            }
        }
    }
    s
}

/// Everything a synthetic run produces.
#[derive(Debug, Clone)]
pub struct SynthScene {
    pub spec: SynthSpec,
    /// Scene cloud in scene-native units.
    pub cloud: ScenePointCloud,
    pub frames: Vec<CameraFrame>,
    /// Observed body (hover applied, zero translations, `initial_scale`).
    pub body: BodySequence,
    /// Ground-truth body vertices, metric.
    pub gt_vertices: Vec<Vec<Vec3>>,
    pub gt_joints: JointTrajectory,
    /// Sole-to-ground correspondences of the stance feet.
    pub contacts: ContactSet,
    /// Ground-truth body vertices visible in each frame, metric.
    pub human_points: Vec<Vec<Vec3>>,
    /// `[left, right]` stance flags per frame.
    pub stance: Vec<[bool; 2]>,
}

fn scene_points(spec: &SynthSpec) -> (Vec<Vec3>, Vec<Vec3>) {
    let t = &spec.terrain;
    let n = (t.half_extent / t.spacing).round() as i64;
    let mut pts = Vec::new();
    let mut nrm = Vec::new();
    let [bx0, by0, bx1, by1] = t.box_footprint;
    let boxed = t.kind == TerrainKind::BoxStep;
    for i in -n..=n {
        for j in -n..=n {
            let p = Vec3::new(i as f64 * t.spacing, j as f64 * t.spacing, 0.0);
            if boxed && p.x > bx0 && p.x < bx1 && p.y > by0 && p.y < by1 {
                continue;
            }
            pts.push(p);
            nrm.push(Vec3::z());
        }
    }
    if boxed {
        let steps = |lo: f64, hi: f64| -> Vec<f64> {
            let k = ((hi - lo) / t.spacing).round().max(1.0) as usize;
            (0..=k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect()
        };
        for &x in &steps(bx0, bx1) {
            for &y in &steps(by0, by1) {
                pts.push(Vec3::new(x, y, t.box_height));
                nrm.push(Vec3::z());
            }
        }
        for &z in steps(0.0, t.box_height).iter().skip(1).take_while(|&&z| z < t.box_height) {
            for &x in &steps(bx0, bx1) {
                pts.push(Vec3::new(x, by0, z));
                nrm.push(-Vec3::y());
                pts.push(Vec3::new(x, by1, z));
                nrm.push(Vec3::y());
            }
            for &y in &steps(by0, by1) {
                pts.push(Vec3::new(bx0, y, z));
                nrm.push(-Vec3::x());
                pts.push(Vec3::new(bx1, y, z));
                nrm.push(Vec3::x());
            }
        }
    }
    (pts, nrm)
}

/// Ray parameter of the first terrain hit of `o + s d`, if any.
fn terrain_hit(spec: &SynthSpec, o: &Vec3, d: &Vec3) -> Option<f64> {
    let t = &spec.terrain;
    let extent = (t.half_extent / t.spacing).round() * t.spacing;
    let mut best = None::<f64>;
    if d.z.abs() > 1e-12 {
        let s = -o.z / d.z;
        let p = o + s * d;
        if s > 0.0 && p.x.abs() <= extent && p.y.abs() <= extent {
            best = Some(s);
        }
    }
    if t.kind == TerrainKind::BoxStep {
        let [bx0, by0, bx1, by1] = t.box_footprint;
        let (lo, hi) = (Vec3::new(bx0, by0, 0.0), Vec3::new(bx1, by1, t.box_height));
        let (mut s0, mut s1) = (0.0f64, f64::INFINITY);
        for k in 0..3 {
            if d[k].abs() < 1e-12 {
                if o[k] < lo[k] || o[k] > hi[k] {
                    return best;
                }
                continue;
            }
            let (a, b) = ((lo[k] - o[k]) / d[k], (hi[k] - o[k]) / d[k]);
            s0 = s0.max(a.min(b));
            s1 = s1.min(a.max(b));
        }
        if s0 <= s1 && s0 > 0.0 {
            best = Some(best.map_or(s0, |b| b.min(s0)));
        }
    }
    best
}

/// Ray-cast terrain depth with the body z-buffer splatted on top. Returns
/// depth, body silhouette and the indices of body points that own at least
/// one pixel.
fn render(spec: &SynthSpec, camera: &CameraFrame, body: &[Vec3], body_splat: f64) -> (DepthMap, BinaryImage, Vec<usize>) {
    let (w, h) = (camera.width, camera.height);
    let origin = -(camera.rotation.transpose() * camera.translation);
    let mut depth = vec![f32::INFINITY; w * h];
    for v in 0..h {
        for u in 0..w {
            let Some(p) = camera.unproject(u as f64, v as f64, 1.0) else { continue };
            if let Some(s) = terrain_hit(spec, &origin, &(p - origin)) {
                depth[v * w + u] = s as f32;
            }
        }
    }
    // owner: 0 terrain, k + 1 body point k
    let mut owner = vec![0usize; w * h];
    let f = camera.intrinsics[(0, 0)];
    for (k, p) in body.iter().enumerate() {
        let Ok(proj) = camera.project(p) else { continue };
        let r = (0.5 * f * body_splat / proj.depth).ceil().clamp(0.0, 8.0) as i64;
        let cu = (proj.pixel.x + 0.5).floor() as i64;
        let cv = (proj.pixel.y + 0.5).floor() as i64;
        let d = proj.depth as f32;
        for v in cv - r..=cv + r {
            for u in cu - r..=cu + r {
                if u < 0 || v < 0 || u >= w as i64 || v >= h as i64 {
                    continue;
                }
                let idx = v as usize * w + u as usize;
                if d < depth[idx] {
                    depth[idx] = d;
                    owner[idx] = k + 1;
                }
            }
        }
    }
    let depth: Vec<f32> = depth.into_iter().map(|d| if d.is_finite() { d } else { 0.0 }).collect();
    let mask = BinaryImage::from_bits(w, h, owner.iter().map(|&o| o > 0).collect()).expect("sized");
    let mut visible: Vec<usize> = owner.iter().filter(|&&o| o > 0).map(|&o| o - 1).collect();
    visible.sort_unstable();
    visible.dedup();
    (DepthMap::from_data(w, h, depth).expect("sized"), mask, visible)
}

pub fn generate(spec: &SynthSpec) -> Result<SynthScene, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (metric_pts, normals) = scene_points(spec);
    let native: Vec<Vec3> = metric_pts.iter().map(|p| p / spec.scene_scale).collect();
    let cloud = ScenePointCloud::new(native, normals)?;

    let c = &spec.camera;
    let camera = CameraFrame::look_at(
        Vec3::from(c.eye),
        Vec3::from(c.target),
        Vec3::z(),
        c.focal,
        c.width,
        c.height,
    )?;

    let mut body_frames = Vec::with_capacity(spec.frames);
    let mut frames = Vec::with_capacity(spec.frames);
    let mut gt_vertices = Vec::with_capacity(spec.frames);
    let mut gt_joints = Vec::with_capacity(spec.frames);
    let mut human_points = Vec::with_capacity(spec.frames);
    let mut contacts = ContactSet::default();
    let mut stance = Vec::with_capacity(spec.frames);

    for t in 0..spec.frames {
        let joints = spec.joints(t);
        let sk = skin(&joints);
        let flags = [spec.in_stance(t, 0), spec.in_stance(t, 1)];
        let mut pairs = Vec::new();
        for (side, on) in flags.iter().enumerate() {
            if *on {
                pairs.extend(sk.soles[side].iter().map(|&v| ContactPair {
                    point: sk.vertices[v] / spec.scene_scale,
                    vertex: v,
                }));
            }
        }
        contacts.frames.push(FrameContacts {
            frame: t,
            pairs,
            band: Vec::new(),
        });

        let keypoints = joints
            .iter()
            .map(|j| match camera.project(j) {
                Ok(p) => {
                    let mut jitter = || {
                        if spec.keypoint_noise_px > 0.0 {
                            rng.random_range(-spec.keypoint_noise_px..spec.keypoint_noise_px)
                        } else {
                            0.0
                        }
                    };
                    Keypoint {
                        u: p.pixel.x + jitter(),
                        v: p.pixel.y + jitter(),
                        confidence: 1.0,
                    }
                }
                Err(_) => Keypoint {
                    u: 0.0,
                    v: 0.0,
                    confidence: 0.0,
                },
            })
            .collect();

        let mut frame = camera.clone();
        let visible = if spec.render {
            let (depth, mask, visible) =
                render(spec, &camera, &sk.vertices, 0.05);
            frame = frame.with_depth(depth)?.with_mask(mask)?;
            visible
        } else {
            (0..sk.vertices.len()).collect()
        };
        human_points.push(visible.iter().map(|&i| sk.vertices[i]).collect());
        frames.push(frame);

        let hover = spec.hover_offset(t);
        body_frames.push(BodyFrame {
            vertices: sk.vertices.iter().map(|v| v + hover).collect(),
            normals: sk.normals.clone(),
            joints: joints.iter().map(|j| j + hover).collect(),
            keypoints,
            camera_translation: Vec3::zeros(),
        });
        gt_vertices.push(sk.vertices);
        gt_joints.push(joints);
        stance.push(flags);
    }

    let body = BodySequence::new(
        body_frames,
        vec![LEFT_FOOT, RIGHT_FOOT],
        vec![Vec3::zeros(); spec.frames],
        spec.initial_scale,
        spec.fps,
    )?;
    let gt_joints = JointTrajectory::new(gt_joints, spec.fps)
        .map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    Ok(SynthScene {
        spec: spec.clone(),
        cloud,
        frames,
        body,
        gt_vertices,
        gt_joints,
        contacts,
        human_points,
        stance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_frames_is_rejected() {
        let spec = SynthSpec {
            frames: 0,
            ..SynthSpec::default()
        };
        assert!(matches!(generate(&spec), Err(SynthError::InvalidSpec(_))));
    }

    #[test]
    fn stance_feet_rest_on_the_plane() {
        let spec = SynthSpec {
            frames: 90,
            render: false,
            ..SynthSpec::default()
        };
        let scene = generate(&spec).unwrap();
        let cycle_frames = spec.cycle() * spec.fps;
        let mut stance_frames = 0;
        for t in 0..spec.frames {
            for (side, j) in [LEFT_FOOT, RIGHT_FOOT].into_iter().enumerate() {
                let phase = (t as f64 / cycle_frames + 0.5 * side as f64).fract();
                let z = scene.gt_joints.joints[t][j].z;
                assert_eq!(scene.stance[t][side], phase < STANCE_FRACTION);
                if phase < STANCE_FRACTION {
                    assert_eq!(z, 0.0);
                    stance_frames += 1;
                } else if phase > STANCE_FRACTION + 0.01 {
                    assert!(z > 0.0, "swing foot at frame {t}");
                }
            }
        }
        assert!(stance_frames > spec.frames);
    }

    #[test]
    fn box_step_contacts_sit_on_the_box() {
        let spec = SynthSpec {
            frames: 120,
            render: false,
            terrain: TerrainSpec {
                kind: TerrainKind::BoxStep,
                ..TerrainSpec::default()
            },
            ..SynthSpec::default()
        };
        let scene = generate(&spec).unwrap();
        let heights: Vec<f64> = scene.contacts.frames.iter().flat_map(|f| f.pairs.iter().map(|p| p.point.z)).collect();
        assert!(heights.iter().any(|&z| (z - 0.4).abs() < 1e-12));
        assert!(heights.iter().all(|&z| z == 0.0 || (z - 0.4).abs() < 1e-12));
    }

    #[test]
    fn rendering_sees_the_body() {
        let spec = SynthSpec {
            frames: 3,
            ..SynthSpec::default()
        };
        let scene = generate(&spec).unwrap();
        for (f, pts) in scene.frames.iter().zip(&scene.human_points) {
            let mask = f.mask.as_ref().unwrap();
            assert!(mask.count() > 100);
            assert!(!pts.is_empty());
        }
        let again = generate(&spec).unwrap();
        assert_eq!(again.frames, scene.frames);
    }
}
