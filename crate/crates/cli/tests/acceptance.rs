//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs as part of `cargo test`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use meshalign_core::alignment::{loss_chamfer, loss_j2d, BodyFrame, BodySequence, DEFAULT_FACING_ANGLE_DEG};
use meshalign_core::contact::{frame_band, ContactPair, ContactParams, ContactSet, FrameContacts};
use meshalign_core::io::{
    read_body, read_cameras, read_contacts, read_json, read_pfm, read_pgm, read_ply, read_trajectory, read_tsdf,
    sidecar_path, write_body, write_cameras, write_contacts, write_json, write_pfm, write_pgm, write_ply,
    write_tsdf, PlyData, PlyFormat, RunManifest,
};
use meshalign_core::metrics::{
    segment_bounds, segment_error, w_mpjpe, wa_mpjpe, AlignmentKind, JointTrajectory, RigidTransform,
};
use meshalign_core::optimizer::{
    loss_contact, loss_foot_snap, loss_penetration, loss_smoothness, optimize, total_loss, AlignmentProblem,
    LossWeights, OptimizerConfig,
};
use meshalign_core::raster::{BinaryImage, DepthMap};
use meshalign_core::retarget::{
    build_interaction_mesh, correct_penetration, laplacian_energy, CorrectionParams, NodeRole, TaggedPoint,
};
use meshalign_core::scene::{chamfer, fuse_tsdf, ScenePointCloud, TsdfVolume};
use meshalign_core::synth::{generate, HoverSpec, SynthSpec, LEFT_FOOT, RIGHT_FOOT};
use meshalign_core::Vec3;
use nalgebra::{Rotation3, Unit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn v3(rng: &mut ChaCha8Rng, r: f64) -> Vec3 {
    Vec3::new(rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale < 1e-12 {
        norm(&diff)
    } else {
        norm(&diff) / scale
    }
}

fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Exact `z = 0` volume; trilinear interpolation of a linear field is exact.
fn plane_volume(truncation: f64) -> TsdfVolume {
    let (n, voxel) = (11usize, 0.05);
    let origin = Vec3::new(-0.25, -0.25, -0.25);
    let values = (0..n * n * n)
        .map(|idx| {
            let k = idx / (n * n);
            (origin.z + k as f64 * voxel).clamp(-truncation, truncation) as f32
        })
        .collect();
    TsdfVolume::from_parts(origin, voxel, [n, n, n], truncation, values, vec![1.0; n * n * n]).unwrap()
}

fn plane_cloud(half: f64, spacing: f64) -> ScenePointCloud {
    let k = (half / spacing).round() as i64;
    let pts: Vec<Vec3> = (-k..=k)
        .flat_map(|i| (-k..=k).map(move |j| Vec3::new(i as f64 * spacing, j as f64 * spacing, 0.0)))
        .collect();
    let normals = vec![Vec3::z(); pts.len()];
    ScenePointCloud::new(pts, normals).unwrap()
}

fn single_vertices(positions: &[Vec3]) -> BodySequence {
    let frame = BodyFrame {
        vertices: positions.to_vec(),
        normals: vec![Vec3::z(); positions.len()],
        joints: vec![positions[0]],
        keypoints: Vec::new(),
        camera_translation: Vec3::zeros(),
    };
    BodySequence::new(vec![frame], vec![0], vec![Vec3::zeros()], 1.0, 30.0).unwrap()
}

fn trajectory(seq: &BodySequence) -> JointTrajectory {
    JointTrajectory::new((0..seq.len()).map(|t| seq.posed_joints(t)).collect(), seq.fps).unwrap()
}

// 1 ---------------------------------------------------------------------

fn gradient_gate() -> Verdict {
    const STATES: usize = 20;
    const H: f64 = 1e-6;
    let start = Instant::now();
    let spec = SynthSpec {
        frames: 4,
        hover: HoverSpec {
            height: -0.01,
            ..HoverSpec::default()
        },
        ..SynthSpec::default()
    };
    let scene = generate(&spec).map_err(|e| e.to_string())?;
    let volume = fuse_tsdf(&scene.cloud, 0.05, 0.15, 0.3).map_err(|e| e.to_string())?;
    let problem = AlignmentProblem {
        contacts: &scene.contacts,
        volume: &volume,
        frames: &scene.frames,
        human_points: &scene.human_points,
    };
    let cfg = OptimizerConfig::default();

    type Term<'a> = Box<dyn Fn(&BodySequence) -> (f64, Vec<f64>) + 'a>;
    let terms: Vec<(&str, f64, Term)> = vec![
        ("L_J2d", 1e-6, Box::new(|s| {
            let e = loss_j2d(s, &scene.frames).unwrap().eval;
            (e.value, e.packed_gradient())
        })),
        ("L_d", 1e-6, Box::new(|s| {
            let e = loss_chamfer(s, &scene.human_points, &scene.frames, DEFAULT_FACING_ANGLE_DEG).unwrap().eval;
            (e.value, e.packed_gradient())
        })),
        ("L_c", 1e-6, Box::new(|s| {
            let e = loss_contact(s, &scene.contacts).unwrap().eval;
            (e.value, e.packed_gradient())
        })),
        ("L_sm", 1e-6, Box::new(|s| {
            let e = loss_smoothness(s, false).unwrap().eval;
            (e.value, e.packed_gradient())
        })),
        ("L_p", 1e-4, Box::new(|s| {
            let e = loss_penetration(s, &volume, cfg.slack, cfg.huber_delta).eval;
            (e.value, e.packed_gradient())
        })),
        ("L_fs", 1e-4, Box::new(|s| {
            let e = loss_foot_snap(s, &volume, cfg.contact_threshold).eval;
            (e.value, e.packed_gradient())
        })),
        ("total", 1e-4, Box::new(|s| {
            let e = total_loss(s, &problem, &cfg).unwrap().eval;
            (e.value, e.packed_gradient())
        })),
    ];

    let mut worst = Vec::new();
    for (name, tol, eval) in &terms {
        let mut r = rng(1000);
        let mut max_gap = 0.0f64;
        let mut nonzero = 0;
        for _ in 0..STATES {
            let mut seq = scene.body.clone();
            for t in &mut seq.translations {
                *t = v3(&mut r, 0.06);
            }
            seq.scale = r.random_range(0.95..1.05);
            let (value, analytic) = eval(&seq);
            if value > 0.0 {
                nonzero += 1;
            }
            let numeric = central_difference(
                |x| {
                    let mut s = seq.clone();
                    s.unpack(x);
                    eval(&s).0
                },
                &seq.pack(),
                H,
            );
            max_gap = max_gap.max(relative_error(&analytic, &numeric));
        }
        ensure!(max_gap < *tol, "{name}: relative error {max_gap:.2e} exceeds {tol:e}");
        ensure!(nonzero > STATES / 2, "{name}: only {nonzero} of {STATES} states exercise the term");
        worst.push(format!("{name} {max_gap:.1e}"));
    }

    // Laplacian energy over the target body nodes.
    let mut r = rng(2000);
    let mut max_gap = 0.0f64;
    let mut states = 0;
    while states < STATES {
        let body: Vec<Vec3> = (0..6).map(|_| v3(&mut r, 1.0)).collect();
        let terrain: Vec<TaggedPoint> = (0..10)
            .map(|_| TaggedPoint {
                position: v3(&mut r, 1.0),
                role: NodeRole::TerrainGlobal,
            })
            .collect();
        let Ok(mesh) = build_interaction_mesh(&body, &terrain) else {
            continue;
        };
        let nb = mesh.body_count();
        let mut target = mesh.nodes.clone();
        for t in target.iter_mut().take(nb) {
            *t += v3(&mut r, 0.1);
        }
        let x: Vec<f64> = target[..nb].iter().flat_map(|p| p.iter().copied()).collect();
        let numeric = central_difference(
            |flat| {
                let mut t = target.clone();
                for k in 0..nb {
                    t[k] = Vec3::new(flat[3 * k], flat[3 * k + 1], flat[3 * k + 2]);
                }
                laplacian_energy(&mesh, &mesh.nodes, &t).unwrap().0
            },
            &x,
            H,
        );
        let (_, grad) = laplacian_energy(&mesh, &mesh.nodes, &target).unwrap();
        let analytic: Vec<f64> = grad.iter().flat_map(|g| g.iter().copied()).collect();
        max_gap = max_gap.max(relative_error(&analytic, &numeric));
        states += 1;
    }
    ensure!(max_gap < 1e-6, "Laplacian: relative error {max_gap:.2e} exceeds 1e-6");
    worst.push(format!("Laplacian {max_gap:.1e}"));

    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("max relative error: {}", worst.join(", ")))
}

// 2 ---------------------------------------------------------------------

fn contact_arithmetic() -> Verdict {
    let vertex = Vec3::new(0.0, 0.0, 0.1);
    let seq = single_vertices(&[vertex]);
    let contacts = ContactSet {
        frames: vec![FrameContacts {
            frame: 0,
            pairs: vec![ContactPair {
                point: Vec3::zeros(),
                vertex: 0,
            }],
            band: Vec::new(),
        }],
    };
    let l = loss_contact(&seq, &contacts).map_err(|e| e.to_string())?;
    // Residual offset from the body vertex to the scaled scene contact.
    let offset = Vec3::zeros() * seq.scale - vertex;
    let grad = l.eval.grad_translations[0];
    ensure!((l.eval.value - 0.01).abs() <= 1e-12, "loss {}", l.eval.value);
    ensure!((grad + 2.0 * offset).norm() <= 1e-12, "gradient {grad:?} vs {:?}", -2.0 * offset);
    Ok(format!("loss {:.12}, dL/dt = {:?}", l.eval.value, grad.as_slice()))
}

// 3 ---------------------------------------------------------------------

fn slack_behaviour() -> Verdict {
    let volume = plane_volume(0.2);
    let (tau, delta) = (0.01, 0.01);
    let mut verts = vec![
        Vec3::new(0.0, 0.0, 0.05),
        Vec3::new(0.05, 0.0, 0.0),
        Vec3::new(-0.05, 0.02, -0.005),
        Vec3::new(0.02, -0.03, -0.0099),
    ];
    let p = loss_penetration(&single_vertices(&verts), &volume, tau, delta);
    ensure!(p.eval.value == 0.0, "shallow body penalized: {}", p.eval.value);
    ensure!(
        p.eval.packed_gradient().iter().all(|g| *g == 0.0),
        "shallow body has a gradient"
    );

    verts[1].z = -(tau + delta / 2.0);
    let p = loss_penetration(&single_vertices(&verts), &volume, tau, delta);
    // Penetration beyond the slack is delta/2, inside the quadratic branch;
    // the loss is the mean over all four vertices.
    let by_hand = 0.5 * (delta / 2.0) * (delta / 2.0) / 4.0;
    ensure!((p.eval.value - by_hand).abs() < 1e-9, "{} vs {by_hand}", p.eval.value);
    ensure!(p.active.len() == 1, "{} active vertices", p.active.len());
    Ok(format!("zero inside the slack; sunk vertex gives {:.4e} (hand {by_hand:.4e})", p.eval.value))
}

// 4 ---------------------------------------------------------------------

fn scale_recovery() -> Verdict {
    let mut lines = Vec::new();
    for factor in [0.5, 1.25, 2.0] {
        let start = Instant::now();
        let spec = SynthSpec {
            frames: 30,
            scene_scale: factor,
            render: false,
            ..SynthSpec::default()
        };
        let scene = generate(&spec).map_err(|e| e.to_string())?;
        let volume = fuse_tsdf(&scene.cloud, 0.05, 0.15, 0.3).map_err(|e| e.to_string())?;
        let problem = AlignmentProblem {
            contacts: &scene.contacts,
            volume: &volume,
            frames: &scene.frames,
            human_points: &scene.human_points,
        };
        let cfg = OptimizerConfig {
            weights: LossWeights {
                contact: 1.0,
                ..LossWeights::zero()
            },
            optimize_translations: false,
            scale_step: 1e-2,
            ..OptimizerConfig::default()
        };
        let (_, report) = optimize(&scene.body, &problem, &cfg).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let rel = (report.final_scale - factor).abs() / factor;
        ensure!(rel <= 0.01, "factor {factor}: recovered {}", report.final_scale);
        ensure!(report.iterations.len() <= 501, "factor {factor}: {} iterations", report.iterations.len());
        ensure!(elapsed < Duration::from_secs(30), "factor {factor}: {elapsed:?}");
        lines.push(format!("{factor} -> {:.5}", report.final_scale));
    }
    Ok(lines.join(", "))
}

// 5 ---------------------------------------------------------------------

fn hover_repair() -> Verdict {
    let spec = SynthSpec {
        frames: 120,
        hover: HoverSpec {
            height: 0.05,
            variation: 0.02,
            drift: 0.1,
        },
        ..SynthSpec::default()
    };
    let scene = generate(&spec).map_err(|e| e.to_string())?;
    let volume = fuse_tsdf(&scene.cloud, 0.05, 0.15, 0.3).map_err(|e| e.to_string())?;
    let feet = [LEFT_FOOT, RIGHT_FOOT];
    let stance_foot_distance = |joints: &dyn Fn(usize, usize) -> Vec3, scale: f64| {
        let mut sum = 0.0;
        let mut n = 0;
        for t in 0..spec.frames {
            for (side, &j) in feet.iter().enumerate() {
                if scene.stance[t][side] {
                    sum += volume.query_metric(&joints(t, j), scale).distance.abs();
                    n += 1;
                }
            }
        }
        sum / n as f64
    };

    // Construction oracle: the ground truth rests on the fused plane, and the
    // hovered input is measurably worse.
    let gt_d = stance_foot_distance(&|t, j| scene.gt_joints.joints[t][j], 1.0);
    let before_d = stance_foot_distance(&|t, j| scene.body.posed_joint(t, j), 1.0);
    ensure!(gt_d < 0.005, "fixture: ground-truth feet {gt_d:.4} m off the plane");
    let before = w_mpjpe(&trajectory(&scene.body), &scene.gt_joints, 100, AlignmentKind::Rigid)
        .map_err(|e| e.to_string())?
        .aggregate_mm;
    ensure!(before > 10.0, "fixture: input W-MPJPE only {before:.2} mm");

    let problem = AlignmentProblem {
        contacts: &scene.contacts,
        volume: &volume,
        frames: &scene.frames,
        human_points: &scene.human_points,
    };
    let (out, report) = optimize(&scene.body, &problem, &OptimizerConfig::default()).map_err(|e| e.to_string())?;
    let after_d = stance_foot_distance(&|t, j| out.posed_joint(t, j), out.scale);
    let after = w_mpjpe(&trajectory(&out), &scene.gt_joints, 100, AlignmentKind::Rigid)
        .map_err(|e| e.to_string())?
        .aggregate_mm;
    ensure!(after_d < 0.01, "mean stance-foot |d| {after_d:.4} m");
    ensure!(after <= 0.6 * before, "W-MPJPE {before:.2} -> {after:.2} mm");
    Ok(format!(
        "foot |d| {:.1} -> {:.1} mm, W-MPJPE {before:.2} -> {after:.2} mm ({} iterations)",
        1e3 * before_d,
        1e3 * after_d,
        report.iterations.len()
    ))
}

// 6 ---------------------------------------------------------------------

fn penetration_correction() -> Verdict {
    let voxel = 0.05;
    let volume = fuse_tsdf(&plane_cloud(1.0, 0.025), voxel, 0.15, 0.3).map_err(|e| e.to_string())?;
    let radius = 0.1;
    let mut sphere = vec![Vec3::new(0.0, 0.0, -radius), Vec3::new(0.0, 0.0, radius)];
    for i in 1..16 {
        let theta = std::f64::consts::PI * i as f64 / 16.0;
        for j in 0..32 {
            let phi = std::f64::consts::PI * j as f64 / 16.0;
            sphere.push(radius * Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), -theta.cos()));
        }
    }
    let safety = -0.01;
    let params = CorrectionParams::for_volume(&volume, 1.0, safety, 1.0);
    let r = correct_penetration(&volume, &sphere, &params).map_err(|e| e.to_string())?;
    let analytic = radius - safety.abs();
    let min_at = |eta: f64| {
        sphere
            .iter()
            .map(|v| volume.query_metric(&(v + r.direction * eta), 1.0).distance)
            .fold(f64::INFINITY, f64::min)
    };
    ensure!((r.magnitude - analytic).abs() <= voxel / 2.0, "eta {} vs {analytic}", r.magnitude);
    ensure!(r.post_min_sdf >= safety, "post-min-SDF {}", r.post_min_sdf);
    ensure!(min_at(r.magnitude - 2e-4) < safety, "eta - 2e-4 is still feasible");
    Ok(format!(
        "eta {:.4} m (analytic {analytic:.4}), min SDF {:.4} -> {:.4}",
        r.magnitude, r.pre_min_sdf, r.post_min_sdf
    ))
}

// 7 ---------------------------------------------------------------------

fn random_rigid(r: &mut ChaCha8Rng) -> RigidTransform {
    let axis = v3(r, 1.0) + Vec3::new(0.0, 0.0, 1e-3);
    RigidTransform {
        rotation: *Rotation3::from_axis_angle(&Unit::new_normalize(axis), r.random_range(-3.0..3.0)).matrix(),
        translation: v3(r, 2.0),
        scale: 1.0,
    }
}

fn walker(frames: usize, joints: usize, r: &mut ChaCha8Rng) -> JointTrajectory {
    let pose: Vec<Vec3> = (0..joints).map(|_| v3(r, 0.5) + Vec3::new(0.0, 0.0, 0.8)).collect();
    let data = (0..frames)
        .map(|f| {
            let t = f as f64 / 30.0;
            pose.iter()
                .enumerate()
                .map(|(j, p)| p + Vec3::new(0.8 * t, 0.05 * (3.0 * t + j as f64).sin(), 0.02 * (5.0 * t).cos()))
                .collect()
        })
        .collect();
    JointTrajectory::new(data, 30.0).unwrap()
}

fn metrics_protocol() -> Verdict {
    let mut r = rng(7);
    let fail = |e: meshalign_core::metrics::MetricsError| e.to_string();

    // (a) every segment moved by its own rigid transform
    let gt = walker(250, 10, &mut r);
    let mut pred = gt.clone();
    for seg in segment_bounds(gt.len(), 100).map_err(fail)? {
        let tf = random_rigid(&mut r);
        for f in seg.start..seg.end {
            pred.joints[f] = gt.joints[f].iter().map(|p| tf.apply(p)).collect();
        }
    }
    let w = w_mpjpe(&pred, &gt, 100, AlignmentKind::Rigid).map_err(fail)?.aggregate_mm;
    let wa = wa_mpjpe(&pred, &gt, 100, AlignmentKind::Rigid).map_err(fail)?.aggregate_mm;
    ensure!(w < 1e-6 && wa < 1e-6, "(a) W {w:e} mm, WA {wa:e} mm");

    // (b) static pose drifting linearly: the two-frame fit removes half a
    // step, so frame f of a segment keeps |f - 1/2| of the drift.
    let pose = [
        Vec3::new(0.1, 0.0, 0.0),
        Vec3::new(-0.2, 0.3, 0.1),
        Vec3::new(0.0, -0.1, 1.0),
        Vec3::new(0.3, 0.2, 1.4),
    ];
    let v = Vec3::new(0.004, -0.002, 0.001);
    let gt = JointTrajectory::new(vec![pose.to_vec(); 250], 30.0).unwrap();
    let drift = JointTrajectory::new(
        (0..250).map(|f| pose.iter().map(|p| p + v * f as f64).collect()).collect(),
        30.0,
    )
    .unwrap();
    let mut worst = 0.0f64;
    for s in w_mpjpe(&drift, &gt, 100, AlignmentKind::Rigid).map_err(fail)?.segments {
        let l = s.segment.len() as f64;
        let oracle = 1e3 * v.norm() * (1.0 + (l - 1.0) * (l - 1.0)) / (2.0 * l);
        worst = worst.max((s.mpjpe_mm - oracle).abs());
    }
    ensure!(worst < 1e-6, "(b) off by {worst:e} mm");

    // (c) whole-segment fit never leaves a larger residual than the
    // two-frame transform
    for trial in 0..100 {
        let frames = r.random_range(3..60);
        let gt = walker(frames, 8, &mut r);
        let tf = random_rigid(&mut r);
        let noisy = JointTrajectory::new(
            gt.transformed(&tf)
                .joints
                .iter()
                .map(|f| f.iter().map(|p| p + v3(&mut r, 0.05)).collect())
                .collect(),
            30.0,
        )
        .unwrap();
        let len = r.random_range(2..25);
        let w = w_mpjpe(&noisy, &gt, len, AlignmentKind::Rigid).map_err(fail)?;
        let wa = wa_mpjpe(&noisy, &gt, len, AlignmentKind::Rigid).map_err(fail)?;
        for (a, b) in wa.segments.iter().zip(&w.segments) {
            let under_w = segment_error(&noisy, &gt, a.segment, b.transform);
            ensure!(a.rms_mm <= under_w.rms_mm + 1e-9, "(c) trial {trial}: {} > {}", a.rms_mm, under_w.rms_mm);
        }
    }
    Ok(format!("(a) {w:.1e}/{wa:.1e} mm, (b) max gap {worst:.1e} mm, (c) 100 trials"))
}

// 8 ---------------------------------------------------------------------

type Pixels = BTreeSet<(i64, i64)>;

fn square(p: (i64, i64), r: usize) -> impl Iterator<Item = (i64, i64)> {
    let r = r as i64;
    (-r..=r).flat_map(move |dy| (-r..=r).map(move |dx| (p.0 + dx, p.1 + dy)))
}

fn band_oracle(mask: &BinaryImage, depth: &DepthMap, p: &ContactParams) -> Pixels {
    let (w, h) = mask.size();
    let inside = |(x, y): (i64, i64)| x >= 0 && y >= 0 && x < w as i64 && y < h as i64;
    let all: Vec<(i64, i64)> = (0..h as i64).flat_map(|y| (0..w as i64).map(move |x| (x, y))).collect();
    let dilate = |s: &Pixels, r: usize| -> Pixels {
        all.iter().copied().filter(|&q| square(q, r).any(|n| s.contains(&n))).collect()
    };
    let erode = |s: &Pixels, r: usize| -> Pixels {
        all.iter()
            .copied()
            .filter(|&q| square(q, r).filter(|&n| inside(n)).all(|n| s.contains(&n)))
            .collect()
    };
    let m: Pixels = mask.set_pixels().map(|(x, y)| (x as i64, y as i64)).collect();
    let valid = |(x, y): (i64, i64)| depth.is_valid(x as usize, y as usize);
    let at = |(x, y): (i64, i64)| depth.get(x as usize, y as usize) as f64;
    let edges: Pixels = all
        .iter()
        .copied()
        .filter(|&q| {
            !valid(q)
                || [(1, 0), (-1, 0), (0, 1), (0, -1)]
                    .iter()
                    .map(|(dx, dy)| (q.0 + dx, q.1 + dy))
                    .filter(|&n| inside(n))
                    .any(|n| !valid(n) || (at(n) - at(q)).abs() > p.rel_threshold * at(q))
        })
        .collect();
    let boundary: Pixels = dilate(&m, 1).difference(&erode(&m, 1)).copied().collect();
    let raw: Pixels = boundary.difference(&dilate(&edges, p.excl_radius)).copied().collect();
    dilate(&raw, p.band_radius)
}

fn contact_band_oracle() -> Verdict {
    let mut r = rng(8);
    let mut pixels = 0;
    for case in 0..50 {
        let (w, h) = (r.random_range(8..40), r.random_range(8..30));
        let noise = BinaryImage::from_bits(w, h, (0..w * h).map(|_| r.random_bool(0.5)).collect()).unwrap();
        let mask = noise.erode(1).dilate(1);
        let cells: Vec<(f32, u8)> = (0..w * h).map(|_| (r.random_range(0.5..4.0), r.random_range(0..10))).collect();
        let depth = DepthMap::from_fn(w, h, |x, y| match cells[y * w + x] {
            (_, 0) => 0.0,
            (d, 1) => d,
            _ => 2.0 + 0.01 * x as f32 + if x > w / 2 { 1.0 } else { 0.0 },
        });
        let p = ContactParams {
            excl_radius: r.random_range(0..4),
            band_radius: r.random_range(0..3),
            rel_threshold: r.random_range(0.02..0.3),
            ..ContactParams::default()
        };
        let band: Pixels = frame_band(&mask, &depth, &p)
            .map_err(|e| e.to_string())?
            .set_pixels()
            .map(|(x, y)| (x as i64, y as i64))
            .collect();
        let oracle = band_oracle(&mask, &depth, &p);
        ensure!(band == oracle, "fixture {case}: {} vs {} pixels", band.len(), oracle.len());
        pixels += band.len();
    }
    Ok(format!("50 fixtures, {pixels} band pixels, exact set equality"))
}

// 9 ---------------------------------------------------------------------

fn tsdf_oracle() -> Verdict {
    let voxel = 0.05;
    let volume = fuse_tsdf(&plane_cloud(1.0, 0.025), voxel, 0.15, 0.3).map_err(|e| e.to_string())?;
    let mut r = rng(9);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 1000 {
        let p = Vec3::new(r.random_range(-0.9..0.9), r.random_range(-0.9..0.9), r.random_range(-0.12..0.12));
        let s = volume.query(&p);
        if !s.observed {
            continue;
        }
        worst = worst.max((s.distance - p.z).abs());
        checked += 1;
    }
    ensure!(worst <= voxel / 2.0, "SDF off by {worst} m");

    let scan = |a: &[Vec3], b: &[Vec3]| {
        let one = |from: &[Vec3], to: &[Vec3]| {
            from.iter()
                .map(|p| to.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
                .sum::<f64>()
                / from.len() as f64
        };
        0.5 * (one(a, b) + one(b, a))
    };
    let mut chamfer_gap = 0.0f64;
    for _ in 0..20 {
        let a: Vec<Vec3> = (0..50).map(|_| v3(&mut r, 1.0)).collect();
        let b: Vec<Vec3> = (0..50).map(|_| v3(&mut r, 1.0)).collect();
        chamfer_gap = chamfer_gap.max((chamfer(&a, &b).map_err(|e| e.to_string())? - scan(&a, &b)).abs());
    }
    ensure!(chamfer_gap < 1e-9, "Chamfer off by {chamfer_gap:e}");
    Ok(format!("SDF max error {:.2} mm over 1000 points, Chamfer gap {chamfer_gap:.1e}", 1e3 * worst))
}

// 10 --------------------------------------------------------------------

fn meshalign(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_meshalign"))
        .args(args)
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("meshalign {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))
    }
}

fn pipeline(dir: &Path) -> Result<(), String> {
    std::fs::write(
        dir.join("spec.json"),
        r#"{"seed": 5, "frames": 10, "keypoint_noise_px": 0.5, "hover": {"height": 0.04, "drift": 0.02}}"#,
    )
    .map_err(|e| e.to_string())?;
    let robot: Vec<Vec3> = (0..40)
        .map(|i| {
            let a = i as f64 * 0.7;
            Vec3::new(0.1 * a.cos(), 0.1 * a.sin(), 0.05 * (i % 5) as f64 - 0.04)
        })
        .collect();
    write_ply(
        &dir.join("robot.ply"),
        &PlyData {
            points: robot,
            normals: None,
            comments: Vec::new(),
        },
        PlyFormat::Ascii,
    )
    .map_err(|e| e.to_string())?;

    let steps: [&[&str]; 8] = [
        &["synth", "--spec", "spec.json", "--out", "s"],
        &["fuse", "--cloud", "s/scene.ply", "--out", "v.tsdf"],
        &[
            "contacts", "--cloud", "s/scene.ply", "--cameras", "s/cameras.json", "--body", "s/body.json", "--out",
            "c.jsonl", "--band-dir", "bands",
        ],
        &[
            "optimize", "--body", "s/body.json", "--cameras", "s/cameras.json", "--tsdf", "v.tsdf", "--contacts",
            "c.jsonl", "--human-points", "s/human_points.csv", "--max-iterations", "25", "--out", "opt", "--plot",
        ],
        &["correct", "--tsdf", "v.tsdf", "--vertices", "robot.ply", "--out", "corr.json", "--corrected", "fixed.ply"],
        &[
            "retarget-energy", "--cloud", "s/scene.ply", "--source", "s/gt_joints.csv", "--target",
            "opt/trajectory.csv", "--seed", "3", "--out", "energy.json", "--mesh", "mesh.json", "--samples",
            "samples.ply",
        ],
        &[
            "evaluate", "--pred", "opt/trajectory.csv", "--gt", "s/gt_joints.csv", "--segment-len", "5",
            "--pred-cloud", "s/scene.ply", "--gt-cloud", "s/scene.ply", "--cameras", "s/cameras.json", "--out",
            "eval.json", "--table", "eval.txt", "--plot", "eval.svg",
        ],
        &["plot", "--loss-curve", "opt/loss_curve.csv", "--out", "loss.svg"],
    ];
    for args in steps {
        meshalign(dir, args)?;
    }
    Ok(())
}

fn files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn round_trips(dir: &Path) -> Result<usize, String> {
    let scratch = tempfile::tempdir().map_err(|e| e.to_string())?;
    let tmp = |name: &str| scratch.path().join(name);
    let err = |e: meshalign_core::io::IoError| e.to_string();
    let same_bytes = |a: &Path, b: &Path| std::fs::read(a).ok() == std::fs::read(b).ok();
    let mut checked = 0;

    for (name, format) in [("s/scene.ply", PlyFormat::BinaryLittleEndian), ("robot.ply", PlyFormat::Ascii)] {
        let data = read_ply(&dir.join(name)).map_err(err)?;
        write_ply(&tmp("x.ply"), &data, format).map_err(err)?;
        ensure!(same_bytes(&dir.join(name), &tmp("x.ply")), "{name} changed on rewrite");
        checked += 1;
    }
    let v = read_tsdf(&dir.join("v.tsdf")).map_err(err)?;
    write_tsdf(&tmp("x.tsdf"), &v).map_err(err)?;
    ensure!(same_bytes(&dir.join("v.tsdf"), &tmp("x.tsdf")), "TSDF changed on rewrite");
    let d = read_pfm(&dir.join("s/cameras.depth.0000.pfm")).map_err(err)?;
    write_pfm(&tmp("x.pfm"), &d).map_err(err)?;
    ensure!(same_bytes(&dir.join("s/cameras.depth.0000.pfm"), &tmp("x.pfm")), "PFM changed on rewrite");
    let m = read_pgm(&dir.join("s/cameras.mask.0000.pgm")).map_err(err)?;
    write_pgm(&tmp("x.pgm"), &m).map_err(err)?;
    ensure!(same_bytes(&dir.join("s/cameras.mask.0000.pgm"), &tmp("x.pgm")), "PGM changed on rewrite");
    let c = read_contacts(&dir.join("c.jsonl")).map_err(err)?;
    write_contacts(&tmp("x.jsonl"), &c).map_err(err)?;
    ensure!(same_bytes(&dir.join("c.jsonl"), &tmp("x.jsonl")), "contacts changed on rewrite");
    checked += 4;

    let cams = read_cameras(&dir.join("s/cameras.json")).map_err(err)?;
    write_cameras(&tmp("cams.json"), &cams, None).map_err(err)?;
    ensure!(read_cameras(&tmp("cams.json")).map_err(err)? == cams, "cameras differ after round trip");
    let body = read_body(&dir.join("opt/body.json")).map_err(err)?;
    write_body(&tmp("body.json"), &body, None).map_err(err)?;
    ensure!(read_body(&tmp("body.json")).map_err(err)? == body, "body differs after round trip");
    let traj = read_trajectory(&dir.join("opt/trajectory.csv"), 30.0).map_err(err)?;
    meshalign_core::io::write_trajectory(&tmp("t.csv"), &traj, None).map_err(err)?;
    ensure!(read_trajectory(&tmp("t.csv"), 30.0).map_err(err)? == traj, "trajectory differs after round trip");
    let side = sidecar_path(&dir.join("eval.json"));
    let manifest: RunManifest = read_json(&side).map_err(err)?;
    write_json(&tmp("m.json"), &manifest).map_err(err)?;
    ensure!(same_bytes(&side, &tmp("m.json")), "manifest changed on rewrite");
    checked += 4;
    Ok(checked)
}

fn determinism_and_round_trip() -> Verdict {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    pipeline(a.path())?;
    pipeline(b.path())?;
    let (fa, fb) = (files(a.path()), files(b.path()));
    ensure!(fa == fb, "runs produced different file sets");
    for f in &fa {
        let same = std::fs::read(a.path().join(f)).ok() == std::fs::read(b.path().join(f)).ok();
        ensure!(same, "{} differs between runs", f.display());
    }
    let formats = round_trips(a.path())?;
    Ok(format!("8 commands, {} files byte-identical; {formats} formats round-trip", fa.len()))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Verdict); 10] = [
        (1, "gradient gate", gradient_gate),
        (2, "contact loss arithmetic", contact_arithmetic),
        (3, "penetration slack", slack_behaviour),
        (4, "scale recovery", scale_recovery),
        (5, "hover repair", hover_repair),
        (6, "penetration correction", penetration_correction),
        (7, "metrics protocol", metrics_protocol),
        (8, "contact band", contact_band_oracle),
        (9, "TSDF and Chamfer oracles", tsdf_oracle),
        (10, "determinism and round trip", determinism_and_round_trip),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{secs:.1} s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {why} [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
