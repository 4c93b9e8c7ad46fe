mod common;

use meshalign_core::metrics::{
    segment_bounds, segment_error, w_mpjpe, wa_mpjpe, AlignmentKind, JointTrajectory, RigidTransform,
};
use meshalign_core::Vec3;
use nalgebra::{Rotation3, Unit};
use proptest::prelude::*;
use rand::Rng;

fn random_rigid(rng: &mut rand_chacha::ChaCha8Rng) -> RigidTransform {
    let axis = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    RigidTransform {
        rotation: *Rotation3::from_axis_angle(&Unit::new_normalize(axis), rng.random_range(-3.0..3.0)).matrix(),
        translation: Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
        scale: 1.0,
    }
}

/// Wobbly walker with distinct joints in every frame.
fn walker(frames: usize, joints: usize, rng: &mut rand_chacha::ChaCha8Rng) -> JointTrajectory {
    let pose: Vec<Vec3> = (0..joints)
        .map(|_| Vec3::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(0.0..1.7)))
        .collect();
    let data = (0..frames)
        .map(|f| {
            let t = f as f64 / 30.0;
            pose.iter()
                .enumerate()
                .map(|(j, p)| p + Vec3::new(0.8 * t, 0.05 * (t * 3.0 + j as f64).sin(), 0.02 * (t * 5.0).cos()))
                .collect()
        })
        .collect();
    JointTrajectory::new(data, 30.0).unwrap()
}

fn noisy(t: &JointTrajectory, sigma: f64, rng: &mut rand_chacha::ChaCha8Rng) -> JointTrajectory {
    let data = t
        .joints
        .iter()
        .map(|f| {
            f.iter()
                .map(|p| p + Vec3::new(rng.random_range(-sigma..sigma), rng.random_range(-sigma..sigma), rng.random_range(-sigma..sigma)))
                .collect()
        })
        .collect();
    JointTrajectory::new(data, t.fps).unwrap()
}

/// Static pose drifting by `v` per frame.
fn drifting(pose: &[Vec3], frames: usize, v: Vec3) -> (JointTrajectory, JointTrajectory) {
    let gt = JointTrajectory::new(vec![pose.to_vec(); frames], 30.0).unwrap();
    let pred = (0..frames)
        .map(|f| pose.iter().map(|p| p + v * f as f64).collect())
        .collect();
    (JointTrajectory::new(pred, 30.0).unwrap(), gt)
}

#[test]
fn linear_drift_matches_closed_form() {
    let pose = [
        Vec3::new(0.1, 0.0, 0.0),
        Vec3::new(-0.2, 0.3, 0.1),
        Vec3::new(0.0, -0.1, 1.0),
        Vec3::new(0.3, 0.2, 1.4),
    ];
    let v = Vec3::new(0.004, -0.002, 0.001);
    let (frames, len) = (250, 100);
    let (pred, gt) = drifting(&pose, frames, v);
    let w = w_mpjpe(&pred, &gt, len, AlignmentKind::Rigid).unwrap();
    let wa = wa_mpjpe(&pred, &gt, len, AlignmentKind::Rigid).unwrap();
    for s in &w.segments {
        // Fit on the first two frames removes v/2; frame f keeps |f - 1/2| v.
        let l = s.segment.len() as f64;
        let oracle = 1e3 * v.norm() * (1.0 + (l - 1.0) * (l - 1.0)) / (2.0 * l);
        assert!((s.mpjpe_mm - oracle).abs() < 1e-6, "{} vs {oracle}", s.mpjpe_mm);
    }
    for s in &wa.segments {
        let l = s.segment.len();
        let mid = (l - 1) as f64 / 2.0;
        let oracle = 1e3 * v.norm() * (0..l).map(|f| (f as f64 - mid).abs()).sum::<f64>() / l as f64;
        assert!((s.mpjpe_mm - oracle).abs() < 1e-6, "{} vs {oracle}", s.mpjpe_mm);
    }
}

#[test]
fn per_segment_rigid_motion_scores_zero() {
    let mut rng = common::rng(4);
    let gt = walker(230, 12, &mut rng);
    let bounds = segment_bounds(gt.len(), 100).unwrap();
    let mut pred = gt.clone();
    for seg in &bounds {
        let tf = random_rigid(&mut rng);
        for f in seg.start..seg.end {
            pred.joints[f] = gt.joints[f].iter().map(|p| tf.apply(p)).collect();
        }
    }
    let w = w_mpjpe(&pred, &gt, 100, AlignmentKind::Rigid).unwrap();
    let wa = wa_mpjpe(&pred, &gt, 100, AlignmentKind::Rigid).unwrap();
    assert!(w.aggregate_mm < 1e-6, "{}", w.aggregate_mm);
    assert!(wa.aggregate_mm < 1e-6, "{}", wa.aggregate_mm);
}

#[test]
fn whole_segment_fit_dominates_two_frame_fit() {
    let mut rng = common::rng(11);
    for _ in 0..100 {
        let frames = rng.random_range(3..40);
        let gt = walker(frames, 8, &mut rng);
        let pred = noisy(&gt.transformed(&random_rigid(&mut rng)), 0.05, &mut rng);
        let len = rng.random_range(2..20);
        let w = w_mpjpe(&pred, &gt, len, AlignmentKind::Rigid).unwrap();
        let wa = wa_mpjpe(&pred, &gt, len, AlignmentKind::Rigid).unwrap();
        for (a, b) in wa.segments.iter().zip(&w.segments) {
            let under_w = segment_error(&pred, &gt, a.segment, b.transform);
            assert!(a.rms_mm <= under_w.rms_mm + 1e-9);
        }
    }
}

proptest! {
    #[test]
    fn segments_cover_every_frame_once(frames in 2usize..600, len in 2usize..150) {
        let segs = segment_bounds(frames, len).unwrap();
        prop_assert_eq!(segs[0].start, 0);
        prop_assert_eq!(segs.last().unwrap().end, frames);
        for pair in segs.windows(2) {
            prop_assert_eq!(pair[0].end, pair[1].start);
        }
        for s in &segs {
            prop_assert!(s.len() >= 2);
        }
    }

    #[test]
    fn metrics_ignore_a_common_rigid_motion(seed in any::<u64>(), frames in 4usize..60, len in 2usize..30) {
        let mut rng = common::rng(seed);
        let gt = walker(frames, 6, &mut rng);
        let pred = noisy(&gt, 0.03, &mut rng);
        let tf = random_rigid(&mut rng);
        for kind in [AlignmentKind::Rigid, AlignmentKind::Similarity] {
            let a = w_mpjpe(&pred, &gt, len, kind).unwrap().aggregate_mm;
            let b = w_mpjpe(&pred.transformed(&tf), &gt.transformed(&tf), len, kind).unwrap().aggregate_mm;
            prop_assert!((a - b).abs() < 1e-6 * a.max(1.0));
            let a = wa_mpjpe(&pred, &gt, len, kind).unwrap().aggregate_mm;
            let b = wa_mpjpe(&pred.transformed(&tf), &gt.transformed(&tf), len, kind).unwrap().aggregate_mm;
            prop_assert!((a - b).abs() < 1e-6 * a.max(1.0));
        }
    }

    #[test]
    fn aggregate_is_joint_weighted(seed in any::<u64>(), frames in 4usize..90, len in 2usize..40) {
        let mut rng = common::rng(seed);
        let gt = walker(frames, 5, &mut rng);
        let pred = noisy(&gt, 0.02, &mut rng);
        let r = wa_mpjpe(&pred, &gt, len, AlignmentKind::Rigid).unwrap();
        let total: usize = r.segments.iter().map(|s| s.joint_count).sum();
        let mean = r.segments.iter().map(|s| s.mpjpe_mm * s.joint_count as f64).sum::<f64>() / total as f64;
        prop_assert!((mean - r.aggregate_mm).abs() < 1e-9);
        prop_assert_eq!(total, frames * 5);
    }
}
