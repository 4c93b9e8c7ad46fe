#![allow(dead_code)]

use meshalign_core::alignment::BodySequence;
use meshalign_core::scene::{fuse_tsdf, TsdfVolume};
use meshalign_core::synth::{generate, HoverSpec, SynthScene, SynthSpec};
use meshalign_core::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Short rendered walk over the plane, fused at 5 cm.
pub fn walk_fixture(frames: usize) -> (SynthScene, TsdfVolume) {
    let spec = SynthSpec {
        frames,
        hover: HoverSpec {
            height: -0.01,
            variation: 0.0,
            drift: 0.0,
        },
        ..SynthSpec::default()
    };
    let scene = generate(&spec).expect("valid spec");
    let volume = fuse_tsdf(&scene.cloud, 0.05, 0.15, 0.3).expect("fusable");
    (scene, volume)
}

/// Copy of `seq` with random translations in ±`spread` m and a scale in
/// `[0.95, 1.05]`.
pub fn random_state(seq: &BodySequence, rng: &mut ChaCha8Rng, spread: f64) -> BodySequence {
    let mut out = seq.clone();
    for t in &mut out.translations {
        *t = Vec3::new(
            rng.random_range(-spread..spread),
            rng.random_range(-spread..spread),
            rng.random_range(-spread..spread),
        );
    }
    out.scale = rng.random_range(0.95..1.05);
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Central-difference gradient of `f` at `x`.
pub fn numeric_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
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

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, or the absolute gap when both are tiny.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale < 1e-12 {
        norm(&diff)
    } else {
        norm(&diff) / scale
    }
}

/// Analytic versus numeric gradient of a loss over the packed variables of
/// `seq`.
pub fn gradient_gap(seq: &BodySequence, eval: impl Fn(&BodySequence) -> (f64, Vec<f64>), h: f64) -> f64 {
    let x = seq.pack();
    let (_, analytic) = eval(seq);
    let numeric = numeric_gradient(
        |p| {
            let mut s = seq.clone();
            s.unpack(p);
            eval(&s).0
        },
        &x,
        h,
    );
    relative_error(&analytic, &numeric)
}

/// Exact plane `z = 0` volume: trilinear interpolation of a linear field is
/// exact, so the distance at any interior point is its height.
pub fn plane_volume(truncation: f64) -> TsdfVolume {
    let (n, voxel) = (11usize, 0.05);
    let origin = Vec3::new(-0.25, -0.25, -0.25);
    let mut values = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for _j in 0..n {
            for _i in 0..n {
                let z = origin.z + k as f64 * voxel;
                values.push(z.clamp(-truncation, truncation) as f32);
            }
        }
    }
    TsdfVolume::from_parts(origin, voxel, [n, n, n], truncation, values, vec![1.0; n * n * n]).unwrap()
}
