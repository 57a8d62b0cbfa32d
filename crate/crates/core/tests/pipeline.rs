use facepipe::face_features::FeatureFailure;
use facepipe::fixtures::{render_fixture, render_sequence, Blob, FaceFixtureSpec};
use facepipe::image::RgbImage;
use facepipe::pipeline::{detect_still, detect_video, PipelineConfig, Stage};
use facepipe::skin::skin_mask;

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

#[test]
fn blue_image_has_no_faces() {
    let img = RgbImage::filled(64, 48, [0, 0, 255]).unwrap();
    assert!(detect_still(&img, &PipelineConfig::default()).unwrap().is_empty());
}

#[test]
fn default_fixture_end_to_end() {
    let spec = FaceFixtureSpec::default();
    let r = render_fixture(&spec).unwrap();
    let dets = detect_still(&r.image, &PipelineConfig::default()).unwrap();
    assert_eq!(dets.len(), 1);
    let d = &dets[0];
    assert!(d.is_complete(), "{:?}", d.failure);
    assert!(d.failure.is_none());
    assert_eq!(d.feature.as_ref().unwrap().len(), 6 + 64 * 64);
    assert!(dist(d.landmarks.eye_left.unwrap(), r.truth.eye_left) <= 2.0);
    assert!(dist(d.landmarks.eye_right.unwrap(), r.truth.eye_right) <= 2.0);
    assert!(dist(d.landmarks.nose.unwrap(), r.truth.nose) <= 2.0);
    assert!(dist(d.landmarks.mouth.unwrap(), r.truth.mouth) <= 2.0);
    let g = d.geometry.as_ref().unwrap();
    assert!((g.inter_eye_distance - 30.0).abs() <= 1.0);
    assert!((g.nose_length - 23.0).abs() <= 1.0);
    assert_eq!(dets, detect_still(&r.image, &PipelineConfig::default()).unwrap());
}

#[test]
fn rotated_fixture_is_levelled() {
    let spec = FaceFixtureSpec {
        rotation: 0.3,
        ..Default::default()
    };
    let r = render_fixture(&spec).unwrap();
    let dets = detect_still(&r.image, &PipelineConfig::default()).unwrap();
    assert_eq!(dets.len(), 1);
    let d = &dets[0];
    assert!((d.landmarks.rotation.unwrap() - 0.3).abs() <= 0.05);
    let g = d.geometry.as_ref().unwrap();
    let t = &r.truth.geometry;
    assert!((g.eye_left.1 - g.eye_right.1).abs() <= 0.5);
    // compare relative to the eye midpoint, which both frames share
    let mid = |a: (f64, f64), b: (f64, f64)| ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
    let (gm, tm) = (mid(g.eye_left, g.eye_right), mid(t.eye_left, t.eye_right));
    for (p, q) in [
        (g.eye_left, t.eye_left),
        (g.eye_right, t.eye_right),
        (g.nose_tip, t.nose_tip),
        (g.mouth_center, t.mouth_center),
    ] {
        assert!(dist((p.0 - gm.0, p.1 - gm.1), (q.0 - tm.0, q.1 - tm.1)) <= 3.0);
    }
}

fn overlay(a: &RgbImage, b: &RgbImage, background: [u8; 3]) -> RgbImage {
    RgbImage::from_fn(a.width(), a.height(), |x, y| {
        let p = b.get(x, y);
        if p != background {
            p
        } else {
            a.get(x, y)
        }
    })
    .unwrap()
}

#[test]
fn two_faces() {
    let left = FaceFixtureSpec {
        center: (80.0, 120.0),
        ..Default::default()
    };
    let right = FaceFixtureSpec {
        center: (230.0, 110.0),
        ..Default::default()
    }
    .scaled(1.2);
    let (a, b) = (render_fixture(&left).unwrap(), render_fixture(&right).unwrap());
    let img = overlay(&a.image, &b.image, left.background);
    let dets = detect_still(&img, &PipelineConfig::default()).unwrap();
    assert_eq!(dets.len(), 2);
    // ordered by bbox position: the higher (right) face first
    assert_eq!(dets[0].face_bbox.area, skin_mask(&b.image).count());
    assert_eq!(dets[1].face_bbox.area, skin_mask(&a.image).count());
    assert!(dets.iter().all(|d| d.is_complete()));
}

#[test]
fn missing_mouth_is_reported() {
    let spec = FaceFixtureSpec {
        mouth: Blob {
            color: [200, 140, 110],
            ..FaceFixtureSpec::default().mouth
        },
        ..Default::default()
    };
    // a skin-coloured mouth is no blob at all; bypass validation by drawing
    // the default face and painting the mouth over
    let mut img = render_fixture(&FaceFixtureSpec::default()).unwrap().image;
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (dx, dy) = (x as f64 - 160.0, y as f64 - 145.0);
            if (dx / 11.0).powi(2) + (dy / 4.5).powi(2) <= 1.0 {
                img.set(x, y, spec.skin);
            }
        }
    }
    let dets = detect_still(&img, &PipelineConfig::default()).unwrap();
    assert_eq!(dets.len(), 1);
    let d = &dets[0];
    let f = d.failure.as_ref().unwrap();
    assert_eq!(f.stage, Stage::Mouth);
    assert_eq!(f.reason, FeatureFailure::NoMouth.to_string());
    assert!(d.geometry.is_none() && d.feature.is_none() && d.label.is_none());
    assert!(d.landmarks.eye_left.is_some() && d.landmarks.nose.is_none());
}

#[test]
fn video_gating() {
    let spec = FaceFixtureSpec {
        center: (60.0, 120.0),
        ..Default::default()
    };
    let moving = render_sequence(&spec, 5, (10.0, 0.0)).unwrap();
    let cfg = PipelineConfig::default();
    let per_frame = detect_video(&moving, &cfg).unwrap();
    for (t, dets) in per_frame.iter().enumerate() {
        assert_eq!(dets.len(), 1, "frame {t}");
        assert!(dets[0].is_complete(), "frame {t}: {:?}", dets[0].failure);
    }

    let still = render_sequence(&spec, 4, (0.0, 0.0)).unwrap();
    let per_frame = detect_video(&still, &cfg).unwrap();
    assert_eq!(per_frame[0].len(), 1);
    assert!(per_frame[1..].iter().all(|d| d.is_empty()));

    let mut off = cfg.clone();
    off.motion.enabled = Some(false);
    let ungated = detect_video(&moving, &off).unwrap();
    for (frame, dets) in moving.iter().zip(&ungated) {
        assert_eq!(dets, &detect_still(frame, &off).unwrap());
    }

    let small = RgbImage::filled(10, 10, [0, 0, 0]).unwrap();
    assert!(detect_video(&[moving[0].clone(), small], &cfg).is_err());
}

#[test]
fn config_round_trip_and_validation() {
    let cfg = PipelineConfig::default();
    let text = serde_json::to_string(&cfg).unwrap();
    let back: PipelineConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
    let partial: PipelineConfig = serde_json::from_str(r#"{"seed": 9, "dct_k": 8}"#).unwrap();
    assert_eq!((partial.seed, partial.dct_k), (9, 8));
    assert!(serde_json::from_str::<PipelineConfig>(r#"{"sed": 9}"#).is_err());
    let bad = PipelineConfig {
        dct_k: 65,
        ..Default::default()
    };
    let img = RgbImage::filled(8, 8, [0, 0, 0]).unwrap();
    assert!(detect_still(&img, &bad).is_err());
}
