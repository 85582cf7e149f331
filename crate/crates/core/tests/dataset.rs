use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use osm_core::dataset::{build_sample, generate, DatasetSpec, Manifest, ThetaCount};
use osm_core::pixel::read_osmi;

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn spec(out: &Path, count: usize, noise: f64) -> DatasetSpec {
    DatasetSpec {
        count,
        thetas: vec![ThetaCount {
            theta_deg: 90.0,
            count,
        }],
        noise,
        seed: 7,
        solver_n: 128,
        output: out.to_path_buf(),
        ..DatasetSpec::default()
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let m = generate(&spec(&a, 4, 0.0)).unwrap();
    generate(&DatasetSpec {
        output: b.clone(),
        ..spec(&a, 4, 0.0)
    })
    .unwrap();
    assert_eq!(m.samples.len(), 4);
    assert!(m.failed.is_empty());
    let (ta, mut tb) = (tree(&a), tree(&b));
    // The manifest echoes the output path; everything else must match.
    tb.insert(
        "manifest.json".into(),
        String::from_utf8(tb["manifest.json"].clone())
            .unwrap()
            .replace(&b.display().to_string(), &a.display().to_string())
            .into_bytes(),
    );
    assert_eq!(ta, tb);
    assert_eq!(ta.len(), 1 + 4 * 5);
    Manifest::read(&a.join("manifest.json"))
        .unwrap()
        .verify(&a)
        .unwrap();
}

#[test]
fn pairs_meet_image_contract() {
    let dir = tempfile::tempdir().unwrap();
    let m = generate(&spec(dir.path(), 2, 0.0)).unwrap();
    for s in &m.samples {
        let (w, h, t) = read_osmi(&dir.path().join(&s.truth.path)).unwrap();
        assert_eq!((w, h), (160, 160));
        assert!(t.iter().all(|v| *v == 0.0 || *v == 1.0));
        assert!(t.contains(&1.0));
        let (_, _, p) = read_osmi(&dir.path().join(&s.prelim.path)).unwrap();
        assert_eq!(p.iter().cloned().fold(0.0f32, f32::max), 1.0);
        assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn tampered_file_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let m = generate(&DatasetSpec {
        previews: false,
        ..spec(dir.path(), 1, 0.0)
    })
    .unwrap();
    let p = dir.path().join(&m.samples[0].meta.path);
    let mut text = fs::read_to_string(&p).unwrap();
    text.push(' ');
    fs::write(&p, text).unwrap();
    assert!(m.verify(dir.path()).is_err());
}

#[test]
fn noise_changes_only_preliminary_images() {
    let dir = tempfile::tempdir().unwrap();
    let (clean, noisy) = (spec(dir.path(), 3, 0.0), spec(dir.path(), 3, 0.05));
    for i in 0..3 {
        let (a, b) = (
            build_sample(&clean, i).unwrap(),
            build_sample(&noisy, i).unwrap(),
        );
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.meta.scene, b.meta.scene);
        assert_ne!(a.prelim, b.prelim);
    }
}

#[test]
fn samples_do_not_depend_on_count() {
    let dir = tempfile::tempdir().unwrap();
    let (small, large) = (spec(dir.path(), 2, 0.0), spec(dir.path(), 5, 0.0));
    for i in 0..2 {
        assert_eq!(
            build_sample(&small, i).unwrap(),
            build_sample(&large, i).unwrap()
        );
    }
}

#[test]
fn paper_scale_constants_round_trip() {
    let s = DatasetSpec::default();
    let back: DatasetSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
    assert_eq!(back, s);
    assert_eq!(
        (s.k, s.image_size, s.grid_n, s.solver_n),
        (6.0, 160, 64, 256)
    );
    match s.curve {
        osm_core::forward::CurveDescriptor::Circle { radius, count } => {
            assert_eq!((radius, count), (100.0, 32))
        }
        _ => panic!(),
    }
}
