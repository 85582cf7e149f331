use num_complex::Complex64;
use osm_core::fresnel::{
    image_fresnel, parse, simulate, to_scattered, ColumnMap, ParseMode, StandIn,
};
use osm_core::imaging::{IndicatorParams, SamplingGrid};
use osm_core::scene::{ContrastScene, ShapePrimitive};

fn argmax_of(cfg: &StandIn) -> ([f64; 2], f32) {
    let set = simulate(cfg).unwrap();
    let map = ColumnMap::default();
    // Through the text format, as real files would arrive.
    let set = parse(&set.to_text(&map), &map, ParseMode::Strict, "stand-in").unwrap();
    assert_eq!(to_scattered(&set, 8.0, 90.0).unwrap().curve.len(), 49);
    let (img, up) = image_fresnel(
        &set,
        8.0,
        90.0,
        &SamplingGrid::default(),
        &IndicatorParams::default(),
        160,
    )
    .unwrap();
    assert_eq!((up.width(), up.height()), (160, 160));
    (
        img.argmax(),
        up.values().iter().cloned().fold(0.0f32, f32::max),
    )
}

fn with_eta(eta: f64) -> StandIn {
    let disk = ShapePrimitive::disk([0.0, -0.75], 0.375).unwrap();
    StandIn {
        scene: ContrastScene::default()
            .with_shape(disk, Complex64::new(eta, 0.0))
            .unwrap(),
        ..StandIn::default()
    }
}

#[test]
fn weak_disk_argmax_inside() {
    let cfg = with_eta(0.2);
    let (z, max) = argmax_of(&cfg);
    println!("eta 0.2 argmax {z:?}");
    assert!(cfg.scene.contains(z));
    assert!((max - 1.0).abs() < 1e-6);
}

#[test]
fn permittivity_three_peak_shifts_downstream() {
    // The focused internal field pulls the peak along the incident direction (+y).
    let cfg = StandIn::default();
    let (z, _) = argmax_of(&cfg);
    println!("eta 2 argmax {z:?}");
    assert!(z[0].abs() < 0.375);
    assert!(z[1] > -0.75 && z[1] < 0.0);
}
