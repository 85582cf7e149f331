//! Acceptance run: one `[PASS]`/`[FAIL]` line per criterion, then a non-zero
//! exit if any criterion failed.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use osm_cli::suites::{run_suite, Suite, VerifySettings};
use osm_core::dataset::{generate, DatasetSpec, ThetaCount};
use osm_core::fresnel::{self, ColumnMap, FresnelSet, ParseMode, StandIn};
use osm_core::imaging::{IndicatorParams, SamplingGrid};
use osm_core::oracles::{CheckReport, Diagnostic};

const THEOREM1_BUDGET_S: f64 = 120.0;
const DATASET_BUDGET_S: f64 = 600.0;
const DATASET_PAIRS: usize = 20;
const FRESNEL_K: f64 = 6.708;
const FRESNEL_K_TOL: f64 = 1e-3;
const FRESNEL_RECEIVERS: usize = 49;
const ROUND_TRIP_TOL: f64 = 1e-8;

const FIXTURE: &str = "# tx rx f total_re total_im inc_re inc_im
90 60 8 1.25e-1 -3.5e-2 9.0e-1 4.1e-1
90 65 8 -2.0e-3 7.75e-1 8.8e-1 4.6e-1
270 60 8 0.0 0.0 1.0 0.0
90 60 10 3.0e-1 2.0e-1 -5.0e-1 8.0e-1
";

/// `computed` against an upper bound `tolerance`.
fn bound(name: &str, metric: &str, computed: f64, tolerance: f64) -> CheckReport {
    let d = Diagnostic {
        label: name.into(),
        computed,
        reference: tolerance,
        error: computed,
    };
    CheckReport::new(name, metric, tolerance, vec![d])
}

fn line(criterion: &str, parts: &[CheckReport]) -> bool {
    let pass = parts.iter().all(|p| p.pass);
    let detail: Vec<String> = parts
        .iter()
        .map(|p| {
            format!(
                "{} {} {:.3e} vs {:.1e}{}",
                p.name,
                p.metric,
                p.max_error,
                p.tolerance,
                if p.pass { "" } else { " FAIL" }
            )
        })
        .collect();
    println!(
        "[{}] {criterion}: {}",
        if pass { "PASS" } else { "FAIL" },
        detail.join("; ")
    );
    pass
}

fn suite(s: Suite, settings: &VerifySettings) -> Vec<CheckReport> {
    run_suite(s, settings).unwrap_or_else(|e| panic!("suite {}: {e}", s.name()))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}

fn set_difference(a: &FresnelSet, b: &FresnelSet) -> f64 {
    if a.records.len() != b.records.len() {
        return f64::INFINITY;
    }
    a.records
        .iter()
        .zip(&b.records)
        .map(|(x, y)| {
            let angles = (x.transmitter_deg - y.transmitter_deg).abs()
                + (x.receiver_deg - y.receiver_deg).abs()
                + (x.frequency_ghz - y.frequency_ghz).abs();
            let scale = x.total.norm().max(x.incident.norm()).max(1e-300);
            angles.max(((x.total - y.total).norm() + (x.incident - y.incident).norm()) / scale)
        })
        .fold(0.0, f64::max)
}

fn round_trip(set: &FresnelSet, map: &ColumnMap) -> f64 {
    let again = fresnel::parse(&set.to_text(map), map, ParseMode::Strict, "round-trip").unwrap();
    set_difference(set, &again)
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn theorem1(s: &VerifySettings) -> bool {
    let (mut parts, secs) = timed(|| suite(Suite::Theorem1, s));
    parts.push(bound("runtime", "seconds", secs, THEOREM1_BUDGET_S));
    line("theorem 1 equality", &parts)
}

fn determinism() -> bool {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dataset");
    let spec = DatasetSpec {
        count: DATASET_PAIRS,
        thetas: vec![ThetaCount {
            theta_deg: 90.0,
            count: DATASET_PAIRS,
        }],
        seed: 2024,
        output: out.clone(),
        ..DatasetSpec::default()
    };
    let (first, secs) = timed(|| generate(&spec).unwrap());
    let a = tree(&out);
    fs::remove_dir_all(&out).unwrap();
    generate(&spec).unwrap();
    let b = tree(&out);
    let differing =
        a.len().abs_diff(b.len()) + a.iter().filter(|(k, v)| b.get(*k) != Some(*v)).count();
    let verified = first.verify(&out).is_ok()
        && first.failed.is_empty()
        && first.samples.len() == DATASET_PAIRS;
    line(
        "determinism",
        &[
            bound("differing-files", "count", differing as f64, 0.0),
            bound(
                "manifest-verify",
                "failures",
                if verified { 0.0 } else { 1.0 },
                0.0,
            ),
            bound("runtime-20-pairs", "seconds", secs, DATASET_BUDGET_S),
        ],
    )
}

fn fresnel_criterion() -> bool {
    let map = ColumnMap::default();
    let fixture = fresnel::parse(FIXTURE, &map, ParseMode::Strict, "fixture").unwrap();
    let stand_in = fresnel::simulate(&StandIn::default()).unwrap();
    let rt = round_trip(&fixture, &map).max(round_trip(&stand_in, &map));

    let k = fresnel::wave_number(8.0);
    let receivers = fresnel::to_scattered(&stand_in, 8.0, 90.0)
        .unwrap()
        .curve
        .len();

    let reparsed =
        fresnel::parse(&stand_in.to_text(&map), &map, ParseMode::Strict, "stand-in").unwrap();
    let (img, _) = fresnel::image_fresnel(
        &reparsed,
        8.0,
        90.0,
        &SamplingGrid::default(),
        &IndicatorParams::default(),
        160,
    )
    .unwrap();
    let z = img.argmax();
    let center = [0.0, -0.75];
    let radius = 0.375;
    let offset = (z[0] - center[0]).hypot(z[1] - center[1]);

    line(
        "fresnel",
        &[
            bound("round-trip", "relative", rt, ROUND_TRIP_TOL),
            bound("k-8GHz", "absolute", (k - FRESNEL_K).abs(), FRESNEL_K_TOL),
            bound(
                "receivers",
                "count-mismatch",
                receivers.abs_diff(FRESNEL_RECEIVERS) as f64,
                0.0,
            ),
            bound("argmax-in-disk", "distance-to-center", offset, radius),
        ],
    )
}

fn main() {
    let s = VerifySettings::default();
    let mut results = Vec::new();

    results.push(theorem1(&s));
    results.push(line("theorem 2 relation", &suite(Suite::Theorem2, &s)));
    results.push(line("forward solver", &suite(Suite::Forward, &s)));
    let mut fh = suite(Suite::FunkHecke, &s);
    fh.extend(suite(Suite::Helmholtz, &s));
    results.push(line("funk-hecke and helmholtz", &fh));
    results.push(line("decay rate", &suite(Suite::Decay, &s)));
    results.push(line("noise stability", &suite(Suite::Noise, &s)));
    results.push(line("special functions", &suite(Suite::Specfun, &s)));
    results.push(determinism());
    results.push(fresnel_criterion());

    let failed = results.iter().filter(|p| !**p).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
