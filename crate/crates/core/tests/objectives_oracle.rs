//! Cross-checks of the objective engine against an independently coded
//! direct summation, the max-product/SINR degeneration, and a medium-size
//! finite-difference run of all seven gradients.

use corridor_opt_core::channel::{
    db_to_linear, sinr_db, AntennaPattern, BaseStation, LinkClass, Point3D,
};
use corridor_opt_core::gradcheck::{run_random_gate, GradCheckConfig};
use corridor_opt_core::objectives::{eval_objective, ObjectiveKind, ObjectiveSpec};
use corridor_opt_core::partition::{assign_best_rss, Partition};
use corridor_opt_core::scenario::{Deployment, RegionTag, SamplePoint, SampleSet};

/// Deterministic xorshift for test fixtures.
struct TestRng(u64);

impl TestRng {
    fn next(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }
}

fn random_state(rng: &mut TestRng, n_bs: usize, n_points: usize) -> (Deployment, SampleSet) {
    let base_stations = (0..n_bs)
        .map(|id| BaseStation {
            id,
            x: rng.range(-500.0, 500.0),
            y: rng.range(-500.0, 500.0),
            height: rng.range(15.0, 40.0),
            azimuth_deg: rng.range(-180.0, 180.0),
            tilt_deg: rng.range(-20.0, 20.0),
            power_dbm: rng.range(0.0, 43.0),
            active: true,
        })
        .collect();
    let dep = Deployment {
        base_stations,
        pattern: AntennaPattern::default(),
        rho_max_dbm: 43.0,
    };
    let mut points = Vec::new();
    let mut total = 0.0;
    for i in 0..n_points {
        let w = rng.range(0.2, 1.0);
        total += w;
        let ground = i % 3 != 0;
        points.push(SamplePoint {
            point: Point3D::new(
                rng.range(-700.0, 700.0),
                rng.range(-700.0, 700.0),
                if ground { 1.5 } else { rng.range(100.0, 160.0) },
            ),
            weight: w,
            tag: if ground {
                RegionTag::Ground
            } else {
                RegionTag::Corridor(0)
            },
        });
    }
    for p in &mut points {
        p.weight /= total;
    }
    (dep, SampleSet::new(points).unwrap())
}

/// Straight per-point summation through the scalar channel API; shares no
/// code with the table-based evaluation path.
fn direct_objective(
    spec: &ObjectiveSpec,
    partition: &Partition,
    samples: &SampleSet,
    dep: &Deployment,
) -> f64 {
    let mut total = 0.0;
    for q in 0..samples.len() {
        let i = partition.serving(q);
        let point = &samples.point(q).point;
        let links: Vec<LinkClass> = (0..dep.n_bs())
            .map(|n| LinkClass::from_kind(samples.link_kind(q, n)))
            .collect();
        let metric = match spec.kind {
            ObjectiveKind::Rss => corridor_opt_core::channel::rss_dbm(
                &dep.base_stations[i],
                &dep.pattern,
                point,
                &links[i],
            )
            .unwrap(),
            _ => {
                let sinr =
                    sinr_db(i, point, &dep.base_stations, &dep.pattern, &links, spec.sigma2)
                        .unwrap();
                match spec.kind {
                    ObjectiveKind::Sinr => sinr,
                    _ => spec.gamma(db_to_linear(sinr)),
                }
            }
        };
        total += samples.point(q).weight * metric;
    }
    total
}

#[test]
fn engine_matches_direct_summation_for_all_kinds() {
    let mut rng = TestRng(0x5eed_cafe);
    for round in 0..8 {
        let (dep, samples) = random_state(&mut rng, 3 + round % 4, 20 + 5 * round);
        let partition = assign_best_rss(&samples, &dep).unwrap();
        let sigma2 = db_to_linear(-104.0);
        let specs = [
            ObjectiveSpec::rss(),
            ObjectiveSpec::sinr(sigma2),
            ObjectiveSpec::max_product(0.1, 0.1, sigma2),
            ObjectiveSpec::soft_max_min(1.0, 0.1, 0.5, sigma2),
        ];
        for spec in specs {
            let engine = eval_objective(&spec, &partition, &samples, &dep).unwrap();
            let oracle = direct_objective(&spec, &partition, &samples, &dep);
            let tol = 1e-12 * oracle.abs().max(1.0);
            assert!(
                (engine - oracle).abs() <= tol,
                "kind {:?}: engine {engine} vs direct {oracle}",
                spec.kind
            );
        }
    }
}

#[test]
fn max_product_with_zero_offsets_is_scaled_sinr() {
    let mut rng = TestRng(0xabcd_1234);
    for round in 0..20 {
        let (dep, samples) = random_state(&mut rng, 3 + round % 5, 25);
        let partition = assign_best_rss(&samples, &dep).unwrap();
        let sigma2 = if round % 2 == 0 {
            db_to_linear(-104.0)
        } else {
            db_to_linear(-95.0)
        };
        let sinr = eval_objective(&ObjectiveSpec::sinr(sigma2), &partition, &samples, &dep).unwrap();
        let mp = eval_objective(
            &ObjectiveSpec::max_product(0.0, 0.0, sigma2),
            &partition,
            &samples,
            &dep,
        )
        .unwrap();
        let expected = core::f64::consts::LN_10 / 10.0 * sinr;
        assert!(
            (mp - expected).abs() <= 1e-12 * expected.abs().max(1e-12),
            "round {round}: mp {mp} vs scaled sinr {expected}"
        );
    }
}

#[test]
fn gradient_gate_medium_run() {
    let summary = run_random_gate(&GradCheckConfig {
        trials: 30,
        seed: 99,
        ..GradCheckConfig::default()
    })
    .unwrap();
    assert!(
        summary.passed(),
        "worst scaled error {} failures {:?}",
        summary.worst_scaled_error,
        &summary.failures[..summary.failures.len().min(3)]
    );
    // 30 trials x 7 forms x >= 3 components each.
    assert!(summary.components_checked >= 30 * 7 * 3);
}

#[test]
fn argmax_equivalence_between_rss_and_sinr() {
    let mut rng = TestRng(0xfeed_beef);
    for _ in 0..25 {
        let (dep, samples) = random_state(&mut rng, 5, 40);
        let sigma2 = db_to_linear(-104.0);
        let partition = assign_best_rss(&samples, &dep).unwrap();
        for q in 0..samples.len() {
            let links: Vec<LinkClass> = (0..dep.n_bs())
                .map(|n| LinkClass::from_kind(samples.link_kind(q, n)))
                .collect();
            let point = &samples.point(q).point;
            let mut best = 0;
            let mut best_sinr = f64::NEG_INFINITY;
            for n in 0..dep.n_bs() {
                let s = sinr_db(n, point, &dep.base_stations, &dep.pattern, &links, sigma2)
                    .unwrap();
                if s > best_sinr {
                    best_sinr = s;
                    best = n;
                }
            }
            assert_eq!(
                partition.serving(q),
                best,
                "point {q}: RSS argmax and SINR argmax disagree"
            );
        }
    }
}
