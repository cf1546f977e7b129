//! Property-based invariants with proptest: config round-trips, singular
//! value function shape, pressure monotonicity, word algebra and raster cell
//! geometry.

use proptest::prelude::*;

use selfaffine::affinity::pressure_sum;
use selfaffine::attractor::{cell_of, rasterize};
use selfaffine::config::{parse_scalar, MapSpec, RunConfig};
use selfaffine::geom::{Ball, Primitive, Pt};
use selfaffine::ifs::{Ifs, Word};
use selfaffine::matrix::{phi_of_spectrum, singular_values, AffineMap, Matrix, SingularSpectrum};

/// Entries bounded by 0.35 force alpha_1 <= sqrt(sum of squares) < 1, so any
/// non-singular draw is a valid contracting map.
fn contracting_2x2() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-0.35..0.35f64, 2), 2)
        .prop_filter("non-singular", |rows| {
            Matrix::from_rows(rows).and_then(|m| singular_values(&m)).is_ok()
        })
}

fn map_spec() -> impl Strategy<Value = MapSpec> {
    (contracting_2x2(), prop::collection::vec(-0.5..0.5f64, 2))
        .prop_map(|(linear, translation)| MapSpec { linear, translation })
}

fn run_config() -> impl Strategy<Value = RunConfig> {
    (
        prop::collection::vec(map_spec(), 1..4),
        -0.5..0.5f64,
        -0.5..0.5f64,
        0.01..0.3f64,
        1u32..6,
        6u32..12,
    )
        .prop_map(|(maps, cx, cy, r, j_min, j_max)| {
            let mut cfg = RunConfig {
                maps,
                condensation: vec![Primitive::Circle { center: [cx, cy, 0.0], radius: r }],
                j_min,
                j_max,
                ..RunConfig::default()
            };
            cfg.window = Some((j_min, j_max));
            cfg
        })
}

proptest! {
    #[test]
    fn config_round_trip(cfg in run_config()) {
        let text = cfg.serialize();
        let parsed = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(parsed, cfg);
    }

    #[test]
    fn rational_scalars_exact(p in -10_000i64..10_000, q in 1i64..10_000) {
        let v = parse_scalar(&format!("{p}/{q}")).unwrap();
        prop_assert_eq!(v, p as f64 / q as f64);
    }

    #[test]
    fn phi_non_increasing_for_contractions(rows in contracting_2x2(), s in 0.0..2.0f64) {
        let sp = singular_values(&Matrix::from_rows(&rows).unwrap()).unwrap();
        let lo = phi_of_spectrum(&sp, s).unwrap();
        let hi = phi_of_spectrum(&sp, s + 0.1).unwrap();
        prop_assert!(hi <= lo * (1.0 + 1e-12));
    }

    #[test]
    fn phi_continuous_at_seam(a1 in 0.1..0.9f64, ratio in 0.1..1.0f64) {
        let sp = SingularSpectrum::new(vec![a1, a1 * ratio]).unwrap();
        let below = phi_of_spectrum(&sp, 1.0 - 1e-9).unwrap();
        let at = phi_of_spectrum(&sp, 1.0).unwrap();
        let above = phi_of_spectrum(&sp, 1.0 + 1e-9).unwrap();
        prop_assert!((below - at).abs() < 1e-7);
        prop_assert!((above - at).abs() < 1e-7);
    }

    #[test]
    fn pressure_sum_decreasing_in_s(
        specs in prop::collection::vec(map_spec(), 1..4),
        s in 0.0..1.5f64,
        k in 1u32..4,
    ) {
        let maps: Vec<AffineMap> = specs
            .into_iter()
            .map(|m| AffineMap::new(Matrix::from_rows(&m.linear).unwrap(), m.translation).unwrap())
            .collect();
        let ifs = Ifs::new(maps).unwrap();
        let lo = pressure_sum(&ifs, k, s + 0.1, 1 << 20).unwrap();
        let hi = pressure_sum(&ifs, k, s, 1 << 20).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn word_concat_and_prefix(
        a in prop::collection::vec(0usize..3, 0..12),
        b in prop::collection::vec(0usize..3, 0..12),
    ) {
        let wa = Word::from_letters(&a, 3).unwrap();
        let wb = Word::from_letters(&b, 3).unwrap();
        let cat = wa.concat(&wb);
        prop_assert_eq!(cat.len(), wa.len() + wb.len());
        prop_assert!(wa.is_prefix_of(&cat));
        if !wb.is_empty() {
            prop_assert_eq!(cat.parent().len(), cat.len() - 1);
        }
    }

    #[test]
    fn raster_cells_contain_their_points(
        pts in prop::collection::vec((-0.49..0.49f64, -0.49..0.49f64), 1..100),
        j in 1u32..8,
    ) {
        let delta = 2f64.powi(-(j as i32));
        let ball = Ball::new([0.0; 3], 0.5, 2).unwrap();
        // keep samples inside the ball, not just its bounding square
        let points: Vec<Pt> = pts
            .iter()
            .map(|&(x, y)| {
                let norm = (x * x + y * y).sqrt();
                if norm > 0.45 {
                    let k = 0.45 / norm;
                    [x * k, y * k, 0.0]
                } else {
                    [x, y, 0.0]
                }
            })
            .collect();
        let grid = rasterize(&points, delta, &ball).unwrap();
        prop_assert!(grid.count() as usize <= points.len());
        let origin = ball.corner();
        for p in &points {
            let c = cell_of(*p, origin, delta, 2);
            prop_assert!(grid.occupancy.contains_key(&c));
            for d in 0..2 {
                let lo = origin[d] + c[d] as f64 * delta;
                prop_assert!(p[d] >= lo - 1e-12 && p[d] < lo + delta + 1e-12);
            }
        }
    }
}
