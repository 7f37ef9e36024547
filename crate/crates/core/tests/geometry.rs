use prophet_voronoi::game::generate_points;
use prophet_voronoi::rng;
use prophet_voronoi::torus::{canonicalize, torus_distance, TorusPoint};
use prophet_voronoi::voronoi::{build_voronoi, build_voronoi_unpruned, point_vs_boundary_fraction};
use proptest::prelude::*;

/// Midpoint-rule integration of `|q − p| < dist(q, ∂C)` over an
/// `res × res` grid of the unit square.
fn grid_boundary_fraction(p: [f64; 2], res: usize) -> f64 {
    let mut hits = 0usize;
    for iy in 0..res {
        let qy = (iy as f64 + 0.5) / res as f64;
        for ix in 0..res {
            let qx = (ix as f64 + 0.5) / res as f64;
            let b = qx.min(1.0 - qx).min(qy).min(1.0 - qy);
            if (qx - p[0]).hypot(qy - p[1]) < b {
                hits += 1;
            }
        }
    }
    hits as f64 / (res * res) as f64
}

// 2000×2000 grid value at the center of the square, computed once with the
// oracle above and frozen here
const CENTER_FRACTION: f64 = 0.218956;

#[test]
fn center_fraction_oracle() {
    assert!((grid_boundary_fraction([0.5, 0.5], 2000) - CENTER_FRACTION).abs() < 1e-6);
    let samples = 1_000_000u64;
    let est = point_vs_boundary_fraction([0.5, 0.5], samples, 8);
    let se = (CENTER_FRACTION * (1.0 - CENTER_FRACTION) / samples as f64).sqrt();
    assert!((est - CENTER_FRACTION).abs() <= 3.0 * se, "{est}");
}

#[test]
fn monte_carlo_tracks_grid_off_center() {
    for p in [[0.3, 0.6], [0.1, 0.1], [0.45, 0.2]] {
        let exact = grid_boundary_fraction(p, 1000);
        let est = point_vs_boundary_fraction(p, 400_000, 2);
        let se = (exact * (1.0 - exact) / 400_000.0).sqrt();
        assert!((est - exact).abs() <= 4.0 * se + 1e-5, "{p:?}: {est} vs {exact}");
    }
}

fn sites_strategy(max: usize) -> impl Strategy<Value = Vec<TorusPoint>> {
    (1..max, any::<u64>()).prop_map(|(n, seed)| generate_points(n, &mut rng::from_seed(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cells_tile_the_torus(sites in sites_strategy(400)) {
        let d = build_voronoi(&sites).unwrap();
        prop_assert!((d.total_area() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pruning_changes_nothing(sites in sites_strategy(120)) {
        prop_assert_eq!(build_voronoi(&sites).unwrap(), build_voronoi_unpruned(&sites).unwrap());
    }

    #[test]
    fn vertices_are_closest_to_their_site(sites in sites_strategy(150)) {
        let d = build_voronoi(&sites).unwrap();
        for (i, cell) in d.cells.iter().enumerate() {
            for v in &cell.polygon {
                let v = canonicalize(v[0], v[1]).unwrap();
                let own = torus_distance(&v, &sites[i]);
                for q in &sites {
                    prop_assert!(own <= torus_distance(&v, q) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn translating_all_sites_preserves_areas(sites in sites_strategy(80), dx in 0.0f64..1.0, dy in 0.0f64..1.0) {
        let moved: Vec<TorusPoint> = sites.iter().map(|p| canonicalize(p.x + dx, p.y + dy).unwrap()).collect();
        let a = build_voronoi(&sites).unwrap();
        let b = build_voronoi(&moved).unwrap();
        for (ca, cb) in a.cells.iter().zip(&b.cells) {
            prop_assert!((ca.area - cb.area).abs() < 1e-9);
        }
    }
}
