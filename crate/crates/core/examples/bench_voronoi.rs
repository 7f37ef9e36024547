use prophet_voronoi::{build_voronoi, game::generate_points, rng};
use std::time::Instant;

fn main() {
    for n in [2500usize, 10_000, 40_000] {
        let mut r = rng::from_seed(1);
        let pts = generate_points(n, &mut r);
        let t = Instant::now();
        let reps = 5;
        for _ in 0..reps {
            build_voronoi(&pts).unwrap();
        }
        println!("n={n}: {:?} per diagram", t.elapsed() / reps);
    }
}
