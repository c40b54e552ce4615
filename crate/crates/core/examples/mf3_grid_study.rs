use cascade_core::dist::*;
use cascade_core::meanfield::*;

fn solve_with(grid: GridSpec, k: u32, dist: &ThresholdDistribution, max_iter: usize) -> (f64, usize) {
    let mut d = DiscretizedDensity::gaussian(-dist.mu(), dist.sigma(), &grid).unwrap();
    let mut x = 0.0;
    for it in 0..max_iter {
        let next = mf3_step(k, &d).unwrap();
        let xn = 1.0 - next.total_mass();
        d = next;
        if xn - x <= 1e-10 {
            return (xn, it + 1);
        }
        x = xn;
    }
    (x, max_iter)
}

fn main() {
    let (mu, sigma) = (0.39, 0.1189);
    let dist = ThresholdDistribution::normal(mu, sigma).unwrap();
    // default: 4000 bins with interpolation
    let g = GridSpec::default_for(&dist);
    println!("default 4000 bins: {:?}", solve_with(g, 3, &dist, 200_000));
    // 4x finer
    let g = GridSpec { bins: 16000, ..GridSpec::default_for(&dist) };
    println!("16000 bins:        {:?}", solve_with(g, 3, &dist, 200_000));
    // exact shifts: width = 1/300 so j/3 is exactly 100 bins, no interpolation
    let g = GridSpec { z_min: -8.0, z_max: 2.5, bins: 3150 };
    println!("exact-shift bins:  {:?}", solve_with(g, 3, &dist, 200_000));
    // much finer exact shifts: width 1/3000
    let g = GridSpec { z_min: -8.0, z_max: 2.5, bins: 31500 };
    println!("exact fine bins:   {:?}", solve_with(g, 3, &dist, 200_000));
}
