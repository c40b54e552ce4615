use cascade_core::dist::*;
use cascade_core::meanfield::*;

fn main() {
    let mus = linspace(0.0, 1.0, 101);
    let sigmas = linspace(0.01, 1.0, 101);
    let settings = SolverSettings::default();
    let gmf2 = phase_diagram(&MfMethod::Mf2 { k: 3 }, &mus, &sigmas, &settings).unwrap();
    let gmf3 = phase_diagram(&MfMethod::Mf3 { k: 3 }, &mus, &sigmas, &settings).unwrap();
    let mut worst = (0usize, 0usize, 0.0f64);
    for i in 0..101 {
        for j in 0..101 {
            let d = gmf2.x_star_at(i, j) - gmf3.x_star_at(i, j);
            if d < worst.2 {
                worst = (i, j, d);
            }
        }
    }
    let (i, j, d) = worst;
    println!(
        "worst cell: mu={}, sigma={}, mf2={}, mf3={}, diff={}",
        mus[i], sigmas[j], gmf2.x_star_at(i, j), gmf3.x_star_at(i, j), d
    );
    // step-by-step at the worst cell
    let (mu, sigma) = (mus[i], sigmas[j]);
    let dist = ThresholdDistribution::normal(mu, sigma).unwrap();
    let mut x2 = std_normal_cdf(-mu / sigma);
    print!("mf2 path: {x2:.6}");
    for _ in 0..12 {
        x2 = mf2_step(3, x2, &dist);
        print!(" -> {x2:.6}");
    }
    println!();
    let grid = GridSpec::default_for(&dist);
    let mut d3 = DiscretizedDensity::gaussian(-mu, sigma, &grid).unwrap();
    print!("mf3 path: {:.6}", 1.0 - d3.total_mass());
    for _ in 0..12 {
        d3 = mf3_step(3, &d3).unwrap();
        print!(" -> {:.6}", 1.0 - d3.total_mass());
    }
    println!();
}
