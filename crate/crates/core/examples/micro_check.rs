use cascade_core::generators::random_regular;
use cascade_core::models::{LoadVariant, ModelSpec};
use cascade_core::network::{run_cascade, NodeState};
use cascade_core::stochastic::seeded_rng;
use rand::Rng;

fn main() {
    let cells = [(0.39f64, 0.1189f64), (0.2, 0.0199), (0.2, 0.1), (0.3, 0.3)];
    for (mu, sigma) in cells {
        let mut xs = Vec::new();
        for seed in 0..3u64 {
            let mut rng = seeded_rng(seed);
            let n = 100_000;
            let net = random_regular(n, 3, &mut rng).unwrap();
            let theta: Vec<f64> = (0..n)
                .map(|_| {
                    // Box-Muller
                    let u1: f64 = rng.gen::<f64>().max(1e-300);
                    let u2: f64 = rng.gen();
                    mu + sigma
                        * (-2.0 * u1.ln()).sqrt()
                        * (2.0 * std::f64::consts::PI * u2).cos()
                })
                .collect();
            let init = NodeState::healthy(theta);
            let spec = ModelSpec::constant_load(LoadVariant::Inward);
            let trace = run_cascade(&spec, &net, &init, n + 1).unwrap();
            xs.push(trace.final_fraction());
        }
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        println!("mu={mu} sigma={sigma}: micro X* = {mean:.5} (runs: {xs:?})");
    }
}
