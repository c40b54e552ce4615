use cascade_core::meanfield::*;
use std::time::Instant;

fn main() {
    let mus = linspace(0.0, 1.0, 101);
    let sigmas = linspace(0.01, 1.0, 101);
    let settings = SolverSettings::default();

    let t = Instant::now();
    let g1 = phase_diagram(&MfMethod::Mf1(Mf1Class::ConstantLoad), &mus, &sigmas, &settings).unwrap();
    println!("mf1-i   101x101: {:?}", t.elapsed());

    let t = Instant::now();
    let g3c = phase_diagram(&MfMethod::Mf1(Mf1Class::OverloadRedistribution), &mus, &sigmas, &settings);
    match &g3c {
        Ok(_) => println!("mf1-iii 101x101: {:?}", t.elapsed()),
        Err(e) => println!("mf1-iii FAILED: {e}"),
    }

    let t = Instant::now();
    let g2 = phase_diagram(&MfMethod::Mf1(Mf1Class::LoadRedistribution{phi0:0.25}), &mus, &sigmas, &settings);
    match &g2 { Ok(_) => println!("mf1-ii  101x101: {:?}", t.elapsed()), Err(e) => println!("mf1-ii FAILED: {e}") }

    let t = Instant::now();
    let gmf2 = phase_diagram(&MfMethod::Mf2{k:3}, &mus, &sigmas, &settings);
    match &gmf2 { Ok(_) => println!("mf2 k=3 101x101: {:?}", t.elapsed()), Err(e) => println!("mf2 FAILED: {e}") }

    let t = Instant::now();
    let gmf3 = phase_diagram(&MfMethod::Mf3{k:3}, &mus, &sigmas, &settings);
    match &gmf3 { Ok(_) => println!("mf3 k=3 101x101: {:?}", t.elapsed()), Err(e) => println!("mf3 FAILED: {e}") }

    // MF2 >= MF3 elementwise?
    if let (Ok(a), Ok(b)) = (&gmf2, &gmf3) {
        let mut worst: f64 = f64::INFINITY;
        let mut bad = 0;
        for (x2, x3) in a.x_star.iter().zip(&b.x_star) {
            let d = x2 - x3;
            if d < worst { worst = d; }
            if d < -1e-6 { bad += 1; }
        }
        println!("mf2-mf3 min diff = {worst:e}, violations(<-1e-6) = {bad}");
    }
    // class iii full-breakdown structure
    if let Ok(g) = &g3c {
        let mut mu0_min: f64 = 1.0;
        let mut above: f64 = 0.0;
        for j in 0..101 {
            mu0_min = mu0_min.min(g.x_star_at(0, j));
            for i in 2..101 {
                above = above.max(g.x_star_at(i, j));
            }
        }
        println!("class iii: min X* at mu=0: {mu0_min}, max X* at mu>0.01: {above}");
    }
    // discontinuity structure class i
    let jumps = g1.jump_pairs(0.5);
    let low = jumps.iter().any(|&((i1,_),(i2,_))| mus[i1] < 0.3 && mus[i2] < 0.3);
    let high = jumps.iter().filter(|&&((i1,j1),(i2,j2))| mus[i1] > 0.6 && mus[i2] > 0.6 && sigmas[j1] > 0.5 && sigmas[j2] > 0.5).count();
    println!("class i jumps: total={}, low-mu present={}, in-high-region={}", jumps.len(), low, high);
}
