use ringflow::profile::VorticityProfile;
use ringflow::ring::RingParams;
use ringflow::Subsolution;

fn main() {
    let s = Subsolution::new(
        RingParams::new(1.0, 1.0, 1.0).unwrap(),
        VorticityProfile::solve(1.0).unwrap(),
    );
    let t = 1e-4;
    for i in 0..5 {
        let rho = i as f64 / 4.0;
        for j in 0..4 {
            let alpha = std::f64::consts::TAU * j as f64 / 4.0;
            print!("rho={rho} alpha={alpha:.2} ... ");
            let r = s.residual(t, rho, alpha);
            println!("{:?}", r.map(|v| (v.r, v.z)));
        }
    }
}
