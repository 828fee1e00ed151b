use fracstefan::stefan::{MemoryParams, PhysicalParams, SimilarityProfile};
fn main() {
    let phys = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
    for a in [0.5f64, 0.7, 0.75, 0.9, 0.99, 0.999] {
        let t = std::time::Instant::now();
        let p = SimilarityProfile::solve(phys, MemoryParams::new(a, 1.0).unwrap()).unwrap();
        println!("alpha={a}: xi0 {:.9}  Fp0 {:.6}  ({:?})", p.front_coeff(), {
            // face slope in unit system
            let prof = p.clone();
            let e = 1e-9;
            (prof.temperature(e, 1.0) - 1.0) / e  // approx dimensional face slope at t=1
        }, t.elapsed());
    }
}
