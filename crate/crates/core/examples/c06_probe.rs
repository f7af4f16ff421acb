use rfxy::global_solvers::*;
use rfxy::lattice::Lattice;
use rfxy::local_solvers::*;
use rfxy::manifold::random_point_indexed;
use rfxy::model::Instance;

fn main() {
    let inst: Instance<f64> = Instance::generate(Lattice::new(3, 10).unwrap(), 2.5, 4242).unwrap();
    let opts = SolverOptions::default();
    // one manual MBH chain with stats
    for chain in 0..4u64 {
        let x0 = random_point_indexed(inst.lattice(), 555 + chain, 0);
        let r0 = rtr(&inst, &x0, &opts).unwrap();
        let mut inc = (r0.config, r0.energy);
        let mut rng = rand::SeedableRng::seed_from_u64(777 + chain);
        let mut accepts = 0;
        let mut total = 0;
        let mut k = 0;
        while k < 15 && total < 40 {
            let theta = inc.0.to_angles();
            let p = perturb::<f64>(&theta, 0.5, &mut wrap(&mut rng));
            let r = rtr(&inst, &p.to_cartesian(), &opts).unwrap();
            total += 1;
            if r.energy < inc.1 {
                accepts += 1;
                inc = (r.config, r.energy);
                k = 0;
            } else {
                k += 1;
            }
        }
        println!("chain {chain}: start E {:.3} end E {:.3}, {accepts}/{total} accepted", r0.energy, inc.1);
    }
}
fn wrap(r: &mut rand_chacha::ChaCha8Rng) -> &mut rand_chacha::ChaCha8Rng { r }
