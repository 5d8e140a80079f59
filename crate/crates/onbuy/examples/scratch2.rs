use onbuy::purchase::compute_rho_density;
use onbuy::rng::RngHandle;
use onbuy::stream::{ItemUniverse, RomSession};
use onbuy::strategies::{buy_hamilton_directed, HamiltonParams};

fn main() {
    let n = 80u32;
    let u = ItemUniverse::directed_arcs(n).unwrap();
    let rho = compute_rho_density(1, n as usize, 4.0).unwrap();
    let mut tot = 0.0; let mut fb = 0.0; let mut arcs = 0usize;
    let trials = 20;
    for seed in 0..trials {
        let mut s = RomSession::new(u, RngHandle::new(500 + seed, 0));
        let run = buy_hamilton_directed(n, &mut s, HamiltonParams::directed_default(), &rho, RngHandle::new(500 + seed, 1)).unwrap();
        tot += run.outcome.total_cost();
        fb += run.outcome.fallback_cost;
        arcs += run.outcome.purchased.len();
    }
    let t = trials as f64;
    println!("mean={:.2} fallback-part={:.2} construction-part={:.2} arcs/trial={:.0}",
        tot / t, fb / t, (tot - fb) / t, arcs as f64 / t);
}
