use onbuy::harness::*;
use onbuy::stream::OrderModel;
use std::collections::BTreeMap;

fn run(structure: Structure, n: u64, order: OrderModel, trials: u64, seed: u64) -> StatsSummary {
    let cfg = TrialConfig { structure, n, order, trials, base_seed: seed, params: BTreeMap::new() };
    run_trials(&cfg).unwrap()
}

fn main() {
    let t0 = std::time::Instant::now();
    let which: Vec<String> = std::env::args().skip(1).collect();
    let want = |k: &str| which.is_empty() || which.iter().any(|w| w == k);

    if want("tree") {
        let s = run(Structure::SpanningTree, 2000, OrderModel::Rom, 200, 7);
        println!("tree n=2000: mean={:.4} (band [2.0,2.45]) succ={} fb={} insp={:.0} [{:?}]",
            s.mean, s.success_rate, s.fallback_rate, s.mean_inspections, t0.elapsed());
    }
    if want("arbor") {
        let s = run(Structure::Arborescence, 1000, OrderModel::Rom, 200, 7);
        println!("arbor n=1000: mean={:.4} (band [1.8,2.4]) succ={} fb={} [{:?}]",
            s.mean, s.success_rate, s.fallback_rate, t0.elapsed());
    }
    if want("pm") {
        let s = run(Structure::BipartitePm, 500, OrderModel::Rom, 200, 7);
        println!("bipartite-pm n=500: mean={:.3} (<=48) succ={} fb={} [{:?}]",
            s.mean, s.success_rate, s.fallback_rate, t0.elapsed());
        let s = run(Structure::PmComplete, 1000, OrderModel::Rom, 100, 7);
        println!("pm-complete n=1000: mean={:.3} (<=48) succ={} fb={} [{:?}]",
            s.mean, s.success_rate, s.fallback_rate, t0.elapsed());
    }
    if want("ham") {
        let s = run(Structure::Hamilton, 100, OrderModel::Rom, 100, 7);
        println!("hamilton n=100: mean={:.2} (band [120,240]) succ={} fb={} [{:?}]",
            s.mean, s.success_rate, s.fallback_rate, t0.elapsed());
    }
    if want("dham") {
        let s = run(Structure::HamiltonDirected, 80, OrderModel::Rom, 100, 7);
        println!("directed hamilton n=80: mean={:.2} (>=3.2) succ={} fb={} [{:?}]",
            s.mean, s.success_rate, s.fallback_rate, t0.elapsed());
    }
    if want("tri") {
        let mut pts = Vec::new();
        for &n in &[500u64, 1000, 2000, 4000] {
            let s = run(Structure::Triangle, n, OrderModel::Rom, 200, 7);
            let cap = 20.0 * (n as f64).powf(-4.0/7.0);
            println!("triangle n={n}: mean={:.5} (cap {:.5}) succ={} fb={:.3}", s.mean, cap, s.success_rate, s.fallback_rate);
            pts.push((n as f64, s.mean));
        }
        let (slope, se) = exponent_fit(&pts).unwrap();
        println!("triangle slope: {:.4} +- {:.4} (want -0.571 +- 0.12) [{:?}]", slope, se, t0.elapsed());
    }
    if want("path") {
        let mut pts = Vec::new();
        for &n in &[500u64, 1000, 2000, 4000] {
            let s = run(Structure::ShortestPath, n, OrderModel::Rom, 200, 7);
            let lo = (n as f64).powf(-2.0/3.0) / 20.0;
            let hi = 20.0 * (n as f64).powf(-2.0/3.0);
            println!("path n={n}: mean={:.5} (band [{:.5},{:.5}]) succ={} fb={:.3}", s.mean, lo, hi, s.success_rate, s.fallback_rate);
            pts.push((n as f64, s.mean));
        }
        let (slope, se) = exponent_fit(&pts).unwrap();
        println!("path slope: {:.4} +- {:.4} (want -0.667 +- 0.15) [{:?}]", slope, se, t0.elapsed());
    }
    if want("aom") {
        let rom = run(Structure::Triangle, 2000, OrderModel::Rom, 200, 99);
        let aom = run(Structure::Triangle, 2000, OrderModel::Aom("vertex-sweep".into()), 200, 99);
        println!("triangle rom={:.5} aom={:.5} (aom must exceed) [{:?}]", rom.mean, aom.mean, t0.elapsed());
        let rom = run(Structure::ShortestPath, 2000, OrderModel::Rom, 200, 99);
        let aom = run(Structure::ShortestPath, 2000, OrderModel::Aom("endpoints-last".into()), 200, 99);
        println!("path rom={:.5} aom={:.5} (aom must exceed) [{:?}]", rom.mean, aom.mean, t0.elapsed());
    }
    if want("clique") {
        let mut pts = Vec::new();
        for &n in &[2000u64, 4000] {
            let s = run(Structure::Clique { r: 4 }, n, OrderModel::Rom, 60, 7);
            println!("clique4 n={n}: mean={:.5} succ={} fb={:.3}", s.mean, s.success_rate, s.fallback_rate);
            pts.push((n as f64, s.mean));
        }
        println!("clique pts so far [{:?}]", t0.elapsed());
    }
    if want("dens") {
        // criterion 4 Monte Carlo cross-check at N=1e5 is heavy; try N=2e4 first.
        for &d in &[4.0f64, 10.0] {
            let n = 100_000usize;
            let t = onbuy::purchase::compute_rho_density(1, n, d).unwrap();
            let scaled = n as f64 * t.get(1, n);
            println!("density D={d}: N*rho = {:.4} (want within 2% of {:.1})", scaled, 2.0*d);
        }
        println!("[{:?}]", t0.elapsed());
    }
    println!("total {:?}", t0.elapsed());
}
