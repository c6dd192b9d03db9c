use eqfloer::{catalog, cover::{branched_double_cover, CoverMode}, nicify, floer, theta};
use std::collections::BTreeSet;
fn main() {
    let az: BTreeSet<String> = ["z".to_string()].into_iter().collect();
    let azw: BTreeSet<String> = ["z".to_string(), "w".to_string()].into_iter().collect();
    for (name, d) in [("unknot", {
        let mut u = catalog::genus1_unknot();
        eqfloer::moves::finger_move(&mut u, eqfloer::cell::Dart::fwd(1), &[eqfloer::cell::Dart::fwd(0)], &az).unwrap();
        u
    }), ("trefoil", catalog::genus1_trefoil())] {
        let t0 = std::time::Instant::now();
        let inv = branched_double_cover(&d, &["z".into(), "w".into()], CoverMode::KnotDouble).unwrap();
        // HF_Z2 route: nicify avoiding z (w kept, nicified along)
        let (nice_z, _) = nicify::make_nice_equivariant(&inv, &az).unwrap();
        let cz = floer::build_complex(&nice_z.diagram, &az, Some(&nice_z.sigma), None).unwrap();
        let tz = theta::build_theta_complex(&cz).unwrap();
        let mz = theta::homology_module(&tz).unwrap();
        println!("{}: HF_Z2 gens={} free={} torsion={:?} localize={} [{:?}]",
            name, cz.dim(), mz.free_rank, mz.torsion, theta::localize(&mz), t0.elapsed());
        // HFK_Z2 route: nicify avoiding both
        let t1 = std::time::Instant::now();
        let (nice_zw, _) = nicify::make_nice_equivariant(&inv, &azw).unwrap();
        let czw = floer::build_complex(&nice_zw.diagram, &azw, Some(&nice_zw.sigma), Some(("z","w"))).unwrap();
        let tzw = theta::build_theta_complex(&czw).unwrap();
        let mzw = theta::homology_module(&tzw).unwrap();
        println!("{}: HFK_Z2 gens={} free={} torsion={:?} localize={} H_F2={} [{:?}]",
            name, czw.dim(), mzw.free_rank, mzw.torsion, theta::localize(&mzw),
            floer::homology_f2(&czw).total, t1.elapsed());
    }
}
