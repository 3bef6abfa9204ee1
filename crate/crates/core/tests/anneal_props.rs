use std::f64::consts::PI;

use polyknot::anneal::*;
use polyknot::homfly::{classify, homfly_of_knot};
use polyknot::PolygonalKnot;

fn label(k: &PolygonalKnot) -> String {
    classify(&homfly_of_knot(k, 11).unwrap()).label
}

#[test]
fn crumpled_octagons_relax_to_the_regular_octagon() {
    let oct = PolygonalKnot::regular_ngon(8, 1.0).unwrap();
    let reference = 16.0 * (PI / 8.0).tan();
    for seed in 0..5 {
        let k = crumple(&oct, 200, seed);
        assert!(k.equilateral_deviation() < 1e-10);
        let r = anneal(&k, &AnnealSchedule { seed, ..Default::default() }).unwrap();
        assert!(r.best_ropelength <= reference * 1.02, "seed {seed}: {}", r.best_ropelength);
        assert!(r.best_ropelength <= r.initial_ropelength);
        assert!(r.best.equilateral_deviation() < 1e-10);
        assert_eq!(label(&r.best), "Unknot");
        assert!(r.log.windows(2).all(|w| w[1].best <= w[0].best));
    }
}

#[test]
fn trefoil_improves_and_keeps_its_type() {
    let k = equilateral_torus_knot(2, 3, 24).unwrap();
    let before = label(&k);
    assert!(before.starts_with("Trefoil"));
    let r = anneal(&k, &AnnealSchedule { epochs: 100, moves_per_epoch: 200, seed: 2, ..Default::default() }).unwrap();
    assert!(r.best_ropelength < r.initial_ropelength);
    assert!(r.best.equilateral_deviation() < 1e-10);
    assert_eq!(label(&r.best), before);
}

#[test]
fn chains_pick_the_lowest_result() {
    let k = crumple(&PolygonalKnot::regular_ngon(8, 1.0).unwrap(), 100, 7);
    let schedule = AnnealSchedule { epochs: 30, moves_per_epoch: 100, ..Default::default() };
    let best = anneal_chains(&k, &schedule, &[3, 1, 2]).unwrap();
    for seed in [1, 2, 3] {
        let single = anneal(&k, &AnnealSchedule { seed, ..schedule }).unwrap();
        assert!(best.best_ropelength <= single.best_ropelength);
        if single.seed == best.seed {
            assert_eq!(single.best, best.best);
        }
    }
}
