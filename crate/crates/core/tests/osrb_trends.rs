use securefn_core::charact;
use securefn_core::instance::{fixtures, AuxPair, Instance};
use securefn_core::osrb::{generate_binning, run_protocol_b, BinningConfig, OsrbReport};
use securefn_core::probcore::{Alphabet, Channel, Seed};

const SEEDS: u64 = 20;

fn mean_over_seeds(inst: &Instance, aux: &AuxPair, n: usize, rate_f: f64, rate_m: f64, trials: usize) -> (f64, f64) {
    let reports: Vec<OsrbReport> = (0..SEEDS)
        .map(|s| {
            let config = BinningConfig {
                n,
                rate_f,
                rate_m,
                aux: aux.clone(),
                seed: Seed(s),
                trials,
            };
            run_protocol_b(inst, &config).unwrap()
        })
        .collect();
    let k = SEEDS as f64;
    (
        reports.iter().map(|r| r.decode_error_rate).sum::<f64>() / k,
        reports.iter().map(|r| r.independence_tv).sum::<f64>() / k,
    )
}

/// U uniform on two symbols, independent of everything; Bob ignores it.
/// H(U|X,Y,Z) = H(U|Y) = 1.
fn independent_coin(inst: &Instance) -> AuxPair {
    let u = Alphabet::indexed("U", 2);
    let enc = Channel::from_fn(vec![inst.x().clone()], vec![u.clone()], |_, _| 0.5).unwrap();
    let dec = Channel::from_fn(vec![u, inst.y().clone()], vec![inst.z().clone()], |i, o| {
        inst.p_z(o[0], 0, i[1])
    })
    .unwrap();
    AuxPair::new(inst, enc, dec).unwrap()
}

#[test]
fn bins_below_conditional_entropy_look_independent() {
    let inst = fixtures::x_independent();
    let aux = independent_coin(&inst);
    // rate_f = 0.5 < H(U|X,Y,Z) - 0.2, sum rate 1.5 > H(U|Y) + 0.2
    let (err4, ind4) = mean_over_seeds(&inst, &aux, 4, 0.5, 1.0, 2000);
    let (err12, ind12) = mean_over_seeds(&inst, &aux, 12, 0.5, 1.0, 2000);
    assert!(ind12 < ind4, "independence TV {ind12} >= {ind4}");
    assert!(err12 < err4, "decode error {err12} >= {err4}");
}

#[test]
fn bins_above_conditional_entropy_stay_dependent() {
    let inst = fixtures::x_independent();
    let aux = independent_coin(&inst);
    let (_, ind4) = mean_over_seeds(&inst, &aux, 4, 1.5, 0.5, 1000);
    let (_, ind12) = mean_over_seeds(&inst, &aux, 12, 1.5, 0.5, 1000);
    assert!(ind12 >= ind4 && ind12 > 0.5, "{ind4} -> {ind12}");
}

#[test]
fn decoding_improves_above_the_sum_rate_bound() {
    let inst = fixtures::identity();
    let cert = charact::check_computable(&inst).unwrap();
    let aux = charact::build_w(&inst, &cert).unwrap().as_aux_pair(&inst);
    let (err4, _) = mean_over_seeds(&inst, &aux, 4, 0.0, 1.5, 1000);
    let (err8, _) = mean_over_seeds(&inst, &aux, 8, 0.0, 1.5, 1000);
    let (err12, _) = mean_over_seeds(&inst, &aux, 12, 0.0, 1.5, 1000);
    assert!(err4 > err8 && err8 > err12, "{err4} {err8} {err12}");
}

#[test]
fn bin_occupancy_is_uniform() {
    // 10^4 sequences into 16 bins; 99% chi-square band for 15 degrees of freedom
    let inst = fixtures::identity();
    let u = Alphabet::indexed("U", 10);
    let enc = Channel::from_fn(vec![inst.x().clone()], vec![u.clone()], |_, _| 0.1).unwrap();
    let dec = Channel::from_fn(vec![u, inst.y().clone()], vec![inst.z().clone()], |_, _| 0.5).unwrap();
    let aux = AuxPair::new(&inst, enc, dec).unwrap();
    let config = BinningConfig {
        n: 4,
        rate_f: 1.0,
        rate_m: 0.0,
        aux,
        seed: Seed(2024),
        trials: 1,
    };
    let b = generate_binning(&config).unwrap();
    assert_eq!(b.len(), 10_000);
    let mut counts = [0f64; 16];
    for &f in b.f_map() {
        counts[f as usize] += 1.0;
    }
    let expected = 10_000.0 / 16.0;
    let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
    assert!((4.601..=32.801).contains(&chi2), "chi-square {chi2}");
}
