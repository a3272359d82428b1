//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Fixtures are loaded from the shipped instance files.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use securefn::parse_instance;
use securefn_core::charact::{self, optimal_rate_full_support, Rate, Refutation, SecurityCertificate, W};
use securefn_core::instance::{Instance, X, Y, Z};
use securefn_core::osrb::{run_protocol_b, simulate_sw_w_scheme, BinningConfig, OsrbReport};
use securefn_core::probcore::{compose, cond_mutual_info, entropy, tv_distance, Alphabet, JointDistribution};
use securefn_core::protosim::OneRoundProtocol;
use securefn_core::rateopt::{minimize_rns, minimize_rs, AuxSpec, Mode, RateOutcome};
use securefn_core::{AuxPair, Seed, SeedStream};

const SEEDS: u64 = 20;
const TRIALS: usize = 1000;

fn fixture(name: &str) -> Instance {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    parse_instance(&path).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

struct Fixtures {
    and: Instance,
    identity: Instance,
    x_independent: Instance,
    bsc: Instance,
    rank_one: Instance,
}

impl Fixtures {
    fn load() -> Self {
        Fixtures {
            and: fixture("and.toml"),
            identity: fixture("identity.toml"),
            x_independent: fixture("x_independent.toml"),
            bsc: fixture("bsc.toml"),
            rank_one: fixture("rank_one.toml"),
        }
    }

    fn all(&self) -> [&Instance; 5] {
        [&self.and, &self.identity, &self.x_independent, &self.bsc, &self.rank_one]
    }

    fn certified(&self) -> [&Instance; 4] {
        [&self.identity, &self.x_independent, &self.bsc, &self.rank_one]
    }
}

/// Outcome of one criterion: pass flag plus detail lines.
struct Verdict {
    pass: bool,
    details: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict {
            pass: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.pass &= ok;
        self.details.push(format!("{} {detail}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, detail: String) {
        self.details.push(format!("info {detail}"));
    }

    fn within(&mut self, elapsed: Duration, limit: Duration, what: &str) {
        self.check(
            elapsed < limit,
            format!("{what} runtime {:.3} s < {} s", elapsed.as_secs_f64(), limit.as_secs()),
        );
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn w_joint(inst: &Instance) -> (charact::AuxiliaryChannel, JointDistribution) {
    let cert = charact::check_computable(inst).unwrap();
    let w = charact::build_w(inst, &cert).unwrap();
    let pw = compose(inst.p_xy(), &w.p_w_given_x).unwrap();
    let full = compose(&pw, &w.p_z_given_wy).unwrap();
    (w, full)
}

fn criterion_1(f: &Fixtures) -> Verdict {
    let mut v = Verdict::new();
    let t = Instant::now();
    let cert = charact::check_computable(&f.and).unwrap();
    let refuted = matches!(
        cert,
        SecurityCertificate::Refuted(Refutation::ClassCount { k: 1, k_other: 2, .. })
    );
    v.check(refuted, format!("and refuted by class count 1 vs 2: {:?}", cert.refutation()));
    v.within(t.elapsed(), secs(1), "and");
    for inst in f.certified() {
        let t = Instant::now();
        let cert = charact::check_computable(inst).unwrap();
        v.check(cert.is_computable(), format!("{} certified (k = {:?})", inst.name, cert.k()));
        v.within(t.elapsed(), secs(1), &inst.name);
    }
    v
}

fn criterion_2(f: &Fixtures) -> Verdict {
    let mut v = Verdict::new();
    let t = Instant::now();
    for inst in f.certified() {
        let (_, full) = w_joint(inst);
        let tv = tv_distance(&full.marginal(&[X, Y, Z]).unwrap(), &inst.target_joint()).unwrap();
        v.check(tv <= 1e-12, format!("{} composition TV {tv:.3e} <= 1e-12", inst.name));
        let h = entropy(&full, &[W], &[Y, Z]).unwrap();
        v.check(h <= 1e-12, format!("{} H(W|Y,Z) {h:.3e} <= 1e-12", inst.name));
    }
    v.within(t.elapsed(), secs(1), "all fixtures");
    v
}

fn criterion_3(f: &Fixtures) -> Verdict {
    let mut v = Verdict::new();
    let t = Instant::now();
    let r = optimal_rate_full_support(&f.x_independent).unwrap();
    v.check(r == Rate::Bits(0.0), format!("x-independent rate {r:?} = 0"));
    let r = optimal_rate_full_support(&f.identity).unwrap().bits().unwrap();
    v.check((r - 1.0).abs() <= 1e-9, format!("identity rate {r:.12} = 1 +- 1e-9"));
    let r = optimal_rate_full_support(&f.bsc).unwrap().bits().unwrap();
    let h = entropy(&f.bsc.target_joint(), &[Z], &[Y]).unwrap();
    v.check((r - h).abs() <= 1e-9, format!("bsc rate {r:.12} = H(Z|Y) {h:.12} +- 1e-9"));
    v.within(t.elapsed(), secs(1), "all");
    v
}

fn criterion_4(f: &Fixtures) -> Verdict {
    let mut v = Verdict::new();
    for inst in f.all() {
        let t = Instant::now();
        let rs = minimize_rs(inst, &AuxSpec::new(Mode::WithPrivacy)).unwrap();
        let rns = minimize_rns(inst, &AuxSpec::new(Mode::NoPrivacy)).unwrap();
        let elapsed = t.elapsed();
        let oracle = if inst.has_full_support() {
            optimal_rate_full_support(inst).unwrap()
        } else {
            Rate::Infinite
        };
        match (oracle, rs.outcome) {
            (Rate::Bits(o), RateOutcome::Bits(s)) => v.check(
                (s - o).abs() <= 1e-4,
                format!("{} minimize_rs {s:.9} vs oracle {o:.9} within 1e-4", inst.name),
            ),
            (Rate::Infinite, RateOutcome::Infinite) => v.note(format!("{} minimize_rs infinite as refuted", inst.name)),
            (o, s) => v.check(false, format!("{} minimize_rs {s:?} vs oracle {o:?}", inst.name)),
        }
        if let (RateOutcome::Bits(a), RateOutcome::Bits(b)) = (rns.outcome, rs.outcome) {
            v.check(a <= b + 1e-6, format!("{} minimize_rns {a:.9} <= minimize_rs {b:.9} + 1e-6", inst.name));
        }
        if inst.name == f.identity.name {
            let h = entropy(inst.p_xy(), &[X], &[Y]).unwrap();
            let got = rns.outcome.bits().unwrap_or(f64::NAN);
            v.check((got - h).abs() <= 1e-3, format!("identity minimize_rns {got:.9} = H(X|Y) {h:.9} +- 1e-3"));
        }
        v.within(elapsed, secs(60), &inst.name);
    }
    v
}

fn criterion_5(f: &Fixtures) -> Verdict {
    let mut v = Verdict::new();
    let t = Instant::now();
    for inst in f.certified() {
        let p = OneRoundProtocol::new(inst, 0).unwrap();
        let joint = p.induced_distribution().unwrap();
        let tv = tv_distance(&joint.marginal(&[X, Y, Z]).unwrap(), &inst.target_joint()).unwrap();
        v.check(tv <= 1e-12, format!("{} induced TV {tv:.3e} <= 1e-12", inst.name));
        let leak = p.analytic_leakage().unwrap();
        v.check(leak <= 1e-12, format!("{} analytic leakage {leak:.3e} <= 1e-12", inst.name));
    }
    v.within(t.elapsed(), secs(1), "all fixtures");
    v
}

fn criterion_6(f: &Fixtures) -> Verdict {
    let mut v = Verdict::new();
    let t = Instant::now();
    let p = OneRoundProtocol::new(&f.bsc, 0).unwrap();
    for seed in 0..5 {
        let (_, r) = p.run(100_000, Seed(seed)).unwrap();
        v.check(
            r.empirical_tv <= 0.02 && r.empirical_leakage <= 0.01,
            format!(
                "seed {seed}: TV {:.5} <= 0.02, I(U;X|Y,Z) {:.3e} <= 0.01",
                r.empirical_tv, r.empirical_leakage
            ),
        );
    }
    v.within(t.elapsed(), secs(30), "5 x 10^5 rounds");
    v
}

fn mean_reports(reports: &[OsrbReport]) -> (f64, f64) {
    let k = reports.len() as f64;
    (
        reports.iter().map(|r| r.decode_error_rate).sum::<f64>() / k,
        reports.iter().map(|r| r.independence_tv).sum::<f64>() / k,
    )
}

fn sweep(inst: &Instance, aux: &AuxPair, n: usize, rate_f: f64, rate_m: f64) -> Result<(f64, f64), String> {
    let mut reports = Vec::new();
    for s in 0..SEEDS {
        let config = BinningConfig {
            n,
            rate_f,
            rate_m,
            aux: aux.clone(),
            seed: Seed(s),
            trials: TRIALS,
        };
        reports.push(run_protocol_b(inst, &config).map_err(|e| e.to_string())?);
    }
    Ok(mean_reports(&reports))
}

fn criterion_7(f: &Fixtures) -> Verdict {
    let mut v = Verdict::new();
    let t = Instant::now();
    let inst = &f.identity;
    let (w, _) = w_joint(inst);
    let aux = w.as_aux_pair(inst);
    let joint = aux.induced_joint(inst).unwrap();
    let u = aux.u_alphabet().name().to_string();
    let h_u_y = entropy(&joint, &[&u], &[Y]).unwrap();
    let h_u_xyz = entropy(&joint, &[&u], &[X, Y, Z]).unwrap();
    v.note(format!("W as U: H(U|Y) = {h_u_y:.6}, H(U|X,Y,Z) = {h_u_xyz:.6}"));

    // (a) rate_f at its largest allowed value, sum rate at its smallest
    let rate_f = h_u_xyz - 0.2;
    let rate_m = h_u_y + 0.5 - rate_f;
    match (sweep(inst, &aux, 4, rate_f, rate_m), sweep(inst, &aux, 12, rate_f, rate_m)) {
        (Ok((e4, i4)), Ok((e12, i12))) => {
            v.check(e12 < e4, format!("(a) decode error n=12 {e12:.4} < n=4 {e4:.4}"));
            v.check(i12 < i4, format!("(a) independence TV n=12 {i12:.4} < n=4 {i4:.4}"));
        }
        (Err(e), _) | (_, Err(e)) => v.check(
            false,
            format!(
                "(a) needs rate_f <= H(U|X,Y,Z) - 0.2 = {rate_f:.3}, which no nonnegative rate meets because \
                 W is a function of (Y,Z); simulator rejected it: {e}"
            ),
        ),
    }
    if rate_f < 0.0 {
        // closest admissible point, reported for reference only
        let (e4, i4) = sweep(inst, &aux, 4, 0.0, h_u_y + 0.5).unwrap();
        let (e12, i12) = sweep(inst, &aux, 12, 0.0, h_u_y + 0.5).unwrap();
        v.note(format!(
            "(a) at rate_f = 0, rate_m = {:.2}: decode error {e4:.4} -> {e12:.4}, independence TV {i4:.4} -> {i12:.4} (n = 4 -> 12)",
            h_u_y + 0.5
        ));
    }

    // (b) sum rate 0.2 below H(U|Y)
    let (e12, _) = sweep(inst, &aux, 12, 0.0, h_u_y - 0.2).unwrap();
    v.check(
        e12 > 0.2,
        format!("(b) rate_f + rate_m = {:.2}: mean decode error at n=12 {e12:.4} > 0.2", h_u_y - 0.2),
    );
    v.within(t.elapsed(), secs(600), "sweeps");
    v
}

fn sw_w_mean(inst: &Instance, rate_m: f64, n: usize) -> f64 {
    (0..SEEDS)
        .map(|s| simulate_sw_w_scheme(inst, rate_m, n, TRIALS, Seed(s)).unwrap().decode_error_rate)
        .sum::<f64>()
        / SEEDS as f64
}

fn criterion_8(f: &Fixtures) -> Verdict {
    let mut v = Verdict::new();
    let t = Instant::now();
    let inst = &f.identity;
    let h = charact::optimal_rate_full_support(inst).unwrap().bits().unwrap();
    let above = h + 0.25;
    let (e4, e12) = (sw_w_mean(inst, above, 4), sw_w_mean(inst, above, 12));
    v.check(e12 < e4, format!("rate_m = {above:.2}: decode error n=12 {e12:.4} < n=4 {e4:.4}"));
    let below = h - 0.5;
    let e = sw_w_mean(inst, below, 12);
    v.check(e > 0.2, format!("rate_m = {below:.2}: decode error at n=12 {e:.4} > 0.2"));
    v.within(t.elapsed(), secs(300), "sweeps");
    v
}

fn random_pmf(rng: &mut SeedStream, len: usize, zero_prob: f64) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..len)
            .map(|_| if rng.next_f64() < zero_prob { 0.0 } else { rng.uniform(0.001, 1.0) })
            .collect();
        let s: f64 = raw.iter().sum();
        if s > 0.0 {
            return raw.into_iter().map(|v| v / s).collect();
        }
    }
}

fn probcore_case(rng: &mut SeedStream) -> Result<(), String> {
    let dims: Vec<usize> = (0..3).map(|_| 1 + rng.below(3) as usize).collect();
    let axes = vec![
        Alphabet::indexed("A", dims[0]),
        Alphabet::indexed("B", dims[1]),
        Alphabet::indexed("C", dims[2]),
    ];
    let p = JointDistribution::new(axes, random_pmf(rng, dims.iter().product(), 0.2)).unwrap();
    let whole = cond_mutual_info(&p, &["A"], &["B", "C"], &[]).unwrap();
    let split = cond_mutual_info(&p, &["A"], &["B"], &[]).unwrap() + cond_mutual_info(&p, &["A"], &["C"], &["B"]).unwrap();
    if (whole - split).abs() > 1e-9 {
        return Err(format!("chain rule {whole} vs {split}"));
    }
    for (axis, &size) in ["A", "B", "C"].iter().zip(&dims) {
        let h = entropy(&p, &[axis], &[]).unwrap();
        if h < 0.0 || h > (size as f64).log2() + 1e-12 {
            return Err(format!("entropy bound H({axis}) = {h}"));
        }
    }
    let m = dims[0];
    let pmf = |rng: &mut SeedStream| JointDistribution::new(vec![Alphabet::indexed("A", m)], random_pmf(rng, m, 0.0)).unwrap();
    let (a, b, c) = (pmf(rng), pmf(rng), pmf(rng));
    let ab = tv_distance(&a, &b).unwrap();
    if !(0.0..=1.0).contains(&ab)
        || tv_distance(&a, &a).unwrap() != 0.0
        || (ab - tv_distance(&b, &a).unwrap()).abs() > 1e-15
        || ab > tv_distance(&a, &c).unwrap() + tv_distance(&c, &b).unwrap() + 1e-12
    {
        return Err("TV metric axioms".into());
    }
    Ok(())
}

/// Computable problem from a random class structure; see the core property suite.
fn rank_one_case(rng: &mut SeedStream) -> Result<bool, String> {
    let nx = 2 + rng.below(2) as usize;
    let ny = 1 + rng.below(3) as usize;
    let k = 1 + rng.below(3) as usize;
    let nz = k + rng.below(3) as usize;
    let mut c = Vec::new();
    for _ in 0..nx {
        c.extend(random_pmf(rng, k, 0.0));
    }
    let p_xy = random_pmf(rng, nx * ny, 0.0);
    let mut t = vec![0.0; nx * ny * nz];
    for y in 0..ny {
        let mut owner: Vec<usize> = (0..k).collect();
        owner.extend((k..nz).map(|_| rng.below(k as u64) as usize));
        owner.rotate_left(rng.below(nz as u64) as usize);
        let split: Vec<f64> = (0..nz).map(|_| rng.uniform(0.1, 1.0)).collect();
        for i in 0..k {
            let members: Vec<usize> = (0..nz).filter(|&z| owner[z] == i).collect();
            let total: f64 = members.iter().map(|&z| split[z]).sum();
            for &z in &members {
                for x in 0..nx {
                    t[(x * ny + y) * nz + z] = c[x * k + i] * split[z] / total;
                }
            }
        }
    }
    let inst = Instance::new(
        "random-rank-one",
        Alphabet::indexed("x", nx),
        Alphabet::indexed("y", ny),
        Alphabet::indexed("z", nz),
        p_xy,
        t,
    )
    .map_err(|e| e.to_string())?;
    let cert = match charact::check_computable(&inst) {
        Ok(c) => c,
        // nearly parallel random class directions; skipped
        Err(securefn_core::Error::Degenerate(_)) => return Ok(false),
        Err(e) => return Err(e.to_string()),
    };
    if cert.k() != Some(k) {
        return Err(format!("expected {k} classes, got {:?}", cert.k()));
    }
    for (y, classes) in cert.classes().unwrap().iter().enumerate() {
        let mut seen = vec![0; nz];
        for class in classes {
            for (j, &z) in class.z_members.iter().enumerate() {
                seen[z] += 1;
                for x in 0..nx {
                    if (class.alpha[x] * class.gamma[j] - inst.p_z(z, x, y)).abs() > 1e-12 {
                        return Err(format!("alpha gamma reconstruction at x={x} y={y} z={z}"));
                    }
                }
            }
        }
        if seen.iter().any(|&s| s != 1) {
            return Err(format!("classes at y={y} do not partition the outputs"));
        }
    }
    Ok(true)
}

fn criterion_9(f: &Fixtures) -> Verdict {
    let mut v = Verdict::new();
    let t = Instant::now();
    let mut rng = Seed(9).stream(0);
    let failures: Vec<String> = (0..1000).filter_map(|_| probcore_case(&mut rng).err()).collect();
    v.check(failures.is_empty(), format!("probcore invariants on 1000 random joints: {} failures {:?}", failures.len(), failures.first()));

    let mut rng = Seed(9).stream(1);
    let (mut checked, mut skipped, mut errors) = (0, 0, Vec::new());
    while checked < 1000 {
        match rank_one_case(&mut rng) {
            Ok(true) => checked += 1,
            Ok(false) => skipped += 1,
            Err(e) => {
                checked += 1;
                errors.push(e);
            }
        }
    }
    v.check(
        errors.is_empty(),
        format!("partition and alpha gamma reconstruction on 1000 rank-one instances ({skipped} degenerate draws redrawn): {} failures {:?}", errors.len(), errors.first()),
    );

    let spec = AuxSpec {
        u_card: Some(3),
        restarts: 2,
        max_iters: 50,
        seed: Seed(3),
        ..AuxSpec::new(Mode::NoPrivacy)
    };
    let opt = minimize_rns(&f.bsc, &spec).unwrap() == minimize_rns(&f.bsc, &spec).unwrap();
    let p = OneRoundProtocol::new(&f.rank_one, 0).unwrap();
    let sim = p.run(5000, Seed(5)).unwrap() == p.run(5000, Seed(5)).unwrap();
    let aux = w_joint(&f.identity).0.as_aux_pair(&f.identity);
    let config = BinningConfig {
        n: 8,
        rate_f: 0.25,
        rate_m: 1.0,
        aux,
        seed: Seed(7),
        trials: 200,
    };
    let bins = run_protocol_b(&f.identity, &config).unwrap() == run_protocol_b(&f.identity, &config).unwrap();
    v.check(opt && sim && bins, format!("replay: optimizer {opt}, protocol {sim}, binning {bins}"));
    v.within(t.elapsed(), secs(120), "suites");
    v
}

fn main() -> ExitCode {
    let fixtures = Fixtures::load();
    let criteria: [(&str, fn(&Fixtures) -> Verdict); 9] = [
        ("characterization correctness", criterion_1),
        ("class-variable identity", criterion_2),
        ("exact rates", criterion_3),
        ("optimizer sandwich", criterion_4),
        ("protocol exactness", criterion_5),
        ("protocol simulation", criterion_6),
        ("binning trends", criterion_7),
        ("class-variable binning scheme", criterion_8),
        ("property suites", criterion_9),
    ];
    let mut passed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let verdict = run(&fixtures);
        println!(
            "{} criterion {}: {name} ({:.2} s)",
            if verdict.pass { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64()
        );
        for d in &verdict.details {
            println!("    {d}");
        }
        passed += verdict.pass as usize;
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed == criteria.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
