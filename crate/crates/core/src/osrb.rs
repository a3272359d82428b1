//! Finite-blocklength simulation of random binning over `U^n`.
//!
//! Every sequence `u^n` gets two independent uniform bin indices `f` and
//! `m`. Bob recovers `u^n` from `(f, m, y^n)` by maximum likelihood within
//! the bin and emits `z^n` symbolwise through `p(z|u,y)`.
//!
//! Alice's encoder is idealized: `u^n` is drawn i.i.d. through `p(u|x)` and
//! `f = f_map(u^n)` is published alongside `m = m_map(u^n)`. Sequences are
//! indexed base `|U|` with the first symbol most significant, so index order
//! is lexicographic order on `U^n`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::charact;
use crate::instance::{AuxPair, Instance};
use crate::probcore::{Categorical, Seed, SeedStream, Tally};
use crate::{Error, Result};

/// Largest `|U|^n` a binning may enumerate.
pub const SEQUENCE_BUDGET: f64 = 1e7;

/// How Alice draws `u^n`; carried in every report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderKind {
    /// `u^n` i.i.d. through `p(u|x)` in place of the exact reverse encoder.
    IdealizedIid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinningConfig {
    pub n: usize,
    pub rate_f: f64,
    pub rate_m: f64,
    pub aux: AuxPair,
    pub seed: Seed,
    pub trials: usize,
}

impl BinningConfig {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Parameter("blocklength n must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        for (name, r) in [("rate_f", self.rate_f), ("rate_m", self.rate_m)] {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::Parameter(format!("{name} must be a finite nonnegative rate, got {r}")));
            }
        }
        Ok(())
    }
}

/// `⌈2^{n·rate}⌉`, reading `n·rate` within 1e-9 of an integer as that integer.
pub fn bin_count(n: usize, rate: f64) -> Result<u64> {
    let e = n as f64 * rate;
    let count = if (e - libm::round(e)).abs() < 1e-9 {
        libm::exp2(libm::round(e))
    } else {
        libm::ceil(libm::exp2(e))
    };
    if count > u32::MAX as f64 {
        return Err(Error::Budget {
            what: "bin count",
            needed: count,
            limit: u32::MAX as f64,
        });
    }
    Ok(count as u64)
}

/// Seeded random bin assignment of every sequence in `U^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binning {
    n: usize,
    u_card: usize,
    f_bins: u64,
    m_bins: u64,
    f_map: Vec<u32>,
    m_map: Vec<u32>,
    /// `(f * m_bins + m, sequence)`, sorted.
    index: Vec<(u64, u32)>,
}

impl Binning {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn u_card(&self) -> usize {
        self.u_card
    }

    pub fn f_bins(&self) -> u64 {
        self.f_bins
    }

    pub fn m_bins(&self) -> u64 {
        self.m_bins
    }

    pub fn f_map(&self) -> &[u32] {
        &self.f_map
    }

    pub fn m_map(&self) -> &[u32] {
        &self.m_map
    }

    pub fn len(&self) -> usize {
        self.f_map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_map.is_empty()
    }

    /// `(f, m)` of a sequence.
    pub fn bins_of(&self, seq: &[usize]) -> (u32, u32) {
        let s = self.encode(seq);
        (self.f_map[s], self.m_map[s])
    }

    /// Sequences in bin `(f, m)`, in lexicographic order.
    pub fn members(&self, f: u32, m: u32) -> impl Iterator<Item = usize> + '_ {
        let key = f as u64 * self.m_bins + m as u64;
        let lo = self.index.partition_point(|e| e.0 < key);
        let hi = self.index.partition_point(|e| e.0 <= key);
        self.index[lo..hi].iter().map(|e| e.1 as usize)
    }

    pub fn encode(&self, seq: &[usize]) -> usize {
        seq.iter().fold(0, |acc, &u| acc * self.u_card + u)
    }

    pub fn decode_index(&self, mut s: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = s % self.u_card;
            s /= self.u_card;
        }
    }
}

pub fn generate_binning(config: &BinningConfig) -> Result<Binning> {
    config.validate()?;
    let u_card = config.aux.u_card();
    let needed = libm::pow(u_card as f64, config.n as f64);
    if needed > SEQUENCE_BUDGET {
        return Err(Error::Budget {
            what: "binning enumeration |U|^n",
            needed,
            limit: SEQUENCE_BUDGET,
        });
    }
    let total = needed as usize;
    let f_bins = bin_count(config.n, config.rate_f)?;
    let m_bins = bin_count(config.n, config.rate_m)?;
    let mut rng = config.seed.stream(0);
    let mut f_map = Vec::with_capacity(total);
    let mut m_map = Vec::with_capacity(total);
    for _ in 0..total {
        f_map.push(rng.below(f_bins) as u32);
        m_map.push(rng.below(m_bins) as u32);
    }
    let mut index: Vec<(u64, u32)> = (0..total)
        .map(|s| (f_map[s] as u64 * m_bins + m_map[s] as u64, s as u32))
        .collect();
    index.sort_unstable();
    Ok(Binning {
        n: config.n,
        u_card,
        f_bins,
        m_bins,
        f_map,
        m_map,
        index,
    })
}

/// Maximum-likelihood sequence in bin `(f, m)` given `y^n`.
///
/// `p_u_given_y` is indexed `[y][u]`. Ties go to the lexicographically
/// first sequence; `None` means the bin is empty.
pub fn sw_decode(
    binning: &Binning,
    p_u_given_y: &[f64],
    f: u32,
    m: u32,
    y_seq: &[usize],
) -> Result<Option<Vec<usize>>> {
    if y_seq.len() != binning.n {
        return Err(Error::Shape(format!(
            "y sequence has length {}, blocklength is {}",
            y_seq.len(),
            binning.n
        )));
    }
    if f as u64 >= binning.f_bins || m as u64 >= binning.m_bins {
        return Err(Error::Parameter(format!(
            "bin ({f}, {m}) outside {} x {}",
            binning.f_bins, binning.m_bins
        )));
    }
    let nu = binning.u_card;
    if p_u_given_y.len() % nu != 0 || y_seq.iter().any(|&y| (y + 1) * nu > p_u_given_y.len()) {
        return Err(Error::Shape("p(u|y) table does not cover y sequence".into()));
    }
    let log: Vec<f64> = y_seq
        .iter()
        .flat_map(|&y| p_u_given_y[y * nu..(y + 1) * nu].iter().map(|&p| libm::log(p)))
        .collect();
    Ok(ml_in_bin(binning, &log, f, m).map(|s| {
        let mut out = vec![0; binning.n];
        binning.decode_index(s, &mut out);
        out
    }))
}

/// `log` is `[i][u]` per position.
fn ml_in_bin(binning: &Binning, log: &[f64], f: u32, m: u32) -> Option<usize> {
    let (n, nu) = (binning.n, binning.u_card);
    let mut best: Option<(f64, usize)> = None;
    for s in binning.members(f, m) {
        let mut rest = s;
        let mut ll = 0.0;
        for i in (0..n).rev() {
            ll += log[i * nu + rest % nu];
            rest /= nu;
        }
        // members arrive in increasing order, so strict > keeps the first on ties
        if best.map_or(true, |(b, _)| ll > b) {
            best = Some((ll, s));
        }
    }
    best.map(|(_, s)| s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OsrbReport {
    pub n: usize,
    pub rate_f: f64,
    pub rate_m: f64,
    /// `log2(bins) / n`, the rates actually simulated.
    pub effective_rate_f: f64,
    pub effective_rate_m: f64,
    pub f_bins: u64,
    pub m_bins: u64,
    /// Fraction of trials with `û^n ≠ u^n`, empty bins included.
    pub decode_error_rate: f64,
    /// Trials whose bin was empty.
    pub decode_failures: usize,
    /// TV between pooled `(x,y,z)` frequencies and the target.
    pub empirical_tv: f64,
    /// TV between pooled `(x,y,z,f)` frequencies and target times uniform `f`.
    pub independence_tv: f64,
    /// Plug-in `I(M; X | Y, Z)` over pooled symbols.
    pub leakage_proxy: f64,
    pub trials: usize,
    pub seed: Seed,
    pub encoder: EncoderKind,
}

#[derive(Debug)]
struct Samplers {
    inputs: Categorical,
    encoder: Vec<Categorical>,
    decoder: Vec<Categorical>,
    /// `[y][u]`
    p_u_given_y: Vec<f64>,
}

impl Samplers {
    fn new(instance: &Instance, aux: &AuxPair) -> Result<Self> {
        let nu = aux.u_card();
        let nz = instance.z().size();
        Ok(Samplers {
            inputs: Categorical::new(instance.p_xy().mass())?,
            encoder: aux.encoder.rows().chunks(nu).map(Categorical::new).collect::<Result<_>>()?,
            decoder: aux.decoder.rows().chunks(nz).map(Categorical::new).collect::<Result<_>>()?,
            p_u_given_y: aux.p_u_given_y(instance),
        })
    }
}

/// Runs the binning scheme for `config.trials` blocks.
///
/// Trial `t` draws from `config.seed.stream(t + 1)`; stream 0 generates the
/// binning.
pub fn run_protocol_b(instance: &Instance, config: &BinningConfig) -> Result<OsrbReport> {
    let binning = generate_binning(config)?;
    run_with_binning(instance, config, &binning)
}

fn run_with_binning(instance: &Instance, config: &BinningConfig, binning: &Binning) -> Result<OsrbReport> {
    config.validate()?;
    if config.aux.encoder.inputs()[0].size() != instance.x().size() {
        return Err(Error::Shape("aux does not fit the instance".into()));
    }
    let n = config.n;
    let (ny, nz) = (instance.y().size(), instance.z().size());
    let nu = binning.u_card;
    let samplers = Samplers::new(instance, &config.aux)?;
    let log_table: Vec<f64> = samplers.p_u_given_y.iter().map(|&p| libm::log(p)).collect();

    let nx = instance.x().size();
    let mut xyz_counts = vec![0u64; nx * ny * nz];
    let mut independence = Tally::new(2);
    let mut leakage = Tally::new(4);
    let mut errors = 0usize;
    let mut failures = 0usize;

    let (mut xs, mut ys, mut us, mut uh) = (vec![0; n], vec![0; n], vec![0; n], vec![0; n]);
    let mut log = vec![0.0; n * nu];
    for t in 0..config.trials {
        let mut rng: SeedStream = config.seed.stream(t as u64 + 1);
        for i in 0..n {
            let xy = samplers.inputs.sample(&mut rng);
            xs[i] = xy / ny;
            ys[i] = xy % ny;
            us[i] = samplers.encoder[xs[i]].sample(&mut rng);
        }
        let s = binning.encode(&us);
        let (f, m) = (binning.f_map[s], binning.m_map[s]);
        for i in 0..n {
            log[i * nu..(i + 1) * nu].copy_from_slice(&log_table[ys[i] * nu..(ys[i] + 1) * nu]);
        }
        match ml_in_bin(binning, &log, f, m) {
            Some(sh) => {
                binning.decode_index(sh, &mut uh);
                if sh != s {
                    errors += 1;
                }
            }
            None => {
                // unreachable while f and m come from u^n itself; emit from symbol 0
                failures += 1;
                errors += 1;
                uh.iter_mut().for_each(|u| *u = 0);
            }
        }
        for i in 0..n {
            let z = samplers.decoder[uh[i] * ny + ys[i]].sample(&mut rng);
            let cell = (xs[i] * ny + ys[i]) * nz + z;
            xyz_counts[cell] += 1;
            independence.add(&[cell as u64, f as u64]);
            leakage.add(&[m as u64, xs[i] as u64, ys[i] as u64, z as u64]);
        }
    }

    let pooled = (config.trials * n) as f64;
    let target = instance.target_joint();
    let target = target.mass();
    let empirical_tv = 0.5
        * xyz_counts
            .iter()
            .zip(target)
            .map(|(&c, &p)| (c as f64 / pooled - p).abs())
            .sum::<f64>();
    let uniform_f = 1.0 / binning.f_bins as f64;
    let mut observed_q = 0.0;
    let mut abs = 0.0;
    for (key, c) in independence.iter() {
        let q = target[key[0] as usize] * uniform_f;
        observed_q += q;
        abs += (c as f64 / pooled - q).abs();
    }
    // unobserved cells contribute their full reference mass
    let independence_tv = 0.5 * (abs + (1.0 - observed_q).max(0.0));

    Ok(OsrbReport {
        n,
        rate_f: config.rate_f,
        rate_m: config.rate_m,
        effective_rate_f: libm::log2(binning.f_bins as f64) / n as f64,
        effective_rate_m: libm::log2(binning.m_bins as f64) / n as f64,
        f_bins: binning.f_bins,
        m_bins: binning.m_bins,
        decode_error_rate: errors as f64 / config.trials as f64,
        decode_failures: failures,
        empirical_tv,
        independence_tv,
        leakage_proxy: leakage.cond_mutual_info(&[0], &[1], &[2, 3]),
        trials: config.trials,
        seed: config.seed,
        encoder: EncoderKind::IdealizedIid,
    })
}

/// One report per `(rate_f, rate_m)` cell and blocklength, cells outermost.
pub fn rate_region_sweep(
    instance: &Instance,
    aux: &AuxPair,
    grid: &[(f64, f64)],
    n_list: &[usize],
    trials: usize,
    seed: Seed,
) -> Result<Vec<OsrbReport>> {
    if grid.is_empty() {
        return Err(Error::Parameter("rate grid is empty".into()));
    }
    if n_list.is_empty() {
        return Err(Error::Parameter("blocklength list is empty".into()));
    }
    let mut out = Vec::with_capacity(grid.len() * n_list.len());
    for &(rate_f, rate_m) in grid {
        for &n in n_list {
            let config = BinningConfig {
                n,
                rate_f,
                rate_m,
                aux: aux.clone(),
                seed,
                trials,
            };
            out.push(run_protocol_b(instance, &config)?);
        }
    }
    Ok(out)
}

/// Bins `W^n` at `rate_m` with no `f` bins; needs a computable problem.
pub fn simulate_sw_w_scheme(instance: &Instance, rate_m: f64, n: usize, trials: usize, seed: Seed) -> Result<OsrbReport> {
    let cert = charact::check_computable(instance)?;
    if !cert.is_computable() {
        return Err(Error::Contract("the W scheme needs a computable problem".into()));
    }
    let w = charact::build_w(instance, &cert)?;
    let config = BinningConfig {
        n,
        rate_f: 0.0,
        rate_m,
        aux: w.as_aux_pair(instance),
        seed,
        trials,
    };
    run_protocol_b(instance, &config)
}
