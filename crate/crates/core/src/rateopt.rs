//! Numerical minimization of the single-letter rate expressions.
//!
//! The search runs over encoder/decoder pairs `(p(u|x), p(z|u,y))`, which
//! makes `U − X − Y` and `Z − (U,Y) − X` hold by construction. Correctness
//! (the induced `p(z|x,y)` equals the target) and, with privacy, the chain
//! `U − (Y,Z) − X` are soft constraints under a quadratic penalty whose
//! weight doubles every [`PENALTY_PERIOD`] iterations. A point only counts
//! when it passes the final gate of [`FEASIBILITY_TOL`] on every soft
//! constraint.
//!
//! * without privacy the objective is `I(X,Z; U | Y)`,
//! * with privacy it is `I(Z; U | Y)`.
//!
//! Results are upper bounds on the true minimum unless the full-support
//! characterization certifies the value.

use alloc::vec;
use alloc::vec::Vec;

use crate::charact::{self, AuxiliaryChannel, SecurityCertificate};
use crate::instance::{AuxPair, Instance, U, X, Y, Z};
use crate::probcore::{cond_mutual_info, info::entropy_of, tv_distance, Alphabet, Channel, Seed, SeedStream};
use crate::{Error, Result};

/// Gate on correctness TV and privacy CMI for a point to count as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Iterations between penalty-weight doublings.
pub const PENALTY_PERIOD: usize = 50;

/// Central-difference step on the logits.
pub const GRADIENT_STEP: f64 = 1e-6;

/// Largest `u_card^|X|` that [`enumerate_deterministic_u`] accepts.
pub const DETERMINISTIC_BUDGET: f64 = 1e6;

const LOGIT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Minimize `I(Z;U|Y)` under all three chains.
    WithPrivacy,
    /// Minimize `I(X,Z;U|Y)` without the privacy chain.
    NoPrivacy,
}

/// Search configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxSpec {
    /// `None` means `|X||Y||Z| + 2`.
    pub u_card: Option<usize>,
    pub mode: Mode,
    /// Random initializations, on top of the warm starts.
    pub restarts: usize,
    pub seed: Seed,
    pub penalty_weight: f64,
    pub max_iters: usize,
    pub convergence_tol: f64,
}

impl AuxSpec {
    pub fn new(mode: Mode) -> Self {
        AuxSpec {
            u_card: None,
            mode,
            restarts: 4,
            seed: Seed(0),
            penalty_weight: 10.0,
            max_iters: 300,
            convergence_tol: 1e-9,
        }
    }

    pub fn u_card_for(&self, instance: &Instance) -> usize {
        self.u_card.unwrap_or_else(|| default_u_card(instance))
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Parameter(what.into()));
        if self.u_card == Some(0) {
            return bad("u_card must be at least 1");
        }
        if !(self.convergence_tol > 0.0) {
            return bad("convergence_tol must be positive");
        }
        if !(self.penalty_weight > 0.0) {
            return bad("penalty_weight must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        Ok(())
    }
}

/// `|X||Y||Z| + 2`.
pub fn default_u_card(instance: &Instance) -> usize {
    instance.x().size() * instance.y().size() * instance.z().size() + 2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateOutcome {
    Bits(f64),
    /// The characterization refuted secure computability.
    Infinite,
    /// No point passed the feasibility gate within the budget.
    Infeasible,
}

impl RateOutcome {
    pub fn bits(self) -> Option<f64> {
        match self {
            RateOutcome::Bits(b) => Some(b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certification {
    /// Certified by the full-support characterization.
    Exact,
    UpperBound,
}

/// Markov-chain residuals, as conditional mutual informations in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// `I(U; Y | X)` for `U − X − Y`.
    pub u_x_y: f64,
    /// `I(Z; X | U, Y)` for `Z − (U,Y) − X`.
    pub z_uy_x: f64,
    /// `I(U; X | Y, Z)` for `U − (Y,Z) − X`; only imposed with privacy.
    pub u_yz_x: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestartKind {
    DeterministicBaseline,
    WChannel,
    Random(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartRecord {
    pub kind: RestartKind,
    pub best_feasible: Option<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub mode: Mode,
    pub outcome: RateOutcome,
    pub certification: Certification,
    pub u_card: usize,
    /// The realizing pair, or for an infeasible search the least violating one.
    pub best_aux: Option<AuxPair>,
    pub residuals: Option<Residuals>,
    /// TV between the induced and target `p(x,y,z)`.
    pub correctness_residual: Option<f64>,
    pub restart_trace: Vec<RestartRecord>,
}

/// Objective and residuals of `aux`, recomputed from scratch with `probcore`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub residuals: Residuals,
    pub correctness: f64,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        self.correctness <= FEASIBILITY_TOL
            && self.residuals.u_yz_x.map_or(true, |p| p <= FEASIBILITY_TOL)
    }
}

pub fn evaluate(instance: &Instance, aux: &AuxPair, mode: Mode) -> Result<Evaluation> {
    let joint = aux.induced_joint(instance)?;
    let u = aux.u_alphabet().name();
    let objective = match mode {
        Mode::NoPrivacy => cond_mutual_info(&joint, &[X, Z], &[u], &[Y])?,
        Mode::WithPrivacy => cond_mutual_info(&joint, &[Z], &[u], &[Y])?,
    };
    let privacy = cond_mutual_info(&joint, &[u], &[X], &[Y, Z])?;
    let residuals = Residuals {
        u_x_y: cond_mutual_info(&joint, &[u], &[Y], &[X])?,
        z_uy_x: cond_mutual_info(&joint, &[Z], &[X], &[u, Y])?,
        u_yz_x: (mode == Mode::WithPrivacy).then_some(privacy),
    };
    let correctness = tv_distance(&joint.marginal(&[X, Y, Z])?, &instance.target_joint())?;
    Ok(Evaluation {
        objective,
        residuals,
        correctness,
    })
}

/// Dense evaluator for the inner loop. Must agree with [`evaluate`].
#[derive(Debug)]
struct FastEval {
    nx: usize,
    ny: usize,
    nz: usize,
    nu: usize,
    p_xy: Vec<f64>,
    target: Vec<f64>,
    h_y: f64,
    q: Vec<f64>,
    xyz: Vec<f64>,
    uyz: Vec<f64>,
    uy: Vec<f64>,
    yz: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    objective: f64,
    tv: f64,
    privacy: f64,
}

impl FastEval {
    fn new(instance: &Instance, nu: usize) -> Self {
        let (nx, ny, nz) = (instance.x().size(), instance.y().size(), instance.z().size());
        let p_xy = instance.p_xy().mass().to_vec();
        let target = instance.target_joint().mass().to_vec();
        let p_y: Vec<f64> = (0..ny)
            .map(|y| (0..nx).map(|x| p_xy[x * ny + y]).sum())
            .collect();
        FastEval {
            nx,
            ny,
            nz,
            nu,
            p_xy,
            target,
            h_y: entropy_of(&p_y),
            q: vec![0.0; nx * ny * nu * nz],
            xyz: vec![0.0; nx * ny * nz],
            uyz: vec![0.0; nu * ny * nz],
            uy: vec![0.0; nu * ny],
            yz: vec![0.0; ny * nz],
        }
    }

    /// `enc` is `[x][u]`, `dec` is `[u][y][z]`.
    fn eval(&mut self, enc: &[f64], dec: &[f64], mode: Mode) -> Point {
        let (nx, ny, nz, nu) = (self.nx, self.ny, self.nz, self.nu);
        self.xyz.iter_mut().for_each(|v| *v = 0.0);
        self.uyz.iter_mut().for_each(|v| *v = 0.0);
        for x in 0..nx {
            for y in 0..ny {
                let pxy = self.p_xy[x * ny + y];
                for u in 0..nu {
                    let a = pxy * enc[x * nu + u];
                    let d = &dec[(u * ny + y) * nz..(u * ny + y + 1) * nz];
                    let qbase = ((x * ny + y) * nu + u) * nz;
                    for z in 0..nz {
                        let v = a * d[z];
                        self.q[qbase + z] = v;
                        self.xyz[(x * ny + y) * nz + z] += v;
                        self.uyz[(u * ny + y) * nz + z] += v;
                    }
                }
            }
        }
        for u in 0..nu {
            for y in 0..ny {
                self.uy[u * ny + y] = self.uyz[(u * ny + y) * nz..(u * ny + y + 1) * nz].iter().sum();
            }
        }
        self.yz.iter_mut().for_each(|v| *v = 0.0);
        for u in 0..nu {
            for yz in 0..ny * nz {
                self.yz[yz] += self.uyz[u * ny * nz + yz];
            }
        }
        let h_xyzu = entropy_of(&self.q);
        let h_xyz = entropy_of(&self.xyz);
        let h_uyz = entropy_of(&self.uyz);
        let h_uy = entropy_of(&self.uy);
        let h_yz = entropy_of(&self.yz);
        let objective = match mode {
            Mode::NoPrivacy => h_xyz + h_uy - h_xyzu - self.h_y,
            Mode::WithPrivacy => h_yz + h_uy - h_uyz - self.h_y,
        }
        .max(0.0);
        let privacy = (h_uyz + h_xyz - h_xyzu - h_yz).max(0.0);
        let tv = crate::probcore::tv_slices(&self.xyz, &self.target);
        Point {
            objective,
            tv,
            privacy,
        }
    }
}

impl Point {
    fn feasible(&self, mode: Mode) -> bool {
        self.tv <= FEASIBILITY_TOL && (mode == Mode::NoPrivacy || self.privacy <= FEASIBILITY_TOL)
    }

    fn penalized(&self, mode: Mode, weight: f64) -> f64 {
        let mut f = self.objective + weight * self.tv * self.tv;
        if mode == Mode::WithPrivacy {
            f += weight * self.privacy * self.privacy;
        }
        f
    }

    fn violation(&self, mode: Mode) -> f64 {
        match mode {
            Mode::NoPrivacy => self.tv,
            Mode::WithPrivacy => self.tv.max(self.privacy),
        }
    }
}

fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = libm::exp(l - m);
        s += *o;
    }
    out.iter_mut().for_each(|o| *o /= s);
}

fn logits_of(probs: &[f64]) -> Vec<f64> {
    probs.iter().map(|&p| libm::log(p.max(LOGIT_FLOOR))).collect()
}

/// Encoder/decoder pair as logits, with row widths `nu` and `nz`.
#[derive(Debug, Clone)]
struct Params {
    enc: Vec<f64>,
    dec: Vec<f64>,
}

#[derive(Debug)]
struct Search<'a> {
    instance: &'a Instance,
    mode: Mode,
    nu: usize,
    eval: FastEval,
    enc_p: Vec<f64>,
    dec_p: Vec<f64>,
}

impl<'a> Search<'a> {
    fn new(instance: &'a Instance, mode: Mode, nu: usize) -> Self {
        let (nx, ny, nz) = (instance.x().size(), instance.y().size(), instance.z().size());
        Search {
            instance,
            mode,
            nu,
            eval: FastEval::new(instance, nu),
            enc_p: vec![0.0; nx * nu],
            dec_p: vec![0.0; nu * ny * nz],
        }
    }

    fn nz(&self) -> usize {
        self.instance.z().size()
    }

    fn load(&mut self, p: &Params) {
        let (nu, nz) = (self.nu, self.nz());
        for (l, o) in p.enc.chunks(nu).zip(self.enc_p.chunks_mut(nu)) {
            softmax_into(l, o);
        }
        for (l, o) in p.dec.chunks(nz).zip(self.dec_p.chunks_mut(nz)) {
            softmax_into(l, o);
        }
    }

    fn point(&mut self) -> Point {
        self.eval.eval(&self.enc_p, &self.dec_p, self.mode)
    }

    fn f(&mut self, p: &Params, weight: f64) -> f64 {
        self.load(p);
        self.point().penalized(self.mode, weight)
    }

    /// Central-difference gradient over one block, recomputing only the touched row.
    fn gradient(&mut self, p: &mut Params, block: Block, weight: f64) -> Vec<f64> {
        self.load(p);
        let width = match block {
            Block::Encoder => self.nu,
            Block::Decoder => self.nz(),
        };
        let len = match block {
            Block::Encoder => p.enc.len(),
            Block::Decoder => p.dec.len(),
        };
        let mut g = vec![0.0; len];
        for i in 0..len {
            let row = i / width;
            let side = |s: &mut Self, p: &mut Params, delta: f64| -> f64 {
                let (logits, probs) = match block {
                    Block::Encoder => (&mut p.enc, &mut s.enc_p),
                    Block::Decoder => (&mut p.dec, &mut s.dec_p),
                };
                logits[i] += delta;
                softmax_into(
                    &logits[row * width..(row + 1) * width],
                    &mut probs[row * width..(row + 1) * width],
                );
                let v = s.point().penalized(s.mode, weight);
                logits[i] -= delta;
                v
            };
            let hi = side(self, p, GRADIENT_STEP);
            let lo = side(self, p, -GRADIENT_STEP);
            g[i] = (hi - lo) / (2.0 * GRADIENT_STEP);
            let (logits, probs) = match block {
                Block::Encoder => (&p.enc, &mut self.enc_p),
                Block::Decoder => (&p.dec, &mut self.dec_p),
            };
            softmax_into(
                &logits[row * width..(row + 1) * width],
                &mut probs[row * width..(row + 1) * width],
            );
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Encoder,
    Decoder,
}

#[derive(Debug, Clone)]
struct Candidate {
    objective: f64,
    enc: Vec<f64>,
    dec: Vec<f64>,
}

#[derive(Debug)]
struct RestartOutcome {
    feasible: Option<Candidate>,
    least_violating: (f64, Candidate),
    iterations: usize,
}

/// One local search: alternating backtracking gradient steps on the encoder
/// and decoder logits. `exact_start` is scored before any step so a feasible
/// warm start is never lost.
fn local_search(
    search: &mut Search<'_>,
    mut params: Params,
    exact_start: Option<(&[f64], &[f64])>,
    spec: &AuxSpec,
) -> RestartOutcome {
    let mode = spec.mode;
    let mut feasible: Option<Candidate> = None;
    let mut least: Option<(f64, Candidate)> = None;

    let mut consider = |pt: Point, enc: &[f64], dec: &[f64]| {
        let cand = || Candidate {
            objective: pt.objective,
            enc: enc.to_vec(),
            dec: dec.to_vec(),
        };
        if pt.feasible(mode) {
            if feasible.as_ref().map_or(true, |c| pt.objective < c.objective) {
                feasible = Some(cand());
            }
        }
        let v = pt.violation(mode);
        if least.as_ref().map_or(true, |(lv, _)| v < *lv) {
            least = Some((v, cand()));
        }
    };

    if let Some((enc, dec)) = exact_start {
        let pt = search.eval.eval(enc, dec, mode);
        consider(pt, enc, dec);
    }
    search.load(&params);
    let pt = search.point();
    consider(pt, &search.enc_p, &search.dec_p);

    let mut weight = spec.penalty_weight;
    let mut steps = [1.0f64, 1.0f64];
    let mut iterations = 0;
    let mut f_prev = search.f(&params, weight);
    for it in 0..spec.max_iters {
        iterations = it + 1;
        if it > 0 && it % PENALTY_PERIOD == 0 {
            weight *= 2.0;
            f_prev = search.f(&params, weight);
        }
        let mut f_now = f_prev;
        for (b, block) in [Block::Encoder, Block::Decoder].into_iter().enumerate() {
            let g = search.gradient(&mut params, block, weight);
            let g2: f64 = g.iter().map(|v| v * v).sum();
            if g2 == 0.0 {
                continue;
            }
            let mut step = steps[b];
            loop {
                let mut trial = params.clone();
                let target = match block {
                    Block::Encoder => &mut trial.enc,
                    Block::Decoder => &mut trial.dec,
                };
                target.iter_mut().zip(&g).for_each(|(t, gi)| *t -= step * gi);
                let f_trial = search.f(&trial, weight);
                if f_trial <= f_now - 1e-4 * step * g2 {
                    params = trial;
                    f_now = f_trial;
                    steps[b] = (step * 2.0).min(1e4);
                    break;
                }
                step *= 0.5;
                if step < 1e-12 {
                    steps[b] = 1e-3;
                    break;
                }
            }
        }
        search.load(&params);
        let pt = search.point();
        consider(pt, &search.enc_p, &search.dec_p);
        let done = (f_prev - f_now).abs() <= spec.convergence_tol * (1.0 + f_now.abs())
            && pt.feasible(mode);
        f_prev = f_now;
        if done {
            break;
        }
    }
    RestartOutcome {
        feasible,
        least_violating: least.expect("at least one point scored"),
        iterations,
    }
}

fn u_alphabet(nu: usize) -> Alphabet {
    Alphabet::indexed(U, nu)
}

fn aux_from(instance: &Instance, nu: usize, enc: &[f64], dec: &[f64]) -> Result<AuxPair> {
    let ua = u_alphabet(nu);
    let encoder = Channel::new(vec![instance.x().clone()], vec![ua.clone()], renormalize(enc, nu))?;
    let decoder = Channel::new(
        vec![ua, instance.y().clone()],
        vec![instance.z().clone()],
        renormalize(dec, instance.z().size()),
    )?;
    AuxPair::new(instance, encoder, decoder)
}

fn renormalize(rows: &[f64], width: usize) -> Vec<f64> {
    let mut out = rows.to_vec();
    for r in out.chunks_mut(width) {
        let s: f64 = r.iter().sum();
        r.iter_mut().for_each(|v| *v /= s);
    }
    out
}

/// Pads a smaller pair into `nu` message symbols: unused symbols are never
/// sent and decode uniformly.
fn embed(instance: &Instance, aux: &AuxPair, nu: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let k = aux.u_card();
    if k > nu {
        return None;
    }
    let (nx, ny, nz) = (instance.x().size(), instance.y().size(), instance.z().size());
    let mut enc = vec![0.0; nx * nu];
    for x in 0..nx {
        for u in 0..k {
            enc[x * nu + u] = aux.p_u(u, x);
        }
    }
    let mut dec = vec![1.0 / nz as f64; nu * ny * nz];
    dec[..k * ny * nz].copy_from_slice(aux.decoder.rows());
    Some((enc, dec))
}

fn random_params(rng: &mut SeedStream, enc_len: usize, dec_len: usize) -> Params {
    Params {
        enc: (0..enc_len).map(|_| rng.uniform(-2.0, 2.0)).collect(),
        dec: (0..dec_len).map(|_| rng.uniform(-2.0, 2.0)).collect(),
    }
}

fn finish(
    instance: &Instance,
    mode: Mode,
    nu: usize,
    outcome_aux: Option<(bool, AuxPair)>,
    certification: Certification,
    restart_trace: Vec<RestartRecord>,
) -> Result<RateResult> {
    let Some((feasible, aux)) = outcome_aux else {
        return Ok(RateResult {
            mode,
            outcome: RateOutcome::Infeasible,
            certification,
            u_card: nu,
            best_aux: None,
            residuals: None,
            correctness_residual: None,
            restart_trace,
        });
    };
    let ev = evaluate(instance, &aux, mode)?;
    let outcome = if feasible && ev.is_feasible() {
        RateOutcome::Bits(ev.objective)
    } else {
        RateOutcome::Infeasible
    };
    Ok(RateResult {
        mode,
        outcome,
        certification,
        u_card: nu,
        best_aux: Some(aux),
        residuals: Some(ev.residuals),
        correctness_residual: Some(ev.correctness),
        restart_trace,
    })
}

fn run_search(instance: &Instance, spec: &AuxSpec, w: Option<&AuxiliaryChannel>) -> Result<RateResult> {
    spec.validate()?;
    let mode = spec.mode;
    let nu = spec.u_card_for(instance);
    let (nx, ny, nz) = (instance.x().size(), instance.y().size(), instance.z().size());
    let mut search = Search::new(instance, mode, nu);

    let mut starts: Vec<(RestartKind, Params, Option<(Vec<f64>, Vec<f64>)>)> = Vec::new();
    let baseline = enumerate_deterministic_u(instance, nu.min(nx), mode)?;
    if let (Some(_), Some(aux)) = (baseline.outcome.bits(), baseline.best_aux.as_ref()) {
        if let Some((enc, dec)) = embed(instance, aux, nu) {
            let p = Params {
                enc: logits_of(&enc),
                dec: logits_of(&dec),
            };
            starts.push((RestartKind::DeterministicBaseline, p, Some((enc, dec))));
        }
    }
    if let Some(w) = w {
        if let Some((enc, dec)) = embed(instance, &w.as_aux_pair(instance), nu) {
            let p = Params {
                enc: logits_of(&enc),
                dec: logits_of(&dec),
            };
            starts.push((RestartKind::WChannel, p, Some((enc, dec))));
        }
    }
    for r in 0..spec.restarts {
        let mut rng = spec.seed.stream(r as u64);
        starts.push((RestartKind::Random(r), random_params(&mut rng, nx * nu, nu * ny * nz), None));
    }

    let mut trace = Vec::with_capacity(starts.len());
    let mut best: Option<Candidate> = None;
    let mut least: Option<(f64, Candidate)> = None;
    for (kind, params, exact) in starts {
        let out = local_search(
            &mut search,
            params,
            exact.as_ref().map(|(e, d)| (e.as_slice(), d.as_slice())),
            spec,
        );
        trace.push(RestartRecord {
            kind,
            best_feasible: out.feasible.as_ref().map(|c| c.objective),
            iterations: out.iterations,
        });
        // min by (rate, restart index): strict comparison keeps the earlier restart
        if let Some(c) = out.feasible {
            if best.as_ref().map_or(true, |b| c.objective < b.objective) {
                best = Some(c);
            }
        }
        if least.as_ref().map_or(true, |(v, _)| out.least_violating.0 < *v) {
            least = Some(out.least_violating);
        }
    }

    let chosen = match (best, least) {
        (Some(c), _) => Some((true, aux_from(instance, nu, &c.enc, &c.dec)?)),
        (None, Some((_, c))) => Some((false, aux_from(instance, nu, &c.enc, &c.dec)?)),
        (None, None) => None,
    };
    finish(instance, mode, nu, chosen, Certification::UpperBound, trace)
}

/// Minimizes `I(X,Z; U | Y)` (no privacy requirement).
pub fn minimize_rns(instance: &Instance, spec: &AuxSpec) -> Result<RateResult> {
    if spec.mode != Mode::NoPrivacy {
        return Err(Error::Parameter("minimize_rns needs Mode::NoPrivacy".into()));
    }
    let w = computable_w(instance)?;
    run_search(instance, spec, w.as_ref())
}

/// `W` when the instance has full support and is certified computable.
fn computable_w(instance: &Instance) -> Result<Option<AuxiliaryChannel>> {
    if !instance.has_full_support() {
        return Ok(None);
    }
    match charact::check_computable(instance) {
        Ok(cert @ SecurityCertificate::Computable { .. }) => Ok(Some(charact::build_w(instance, &cert)?)),
        Ok(SecurityCertificate::Refuted(_)) | Err(Error::Degenerate(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Minimizes `I(Z; U | Y)` under all three chains.
///
/// On full-support instances the characterization decides first: a refuted
/// instance returns [`RateOutcome::Infinite`] without searching, and a
/// computable one returns the exact `H(W|Y)` with `W` as the realizing pair
/// unless the search beats it by more than [`FEASIBILITY_TOL`].
pub fn minimize_rs(instance: &Instance, spec: &AuxSpec) -> Result<RateResult> {
    if spec.mode != Mode::WithPrivacy {
        return Err(Error::Parameter("minimize_rs needs Mode::WithPrivacy".into()));
    }
    spec.validate()?;
    let nu = spec.u_card_for(instance);
    let mut w = None;
    if instance.has_full_support() {
        let cert = charact::check_computable(instance)?;
        if !cert.is_computable() {
            return Ok(RateResult {
                mode: spec.mode,
                outcome: RateOutcome::Infinite,
                certification: Certification::Exact,
                u_card: nu,
                best_aux: None,
                residuals: None,
                correctness_residual: None,
                restart_trace: Vec::new(),
            });
        }
        w = Some(charact::build_w(instance, &cert)?);
    }
    let found = run_search(instance, spec, w.as_ref())?;
    let Some(w) = w else { return Ok(found) };
    if w.k > nu {
        // W needs k message symbols; nothing smaller can be secure
        return Ok(found);
    }
    let exact = charact::rate_of_w(instance, &w)?;
    if let RateOutcome::Bits(b) = found.outcome {
        if b < exact - FEASIBILITY_TOL {
            return Ok(found);
        }
    }
    let aux = w.as_aux_pair(instance);
    let ev = evaluate(instance, &aux, spec.mode)?;
    Ok(RateResult {
        mode: spec.mode,
        outcome: RateOutcome::Bits(ev.objective),
        certification: Certification::Exact,
        u_card: nu,
        best_aux: Some(aux),
        residuals: Some(ev.residuals),
        correctness_residual: Some(ev.correctness),
        restart_trace: found.restart_trace,
    })
}

/// Calls `visit` with every map `X → [u_card]` in restricted-growth form
/// (labels appear in first-use order), i.e. one map per relabeling class.
fn for_each_partition(nx: usize, u_card: usize, mut visit: impl FnMut(&[usize])) {
    let mut labels = vec![0usize; nx];
    fn rec(pos: usize, used: usize, u_card: usize, labels: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
        if pos == labels.len() {
            visit(labels);
            return;
        }
        for l in 0..(used + 1).min(u_card) {
            labels[pos] = l;
            rec(pos + 1, used.max(l + 1), u_card, labels, visit);
        }
    }
    rec(0, 0, u_card, &mut labels, &mut visit);
}

/// Exhausts deterministic encoders `X → [u_card]`.
///
/// The objective and constraints are invariant under relabeling `U`, so one
/// map per relabeling class is evaluated (the lexicographically first). For
/// each map the decoder is the posterior mixture `p(z|u,y) = Σ_x p(x|u,y)
/// p(z|x,y)`, which is the only candidate that can be correct when one
/// exists. Ties keep the first map in enumeration order.
pub fn enumerate_deterministic_u(instance: &Instance, u_card: usize, mode: Mode) -> Result<RateResult> {
    let nx = instance.x().size();
    let needed = libm::pow(u_card as f64, nx as f64);
    if u_card == 0 {
        return Err(Error::Parameter("u_card must be at least 1".into()));
    }
    if needed > DETERMINISTIC_BUDGET {
        return Err(Error::Budget {
            what: "deterministic U enumeration",
            needed,
            limit: DETERMINISTIC_BUDGET,
        });
    }
    let (ny, nz) = (instance.y().size(), instance.z().size());
    let mut eval = FastEval::new(instance, u_card);
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut least: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut enc = vec![0.0; nx * u_card];
    let mut dec = vec![0.0; u_card * ny * nz];
    for_each_partition(nx, u_card, |labels| {
        enc.iter_mut().for_each(|v| *v = 0.0);
        for (x, &u) in labels.iter().enumerate() {
            enc[x * u_card + u] = 1.0;
        }
        for u in 0..u_card {
            for y in 0..ny {
                let row = &mut dec[(u * ny + y) * nz..(u * ny + y + 1) * nz];
                let mass: f64 = (0..nx)
                    .filter(|&x| labels[x] == u)
                    .map(|x| instance.p_xy_at(x, y))
                    .sum();
                for (z, r) in row.iter_mut().enumerate() {
                    *r = if mass > 0.0 {
                        (0..nx)
                            .filter(|&x| labels[x] == u)
                            .map(|x| instance.p_xy_at(x, y) * instance.p_z(z, x, y))
                            .sum::<f64>()
                            / mass
                    } else {
                        1.0 / nz as f64
                    };
                }
            }
        }
        let pt = eval.eval(&enc, &dec, mode);
        if pt.feasible(mode) && best.as_ref().map_or(true, |(b, _, _)| pt.objective < *b) {
            best = Some((pt.objective, enc.clone(), dec.clone()));
        }
        let v = pt.violation(mode);
        if least.as_ref().map_or(true, |(l, _, _)| v < *l) {
            least = Some((v, enc.clone(), dec.clone()));
        }
    });
    let chosen = match (best, least) {
        (Some((_, e, d)), _) => Some((true, aux_from(instance, u_card, &e, &d)?)),
        (None, Some((_, e, d))) => Some((false, aux_from(instance, u_card, &e, &d)?)),
        (None, None) => None,
    };
    finish(instance, mode, u_card, chosen, Certification::UpperBound, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures;
    use crate::probcore::entropy;

    fn quick(mode: Mode) -> AuxSpec {
        AuxSpec {
            u_card: Some(4),
            restarts: 2,
            max_iters: 150,
            ..AuxSpec::new(mode)
        }
    }

    #[test]
    fn fast_evaluator_matches_probcore() {
        let inst = fixtures::rank_one();
        let mut rng = Seed(11).stream(0);
        let nu = 4;
        let p = random_params(&mut rng, 3 * nu, nu * 2 * 3);
        let mut s = Search::new(&inst, Mode::WithPrivacy, nu);
        s.load(&p);
        let pt = s.point();
        let aux = aux_from(&inst, nu, &s.enc_p, &s.dec_p).unwrap();
        let ev = evaluate(&inst, &aux, Mode::WithPrivacy).unwrap();
        assert!((pt.objective - ev.objective).abs() < 1e-9);
        assert!((pt.tv - ev.correctness).abs() < 1e-12);
        assert!((pt.privacy - ev.residuals.u_yz_x.unwrap()).abs() < 1e-9);
        let mut s = Search::new(&inst, Mode::NoPrivacy, nu);
        s.load(&p);
        let ev = evaluate(&inst, &aux, Mode::NoPrivacy).unwrap();
        assert!((s.point().objective - ev.objective).abs() < 1e-9);
    }

    #[test]
    fn partitions_are_restricted_growth() {
        let mut seen = Vec::new();
        for_each_partition(3, 3, |l| seen.push(l.to_vec()));
        assert_eq!(
            seen,
            vec![
                vec![0, 0, 0],
                vec![0, 0, 1],
                vec![0, 1, 0],
                vec![0, 1, 1],
                vec![0, 1, 2]
            ]
        );
        let mut n = 0;
        for_each_partition(4, 2, |_| n += 1);
        assert_eq!(n, 8);
    }

    #[test]
    fn deterministic_baseline_examples() {
        // constant map: feasible iff X-independent
        let r = enumerate_deterministic_u(&fixtures::x_independent(), 1, Mode::NoPrivacy).unwrap();
        assert_eq!(r.outcome, RateOutcome::Bits(0.0));
        let r = enumerate_deterministic_u(&fixtures::identity(), 1, Mode::NoPrivacy).unwrap();
        assert_eq!(r.outcome, RateOutcome::Infeasible);
        assert!(r.correctness_residual.unwrap() > 0.1);

        // z = x: only the identity map is correct, objective H(X|Y) = 1
        let r = enumerate_deterministic_u(&fixtures::identity(), 2, Mode::NoPrivacy).unwrap();
        let b = r.outcome.bits().unwrap();
        assert!((b - 1.0).abs() < 1e-12);
        let enc = &r.best_aux.as_ref().unwrap().encoder;
        assert_eq!(enc.rows(), &[1.0, 0.0, 0.0, 1.0]);

        // identity map with u_card = |X| is always correct
        for inst in fixtures::all() {
            let r = enumerate_deterministic_u(&inst, inst.x().size(), Mode::NoPrivacy).unwrap();
            assert!(r.outcome.bits().is_some(), "{}", inst.name);
        }
    }

    #[test]
    fn deterministic_baseline_budget() {
        let inst = fixtures::rank_one();
        assert!(matches!(
            enumerate_deterministic_u(&inst, 101, Mode::NoPrivacy),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn rns_examples() {
        let r = minimize_rns(&fixtures::x_independent(), &quick(Mode::NoPrivacy)).unwrap();
        assert!(r.outcome.bits().unwrap().abs() < 1e-9);
        assert_eq!(r.certification, Certification::UpperBound);

        let inst = fixtures::identity()
            .with_input_law(vec![0.4, 0.1, 0.2, 0.3])
            .unwrap();
        let r = minimize_rns(&inst, &quick(Mode::NoPrivacy)).unwrap();
        let h = entropy(&inst.p_xy().clone(), &[X], &[Y]).unwrap();
        assert!((r.outcome.bits().unwrap() - h).abs() < 1e-3, "{:?} vs {h}", r.outcome);
    }

    #[test]
    fn rs_examples() {
        let r = minimize_rs(&fixtures::and(), &quick(Mode::WithPrivacy)).unwrap();
        assert_eq!(r.outcome, RateOutcome::Infinite);
        assert!(r.restart_trace.is_empty());

        let r = minimize_rs(&fixtures::identity(), &quick(Mode::WithPrivacy)).unwrap();
        assert_eq!(r.certification, Certification::Exact);
        assert!((r.outcome.bits().unwrap() - 1.0).abs() < 1e-9);

        let r = minimize_rs(&fixtures::x_independent(), &quick(Mode::WithPrivacy)).unwrap();
        assert!(r.outcome.bits().unwrap().abs() < 1e-9);
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        assert!(minimize_rs(&fixtures::identity(), &quick(Mode::NoPrivacy)).is_err());
        assert!(minimize_rns(&fixtures::identity(), &quick(Mode::WithPrivacy)).is_err());
    }

    #[test]
    fn reported_rate_matches_reevaluation() {
        let inst = fixtures::bsc();
        let r = minimize_rns(&inst, &quick(Mode::NoPrivacy)).unwrap();
        let aux = r.best_aux.as_ref().unwrap();
        let ev = evaluate(&inst, aux, Mode::NoPrivacy).unwrap();
        assert!((ev.objective - r.outcome.bits().unwrap()).abs() < 1e-9);
        assert!(r.correctness_residual.unwrap() <= FEASIBILITY_TOL);
    }
}
