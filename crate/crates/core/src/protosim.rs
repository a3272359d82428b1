//! The explicit one-round protocol for computable full-support problems.
//!
//! Alice and Bob agree on a reference input `y1`. Alice sends class index
//! `i` with probability `Σ_{z in class i at y1} p(z|x,y1)`. Bob, holding
//! `y`, fixes the first `x'` whose α-vector entry for class `i` is positive
//! and samples `z` from `p(·|x',y)` restricted to class `i` at `y`.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::charact::{self, EquivalenceClass};
use crate::instance::{Instance, U, X, Y, Z};
use crate::probcore::{cond_mutual_info, tv_distance, Alphabet, Categorical, JointDistribution, Seed};
use crate::{Error, Result};

/// One protocol round, as symbol indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Round {
    pub x: usize,
    pub y: usize,
    pub u: usize,
    pub z: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub records: Vec<Round>,
    /// Dense counts indexed `[x][y][u][z]`.
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub rounds: usize,
    pub seed: Seed,
    pub agreed_y1: usize,
    pub k: usize,
    /// TV between the empirical `(x,y,z)` frequencies and the target.
    pub empirical_tv: f64,
    /// Plug-in `I(U; X | Y, Z)` from the transcript counts, no bias correction.
    pub empirical_leakage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneRoundProtocol<'a> {
    instance: &'a Instance,
    agreed_y1: usize,
    k: usize,
    classes: Vec<Vec<EquivalenceClass>>,
    /// `[x][i]`
    alice: Vec<f64>,
    /// `[i][y][z]`
    bob: Vec<f64>,
}

impl<'a> OneRoundProtocol<'a> {
    /// Fails with a contract error unless the problem is certified computable.
    pub fn new(instance: &'a Instance, agreed_y1: usize) -> Result<Self> {
        let (nx, ny, nz) = (instance.x().size(), instance.y().size(), instance.z().size());
        if agreed_y1 >= ny {
            return Err(Error::Parameter(format!(
                "agreed_y1 index {agreed_y1} outside Y of size {ny}"
            )));
        }
        let cert = charact::check_computable(instance)?;
        let (k, classes) = match cert {
            charact::SecurityCertificate::Computable { k, classes } => (k, classes),
            charact::SecurityCertificate::Refuted(r) => {
                return Err(Error::Contract(format!(
                    "one-round protocol needs a computable problem, refuted by {r:?}"
                )))
            }
        };
        let mut alice = vec![0.0; nx * k];
        for x in 0..nx {
            for i in 0..k {
                alice[x * k + i] = class_mass(instance, &classes[agreed_y1][i], x);
            }
        }
        let mut bob = vec![0.0; k * ny * nz];
        for i in 0..k {
            for y in 0..ny {
                let class = &classes[y][i];
                let x_rep = (0..nx)
                    .find(|&x| class.alpha[x] > 0.0)
                    .expect("alpha is a probability vector");
                let denom = class_mass(instance, class, x_rep);
                for &z in &class.z_members {
                    bob[(i * ny + y) * nz + z] = instance.p_z(z, x_rep, y) / denom;
                }
            }
        }
        Ok(OneRoundProtocol {
            instance,
            agreed_y1,
            k,
            classes,
            alice,
            bob,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn agreed_y1(&self) -> usize {
        self.agreed_y1
    }

    pub fn class(&self, y: usize, i: usize) -> &EquivalenceClass {
        &self.classes[y][i]
    }

    /// Alice's rule `p(i|x)`, indexed `[x][i]`.
    pub fn message_rule(&self) -> &[f64] {
        &self.alice
    }

    /// The rule Alice would use had the parties agreed on `y` instead.
    pub fn message_rule_at(&self, y: usize) -> Vec<f64> {
        let nx = self.instance.x().size();
        let mut rule = vec![0.0; nx * self.k];
        for x in 0..nx {
            for i in 0..self.k {
                rule[x * self.k + i] = class_mass(self.instance, &self.classes[y][i], x);
            }
        }
        rule
    }

    /// Bob's rule `p(z|i,y)`, indexed `[i][y][z]`.
    pub fn output_rule(&self) -> &[f64] {
        &self.bob
    }

    /// Message symbols are labelled `1..=k`, matching `W`.
    pub fn u_alphabet(&self) -> Alphabet {
        Alphabet::new(U, (1..=self.k).map(|i| i.to_string())).expect("distinct labels")
    }

    /// Exact joint over `(X, Y, U, Z)`.
    pub fn induced_distribution(&self) -> Result<JointDistribution> {
        let inst = self.instance;
        let (nx, ny, nz, k) = (inst.x().size(), inst.y().size(), inst.z().size(), self.k);
        let mut mass = vec![0.0; nx * ny * k * nz];
        for x in 0..nx {
            for y in 0..ny {
                for i in 0..k {
                    let a = inst.p_xy_at(x, y) * self.alice[x * k + i];
                    for z in 0..nz {
                        mass[((x * ny + y) * k + i) * nz + z] = a * self.bob[(i * ny + y) * nz + z];
                    }
                }
            }
        }
        JointDistribution::new(self.axes(), mass)
    }

    /// `I(U; X | Y, Z)` on the exact induced joint.
    pub fn analytic_leakage(&self) -> Result<f64> {
        cond_mutual_info(&self.induced_distribution()?, &[U], &[X], &[Y, Z])
    }

    fn axes(&self) -> Vec<Alphabet> {
        let inst = self.instance;
        vec![inst.x().clone(), inst.y().clone(), self.u_alphabet(), inst.z().clone()]
    }

    /// Runs `rounds` independent rounds from one seeded stream.
    pub fn run(&self, rounds: usize, seed: Seed) -> Result<(Transcript, SimulationReport)> {
        if rounds == 0 {
            return Err(Error::Parameter("rounds must be at least 1".into()));
        }
        let inst = self.instance;
        let (nx, ny, nz, k) = (inst.x().size(), inst.y().size(), inst.z().size(), self.k);
        let inputs = Categorical::new(inst.p_xy().mass())?;
        let alice: Vec<Categorical> = self
            .alice
            .chunks(k)
            .map(Categorical::new)
            .collect::<Result<_>>()?;
        let bob: Vec<Categorical> = self
            .bob
            .chunks(nz)
            .map(Categorical::new)
            .collect::<Result<_>>()?;

        let mut rng = seed.stream(0);
        let mut records = Vec::with_capacity(rounds);
        let mut counts = vec![0u64; nx * ny * k * nz];
        for _ in 0..rounds {
            let xy = inputs.sample(&mut rng);
            let (x, y) = (xy / ny, xy % ny);
            let u = alice[x].sample(&mut rng);
            let z = bob[u * ny + y].sample(&mut rng);
            records.push(Round { x, y, u, z });
            counts[((x * ny + y) * k + u) * nz + z] += 1;
        }

        let empirical = JointDistribution::from_counts(self.axes(), &counts)?;
        let empirical_tv = tv_distance(&empirical.marginal(&[X, Y, Z])?, &inst.target_joint())?;
        let empirical_leakage = cond_mutual_info(&empirical, &[U], &[X], &[Y, Z])?;
        let report = SimulationReport {
            rounds,
            seed,
            agreed_y1: self.agreed_y1,
            k,
            empirical_tv,
            empirical_leakage,
        };
        Ok((Transcript { records, counts }, report))
    }
}

fn class_mass(instance: &Instance, class: &EquivalenceClass, x: usize) -> f64 {
    class.z_members.iter().map(|&z| instance.p_z(z, x, class.y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures;

    #[test]
    fn induced_matches_target_on_fixtures() {
        for inst in fixtures::computable() {
            for y1 in 0..inst.y().size() {
                let p = OneRoundProtocol::new(&inst, y1).unwrap();
                let joint = p.induced_distribution().unwrap();
                let tv = tv_distance(&joint.marginal(&[X, Y, Z]).unwrap(), &inst.target_joint()).unwrap();
                assert!(tv <= 1e-12, "{} y1={y1}: {tv}", inst.name);
                assert!(p.analytic_leakage().unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn x_independent_sends_a_constant() {
        let inst = fixtures::x_independent();
        let p = OneRoundProtocol::new(&inst, 0).unwrap();
        assert_eq!(p.k(), 1);
        assert!(p.message_rule().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn identity_sends_x() {
        let inst = fixtures::identity();
        let p = OneRoundProtocol::new(&inst, 0).unwrap();
        let joint = p.induced_distribution().unwrap();
        for x in 0..2 {
            for y in 0..2 {
                for u in 0..2 {
                    for z in 0..2 {
                        let want = if u == x && z == x { 0.25 } else { 0.0 };
                        // classes are ordered by first member, so class i holds z = i
                        assert!((joint.prob(&[x, y, u, z]) - want).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn bsc_output_channel_is_bsc_for_every_y() {
        let inst = fixtures::bsc();
        let joint = OneRoundProtocol::new(&inst, 0).unwrap().induced_distribution().unwrap();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    let pz: f64 = (0..2).map(|u| joint.prob(&[x, y, u, z])).sum::<f64>() / 0.25;
                    let want = if z == x { 0.9 } else { 0.1 };
                    assert!((pz - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn message_rule_does_not_depend_on_y() {
        for inst in fixtures::computable() {
            let p = OneRoundProtocol::new(&inst, 0).unwrap();
            for y in 0..inst.y().size() {
                let other = p.message_rule_at(y);
                for (a, b) in p.message_rule().iter().zip(&other) {
                    assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn refuted_problem_is_a_contract_error() {
        assert!(matches!(
            OneRoundProtocol::new(&fixtures::and(), 0),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            OneRoundProtocol::new(&fixtures::bsc(), 2),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn single_round_is_valid() {
        for inst in fixtures::computable() {
            let p = OneRoundProtocol::new(&inst, 0).unwrap();
            let (t, r) = p.run(1, Seed(3)).unwrap();
            assert_eq!(t.records.len(), 1);
            let rec = t.records[0];
            assert!(rec.u < p.k());
            assert!(p.class(rec.y, rec.u).contains(rec.z));
            assert_eq!(r.rounds, 1);
        }
        let bsc = fixtures::bsc();
        let p = OneRoundProtocol::new(&bsc, 0).unwrap();
        assert!(p.run(0, Seed(0)).is_err());
    }

    #[test]
    fn every_round_lands_in_the_announced_class() {
        let inst = fixtures::rank_one();
        let p = OneRoundProtocol::new(&inst, 1).unwrap();
        let (t, _) = p.run(2000, Seed(9)).unwrap();
        for r in &t.records {
            assert!(p.class(r.y, r.u).contains(r.z));
        }
        assert_eq!(t.counts.iter().sum::<u64>(), 2000);
    }

    #[test]
    fn runs_replay() {
        let inst = fixtures::bsc();
        let p = OneRoundProtocol::new(&inst, 0).unwrap();
        let a = p.run(500, Seed(42)).unwrap();
        let b = p.run(500, Seed(42)).unwrap();
        assert_eq!(a, b);
        let c = p.run(500, Seed(43)).unwrap();
        assert_ne!(a.0, c.0);
    }
}
