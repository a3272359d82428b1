//! Perfect-security characterization for full-support inputs.
//!
//! For each Bob input `y`, the outputs that can occur are grouped into
//! classes of mutually proportional channel columns `(p(z|x,y))_x`. Each
//! class is a rank-one block `α γ` with `α` a probability vector over `X`.
//! The problem is securely computable iff every `y` produces the same set of
//! `α` vectors and, class by class, the same class sums `Σ_z p(z|x,y)`.
//! The class index `W` is then the optimal message and the optimal rate is
//! `H(W|Y)`.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::instance::{AuxPair, Instance, Y};
use crate::probcore::{compose, entropy, Alphabet, Channel};
use crate::{Error, Result};

/// Tolerance for proportionality, α equality and class-sum equality.
pub const CLASS_TOL: f64 = 1e-9;

/// Axis name of the class variable.
pub const W: &str = "W";

/// The outputs Bob can see when his input is `y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    pub y: usize,
    pub members: Vec<usize>,
}

/// One class of proportional columns at a fixed `y`, with its rank-one factors.
///
/// `p(z|x,y) = alpha[x] * gamma[j]` for `z = z_members[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceClass {
    pub y: usize,
    pub z_members: Vec<usize>,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl EquivalenceClass {
    /// `Σ_{z in class} p(z|x,y)`.
    pub fn class_sum(&self, x: usize) -> f64 {
        self.alpha[x] * self.gamma.iter().sum::<f64>()
    }

    pub fn contains(&self, z: usize) -> bool {
        self.z_members.contains(&z)
    }
}

/// Why a problem is not securely computable.
#[derive(Debug, Clone, PartialEq)]
pub enum Refutation {
    /// `k(y) ≠ k(y_other)`.
    ClassCount {
        y: usize,
        y_other: usize,
        k: usize,
        k_other: usize,
    },
    /// Class `class` of `y` has no α-vector partner at `y_other`.
    AlphaMismatch {
        y: usize,
        y_other: usize,
        class: usize,
    },
    /// Class sums of matched class `class` differ at `x`.
    ClassSum {
        class: usize,
        x: usize,
        y: usize,
        y_other: usize,
        sum: f64,
        sum_other: f64,
    },
}

/// Outcome of [`check_computable`].
#[derive(Debug, Clone, PartialEq)]
pub enum SecurityCertificate {
    /// `classes[y][i]` is class `i` at Bob input `y`; index `i` carries the
    /// same α-vector for every `y`.
    Computable {
        k: usize,
        classes: Vec<Vec<EquivalenceClass>>,
    },
    Refuted(Refutation),
}

impl SecurityCertificate {
    pub fn is_computable(&self) -> bool {
        matches!(self, SecurityCertificate::Computable { .. })
    }

    pub fn k(&self) -> Option<usize> {
        match self {
            SecurityCertificate::Computable { k, .. } => Some(*k),
            SecurityCertificate::Refuted(_) => None,
        }
    }

    pub fn classes(&self) -> Option<&[Vec<EquivalenceClass>]> {
        match self {
            SecurityCertificate::Computable { classes, .. } => Some(classes),
            SecurityCertificate::Refuted(_) => None,
        }
    }

    pub fn refutation(&self) -> Option<&Refutation> {
        match self {
            SecurityCertificate::Refuted(r) => Some(r),
            SecurityCertificate::Computable { .. } => None,
        }
    }
}

/// The class variable `W`: `p(w|x)` and `p(z|w,y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryChannel {
    pub k: usize,
    pub p_w_given_x: Channel,
    pub p_z_given_wy: Channel,
    /// `class_of[y][z]`: the class holding `z` at `y`, if `z` can occur.
    class_of: Vec<Vec<Option<usize>>>,
}

impl AuxiliaryChannel {
    /// `W` as a function of `(y, z)`.
    pub fn class_of(&self, y: usize, z: usize) -> Option<usize> {
        self.class_of[y][z]
    }

    pub fn as_aux_pair(&self, instance: &Instance) -> AuxPair {
        AuxPair::new(instance, self.p_w_given_x.clone(), self.p_z_given_wy.clone())
            .expect("W channels fit their instance")
    }
}

/// Exact optimal rate, or `Infinite` when no secure code exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Bits(f64),
    Infinite,
}

impl Rate {
    pub fn bits(self) -> Option<f64> {
        match self {
            Rate::Bits(b) => Some(b),
            Rate::Infinite => None,
        }
    }
}

pub fn support_sets(instance: &Instance) -> Result<Vec<SupportSet>> {
    instance.require_full_support()?;
    let (nx, ny, nz) = dims(instance);
    Ok((0..ny)
        .map(|y| SupportSet {
            y,
            members: (0..nz)
                .filter(|&z| (0..nx).any(|x| instance.p_z(z, x, y) > 0.0))
                .collect(),
        })
        .collect())
}

fn dims(instance: &Instance) -> (usize, usize, usize) {
    (instance.x().size(), instance.y().size(), instance.z().size())
}

/// Cross-ratio test: `|u(x)v(x') − u(x')v(x)| ≤ tol · max(u) · max(v)` for all pairs.
pub fn proportional(u: &[f64], v: &[f64]) -> bool {
    let max_u = u.iter().copied().fold(0.0, f64::max);
    let max_v = v.iter().copied().fold(0.0, f64::max);
    let bound = CLASS_TOL * max_u * max_v;
    for a in 0..u.len() {
        for b in a + 1..u.len() {
            if (u[a] * v[b] - u[b] * v[a]).abs() > bound {
                return false;
            }
        }
    }
    true
}

fn column(instance: &Instance, z: usize, y: usize) -> Vec<f64> {
    (0..instance.x().size())
        .map(|x| instance.p_z(z, x, y))
        .collect()
}

/// Partitions `Z^(y)` into maximal groups of proportional columns, in order
/// of each group's first member.
pub fn partition_classes(instance: &Instance, y: usize) -> Result<Vec<EquivalenceClass>> {
    instance.require_full_support()?;
    let (nx, ny, _) = dims(instance);
    if y >= ny {
        return Err(Error::Parameter(format!("y index {y} out of range")));
    }
    let support = &support_sets(instance)?[y].members;

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &z in support {
        let col = column(instance, z, y);
        match groups
            .iter_mut()
            .find(|g| proportional(&column(instance, g[0], y), &col))
        {
            Some(g) => g.push(z),
            None => groups.push(vec![z]),
        }
    }

    Ok(groups
        .into_iter()
        .map(|members| {
            let row_sums: Vec<f64> = (0..nx)
                .map(|x| members.iter().map(|&z| instance.p_z(z, x, y)).sum())
                .collect();
            let total: f64 = row_sums.iter().sum();
            let alpha: Vec<f64> = row_sums.iter().map(|s| s / total).collect();
            let x0 = alpha.iter().position(|&a| a > 0.0).expect("class columns are nonzero");
            let gamma = members
                .iter()
                .map(|&z| instance.p_z(z, x0, y) / alpha[x0])
                .collect();
            EquivalenceClass {
                y,
                z_members: members,
                alpha,
                gamma,
            }
        })
        .collect())
}

fn alpha_eq(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(p, q)| (p - q).abs() <= CLASS_TOL)
}

/// Maximum bipartite matching (Kuhn). `adj[i]` lists right vertices for left `i`.
/// Returns `assign[i] = Some(j)` for matched left vertices.
fn bipartite_matching(adj: &[Vec<usize>], n_right: usize) -> Vec<Option<usize>> {
    fn augment(i: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].map_or(true, |o| augment(o, adj, seen, owner)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; n_right];
    for i in 0..adj.len() {
        let mut seen = vec![false; n_right];
        augment(i, adj, &mut seen, &mut owner);
    }
    let mut assign = vec![None; adj.len()];
    for (j, o) in owner.iter().enumerate() {
        if let Some(i) = o {
            assign[*i] = Some(j);
        }
    }
    assign
}

/// Decides perfect-security computability of a full-support problem.
pub fn check_computable(instance: &Instance) -> Result<SecurityCertificate> {
    instance.require_full_support()?;
    let (nx, ny, _) = dims(instance);
    let per_y: Vec<Vec<EquivalenceClass>> = (0..ny)
        .map(|y| partition_classes(instance, y))
        .collect::<Result<_>>()?;

    for (y, classes) in per_y.iter().enumerate() {
        for i in 0..classes.len() {
            for j in i + 1..classes.len() {
                if alpha_eq(&classes[i].alpha, &classes[j].alpha) {
                    return Err(Error::Degenerate(format!(
                        "classes {i} and {j} at y={} have alpha vectors within {CLASS_TOL}",
                        instance.y().symbol(y)
                    )));
                }
            }
        }
    }

    let reference = &per_y[0];
    let k = reference.len();
    for (y, classes) in per_y.iter().enumerate().skip(1) {
        if classes.len() != k {
            return Ok(SecurityCertificate::Refuted(Refutation::ClassCount {
                y: 0,
                y_other: y,
                k,
                k_other: classes.len(),
            }));
        }
    }

    // order every y's classes like the reference y
    let mut matched: Vec<Vec<EquivalenceClass>> = vec![reference.clone()];
    for (y, classes) in per_y.iter().enumerate().skip(1) {
        let adj: Vec<Vec<usize>> = reference
            .iter()
            .map(|r| {
                (0..k)
                    .filter(|&j| alpha_eq(&r.alpha, &classes[j].alpha))
                    .collect()
            })
            .collect();
        let assign = bipartite_matching(&adj, k);
        if let Some(class) = assign.iter().position(Option::is_none) {
            return Ok(SecurityCertificate::Refuted(Refutation::AlphaMismatch {
                y: 0,
                y_other: y,
                class,
            }));
        }
        matched.push(
            assign
                .iter()
                .map(|j| classes[j.expect("perfect matching")].clone())
                .collect(),
        );
    }

    for i in 0..k {
        for y in 1..ny {
            for x in 0..nx {
                let sum = class_sum_direct(instance, &matched[0][i], x);
                let sum_other = class_sum_direct(instance, &matched[y][i], x);
                if (sum - sum_other).abs() > CLASS_TOL {
                    return Ok(SecurityCertificate::Refuted(Refutation::ClassSum {
                        class: i,
                        x,
                        y: 0,
                        y_other: y,
                        sum,
                        sum_other,
                    }));
                }
            }
        }
    }

    Ok(SecurityCertificate::Computable { k, classes: matched })
}

fn class_sum_direct(instance: &Instance, class: &EquivalenceClass, x: usize) -> f64 {
    class
        .z_members
        .iter()
        .map(|&z| instance.p_z(z, x, class.y))
        .sum()
}

/// Builds the class variable `W` from a computable certificate.
pub fn build_w(instance: &Instance, cert: &SecurityCertificate) -> Result<AuxiliaryChannel> {
    let (k, classes) = match cert {
        SecurityCertificate::Computable { k, classes } => (*k, classes),
        SecurityCertificate::Refuted(_) => {
            return Err(Error::Contract("build_w needs a computable certificate".into()))
        }
    };
    let (nx, ny, nz) = dims(instance);
    let w_alpha = Alphabet::new(W, (1..=k).map(|i| i.to_string()))?;

    // class sums at the first y
    let encoder = Channel::from_fn(vec![instance.x().clone()], vec![w_alpha.clone()], |xi, wi| {
        class_sum_direct(instance, &classes[0][wi[0]], xi[0])
    })?;

    let mut rows = vec![0.0; k * ny * nz];
    let mut class_of = vec![vec![None; nz]; ny];
    for i in 0..k {
        for y in 0..ny {
            let class = &classes[y][i];
            let x_rep = (0..nx)
                .find(|&x| class_sum_direct(instance, class, x) > 0.0)
                .expect("class has positive mass for some x");
            let denom = class_sum_direct(instance, class, x_rep);
            for &z in &class.z_members {
                rows[(i * ny + y) * nz + z] = instance.p_z(z, x_rep, y) / denom;
                class_of[y][z] = Some(i);
            }
        }
    }
    let decoder = Channel::new(
        vec![w_alpha, instance.y().clone()],
        vec![instance.z().clone()],
        rows,
    )?;
    Ok(AuxiliaryChannel {
        k,
        p_w_given_x: encoder,
        p_z_given_wy: decoder,
        class_of,
    })
}

/// `H(W|Y)` when computable, [`Rate::Infinite`] otherwise.
pub fn optimal_rate_full_support(instance: &Instance) -> Result<Rate> {
    let cert = check_computable(instance)?;
    if !cert.is_computable() {
        return Ok(Rate::Infinite);
    }
    let w = build_w(instance, &cert)?;
    let joint = compose(instance.p_xy(), &w.p_w_given_x)?;
    Ok(Rate::Bits(entropy(&joint, &[W], &[Y])?))
}

/// `H(W|Y)` for an already built `W`.
pub fn rate_of_w(instance: &Instance, w: &AuxiliaryChannel) -> Result<f64> {
    let joint = compose(instance.p_xy(), &w.p_w_given_x)?;
    entropy(&joint, &[W], &[Y])
}
