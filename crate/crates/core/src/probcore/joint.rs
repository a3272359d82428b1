use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::alphabet::{check_unique_names, product_len, ravel, unravel};
use super::{Alphabet, Channel, COMPARE_TOL, NORMALIZATION_TOL};
use crate::{Error, Result};

/// A normalized probability table over the product of named alphabets.
///
/// Mass is stored row-major with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    axes: Vec<Alphabet>,
    mass: Vec<f64>,
}

pub(crate) fn validate_masses(mass: &[f64], what: &dyn Fn() -> String) -> Result<()> {
    let mut total = 0.0;
    for (i, &m) in mass.iter().enumerate() {
        if !m.is_finite() || m < 0.0 {
            return Err(Error::Validation(format!(
                "{}: entry {i} is {m}, expected a nonnegative number",
                what()
            )));
        }
        total += m;
    }
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Validation(format!("{} sums to {total}", what())));
    }
    Ok(())
}

impl JointDistribution {
    pub fn new(axes: Vec<Alphabet>, mass: Vec<f64>) -> Result<Self> {
        check_unique_names(&axes)?;
        let len = product_len(&axes);
        if mass.len() != len {
            return Err(Error::Shape(format!(
                "mass table has {} entries, axes need {len}",
                mass.len()
            )));
        }
        validate_masses(&mass, &|| String::from("joint distribution"))?;
        Ok(JointDistribution { axes, mass })
    }

    /// Normalized frequency table.
    pub fn from_counts(axes: Vec<Alphabet>, counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Validation("no samples".into()));
        }
        let mass = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self::new(axes, mass)
    }

    pub fn uniform(axes: Vec<Alphabet>) -> Result<Self> {
        let len = product_len(&axes);
        Self::new(axes, vec![1.0 / len as f64; len])
    }

    pub fn point_mass(axes: Vec<Alphabet>, at: &[usize]) -> Result<Self> {
        let len = product_len(&axes);
        if at.len() != axes.len() || at.iter().zip(&axes).any(|(&i, a)| i >= a.size()) {
            return Err(Error::Shape("point outside the axes".into()));
        }
        let mut mass = vec![0.0; len];
        mass[ravel(&axes, at)] = 1.0;
        Self::new(axes, mass)
    }

    pub fn axes(&self) -> &[Alphabet] {
        &self.axes
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Alphabet::size).collect()
    }

    pub fn prob(&self, index: &[usize]) -> f64 {
        self.mass[ravel(&self.axes, index)]
    }

    pub fn unravel(&self, flat: usize) -> Vec<usize> {
        unravel(&self.axes, flat)
    }

    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name() == name)
            .ok_or_else(|| Error::Shape(format!("no axis named {name}")))
    }

    pub fn resolve(&self, names: &[&str]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.axis_index(n)).collect()
    }

    /// Marginal over the named axes, in the order given.
    pub fn marginal(&self, names: &[&str]) -> Result<JointDistribution> {
        let keep = self.resolve(names)?;
        check_disjoint(&[&keep])?;
        Ok(self.marginal_by_index(&keep))
    }

    pub(crate) fn marginal_by_index(&self, keep: &[usize]) -> JointDistribution {
        let axes: Vec<Alphabet> = keep.iter().map(|&i| self.axes[i].clone()).collect();
        let mass = marginal_mass(&self.shape(), &self.mass, keep);
        JointDistribution { axes, mass }
    }

    /// Draw one symbol tuple by inverse CDF in canonical order.
    pub fn sample(&self, rng: &mut super::SeedStream) -> Vec<usize> {
        let flat = super::sample::inverse_cdf(&self.mass, rng.next_f64());
        self.unravel(flat)
    }
}

/// Sums `mass` (with the given shape) down to the axes in `keep`, in that order.
pub(crate) fn marginal_mass(shape: &[usize], mass: &[f64], keep: &[usize]) -> Vec<f64> {
    let out_len: usize = keep.iter().map(|&k| shape[k]).product();
    let mut out_stride = vec![0usize; shape.len()];
    let mut s = 1;
    for &k in keep.iter().rev() {
        out_stride[k] = s;
        s *= shape[k];
    }
    let mut out = vec![0.0; out_len];
    let mut idx = vec![0usize; shape.len()];
    let mut target = 0usize;
    for &m in mass {
        out[target] += m;
        // odometer increment, keeping `target` in sync
        for ax in (0..shape.len()).rev() {
            idx[ax] += 1;
            target += out_stride[ax];
            if idx[ax] < shape[ax] {
                break;
            }
            target -= out_stride[ax] * shape[ax];
            idx[ax] = 0;
        }
    }
    out
}

pub(crate) fn check_disjoint(sets: &[&[usize]]) -> Result<()> {
    let mut seen: Vec<usize> = Vec::new();
    for set in sets {
        for &i in *set {
            if seen.contains(&i) {
                return Err(Error::Shape(format!(
                    "axis {i} appears in more than one subset"
                )));
            }
            seen.push(i);
        }
    }
    Ok(())
}

fn same_axes(p: &[Alphabet], q: &[Alphabet]) -> bool {
    p == q
}

/// Total variation distance, `(1/2) Σ |p − q|`.
pub fn tv_distance(p: &JointDistribution, q: &JointDistribution) -> Result<f64> {
    if !same_axes(&p.axes, &q.axes) {
        return Err(Error::Shape("tv_distance needs identical axes".into()));
    }
    Ok(tv_slices(&p.mass, &q.mass))
}

pub(crate) fn tv_slices(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Appends the kernel's outputs to `base`: `mass(b, o) = base(b) · k(o | b|inputs)`.
pub fn compose(base: &JointDistribution, kernel: &Channel) -> Result<JointDistribution> {
    let mut input_pos = Vec::with_capacity(kernel.inputs().len());
    for a in kernel.inputs() {
        let pos = base.axis_index(a.name())?;
        if &base.axes[pos] != a {
            return Err(Error::Shape(format!(
                "axis {} has different symbols in base and kernel",
                a.name()
            )));
        }
        input_pos.push(pos);
    }
    let mut axes = base.axes.clone();
    axes.extend(kernel.outputs().iter().cloned());
    check_unique_names(&axes)?;

    let out_len = kernel.output_len();
    let mut mass = Vec::with_capacity(base.mass.len() * out_len);
    let mut in_idx = vec![0usize; input_pos.len()];
    for (flat, &b) in base.mass.iter().enumerate() {
        let full = base.unravel(flat);
        for (slot, &p) in in_idx.iter_mut().zip(&input_pos) {
            *slot = full[p];
        }
        let row = kernel.row(kernel.input_flat(&in_idx));
        mass.extend(row.iter().map(|&k| b * k));
    }
    Ok(JointDistribution { axes, mass })
}

/// Entropy (bits) of the marginal on `axes`.
pub(crate) fn marginal_entropy(p: &JointDistribution, axes: &[usize]) -> f64 {
    if axes.is_empty() {
        return 0.0;
    }
    super::info::entropy_of(&marginal_mass(&p.shape(), &p.mass, axes))
}

pub(crate) fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

/// Conditional entropy `H(target | given)` in bits.
pub fn entropy(p: &JointDistribution, target: &[&str], given: &[&str]) -> Result<f64> {
    let t = p.resolve(target)?;
    let g = p.resolve(given)?;
    check_disjoint(&[&t, &g])?;
    let h = marginal_entropy(p, &union(&t, &g)) - marginal_entropy(p, &g);
    Ok(h.max(0.0))
}

/// Conditional mutual information `I(A; B | C)` in bits.
pub fn cond_mutual_info(p: &JointDistribution, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
    let a = p.resolve(a)?;
    let b = p.resolve(b)?;
    let c = p.resolve(given)?;
    check_disjoint(&[&a, &b, &c])?;
    Ok(cmi_by_index(p, &a, &b, &c))
}

pub(crate) fn cmi_by_index(p: &JointDistribution, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    let ac = union(a, c);
    let bc = union(b, c);
    let abc = union(&ac, b);
    let v = marginal_entropy(p, &ac) + marginal_entropy(p, &bc) - marginal_entropy(p, &abc) - marginal_entropy(p, c);
    // rounding can leave a tiny negative on independent variables
    v.max(0.0)
}

/// True iff `A − mid − B` holds up to `tol`, i.e. `I(A; B | mid) ≤ tol`.
pub fn check_markov(p: &JointDistribution, a: &[&str], mid: &[&str], b: &[&str], tol: f64) -> Result<bool> {
    Ok(cond_mutual_info(p, a, b, mid)? <= tol)
}

/// Normalized frequency table of the given symbol tuples.
pub fn empirical_joint(samples: &[Vec<usize>], axes: Vec<Alphabet>) -> Result<JointDistribution> {
    if samples.is_empty() {
        return Err(Error::Validation("empirical_joint needs at least one sample".into()));
    }
    let mut counts = vec![0u64; product_len(&axes)];
    for (n, s) in samples.iter().enumerate() {
        if s.len() != axes.len() || s.iter().zip(&axes).any(|(&i, a)| i >= a.size()) {
            return Err(Error::Validation(format!("sample {n} is outside the axes")));
        }
        counts[ravel(&axes, s)] += 1;
    }
    JointDistribution::from_counts(axes, &counts)
}

impl JointDistribution {
    /// Entry-wise comparison at the internal tolerance.
    pub fn approx_eq(&self, other: &JointDistribution) -> bool {
        same_axes(&self.axes, &other.axes)
            && self
                .mass
                .iter()
                .zip(&other.mass)
                .all(|(a, b)| (a - b).abs() <= COMPARE_TOL)
    }
}
