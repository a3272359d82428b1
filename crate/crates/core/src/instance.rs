//! The problem pair `(p(x,y), p(z|x,y))` and encoder/decoder pairs on it.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::probcore::{compose, Alphabet, Channel, JointDistribution};
use crate::{Error, Result};

/// Axis names used throughout.
pub const X: &str = "X";
pub const Y: &str = "Y";
pub const Z: &str = "Z";
pub const U: &str = "U";

/// A randomized function computation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub description: String,
    p_xy: JointDistribution,
    target: Channel,
}

impl Instance {
    /// `p_xy` is indexed `[x][y]` and `p_z_given_xy` `[x][y][z]`, both flattened.
    pub fn new(
        name: impl Into<String>,
        x: Alphabet,
        y: Alphabet,
        z: Alphabet,
        p_xy: Vec<f64>,
        p_z_given_xy: Vec<f64>,
    ) -> Result<Self> {
        let x = x.renamed(X);
        let y = y.renamed(Y);
        let z = z.renamed(Z);
        let p_xy = JointDistribution::new(vec![x.clone(), y.clone()], p_xy)?;
        let target = Channel::new(vec![x, y], vec![z], p_z_given_xy)?;
        Ok(Instance {
            name: name.into(),
            description: String::new(),
            p_xy,
            target,
        })
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn x(&self) -> &Alphabet {
        &self.p_xy.axes()[0]
    }

    pub fn y(&self) -> &Alphabet {
        &self.p_xy.axes()[1]
    }

    pub fn z(&self) -> &Alphabet {
        &self.target.outputs()[0]
    }

    pub fn p_xy(&self) -> &JointDistribution {
        &self.p_xy
    }

    pub fn target(&self) -> &Channel {
        &self.target
    }

    #[inline]
    pub fn p_xy_at(&self, x: usize, y: usize) -> f64 {
        self.p_xy.mass()[x * self.y().size() + y]
    }

    /// `p(z | x, y)`.
    #[inline]
    pub fn p_z(&self, z: usize, x: usize, y: usize) -> f64 {
        self.target.rows()[(x * self.y().size() + y) * self.z().size() + z]
    }

    /// The joint `p(x,y,z)` on axes `(X, Y, Z)`.
    pub fn target_joint(&self) -> JointDistribution {
        compose(&self.p_xy, &self.target).expect("instance axes are consistent")
    }

    /// First `(x, y)` in canonical order with zero input mass.
    pub fn zero_input_cell(&self) -> Option<(usize, usize)> {
        let ny = self.y().size();
        self.p_xy
            .mass()
            .iter()
            .position(|&m| m <= 0.0)
            .map(|i| (i / ny, i % ny))
    }

    pub fn has_full_support(&self) -> bool {
        self.zero_input_cell().is_none()
    }

    pub fn require_full_support(&self) -> Result<()> {
        match self.zero_input_cell() {
            None => Ok(()),
            Some((x, y)) => Err(Error::NotFullSupport {
                x: self.x().symbol(x).into(),
                y: self.y().symbol(y).into(),
            }),
        }
    }

    /// Same target channel under another input law.
    pub fn with_input_law(&self, p_xy: Vec<f64>) -> Result<Self> {
        let p_xy = JointDistribution::new(self.p_xy.axes().to_vec(), p_xy)?;
        Ok(Instance {
            p_xy,
            ..self.clone()
        })
    }
}

/// An encoder `p(u|x)` with a decoder `p(z|u,y)`.
///
/// This factorization makes `U − X − Y` and `Z − (U,Y) − X` hold by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxPair {
    pub encoder: Channel,
    pub decoder: Channel,
}

impl AuxPair {
    pub fn new(instance: &Instance, encoder: Channel, decoder: Channel) -> Result<Self> {
        let ok = encoder.inputs() == [instance.x().clone()]
            && encoder.outputs().len() == 1
            && decoder.inputs().len() == 2
            && decoder.inputs()[0] == encoder.outputs()[0]
            && &decoder.inputs()[1] == instance.y()
            && decoder.outputs() == [instance.z().clone()];
        if !ok {
            return Err(Error::Shape(format!(
                "auxiliary channels do not fit instance {}",
                instance.name
            )));
        }
        Ok(AuxPair { encoder, decoder })
    }

    pub fn u_alphabet(&self) -> &Alphabet {
        &self.encoder.outputs()[0]
    }

    pub fn u_card(&self) -> usize {
        self.u_alphabet().size()
    }

    /// `p(u | x)`.
    #[inline]
    pub fn p_u(&self, u: usize, x: usize) -> f64 {
        self.encoder.rows()[x * self.u_card() + u]
    }

    /// `p(z | u, y)`.
    #[inline]
    pub fn p_z(&self, z: usize, u: usize, y: usize, ny: usize, nz: usize) -> f64 {
        self.decoder.rows()[(u * ny + y) * nz + z]
    }

    /// The joint `p(x,y) p(u|x) p(z|u,y)` on axes `(X, Y, U, Z)`.
    pub fn induced_joint(&self, instance: &Instance) -> Result<JointDistribution> {
        let xyu = compose(instance.p_xy(), &self.encoder)?;
        compose(&xyu, &self.decoder)
    }

    /// `p(u | y)` under `p(x,y) p(u|x)`, indexed `[y][u]`. Rows with `p(y) = 0`
    /// fall back to the uniform law.
    pub fn p_u_given_y(&self, instance: &Instance) -> Vec<f64> {
        let (nx, ny, nu) = (instance.x().size(), instance.y().size(), self.u_card());
        let mut out = vec![0.0; ny * nu];
        for y in 0..ny {
            let py: f64 = (0..nx).map(|x| instance.p_xy_at(x, y)).sum();
            for u in 0..nu {
                out[y * nu + u] = if py > 0.0 {
                    (0..nx)
                        .map(|x| instance.p_xy_at(x, y) * self.p_u(u, x))
                        .sum::<f64>()
                        / py
                } else {
                    1.0 / nu as f64
                };
            }
        }
        out
    }
}

/// The reference problems used by tests and shipped as instance files.
pub mod fixtures {
    use super::*;

    fn bits(name: &str) -> Alphabet {
        Alphabet::indexed(name, 2)
    }

    /// Bob must output `x ∧ y`; inputs uniform. Not securely computable.
    pub fn and() -> Instance {
        let mut t = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                t.extend(if x & y == 1 { [0.0, 1.0] } else { [1.0, 0.0] });
            }
        }
        Instance::new("and", bits(X), bits(Y), bits(Z), vec![0.25; 4], t)
            .expect("valid fixture")
            .with_description("z = x AND y, uniform inputs")
    }

    /// Bob must output Alice's bit; inputs uniform.
    pub fn identity() -> Instance {
        let mut t = Vec::new();
        for x in 0..2 {
            for _y in 0..2 {
                t.extend(if x == 1 { [0.0, 1.0] } else { [1.0, 0.0] });
            }
        }
        Instance::new("identity", bits(X), bits(Y), bits(Z), vec![0.25; 4], t)
            .expect("valid fixture")
            .with_description("z = x, uniform inputs")
    }

    /// Output law depends on `y` only.
    pub fn x_independent() -> Instance {
        let by_y = [[0.3, 0.7], [0.6, 0.4]];
        let mut t = Vec::new();
        for _x in 0..2 {
            for row in &by_y {
                t.extend_from_slice(row);
            }
        }
        Instance::new(
            "x-independent",
            bits(X),
            bits(Y),
            bits(Z),
            vec![0.1, 0.2, 0.3, 0.4],
            t,
        )
        .expect("valid fixture")
        .with_description("p(z|x,y) = p(z|y)")
    }

    /// Alice's bit through a binary symmetric channel with crossover 0.1.
    pub fn bsc() -> Instance {
        let mut t = Vec::new();
        for x in 0..2 {
            for _y in 0..2 {
                t.extend(if x == 0 { [0.9, 0.1] } else { [0.1, 0.9] });
            }
        }
        Instance::new("bsc-0.1", bits(X), bits(Y), bits(Z), vec![0.25; 4], t)
            .expect("valid fixture")
            .with_description("z = BSC_0.1(x), y ignored, uniform inputs")
    }

    /// A 3×2×3 computable problem with two rank-one classes per `y`.
    ///
    /// `p(w|x)` is `(0.2, 0.5, 0.7)` for class 1. At `y = 0` class 1 is
    /// `{0, 1}` split `0.3 : 0.7` and class 2 is `{2}`; at `y = 1` class 1 is
    /// `{0}` and class 2 is `{1, 2}` split `0.4 : 0.6`.
    pub fn rank_one() -> Instance {
        let t = vec![
            0.06, 0.14, 0.8, 0.2, 0.32, 0.48, // x = 0
            0.15, 0.35, 0.5, 0.5, 0.2, 0.3, // x = 1
            0.21, 0.49, 0.3, 0.7, 0.12, 0.18, // x = 2
        ];
        Instance::new(
            "rank-one-3x2x3",
            Alphabet::indexed(X, 3),
            bits(Y),
            Alphabet::indexed(Z, 3),
            vec![0.1, 0.2, 0.25, 0.15, 0.05, 0.25],
            t,
        )
        .expect("valid fixture")
        .with_description("two rank-one classes per y with y-invariant alpha vectors")
    }

    pub fn all() -> Vec<Instance> {
        vec![and(), identity(), x_independent(), bsc(), rank_one()]
    }

    pub fn computable() -> Vec<Instance> {
        vec![identity(), x_independent(), bsc(), rank_one()]
    }
}
