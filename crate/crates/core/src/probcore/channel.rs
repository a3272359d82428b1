use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::alphabet::{check_unique_names, product_len, ravel, unravel};
use super::joint::validate_masses;
use super::{sample, Alphabet, SeedStream};
use crate::{Error, Result};

/// A conditional probability kernel from one alphabet tuple to another.
///
/// `rows` holds one probability vector over the output product for every
/// input tuple, inputs and outputs both in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    inputs: Vec<Alphabet>,
    outputs: Vec<Alphabet>,
    rows: Vec<f64>,
}

impl Channel {
    pub fn new(inputs: Vec<Alphabet>, outputs: Vec<Alphabet>, rows: Vec<f64>) -> Result<Self> {
        let mut all = inputs.clone();
        all.extend(outputs.iter().cloned());
        check_unique_names(&all)?;
        if outputs.is_empty() {
            return Err(Error::Shape("channel without outputs".into()));
        }
        let in_len = product_len(&inputs);
        let out_len = product_len(&outputs);
        if rows.len() != in_len * out_len {
            return Err(Error::Shape(format!(
                "channel table has {} entries, expected {}",
                rows.len(),
                in_len * out_len
            )));
        }
        for (r, row) in rows.chunks(out_len).enumerate() {
            validate_masses(row, &|| describe_row(&inputs, r))?;
        }
        Ok(Channel {
            inputs,
            outputs,
            rows,
        })
    }

    /// Builds the table from `f(input, output)`.
    pub fn from_fn(
        inputs: Vec<Alphabet>,
        outputs: Vec<Alphabet>,
        f: impl Fn(&[usize], &[usize]) -> f64,
    ) -> Result<Self> {
        let in_len = product_len(&inputs);
        let out_len = product_len(&outputs);
        let mut rows = Vec::with_capacity(in_len * out_len);
        for i in 0..in_len {
            let ii = unravel(&inputs, i);
            for o in 0..out_len {
                rows.push(f(&ii, &unravel(&outputs, o)));
            }
        }
        Self::new(inputs, outputs, rows)
    }

    /// A channel that puts all mass on `f(input)`.
    pub fn deterministic(
        inputs: Vec<Alphabet>,
        outputs: Vec<Alphabet>,
        f: impl Fn(&[usize]) -> Vec<usize>,
    ) -> Result<Self> {
        let in_len = product_len(&inputs);
        let out_len = product_len(&outputs);
        let mut rows = vec![0.0; in_len * out_len];
        for i in 0..in_len {
            let o = f(&unravel(&inputs, i));
            if o.len() != outputs.len() || o.iter().zip(&outputs).any(|(&v, a)| v >= a.size()) {
                return Err(Error::Shape("deterministic map leaves the output alphabet".into()));
            }
            rows[i * out_len + ravel(&outputs, &o)] = 1.0;
        }
        Self::new(inputs, outputs, rows)
    }

    /// Copies `input` onto a new axis called `output_name`.
    pub fn identity(input: &Alphabet, output_name: &str) -> Self {
        Self::deterministic(
            vec![input.clone()],
            vec![input.renamed(output_name)],
            |i| i.to_vec(),
        )
        .expect("identity channel is valid")
    }

    pub fn inputs(&self) -> &[Alphabet] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Alphabet] {
        &self.outputs
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn input_len(&self) -> usize {
        product_len(&self.inputs)
    }

    pub fn output_len(&self) -> usize {
        product_len(&self.outputs)
    }

    pub fn input_flat(&self, input: &[usize]) -> usize {
        ravel(&self.inputs, input)
    }

    pub fn row(&self, input_flat: usize) -> &[f64] {
        let w = self.output_len();
        &self.rows[input_flat * w..(input_flat + 1) * w]
    }

    pub fn prob(&self, input: &[usize], output: &[usize]) -> f64 {
        self.row(self.input_flat(input))[ravel(&self.outputs, output)]
    }

    /// Draws an output tuple for `input` by inverse CDF in canonical order.
    pub fn sample(&self, input: &[usize], rng: &mut SeedStream) -> Vec<usize> {
        let flat = sample::inverse_cdf(self.row(self.input_flat(input)), rng.next_f64());
        unravel(&self.outputs, flat)
    }

    /// Largest entrywise difference to another channel of the same shape.
    pub fn max_abs_diff(&self, other: &Channel) -> Result<f64> {
        if self.inputs != other.inputs || self.outputs != other.outputs {
            return Err(Error::Shape("channels have different axes".into()));
        }
        Ok(self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

fn describe_row(inputs: &[Alphabet], r: usize) -> String {
    let idx = unravel(inputs, r);
    let mut s = String::from("channel row (");
    for (k, (a, &i)) in inputs.iter().zip(&idx).enumerate() {
        if k > 0 {
            s.push_str(", ");
        }
        s.push_str(&format!("{}={}", a.name(), a.symbol(i)));
    }
    s.push(')');
    s
}
