use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

/// A named finite alphabet.
///
/// Symbol order is the declaration order and is used for every tie-break and
/// for inverse-CDF sampling.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    name: String,
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        symbols: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let name = name.into();
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::Validation(format!("alphabet {name} is empty")));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::Validation(format!(
                    "alphabet {name} repeats symbol {s:?}"
                )));
            }
        }
        Ok(Alphabet { name, symbols })
    }

    /// An alphabet whose symbols are `"0"`, `"1"`, ... `size - 1`.
    pub fn indexed(name: impl Into<String>, size: usize) -> Self {
        assert!(size >= 1, "alphabet size must be positive");
        Alphabet {
            name: name.into(),
            symbols: (0..size).map(|i| i.to_string()).collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == label)
    }

    /// Same symbols under a different axis name.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Alphabet {
            name: name.into(),
            symbols: self.symbols.clone(),
        }
    }
}

pub(crate) fn product_len(axes: &[Alphabet]) -> usize {
    axes.iter().map(Alphabet::size).product()
}

pub(crate) fn check_unique_names(axes: &[Alphabet]) -> Result<()> {
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].iter().any(|b| b.name == a.name) {
            return Err(Error::Shape(format!("axis {} appears twice", a.name)));
        }
    }
    Ok(())
}

/// Row-major flat index of a multi-index (last axis fastest).
pub(crate) fn ravel(axes: &[Alphabet], index: &[usize]) -> usize {
    debug_assert_eq!(axes.len(), index.len());
    axes.iter()
        .zip(index)
        .fold(0, |acc, (a, &i)| acc * a.size() + i)
}

pub(crate) fn unravel(axes: &[Alphabet], mut flat: usize) -> Vec<usize> {
    let mut out = alloc::vec![0; axes.len()];
    for (slot, a) in out.iter_mut().zip(axes).rev() {
        *slot = flat % a.size();
        flat /= a.size();
    }
    out
}
