use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::operator::HermitianOperator;
use crate::linalg::{CMatrix, C64};
use crate::{Error, Result};

/// Largest chain the dense simulator accepts (`2^14` states).
pub const MAX_SITES: usize = 14;

/// Couplings of `H = Σ_i J S^z_{i+1} S^z_i + h_z S^z_i + h_x S^x_i` on a ring.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct IsingParams {
    pub n_sites: usize,
    pub j: f64,
    pub h_z: f64,
    pub h_x: f64,
}

impl Default for IsingParams {
    fn default() -> Self {
        Self::studied(4)
    }
}

impl IsingParams {
    pub const STUDIED_HZ: f64 = 0.4523;
    pub const STUDIED_HX: f64 = 0.4045;

    pub fn new(n_sites: usize, j: f64, h_z: f64, h_x: f64) -> Self {
        Self { n_sites, j, h_z, h_x }
    }

    /// `J = 1`, `h_z = 0.4523`, `h_x = 0.4045`: the nonintegrable point near
    /// the antiferromagnet/paramagnet crossover.
    pub fn studied(n_sites: usize) -> Self {
        Self::new(n_sites, 1.0, Self::STUDIED_HZ, Self::STUDIED_HX)
    }

    pub fn validate(&self) -> Result<()> {
        check_sites(self.n_sites)?;
        if !(self.j.is_finite() && self.h_z.is_finite() && self.h_x.is_finite()) {
            return Err(Error::InvalidParameter("couplings must be finite"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites < 2 {
        return Err(Error::TooFewSites(n_sites));
    }
    if n_sites > MAX_SITES {
        return Err(Error::DimensionOverflow { n_sites, max: MAX_SITES });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum Spin {
    X,
    Y,
    Z,
}

impl Spin {
    /// `S^a|b⟩ = amp·|b'⟩` on one site.
    #[inline]
    fn act(self, site: usize, basis: usize) -> (C64, usize) {
        let down = (basis >> site) & 1 == 1;
        match self {
            Spin::Z => (C64::new(if down { -0.5 } else { 0.5 }, 0.0), basis),
            Spin::X => (C64::new(0.5, 0.0), basis ^ (1 << site)),
            Spin::Y => (C64::new(0.0, if down { -0.5 } else { 0.5 }), basis ^ (1 << site)),
        }
    }
}

/// Adds `coef · Π_k S^{a_k}_{site_k}` to `m`. Sites must be distinct.
fn add_product(m: &mut CMatrix, n_sites: usize, factors: &[(Spin, usize)], coef: f64) {
    for b in 0..1usize << n_sites {
        let mut amp = C64::new(coef, 0.0);
        let mut out = b;
        for &(spin, site) in factors.iter().rev() {
            let (a, next) = spin.act(site, out);
            amp *= a;
            out = next;
        }
        m.add_at(out, b, amp);
    }
}

/// `H1`, `H2` and `H = H1 + H2` of the Ising chain.
#[derive(Debug, Clone)]
pub struct IsingHamiltonian {
    pub params: IsingParams,
    pub h1: HermitianOperator,
    pub h2: HermitianOperator,
    pub h: HermitianOperator,
}

/// Builds `H1 = Σ_i J S^z_{i+1} S^z_i + h_z S^z_i`, `H2 = Σ_i h_x S^x_i` and their sum
/// with periodic bonds.
pub fn build_ising(params: &IsingParams) -> Result<IsingHamiltonian> {
    params.validate()?;
    let n = params.n_sites;
    let mut h1 = CMatrix::zeros(params.dim());
    let mut h2 = CMatrix::zeros(params.dim());
    for i in 0..n {
        let next = (i + 1) % n;
        add_product(&mut h1, n, &[(Spin::Z, next), (Spin::Z, i)], params.j);
        add_product(&mut h1, n, &[(Spin::Z, i)], params.h_z);
        add_product(&mut h2, n, &[(Spin::X, i)], params.h_x);
    }
    let h = h1.combine(1.0, &h2, 1.0);
    Ok(IsingHamiltonian {
        params: *params,
        h1: HermitianOperator::new(h1)?,
        h2: HermitianOperator::new(h2)?,
        h: HermitianOperator::new(h)?,
    })
}

fn gauge_term(n: usize, label: &str) -> Option<CMatrix> {
    let mut m = CMatrix::zeros(1 << n);
    for i in 0..n {
        let next = (i + 1) % n;
        match label {
            "Y" => add_product(&mut m, n, &[(Spin::Y, i)], 1.0),
            "X|Y" => {
                add_product(&mut m, n, &[(Spin::X, i), (Spin::Y, next)], 1.0);
                add_product(&mut m, n, &[(Spin::Y, i), (Spin::X, next)], 1.0);
            }
            "Y|Z" => {
                add_product(&mut m, n, &[(Spin::Y, i), (Spin::Z, next)], 1.0);
                add_product(&mut m, n, &[(Spin::Z, i), (Spin::Y, next)], 1.0);
            }
            _ => return None,
        }
    }
    Some(m)
}

/// Labels of the adiabatic-gauge-potential terms.
pub const GAUGE_LABELS: [&str; 3] = ["Y", "X|Y", "Y|Z"];

/// `Y = Σ S^y_i`, `X|Y = Σ S^x_i S^y_{i+1} + S^y_i S^x_{i+1}` and
/// `Y|Z = Σ S^y_i S^z_{i+1} + S^z_i S^y_{i+1}` on a ring.
pub fn build_gauge_terms(n_sites: usize) -> Result<GeneratorSet> {
    check_sites(n_sites)?;
    let mut set = GeneratorSet::default();
    for label in GAUGE_LABELS {
        let m = gauge_term(n_sites, label).expect("known gauge label");
        set.push(label, HermitianOperator::new(m)?)?;
    }
    Ok(set)
}

/// Ordered, uniquely labelled generators of the discrete action set.
#[derive(Debug, Clone, Default)]
pub struct GeneratorSet {
    generators: Vec<HermitianOperator>,
    labels: Vec<String>,
}

impl GeneratorSet {
    pub const QAOA_LABELS: [&'static str; 2] = ["H1", "H2"];
    pub const CD_LABELS: [&'static str; 5] = ["H1", "H2", "Y", "X|Y", "Y|Z"];

    pub fn push(&mut self, label: &str, op: HermitianOperator) -> Result<()> {
        if self.labels.iter().any(|l| l == label) {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
        if let Some(first) = self.generators.first() {
            if first.dim() != op.dim() {
                return Err(Error::DimensionMismatch { expected: first.dim(), found: op.dim() });
            }
        }
        self.generators.push(op);
        self.labels.push(label.to_string());
        Ok(())
    }

    /// Builds the named subset of `{H1, H2, Y, X|Y, Y|Z}` in the given order.
    pub fn from_labels<S: AsRef<str>>(ham: &IsingHamiltonian, labels: &[S]) -> Result<Self> {
        let n = ham.params.n_sites;
        let mut set = Self::default();
        for label in labels {
            let label = label.as_ref();
            let op = match label {
                "H1" => ham.h1.clone(),
                "H2" => ham.h2.clone(),
                other => match gauge_term(n, other) {
                    Some(m) => HermitianOperator::new(m)?,
                    None => return Err(Error::UnknownGenerator(other.to_string())),
                },
            };
            set.push(label, op)?;
        }
        Ok(set)
    }

    pub fn qaoa(ham: &IsingHamiltonian) -> Result<Self> {
        Self::from_labels(ham, &Self::QAOA_LABELS)
    }

    pub fn counterdiabatic(ham: &IsingHamiltonian) -> Result<Self> {
        Self::from_labels(ham, &Self::CD_LABELS)
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn get(&self, index: usize) -> Result<&HermitianOperator> {
        self.generators.get(index).ok_or(Error::InvalidGenerator { index, len: self.len() })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &HermitianOperator)> {
        self.labels.iter().map(String::as_str).zip(&self.generators)
    }

    /// Computes every cached eigendecomposition up front.
    pub fn warm(&self) {
        self.generators.iter().for_each(|g| {
            g.warm();
        });
    }
}
