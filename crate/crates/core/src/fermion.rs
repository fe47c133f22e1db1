//! Second-quantized Hamiltonians and the two benchmark models.
//!
//! Modes are 0-based. For lattice models the spin-orbitals are ordered
//! site-major with spin inner: `(site 0, up), (site 0, down), (site 1, up), ...`.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ladder {
    Create,
    Annihilate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LadderOp {
    pub mode: usize,
    pub kind: Ladder,
}

impl LadderOp {
    pub fn create(mode: usize) -> Self {
        LadderOp { mode, kind: Ladder::Create }
    }

    pub fn annihilate(mode: usize) -> Self {
        LadderOp { mode, kind: Ladder::Annihilate }
    }

    pub fn dagger(self) -> Self {
        let kind = match self.kind {
            Ladder::Create => Ladder::Annihilate,
            Ladder::Annihilate => Ladder::Create,
        };
        LadderOp { mode: self.mode, kind }
    }
}

/// A product of ladder operators, applied right to left, with a coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionTerm {
    pub ops: Vec<LadderOp>,
    pub coeff: Complex64,
}

impl FermionTerm {
    pub fn new(ops: Vec<LadderOp>, coeff: Complex64) -> Self {
        FermionTerm { ops, coeff }
    }

    pub fn adjoint(&self) -> Self {
        FermionTerm {
            ops: self.ops.iter().rev().map(|o| o.dagger()).collect(),
            coeff: self.coeff.conj(),
        }
    }
}

/// Sum of fermionic monomials over `modes` modes. This is also the JSON
/// interchange form of a Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionOperator {
    pub modes: usize,
    pub terms: Vec<FermionTerm>,
}

impl FermionOperator {
    pub fn new(modes: usize) -> Self {
        FermionOperator { modes, terms: Vec::new() }
    }

    pub fn push(&mut self, ops: Vec<LadderOp>, coeff: Complex64) {
        if coeff != ZERO {
            self.terms.push(FermionTerm::new(ops, coeff));
        }
    }

    /// Total number operator `sum_p a+_p a_p`.
    pub fn number(modes: usize) -> Self {
        let mut op = FermionOperator::new(modes);
        for p in 0..modes {
            op.push(vec![LadderOp::create(p), LadderOp::annihilate(p)], Complex64::new(1.0, 0.0));
        }
        op
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            if let Some(o) = t.ops.iter().find(|o| o.mode >= self.modes) {
                return Err(Error::IndexOutOfRange { index: o.mode, len: self.modes });
            }
            if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                return Err(Error::invalid("non-finite coefficient"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&OperatorJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: OperatorJson = serde_json::from_str(s)?;
        let op = FermionOperator::try_from(raw)?;
        op.validate()?;
        Ok(op)
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    modes: usize,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    ops: Vec<(String, usize)>,
    coeff: [f64; 2],
}

impl From<&FermionOperator> for OperatorJson {
    fn from(op: &FermionOperator) -> Self {
        OperatorJson {
            modes: op.modes,
            terms: op
                .terms
                .iter()
                .map(|t| TermJson {
                    ops: t
                        .ops
                        .iter()
                        .map(|o| {
                            let tag = match o.kind {
                                Ladder::Create => "+",
                                Ladder::Annihilate => "-",
                            };
                            (tag.to_string(), o.mode)
                        })
                        .collect(),
                    coeff: [t.coeff.re, t.coeff.im],
                })
                .collect(),
        }
    }
}

impl TryFrom<OperatorJson> for FermionOperator {
    type Error = Error;

    fn try_from(raw: OperatorJson) -> Result<Self> {
        let mut op = FermionOperator::new(raw.modes);
        for t in raw.terms {
            let ops = t
                .ops
                .into_iter()
                .map(|(tag, mode)| match tag.as_str() {
                    "+" => Ok(LadderOp::create(mode)),
                    "-" => Ok(LadderOp::annihilate(mode)),
                    other => Err(Error::invalid(format!("unknown ladder tag {other:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            op.terms.push(FermionTerm::new(ops, Complex64::new(t.coeff[0], t.coeff[1])));
        }
        Ok(op)
    }
}

/// Coefficient tables of a number-non-conserving two- and three-body Hamiltonian
///
/// ```text
/// H = c + sum t_pq a+_p a_q + sum (D_pq a+_p a+_q + D*_pq a_q a_p)
///       + sum v_pqrs a+_p a+_q a_s a_r + sum w_pqrstu a+_p a+_q a+_r a_u a_t a_s
/// ```
///
/// Two-body keys are stored with `p < q` and `r < s`; the sign of the
/// reordering is folded into the coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub modes: usize,
    pub constant: f64,
    pub one_body: DMatrix<Complex64>,
    pub pairing: DMatrix<Complex64>,
    pub two_body: BTreeMap<[usize; 4], Complex64>,
    pub three_body: BTreeMap<[usize; 6], Complex64>,
}

impl HamiltonianSpec {
    pub fn new(modes: usize) -> Self {
        HamiltonianSpec {
            modes,
            constant: 0.0,
            one_body: DMatrix::zeros(modes, modes),
            pairing: DMatrix::zeros(modes, modes),
            two_body: BTreeMap::new(),
            three_body: BTreeMap::new(),
        }
    }

    fn check(&self, idx: &[usize]) -> Result<()> {
        match idx.iter().find(|&&i| i >= self.modes) {
            Some(&i) => Err(Error::IndexOutOfRange { index: i, len: self.modes }),
            None => Ok(()),
        }
    }

    /// Adds `c a+_p a_q`.
    pub fn add_one_body(&mut self, p: usize, q: usize, c: Complex64) -> Result<()> {
        self.check(&[p, q])?;
        self.one_body[(p, q)] += c;
        Ok(())
    }

    /// Adds `c a+_p a_q + h.c.` (just `c a+_p a_p` when `p == q`, with `c` real).
    pub fn add_hermitian_one_body(&mut self, p: usize, q: usize, c: Complex64) -> Result<()> {
        if p == q {
            return self.add_one_body(p, p, Complex64::new(c.re, 0.0));
        }
        self.add_one_body(p, q, c)?;
        self.add_one_body(q, p, c.conj())
    }

    /// Adds `c a+_p a+_q + c* a_q a_p`, stored antisymmetrically.
    pub fn add_pairing(&mut self, p: usize, q: usize, c: Complex64) -> Result<()> {
        self.check(&[p, q])?;
        if p == q {
            return Ok(());
        }
        self.pairing[(p, q)] += c * 0.5;
        self.pairing[(q, p)] -= c * 0.5;
        Ok(())
    }

    /// Adds `c a+_p a+_q a_s a_r` (note the reversed annihilator order).
    pub fn add_two_body(&mut self, p: usize, q: usize, r: usize, s: usize, c: Complex64) -> Result<()> {
        self.check(&[p, q, r, s])?;
        if p == q || r == s {
            return Ok(());
        }
        let mut sign = 1.0;
        let (p, q) = if p < q { (p, q) } else { sign = -sign; (q, p) };
        let (r, s) = if r < s { (r, s) } else { sign = -sign; (s, r) };
        let e = self.two_body.entry([p, q, r, s]).or_insert(ZERO);
        *e += c * sign;
        if e.norm() == 0.0 {
            self.two_body.remove(&[p, q, r, s]);
        }
        Ok(())
    }

    /// Adds `c n_p n_q` for `p != q`.
    pub fn add_density_density(&mut self, p: usize, q: usize, c: f64) -> Result<()> {
        if p == q {
            return self.add_one_body(p, p, Complex64::new(c, 0.0));
        }
        // n_p n_q = a+_p a+_q a_q a_p
        self.add_two_body(p, q, p, q, Complex64::new(c, 0.0))
    }

    pub fn add_three_body(&mut self, idx: [usize; 6], c: Complex64) -> Result<()> {
        self.check(&idx)?;
        *self.three_body.entry(idx).or_insert(ZERO) += c;
        Ok(())
    }

    pub fn is_quadratic(&self) -> bool {
        self.two_body.is_empty() && self.three_body.is_empty()
    }

    pub fn conserves_number(&self) -> bool {
        self.pairing.iter().all(|c| c.norm() < 1e-14)
    }

    /// Checks the Hermiticity relations of the tables.
    pub fn validate(&self) -> Result<()> {
        let t = &self.one_body;
        let mut dev: f64 = max_norm(&(t - t.adjoint()));
        dev = dev.max(max_norm(&(&self.pairing + self.pairing.transpose())));
        for (&[p, q, r, s], c) in &self.two_body {
            let partner = self.two_body.get(&[r, s, p, q]).copied().unwrap_or(ZERO);
            dev = dev.max((c - partner.conj()).norm());
        }
        if dev > 1e-10 {
            return Err(Error::NotHermitian(dev));
        }
        if !self.constant.is_finite() {
            return Err(Error::invalid("non-finite constant"));
        }
        Ok(())
    }

    /// Expands the tables into explicit monomials.
    pub fn to_operator(&self) -> FermionOperator {
        let m = self.modes;
        let mut op = FermionOperator::new(m);
        op.push(vec![], Complex64::new(self.constant, 0.0));
        for p in 0..m {
            for q in 0..m {
                let c = self.one_body[(p, q)];
                op.push(vec![LadderOp::create(p), LadderOp::annihilate(q)], c);
                let d = self.pairing[(p, q)];
                op.push(vec![LadderOp::create(p), LadderOp::create(q)], d);
                op.push(vec![LadderOp::annihilate(q), LadderOp::annihilate(p)], d.conj());
            }
        }
        for (&[p, q, r, s], &c) in &self.two_body {
            op.push(
                vec![LadderOp::create(p), LadderOp::create(q), LadderOp::annihilate(s), LadderOp::annihilate(r)],
                c,
            );
        }
        for (&[p, q, r, s, t, u], &c) in &self.three_body {
            op.push(
                vec![
                    LadderOp::create(p),
                    LadderOp::create(q),
                    LadderOp::create(r),
                    LadderOp::annihilate(u),
                    LadderOp::annihilate(t),
                    LadderOp::annihilate(s),
                ],
                c,
            );
        }
        op
    }

    /// Inverse of [`to_operator`](Self::to_operator) for normal-ordered input.
    /// Pairing monomials `a+_p a+_q` are read into the table; their
    /// annihilator partners must be present as the Hermitian conjugate.
    pub fn from_operator(op: &FermionOperator) -> Result<Self> {
        op.validate()?;
        use Ladder::*;
        let mut spec = HamiltonianSpec::new(op.modes);
        let mut conj_pairing: DMatrix<Complex64> = DMatrix::zeros(op.modes, op.modes);
        for t in &op.terms {
            let kinds: Vec<Ladder> = t.ops.iter().map(|o| o.kind).collect();
            let md: Vec<usize> = t.ops.iter().map(|o| o.mode).collect();
            match kinds.as_slice() {
                [] => {
                    if t.coeff.im.abs() > 1e-12 {
                        return Err(Error::NotHermitian(t.coeff.im.abs()));
                    }
                    spec.constant += t.coeff.re;
                }
                [Create, Annihilate] => spec.add_one_body(md[0], md[1], t.coeff)?,
                [Create, Create] => spec.add_pairing(md[0], md[1], t.coeff)?,
                [Annihilate, Annihilate] => {
                    // c a_q a_p is the partner of c* a+_p a+_q
                    if md[0] != md[1] {
                        conj_pairing[(md[1], md[0])] += t.coeff.conj() * 0.5;
                        conj_pairing[(md[0], md[1])] -= t.coeff.conj() * 0.5;
                    }
                }
                [Create, Create, Annihilate, Annihilate] => {
                    spec.add_two_body(md[0], md[1], md[3], md[2], t.coeff)?
                }
                [Create, Create, Create, Annihilate, Annihilate, Annihilate] => {
                    spec.add_three_body([md[0], md[1], md[2], md[5], md[4], md[3]], t.coeff)?
                }
                _ => {
                    return Err(Error::Unsupported(format!(
                        "monomial {:?} is not normal ordered or has an unsupported shape",
                        t.ops
                    )))
                }
            }
        }
        let dev = max_norm(&(&conj_pairing - &spec.pairing));
        if dev > 1e-10 {
            return Err(Error::NotHermitian(dev));
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Parameters of the rectangular-lattice Hubbard model with optional on-site
/// s-wave pairing field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HubbardParams {
    pub nx: usize,
    pub ny: usize,
    pub t: f64,
    pub u: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub delta: f64,
}

pub fn hubbard_mode(site: usize, spin_down: bool) -> usize {
    2 * site + spin_down as usize
}

/// Open-boundary nearest-neighbour Hubbard model
///
/// `-t sum (a+_p a_q + h.c.) - mu sum (n - 1/2) + U sum (n_up - 1/2)(n_dn - 1/2)
///  + delta sum (a+_up a+_dn + a_dn a_up)`.
pub fn build_hubbard(p: &HubbardParams) -> Result<HamiltonianSpec> {
    if p.nx == 0 || p.ny == 0 {
        return Err(Error::invalid("lattice dimensions must be positive"));
    }
    if ![p.t, p.u, p.mu, p.delta].iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("non-finite Hubbard parameter"));
    }
    let sites = p.nx * p.ny;
    let mut spec = HamiltonianSpec::new(2 * sites);
    let site = |x: usize, y: usize| x + p.nx * y;
    let mut bonds = Vec::new();
    for y in 0..p.ny {
        for x in 0..p.nx {
            if x + 1 < p.nx {
                bonds.push((site(x, y), site(x + 1, y)));
            }
            if y + 1 < p.ny {
                bonds.push((site(x, y), site(x, y + 1)));
            }
        }
    }
    for &(i, j) in &bonds {
        for down in [false, true] {
            spec.add_hermitian_one_body(
                hubbard_mode(i, down),
                hubbard_mode(j, down),
                Complex64::new(-p.t, 0.0),
            )?;
        }
    }
    for i in 0..sites {
        let (up, dn) = (hubbard_mode(i, false), hubbard_mode(i, true));
        // -mu (n - 1/2) for both spins
        for m in [up, dn] {
            spec.add_one_body(m, m, Complex64::new(-p.mu, 0.0))?;
        }
        spec.constant += p.mu;
        // U (n_up n_dn - n_up/2 - n_dn/2 + 1/4)
        if p.u != 0.0 {
            spec.add_density_density(up, dn, p.u)?;
            spec.add_one_body(up, up, Complex64::new(-0.5 * p.u, 0.0))?;
            spec.add_one_body(dn, dn, Complex64::new(-0.5 * p.u, 0.0))?;
            spec.constant += 0.25 * p.u;
        }
        if p.delta != 0.0 {
            spec.add_pairing(up, dn, Complex64::new(p.delta, 0.0))?;
        }
    }
    Ok(spec)
}

/// Distance-screened Coulomb repulsion `1 / (1/U + r)`.
pub fn mataga_nishimoto(u: f64, r: f64) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::invalid("on-site repulsion U must be positive"));
    }
    if !(r >= 0.0) {
        return Err(Error::invalid("distance must be non-negative"));
    }
    Ok(1.0 / (1.0 / u + r))
}

/// One reaction-coordinate entry of a Pariser-Parr-Pople parameter table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PppParams {
    /// Hopping integrals; only the upper triangle is used, but the table must
    /// be symmetric.
    pub t: Vec<Vec<f64>>,
    /// On-site repulsion per site.
    pub u: Vec<f64>,
    /// `U` entering the screened repulsion formula.
    pub u_mn: f64,
    /// Constant (core-core) energy.
    pub v_c: f64,
    /// Inter-site distances.
    pub r: Vec<Vec<f64>>,
}

impl PppParams {
    pub fn sites(&self) -> usize {
        self.u.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.sites();
        if n == 0 {
            return Err(Error::invalid("PPP model needs at least one site"));
        }
        if self.t.len() != n || self.r.len() != n || self.t.iter().chain(&self.r).any(|row| row.len() != n) {
            return Err(Error::invalid("PPP tables must be square with one row per site"));
        }
        for i in 0..n {
            for j in 0..n {
                if (self.t[i][j] - self.t[j][i]).abs() > 1e-12 {
                    return Err(Error::invalid(format!("asymmetric hopping table at ({i},{j})")));
                }
                if (self.r[i][j] - self.r[j][i]).abs() > 1e-12 {
                    return Err(Error::invalid(format!("asymmetric distance table at ({i},{j})")));
                }
            }
        }
        Ok(())
    }

    pub fn gamma(&self, i: usize, j: usize) -> Result<f64> {
        mataga_nishimoto(self.u_mn, self.r[i][j])
    }
}

/// Pariser-Parr-Pople Hamiltonian
///
/// `sum_{i<j} t_ij E_ij + sum U_i n_ia n_ib + V_c + 1/2 sum_{i!=j} g_ij (n_i - 1)(n_j - 1)`
/// with `g_ij` from [`mataga_nishimoto`].
pub fn build_ppp(params: &PppParams) -> Result<HamiltonianSpec> {
    params.validate()?;
    let n = params.sites();
    let mut spec = HamiltonianSpec::new(2 * n);
    spec.constant = params.v_c;
    for i in 0..n {
        for j in (i + 1)..n {
            let t = params.t[i][j];
            if t != 0.0 {
                for down in [false, true] {
                    spec.add_hermitian_one_body(
                        hubbard_mode(i, down),
                        hubbard_mode(j, down),
                        Complex64::new(t, 0.0),
                    )?;
                }
            }
        }
        spec.add_density_density(hubbard_mode(i, false), hubbard_mode(i, true), params.u[i])?;
    }
    // 1/2 sum_{i != j} g (n_i - 1)(n_j - 1) = sum_{i<j} g (n_i n_j - n_i - n_j + 1)
    for i in 0..n {
        for j in (i + 1)..n {
            let g = params.gamma(i, j)?;
            for si in [false, true] {
                for sj in [false, true] {
                    spec.add_density_density(hubbard_mode(i, si), hubbard_mode(j, sj), g)?;
                }
            }
            for site in [i, j] {
                for s in [false, true] {
                    let m = hubbard_mode(site, s);
                    spec.add_one_body(m, m, Complex64::new(-g, 0.0))?;
                }
            }
            spec.constant += g;
        }
    }
    Ok(spec)
}

/// Versioned table of PPP parameters keyed by reaction coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PppTable {
    pub format: String,
    pub version: u32,
    #[serde(default)]
    pub source: String,
    #[serde(default)]
    pub units: BTreeMap<String, String>,
    pub entries: Vec<PppEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PppEntry {
    pub lambda: f64,
    #[serde(flatten)]
    pub params: PppParams,
}

impl PppTable {
    pub const FORMAT: &'static str = "ppp-params";

    pub fn from_json(s: &str) -> Result<Self> {
        let table: PppTable = serde_json::from_str(s)?;
        if table.format != Self::FORMAT {
            return Err(Error::invalid(format!("unexpected format tag {:?}", table.format)));
        }
        if table.version != 1 {
            return Err(Error::Unsupported(format!("PPP table version {}", table.version)));
        }
        for e in &table.entries {
            e.params.validate()?;
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn entry(&self, lambda: f64) -> Result<&PppParams> {
        self.entries
            .iter()
            .find(|e| (e.lambda - lambda).abs() < 1e-9)
            .map(|e| &e.params)
            .ok_or_else(|| Error::invalid(format!("no PPP entry for lambda = {lambda}")))
    }
}

fn max_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |a, c| a.max(c.norm()))
}
