//! Check operator sets: two-sided, one-sided and repetition-readout checks.

use std::collections::HashSet;
use std::fmt;

use rand::seq::index;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::pauli::{random_pauli, PauliString};
use crate::tableau::CliffordTableau;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    TwoSided,
    OneSided,
    ReadoutRepetition,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::TwoSided => "two_sided",
            CheckKind::OneSided => "one_sided",
            CheckKind::ReadoutRepetition => "readout_repetition",
        })
    }
}

/// One check: `left` before the payload, `right = U left U†` after it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub left: PauliString,
    pub right: PauliString,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckSet {
    pub kind: CheckKind,
    pub checks: Vec<Check>,
    pub flags: bool,
    pub payload: CliffordTableau,
}

impl CheckSet {
    /// Two-sided checks from explicit left Paulis.
    pub fn two_sided(payload: CliffordTableau, lefts: Vec<PauliString>) -> Result<Self> {
        let mut checks = Vec::with_capacity(lefts.len());
        for l in lefts {
            let right = payload.conjugate(&l)?;
            checks.push(Check { left: l, right });
        }
        let cs = CheckSet { kind: CheckKind::TwoSided, checks, flags: false, payload };
        cs.validate()?;
        Ok(cs)
    }

    /// One-sided checks from explicit Z-type right Paulis.
    pub fn one_sided(payload: CliffordTableau, rights: Vec<PauliString>) -> Result<Self> {
        let inv = payload.inverse();
        let mut checks = Vec::with_capacity(rights.len());
        for r in rights {
            let left = inv.conjugate(&r)?;
            checks.push(Check { left, right: r });
        }
        let cs = CheckSet { kind: CheckKind::OneSided, checks, flags: false, payload };
        cs.validate()?;
        Ok(cs)
    }

    /// Enables or disables one flag qubit per check (two-sided only).
    pub fn with_flags(mut self, flags: bool) -> Result<Self> {
        if flags && self.kind != CheckKind::TwoSided {
            return invalid("flag qubits are only supported for two-sided checks");
        }
        self.flags = flags;
        Ok(self)
    }

    /// First `m` checks of this set.
    pub fn prefix(&self, m: usize) -> Self {
        let mut out = self.clone();
        out.checks.truncate(m);
        out
    }

    pub fn n(&self) -> usize {
        self.payload.n()
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.payload.n();
        let mut seen = HashSet::new();
        for (i, c) in self.checks.iter().enumerate() {
            if c.left.n() != n || c.right.n() != n {
                return Err(Error::Dimension { expected: n, found: c.left.n().max(c.right.n()) });
            }
            if c.left.is_identity() {
                return invalid(format!("check {i} has an identity left operator"));
            }
            if !seen.insert(c.left.unsigned()) {
                return invalid(format!("check {i} repeats left operator {}", c.left.unsigned()));
            }
            if c.left.phase() % 2 == 1 || c.right.phase() % 2 == 1 {
                return invalid(format!("check {i} is not Hermitian"));
            }
            match self.kind {
                CheckKind::TwoSided | CheckKind::ReadoutRepetition => {
                    if self.payload.conjugate(&c.left)? != c.right {
                        return invalid(format!("check {i}: right operator is not U L U†"));
                    }
                }
                CheckKind::OneSided => {
                    if !c.right.is_z_type() || c.right.phase() != 0 {
                        return invalid(format!("check {i}: one-sided right operator must be unsigned Z-type"));
                    }
                    if self.payload.conjugate(&c.left)? != c.right {
                        return invalid(format!("check {i}: left operator is not U† R U"));
                    }
                }
            }
        }
        if self.flags && self.kind != CheckKind::TwoSided {
            return invalid("flag qubits are only supported for two-sided checks");
        }
        Ok(())
    }

    /// Every data qubit carries a non-identity factor in some check
    /// (left operators for two-sided, right operators for one-sided).
    pub fn covers_all_qubits(&self) -> bool {
        let n = self.n();
        let mut covered = vec![false; n];
        for c in &self.checks {
            let p = if self.kind == CheckKind::OneSided { &c.right } else { &c.left };
            for q in p.support() {
                covered[q] = true;
            }
        }
        covered.into_iter().all(|b| b)
    }

    /// One line per check, `L=<literal> R=<literal>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!("L={} R={}\n", c.left, c.right));
        }
        out
    }

    /// Parses [`CheckSet::to_text`] output against a known payload and kind,
    /// validating every check.
    pub fn from_text(text: &str, payload: CliffordTableau, kind: CheckKind) -> Result<Self> {
        let mut checks = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let mut left = None;
            let mut right = None;
            for tok in line.split_whitespace() {
                if let Some(v) = tok.strip_prefix("L=") {
                    left = Some(v.parse::<PauliString>().map_err(|e| err(e.to_string()))?);
                } else if let Some(v) = tok.strip_prefix("R=") {
                    right = Some(v.parse::<PauliString>().map_err(|e| err(e.to_string()))?);
                } else {
                    return Err(err(format!("unexpected token '{tok}'")));
                }
            }
            match (left, right) {
                (Some(left), Some(right)) => checks.push(Check { left, right }),
                _ => return Err(err("expected both L= and R=".into())),
            }
        }
        let cs = CheckSet { kind, checks, flags: false, payload };
        cs.validate()?;
        Ok(cs)
    }
}

/// `m` distinct indices from `1..=count`, uniformly without replacement and
/// in random order.
fn distinct_nonzero<R: Rng + ?Sized>(count: u128, m: usize, rng: &mut R) -> Vec<u64> {
    index::sample(rng, count as usize, m).into_iter().map(|i| i as u64 + 1).collect()
}

/// `m` distinct uniformly random non-identity Paulis in random order.
pub fn sample_distinct_paulis<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Vec<PauliString>> {
    if n == 0 {
        return invalid("checks need at least one data qubit");
    }
    if n < 31 {
        let count = (1u128 << (2 * n)) - 1;
        if m as u128 > count {
            return invalid(format!("{m} checks exceed the {count} non-identity Paulis on {n} qubits"));
        }
        return Ok(distinct_nonzero(count, m, rng).into_iter().map(|i| PauliString::from_index(n, i)).collect());
    }
    let mut seen = HashSet::with_capacity(m);
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let p = random_pauli(n, rng)?;
        if seen.insert(p.clone()) {
            out.push(p);
        }
    }
    Ok(out)
}

/// `m` distinct non-identity Z-type Paulis in random order.
pub fn sample_distinct_z_paulis<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Vec<PauliString>> {
    if n == 0 {
        return invalid("checks need at least one data qubit");
    }
    let to_z = |bits: &dyn Fn(usize) -> bool| {
        let mut p = PauliString::identity(n);
        for q in 0..n {
            p.set_bits(q, false, bits(q));
        }
        p
    };
    if n < 62 {
        let count = (1u128 << n) - 1;
        if m as u128 > count {
            return invalid(format!("{m} one-sided checks exceed the {count} non-identity Z-type Paulis on {n} qubits"));
        }
        return Ok(distinct_nonzero(count, m, rng).into_iter().map(|i| to_z(&|q| (i >> q) & 1 == 1)).collect());
    }
    let mut seen = HashSet::with_capacity(m);
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let bits: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let p = to_z(&|q| bits[q]);
        if !p.is_identity() && seen.insert(p.clone()) {
            out.push(p);
        }
    }
    Ok(out)
}

/// `m` two-sided checks with left operators drawn uniformly without
/// replacement from the non-identity Paulis.
pub fn sample_two_sided<R: Rng + ?Sized>(payload: &CliffordTableau, m: usize, rng: &mut R) -> Result<CheckSet> {
    let lefts = sample_distinct_paulis(payload.n(), m, rng)?;
    CheckSet::two_sided(payload.clone(), lefts)
}

/// `m` one-sided checks with right operators drawn uniformly without
/// replacement from the non-identity Z-type Paulis.
pub fn sample_one_sided<R: Rng + ?Sized>(payload: &CliffordTableau, m: usize, rng: &mut R) -> Result<CheckSet> {
    let rights = sample_distinct_z_paulis(payload.n(), m, rng)?;
    CheckSet::one_sided(payload.clone(), rights)
}

pub const COVERING_ATTEMPTS: usize = 10_000;

/// Like `sample_*`, but the whole set is redrawn until every data qubit is
/// covered by some check.
pub fn covering_sample<R: Rng + ?Sized>(
    payload: &CliffordTableau,
    m: usize,
    kind: CheckKind,
    rng: &mut R,
) -> Result<CheckSet> {
    for _ in 0..COVERING_ATTEMPTS {
        let cs = match kind {
            CheckKind::TwoSided => sample_two_sided(payload, m, rng)?,
            CheckKind::OneSided => sample_one_sided(payload, m, rng)?,
            CheckKind::ReadoutRepetition => return invalid("repetition readout checks are not sampled"),
        };
        if cs.covers_all_qubits() {
            return Ok(cs);
        }
    }
    Err(Error::Runtime(format!(
        "no covering set of {m} checks on {} qubits found in {COVERING_ATTEMPTS} attempts",
        payload.n()
    )))
}
