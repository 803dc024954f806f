//! Noise models: per-gate Pauli channels, readout flips, thermal relaxation
//! and global scale factors, with a line-oriented text format.
//!
//! ```text
//! [gates]
//! CX * depolarizing 0.001      # every CX
//! CX 0 1 depolarizing 0.002    # one orientation (the other falls back to it)
//! H 3 0.999 0.0005 0 0.0005    # explicit I X Y Z probabilities
//! [readout]
//! * 0.02
//! 4 0.01 0.03                  # p(1|0) p(0|1), symmetrised
//! [thermal]
//! * 100 80                     # T1 T2 in µs
//! [scales]
//! gate 0.5
//! [durations]
//! CX 350
//! ```

use std::collections::BTreeMap;

use crate::error::{invalid, Error, Result};
use crate::gate::{Gate, GateKind};
use crate::noise::channel::PauliChannel;
use crate::schedule::Durations;

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    gates: BTreeMap<(GateKind, Vec<usize>), PauliChannel>,
    gate_defaults: BTreeMap<GateKind, PauliChannel>,
    readout: BTreeMap<usize, f64>,
    readout_default: Option<f64>,
    thermal: BTreeMap<usize, (f64, f64)>,
    thermal_default: Option<(f64, f64)>,
    pub scale_gate: f64,
    pub scale_readout: f64,
    pub scale_thermal: f64,
    pub durations: Durations,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

const TWO_QUBIT_KINDS: [GateKind; 3] = [GateKind::CX, GateKind::CZ, GateKind::SWAP];

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel {
            gates: BTreeMap::new(),
            gate_defaults: BTreeMap::new(),
            readout: BTreeMap::new(),
            readout_default: None,
            thermal: BTreeMap::new(),
            thermal_default: None,
            scale_gate: 1.0,
            scale_readout: 1.0,
            scale_thermal: 1.0,
            durations: Durations::default(),
        }
    }

    /// Two-qubit depolarizing noise of strength `eps` on every two-qubit
    /// gate; everything else noiseless.
    pub fn uniform_depolarizing(eps: f64) -> Result<Self> {
        let mut nm = Self::noiseless();
        let ch = PauliChannel::depolarizing(eps, 2)?;
        for k in TWO_QUBIT_KINDS {
            nm.gate_defaults.insert(k, ch.clone());
        }
        Ok(nm)
    }

    pub fn set_gate_channel(&mut self, kind: GateKind, qubits: &[usize], ch: PauliChannel) -> Result<()> {
        Gate::new(kind, qubits)?;
        if ch.arity() != qubits.len() {
            return invalid(format!("{kind} on {qubits:?} needs a {}-qubit channel", qubits.len()));
        }
        self.gates.insert((kind, qubits.to_vec()), ch);
        Ok(())
    }

    pub fn set_gate_default(&mut self, kind: GateKind, ch: PauliChannel) -> Result<()> {
        match kind.arity() {
            Some(a) if a == ch.arity() && kind.is_unitary() => {
                self.gate_defaults.insert(kind, ch);
                Ok(())
            }
            _ => invalid(format!("channel of arity {} does not fit gate kind {kind}", ch.arity())),
        }
    }

    pub fn set_readout(&mut self, q: usize, m: f64) -> Result<()> {
        check_prob(m, "readout flip")?;
        self.readout.insert(q, m);
        Ok(())
    }

    pub fn set_readout_default(&mut self, m: f64) -> Result<()> {
        check_prob(m, "readout flip")?;
        self.readout_default = Some(m);
        Ok(())
    }

    pub fn set_thermal(&mut self, q: usize, t1: f64, t2: f64) -> Result<()> {
        check_times(t1, t2)?;
        self.thermal.insert(q, (t1, t2));
        Ok(())
    }

    pub fn set_thermal_default(&mut self, t1: f64, t2: f64) -> Result<()> {
        check_times(t1, t2)?;
        self.thermal_default = Some((t1, t2));
        Ok(())
    }

    /// Channel for a gate: exact qubit match, then the reversed orientation
    /// of a two-qubit gate, then the kind's wildcard entry.
    pub fn gate_channel(&self, g: &Gate) -> Option<PauliChannel> {
        let qs = g.qubits().to_vec();
        if let Some(ch) = self.gates.get(&(g.kind, qs.clone())) {
            return Some(ch.clone());
        }
        if qs.len() == 2 {
            if let Some(ch) = self.gates.get(&(g.kind, vec![qs[1], qs[0]])) {
                return Some(ch.swapped());
            }
        }
        self.gate_defaults.get(&g.kind).cloned()
    }

    pub fn readout_flip(&self, q: usize) -> f64 {
        self.readout.get(&q).copied().or(self.readout_default).unwrap_or(0.0)
    }

    pub fn thermal_times(&self, q: usize) -> Option<(f64, f64)> {
        self.thermal.get(&q).copied().or(self.thermal_default)
    }

    pub fn has_gate_channels(&self) -> bool {
        !self.gates.is_empty() || !self.gate_defaults.is_empty()
    }

    pub fn has_thermal(&self) -> bool {
        self.thermal_default.is_some() || !self.thermal.is_empty()
    }

    pub fn has_readout(&self) -> bool {
        self.readout_default.is_some_and(|m| m > 0.0) || self.readout.values().any(|&m| m > 0.0)
    }

    /// Idle channel for a delay on qubit `q`, if thermal noise is configured.
    pub fn delay_channel(&self, q: usize, t_ns: f64) -> Result<Option<PauliChannel>> {
        match self.thermal_times(q) {
            Some((t1, t2)) => Ok(Some(PauliChannel::thermal(t_ns, t1, t2)?)),
            None => Ok(None),
        }
    }

    /// Applies the scale factors and resets them to 1: gate fidelities are
    /// raised to `scale_gate`, readout off-diagonals are multiplied by
    /// `scale_readout` and renormalised, and T1, T2 are divided by
    /// `scale_thermal`.
    pub fn scaled(&self) -> Result<NoiseModel> {
        for (name, a) in [("gate", self.scale_gate), ("readout", self.scale_readout), ("thermal", self.scale_thermal)] {
            if !(a >= 0.0) || !a.is_finite() {
                return invalid(format!("{name} scale must be finite and nonnegative, got {a}"));
            }
        }
        let mut out = self.clone();
        let ag = self.scale_gate;
        for ((k, qs), ch) in out.gates.iter_mut() {
            *ch = ch.power(ag).map_err(|_| Error::NegativeChannel(format!("{k} on {qs:?}")))?;
        }
        for (k, ch) in out.gate_defaults.iter_mut() {
            *ch = ch.power(ag).map_err(|_| Error::NegativeChannel(format!("{k} on *")))?;
        }
        let ar = self.scale_readout;
        let scale_m = |m: f64| if m == 0.0 { 0.0 } else { ar * m / ((1.0 - m) + ar * m) };
        for m in out.readout.values_mut() {
            *m = scale_m(*m);
        }
        out.readout_default = out.readout_default.map(scale_m);
        let at = self.scale_thermal;
        let scale_t = |(t1, t2): (f64, f64)| {
            if at == 0.0 {
                (f64::INFINITY, f64::INFINITY)
            } else {
                (t1 / at, t2 / at)
            }
        };
        for t in out.thermal.values_mut() {
            *t = scale_t(*t);
        }
        out.thermal_default = out.thermal_default.map(scale_t);
        out.scale_gate = 1.0;
        out.scale_readout = 1.0;
        out.scale_thermal = 1.0;
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<NoiseModel> {
        let mut nm = NoiseModel::noiseless();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim().to_ascii_lowercase();
                if !["gates", "readout", "thermal", "scales", "durations"].contains(&name.as_str()) {
                    return Err(err(format!("unknown section [{name}]")));
                }
                section = name;
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let res = match section.as_str() {
                "gates" => nm.parse_gate_line(&toks),
                "readout" => nm.parse_readout_line(&toks),
                "thermal" => nm.parse_thermal_line(&toks),
                "scales" => nm.parse_scale_line(&toks),
                "durations" => nm.parse_duration_line(&toks),
                _ => invalid("entry outside of any section"),
            };
            res.map_err(|e| match e {
                Error::InvalidArgument(msg) => err(msg),
                other => err(other.to_string()),
            })?;
        }
        Ok(nm)
    }

    fn parse_gate_line(&mut self, toks: &[&str]) -> Result<()> {
        let kind: GateKind = toks.first().ok_or_else(|| Error::InvalidArgument("empty gate entry".into()))?.parse()?;
        if !kind.is_unitary() {
            return invalid(format!("{kind} cannot carry a gate channel"));
        }
        let arity = kind.arity().unwrap_or(1);
        let mut idx = 1;
        let mut qubits = Vec::new();
        let wildcard = toks.get(1) == Some(&"*");
        if wildcard {
            idx = 2;
        } else {
            for _ in 0..arity {
                let t = toks.get(idx).ok_or_else(|| Error::InvalidArgument(format!("{kind} needs {arity} qubit(s)")))?;
                qubits.push(parse_num::<usize>(t, "qubit index")?);
                idx += 1;
            }
        }
        let rest = &toks[idx..];
        let ch = if rest.first().map(|s| s.eq_ignore_ascii_case("depolarizing")) == Some(true) {
            if rest.len() != 2 {
                return invalid("expected 'depolarizing <eps>'");
            }
            PauliChannel::depolarizing(parse_num(rest[1], "depolarizing strength")?, arity)?
        } else {
            let probs = rest.iter().map(|t| parse_num::<f64>(t, "probability")).collect::<Result<Vec<_>>>()?;
            PauliChannel::new(arity, probs)?
        };
        if wildcard {
            self.set_gate_default(kind, ch)
        } else {
            self.set_gate_channel(kind, &qubits, ch)
        }
    }

    fn parse_readout_line(&mut self, toks: &[&str]) -> Result<()> {
        let m = match toks.len() {
            2 => parse_num::<f64>(toks[1], "readout flip")?,
            3 => {
                let p01 = parse_num::<f64>(toks[1], "readout flip")?;
                let p10 = parse_num::<f64>(toks[2], "readout flip")?;
                check_prob(p01, "readout flip")?;
                check_prob(p10, "readout flip")?;
                0.5 * (p01 + p10)
            }
            _ => return invalid("expected '<qubit|*> <m>' or '<qubit|*> <p(1|0)> <p(0|1)>'"),
        };
        if toks[0] == "*" {
            self.set_readout_default(m)
        } else {
            self.set_readout(parse_num(toks[0], "qubit index")?, m)
        }
    }

    fn parse_thermal_line(&mut self, toks: &[&str]) -> Result<()> {
        if toks.len() != 3 {
            return invalid("expected '<qubit|*> <T1_us> <T2_us>'");
        }
        let t1 = parse_num::<f64>(toks[1], "T1")?;
        let t2 = parse_num::<f64>(toks[2], "T2")?;
        if toks[0] == "*" {
            self.set_thermal_default(t1, t2)
        } else {
            self.set_thermal(parse_num(toks[0], "qubit index")?, t1, t2)
        }
    }

    fn parse_scale_line(&mut self, toks: &[&str]) -> Result<()> {
        if toks.len() != 2 {
            return invalid("expected '<gate|readout|thermal> <alpha>'");
        }
        let a = parse_num::<f64>(toks[1], "scale")?;
        if !(a >= 0.0) || !a.is_finite() {
            return invalid(format!("scale must be finite and nonnegative, got {a}"));
        }
        match toks[0].to_ascii_lowercase().as_str() {
            "gate" => self.scale_gate = a,
            "readout" => self.scale_readout = a,
            "thermal" => self.scale_thermal = a,
            other => return invalid(format!("unknown scale '{other}'")),
        }
        Ok(())
    }

    fn parse_duration_line(&mut self, toks: &[&str]) -> Result<()> {
        if toks.len() != 2 {
            return invalid("expected '<KIND> <ns>'");
        }
        let kind: GateKind = toks[0].parse()?;
        let d = parse_num::<f64>(toks[1], "duration")?;
        if !(d >= 0.0) || !d.is_finite() {
            return invalid(format!("duration must be finite and nonnegative, got {d}"));
        }
        self.durations.set(kind, d);
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse::<T>().map_err(|_| Error::InvalidArgument(format!("bad {what} '{s}'")))
}

fn check_prob(m: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&m) {
        return invalid(format!("{what} must lie in [0, 1], got {m}"));
    }
    Ok(())
}

fn check_times(t1: f64, t2: f64) -> Result<()> {
    if !(t1 > 0.0) || !(t2 > 0.0) {
        return invalid(format!("T1 and T2 must be positive, got {t1} and {t2}"));
    }
    if t2 > 2.0 * t1 {
        log::warn!("T2 = {t2} exceeds 2 T1 = {}; thermal Z weights will be clamped", 2.0 * t1);
    }
    Ok(())
}
