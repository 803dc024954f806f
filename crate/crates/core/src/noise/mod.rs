//! Pauli noise channels and noise models.

pub mod channel;
pub mod model;

pub use channel::PauliChannel;
pub use model::NoiseModel;

use crate::error::Result;
use crate::gate::Gate;

/// Depolarizing channel of strength `eps` on `arity` qubits.
pub fn depolarizing(eps: f64, arity: usize) -> Result<PauliChannel> {
    PauliChannel::depolarizing(eps, arity)
}

/// Idle channel for `t_ns` with relaxation times in µs.
pub fn thermal_channel(t_ns: f64, t1_us: f64, t2_us: f64) -> Result<PauliChannel> {
    PauliChannel::thermal(t_ns, t1_us, t2_us)
}

/// Resolves the model's scale factors.
pub fn scale_noise(nm: &NoiseModel) -> Result<NoiseModel> {
    nm.scaled()
}

/// Conjugates a channel's labels through gates on its local qubits.
pub fn push_channel(ch: &PauliChannel, through: &[Gate]) -> Result<PauliChannel> {
    ch.push_through(through)
}
