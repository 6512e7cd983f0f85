//! Symbolic simulation of measurement-device-independent quantum secure
//! direct communication, dialogue and deterministic communication with
//! mutual identity authentication.

pub mod adversary;
pub mod config;
pub mod golden;
pub mod metrics;
pub mod montecarlo;
pub mod oracle;
pub mod pauli;
pub mod protocol;
pub mod register;
