pub mod charfn;
pub mod cumulants;
pub mod selftest;
pub mod simulate;
pub mod spectrum;
pub mod verify;

use rosenblatt::kernels::Hurst;

use crate::CliError;

pub fn hurst(h: f64) -> Result<Hurst, CliError> {
    Ok(Hurst::new(h)?)
}

pub fn config<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}
