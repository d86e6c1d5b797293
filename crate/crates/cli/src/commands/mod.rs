pub mod simulate;
pub mod spectrum;
pub mod stability;
pub mod verify;
pub mod wigner;
