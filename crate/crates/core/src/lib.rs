pub mod flow;
pub mod homalg;
pub mod morse;
pub mod novikov;
pub mod rings;
pub mod suite;
pub mod verify;
pub mod zeta;
