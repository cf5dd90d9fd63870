pub mod rat;
pub mod series;
pub mod surd;
pub mod modforms;
pub mod expr;
pub mod quasipoly;
pub mod wdvv;
pub mod genus;
pub mod verify;
