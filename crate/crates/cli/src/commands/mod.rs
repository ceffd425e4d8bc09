pub mod attribute;
pub mod chem;
pub mod data;
pub mod model;
pub mod stats;
pub mod thermo;
