pub mod betarange;
pub mod centralconfig;
pub mod dynamics;
pub mod kepler;
pub mod monodromy;
pub mod reduction;
pub mod rk;
pub mod scan;
