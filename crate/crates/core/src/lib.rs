pub mod constants;
pub mod nv_model;
pub mod spin_core;
pub mod berry;
pub mod fitting;
pub mod roots;
pub mod odmr;
pub mod trap;
pub mod rotor_thermal;
pub mod rabi;
pub mod langevin_cooling;
pub mod cli;
