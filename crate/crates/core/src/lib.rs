pub mod dist;
pub mod limits;
pub mod mat;
pub mod norms;
pub mod xlab;
