//! Point counts, Grothendieck-ring classes and mod-`L` reduction
//! certificates for projective hypersurfaces.

pub mod certify;
pub mod cli;
pub mod counting;
pub mod ffield;
pub mod gen;
pub mod kclass;
pub mod mpoly;
pub mod potts;
