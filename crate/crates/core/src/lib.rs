//! hp finite elements on triangle/quad meshes, discrete and continuous
//! interpolation norms, polynomial liftings from the triangle to the
//! tetrahedron and prism, and the experiment drivers built on them.

pub mod cli;
pub mod decomp;
pub mod fracnorm;
pub mod hpspace;
pub mod lifting;
pub mod mesh;
pub mod polyalg;
