//! Small numerical building blocks shared by the kernels.

pub mod gauss;
pub mod sampling;
pub mod sphere;
pub mod sum;

pub use gauss::GaussLegendre;
pub use sampling::HaltonSampler;
pub use sum::pairwise_sum;
