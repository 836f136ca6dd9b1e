pub mod catalog;
pub mod detect;
pub mod error;
pub mod expr;
pub mod field;
pub mod geodesic;
pub mod killing;
pub mod linalg;
pub mod metric;
pub mod models;
pub mod scan;
pub mod submanifold;
pub mod tolerance;

pub use error::{GeomError, Result};
pub use field::{CoordMap, VectorField};
pub use metric::{CurvatureBundle, MetricField};
