pub mod api;
pub mod error;
pub mod ops;
pub mod sessions;
pub mod store;

pub use error::{Result, ServiceError};
pub use sessions::Sessions;
pub use store::Store;
