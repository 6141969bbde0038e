pub mod barcode;
pub mod certified;
pub mod complex;
pub mod corpus;
pub mod diagram;
pub mod error;
pub mod field;
pub mod irregular;
pub mod linalg;
pub mod novikov;
pub mod oracle;
pub mod par;
pub mod rh;
pub mod scenario;
pub mod sector;
pub mod wire;
