//! File formats, parallel drivers and the command-line front end for
//! [`airborne_core`].

pub mod cli;
pub mod io;
pub mod parallel;
pub mod plot;
pub mod table;

pub use io::{load_csv, read_csv, write_csv, LoadError};
pub use table::{OutputTable, Row, TableConfig};
