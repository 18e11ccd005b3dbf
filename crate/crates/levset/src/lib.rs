pub use levset_core as core;
