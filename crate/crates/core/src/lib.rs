pub mod bench;
pub mod bss;
pub mod features;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod recording;
pub mod svm;
pub mod synth;
