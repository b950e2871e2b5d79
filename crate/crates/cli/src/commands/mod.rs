pub mod eval;
pub mod run;
pub mod snapshot;
pub mod synth;
pub mod track;
