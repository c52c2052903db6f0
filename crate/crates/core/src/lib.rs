pub mod audio_io;
pub mod corpus;
pub mod distfit;
pub mod network;
pub mod pipeline;
pub mod selftest;
pub mod spectral;
pub mod viz;
