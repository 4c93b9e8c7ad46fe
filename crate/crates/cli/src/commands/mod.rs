pub mod contacts;
pub mod correct;
pub mod evaluate;
pub mod fuse;
pub mod optimize;
pub mod plot;
pub mod retarget;
pub mod synth;
