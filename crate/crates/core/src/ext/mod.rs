//! Extensions of the base game: matrix-valued types, more than two
//! players, more than two actions, and types with dominant actions.

pub mod multidim;
pub mod extreme;
pub mod lottery;
pub mod multiaction;
pub mod nplayer;
