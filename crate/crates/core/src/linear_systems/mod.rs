//! Complete linear systems on the curve: section bases, the embedding,
//! multiplication (Room) matrices, spans of divisors and section zeros.

mod basis;
mod room;
mod span;
mod zeros;

pub use basis::SectionBasis;
pub use room::{LinearForm, RoomMatrix};
pub(crate) use room::room_product;
pub use zeros::DEFAULT_ZERO_GRID;
