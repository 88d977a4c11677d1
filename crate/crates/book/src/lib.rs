//! Guide chapters compiled as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/exact-lp.md")]
pub mod exact_lp {}
#[doc = include_str!("../../../book/src/covering-problems.md")]
pub mod covering_problems {}
#[doc = include_str!("../../../book/src/robust-mechanisms.md")]
pub mod robust_mechanisms {}
#[doc = include_str!("../../../book/src/relaxations.md")]
pub mod relaxations {}
#[doc = include_str!("../../../book/src/dominant-strategy.md")]
pub mod dominant_strategy {}
#[doc = include_str!("../../../book/src/lookahead.md")]
pub mod lookahead {}
#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}
