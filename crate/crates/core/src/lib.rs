pub mod abstraction;
pub mod dynamics;
pub mod geometry;
pub mod linsolve;
pub mod ltl;
pub mod runtime;
pub mod semantics;
pub mod trajgen;
pub mod tubesynth;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/linear-programs.md")]
    mod linear_programs {}
    #[doc = include_str!("../../../book/src/tubes.md")]
    mod tubes {}
    #[doc = include_str!("../../../book/src/abstraction.md")]
    mod abstraction {}
    #[doc = include_str!("../../../book/src/ltl.md")]
    mod ltl {}
    #[doc = include_str!("../../../book/src/runtime.md")]
    mod runtime {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
