//! Tree-automatic presentations of ordinals below `w^w^w` with order and
//! addition, a first-order to tree-automaton compiler, and a decision
//! procedure that recovers Cantor normal forms from presentations.

pub mod automaton;
pub mod cli;
pub mod cnf;
pub mod decider;
pub mod fo;
pub mod presentation;
pub mod tree;
