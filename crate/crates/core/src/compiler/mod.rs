//! Hamiltonian-to-circuit compilation: Trotterization, basis lowering,
//! scheduling and topology-aware routing.

mod decompose;
mod routing;
pub mod schedule;
mod trotter;

pub use decompose::{decompose_to_basis, expand_swaps, Basis};
pub use routing::{
    entangling_report, entangling_report_labeled, route, CouplingGraph, EntanglingReport, InitialLayout,
    RoutedCircuit,
};
pub use schedule::{schedule, IdleWindow, Schedule};
pub use trotter::{default_term_order, trotterize, TrotterPlan};
