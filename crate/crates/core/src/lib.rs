pub mod birkhoff;
pub mod cli;
pub mod enumeration;
pub mod envelope;
pub mod intmat;
pub mod order;
pub mod report;
pub mod semilattice;
pub mod vring;
