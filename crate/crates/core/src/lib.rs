pub mod geometry;
pub mod latency;
pub mod metrics;
pub mod mission;
pub mod orca;
pub mod planner;
pub mod rng;
pub mod scenario;
pub mod sensors;
pub mod sim;
pub mod slam;
pub mod vehicle;
