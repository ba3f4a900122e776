//! Skip Graph identities, lookup tables and the search-for-numerical-ID step.

mod lookup;
mod name_id;
pub(crate) mod routing;
mod topology;

pub use lookup::{join_node, splice, LevelIndex, LevelNeighbors, LookupTable, Neighbor};
pub use name_id::{common_prefix_length, NameId};
pub use routing::{
    ideal_search_oracle, route_step, Direction, PiggybackEntry, RouteDecision, SearchMessage,
};
pub use topology::{assign_name_ids, generate_topology, NodeAddr, NodeIdentity, TopologySnapshot};
