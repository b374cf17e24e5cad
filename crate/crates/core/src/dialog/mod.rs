//! Clarification dialog: belief tracking, the question policy, and the
//! per-conversation session that also drives unknown-word learning.

pub mod belief;
pub mod policy;
pub mod session;

pub use belief::{
    apply_confirmation_answer, belief_from_groundings, init_belief, role_supports, softmax, update_belief,
    BeliefState, BeliefSummary, RoleBelief, RoleSummary, UtteranceBelief,
};
pub use policy::{next_act, tally, Affordance, DialogAct, PolicyConfig, Verbalizer};
pub use session::{
    AgentMove, ConversationLog, EpisodeMetrics, Reading, Session, SessionConfig, Speaker, Turn, UserInput,
};
