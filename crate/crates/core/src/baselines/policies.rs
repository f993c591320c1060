use rand::Rng;

use super::heuristic::heuristic_cost;
use super::{approach, deliver, DecisionContext, Policy};
use crate::agent::{Action, OutcomeStatus};
use crate::rng::Stream;
use crate::world::Task;

/// Candidate target with the lowest heuristic cost; ties go to the lowest id.
pub fn greedy_choice(ctx: &DecisionContext) -> Option<u32> {
    let state = ctx.planner_state();
    let mut best: Option<(f64, u32)> = None;
    for o in ctx.memory.candidates() {
        let Ok(e) = heuristic_cost(ctx.memory, &state, o.id, ctx.task, ctx.pool, &ctx.agent.params) else {
            continue;
        };
        if best.is_none_or(|(c, _)| e.total < c) {
            best = Some((e.total, o.id));
        }
    }
    best.map(|(_, id)| id)
}

pub fn greedy_policy(ctx: &DecisionContext) -> Action {
    if ctx.agent.carried.is_some() {
        return deliver(ctx);
    }
    match greedy_choice(ctx) {
        Some(id) => approach(ctx, id),
        None => Action::Explore,
    }
}

#[derive(Debug, Default, Clone)]
pub struct GreedyPolicy;

impl Policy for GreedyPolicy {
    fn name(&self) -> &str {
        "greedy"
    }

    fn decide(&mut self, ctx: &DecisionContext) -> Action {
        greedy_policy(ctx)
    }
}

/// The random agent's menu.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomOption {
    StepToNearestTarget(u32),
    StepToNearestContainer(u32),
    PickUpNearest(u32),
    Drop,
    Explore,
    WalkToRandomVisible,
}

/// Options that are valid right now, in fixed order.
pub fn random_options(ctx: &DecisionContext) -> Vec<RandomOption> {
    let obs = ctx.observation;
    let pos = ctx.agent.position;
    let nearest = |pred: &dyn Fn(&crate::agent::VisibleObject) -> bool| {
        obs.visible
            .iter()
            .filter(|v| pred(v))
            .min_by(|a, b| a.position.flat_distance(pos).total_cmp(&b.position.flat_distance(pos)).then(a.id.cmp(&b.id)))
            .map(|v| v.id)
    };
    let mut out = Vec::new();
    if let Some(id) = nearest(&|v| v.is_target) {
        out.push(RandomOption::StepToNearestTarget(id));
    }
    if ctx.task == Task::Wind {
        if let Some(id) = nearest(&|v| v.is_container) {
            out.push(RandomOption::StepToNearestContainer(id));
        }
    }
    if ctx.agent.carried.is_none() {
        let reach = ctx.agent.params.reach_radius;
        if let Some(id) = nearest(&|v| v.is_target && v.position.flat_distance(pos) <= reach) {
            out.push(RandomOption::PickUpNearest(id));
        }
    } else {
        out.push(RandomOption::Drop);
    }
    out.push(RandomOption::Explore);
    if !obs.visible.is_empty() {
        out.push(RandomOption::WalkToRandomVisible);
    }
    out
}

/// Uniform choice among the currently valid options.
pub fn random_policy(ctx: &DecisionContext, rng: &mut Stream) -> Action {
    let opts = random_options(ctx);
    match opts[rng.random_range(0..opts.len())] {
        RandomOption::StepToNearestTarget(id) | RandomOption::StepToNearestContainer(id) => Action::WalkStep(id),
        RandomOption::PickUpNearest(id) => Action::PickUp(id),
        RandomOption::Drop => Action::Drop,
        RandomOption::Explore => Action::Explore,
        RandomOption::WalkToRandomVisible => {
            let vis = &ctx.observation.visible;
            Action::WalkTo(vis[rng.random_range(0..vis.len())].id)
        }
    }
}

pub struct RandomPolicy {
    rng: Stream,
}

impl RandomPolicy {
    pub fn new(rng: Stream) -> Self {
        Self { rng }
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &str {
        "random"
    }

    fn decide(&mut self, ctx: &DecisionContext) -> Action {
        random_policy(ctx, &mut self.rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Walk,
    Pick,
    /// Wind only: walk to the chosen cart, if one is known yet.
    ToContainer(Option<u32>),
    Drop,
}

/// Commits to a random known target and carries the plan through.
pub struct RulePolicy {
    rng: Stream,
    plan: Option<(u32, Stage)>,
}

impl RulePolicy {
    pub fn new(rng: Stream) -> Self {
        Self { rng, plan: None }
    }

    fn pick_container(&mut self, ctx: &DecisionContext) -> Option<u32> {
        let cs: Vec<u32> = ctx.memory.containers().map(|c| c.id).collect();
        (!cs.is_empty()).then(|| cs[self.rng.random_range(0..cs.len())])
    }
}

impl Policy for RulePolicy {
    fn name(&self) -> &str {
        "rule"
    }

    fn decide(&mut self, ctx: &DecisionContext) -> Action {
        if let Some((t, _)) = self.plan {
            let alive = ctx.memory.get(t).is_some_and(|o| !o.gone && !o.rescued);
            if !alive && ctx.agent.carried != Some(t) {
                self.plan = None;
            }
        }
        if self.plan.is_none() {
            if let Some(t) = ctx.agent.carried {
                self.plan = Some((t, Stage::Drop));
            } else {
                let cands: Vec<u32> = ctx.memory.candidates().map(|o| o.id).collect();
                if cands.is_empty() {
                    return Action::Explore;
                }
                self.plan = Some((cands[self.rng.random_range(0..cands.len())], Stage::Walk));
            }
        }
        let (t, mut stage) = self.plan.expect("set above");
        if stage == Stage::Drop && ctx.task == Task::Wind {
            let in_reach = ctx.memory.containers().any(|c| ctx.in_reach(c.id));
            if !in_reach {
                stage = Stage::ToContainer(None);
            }
        }
        if let Stage::ToContainer(None) = stage {
            stage = Stage::ToContainer(self.pick_container(ctx));
        }
        self.plan = Some((t, stage));
        match stage {
            Stage::Walk if ctx.in_reach(t) => {
                self.plan = Some((t, Stage::Pick));
                Action::PickUp(t)
            }
            Stage::Walk => Action::WalkTo(t),
            Stage::Pick => Action::PickUp(t),
            Stage::ToContainer(Some(c)) if ctx.in_reach(c) => {
                self.plan = Some((t, Stage::Drop));
                Action::Drop
            }
            Stage::ToContainer(Some(c)) => Action::WalkTo(c),
            Stage::ToContainer(None) => Action::Explore,
            Stage::Drop => Action::Drop,
        }
    }

    fn feedback(&mut self, action: Action, outcome: OutcomeStatus, ctx: &DecisionContext) {
        let Some((t, stage)) = self.plan else { return };
        let ok = outcome == OutcomeStatus::Success;
        self.plan = match (action, stage) {
            (Action::Explore, _) => Some((t, stage)),
            (Action::WalkTo(_), Stage::Walk) if ok => Some((t, Stage::Pick)),
            (Action::PickUp(_), Stage::Pick) if ok => Some((
                t,
                if ctx.task == Task::Wind { Stage::ToContainer(None) } else { Stage::Drop },
            )),
            (Action::WalkTo(_), Stage::ToContainer(c)) if ok => Some((t, if c.is_some() { Stage::Drop } else { stage })),
            (Action::Drop, Stage::Drop) if ok => None,
            (_, Stage::ToContainer(_)) | (_, Stage::Drop) if ctx.task == Task::Wind && ctx.agent.carried.is_some() => {
                Some((t, Stage::ToContainer(None)))
            }
            _ => None,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{AgentParams, AgentState, HazardReading, Observation, VisibleObject};
    use crate::baselines::AgentMemory;
    use crate::geom::Vec3;
    use crate::physics::SimParams;
    use crate::rng;
    use crate::world::{Bounds, CategoryPool, Status};

    fn agent() -> AgentState {
        AgentState { position: Vec3::ZERO, heading: 0.0, carried: None, has_bag: true, params: AgentParams::default() }
    }

    fn vis(id: u32, x: f64) -> VisibleObject {
        VisibleObject {
            id,
            category: "book".into(),
            position: Vec3::new(x, 0.02, 0.0),
            half_extents: Vec3::new(0.11, 0.02, 0.15),
            distance: x.abs(),
            status: Status::Normal,
            hazard: HazardReading::Temperature(20.0),
            value: 10.0,
            damaged: false,
            is_target: true,
            is_container: false,
        }
    }

    fn obs(visible: Vec<VisibleObject>) -> Observation {
        Observation {
            frame: 0,
            agent_position: Vec3::ZERO,
            agent_heading: 0.0,
            carried: None,
            visible,
            burning_cells: vec![],
            swept: vec![],
        }
    }

    struct Fixture {
        agent: AgentState,
        memory: AgentMemory,
        obs: Observation,
        pool: CategoryPool,
        sim: SimParams,
    }

    impl Fixture {
        fn new(visible: Vec<VisibleObject>) -> Self {
            let o = obs(visible);
            let mut memory = AgentMemory::default();
            memory.update(&o);
            Self { agent: agent(), memory, obs: o, pool: CategoryPool::builtin(), sim: SimParams::default() }
        }

        fn ctx(&self) -> DecisionContext<'_> {
            DecisionContext {
                frame: 0,
                frame_limit: 1500,
                task: Task::Fire,
                agent: &self.agent,
                memory: &self.memory,
                observation: &self.obs,
                pool: &self.pool,
                sim: &self.sim,
                bounds: Bounds::new(-10.0, -10.0, 10.0, 10.0),
            }
        }
    }

    #[test]
    fn random_with_nothing_visible_explores() {
        let f = Fixture::new(vec![]);
        assert_eq!(random_options(&f.ctx()), vec![RandomOption::Explore]);
        let mut r = rng::stream(1, "p");
        for _ in 0..20 {
            assert_eq!(random_policy(&f.ctx(), &mut r), Action::Explore);
        }
    }

    #[test]
    fn random_never_drops_with_empty_hands() {
        let f = Fixture::new(vec![vis(1, 0.5), vis(2, 3.0)]);
        assert!(!random_options(&f.ctx()).contains(&RandomOption::Drop));
    }

    #[test]
    fn random_is_reproducible() {
        let f = Fixture::new(vec![vis(1, 0.5), vis(2, 3.0)]);
        let run = || {
            let mut r = rng::stream(9, "p");
            (0..30).map(|_| random_policy(&f.ctx(), &mut r)).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn greedy_picks_nearer_then_lower_id() {
        let f = Fixture::new(vec![vis(1, 5.0), vis(2, 2.0)]);
        assert_eq!(greedy_choice(&f.ctx()), Some(2));
        let f = Fixture::new(vec![vis(3, 2.0), vis(2, 2.0)]);
        assert_eq!(greedy_choice(&f.ctx()), Some(2));
    }

    #[test]
    fn empty_memory_explores() {
        let f = Fixture::new(vec![]);
        assert_eq!(greedy_policy(&f.ctx()), Action::Explore);
        let mut rule = RulePolicy::new(rng::stream(1, "p"));
        assert_eq!(rule.decide(&f.ctx()), Action::Explore);
    }

    #[test]
    fn rule_follows_plan_order() {
        let f = Fixture::new(vec![vis(4, 3.0)]);
        let mut rule = RulePolicy::new(rng::stream(1, "p"));
        let a = rule.decide(&f.ctx());
        assert_eq!(a, Action::WalkTo(4));
        rule.feedback(a, OutcomeStatus::Success, &f.ctx());
        let a = rule.decide(&f.ctx());
        assert_eq!(a, Action::PickUp(4));
        rule.feedback(a, OutcomeStatus::Success, &f.ctx());
        let mut carrying = Fixture::new(vec![vis(4, 3.0)]);
        carrying.agent.carried = Some(4);
        assert_eq!(rule.decide(&carrying.ctx()), Action::Drop);
    }

    #[test]
    fn rule_aborts_when_target_disappears() {
        let mut f = Fixture::new(vec![vis(4, 3.0), vis(5, 6.0)]);
        let mut rule = RulePolicy::new(rng::stream(2, "p"));
        let first = rule.decide(&f.ctx());
        let Action::WalkTo(t) = first else { panic!("{first:?}") };
        f.memory.mark_gone(t);
        let next = rule.decide(&f.ctx());
        let other = if t == 4 { 5 } else { 4 };
        assert_eq!(next, Action::WalkTo(other));
    }
}
