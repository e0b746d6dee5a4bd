# app/simulator/generator.py

from typing import List, Tuple

from app.models.world import GenParams, GoalSpec, PlanDrift, ScenarioClass, WorldSpec
from app.simulator.builder import WorldBuilder
from app.utils.exceptions import ConfigError, GenParamError
from app.utils.logger import logger

GOAL_PRESENT_PROBABILITY = 0.8
STALE_BRANCH_LENGTH = 2
UNREACHABLE_TEXT = "text-unreachable"

FORCED_SEEDS = range(10)
DECOY_SEEDS = range(50)


def generate_world(params: GenParams, category: ScenarioClass) -> WorldSpec:
    """Generate a deterministic world of the given scenario class."""
    category = ScenarioClass(category)
    generators = {
        ScenarioClass.A: _generate_chain,
        ScenarioClass.B: _generate_decoy,
        ScenarioClass.C: _generate_drift,
        ScenarioClass.U: _generate_unsolvable,
        ScenarioClass.R: _generate_random,
    }
    world = generators[category](params)
    logger.info(
        f"Generated class {category.value} world seed={params.seed} "
        f"pages={len(world.pages)} digest={world.digest[:12]}"
    )
    return world


# ==================== CLASS A ====================
def _generate_chain(params: GenParams) -> WorldSpec:
    builder = WorldBuilder(ScenarioClass.A, params)
    names = [f"p{i}" for i in range(params.depth + 1)]
    _check_page_count(params, len(names))
    builder.page(names[0])
    builder.chain(names[0], names[1:])
    return builder.build(root=names[0], goal=GoalSpec(pages=[names[-1]]))


# ==================== CLASS B ====================
def _generate_decoy(params: GenParams) -> WorldSpec:
    k = params.detection_depth
    if k < 2:
        raise GenParamError(
            "class B needs detection_depth >= 2", details={"detection_depth": k}
        )
    if params.depth < k + 1:
        raise GenParamError(
            "class B needs depth >= detection_depth + 1",
            details={"depth": params.depth, "detection_depth": k},
        )
    distractors = (params.branching - 1) * max(params.depth - 1, 0)
    _check_page_count(params, 1 + params.depth + (k + 1) + distractors)

    builder = WorldBuilder(ScenarioClass.B, params)
    goal_path = ["p0"] + [f"g{i}" for i in range(1, params.depth + 1)]
    builder.page("p0")
    builder.chain("p0", goal_path[1:])

    decoy = [f"d{i}" for i in range(1, k + 2)]
    builder.link("g1", decoy[0], decoy=True)
    builder.chain(decoy[0], decoy[1:])

    # dead-end leaves on goal-path pages other than g1 and the goal itself
    counter = 0
    for page in goal_path[:-1]:
        if page == "g1":
            continue
        for _ in range(params.branching - 1):
            counter += 1
            builder.link(page, f"x{counter}")

    world = builder.build(root="p0", goal=GoalSpec(pages=[goal_path[-1]]))
    _verify_decoy_guarantee(world, goal_path, decoy, k)
    return world


def _verify_decoy_guarantee(
    world: WorldSpec, goal_path: List[str], decoy: List[str], k: int
) -> None:
    """No ancestor of the detection point closer than the branch point lies on the goal path."""
    on_goal_path = set(goal_path)
    detection_point = decoy[k - 1]
    ancestors = [e.source for e in reversed(world.path_to(detection_point))]
    recovery_distance = ancestors.index("g1") + 1
    if recovery_distance != k:
        raise GenParamError(
            "decoy branch does not place the branch point k edges up",
            details={"recovery_distance": recovery_distance, "detection_depth": k},
        )
    if world.steps_since_divergence(detection_point) != k:
        raise GenParamError("decoy branch divergence is not detectable at depth k")
    for ancestor in ancestors[: recovery_distance - 1]:
        if ancestor in on_goal_path:
            raise GenParamError(
                "single-step recovery would reach the goal path",
                details={"ancestor": ancestor},
            )


# ==================== CLASS C ====================
def _generate_drift(params: GenParams) -> WorldSpec:
    if params.depth < 2:
        raise GenParamError(
            "class C needs depth >= 2 to place a milestone", details={"depth": params.depth}
        )
    _check_page_count(params, params.depth + 1 + STALE_BRANCH_LENGTH)

    builder = WorldBuilder(ScenarioClass.C, params)
    names = [f"p{i}" for i in range(params.depth + 1)]
    builder.page(names[0])
    edges = builder.chain(names[0], names[1:])

    milestone = builder.rng.randint(1, params.depth - 1)
    stale_chain = [f"s{i}" for i in range(1, STALE_BRANCH_LENGTH + 1)]
    stale_edge = builder.link(names[milestone], stale_chain[0])
    builder.chain(stale_chain[0], stale_chain[1:])

    drift = PlanDrift(
        page=names[milestone],
        stale=stale_edge.action,
        actual=edges[milestone].action,
    )
    return builder.build(root=names[0], goal=GoalSpec(pages=[names[-1]]), drift=drift)


# ==================== CLASSES U / R ====================
def _grow_tree(builder: WorldBuilder, params: GenParams) -> Tuple[List[str], List[str]]:
    """Seeded random page tree; returns (pages in creation order, leaves)."""
    rng = builder.rng
    pages = [builder.page("p0")]
    depth = {"p0": 0}
    frontier = ["p0"]
    has_children = set()
    while frontier and len(pages) < params.max_pages:
        page = frontier.pop(0)
        if depth[page] >= params.depth:
            continue
        low = 1 if page == "p0" else 0
        for _ in range(rng.randint(low, params.branching)):
            if len(pages) >= params.max_pages:
                break
            child = f"p{len(pages)}"
            builder.link(page, child)
            pages.append(child)
            depth[child] = depth[page] + 1
            frontier.append(child)
            has_children.add(page)
    leaves = [p for p in pages if p not in has_children and p != "p0"]
    return pages, leaves


def _generate_random(params: GenParams) -> WorldSpec:
    builder = WorldBuilder(ScenarioClass.R, params)
    pages, leaves = _grow_tree(builder, params)
    rng = builder.rng

    goal_pages: List[str] = []
    if len(pages) > 1 and rng.random() < GOAL_PRESENT_PROBABILITY:
        goal_pages = [rng.choice(pages[1:])]
    candidates = [p for p in leaves if p not in goal_pages]
    traps = rng.sample(candidates, min(params.n_traps, len(candidates)))
    return builder.build(root="p0", goal=GoalSpec(pages=goal_pages), traps=traps)


def _generate_unsolvable(params: GenParams) -> WorldSpec:
    builder = WorldBuilder(ScenarioClass.U, params)
    pages, leaves = _grow_tree(builder, params)
    rng = builder.rng

    goal_pages = [rng.choice(leaves)] if leaves else ["p0"]
    candidates = [p for p in leaves if p not in goal_pages]
    traps = rng.sample(candidates, min(params.n_traps, len(candidates)))
    goal = GoalSpec(pages=goal_pages, typed_contains=UNREACHABLE_TEXT)
    return builder.build(root="p0", goal=goal, traps=traps)


def _check_page_count(params: GenParams, pages: int) -> None:
    if pages > params.max_pages:
        raise GenParamError(
            "world would exceed max_pages",
            details={"pages": pages, "max_pages": params.max_pages},
        )


# ==================== PRESETS ====================
def preset_worlds(name: str) -> List[Tuple[ScenarioClass, GenParams]]:
    """(class, params) pairs for the named suite, in suite order."""
    if name == "forced":
        return [
            (category, GenParams(depth=4, detection_depth=2, seed=seed))
            for category in (ScenarioClass.A, ScenarioClass.B, ScenarioClass.C)
            for seed in FORCED_SEEDS
        ]
    if name == "decoy":
        return [
            (ScenarioClass.B, GenParams(depth=4, detection_depth=2, seed=seed))
            for seed in DECOY_SEEDS
        ]
    raise ConfigError(f"Unknown preset {name!r}", details={"presets": ["forced", "decoy"]})
