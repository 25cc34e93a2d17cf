from .physics import (
    DIRECTIONS,
    MAX_EVENTS_PER_FRAME,
    MAX_PLACE_ATTEMPTS,
    REFERENCE_HEIGHT,
    REFERENCE_WIDTH,
    BallState,
    EnvContext,
    GenerationError,
    SceneState,
    SimConfig,
    SimulationError,
    Trajectory,
    Wall,
    init_scene,
    kinetic_energy,
    rollout,
    sample_context,
    scene_at_frame,
    step,
    time_of_impact_ball_ball,
    time_of_impact_ball_wall,
    walls_for,
)

__all__ = [
    "DIRECTIONS",
    "MAX_EVENTS_PER_FRAME",
    "MAX_PLACE_ATTEMPTS",
    "REFERENCE_HEIGHT",
    "REFERENCE_WIDTH",
    "BallState",
    "EnvContext",
    "GenerationError",
    "SceneState",
    "SimConfig",
    "SimulationError",
    "Trajectory",
    "Wall",
    "init_scene",
    "kinetic_energy",
    "rollout",
    "sample_context",
    "scene_at_frame",
    "step",
    "time_of_impact_ball_ball",
    "time_of_impact_ball_wall",
    "walls_for",
]
