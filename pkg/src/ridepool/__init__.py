"""Ride-pooling assignment: stable-group max-flow heuristic and exact branch-and-bound."""
from .model import (
    VEHICLE_CAPACITY,
    Assignment,
    EconomicParams,
    GeoPoint,
    Match,
    Request,
    TripPlan,
    Vehicle,
    manhattan_distance,
    synthesize_trip,
    validate_assignment,
)
from .grouping import partition_stable_groups
from .flownet import solve_flow
from .vtg import build_vtg
from .bnb import solve_bnb
from .oracle import brute_force_optimal
from .instance import Instance, InstanceConfig, compact_config, generate_random_instance, load_config
from .pipeline import run_pipeline

__version__ = "0.1.0"
