"""Time-shifted key frames and wait-bounded channel reordering for IPTV zapping."""

from .analytics import distribution_distance, expected_switches
from .engine import (AggregateStats, ScenarioConfig, improvement_vs_baseline, run_episode,
                     run_scenario)
from .exceptions import IncompleteSweepError, ParameterError, UndefinedRatioError
from .grid import (ChannelGrid, OrderingKind, build_one_step, build_randomized, build_two_step,
                   distances)
from .phase import PhaseSchedule, build_laddered, wait_until_keyframe
from .policy import PolicyParams, SurfPlan, candidate_window, select_next
from .popularity import PopularityModel, SwitchingModel, build_zipf, sample_watch, switch_prob

__version__ = "0.1.0"
