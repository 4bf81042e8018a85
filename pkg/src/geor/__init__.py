"""Geolocalization rewards, group-relative advantages, Chain-of-Region
synthesis, hard-subset filtering and threshold-accuracy evaluation."""

__version__ = "0.1.0"

from .coords import ParseOutcome, ParseStatus, extract_candidates, parse_strict, render_pair
from .evaluation import EvalReport, PredictionRecord, render_report, threshold_accuracy
from .geodesy import EARTH_RADIUS_KM, CoordinateError, GeoCoord, haversine_km, make_coord
from .grpo import (
    AdvantageSet,
    CandidateGroup,
    group_advantages,
    group_reward_variance,
    vanishing_advantage_rate,
)
from .hardset import PopularRegion, cluster_popular_regions, filter_hard, nearest_popular_km
from .regions import BoundaryDB, RegionChain, render_cor_sample, reverse_geocode, synthesize_dataset
from .reward import RewardBreakdown, composite_reward, distance_reward, format_reward
