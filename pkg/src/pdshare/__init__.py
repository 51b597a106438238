"""Price-discovery shares between nearby and deferred futures contracts.

Pipeline: tick ingestion -> one-second grids -> daily Johansen rank
classification -> GS / CS / IS / ILS shares -> aggregation and determinant
regressions, with a structural simulator supplying ground truth.
"""

from .econometrics import (CATEGORY_COINTEGRATION, CATEGORY_NON_COINTEGRATION,
                           CATEGORY_STATIONARITY, HacCovariance, NonEstimableError,
                           RankDecision, SingularDesignError, VecmFit,
                           classify_rank, fit_vecm, johansen_trace, newey_west, ols)
from .market_data import (ContractPairDay, EmptyGridError, PairSkippedError,
                          SecondGrid, TickRecord, build_second_grid, is_estimable,
                          pair_contracts, parse_ticks)
from .metrics import (DiscoveryShares, GsFit, InfoShares, PipelineSettings,
                      ShareUndefinedError, aggregate_shares, component_share,
                      daily_pipeline, gs_share, information_leadership_share,
                      information_share, shares_from_vecm)
from .simulate import DayTruth, ScenarioConfig, StructuralConfig, simulate_day, simulate_sample

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
