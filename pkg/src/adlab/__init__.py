"""adlab: a deterministic ad-delivery simulator with faithful lift / A-B test
harnesses and the audience-balance diagnostics to study divergent delivery."""

from ._kernels import USING_NUMBA
from .assignment import AllocationPlan, assign, hash_user, new_salt
from .delivery import (AUTO, AdCandidate, Audience, CampaignConfig, Creative,
                       CreativeKind, DeliveryWorld, FrequencyCap, Goal,
                       Opportunity, PacingState, Placement, RelevanceMode,
                       WorldConfig, eligible, generate_opportunities, pace,
                       predict_relevance, run_auction, simulate_slot)
from .diagnostics import (BalanceStat, FeatureMatrix, UniformitySummary,
                          balance_report, binned_gate_curve, cvm_uniform,
                          ks_uniform, observable_gate, smd, summarize, welch_t)
from .experiments import (ABResult, ABTestSpec, CellPosterior, LiftResult,
                          LiftTestSpec, ab_winner, aggregate_lift, conclusive,
                          lift_pairwise_winner, lift_posterior, run_ab_test,
                          run_lift_test, smallest_interval_90)
from .population import (PopulationConfig, ResponseModel, UserProfile,
                         generate_population, organic_conversion,
                         response_probs)
from .scenarios import (PRESETS, FilterFlags, ScenarioConfig, TestTemplate,
                        apply_filters, build_scenario, effect_split,
                        run_scenario)

__version__ = "0.1.0"
