"""Matching tools for international kidney-exchange pools.

The package covers the full pipeline: compatibility-graph modelling,
policy-valid cycle and segment enumeration, binary-program construction,
an exact solver, cooperation regimes, and multi-period simulation.
"""

from .errors import (ConfigurationError, DecodeError, IkepError,
                     InstanceFormatError, ModelError, UnsupportedPolicyError)
from .graph import (Arc, CompatibilityGraph, Node, NodeKind, Subgraph,
                    blood_compatible, country_subgraph, induced_subgraph,
                    parse_instance, reduce_chains_to_cycles, write_instance)
from .policy import (Cap, CountryPolicy, PolicyConfig, cap_value,
                     merged_policy, restrict_to_country, single_country_policy)
from .sampling import CountrySpec, InstanceSpec, sample_instance
from .enumeration import (Cycle, Segment, enumerate_cycles,
                          enumerate_segments, is_valid_cycle, make_cycle)
from .model import (IpModel, LinearConstraint, Var, VarKind,
                    add_layer_constraints, build_bounded_unbounded_model,
                    build_cycle_model, build_edge_model, build_free_edge_model,
                    build_mixed_model)
from .lp_format import export_lp_text, parse_lp_text
from .solver import Assignment, ExchangePlan, decode, solve, solve_exhaustive
from .policies import (PolicyOutcome, Regime, benefit_metrics,
                       run_consecutive, run_merged, run_no_cooperation,
                       run_regime)
from .simulator import (PairFate, RunRecord, SimulationConfig, SimulationResult,
                        StageRecord, SweepCell, build_instance,
                        read_run_report, read_stage_report, run_simulation,
                        schedule_arrivals, sweep, write_run_report,
                        write_stage_report)

__version__ = "1.0.0"
