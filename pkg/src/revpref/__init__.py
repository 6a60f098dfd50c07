"""Revealed-preference rationality measurement for decision-making agents.

The pipeline in one breath: generate budget-allocation task sheets,
drive an agent (remote chat endpoint or synthetic subject) through the
scripted conversation, parse its answers into priced choice data, and
score how close the choices come to utility-maximizing consistency
(GARP, CCEI, Houtman-Maks, money pump, minimum cost), with power
simulation and demand diagnostics on the side.
"""

from .analysis import (
    BenchmarkComparison,
    BronarsResult,
    DemandDiagnostics,
    HUMAN_BENCHMARK_CCEI,
    TTestResult,
    bronars_simulation,
    compare_to_benchmark,
    demand_diagnostics,
    emit_report,
    empirical_cdf,
    one_sample_ttest,
    spearman_rho,
    welch_ttest,
    write_cdf,
    write_reports_csv,
)
from .choice_data import (
    ChoiceDataset,
    DatasetMeta,
    Observation,
    load_dataset,
    make_observation,
    points_to_units,
    save_dataset,
)
from .errors import (
    BudgetMismatch,
    DimensionMismatch,
    EndpointError,
    EfficiencyOutOfRange,
    InsufficientData,
    InvalidParameter,
    MissingInput,
    NegativeAllocation,
    NonPositivePrice,
    ParseError,
    RevprefError,
    SchemaVersionMismatch,
    TransientEndpointError,
    UnknownDomain,
    ZeroExpenditure,
)
from .harness import (
    RetryPolicy,
    TrialJob,
    TrialRecord,
    TrialStore,
    run_trial,
    run_trials,
)
from .indices import (
    HoutmanMaksResult,
    IndexReport,
    MinimumCostResult,
    MoneyPumpResult,
    ccei,
    houtman_maks,
    minimum_cost_index,
    money_pump_index,
    score_all,
)
from .relations import (
    GarpResult,
    RelationMatrices,
    build_relations,
    garp_satisfied,
)
from .subjects import (
    CESAgent,
    CobbDouglasAgent,
    CornerMaxReturnAgent,
    HttpChatEndpoint,
    ParsedReply,
    PromptScript,
    RandomUniformAgent,
    RefusingAgent,
    TrembleAgent,
    build_prompts,
    parse_reply,
    synthetic_agent,
)
from .tasks import (
    DOMAINS,
    TaskSheet,
    VARIANTS,
    derive_trial_seed,
    generate_sheet,
    load_sheet,
    save_sheet,
)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkComparison",
    "BronarsResult",
    "BudgetMismatch",
    "CESAgent",
    "ChoiceDataset",
    "CobbDouglasAgent",
    "CornerMaxReturnAgent",
    "DatasetMeta",
    "DemandDiagnostics",
    "DimensionMismatch",
    "DOMAINS",
    "EfficiencyOutOfRange",
    "EndpointError",
    "GarpResult",
    "HoutmanMaksResult",
    "HttpChatEndpoint",
    "HUMAN_BENCHMARK_CCEI",
    "IndexReport",
    "InsufficientData",
    "InvalidParameter",
    "MinimumCostResult",
    "MissingInput",
    "MoneyPumpResult",
    "NegativeAllocation",
    "NonPositivePrice",
    "Observation",
    "ParsedReply",
    "ParseError",
    "PromptScript",
    "RandomUniformAgent",
    "RefusingAgent",
    "RelationMatrices",
    "RetryPolicy",
    "RevprefError",
    "SchemaVersionMismatch",
    "TaskSheet",
    "TransientEndpointError",
    "TrembleAgent",
    "TrialJob",
    "TrialRecord",
    "TrialStore",
    "TTestResult",
    "UnknownDomain",
    "VARIANTS",
    "ZeroExpenditure",
    "bronars_simulation",
    "build_prompts",
    "build_relations",
    "ccei",
    "compare_to_benchmark",
    "demand_diagnostics",
    "derive_trial_seed",
    "emit_report",
    "empirical_cdf",
    "garp_satisfied",
    "generate_sheet",
    "houtman_maks",
    "load_dataset",
    "load_sheet",
    "make_observation",
    "minimum_cost_index",
    "money_pump_index",
    "one_sample_ttest",
    "parse_reply",
    "points_to_units",
    "run_trial",
    "run_trials",
    "save_dataset",
    "save_sheet",
    "score_all",
    "spearman_rho",
    "synthetic_agent",
    "welch_ttest",
    "write_cdf",
    "write_reports_csv",
]
