"""Structure learning for Bayesian networks over known variable groups."""

from .errors import (
    BudgetExceededError,
    CycleError,
    EncodingOverflowError,
    GbnError,
    InputFormatError,
    NoConsistentExtensionError,
    OrientationConflictError,
)
from .graph import (
    Cpdag,
    Dag,
    Grouping,
    apply_meek_rules,
    consistent_extension,
    cpdag_of,
    d_separated,
    markov_equivalent,
    random_dag,
    shd,
)
from .bayesnet import (
    DiscreteBayesNet,
    DiscreteDataset,
    forward_sample,
    random_parameters,
    xor_fixture,
)
from .independence import (
    CiOracle,
    DSeparationOracle,
    G2Oracle,
    GroupOracle,
    decode_group_product,
    dsep_oracle,
    encode_group_product,
    g2_statistic,
    g2_test,
    group_oracle,
)
from .scoring import ScoreTable, bdeu_local, build_score_table
from .search import combined_group_learn, exact_dp_learn, pc_learn
from .grouplearn import (
    GroupLearnResult,
    check_groupwise_faithfulness,
    find_group_dag_combined,
    find_group_dag_direct,
    find_group_dag_direct_oracle,
    find_group_dag_via_variable,
    find_group_dag_via_variable_oracle,
    group_causes_from_vstructures,
    group_dsep_table,
    groupwise_markov_equivalent,
    learn_group_dag,
    strong_causality_counterexample,
)
from .experiments import (
    BenchInstance,
    BenchmarkConfig,
    BenchmarkResult,
    generate_gf_pair,
    gf_prevalence,
    run_benchmark,
)

__version__ = "0.1.0"

__all__ = [
    "BenchInstance",
    "BenchmarkConfig",
    "BenchmarkResult",
    "BudgetExceededError",
    "CiOracle",
    "Cpdag",
    "CycleError",
    "Dag",
    "DiscreteBayesNet",
    "DiscreteDataset",
    "DSeparationOracle",
    "EncodingOverflowError",
    "G2Oracle",
    "GbnError",
    "GroupLearnResult",
    "GroupOracle",
    "Grouping",
    "InputFormatError",
    "NoConsistentExtensionError",
    "OrientationConflictError",
    "ScoreTable",
    "apply_meek_rules",
    "bdeu_local",
    "build_score_table",
    "check_groupwise_faithfulness",
    "combined_group_learn",
    "consistent_extension",
    "cpdag_of",
    "d_separated",
    "decode_group_product",
    "dsep_oracle",
    "encode_group_product",
    "exact_dp_learn",
    "find_group_dag_combined",
    "find_group_dag_direct",
    "find_group_dag_direct_oracle",
    "find_group_dag_via_variable",
    "find_group_dag_via_variable_oracle",
    "forward_sample",
    "g2_statistic",
    "g2_test",
    "generate_gf_pair",
    "gf_prevalence",
    "group_causes_from_vstructures",
    "group_dsep_table",
    "group_oracle",
    "groupwise_markov_equivalent",
    "learn_group_dag",
    "markov_equivalent",
    "pc_learn",
    "random_dag",
    "random_parameters",
    "run_benchmark",
    "shd",
    "strong_causality_counterexample",
    "xor_fixture",
]
