"""Poverty measurement and panel estimation toolkit.

Components: dual-cutoff multidimensional poverty measures, entropy
weighted livelihood capital scores, a two-period pension model with
closed-form solutions, fixed-effects binary-response and linear
estimators with cluster-robust covariance, a shift-share instrument and
recursive joint MLE for endogenous participation, robustness tools
(winsorization, matching, break and permutation tests), and seeded
synthetic panel generators. The ``povkit`` command drives all of it
from a YAML config.
"""

__version__ = "0.1.0"

from .endogeneity import (BartikConfig, RecursiveFit, bivariate_normal_cdf,
                          build_bartik_iv, fit_recursive_joint)
from .errors import (ConfigError, DataError, DegenerateDataError,
                     DuplicateKeyError, EstimationError, InfeasibleParamsError,
                     MissingValueError, NonConvergenceError, PovkitError,
                     RankDeficiencyError, SchemeError, SeparationError,
                     SingleClusterError, UndefinedResultError,
                     UnknownColumnError)
from .estimators import (FitResult, ModelSpec, average_marginal_effects,
                         build_design, cluster_robust_vcov, fit, fit_logit,
                         fit_ols, fit_probit)
from .livelihoods import (CapitalGrouping, EntropyWeights, LivelihoodScores,
                          capital_scores, entropy_weights,
                          normalize_indicators, six_capital_grouping)
from .mpi import (DEFAULT_POVERTY_CUTOFF, POVERTY_CUTOFF_PRESETS,
                  DeprivationMatrix, IndicatorScheme, IndicatorSpec,
                  MissingPolicy, MpiResult, Orientation, baseline_scheme,
                  builtin_scheme, compute_mpi, deprivation_scores,
                  dimensional_contributions, evaluate_deprivations,
                  incidence_curve, subgroup_decompose, with_income_scheme)
from .olg import (OlgParams, OlgSolution, comparative_statics,
                  expenditure_uplift, numeric_oracle, reference_preset,
                  solve_no_tpps, solve_with_tpps)
from .panel import PanelDataset, read_panel, write_panel
from .robustness import (ChowResult, MatchResult, PermutationResult,
                         chow_test, permutation_test, propensity_match,
                         winsorize, winsorize_bounds, winsorize_frame)
from .synth import (DgpConfig, MpiSampleProfile, generate_mpi_sample,
                    generate_panel)
