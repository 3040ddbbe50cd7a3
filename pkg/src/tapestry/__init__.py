"""Multiview delay-embedding forecast threads with sequential reweighting,
predictive-likelihood inference, and scenario conditioning."""

from .dataio import (ColumnCoding, MonthlyTable, SeasonalSeries,
                     load_monthly_csv, parse_subset_code,
                     standardize_and_anomalize, to_seasonal)
from .embedding import (EmbeddedDataset, IntrinsicDimEstimate, View,
                        build_delay_map, embedding_dim, enumerate_views,
                        levina_bickel_dim)
from .inference import (FdrReport, TestResult, compare_tables, fdr_select,
                        ks_uniform, learning_tests, paired_autocov_ttest)
from .neighbors import NeighborSet, knn
from .regression import (GapModel, LarsPath, cp_select, fit_gap_regression,
                         lars_path, predict_with_residual)
from .scenario import (CategoryBounds, ScenarioState, categorize,
                       condition_on_category, conditional_summary,
                       scenario_from_tapestry)
from .synth import SynthConfig, generate
from .threads import (LikelihoodTable, Tapestry, TapestryConfig,
                      build_tapestry, likelihood_table, predictive_density,
                      reweight)

__version__ = "0.1.0"
