"""Unitizing, rating collection, and inter-rater statistics for group-cohesion annotation studies."""

from .model import (
    ChangeCategory,
    ChangeEvent,
    CodingUnit,
    InteractionTimeline,
    ModelError,
    QuestionnaireItem,
    Rating,
    UtteranceEvent,
    default_questionnaire,
    load_timeline,
    subscale_score,
)
from .ranking import RankingCurve, UnitStat, ranking_analysis
from .stats import (
    IccResult,
    RatingMatrix,
    StatsError,
    TestResult,
    bartlett,
    bonferroni,
    brown_forsythe,
    games_howell,
    icc_one_way_average,
    kruskal_wallis,
    mse_vs_expert,
    shapiro_wilk,
    welch_anova,
)
from .unitize import (
    ActConfig,
    EstConfig,
    IntervalConfig,
    UnitizeError,
    unit_summary,
    unitize_act,
    unitize_est,
    unitize_interval,
)

__version__ = "0.1.0"
