"""curaug: curriculum-driven strength-parameterized image augmentation.

Augmentation strength s composes s uniformly drawn operations from a fixed
22-op catalog, each at magnitude level s of a 30-step linear grid.  Per-class
integer levels rise only while the trained model keeps passing augmented
probes at every level so far, which yields a per-class difficulty curriculum
for long-tailed training loops.
"""

from .compose import ApplyOrder, OpSequence, apply_strength, sample_sequence
from .curriculum import (
    CurriculumConfig,
    CurriculumEngine,
    EpochPlan,
    RunResult,
    build_epoch_plan,
    materialize,
    run,
)
from .image import RasterImage, from_png_bytes, load_png, save_png, to_png_bytes
from .levels import (
    MAX_LEVEL,
    LevelTable,
    ProbeOutcome,
    ProbePlan,
    auto_tune_threshold,
    count_correct,
    plan_probes,
    update_level,
    update_table,
)
from .longtail import (
    CategoryMasks,
    ClassProfile,
    categorize,
    exp_profile,
    pareto_profile,
    subsample,
)
from .ops import (
    MAGNITUDE_LEVELS,
    OpKind,
    OpSpec,
    ParamClass,
    apply_op,
    magnitude,
    op_catalog,
)
from .rng import Stream
from .simlearner import SimLearnerParams, run_dynamics, sim_accuracy, sim_predict

__version__ = "0.1.0"

__all__ = [
    "ApplyOrder",
    "CategoryMasks",
    "ClassProfile",
    "CurriculumConfig",
    "CurriculumEngine",
    "EpochPlan",
    "LevelTable",
    "MAGNITUDE_LEVELS",
    "MAX_LEVEL",
    "OpKind",
    "OpSequence",
    "OpSpec",
    "ParamClass",
    "ProbeOutcome",
    "ProbePlan",
    "RasterImage",
    "RunResult",
    "SimLearnerParams",
    "Stream",
    "apply_op",
    "apply_strength",
    "auto_tune_threshold",
    "build_epoch_plan",
    "categorize",
    "count_correct",
    "exp_profile",
    "from_png_bytes",
    "load_png",
    "magnitude",
    "materialize",
    "op_catalog",
    "pareto_profile",
    "plan_probes",
    "run",
    "run_dynamics",
    "sample_sequence",
    "save_png",
    "sim_accuracy",
    "sim_predict",
    "subsample",
    "to_png_bytes",
    "update_level",
    "update_table",
]
