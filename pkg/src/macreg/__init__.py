"""Point cloud registration from putative correspondences via maximal
cliques in a compatibility graph."""

from .bench import (
    ABLATION_ROWS,
    INDOOR_CRITERIA,
    KITTI_CRITERIA,
    CliqueMode,
    RegistrationConfig,
    RegistrationReport,
    SuccessCriteria,
    SyntheticSpec,
    evaluate_batch,
    evaluate_dataset,
    generate_synthetic,
    register,
    rmse_evaluate,
)
from .cliques import (
    Clique,
    CliqueFilterParams,
    enumerate_maximal_cliques,
    maximum_clique,
    node_guided_select,
    normal_consistency_filter,
    rank_top_k,
)
from .correspondences import Correspondence, Correspondences
from .errors import (
    BudgetExceeded,
    CapacityExceeded,
    DegenerateCloud,
    DegenerateInput,
    FileFormatError,
    MacregError,
    MissingNormals,
    NoClique,
    NoHypotheses,
)
from .geometry import (
    RigidTransform,
    apply_transform,
    kabsch_svd,
    rmse_alignment,
    rotation_error,
    translation_error,
)
from .graph import (
    CompatGraph,
    GraphOrder,
    GraphParams,
    build_fog,
    build_sog,
    estimate_normals,
    estimate_resolution,
    gc_prefilter,
    s_cmp,
    s_dist,
)
from .hypotheses import (
    EvalParams,
    Hypothesis,
    Metric,
    SvdMode,
    clique_to_hypothesis,
    count_correct_hypotheses,
    dominant_eigenvector,
    ransac_baseline,
    residual,
    score_hypothesis,
    select_best,
)

__version__ = "0.1.0"
