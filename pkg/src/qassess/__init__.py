"""Security quality assessment over activity-based quality models.

The engine derives a discrete Bayesian net from a quality model, feeds
it yes/no observations voted from application-scanner findings, and
reports posterior distributions plus a predicted vulnerability density.
"""

from .assess import (
    AssessmentReport,
    SystemDescriptor,
    WhatIfSession,
    emit_report,
    evaluate_session,
    run_assessment,
    what_if,
)
from .bayes import (
    BayesNet,
    Node,
    NodeKind,
    Posterior,
    build_net,
    joint_enumerate,
    posterior_stats,
    query_marginal,
)
from .derive import AssessmentPlan, NodeMap, derive_net, load_plan, parse_plan, trace
from .errors import (
    BundleError,
    DeriveError,
    FindingsError,
    InconsistentEvidenceError,
    ModelError,
    ModelIntegrityError,
    ModelSyntaxError,
    NetError,
    NptError,
    PipelineError,
    QaError,
    StateSpaceError,
    UnknownIdError,
)
from .findings import (
    Finding,
    FindingsReport,
    ObservationSet,
    VulnTaxonomy,
    classify,
    load_report,
    load_taxonomy,
    parse_report,
    parse_taxonomy,
    register_adapter,
    scanner_diff,
    vote,
)
from .nptgen import (
    AffineExpr,
    BinScale,
    Npt,
    PartitionSpec,
    RankedScale,
    WmeanSpec,
    arithmetic_npt,
    partitioned_npt,
    ranked_npt,
    tnormal_cdf,
)
from .qmodel import (
    Activity,
    Entity,
    Factor,
    Impact,
    Measure,
    MeasureKind,
    Polarity,
    QualityModel,
    ValidationIssue,
    activity_subtree,
    load_model,
    parse_model,
    serialize_model,
    validate_model,
)

__version__ = "0.1.0"
