from mistura.core.models.entropy import (
    DualEvalConfig,
    DualValidationReport,
    EntropySpec,
    LegendreProbeReport,
)
from mistura.core.models.game import (
    CertificationReport,
    GaaSnapshot,
    GameConfig,
    GameTrace,
    Prediction,
    RoundRecord,
)
from mistura.core.models.loss import (
    ExpertPredictionSet,
    LossMatrix,
    LossSpec,
    ProprietyReport,
    QuasiconvexityReport,
)
from mistura.core.models.manifest import RunManifest
from mistura.core.models.mixability import (
    BestResponse,
    DominanceReport,
    EtaSearchResult,
    MEvaluation,
    MixabilityReport,
    MixSearchConfig,
)
from mistura.core.models.simplex import DualVector, ProbVector

__all__ = [
    "BestResponse",
    "CertificationReport",
    "DominanceReport",
    "DualEvalConfig",
    "DualValidationReport",
    "DualVector",
    "EntropySpec",
    "EtaSearchResult",
    "ExpertPredictionSet",
    "GaaSnapshot",
    "GameConfig",
    "GameTrace",
    "LegendreProbeReport",
    "LossMatrix",
    "LossSpec",
    "MEvaluation",
    "MixabilityReport",
    "MixSearchConfig",
    "Prediction",
    "ProbVector",
    "ProprietyReport",
    "QuasiconvexityReport",
    "RoundRecord",
    "RunManifest",
]
