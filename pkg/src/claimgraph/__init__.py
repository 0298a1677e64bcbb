"""Entity-centric claim validation over an entity-annotated news graph.

Articles are segmented into sections and stored in an embedded property
graph together with the entities mentioned in each section. A claim is
evaluated by linking its entities, collecting candidate evidence along
alternating entity-section paths, ranking candidates by semantic similarity,
and judging the best one for entailment, contradiction or neutrality.
"""

from .errors import (
    ClaimGraphError,
    CorruptSnapshot,
    DimensionMismatch,
    EmptyArticle,
    EmptyEntitySet,
    EmptySections,
    IoFailure,
    LengthMismatch,
    LinkerUnavailable,
    MalformedGazetteer,
    MalformedRecord,
    MalformedResponse,
    NonFiniteLogit,
    ProviderUnavailable,
    UnknownEntity,
    UnknownSection,
)
from .evaluation import (
    LabeledClaim,
    Metrics,
    load_dataset,
    map_label,
    run_eval,
    score_dataset,
)
from .evidence import CandidateEvidence, build_candidates, claim_entities
from .ingest import (
    ArticleRecord,
    IngestStats,
    SegmentationConfig,
    ingest_file,
    ingest_lines,
    segment,
)
from .linking import EntityMention, Gazetteer, LinkerConfig, WikifierClient
from .pipeline import (
    ClaimEvaluation,
    EvaluationLimits,
    RankedCandidate,
    evaluate_claim,
    explain,
)
from .remote import RemoteNliProvider, RemoteStsProvider
from .scoring import (
    Embedding,
    NliVerdict,
    ReferenceNliProvider,
    ReferenceStsProvider,
    StubNliProvider,
    StubStsProvider,
    cosine,
    nli,
    rank,
    softmax,
)
from .store import EntityRef, EvidencePath, GraphStats, GraphStore

__version__ = "0.1.0"
