"""Wire schemas for the campaign service.

All payloads carry schema_version so clients can detect incompatible
changes; the current version is 1.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field

SCHEMA_VERSION = 1


class UseSpec(BaseModel):
    id: str
    corpus: str
    tokens: list[str]
    target_index: int


class SenseSpec(BaseModel):
    id: str
    gloss: str


class AnnotatorSpec(BaseModel):
    id: str
    token: str


class WordSpec(BaseModel):
    word: str
    uses: list[UseSpec]
    senses: list[SenseSpec] = Field(default_factory=list)
    seed: Optional[int] = None


class SamplerOptions(BaseModel):
    node_fraction: float = 0.10
    edge_fraction: float = 0.30
    min_round_one_nodes: int = 5
    confirm_fraction: float = 0.02
    multi_annotation_rate: float = 0.5
    max_rounds: int = 5


class ClusterOptions(BaseModel):
    max_clusters_values: list[int] = Field(default_factory=lambda: [1000])
    restarts: int = 1
    sa_iterations: int = 1500


class CampaignSpec(BaseModel):
    id: Optional[str] = None
    words: list[WordSpec]
    roster: list[AnnotatorSpec]
    sampler: SamplerOptions = Field(default_factory=SamplerOptions)
    clustering: ClusterOptions = Field(default_factory=ClusterOptions)
    seed: int = 0


class WordStatus(BaseModel):
    word: str
    round: int
    status: str
    assigned: int
    judged: int


class CampaignCreated(BaseModel):
    schema_version: int = SCHEMA_VERSION
    id: str
    words: list[WordStatus]


class CampaignStatus(BaseModel):
    schema_version: int = SCHEMA_VERSION
    id: str
    words: list[WordStatus]


class ContextPanel(BaseModel):
    kind: str                       # "use" or "sense"
    node_id: str
    tokens: list[str] = Field(default_factory=list)
    target_index: Optional[int] = None
    gloss: Optional[str] = None


class QueueItem(BaseModel):
    schema_version: int = SCHEMA_VERSION
    campaign: str
    word: str
    round: int
    pair: list[str]
    left: ContextPanel
    right: ContextPanel
    scale: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    judged: int
    assigned: int


class NextResponse(BaseModel):
    schema_version: int = SCHEMA_VERSION
    item: Optional[QueueItem] = None


class JudgmentIn(BaseModel):
    pair: list[str]
    value: int


class JudgmentAck(BaseModel):
    schema_version: int = SCHEMA_VERSION
    word: str
    pair: list[str]
    round: int
    accepted: bool = True


class ScoresView(BaseModel):
    schema_version: int = SCHEMA_VERSION
    word: str
    status: str
    binary: Optional[int] = None
    graded: Optional[float] = None
    k: Optional[int] = None
    n: Optional[int] = None
    done_reason: Optional[str] = None


class AdvanceResult(BaseModel):
    schema_version: int = SCHEMA_VERSION
    word: str
    outcome: str                    # "plan" or "done"
    round: int
    n_pairs: int = 0
    done_reason: Optional[str] = None
    scores: Optional[ScoresView] = None


class EdgeView(BaseModel):
    pair: list[str]
    weight: float
    shifted_weight: float
    n_judgments: int


class NodeView(BaseModel):
    id: str
    kind: str
    corpus: Optional[str] = None
    cluster: Optional[int] = None


class GraphView(BaseModel):
    schema_version: int = SCHEMA_VERSION
    word: str
    round: int
    nodes: list[NodeView]
    edges: list[EdgeView]


class ReassignIn(BaseModel):
    word: str
    pair: list[str]
    from_annotator: str
    to_annotator: str


class ReassignAck(BaseModel):
    schema_version: int = SCHEMA_VERSION
    word: str
    pair: list[str]
    from_annotator: str
    to_annotator: str
