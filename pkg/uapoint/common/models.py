"""Common data models using pydantic."""

import math
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

Vec3 = Tuple[float, float, float]


class Domain(str, Enum):
    """Domain tags used in manifests and reports."""

    SOURCE = "source"
    TARGET = "target"


class OcclusionPlane(BaseModel):
    """Half-space occluder: points with ``normal · p < offset`` are removed."""

    normal: Vec3 = (0.0, 0.0, 1.0)
    offset: float = 0.0

    @field_validator("normal")
    @classmethod
    def nonzero_normal(cls, v: Vec3) -> Vec3:
        """Reject a zero normal."""
        if math.sqrt(sum(c * c for c in v)) == 0.0:
            raise ValueError("occlusion normal must be nonzero")
        return v


class ShiftSpec(BaseModel):
    """Synthetic domain shift applied to target samples."""

    rotation_axis: Vec3 = (0.0, 0.0, 1.0)
    rotation_angle: float = Field(default=0.0, ge=0.0, le=2.0 * math.pi)
    jitter_sigma: float = Field(default=0.0, ge=0.0)
    dropout_ratio: float = Field(default=0.0, ge=0.0, lt=1.0)
    occlusion: Optional[OcclusionPlane] = None

    @field_validator("rotation_axis")
    @classmethod
    def nonzero_axis(cls, v: Vec3) -> Vec3:
        """Reject a zero rotation axis."""
        if math.sqrt(sum(c * c for c in v)) == 0.0:
            raise ValueError("rotation axis must be nonzero")
        return v

    @property
    def is_identity(self) -> bool:
        """Whether the shift leaves every sample untouched."""
        return (
            self.rotation_angle == 0.0
            and self.jitter_sigma == 0.0
            and self.dropout_ratio == 0.0
            and self.occlusion is None
        )


class Camera(BaseModel):
    """Pinhole camera looking at the origin."""

    position: Vec3
    look_at: Vec3 = (0.0, 0.0, 0.0)
    up: Vec3 = (0.0, 0.0, 1.0)
    vertical_fov: float = Field(default=math.radians(60.0), gt=0.0, lt=math.pi)
    height: int = Field(default=32, ge=8)
    width: int = Field(default=32, ge=8)

    @model_validator(mode="after")
    def check_geometry(self) -> "Camera":
        """Position must differ from look_at and up must not be parallel to the view axis."""
        forward = [t - p for p, t in zip(self.position, self.look_at)]
        norm = math.sqrt(sum(c * c for c in forward))
        if norm == 0.0:
            raise ValueError("camera position equals look_at")
        cross = (
            forward[1] * self.up[2] - forward[2] * self.up[1],
            forward[2] * self.up[0] - forward[0] * self.up[2],
            forward[0] * self.up[1] - forward[1] * self.up[0],
        )
        if math.sqrt(sum(c * c for c in cross)) < 1e-12:
            raise ValueError("camera up vector is parallel to the viewing direction")
        return self


class ManifestEntry(BaseModel):
    """One sample listed in a dataset manifest."""

    path: str
    domain: Domain
    label: Optional[int] = None
    hidden_label: Optional[int] = None


class Manifest(BaseModel):
    """Dataset manifest written by ``synth`` and read by every other command."""

    classes: List[str]
    seed: Optional[int] = None
    points_per_sample: Optional[int] = None
    shift: Optional[ShiftSpec] = None
    samples: List[ManifestEntry]


class LossTerms(BaseModel):
    """Epoch means of every term of the composite objective."""

    ce: float = 0.0
    ortho: float = 0.0
    proto: Optional[float] = None
    ot: float = 0.0
    conf: float = 0.0
    total: float = 0.0


class GapReport(BaseModel):
    """Domain-gap metrics and the terms of the surrogate target-risk bound."""

    mmd: float = Field(ge=0.0)
    frechet: float = Field(ge=0.0)
    bound_source_risk: float
    bound_ot_term: float
    bound_proto_term: float
    bound_total: float
    beta: float
    proto_term_valid: bool = True

    @model_validator(mode="after")
    def check_total(self) -> "GapReport":
        """bound_total must equal its three weighted parts and everything must be finite."""
        values = [
            self.mmd,
            self.frechet,
            self.bound_source_risk,
            self.bound_ot_term,
            self.bound_proto_term,
            self.bound_total,
            self.beta,
        ]
        if not all(math.isfinite(v) for v in values):
            raise ValueError("gap report contains non-finite values")
        expected = self.bound_source_risk + 0.5 * self.bound_ot_term + self.beta * self.bound_proto_term
        if abs(expected - self.bound_total) > 1e-9 * max(1.0, abs(expected)):
            raise ValueError("bound_total does not match its terms")
        return self


class EvalSnapshot(BaseModel):
    """Accuracies and domain-gap report of a model at one point in time."""

    source_accuracy: float
    target_accuracy: Optional[float] = None
    gap: GapReport


class EpochRecord(BaseModel):
    """Per-epoch training record, one JSON line in the report."""

    epoch: int = Field(ge=1)
    losses: LossTerms
    source_accuracy: float
    target_accuracy: Optional[float] = None
    mmd: float
    frechet: float
    bound: GapReport
    skipped_batches: int = 0


class TrainReport(BaseModel):
    """Complete training report."""

    epochs: List[EpochRecord] = Field(default_factory=list)
    initial: Optional[EvalSnapshot] = None
    checkpoint_path: Optional[str] = None
    target_label_reads: int = 0

    @field_validator("epochs")
    @classmethod
    def monotone_epochs(cls, v: List[EpochRecord]) -> List[EpochRecord]:
        """Epoch indices must increase by one."""
        for i, record in enumerate(v, start=1):
            if record.epoch != i:
                raise ValueError("epoch records must be numbered 1..n")
        return v
