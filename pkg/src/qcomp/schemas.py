"""Wire formats for maps, ensembles, experiments, POVMs and reports.

Every complex scalar travels as a two-element [re, im] array so the
JSON files are language neutral; matrices are nested lists of those
pairs. The same pydantic models back the JSON files read and written
by the command line tool and the request/response bodies of the HTTP
service, so a file produced by `gen` can be posted verbatim.
"""

from __future__ import annotations

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .discrimination import Ensemble, Povm
from .errors import ValidationError
from .experiments import Experiment
from .maps import HermitianMap

Pair = tuple[float, float]
Matrix = list[list[Pair]]


def matrix_to_wire(M: np.ndarray) -> Matrix:
    A = np.asarray(M, dtype=complex)
    return [[(float(z.real), float(z.imag)) for z in row] for row in A]


def matrix_from_wire(M: Any) -> np.ndarray:
    try:
        A = np.asarray(M, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix payload: {exc}") from None
    if A.ndim != 3 or A.shape[2] != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(
            f"matrix payload must be square with [re, im] entries, got shape {A.shape}"
        )
    return A[..., 0] + 1j * A[..., 1]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MapRecord(StrictModel):
    """Hermitian-preserving map as its Choi matrix on out (x) in."""

    d_in: int = Field(ge=1)
    d_out: int = Field(ge=1)
    choi: Matrix

    @classmethod
    def from_map(cls, phi: HermitianMap) -> "MapRecord":
        return cls(d_in=phi.d_in, d_out=phi.d_out, choi=matrix_to_wire(phi.choi))

    def to_map(self) -> HermitianMap:
        return HermitianMap(self.d_in, self.d_out, matrix_from_wire(self.choi))


class EnsembleItem(StrictModel):
    weight: float = Field(gt=0)
    state: Matrix


class EnsembleRecord(StrictModel):
    dim: int = Field(ge=1)
    items: list[EnsembleItem] = Field(min_length=1)

    @classmethod
    def from_ensemble(cls, E: Ensemble) -> "EnsembleRecord":
        return cls(
            dim=E.dim,
            items=[
                EnsembleItem(weight=w, state=matrix_to_wire(s))
                for w, s in zip(E.weights, E.states)
            ],
        )

    def to_ensemble(self) -> Ensemble:
        states = [matrix_from_wire(it.state) for it in self.items]
        for s in states:
            if s.shape != (self.dim, self.dim):
                raise ValidationError(
                    f"ensemble state has shape {s.shape}, expected ({self.dim}, {self.dim})"
                )
        return Ensemble(tuple(it.weight for it in self.items), tuple(states))


class ExperimentRecord(StrictModel):
    dim: int = Field(ge=1)
    labels: list[str] = Field(min_length=1)
    states: dict[str, Matrix]

    @classmethod
    def from_experiment(cls, T: Experiment) -> "ExperimentRecord":
        return cls(
            dim=T.dim,
            labels=list(T.labels),
            states={lbl: matrix_to_wire(s) for lbl, s in zip(T.labels, T.states)},
        )

    def to_experiment(self) -> Experiment:
        missing = [lbl for lbl in self.labels if lbl not in self.states]
        if missing:
            raise ValidationError(f"labels without states: {missing}")
        states = []
        for lbl in self.labels:
            s = matrix_from_wire(self.states[lbl])
            if s.shape != (self.dim, self.dim):
                raise ValidationError(
                    f"state {lbl!r} has shape {s.shape}, expected ({self.dim}, {self.dim})"
                )
            states.append(s)
        return Experiment(tuple(self.labels), tuple(states))


class PovmRecord(StrictModel):
    dim: int = Field(ge=1)
    elements: list[Matrix] = Field(min_length=1)

    @classmethod
    def from_povm(cls, M: Povm) -> "PovmRecord":
        return cls(dim=M.dim, elements=[matrix_to_wire(e) for e in M.elements])

    def to_povm(self) -> Povm:
        elements = [matrix_from_wire(e) for e in self.elements]
        for e in elements:
            if e.shape != (self.dim, self.dim):
                raise ValidationError(
                    f"POVM element has shape {e.shape}, expected ({self.dim}, {self.dim})"
                )
        return Povm(tuple(elements))


class Certificate(StrictModel):
    """Recomputed optimality evidence for one solved program."""

    status: str
    blocks: list[int]
    m: int
    iterations: int
    primal_infeas: float
    dual_infeas: float
    rel_gap: float
    wall_time: float


class Report(StrictModel):
    """Envelope for every command result."""

    command: str
    inputs: dict[str, Any]
    value: float | None = None
    values: dict[str, Any] | None = None
    certificates: list[Certificate] = Field(default_factory=list)
    residuals: dict[str, Any] | None = None
    wall_time: float

    @field_validator("wall_time")
    @classmethod
    def _nonneg(cls, v: float) -> float:
        if v < 0:
            raise ValueError("wall_time must be nonnegative")
        return v


class ErrorBody(StrictModel):
    error: str
    kind: str
    details: dict[str, Any] = Field(default_factory=dict)


class DiamondRequest(StrictModel):
    map: MapRecord
    tol: float | None = None


class DualRequest(StrictModel):
    map: MapRecord
    tol: float | None = None


class PsuccRequest(StrictModel):
    ensemble: EnsembleRecord
    tol: float | None = None


class PsuccResponse(Report):
    povm: PovmRecord | None = None


class EnsembleFromMapRequest(StrictModel):
    map: MapRecord


class EnsembleFromMapResponse(Report):
    ensemble: EnsembleRecord | None = None


class PairRequest(StrictModel):
    phi: MapRecord
    psi: MapRecord
    tol: float | None = None


class DeficiencyResponse(Report):
    postprocessing: MapRecord | None = None
    witness: MapRecord | None = None


class ExpDeficiencyRequest(StrictModel):
    s: ExperimentRecord
    t: ExperimentRecord
    tol: float | None = None


class ExpDeficiencyResponse(Report):
    randomization: MapRecord | None = None


class VerifyRequest(StrictModel):
    suite: str
    trials: int | None = Field(default=None, ge=1)
    seed: int = 0
    tol: float | None = None


class VerifyBody(VerifyRequest):
    phi: MapRecord | None = None
    psi: MapRecord | None = None


class GenRequest(StrictModel):
    kind: str
    seed: int = 0
    d_in: int = Field(default=2, ge=1)
    d_out: int = Field(default=2, ge=1)
    n: int = Field(default=2, ge=1)
