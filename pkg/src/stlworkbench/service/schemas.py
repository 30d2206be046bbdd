"""Request/response models for the session service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class SessionCreated(BaseModel):
    id: str


class NlRequest(BaseModel):
    text: str = Field(min_length=1)


class NlResponse(BaseModel):
    enumerated: int
    pendingQuestions: int
    bounds: Optional[tuple[int, int]] = None


class QuestionOut(BaseModel):
    id: str
    kind: str
    prompt: str
    atoms: list[str] = []
    slot: Optional[str] = None


class AnswerRequest(BaseModel):
    questionId: str
    payload: Any = None


class AnswerResponse(BaseModel):
    accepted: bool
    pendingQuestions: int


class DemoRequest(BaseModel):
    actions: list[str] = Field(min_length=1)
    label: str = "positive"
    initial: dict[str, Any] = {}


class DemoResponse(BaseModel):
    length: int
    label: str
    trace: list[dict[str, Any]]


class CandidatesOut(BaseModel):
    enumerated: int
    templates: list[str]


class FormulaOut(BaseModel):
    status: str  # pending | selected | none
    formula: Optional[str] = None
    userInteractions: int = 0
    runtimeSeconds: float = 0.0


class TrainRequest(BaseModel):
    episodes: Optional[int] = None
    maxSteps: Optional[int] = None
    seed: Optional[int] = None


class TrainStatus(BaseModel):
    status: str  # idle | running | finished | cancelled | failed
    episode: int = 0
    episodes: int = 0
    error: Optional[str] = None


class PolicyOut(BaseModel):
    satisfied: bool
    actions: list[str]
    rollout: list[dict[str, Any]]
    tableSize: int
