"""Session-oriented HTTP/JSON service backing the web UI.

Per-session operations are serialized through a per-session lock; training
runs on a background thread off the request path and is cancellable
between episodes.  Sessions persist as replayable event documents, so a
restarted service reloads any session by id.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException

from .. import qlearning
from ..dialogue import Answer, SessionEngine
from ..formulas import format_formula
from ..store import SessionStore
from ..world import WorldError, default_grid, initial_state, replay, state_record
from .schemas import (
    AnswerRequest,
    AnswerResponse,
    CandidatesOut,
    DemoRequest,
    DemoResponse,
    FormulaOut,
    NlRequest,
    NlResponse,
    PolicyOut,
    QuestionOut,
    SessionCreated,
    TrainRequest,
    TrainStatus,
)


class TrainingJob:
    def __init__(self):
        self.status = "idle"
        self.episode = 0
        self.episodes = 0
        self.error = None
        self.cancelled = False
        self.policy = None
        self.result = None
        self.thread = None


class LiveSession:
    def __init__(self, session):
        self.session = session
        self.lock = threading.Lock()
        self.demo_events = []
        self.answer_events = []
        self.job = TrainingJob()


def create_app(data_dir=None, grid=None) -> FastAPI:
    app = FastAPI(title="stl-workbench", version="0.1.0")
    app.state.grid = grid or default_grid()
    app.state.engine = SessionEngine(app.state.grid)
    app.state.store = SessionStore(data_dir)
    app.state.sessions = {}
    app.state.registry_lock = threading.Lock()

    engine: SessionEngine = app.state.engine
    store: SessionStore = app.state.store

    def persist(session_id, live):
        document = {
            "id": session_id,
            "version": getattr(live, "version", 0),
            "nl": live.session.task_nl,
            "demos": live.demo_events,
            "answers": live.answer_events,
            "training": {
                "status": live.job.status,
                "result": live.job.result,
            },
        }
        live.version = store.save(session_id, document)

    def restore(session_id):
        document = store.load(session_id)
        live = LiveSession(engine.new_session())
        live.version = document.get("version", 0)
        for event in document.get("demos", []):
            demo = _replay_demo(event)
            engine.add_demo(live.session, demo)
            live.demo_events.append(event)
        if document.get("nl"):
            engine.submit_nl(live.session, document["nl"])
        for event in document.get("answers", []):
            engine.submit_answer(live.session, Answer(event["questionId"], event["payload"]))
            live.answer_events.append(event)
        engine.try_select(live.session)
        training = document.get("training") or {}
        if training.get("status") == "finished" and training.get("result"):
            live.job.status = "finished"
            live.job.result = training["result"]
        return live

    def get_live(session_id) -> LiveSession:
        with app.state.registry_lock:
            live = app.state.sessions.get(session_id)
            if live is None:
                if not store.exists(session_id):
                    raise HTTPException(404, f"unknown session {session_id!r}")
                live = restore(session_id)
                app.state.sessions[session_id] = live
            return live

    def _replay_demo(event):
        try:
            start = initial_state(app.state.grid, event.get("initial") or None)
            return replay(start, event["actions"], app.state.grid, event.get("label", "positive"))
        except WorldError as exc:
            raise HTTPException(422, str(exc)) from None

    @app.post("/sessions", response_model=SessionCreated)
    def create_session():
        session_id = store.new_id()
        live = LiveSession(engine.new_session())
        with app.state.registry_lock:
            app.state.sessions[session_id] = live
        persist(session_id, live)
        return SessionCreated(id=session_id)

    @app.post("/sessions/{session_id}/nl", response_model=NlResponse)
    def submit_nl(session_id: str, body: NlRequest):
        live = get_live(session_id)
        with live.lock:
            engine.submit_nl(live.session, body.text)
            engine.try_select(live.session)
            persist(session_id, live)
            return NlResponse(
                enumerated=live.session.metrics["enumeratedFormulas"],
                pendingQuestions=len(live.session.pending),
                bounds=live.session.bounds,
            )

    @app.get("/sessions/{session_id}/questions", response_model=list[QuestionOut])
    def list_questions(session_id: str):
        live = get_live(session_id)
        with live.lock:
            return [
                QuestionOut(id=q.qid, kind=q.kind, prompt=q.prompt,
                            atoms=list(q.atoms), slot=q.slot)
                for q in live.session.pending
            ]

    @app.post("/sessions/{session_id}/answers", response_model=AnswerResponse)
    def submit_answer(session_id: str, body: AnswerRequest):
        live = get_live(session_id)
        with live.lock:
            pending_ids = {q.qid for q in live.session.pending}
            if body.questionId not in pending_ids:
                raise HTTPException(409, f"question {body.questionId!r} is not pending")
            payload = body.payload
            question = next(q for q in live.session.pending if q.qid == body.questionId)
            payload = _coerce_payload(question.kind, payload)
            engine.submit_answer(live.session, Answer(body.questionId, payload))
            live.answer_events.append({"questionId": body.questionId, "payload": payload})
            engine.try_select(live.session)
            persist(session_id, live)
            return AnswerResponse(accepted=True, pendingQuestions=len(live.session.pending))

    @app.post("/sessions/{session_id}/demos", response_model=DemoResponse)
    def upload_demo(session_id: str, body: DemoRequest):
        live = get_live(session_id)
        with live.lock:
            event = {"actions": body.actions, "label": body.label, "initial": body.initial}
            demo = _replay_demo(event)
            engine.add_demo(live.session, demo)
            live.demo_events.append(event)
            engine.try_select(live.session)
            persist(session_id, live)
            trace = [state_record(s, app.state.grid) for s, _ in demo.steps]
            return DemoResponse(length=len(demo), label=demo.label, trace=trace)

    @app.get("/sessions/{session_id}/candidates", response_model=CandidatesOut)
    def list_candidates(session_id: str):
        live = get_live(session_id)
        with live.lock:
            return CandidatesOut(
                enumerated=live.session.metrics["enumeratedFormulas"],
                templates=[t.canonical for t in live.session.survivors],
            )

    @app.get("/sessions/{session_id}/formula", response_model=FormulaOut)
    def get_formula(session_id: str):
        live = get_live(session_id)
        with live.lock:
            engine.try_select(live.session)
            session = live.session
            if session.selection_done:
                status = "selected" if session.selected is not None else "none"
            else:
                status = "pending"
            return FormulaOut(
                status=status,
                formula=format_formula(session.selected) if session.selected else None,
                userInteractions=session.metrics["userInteractions"],
                runtimeSeconds=session.metrics["runtimeSeconds"],
            )

    @app.post("/sessions/{session_id}/train", response_model=TrainStatus, status_code=202)
    def start_training(session_id: str, body: TrainRequest):
        live = get_live(session_id)
        with live.lock:
            if live.job.status == "running":
                raise HTTPException(409, "training already running")
            if live.session.selected is None:
                raise HTTPException(409, "no formula selected yet")
            overrides = {}
            if body.episodes is not None:
                overrides["episodes"] = body.episodes
            if body.maxSteps is not None:
                overrides["max_steps"] = body.maxSteps
            if body.seed is not None:
                overrides["seed"] = body.seed
            hp = qlearning.Hyperparams(**overrides)
            job = TrainingJob()
            job.status = "running"
            job.episodes = hp.episodes
            live.job = job
            phi = live.session.selected

            def progress(episode):
                job.episode = episode
                return not job.cancelled

            def run():
                try:
                    policy, curve = qlearning.train(
                        app.state.grid, initial_state(app.state.grid), phi, hp, progress
                    )
                    sat, trace, actions = qlearning.evaluate(
                        policy, app.state.grid, initial_state(app.state.grid), phi, hp.max_steps
                    )
                    job.policy = policy
                    job.result = {
                        "satisfied": sat,
                        "actions": list(actions),
                        "rollout": list(trace.records),
                        "tableSize": len(policy),
                    }
                    job.status = "cancelled" if job.cancelled else "finished"
                except Exception as exc:  # surfaced through /train/status
                    job.status = "failed"
                    job.error = str(exc)
                with live.lock:
                    persist(session_id, live)

            job.thread = threading.Thread(target=run, daemon=True)
            job.thread.start()
            return TrainStatus(status=job.status, episode=0, episodes=job.episodes)

    @app.get("/sessions/{session_id}/train/status", response_model=TrainStatus)
    def training_status(session_id: str):
        live = get_live(session_id)
        job = live.job
        return TrainStatus(status=job.status, episode=job.episode,
                           episodes=job.episodes, error=job.error)

    @app.delete("/sessions/{session_id}/train", response_model=TrainStatus)
    def cancel_training(session_id: str):
        live = get_live(session_id)
        job = live.job
        if job.status == "running":
            job.cancelled = True
            if job.thread is not None:
                job.thread.join(timeout=30)
        return TrainStatus(status=job.status, episode=job.episode,
                           episodes=job.episodes, error=job.error)

    @app.get("/sessions/{session_id}/policy", response_model=PolicyOut)
    def get_policy(session_id: str):
        live = get_live(session_id)
        job = live.job
        if job.result is None:
            raise HTTPException(404, "no trained policy for this session")
        return PolicyOut(
            satisfied=job.result["satisfied"],
            actions=job.result["actions"],
            rollout=job.result["rollout"],
            tableSize=job.result.get("tableSize", 0),
        )

    @app.get("/world")
    def get_world():
        return app.state.grid.to_dict()

    return app


def _coerce_payload(kind, payload):
    # JSON cannot distinguish "15" typed in a box from 15; normalize here.
    if kind in ("opParam", "atomParam") and isinstance(payload, str):
        stripped = payload.strip()
        if stripped.lstrip("-").isdigit():
            return int(stripped)
    if kind == "taskOrder" and isinstance(payload, str):
        return payload.strip().lower() in ("yes", "y", "true", "1")
    return payload
