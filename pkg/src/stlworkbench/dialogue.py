"""Clarification dialogue: question planning, the rule-based oracle, and
formula selection against labeled demonstrations.

A session moves through stages: NL splitting and atom/operator prediction
(possibly stalled on paraphrase requests), enumeration, clarification
questions (task order, atom parameters, operator parameters), and finally
selection of the first enumerated candidate that satisfies every positive
demonstration and refutes every negative one.  Sessions are deterministic:
identical inputs and answers always produce identical transcripts and
selections, which is also how persistence replays them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import language
from .formulas import (
    EnvAtom,
    Eventually,
    Always,
    Formula,
    Until,
    format_formula,
    satisfies,
)
from .synthesis import (
    AtomSpec,
    CausalDependency,
    KIND_INTERVAL,
    PSTLTemplate,
    compute_length_bounds,
    enumerate_pstl,
    instantiate,
    order_violation_trace,
    probe_formula,
    prune_causal,
)
from .world import ATOM_REGISTRY, demo_to_trace, prefixes_as_negatives

DEFAULT_EPSILON = 0.3
DEFAULT_PROBE_HORIZON = 3
DEFAULT_HORIZON_SECONDS = 1000

# Operators whose presence makes a task-order question meaningful.
ORDER_SENSITIVE_OPS = ("&", "U", "->")

PARAPHRASE, TASK_ORDER, ATOM_PARAM, OP_PARAM = (
    "paraphrase",
    "taskOrder",
    "atomParam",
    "opParam",
)


class DialogueError(Exception):
    pass


class OracleError(DialogueError):
    """The oracle cannot answer (atom or phrase missing from ground truth)."""


@dataclass(frozen=True)
class Question:
    qid: str
    kind: str
    prompt: str
    atom: str | None = None
    param: str | None = None
    slot: str | None = None
    atoms: tuple = ()
    phrase_index: int | None = None


@dataclass(frozen=True)
class Answer:
    question_id: str
    payload: object


@dataclass
class DialogueSession:
    task_nl: str = ""
    split_result: language.SplitResult | None = None
    predictions: list = field(default_factory=list)  # (Phrase, AtomPrediction)
    atom_specs: list = field(default_factory=list)
    ops: list = field(default_factory=list)
    bounds: tuple | None = None
    candidates: list = field(default_factory=list)
    survivors: list = field(default_factory=list)
    valuation: dict = field(default_factory=dict)
    demos_positive: list = field(default_factory=list)
    demos_negative: list = field(default_factory=list)
    pending: list = field(default_factory=list)  # unanswered Questions
    transcript: list = field(default_factory=list)  # (Question, Answer)
    prune_report: list = field(default_factory=list)
    selected: Formula | None = None
    selection_done: bool = False
    epsilon: float = DEFAULT_EPSILON
    metrics: dict = field(default_factory=lambda: {
        "enumeratedFormulas": 0,
        "userInteractions": 0,
        "runtimeSeconds": 0.0,
        "success": None,
    })
    _qcounter: int = 0

    def next_qid(self):
        self._qcounter += 1
        return f"q{self._qcounter}"


def _slot_sort_key(name):
    return (name[0], int(name[1:]))


def _interval_slot_union(candidates):
    slots = set()
    for template in candidates:
        for slot in template.slots:
            if slot.kind == KIND_INTERVAL:
                slots.add(slot.name)
    return sorted(slots, key=_slot_sort_key)


def _op_param_prompt(slot, occurrences):
    letter = slot[0]
    suffix = f" (occurrence {slot[1:]})" if occurrences > 1 else ""
    if letter == "G":
        return f"For how many seconds should the constraint be satisfied?{suffix}"
    if letter == "U":
        return f"Within how many seconds must the second part follow the first?{suffix}"
    return f"In how many seconds should the robot complete the task?{suffix}"


def _atom_param_prompt(atom, param):
    if param == "item":
        return f"Which item does '{atom}' refer to?"
    return f"What is the target {param} coordinate for '{atom}'?"


def plan_questions(session: DialogueSession):
    """Clarification questions for the current session state, ordered
    paraphrase, task order, atom parameters, operator parameters."""
    questions = []
    for index, (phrase, prediction) in enumerate(session.predictions):
        if prediction is None or prediction.confidence <= session.epsilon:
            # With no split there is no phrase/atom correspondence to lean
            # on, so the request covers the whole input (index None).
            questions.append(Question(
                qid=session.next_qid(),
                kind=PARAPHRASE,
                prompt=f"I did not understand '{phrase.text}'. Could you rephrase it?",
                phrase_index=index if session.split_result is not None else None,
            ))
    if questions:
        return questions  # atom set may change; plan the rest afterwards
    if len(session.atom_specs) >= 2 and any(op in session.ops for op in ORDER_SENSITIVE_OPS):
        names = [spec.name for spec in session.atom_specs]
        phrases = [p.text for p, _ in session.predictions]
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                questions.append(Question(
                    qid=session.next_qid(),
                    kind=TASK_ORDER,
                    prompt=(
                        f"Should '{phrases[i] if i < len(phrases) else names[i]}' be completed "
                        f"before '{phrases[j] if j < len(phrases) else names[j]}'? (yes/no)"
                    ),
                    atoms=(names[i], names[j]),
                ))
    for spec in session.atom_specs:
        for param, _kind in spec.params:
            slot = f"{spec.name}.{param}"
            if slot not in session.valuation:
                questions.append(Question(
                    qid=session.next_qid(),
                    kind=ATOM_PARAM,
                    prompt=_atom_param_prompt(spec.name, param),
                    atom=spec.name,
                    param=param,
                    slot=slot,
                ))
    interval_slots = _interval_slot_union(session.candidates)
    per_letter = {}
    for slot in interval_slots:
        per_letter[slot[0]] = per_letter.get(slot[0], 0) + 1
    for slot in interval_slots:
        if slot not in session.valuation:
            questions.append(Question(
                qid=session.next_qid(),
                kind=OP_PARAM,
                prompt=_op_param_prompt(slot, per_letter[slot[0]]),
                slot=slot,
            ))
    return questions


@dataclass
class OracleUser:
    """Rule-based answerer that knows the true formula.

    Paraphrase requests are answered with a canonical phrase per ground
    truth atom; parameter questions read values straight off the formula;
    ordering questions run the same bounded semantic check as pruning.
    """

    ground_truth: Formula
    canonical_phrases: dict  # (atom, negated) -> phrase
    probe_horizon: int = DEFAULT_PROBE_HORIZON

    @classmethod
    def for_formula(cls, ground_truth, lexicon=None, probe_horizon=DEFAULT_PROBE_HORIZON):
        lexicon = lexicon or language.load_lexicon()
        phrases = {}
        for phrase, atom, negated in lexicon.entries:
            phrases.setdefault((atom, negated), phrase)
        return cls(ground_truth, phrases, probe_horizon)

    def gt_atoms(self):
        """(name, negated) per atom leaf, in left-to-right order."""
        out = []

        def visit(phi, negations):
            if isinstance(phi, EnvAtom):
                out.append((phi.name, negations % 2 == 1))
                return
            from .formulas import Not
            if isinstance(phi, Not):
                visit(phi.child, negations + 1)
                return
            for child in phi.children():
                visit(child, negations)

        visit(self.ground_truth, 0)
        return out

    def gt_intervals(self, letter):
        nodes = []
        for node in self.ground_truth.walk():
            if letter == "F" and isinstance(node, Eventually):
                nodes.append(node.interval.hi)
            elif letter == "G" and isinstance(node, Always):
                nodes.append(node.interval.hi)
            elif letter == "U" and isinstance(node, Until):
                nodes.append(node.interval.hi)
        return nodes

    def answer(self, question: Question) -> Answer:
        if question.kind == TASK_ORDER:
            first, second = question.atoms
            names = {name for name, _ in self.gt_atoms()}
            if first not in names or second not in names:
                raise OracleError(f"ground truth does not mention {first}/{second}")
            probe = probe_formula(self.ground_truth)
            witness = order_violation_trace(probe, first, second, self.probe_horizon)
            return Answer(question.qid, witness is None)
        if question.kind == ATOM_PARAM:
            for node in self.ground_truth.walk():
                if isinstance(node, EnvAtom) and node.name == question.atom:
                    schema = ATOM_REGISTRY.get(node.name, ())
                    for (param, _kind), value in zip(schema, node.args):
                        if param == question.param:
                            return Answer(question.qid, value)
            raise OracleError(f"ground truth has no parameter {question.atom}.{question.param}")
        if question.kind == OP_PARAM:
            letter, index = question.slot[0], int(question.slot[1:])
            values = self.gt_intervals(letter)
            if values:
                value = values[index - 1] if index <= len(values) else values[-1]
                return Answer(question.qid, int(value))
            bounds = [n for let in "FGU" for n in self.gt_intervals(let)]
            fallback = max(bounds) if bounds else DEFAULT_HORIZON_SECONDS
            return Answer(question.qid, int(fallback))
        if question.kind == PARAPHRASE:
            atoms = self.gt_atoms()
            if question.phrase_index is None or question.phrase_index >= len(atoms):
                raise OracleError("cannot paraphrase input with no matching ground-truth atom")
            key = atoms[question.phrase_index]
            if key not in self.canonical_phrases:
                raise OracleError(f"no canonical phrase for {key}")
            return Answer(question.qid, self.canonical_phrases[key])
        raise DialogueError(f"unknown question kind {question.kind}")

    def label(self, trace) -> bool:
        """Categorize an unlabeled demonstration trace against ground truth."""
        return satisfies(self.ground_truth, trace, 0)


def oracle_answer(question: Question, oracle: OracleUser) -> Answer:
    return oracle.answer(question)


def select_best_stl(candidates, valuation, pos_traces, neg_traces):
    """First candidate (enumeration order) whose instantiation satisfies all
    positive traces and fails all negative traces at t=0; None otherwise."""
    if not pos_traces:
        raise DialogueError("at least one positive demonstration is required")
    for template in candidates:
        try:
            bindings = {slot.name: valuation[slot.name] for slot in template.slots}
        except KeyError:
            continue
        phi = instantiate(template, bindings)
        if all(satisfies(phi, tr, 0) for tr in pos_traces) and not any(
            satisfies(phi, tr, 0) for tr in neg_traces
        ):
            return phi
    return None


class SessionEngine:
    """Drives a DialogueSession through prediction, clarification, and
    selection; shared by the CLI, the experiment harness, and the service."""

    def __init__(self, grid, lexicon=None, op_lexicon=None, vectors=None,
                 epsilon=DEFAULT_EPSILON, probe_horizon=DEFAULT_PROBE_HORIZON):
        self.grid = grid
        self.lexicon = lexicon or language.load_lexicon()
        self.op_lexicon = op_lexicon or language.load_op_lexicon()
        self.vectors = vectors or language.WordVectors.load()
        self.epsilon = epsilon
        self.probe_horizon = probe_horizon

    def new_session(self) -> DialogueSession:
        session = DialogueSession()
        session.epsilon = self.epsilon
        return session

    def submit_nl(self, session: DialogueSession, text: str):
        started = time.perf_counter()
        session.task_nl = text
        # a fresh task description restarts the synthesis state
        session.valuation = {}
        session.candidates = []
        session.survivors = []
        session.prune_report = []
        session.selected = None
        session.selection_done = False
        try:
            tokens = language.tag_tokens(text)
            session.split_result = language.split(tokens)
        except language.LanguageError:
            session.split_result = None
            phrase = language.Phrase(" ".join(text.split()) or text)
            session.predictions = [(phrase, None)]
            session.pending = plan_questions(session)
            self._clock(session, started)
            return
        session.predictions = [
            (phrase, language.predict_atom(phrase, self.lexicon))
            for phrase in session.split_result.verb_phrases
        ]
        self._after_prediction(session)
        self._clock(session, started)

    def _after_prediction(self, session):
        low = [p for _, p in session.predictions if p is None or p.confidence <= self.epsilon]
        if low:
            session.pending = plan_questions(session)
            return
        self._enumerate(session)
        session.pending = plan_questions(session)
        self._extract_parameters(session)
        session.pending = [q for q in session.pending if q.slot not in session.valuation]

    def _enumerate(self, session):
        split_result = session.split_result
        session.atom_specs = [
            AtomSpec(p.atom, ATOM_REGISTRY.get(p.atom, ()), p.negated)
            for _, p in session.predictions
        ]
        session.ops = language.predict_operators(
            split_result.conjunctions, split_result.adverbs, self.op_lexicon, self.vectors
        )
        bounds = compute_length_bounds(
            len(split_result.verb_phrases),
            len(split_result.conjunctions),
            len(split_result.adverbs),
        )
        session.bounds = (bounds.l, bounds.u)
        session.candidates = list(enumerate_pstl(session.atom_specs, session.ops, bounds))
        session.survivors = list(session.candidates)
        session.metrics["enumeratedFormulas"] = len(session.candidates)

    def _extract_parameters(self, session):
        for spec in session.atom_specs:
            if not spec.params:
                continue
            found = language.extract_parameters(session.task_nl, spec.name)
            for param, value in found.items():
                session.valuation[f"{spec.name}.{param}"] = value
        duration = language.extract_parameters(session.task_nl, "interval")
        if duration:
            for slot in _interval_slot_union(session.candidates):
                if slot not in session.valuation:
                    session.valuation[slot] = duration["bound"]
                    break

    def submit_answer(self, session: DialogueSession, answer: Answer):
        started = time.perf_counter()
        question = next((q for q in session.pending if q.qid == answer.question_id), None)
        if question is None:
            raise DialogueError(f"question {answer.question_id!r} is not pending")
        _check_payload(question, answer.payload)
        session.pending = [q for q in session.pending if q.qid != answer.question_id]
        session.transcript.append((question, answer))
        session.metrics["userInteractions"] = len(session.transcript)
        if question.kind == PARAPHRASE:
            self._apply_paraphrase(session, question, answer)
        elif question.kind == TASK_ORDER:
            if answer.payload is True:
                dep = CausalDependency(question.atoms[0], question.atoms[1])
                result = prune_causal(session.survivors, dep, self.probe_horizon)
                session.survivors = list(result.survivors)
                session.prune_report = result.report_lines(dep)
        elif question.kind in (ATOM_PARAM, OP_PARAM):
            if answer.payload is not None:
                session.valuation[question.slot] = answer.payload
        self._clock(session, started)

    def _apply_paraphrase(self, session, question, answer):
        if answer.payload is None:
            return
        index = question.phrase_index
        if session.split_result is None:
            # No-verb input: restart splitting from the replacement text.
            self.submit_nl(session, str(answer.payload))
            return
        phrase = language.Phrase(" ".join(str(answer.payload).lower().split()))
        prediction = language.predict_atom(phrase, self.lexicon)
        session.predictions[index] = (phrase, prediction)
        if all(
            p is not None and p.confidence > self.epsilon for _, p in session.predictions
        ):
            self._enumerate(session)
            remaining = plan_questions(session)
            self._extract_parameters(session)
            session.pending.extend(
                q for q in remaining if q.slot not in session.valuation
            )

    def add_demo(self, session: DialogueSession, demo):
        if demo.label == "negative":
            session.demos_negative.append(demo)
        else:
            session.demos_positive.append(demo)

    def ready_for_selection(self, session: DialogueSession) -> bool:
        return (
            not session.pending
            and session.split_result is not None
            and bool(session.demos_positive)
            and bool(session.candidates)
        )

    def try_select(self, session: DialogueSession):
        started = time.perf_counter()
        if session.selection_done or not self.ready_for_selection(session):
            self._clock(session, started)
            return session.selected
        pos_traces = [demo_to_trace(d, self.grid) for d in session.demos_positive]
        negatives = list(session.demos_negative)
        if "G" not in session.ops:
            # Constraint-style tasks have no completion point; prefixes of a
            # compliant demo still comply, so they are only generated for
            # goal-style tasks.
            for demo in session.demos_positive:
                negatives.extend(prefixes_as_negatives(demo))
        neg_traces = [demo_to_trace(d, self.grid) for d in negatives]
        session.selected = select_best_stl(
            session.survivors, session.valuation, pos_traces, neg_traces
        )
        session.selection_done = True
        self._clock(session, started)
        return session.selected

    def _clock(self, session, started):
        session.metrics["runtimeSeconds"] += time.perf_counter() - started


def _check_payload(question, payload):
    if payload is None:
        return
    expected = {
        TASK_ORDER: bool,
        OP_PARAM: int,
        PARAPHRASE: str,
    }
    if question.kind in expected and not isinstance(payload, expected[question.kind]):
        raise DialogueError(
            f"{question.kind} answer needs {expected[question.kind].__name__}, got {payload!r}"
        )
    if question.kind == ATOM_PARAM and not isinstance(payload, (int, str)):
        raise DialogueError(f"atom parameter answer must be a value, got {payload!r}")


def run_pipeline(task_nl, demos, answerer, grid, engine=None):
    """End-to-end: split, predict, enumerate, clarify, and select.

    ``answerer`` maps a Question to an Answer (an OracleUser or any
    callable-compatible object with ``.answer``); when it cannot answer, the
    question is recorded with a null payload and the session proceeds.
    Returns (formula or None, session).
    """
    engine = engine or SessionEngine(grid)
    session = engine.new_session()
    for demo in demos:
        engine.add_demo(session, demo)
    engine.submit_nl(session, task_nl)
    guard = 0
    while session.pending and guard < 100:
        guard += 1
        question = session.pending[0]
        try:
            answer = answerer.answer(question)
        except OracleError:
            answer = Answer(question.qid, None)
        engine.submit_answer(session, answer)
    selected = engine.try_select(session)
    if isinstance(answerer, OracleUser):
        session.metrics["success"] = (
            selected is not None and selected == answerer.ground_truth
        )
    return selected, session
