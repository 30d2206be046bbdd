"""Natural-language frontend: tagging, phrase splitting, and predictors.

Everything here is deterministic and data-driven.  Part-of-speech tags
come from shipped closed-class word lists plus a verb lexicon with light
suffix stemming; atoms are predicted by TF-IDF cosine similarity over
character trigrams and word unigrams against a phrase lexicon; connective
words map to operators through a shipped word-vector table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from sklearn.feature_extraction.text import TfidfVectorizer
from sklearn.metrics.pairwise import linear_kernel

TAGS = ("VERB", "NOUN", "ADJ", "ADV", "CONJ", "PREP", "NUM", "OTHER")

VERBS = {
    "turn", "pick", "go", "open", "close", "shut", "charge", "recharge", "plug",
    "unplug", "sit", "stand", "rise", "rest", "walk", "hit", "run", "step",
    "reach", "grab", "take", "get", "fetch", "extinguish", "activate",
    "deactivate", "switch", "move", "put", "place", "drop", "set", "collect",
    "lift", "retrieve", "bring", "carry", "hold", "avoid", "touch", "enter",
    "douse", "ignite", "light", "kill", "visit", "head", "travel", "proceed",
    "snuff", "quench", "unlock", "swim", "wade", "climb", "crash", "bump",
    "stay", "keep", "steer", "refrain", "power", "flip", "scoop", "deposit",
    "leave", "settle", "seat", "disconnect", "stop", "start", "pull", "swing",
    "navigate", "come", "wander", "remain", "have", "blow",
}

ADVERBS = {
    "always", "never", "constantly", "forever", "perpetually", "continuously",
    "permanently", "eventually", "finally", "soon", "sometime", "quickly",
    "immediately", "promptly", "shortly", "fast", "then", "also",
    "additionally", "moreover", "alternatively", "otherwise", "instead",
}

CONJUNCTIONS = {"and", "or", "but", "before", "after", "until", "till"}

PREPOSITIONS = {
    "on", "up", "in", "into", "to", "at", "of", "off", "from", "onto",
    "toward", "towards", "near", "by", "with", "for", "out", "down", "away",
    "through", "upon", "inside", "within",
}

ADJECTIVES = {
    "purple", "green", "violet", "emerald", "red", "blue", "black", "white",
    "big", "small", "little",
}

NOUNS = {
    "lamp", "lamps", "light", "lights", "cube", "cubes", "box", "boxes",
    "block", "blocks", "fire", "flame", "flames", "door", "doors", "gate",
    "gates", "doorway", "key", "keys", "charger", "battery", "chair", "seat",
    "wall", "walls", "water", "location", "spot", "position", "room", "robot",
    "yourself", "self", "coordinates",
}

# Adverbs that carry negation onto the phrase they modify.
NEGATIVE_ADVERBS = {"never"}

ITEM_ALIASES = {
    "purple cube": "purpleCube",
    "violet cube": "purpleCube",
    "purple box": "purpleCube",
    "purple block": "purpleCube",
    "green cube": "greenCube",
    "emerald cube": "greenCube",
    "green box": "greenCube",
    "green block": "greenCube",
    "door key": "doorKey",
    "doorkey": "doorKey",
    "key": "doorKey",
    "cube": "purpleCube",
}


class LanguageError(Exception):
    pass


class NoVerbFound(LanguageError):
    """The utterance has no recognizable verb; ask for a paraphrase."""


@dataclass(frozen=True)
class TaggedToken:
    token: str
    tag: str

    def __post_init__(self):
        if not self.token:
            raise LanguageError("empty token")
        if self.tag not in TAGS:
            raise LanguageError(f"unknown tag {self.tag!r}")


@dataclass(frozen=True)
class Phrase:
    text: str
    negated_hint: bool = False


@dataclass(frozen=True)
class SplitResult:
    verb_phrases: tuple
    conjunctions: tuple
    adverbs: tuple


@dataclass(frozen=True)
class AtomPrediction:
    atom: str
    confidence: float
    negated: bool = False


def _stem_is_verb(token):
    if token in VERBS:
        return True
    for suffix in ("ing", "ed", "s"):
        if token.endswith(suffix) and len(token) > len(suffix) + 1:
            base = token[: -len(suffix)]
            if base in VERBS or base + "e" in VERBS:
                return True
            # doubled final consonant, e.g. sitting -> sit
            if len(base) >= 2 and base[-1] == base[-2] and base[:-1] in VERBS:
                return True
    return False


def tokenize(utterance: str):
    return re.findall(r"[a-z'_]+|\d+", utterance.lower())


def tag_tokens(utterance: str):
    """One tag per token, from the closed-class word lists."""
    if not utterance or not utterance.strip():
        raise LanguageError("empty utterance")
    tagged = []
    for token in tokenize(utterance):
        if token.isdigit():
            tag = "NUM"
        elif _stem_is_verb(token):
            tag = "VERB"
        elif token in ADVERBS:
            tag = "ADV"
        elif token in CONJUNCTIONS:
            tag = "CONJ"
        elif token in PREPOSITIONS:
            tag = "PREP"
        elif token in ADJECTIVES:
            tag = "ADJ"
        elif token in NOUNS:
            tag = "NOUN"
        else:
            tag = "OTHER"
        tagged.append(TaggedToken(token, tag))
    if not tagged:
        raise LanguageError("no tokens in utterance")
    return tagged


def split(tokens) -> SplitResult:
    """Divide a tagged utterance into verb phrases, conjunctions, adverbs.

    A verb opens a phrase; later verbs are absorbed into the current phrase
    until a conjunction closes it (handles auxiliaries and gerunds).  Tokens
    seen before a phrase opens (e.g. "don't") attach to the next phrase.
    Negative adverbs mark the following phrase as negated.
    """
    phrases = []
    conjunctions = []
    adverbs = []
    buffer = []
    current = None
    pending_negation = False

    def close():
        nonlocal current
        if current is not None:
            phrases.append(Phrase(" ".join(current[0]), current[1]))
            current = None

    for tok in tokens:
        if tok.tag == "ADV":
            adverbs.append(tok.token)
            if tok.token in NEGATIVE_ADVERBS:
                pending_negation = True
            continue
        if tok.tag == "CONJ":
            conjunctions.append(tok.token)
            close()
            continue
        if tok.tag == "VERB" and current is None:
            current = (buffer + [tok.token], pending_negation)
            buffer = []
            pending_negation = False
            continue
        if current is None:
            buffer.append(tok.token)
        else:
            current[0].append(tok.token)
    close()
    if not phrases:
        raise NoVerbFound("no verb phrase found; please rephrase the task")
    if buffer:
        # trailing tokens with no verb of their own stay with the last phrase
        last = phrases[-1]
        phrases[-1] = Phrase(last.text + " " + " ".join(buffer), last.negated_hint)
    return SplitResult(tuple(phrases), tuple(conjunctions), tuple(adverbs))


_STOPWORDS = {"the", "a", "an"}


def _analyzer(text):
    # Whole-word features are repeated so that an accidental rare-trigram
    # overlap cannot dominate the cosine for otherwise unrelated phrases.
    features = []
    for token in re.findall(r"[a-z']+|\d+", text.lower()):
        if token in _STOPWORDS:
            continue
        features.extend((token, token))
        padded = " " + token + " "
        features.extend(padded[i : i + 3] for i in range(len(padded) - 2))
    return features


class PhraseLexicon:
    """Phrase -> atom lexicon with a fitted TF-IDF index."""

    def __init__(self, entries):
        if not entries:
            raise LanguageError("empty lexicon")
        self.entries = [
            (" ".join(phrase.lower().split()), atom, bool(negated))
            for phrase, atom, negated in entries
        ]
        self._vectorizer = TfidfVectorizer(analyzer=_analyzer)
        self._matrix = self._vectorizer.fit_transform(e[0] for e in self.entries)

    def __len__(self):
        return len(self.entries)

    def atoms(self):
        return sorted({atom for _, atom, _ in self.entries})

    def score(self, phrase: str):
        """Cosine similarity against every entry, in entry order."""
        query = self._vectorizer.transform([" ".join(phrase.lower().split())])
        return linear_kernel(query, self._matrix)[0]


def predict_atom(phrase, lexicon: PhraseLexicon) -> AtomPrediction:
    """Most similar lexicon atom with its cosine confidence; ties broken
    by lexicographic atom name."""
    if isinstance(phrase, Phrase):
        text, hint = phrase.text, phrase.negated_hint
    else:
        text, hint = phrase, False
    scores = lexicon.score(text)
    best = max(scores)
    candidates = [
        lexicon.entries[i] for i, s in enumerate(scores) if s >= best - 1e-12
    ]
    _, atom, negated = min(candidates, key=lambda e: (e[1], e[0]))
    return AtomPrediction(atom, float(best), negated ^ hint)


def load_lexicon(path=None) -> PhraseLexicon:
    """Lexicon file: one tab-separated record per line: phrase, atom,
    negated flag (0/1)."""
    text = _read_data("lexicon.tsv") if path is None else open(path).read()
    return PhraseLexicon(_parse_lexicon_lines(text))


def load_holdout(path=None):
    text = _read_data("lexicon_holdout.tsv") if path is None else open(path).read()
    return _parse_lexicon_lines(text)


def _parse_lexicon_lines(text):
    entries = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise LanguageError(f"bad lexicon record: {line!r}")
        entries.append((parts[0], parts[1], parts[2] == "1"))
    return entries


def _read_data(name):
    return resources.files("stlworkbench.data").joinpath(name).read_text()


class WordVectors:
    """Token -> fixed-width vector table (plain text, line oriented)."""

    def __init__(self, table):
        self.table = dict(table)

    @classmethod
    def load(cls, path=None):
        text = _read_data("word_vectors.txt") if path is None else open(path).read()
        table = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            table[parts[0]] = tuple(float(v) for v in parts[1:])
        return cls(table)

    def get(self, word):
        return self.table.get(word)


def load_op_lexicon(path=None):
    """Operator lexicon: operator symbol followed by its words."""
    text = _read_data("op_lexicon.txt") if path is None else open(path).read()
    lex = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        lex[parts[0]] = tuple(parts[1:])
    return lex


def _cosine(u, v):
    dot = sum(a * b for a, b in zip(u, v))
    nu = sum(a * a for a in u) ** 0.5
    nv = sum(b * b for b in v) ** 0.5
    if nu == 0 or nv == 0:
        return 0.0
    return dot / (nu * nv)


def predict_operators(conjunctions, adverbs, op_lexicon, vectors: WordVectors):
    """Map each connective word to its most similar operator (mean word
    vector); F is always appended; result deduplicated, order-stable."""
    means = {}
    for op, words in op_lexicon.items():
        vecs = [vectors.get(w) for w in words if vectors.get(w) is not None]
        if vecs:
            dim = len(vecs[0])
            means[op] = tuple(sum(v[i] for v in vecs) / len(vecs) for i in range(dim))
    ops = []
    for word in list(conjunctions) + list(adverbs):
        vec = vectors.get(word)
        if vec is None:
            continue
        scored = [(op, _cosine(vec, mean)) for op, mean in means.items()]
        best_op, best = max(scored, key=lambda item: (item[1], item[0]))
        if best > 0:
            ops.append(best_op)
    ops.append("F")
    seen = []
    for op in ops:
        if op not in seen:
            seen.append(op)
    return seen


_COORD_RE = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")
_DURATION_RE = re.compile(r"(\d+)\s*(?:seconds?|secs?)\b")


def extract_parameters(task_nl: str, target) -> dict:
    """Pattern-based parameter discovery in the task text.

    ``target`` is an atom name (coordinates / item aliases) or the string
    "interval" (durations like "15 seconds").  Only bindings actually found
    are returned; absence triggers a clarification question upstream.
    """
    text = " ".join(task_nl.lower().split())
    found = {}
    if target == "interval":
        m = _DURATION_RE.search(text)
        if m:
            found["bound"] = int(m.group(1))
        return found
    if target == "robotAt":
        m = _COORD_RE.search(text)
        if m:
            found["x"], found["y"] = int(m.group(1)), int(m.group(2))
        return found
    if target in ("itemOnRobot", "itemAt"):
        for alias in sorted(ITEM_ALIASES, key=len, reverse=True):
            if alias in text:
                found["item"] = ITEM_ALIASES[alias]
                break
        if target == "itemAt":
            m = _COORD_RE.search(text)
            if m:
                found["x"], found["y"] = int(m.group(1)), int(m.group(2))
        return found
    return found


def evaluate_lexicon(held_out, lexicon: PhraseLexicon) -> float:
    """Fraction of held-out phrases whose predicted atom matches the label."""
    if not held_out:
        raise LanguageError("empty held-out set")
    hits = 0
    for phrase, atom, _negated in held_out:
        if predict_atom(phrase, lexicon).atom == atom:
            hits += 1
    return hits / len(held_out)
