"""Deterministic synthetic multi-speaker corpus with an exact inverse decoder.

Every token k has a fixed sinusoid prototype vector; a speaker renders token
k as dur(s,k) copies of gain_s * p_k + bias_s. The decoder inverts the
speaker transform and nearest-neighbour matches prototypes, advancing by the
decoded token's duration, so clean rendered frames decode back to the exact
token sequence. Transcript corruption (insert/delete/replace with per-char
probability) and Levenshtein CER complete the evaluation loop; the decoder
plus CER stand in for an ASR-based transcription check.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace

import numpy as np

from ttslab import kernels
from ttslab.errors import ContractError

DEFAULT_VOCAB_SIZE = 40
DEFAULT_ACOUSTIC_DIM = 16

INSERTION, DELETION, REPLACEMENT = 0, 1, 2


# ---------------------------------------------------------------------------
# rendering rules
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def prototype_table(vocab_size: int, acoustic_dim: int) -> np.ndarray:
    """Prototype matrix [V, d_a]; row k is sin(0.7*(k+1)*(j+1))."""
    k = np.arange(vocab_size, dtype=np.float64)[:, None]
    j = np.arange(acoustic_dim, dtype=np.float64)[None, :]
    table = np.sin(0.7 * (k + 1.0) * (j + 1.0))
    table.setflags(write=False)
    return table


def token_prototype(k: int, acoustic_dim: int = DEFAULT_ACOUSTIC_DIM) -> np.ndarray:
    j = np.arange(acoustic_dim, dtype=np.float64)
    return np.sin(0.7 * (k + 1.0) * (j + 1.0))


def speaker_transform(s: int, acoustic_dim: int = DEFAULT_ACOUSTIC_DIM):
    """Per-speaker timbre: gain in [0.75, 1.25] (never zero) and bias."""
    j = np.arange(acoustic_dim, dtype=np.float64)
    gain = 1.0 + 0.25 * np.sin(s + j)
    bias = 0.3 * np.cos(s * (j + 1.0))
    return gain, bias


def duration_rule(s: int, k: int) -> int:
    """Per-speaker rhythm: dur in {1, 2, 3}."""
    return 1 + (k + 2 * s) % 3


def durations_for(s: int, tokens) -> np.ndarray:
    tokens = np.asarray(tokens, dtype=np.int64)
    return 1 + (tokens + 2 * s) % 3


def render_utterance(tokens, speaker: int,
                     acoustic_dim: int = DEFAULT_ACOUSTIC_DIM) -> np.ndarray:
    """Ground-truth frames for a token sequence: [sum(dur), d_a]."""
    tokens = np.asarray(tokens, dtype=np.int64)
    if tokens.size == 0:
        raise ContractError("render_utterance: empty token sequence")
    gain, bias = speaker_transform(speaker, acoustic_dim)
    protos = prototype_table(int(tokens.max()) + 1, acoustic_dim)[tokens]
    durs = durations_for(speaker, tokens)
    return np.repeat(gain * protos + bias, durs, axis=0)


def oracle_decode(frames: np.ndarray, speaker: int,
                  vocab_size: int = DEFAULT_VOCAB_SIZE) -> np.ndarray:
    """Exact inverse of render_utterance on clean frames.

    Greedy: undo the speaker transform, nearest prototype wins (ties go to
    the smallest token id), then skip that token's duration. Always
    terminates because durations are positive.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.shape[0] == 0:
        raise ContractError(f"oracle_decode: need non-empty [L, d_a] frames, got {frames.shape}")
    gain, bias = speaker_transform(speaker, frames.shape[1])
    protos = prototype_table(vocab_size, frames.shape[1])
    out = []
    pos = 0
    while pos < frames.shape[0]:
        z = (frames[pos] - bias) / gain
        k = int(np.argmin(((z - protos) ** 2).sum(axis=1)))  # first min = smallest id
        out.append(k)
        pos += duration_rule(speaker, k)
    return np.asarray(out, dtype=np.int64)


# ---------------------------------------------------------------------------
# corruption and scoring
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorruptionSpec:
    """Per-character corruption model: probability, RNG seed, method weights.

    Weights order is (insertion, deletion, replacement); they must be
    non-negative and sum to one. The vocabulary size bounds the random
    tokens drawn for insertions and replacements.
    """

    probability: float
    seed: int
    weights: tuple = (1 / 3, 1 / 3, 1 / 3)
    vocab_size: int = DEFAULT_VOCAB_SIZE

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ContractError(f"corruption probability {self.probability} outside [0, 1]")
        w = tuple(float(x) for x in self.weights)
        if len(w) != 3 or min(w) < 0 or abs(sum(w) - 1.0) > 1e-9:
            raise ContractError(f"corruption weights must be 3 non-negatives summing to 1, got {w}")
        if self.vocab_size < 2:
            raise ContractError(f"vocabulary size must be >= 2, got {self.vocab_size}")
        object.__setattr__(self, "weights", w)


def corrupt(tokens, spec: CorruptionSpec) -> np.ndarray:
    """Corrupt each original character independently with probability P.

    Single left-to-right pass; inserted characters are never themselves
    corrupted. An insertion lands before or after its anchor on a fair coin.
    """
    tokens = np.asarray(tokens, dtype=np.int64)
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    c1 = spec.weights[0]
    c2 = c1 + spec.weights[1]
    out = []
    for ch in tokens.tolist():
        if rng.random() >= spec.probability:
            out.append(ch)
            continue
        u = rng.random()
        if u < c1:  # insertion around the character
            tok = int(rng.integers(spec.vocab_size))
            if rng.random() < 0.5:
                out.extend((tok, ch))
            else:
                out.extend((ch, tok))
        elif u < c2:  # deletion
            pass
        else:  # replacement
            out.append(int(rng.integers(spec.vocab_size)))
    return np.asarray(out, dtype=np.int64)


def levenshtein(a, b) -> int:
    """Edit distance with unit insert/delete/substitute costs."""
    return kernels.levenshtein(np.asarray(a, dtype=np.int64),
                               np.asarray(b, dtype=np.int64))


def cer(reference, hypothesis) -> float:
    """Levenshtein distance divided by the reference length."""
    reference = np.asarray(reference, dtype=np.int64)
    if reference.size == 0:
        raise ContractError("cer: empty reference")
    return levenshtein(reference, hypothesis) / reference.size


# ---------------------------------------------------------------------------
# corpora
# ---------------------------------------------------------------------------

@dataclass
class Utterance:
    """A transcript/recording pair.

    `frames` are always rendered from `reference`; corruption only ever
    rewrites `training` (transcription error, not audio error).
    """

    speaker: int
    reference: np.ndarray
    training: np.ndarray
    frames: np.ndarray


@dataclass
class Corpus:
    speakers: tuple
    utterances: list
    vocab_size: int = DEFAULT_VOCAB_SIZE
    acoustic_dim: int = DEFAULT_ACOUSTIC_DIM
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ok = set(self.speakers)
        for utt in self.utterances:
            if utt.speaker not in ok:
                raise ContractError(f"utterance speaker {utt.speaker} not in corpus "
                                    f"speaker set {sorted(ok)}")

    def size_per_speaker(self) -> dict:
        counts = {s: 0 for s in self.speakers}
        for utt in self.utterances:
            counts[utt.speaker] += 1
        return counts

    def for_speaker(self, speaker: int) -> list:
        return [u for u in self.utterances if u.speaker == speaker]


def generate_corpus(n_utts: int, len_range, speakers, seed: int,
                    vocab_size: int = DEFAULT_VOCAB_SIZE,
                    acoustic_dim: int = DEFAULT_ACOUSTIC_DIM) -> Corpus:
    """Uniform random token sequences per speaker, frames from the renderer.

    Fully reproducible from the seed; `n_utts` is per speaker.
    """
    lo, hi = int(len_range[0]), int(len_range[1])
    if not (1 <= lo <= hi <= 200):
        raise ContractError(f"length range ({lo}, {hi}) outside [1, 200]")
    if vocab_size < 2:
        raise ContractError(f"vocabulary size must be >= 2, got {vocab_size}")
    rng = np.random.Generator(np.random.PCG64(seed))
    utts = []
    for s in speakers:
        for _ in range(n_utts):
            length = int(rng.integers(lo, hi + 1))
            tokens = rng.integers(0, vocab_size, size=length, dtype=np.int64)
            utts.append(Utterance(
                speaker=int(s),
                reference=tokens,
                training=tokens.copy(),
                frames=render_utterance(tokens, int(s), acoustic_dim),
            ))
    return Corpus(speakers=tuple(int(s) for s in speakers), utterances=utts,
                  vocab_size=vocab_size, acoustic_dim=acoustic_dim,
                  meta={"seed": int(seed), "n_utts": int(n_utts),
                        "len_range": [lo, hi]})


def corrupt_corpus(corpus: Corpus, spec: CorruptionSpec) -> Corpus:
    """New corpus whose training transcripts are corrupted references.

    Utterance i uses an independent stream derived from (spec.seed, i), so
    the result is reproducible regardless of chunking.
    """
    utts = []
    for i, utt in enumerate(corpus.utterances):
        sub = int(np.random.SeedSequence([spec.seed, i]).generate_state(1)[0])
        utts.append(Utterance(
            speaker=utt.speaker,
            reference=utt.reference.copy(),
            training=corrupt(utt.reference, replace(spec, seed=sub)),
            frames=utt.frames.copy(),
        ))
    meta = dict(corpus.meta)
    meta["corruption"] = {"probability": spec.probability, "seed": spec.seed,
                          "weights": list(spec.weights)}
    return Corpus(speakers=corpus.speakers, utterances=utts,
                  vocab_size=corpus.vocab_size, acoustic_dim=corpus.acoustic_dim,
                  meta=meta)
