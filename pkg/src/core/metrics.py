"""Quality, latency and stability metrics over prefix translation lists"""


from dataclasses import dataclass, field
from itertools import accumulate
from typing import List, Sequence, Tuple
from sacrebleu.metrics import BLEU
from src.core.ptl import PrefixTranslationList, TokenSeq, lcp_len, validate_ptl
from src.utils.exceptions import (CountMismatchException, InvalidPTLException, NoFinalContentException,
                                  SentenceMetricException, ValidationException)
from src.utils.multithreading import parallel_execute
from src import logger


DAL_AGGREGATION = 'macro'   # mean of per-sentence DAL
NE_AGGREGATION = 'micro'    # total erased tokens / total final tokens

BLEU_MAX_ORDER = 4


@dataclass(frozen=True)
class DelayVector:
    """Content delays of the final target tokens.

    ``g[j]`` counts source tokens read (1..I) before the prefix ending at the
    (j+1)-th final token stopped changing; storage is 0-indexed.

    """

    g: Tuple[int, ...]
    I: int
    J: int

    def __post_init__(self):
        object.__setattr__(self, 'g', tuple(self.g))
        if len(self.g) != self.J:
            raise ValidationException(f'Delay vector has {len(self.g)} entries for J = {self.J}.')


@dataclass(frozen=True)
class SentenceScores:
    sentence_id: str
    dal: float
    ne: float
    J: int
    erasure: int


@dataclass(frozen=True)
class EvalReport:
    """Corpus-level BLEU, DAL and NE plus the per-sentence breakdown."""

    bleu: float
    dal: float
    ne: float
    per_sentence: List[SentenceScores] = field(default_factory=list)
    dal_aggregation: str = DAL_AGGREGATION
    ne_aggregation: str = NE_AGGREGATION


def content_delay(ptl: PrefixTranslationList) -> DelayVector:
    """Computes the content delay of every final target token.

    Parameters
    ----------
    ptl : PrefixTranslationList
        A valid PTL whose final output is non-empty.

    Returns
    -------
    delays : DelayVector
        For each final position j, the smallest step i such that every output
        from step i on agrees with the final output on positions 1..j.

    """

    J = ptl.J
    if J == 0:
        raise NoFinalContentException(ptl.sentence_id)

    # Agreement of each step with the final output; tokens beyond J never matter
    agreement = [lcp_len(output, ptl.final) for output in ptl.outputs]

    # Worst agreement from step i to the end
    stable = list(accumulate(reversed(agreement), min))[::-1]

    g = []
    i = 0
    for j in range(1, J + 1):
        while stable[i] < j:
            i += 1
        g.append(i + 1)

    return DelayVector(g=tuple(g), I=ptl.I, J=J)


def dal(delays: DelayVector) -> float:
    """Differentiable average lagging over a delay vector.

    Each target token costs at least 1/gamma source tokens, gamma = J/I, so
    ``g'_j = max(g_j, g'_{j-1} + 1/gamma)`` and the lag is the mean of
    ``g'_j - (j-1)/gamma``.
    """

    if delays.J == 0:
        raise NoFinalContentException()
    if delays.I < 1:
        raise ValidationException('DAL needs a source length I >= 1.')

    cost = delays.I / delays.J

    total = 0.0
    g_prime = 0.0
    for j, g_j in enumerate(delays.g):
        g_prime = g_j if j == 0 else max(g_j, g_prime + cost)
        total += g_prime - j * cost

    return total / delays.J


def erasure_profile(ptl: PrefixTranslationList) -> List[int]:
    """Tokens deleted at each step to produce that step's output (0 for step 1)."""
    return [0] + [len(prev) - lcp_len(curr, prev) for prev, curr in zip(ptl.outputs, ptl.outputs[1:])]


def total_erasure(ptl: PrefixTranslationList) -> int:
    return sum(erasure_profile(ptl))


def normalized_erasure(ptl: PrefixTranslationList) -> float:
    """Erased tokens per final token.

    Parameters
    ----------
    ptl : PrefixTranslationList
        The PTL to score.

    Returns
    -------
    ne : float
        Total erasure divided by J; 0.0 for an erasure-free PTL even when J = 0.

    """

    erased = total_erasure(ptl)
    if erased == 0:
        return 0.0
    if ptl.J == 0:
        raise NoFinalContentException(ptl.sentence_id)
    return erased / ptl.J


def corpus_bleu(hypotheses: Sequence[TokenSeq], references: Sequence[TokenSeq]) -> float:
    """Corpus-level BLEU-4 on the given tokens.

    Parameters
    ----------
    hypotheses : list of TokenSeq
        System outputs.

    references : list of TokenSeq
        One reference per hypothesis.

    Returns
    -------
    bleu : float
        Score in [0, 100]; cased, no smoothing, no further tokenization. A
        corpus with any zero n-gram precision scores 0.

    """

    if len(hypotheses) != len(references):
        raise CountMismatchException('hypotheses', len(hypotheses), 'references', len(references))
    if len(hypotheses) == 0:
        raise ValidationException('BLEU needs at least one sentence.')

    metric = BLEU(tokenize='none', smooth_method='none', max_ngram_order=BLEU_MAX_ORDER)
    result = metric.corpus_score([' '.join(h) for h in hypotheses], [[' '.join(r) for r in references]])

    return float(result.score)


def score_sentence(ptl: PrefixTranslationList) -> SentenceScores:
    """DAL, NE and erasure for one PTL, with errors tagged by sentence id."""

    try:
        report = validate_ptl(ptl)
        if not report.valid:
            raise InvalidPTLException(ptl.sentence_id, report.violations)

        erased = total_erasure(ptl)
        return SentenceScores(sentence_id=ptl.sentence_id,
                              dal=dal(content_delay(ptl)),
                              ne=normalized_erasure(ptl),
                              J=ptl.J,
                              erasure=erased)

    except SentenceMetricException:
        raise
    except ValidationException as e:
        raise SentenceMetricException(ptl.sentence_id, e) from e


def evaluate_corpus(ptls: Sequence[PrefixTranslationList], references: Sequence[TokenSeq],
                    num_threads: int = 1) -> EvalReport:
    """Scores a corpus of PTLs against references.

    Parameters
    ----------
    ptls : list of PrefixTranslationList
        One PTL per sentence.

    references : list of TokenSeq
        One reference per PTL, in the same order.

    num_threads : int, default 1
        Worker threads for the per-sentence metrics.

    Returns
    -------
    report : EvalReport
        BLEU on the final outputs, DAL macro-averaged over sentences, NE
        micro-averaged (total erasure over total final length).

    """

    if len(ptls) != len(references):
        raise CountMismatchException('PTLs', len(ptls), 'references', len(references))
    if len(ptls) == 0:
        raise ValidationException('Cannot evaluate an empty corpus.')

    per_sentence = parallel_execute(func=score_sentence, args=ptls, num_threads=num_threads)

    bleu = corpus_bleu([ptl.final for ptl in ptls], references)
    corpus_dal = sum(s.dal for s in per_sentence) / len(per_sentence)
    corpus_ne = sum(s.erasure for s in per_sentence) / sum(s.J for s in per_sentence)

    logger.info(f'Evaluated {len(ptls)} sentences: BLEU={bleu:.2f}, DAL={corpus_dal:.3f}, NE={corpus_ne:.3f}')

    return EvalReport(bleu=bleu, dal=corpus_dal, ne=corpus_ne, per_sentence=per_sentence)
