"""Policy drivers that turn a model and a source sentence into a PTL"""


from dataclasses import dataclass
from typing import List, Sequence
from src.core.decode import (DEFAULT_MAX_LEN_FACTOR, DEFAULT_MAX_LEN_SLACK, DecodeConfig, biased_beam_decode,
                             greedy_extend, max_output_length, waitk_truncate)
from src.core.models import ScoringModel
from src.core.ptl import PrefixTranslationList, to_tokens
from src.utils.exceptions import DecodeException, InvalidConfigException, ProtocolException, ValidationException
from src.utils.multithreading import parallel_execute
from src import logger


RETRANSLATE = 'retranslate'
STREAM_WAITK = 'stream'

POLICIES = [RETRANSLATE, STREAM_WAITK]


@dataclass(frozen=True)
class PolicyRun:
    """A PTL together with the policy and configuration that produced it."""

    config: DecodeConfig
    policy: str
    ptl: PrefixTranslationList


def retranslate_ptl(model: ScoringModel, source: Sequence[str], config: DecodeConfig,
                    sentence_id: str = '') -> PrefixTranslationList:
    """Re-translates every source prefix from scratch.

    Parameters
    ----------
    model : ScoringModel
        The scoring model.

    source : sequence of str
        Non-empty source sentence.

    config : DecodeConfig
        Bias weight, wait-k lag and beam size.

    sentence_id : str, default ''
        Identifier carried into the PTL.

    Returns
    -------
    ptl : PrefixTranslationList
        ``outputs[i-1]`` is the biased translation of ``source[:i]``, biased
        towards the previous display and truncated to ``max(i - k, 0)``
        tokens. The complete sentence (i = I) is displayed untruncated.

    """

    source = to_tokens(source)
    if len(source) == 0:
        raise InvalidConfigException('Cannot simulate an empty source.')

    displayed = ()
    outputs = []
    for i in range(1, len(source) + 1):
        try:
            full = biased_beam_decode(model, source[:i], displayed, config)
        except ValidationException as e:
            raise DecodeException(i, e) from e
        except ProtocolException:
            logger.error(f"Scorer failure at source prefix length {i} of sentence '{sentence_id}'.")
            raise

        displayed = full if i == len(source) else waitk_truncate(full, i, config.k)
        outputs.append(displayed)

    return PrefixTranslationList(source=source, outputs=outputs, sentence_id=sentence_id)


def stream_waitk_ptl(model: ScoringModel, source: Sequence[str], k: int,
                     max_len_factor: float = DEFAULT_MAX_LEN_FACTOR, max_len_slack: int = DEFAULT_MAX_LEN_SLACK,
                     sentence_id: str = '') -> PrefixTranslationList:
    """Runs the append-only wait-k read/write agent.

    After reading i < I source tokens the agent has written max(i - k, 0)
    tokens, each chosen greedily given the source read so far and the
    committed target. An EOS predicted before the source is complete writes
    nothing for that read. After the last read the target is completed
    greedily up to EOS or the length cap. Committed tokens never change.
    """

    source = to_tokens(source)
    if len(source) == 0:
        raise InvalidConfigException('Cannot simulate an empty source.')
    if int(k) != k or k < 0:
        raise InvalidConfigException(f'k must be a non-negative integer, got {k}.')

    I = len(source)
    committed = []
    outputs = []
    for i in range(1, I + 1):
        try:
            cap = max_output_length(i, max_len_factor, max_len_slack)
            if i < I:
                quota = max(i - k, 0) - len(committed)
                if quota > 0:
                    written, _ = greedy_extend(model, source[:i], committed, max_new=quota, max_length=cap)
                    committed.extend(written)
            else:
                written, _ = greedy_extend(model, source, committed, max_length=cap)
                committed.extend(written)
        except ValidationException as e:
            raise DecodeException(i, e) from e

        outputs.append(tuple(committed))

    return PrefixTranslationList(source=source, outputs=outputs, sentence_id=sentence_id)


def run_policy(model: ScoringModel, source: Sequence[str], policy: str, config: DecodeConfig,
               sentence_id: str = '') -> PolicyRun:
    """Dispatches to the re-translation driver or the streaming agent."""

    if policy == RETRANSLATE:
        ptl = retranslate_ptl(model, source, config, sentence_id=sentence_id)
    elif policy == STREAM_WAITK:
        ptl = stream_waitk_ptl(model, source, config.k, config.max_len_factor, config.max_len_slack,
                               sentence_id=sentence_id)
    else:
        raise InvalidConfigException(f"Unknown policy '{policy}'; expected one of {POLICIES}.")

    return PolicyRun(config=config, policy=policy, ptl=ptl)


def simulate_corpus(model: ScoringModel, sources: Sequence[Sequence[str]], policy: str, config: DecodeConfig,
                    sentence_ids: Sequence[str] = None, num_threads: int = 1) -> List[PrefixTranslationList]:
    """Builds one PTL per source sentence, in input order.

    Parameters
    ----------
    model : ScoringModel
        The scoring model.

    sources : list of token sequences
        The source sentences.

    policy : str
        'retranslate' or 'stream'.

    config : DecodeConfig
        The policy configuration.

    sentence_ids : list of str, default None
        Identifiers; defaults to the 1-based line numbers.

    num_threads : int, default 1
        Sentences simulated in parallel.

    Returns
    -------
    ptls : list of PrefixTranslationList

    """

    if policy not in POLICIES:
        raise InvalidConfigException(f"Unknown policy '{policy}'; expected one of {POLICIES}.")
    if sentence_ids is None:
        sentence_ids = [str(n + 1) for n in range(len(sources))]

    def simulate_one(item):
        sentence_id, source = item
        return run_policy(model, source, policy, config, sentence_id=sentence_id).ptl

    ptls = parallel_execute(func=simulate_one, args=list(zip(sentence_ids, sources)), num_threads=num_threads)
    logger.debug(f'Simulated {len(ptls)} sentences with policy={policy}, {config.label}')

    return ptls
