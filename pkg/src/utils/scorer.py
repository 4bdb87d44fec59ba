"""External scorer protocol: a ScoringModel backed by a child process, and the serving loop.

One JSON object per line on the child's standard streams.

    request   {"src": [tokens], "tgt": [tokens], "top": n}
    response  {"items": [[token, logprob], ...], "eos": logprob}

Items come sorted by descending log-probability. The client renormalizes
over the returned items and EOS; tokens not returned get probability 0.
"""


import json
import math
import subprocess
import threading
from collections import deque
from os import environ
from queue import Empty, Queue
from typing import List, Sequence, TextIO
import numpy as np
from dotenv import load_dotenv
from src.core.models import EOS, Distribution, ScoringModel
from src.core.ptl import is_valid_token
from src.utils.exceptions import (InvalidConfigException, ScorerProcessException, ScorerResponseException,
                                  ScorerTimeoutException)
from src import logger


load_dotenv('.env')

SCORER_TIMEOUT_SECONDS = float(environ.get('SCORER_TIMEOUT_SECONDS', 30))
SCORER_TOP_N = int(environ.get('SCORER_TOP_N', 0))

# Stand-in for log(0) on the wire; exp() of it underflows to 0.0
LOGPROB_FLOOR = -1.0e4

_CLOSED = object()


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def format_request(source_prefix: Sequence[str], target_prefix: Sequence[str], top: int = 0) -> str:
    return json.dumps({'src': list(source_prefix), 'tgt': list(target_prefix), 'top': int(top)}, ensure_ascii=False)


def parse_response(line: str) -> Distribution:
    """Validates a response line and turns it into a distribution.

    Parameters
    ----------
    line : str
        One raw response line.

    Returns
    -------
    dist : dict
        Probabilities over the returned tokens and EOS, renormalized to sum
        to 1.

    Raises
    ------
    ScorerResponseException
        If the line is not a well-formed, sorted response with finite
        log-probabilities.

    """

    try:
        message = json.loads(line)
    except json.JSONDecodeError:
        raise ScorerResponseException('not JSON', line)

    if not isinstance(message, dict) or not isinstance(message.get('items'), list) or 'eos' not in message:
        raise ScorerResponseException("expected an object with 'items' and 'eos'", line)

    eos = message['eos']
    if not _is_number(eos) or not math.isfinite(eos):
        raise ScorerResponseException('eos log-probability is not a finite number', line)

    tokens, logprobs = [], []
    for item in message['items']:
        if not (isinstance(item, list) and len(item) == 2):
            raise ScorerResponseException('items must be [token, logprob] pairs', line)
        token, logprob = item
        if not isinstance(token, str) or not is_valid_token(token) or token == EOS:
            raise ScorerResponseException(f'invalid token {token!r}', line)
        if not _is_number(logprob) or not math.isfinite(logprob):
            raise ScorerResponseException(f'log-probability of {token!r} is not a finite number', line)
        if logprobs and logprob > logprobs[-1]:
            raise ScorerResponseException('items are not sorted by descending log-probability', line)
        tokens.append(token)
        logprobs.append(float(logprob))

    if len(set(tokens)) != len(tokens):
        raise ScorerResponseException('duplicate tokens', line)

    values = np.array(logprobs + [float(eos)])
    probs = np.exp(values - np.logaddexp.reduce(values))

    return dict(zip(tokens + [EOS], probs.tolist()))


def format_response(dist: Distribution, top: int = 0) -> str:
    """Serializes a distribution as a protocol response line."""

    items = sorted(((token, p) for token, p in dist.items() if token != EOS and p > 0),
                   key=lambda pair: (-pair[1], pair[0]))
    if top > 0:
        items = items[:top]

    eos_p = dist.get(EOS, 0.0)
    message = {
        'items': [[token, math.log(p)] for token, p in items],
        'eos': math.log(eos_p) if eos_p > 0 else LOGPROB_FLOOR,
    }
    return json.dumps(message, ensure_ascii=False)


class _ScorerProcess:
    """One child process and the threads draining its stdout and stderr."""

    def __init__(self, command: List[str], timeout: float):
        self.timeout = timeout
        self._proc = subprocess.Popen(
            command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            encoding='utf-8',
            bufsize=1,
        )
        self._responses: Queue = Queue()
        self._stderr_lines = deque(maxlen=50)
        self._broken = False

        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._stderr_reader = threading.Thread(target=self._read_stderr_loop, daemon=True)
        self._reader.start()
        self._stderr_reader.start()
        logger.info(f"Started external scorer (pid {self._proc.pid}): {' '.join(command)}")

    def _read_loop(self) -> None:
        try:
            for line in self._proc.stdout:
                line = line.rstrip('\n')
                if line.strip():
                    self._responses.put(line)
        finally:
            self._responses.put(_CLOSED)

    def _read_stderr_loop(self) -> None:
        for line in self._proc.stderr:
            line = line.strip()
            if line:
                self._stderr_lines.append(line)

    def _stderr_summary(self) -> str:
        if not self._stderr_lines:
            return '<no stderr>'
        return ' | '.join(list(self._stderr_lines)[-5:])

    def request(self, line: str) -> str:
        """Sends one request line and waits for the raw response line."""

        if self._broken:
            raise ScorerProcessException('request (earlier failure)', self._stderr_summary())

        try:
            self._proc.stdin.write(line + '\n')
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            self._broken = True
            raise ScorerProcessException('send', self._stderr_summary())

        try:
            response = self._responses.get(timeout=self.timeout)
        except Empty:
            # A late answer would desynchronize the stream
            self._broken = True
            self.close()
            raise ScorerTimeoutException(self.timeout, self._stderr_summary())

        if response is _CLOSED:
            self._broken = True
            raise ScorerProcessException('receive (stdout closed)', self._stderr_summary())

        return response

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            self._proc.terminate()
            try:
                self._proc.wait(timeout=3)
            except subprocess.TimeoutExpired:
                self._proc.kill()


class ExternalScorerModel(ScoringModel):
    """ScoringModel served by child processes over the JSONL protocol.

    Each worker thread talks to its own child process, started on its first
    request; requests on one process are strictly sequential. The process
    of the constructing thread starts right away so a bad command fails
    early.

    Parameters
    ----------
    command : list of str
        The child process command line.

    timeout : float, default SCORER_TIMEOUT_SECONDS
        Seconds to wait for each response.

    top : int, default SCORER_TOP_N
        Number of items requested per response; 0 asks for all.

    vocab : list of str, default ()
        Target vocabulary, if known.

    """

    def __init__(self, command: List[str], timeout: float = SCORER_TIMEOUT_SECONDS,
                 top: int = SCORER_TOP_N, vocab: Sequence[str] = ()):
        if not command:
            raise InvalidConfigException('The external scorer needs a non-empty command.')
        self.command = list(command)
        self.timeout = float(timeout)
        self.top = int(top)
        self._vocabulary = frozenset(vocab)

        self._local = threading.local()
        self._lock = threading.Lock()
        self._processes: List[_ScorerProcess] = []
        self._process()

    @classmethod
    def from_config(cls, config: dict) -> 'ExternalScorerModel':
        command = config.get('command')
        if not isinstance(command, list) or not all(isinstance(c, str) for c in command):
            raise InvalidConfigException("External scorer config needs a 'command' list of strings.")
        return cls(command=command,
                   timeout=config.get('timeout', SCORER_TIMEOUT_SECONDS),
                   top=config.get('top', SCORER_TOP_N),
                   vocab=config.get('vocab', []))

    def _process(self) -> _ScorerProcess:
        process = getattr(self._local, 'process', None)
        if process is None:
            process = _ScorerProcess(self.command, self.timeout)
            self._local.process = process
            with self._lock:
                self._processes.append(process)
        return process

    @property
    def n_processes(self) -> int:
        with self._lock:
            return len(self._processes)

    @property
    def vocabulary(self):
        return self._vocabulary

    def next_distribution(self, source_prefix, target_prefix) -> Distribution:
        line = self._process().request(format_request(source_prefix, target_prefix, self.top))
        return parse_response(line)

    def describe(self) -> dict:
        return {'type': 'external', 'command': self.command, 'timeout': self.timeout, 'top': self.top}

    def close(self) -> None:
        with self._lock:
            processes, self._processes = self._processes, []
        for process in processes:
            process.close()


def serve_model(model: ScoringModel, instream: TextIO, outstream: TextIO, top: int = 0) -> int:
    """Answers protocol requests from ``instream`` until it closes.

    Malformed requests get an ``{"error": ...}`` line, which clients reject
    as a protocol error. Returns the number of requests answered.
    """

    n_answered = 0
    for line in instream:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
            source_prefix, target_prefix = request['src'], request['tgt']
            if not isinstance(source_prefix, list) or not isinstance(target_prefix, list):
                raise ValueError("'src' and 'tgt' must be token lists")
            request_top = int(request.get('top', 0)) or top
            response = format_response(model.next_distribution(tuple(source_prefix), tuple(target_prefix)),
                                       top=request_top)
        except (ValueError, KeyError, TypeError) as e:
            logger.warning(f'Rejected scorer request {line.strip()!r}: {e}')
            response = json.dumps({'error': str(e)})

        outstream.write(response + '\n')
        outstream.flush()
        n_answered += 1

    return n_answered
