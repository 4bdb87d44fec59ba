"""Error classes shared across the toolkit.

Two roots map onto the command-line exit codes: ``ValidationException`` (1)
for bad inputs and violated preconditions, ``ProtocolException`` (2) for the
external scorer wire protocol.
"""


class ValidationException(Exception):
    """Base class for input, configuration and precondition errors."""


class ProtocolException(Exception):
    """Base class for external scorer failures."""


class ParseException(ValidationException):
    """Error class for unparseable lines in an input file."""
    def __init__(self, path, line_number, reason):
        self.path = path
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"{path}, line {line_number}: {reason}")


class CountMismatchException(ValidationException):
    """Error class for parallel inputs of different lengths."""
    def __init__(self, left_name, left_count, right_name, right_count):
        self.left_count = left_count
        self.right_count = right_count
        super().__init__(f"Count mismatch: {left_name} has {left_count} items, "
                         f"{right_name} has {right_count}.")


class InvalidTokensException(ValidationException):
    """Error class for token sequences with empty or whitespace-bearing tokens."""
    def __init__(self, token):
        self.token = token
        super().__init__(f"Invalid token {token!r}: tokens must be non-empty and contain no whitespace.")


class InvalidPTLException(ValidationException):
    """Error class for structurally invalid prefix translation lists."""
    def __init__(self, sentence_id, violations):
        self.sentence_id = sentence_id
        self.violations = list(violations)
        super().__init__(f"Invalid PTL '{sentence_id}': {'; '.join(self.violations)}")


class NoFinalContentException(ValidationException):
    """Error class for metrics that need a non-empty final output."""
    def __init__(self, sentence_id=''):
        self.sentence_id = sentence_id
        label = f" '{sentence_id}'" if sentence_id else ''
        super().__init__(f"PTL{label} has no final content (J = 0).")


class SentenceMetricException(ValidationException):
    """Error class wrapping a per-sentence metric failure with its sentence id."""
    def __init__(self, sentence_id, cause):
        self.sentence_id = sentence_id
        self.cause = cause
        super().__init__(f"Sentence '{sentence_id}': {cause}")


class InvalidConfigException(ValidationException):
    """Error class for invalid decode, augmentation, grid or model configuration."""
    def __init__(self, message):
        super().__init__(message)


class DecodeException(ValidationException):
    """Error class for a failed decode of one source prefix."""
    def __init__(self, prefix_length, cause):
        self.prefix_length = prefix_length
        self.cause = cause
        super().__init__(f"Decoding failed at source prefix length {prefix_length}: {cause}")


class MissingAlignmentException(ValidationException):
    """Error class for aligned-mode augmentation without alignments."""
    def __init__(self, sentence_index):
        self.sentence_index = sentence_index
        super().__init__(f"Aligned mode requires alignments for every pair; "
                         f"sentence {sentence_index} has none.")


class MissingTestPointException(ValidationException):
    """Error class for a dev frontier config without a test measurement."""
    def __init__(self, config):
        self.config = config
        super().__init__(f"No test point for frontier config beta={config[0]}, k={config[1]}, beam={config[2]}.")


class SweepConfigException(ValidationException):
    """Error class wrapping a failure while sweeping one configuration."""
    def __init__(self, label, cause):
        self.label = label
        self.cause = cause
        super().__init__(f"Config {label}: {cause}")


class ScorerTimeoutException(ProtocolException):
    """Error class for a scorer request that got no answer in time."""
    def __init__(self, timeout, stderr_summary):
        self.timeout = timeout
        super().__init__(f"External scorer did not answer within {timeout} s. stderr: {stderr_summary}")


class ScorerResponseException(ProtocolException):
    """Error class for malformed scorer responses; keeps the raw line."""
    def __init__(self, reason, raw_line):
        self.reason = reason
        self.raw_line = raw_line
        super().__init__(f"Malformed scorer response ({reason}): {raw_line!r}")


class ScorerProcessException(ProtocolException):
    """Error class for a scorer process that exited or closed its pipes."""
    def __init__(self, context, stderr_summary):
        super().__init__(f"External scorer process unavailable during {context}. stderr: {stderr_summary}")
