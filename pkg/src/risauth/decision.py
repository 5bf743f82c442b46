import enum
from dataclasses import dataclass
from typing import Optional


class Decision(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"

    def __bool__(self):
        return self is Decision.ACCEPT


class AttackKind(enum.Enum):
    FAKE_READER = "fake-reader"
    IMPERSONATING_TAG = "impersonating-tag"
    REPLAY = "replay"
    RELAY = "relay"
    MITM = "mitm"
    INJECTION = "injection"
    JAMMING = "jamming"
    MALICIOUS_RIS_JAM = "malicious-ris-jam"
    MALICIOUS_RIS_EAVESDROP = "malicious-ris-eavesdrop"


@dataclass(frozen=True)
class TrialOutcome:
    """One authentication attempt.

    ``statistic`` is the RSS ratio for reader-side checks and the maximum
    voltage deviation for tag-side checks. ``kind`` is None for legitimate
    attempts.
    """

    statistic: float
    is_legitimate: bool
    decision: Decision
    kind: Optional[AttackKind] = None
