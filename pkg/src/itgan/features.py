"""Daily behavior features: the 20-dim context-based user-day vector.

Feature order (fixed everywhere, including features.csv):
    L1 #logons, L2 #logoffs, L3 #after-hours logons, L4 #weekend logons,
    L5 #distinct PCs, U1 #device connects, U2 #after-hours connects,
    U3 #device disconnects, F1 #file copies, F2 #after-hours file copies,
    F3 #distinct files, F4 #executable-extension copies, E1 #emails sent,
    E2 #emails to external domains, E3 #emails with attachments,
    E4 total attachment count, H1 #wikileaks.org visits,
    H2 = Jaccard(day keywords, D1), H3 = Jaccard(day keywords, D2),
    W1 total http requests.

After-hours is outside 08:00-18:00; weekend is Saturday/Sunday. Both are
assumptions, the source material never pins them down.
"""

import re
from dataclasses import dataclass

import numpy as np

from .logs import EventKind

FEATURE_NAMES = [
    "L1", "L2", "L3", "L4", "L5",
    "U1", "U2", "U3",
    "F1", "F2", "F3", "F4",
    "E1", "E2", "E3", "E4",
    "H1", "H2", "H3", "W1",
]
N_FEATURES = len(FEATURE_NAMES)

WORK_START_HOUR = 8
WORK_END_HOUR = 18

EXECUTABLE_EXTENSIONS = {"exe", "dll", "bat", "msi", "sh"}

WIKILEAKS_HOST = "wikileaks.org"

# Default keyword corpora; D1 is job-hunting vocabulary, D2 is attack-tool
# vocabulary. Both can be overridden from a one-term-per-line file.
DEFAULT_D1 = frozenset(
    {"job", "career", "hiring", "resume", "interview", "vacancy", "recruiter", "salary"}
)
DEFAULT_D2 = frozenset(
    {"keylogger", "password", "crack", "hack", "exploit", "sniffer", "backdoor", "breach"}
)

_TOKEN_RE = re.compile(r"[0-9a-z]+")


@dataclass(frozen=True)
class KeywordCorpus:
    name: str  # "D1" or "D2"
    terms: frozenset

    def __post_init__(self):
        if not self.terms:
            raise ValueError(f"corpus {self.name} is empty")
        for t in self.terms:
            if t != t.strip().lower() or not t:
                raise ValueError(f"corpus {self.name} has a non-normalized term {t!r}")


def default_corpora():
    return KeywordCorpus("D1", DEFAULT_D1), KeywordCorpus("D2", DEFAULT_D2)


def load_corpus(name, path):
    """Read a keyword corpus: one lowercase term per line, blanks ignored."""
    terms = set()
    with open(path) as fh:
        for line in fh:
            term = line.strip().lower()
            if term:
                terms.add(term)
    return KeywordCorpus(name, frozenset(terms))


def jaccard(x, y):
    """|x n y| / |x u y|, with J(empty, empty) = 0."""
    if not x and not y:
        return 0.0
    return len(x & y) / len(x | y)


def extract_keywords(text):
    """Lowercase tokens split on non-alphanumeric runs, length >= 3, deduped."""
    return {tok for tok in _TOKEN_RE.findall(text.lower()) if len(tok) >= 3}


def is_after_hours(ts):
    return not (WORK_START_HOUR <= ts.hour < WORK_END_HOUR)


def is_weekend(ts):
    return ts.weekday() >= 5


def _url_host(url):
    host = re.sub(r"^[a-z]+://", "", url.lower()).split("/")[0]
    return host.split(":")[0]


def _email_domain(address):
    return address.rsplit("@", 1)[-1].lower() if "@" in address else ""


def extract_features(events, d1, d2):
    """Compute the 20-feature vector of one user-day event bucket.

    All events must share one (user, date) key; the pooled keywords of the
    day's http content feed H2/H3.
    """
    if events:
        key = events[0].day_key
        for ev in events[1:]:
            if ev.day_key != key:
                raise ValueError(f"mixed user-day keys: {key} vs {ev.day_key}")

    vec = np.zeros(N_FEATURES, dtype=np.float64)
    logon_pcs = set()
    filenames = set()
    day_keywords = set()

    for ev in events:
        ts = ev.timestamp
        if ev.kind is EventKind.LOGON:
            vec[0] += 1
            if is_after_hours(ts):
                vec[2] += 1
            if is_weekend(ts):
                vec[3] += 1
            logon_pcs.add(ev.pc)
        elif ev.kind is EventKind.LOGOFF:
            vec[1] += 1
        elif ev.kind is EventKind.DEVICE_CONNECT:
            vec[5] += 1
            if is_after_hours(ts):
                vec[6] += 1
        elif ev.kind is EventKind.DEVICE_DISCONNECT:
            vec[7] += 1
        elif ev.kind is EventKind.FILE_COPY:
            vec[8] += 1
            if is_after_hours(ts):
                vec[9] += 1
            filenames.add(ev.payload["filename"])
            if ev.payload["extension"] in EXECUTABLE_EXTENSIONS:
                vec[11] += 1
        elif ev.kind is EventKind.EMAIL_SEND:
            vec[12] += 1
            sender_domain = _email_domain(ev.payload["from"])
            recipients = ev.payload["to"] + ev.payload["cc"] + ev.payload["bcc"]
            if any(_email_domain(a) != sender_domain for a in recipients):
                vec[13] += 1
            if ev.payload["attachments"] > 0:
                vec[14] += 1
            vec[15] += ev.payload["attachments"]
        elif ev.kind is EventKind.HTTP_VISIT:
            vec[19] += 1
            if _url_host(ev.payload["url"]) == WIKILEAKS_HOST:
                vec[16] += 1
            day_keywords |= extract_keywords(ev.payload["content"])

    vec[4] = len(logon_pcs)
    vec[10] = len(filenames)
    vec[17] = jaccard(day_keywords, d1.terms)
    vec[18] = jaccard(day_keywords, d2.terms)
    return vec


def extract_all(buckets, d1=None, d2=None):
    """Featurize every user-day bucket; returns (keys, n x 20 matrix)."""
    if d1 is None or d2 is None:
        dd1, dd2 = default_corpora()
        d1 = d1 or dd1
        d2 = d2 or dd2
    keys = sorted(buckets)
    matrix = np.zeros((len(keys), N_FEATURES), dtype=np.float64)
    for i, key in enumerate(keys):
        matrix[i] = extract_features(buckets[key], d1, d2)
    return keys, matrix
