"""Deterministic generation of a desk-scale CERT-like log corpus.

Writes the five log CSVs plus labels.csv with ground truth for three planted
insider scenarios:

    S1 data exfiltration      wikileaks visits, after-hours logons, job-search
                              browsing (D1 keywords), device usage
    S2 IT sabotage            executable file copies, device connects,
                              external emails with attachments
    S3 IP theft               attack-tool browsing (D2 keywords), logons from
                              multiple PCs, after-hours device connects

Identical (config, seed) produce byte-identical output files.
"""

import json
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from pathlib import Path

import numpy as np

from .logs import (
    STREAM_COLUMNS,
    STREAM_FILES,
    EventKind,
    LogEvent,
    UserDayKey,
    serialize_log_file,
)

SCENARIOS = ("S1", "S2", "S3")

CORPUS_START = date(2011, 1, 3)  # a Monday

DEFAULT_BASELINE_RATES = {
    "logon": 2.0,   # logon/logoff pairs per day
    "device": 0.6,  # connect/disconnect pairs
    "file": 1.2,
    "email": 2.5,
    "http": 7.0,
}

INTERNAL_DOMAIN = "dtaa.com"
EXTERNAL_DOMAINS = ["gmail.com", "yahoo.com", "hotmail.com", "aol.com"]

BENIGN_WORDS = [
    "weather", "news", "sports", "update", "meeting", "project", "schedule",
    "report", "system", "network", "office", "lunch", "travel", "music",
    "video", "game", "finance", "market", "health", "recipe", "forum",
    "review", "article", "photo", "archive",
]
BENIGN_SITES = [
    "news.example.com", "sports.example.com", "mail.example.com",
    "wiki.example.org", "shop.example.net", "video.example.com",
]
JOB_WORDS = ["job", "career", "hiring", "resume", "interview", "vacancy", "recruiter", "salary"]
ATTACK_WORDS = ["keylogger", "password", "crack", "hack", "exploit", "sniffer", "backdoor", "breach"]
DOCUMENT_EXTS = ["pdf", "docx", "txt", "xlsx", "pptx"]


@dataclass(frozen=True)
class InsiderWindow:
    scenario: str  # S1/S2/S3
    user_index: int
    start_day: int
    length: int


@dataclass
class CorpusConfig:
    n_users: int
    n_days: int
    seed: int
    insiders: list | None = None  # explicit InsiderWindow list, or None for auto
    baseline_rates: dict = field(default_factory=lambda: dict(DEFAULT_BASELINE_RATES))
    target_malicious_fraction: float = 0.013
    weekend_activity_prob: float = 0.08

    def validate(self):
        if self.n_users < 1 or self.n_days < 1:
            raise ValueError("n_users and n_days must be positive")
        if any(rate < 0 for rate in self.baseline_rates.values()):
            raise ValueError("baseline rates must be non-negative")
        if not 0.0 < self.target_malicious_fraction <= 0.2:
            raise ValueError("target malicious fraction must be in (0, 0.2]")
        if self.insiders is not None:
            seen_users = set()
            for w in self.insiders:
                if w.scenario not in SCENARIOS:
                    raise ValueError(f"unknown scenario {w.scenario}")
                if not (0 <= w.user_index < self.n_users):
                    raise ValueError(f"insider user index {w.user_index} out of range")
                if w.start_day < 0 or w.start_day + w.length > self.n_days:
                    raise ValueError("attack window outside [0, n_days)")
                if w.user_index in seen_users:
                    raise ValueError("scenario user sets must be disjoint")
                seen_users.add(w.user_index)


@dataclass
class CorpusResult:
    labels: dict  # UserDayKey -> class name
    file_counts: dict  # stream -> data-row count
    insiders: list


def _user_name(i):
    return f"U{i:04d}"


def _user_pc(i):
    return f"PC-{i:04d}"


def _ts(day, minute_of_day, second):
    base = datetime.combine(CORPUS_START + timedelta(days=int(day)), datetime.min.time())
    return base + timedelta(minutes=int(minute_of_day), seconds=int(second))


def _work_minute(rng):
    return rng.integers(8 * 60, 18 * 60)


def _after_hours_minute(rng):
    # evening hours only; keeps events on the same calendar day
    return rng.integers(18 * 60 + 5, 23 * 60 + 50)


def _words(rng, pool, lo, hi):
    n = int(rng.integers(lo, hi + 1))
    return " ".join(pool[int(j)] for j in rng.integers(0, len(pool), size=n))


class _EventFactory:
    """Builds events for one user-day; ids are assigned at write time."""

    def __init__(self, user, pc, day, rng):
        self.user = user
        self.pc = pc
        self.day = day
        self.rng = rng
        self.events = []

    def add(self, kind, minute, payload=None, pc=None):
        ts = _ts(self.day, minute, self.rng.integers(0, 60))
        self.events.append(
            LogEvent(id="", timestamp=ts, user=self.user, pc=pc or self.pc, kind=kind,
                     payload=payload or {})
        )

    def logon_pair(self, minute, pc=None):
        self.add(EventKind.LOGON, minute, pc=pc)
        off = min(23 * 60 + 58, minute + int(self.rng.integers(60, 480)))
        self.add(EventKind.LOGOFF, off, pc=pc)

    def device_pair(self, minute):
        self.add(EventKind.DEVICE_CONNECT, minute)
        off = min(23 * 60 + 58, minute + int(self.rng.integers(5, 90)))
        self.add(EventKind.DEVICE_DISCONNECT, off)

    def file_copy(self, minute, ext):
        n = int(self.rng.integers(0, 10000))
        filename = f"doc{n:05d}.{ext}"
        payload = {"filename": filename, "extension": ext,
                   "content": _words(self.rng, BENIGN_WORDS, 3, 8)}
        self.add(EventKind.FILE_COPY, minute, payload)

    def email(self, minute, external, attachments):
        if external:
            to = [f"contact{int(self.rng.integers(0, 50)):03d}@"
                  f"{EXTERNAL_DOMAINS[int(self.rng.integers(0, len(EXTERNAL_DOMAINS)))]}"]
        else:
            to = [f"{_user_name(int(self.rng.integers(0, 1000)))}@{INTERNAL_DOMAIN}"]
        payload = {
            "to": to, "cc": [], "bcc": [],
            "from": f"{self.user}@{INTERNAL_DOMAIN}",
            "size": int(self.rng.integers(500, 50000)),
            "attachments": int(attachments),
            "content": _words(self.rng, BENIGN_WORDS, 4, 12),
        }
        self.add(EventKind.EMAIL_SEND, minute, payload)

    def http(self, minute, url, content):
        self.add(EventKind.HTTP_VISIT, minute, {"url": url, "content": content})


def _benign_day(factory, rates, rng):
    """Baseline activity with light noise tails overlapping scenario signals."""
    n_logons = 1 + rng.poisson(max(rates["logon"] - 1.0, 0.0))
    for i in range(n_logons):
        if rng.random() < 0.12:
            factory.logon_pair(_after_hours_minute(rng))
        elif rng.random() < 0.10:
            # occasional use of a second machine
            other = _user_pc(int(rng.integers(0, 1000)))
            factory.logon_pair(_work_minute(rng), pc=other)
        else:
            factory.logon_pair(_work_minute(rng))
    for _ in range(rng.poisson(rates["device"])):
        minute = _after_hours_minute(rng) if rng.random() < 0.10 else _work_minute(rng)
        factory.device_pair(minute)
    for _ in range(rng.poisson(rates["file"])):
        if rng.random() < 0.08:
            ext = "exe"
        else:
            ext = DOCUMENT_EXTS[int(rng.integers(0, len(DOCUMENT_EXTS)))]
        minute = _after_hours_minute(rng) if rng.random() < 0.08 else _work_minute(rng)
        factory.file_copy(minute, ext)
    for _ in range(rng.poisson(rates["email"])):
        external = rng.random() < 0.15
        attachments = rng.poisson(0.5)
        factory.email(_work_minute(rng), external, attachments)
    for _ in range(rng.poisson(rates["http"])):
        if rng.random() < 0.0015:
            site = "wikileaks.org"
        else:
            site = BENIGN_SITES[int(rng.integers(0, len(BENIGN_SITES)))]
        content = _words(rng, BENIGN_WORDS, 4, 10)
        roll = rng.random()
        if roll < 0.06:
            content += " " + JOB_WORDS[int(rng.integers(0, len(JOB_WORDS)))]
        elif roll < 0.07:
            content += " " + ATTACK_WORDS[int(rng.integers(0, len(ATTACK_WORDS)))]
        factory.http(_work_minute(rng), f"http://{site}/page{int(rng.integers(0, 500))}", content)


def plant_scenario(factory, scenario, rng):
    """Inject a scenario's signature events into one user-day."""
    if scenario == "S1":
        # data exfiltration: wikileaks uploads, after-hours access, removable media
        for _ in range(int(rng.integers(1, 3))):
            content = (_words(rng, JOB_WORDS, 1, 3) + " " + _words(rng, BENIGN_WORDS, 3, 6))
            factory.http(_after_hours_minute(rng),
                         f"http://wikileaks.org/upload{int(rng.integers(0, 100))}", content)
        for _ in range(int(rng.integers(1, 3))):
            factory.logon_pair(_after_hours_minute(rng))
        for _ in range(int(rng.integers(1, 3))):
            factory.device_pair(_work_minute(rng))
    elif scenario == "S2":
        # IT sabotage: executable drops from removable media, data sent out
        for _ in range(int(rng.integers(2, 4))):
            factory.file_copy(_work_minute(rng), "exe")
        for _ in range(int(rng.integers(1, 3))):
            factory.device_pair(_work_minute(rng))
        for _ in range(int(rng.integers(1, 3))):
            factory.email(_work_minute(rng), external=True,
                          attachments=1 + rng.poisson(0.5))
    elif scenario == "S3":
        # IP theft: attack-tool research, roaming across machines after hours
        for _ in range(int(rng.integers(1, 3))):
            content = (_words(rng, ATTACK_WORDS, 1, 3) + " " + _words(rng, BENIGN_WORDS, 3, 6))
            site = BENIGN_SITES[int(rng.integers(0, len(BENIGN_SITES)))]
            factory.http(_work_minute(rng), f"http://{site}/q{int(rng.integers(0, 100))}", content)
        other = _user_pc(int(rng.integers(1000, 2000)))
        factory.logon_pair(_after_hours_minute(rng), pc=other)
        for _ in range(int(rng.integers(1, 3))):
            factory.device_pair(_after_hours_minute(rng))
    else:
        raise ValueError(f"unknown scenario {scenario!r}")


def _auto_insiders(config, active_days, rng):
    """Pick insider windows over already-active weekdays to hit the target
    malicious fraction without changing the active-day count."""
    target = round(config.target_malicious_fraction * len(active_days))
    windows = []
    if target <= 0:
        return windows
    per_scenario = [target // 3] * 3
    for i in range(target % 3):
        per_scenario[i] += 1
    window_len = 10
    users = rng.permutation(config.n_users)
    user_cursor = 0
    active_by_user = {}
    for (u, d) in active_days:
        active_by_user.setdefault(u, []).append(d)
    for scenario, quota in zip(SCENARIOS, per_scenario):
        remaining = quota
        while remaining > 0 and user_cursor < len(users):
            u = int(users[user_cursor])
            user_cursor += 1
            days = active_by_user.get(u, [])
            length = min(window_len, remaining, len(days))
            if length == 0:
                continue
            start_pos = int(rng.integers(0, len(days) - length + 1))
            start_day = days[start_pos]
            # window covers `length` consecutive *active* days of this user
            windows.append(InsiderWindow(scenario, u, start_day, length))
            remaining -= length
    return windows


def generate_corpus(config, out_dir):
    """Generate the five log CSVs, labels.csv and manifest.json into out_dir."""
    config.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(config.seed)

    # Phase 1: the activity calendar (weekdays always on, weekends rarely).
    active_days = []
    for u in range(config.n_users):
        for d in range(config.n_days):
            weekday = (CORPUS_START + timedelta(days=d)).weekday()
            if weekday < 5 or rng.random() < config.weekend_activity_prob:
                active_days.append((u, d))

    # Phase 2: insider windows.
    if config.insiders is None:
        windows = _auto_insiders(config, active_days, rng)
    else:
        windows = list(config.insiders)
        extra = [
            (w.user_index, d)
            for w in windows
            for d in range(w.start_day, w.start_day + w.length)
            if (w.user_index, d) not in set(active_days)
        ]
        active_days = sorted(set(active_days) | set(extra))

    malicious = {}
    active_by_user = {}
    for (u, d) in active_days:
        active_by_user.setdefault(u, []).append(d)
    for w in windows:
        if config.insiders is None:
            days = [d for d in active_by_user[w.user_index] if d >= w.start_day][: w.length]
        else:
            days = list(range(w.start_day, w.start_day + w.length))
        for d in days:
            malicious[(w.user_index, d)] = w.scenario

    # Phase 3: emit events in a fixed (user, day) order.
    all_events = []
    labels = {}
    for (u, d) in active_days:
        user, pc = _user_name(u), _user_pc(u)
        factory = _EventFactory(user, pc, d, rng)
        _benign_day(factory, config.baseline_rates, rng)
        scenario = malicious.get((u, d))
        if scenario is not None:
            plant_scenario(factory, scenario, rng)
        key = UserDayKey(user, CORPUS_START + timedelta(days=d))
        labels[key] = scenario or "NonMalicious"
        all_events.extend(factory.events)

    # Phase 4: split into streams, order by time, assign ids, write.
    stream_of = {
        EventKind.LOGON: "logon", EventKind.LOGOFF: "logon",
        EventKind.DEVICE_CONNECT: "device", EventKind.DEVICE_DISCONNECT: "device",
        EventKind.FILE_COPY: "file", EventKind.EMAIL_SEND: "email",
        EventKind.HTTP_VISIT: "http",
    }
    per_stream = {stream: [] for stream in STREAM_COLUMNS}
    for i, ev in enumerate(all_events):
        per_stream[stream_of[ev.kind]].append((ev.timestamp, i, ev))
    file_counts = {}
    for stream, staged in per_stream.items():
        staged.sort(key=lambda item: (item[0], item[1]))
        for n, (_, _, ev) in enumerate(staged):
            ev.id = f"{{{stream[0].upper()}{n:07d}}}"
        serialize_log_file([ev for _, _, ev in staged], stream, out_dir / STREAM_FILES[stream])
        file_counts[stream] = len(staged)

    _write_labels(labels, out_dir / "labels.csv")
    manifest = {
        "n_users": config.n_users,
        "n_days": config.n_days,
        "seed": config.seed,
        "file_counts": file_counts,
        "n_user_days": len(labels),
        "n_malicious": sum(1 for v in labels.values() if v != "NonMalicious"),
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return CorpusResult(labels=labels, file_counts=file_counts, insiders=windows)


def _write_labels(labels, path):
    with open(path, "w", newline="") as fh:
        fh.write("user,date,label\n")
        for key in sorted(labels):
            fh.write(f"{key.user},{key.date.isoformat()},{labels[key]}\n")


def read_labels(path):
    """Read labels.csv back into a UserDayKey -> class-name map."""
    labels = {}
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "user,date,label":
            raise ValueError(f"bad labels.csv header: {header}")
        for line in fh:
            user, day, label = line.strip().split(",")
            labels[UserDayKey(user, date.fromisoformat(day))] = label
    return labels
