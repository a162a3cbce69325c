"""Parsing of the five CERT-style CSV log streams into typed events.

Schemas (exact headers):
    logon.csv:  id,date,user,pc,activity          activity in {Logon, Logoff}
    device.csv: id,date,user,pc,activity          activity in {Connect, Disconnect}
    file.csv:   id,date,user,pc,filename,content
    email.csv:  id,date,user,pc,to,cc,bcc,from,size,attachments,content
    http.csv:   id,date,user,pc,url,content

Timestamps are "MM/DD/YYYY HH:MM:SS"; invalid rows raise with a line number.
Unknown extra columns are ignored, missing required columns are errors.
"""

import csv
import enum
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path


class EventKind(enum.Enum):
    LOGON = "Logon"
    LOGOFF = "Logoff"
    DEVICE_CONNECT = "DeviceConnect"
    DEVICE_DISCONNECT = "DeviceDisconnect"
    FILE_COPY = "FileCopy"
    EMAIL_SEND = "EmailSend"
    HTTP_VISIT = "HttpVisit"


# Canonical log streams, their required header columns and file names.
STREAM_COLUMNS = {
    "logon": ["id", "date", "user", "pc", "activity"],
    "device": ["id", "date", "user", "pc", "activity"],
    "file": ["id", "date", "user", "pc", "filename", "content"],
    "email": ["id", "date", "user", "pc", "to", "cc", "bcc", "from", "size", "attachments", "content"],
    "http": ["id", "date", "user", "pc", "url", "content"],
}
STREAM_FILES = {stream: f"{stream}.csv" for stream in STREAM_COLUMNS}

TIMESTAMP_FORMAT = "%m/%d/%Y %H:%M:%S"


class LogParseError(ValueError):
    """Raised for malformed log files; carries path and 1-based line number."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


@dataclass(frozen=True, order=True)
class UserDayKey:
    user: str
    date: date


@dataclass
class LogEvent:
    id: str
    timestamp: datetime
    user: str
    pc: str
    kind: EventKind
    payload: dict = field(default_factory=dict)

    @property
    def day_key(self):
        return UserDayKey(self.user, self.timestamp.date())


def parse_timestamp(text):
    return datetime.strptime(text, TIMESTAMP_FORMAT)


def format_timestamp(ts):
    return ts.strftime(TIMESTAMP_FORMAT)


def _activity_kind(stream, activity):
    if stream == "logon":
        mapping = {"Logon": EventKind.LOGON, "Logoff": EventKind.LOGOFF}
    else:
        mapping = {"Connect": EventKind.DEVICE_CONNECT, "Disconnect": EventKind.DEVICE_DISCONNECT}
    return mapping.get(activity)


def _row_event(stream, row, path, line):
    try:
        ts = parse_timestamp(row["date"])
    except ValueError:
        raise LogParseError(path, line, f"bad timestamp {row['date']!r}") from None

    if stream in ("logon", "device"):
        kind = _activity_kind(stream, row["activity"])
        if kind is None:
            raise LogParseError(path, line, f"bad activity {row['activity']!r} for {stream}.csv")
        payload = {}
    elif stream == "file":
        kind = EventKind.FILE_COPY
        filename = row["filename"]
        ext = filename.rsplit(".", 1)[-1].lower() if "." in filename else ""
        payload = {"filename": filename, "extension": ext, "content": row["content"]}
    elif stream == "email":
        kind = EventKind.EMAIL_SEND
        try:
            size = int(row["size"])
            attachments = int(row["attachments"])
        except ValueError:
            raise LogParseError(path, line, "size/attachments must be integers") from None
        payload = {
            "to": [a for a in row["to"].split(";") if a],
            "cc": [a for a in row["cc"].split(";") if a],
            "bcc": [a for a in row["bcc"].split(";") if a],
            "from": row["from"],
            "size": size,
            "attachments": attachments,
            "content": row["content"],
        }
    else:  # http
        kind = EventKind.HTTP_VISIT
        payload = {"url": row["url"], "content": row["content"]}

    return LogEvent(id=row["id"], timestamp=ts, user=row["user"], pc=row["pc"], kind=kind, payload=payload)


def parse_log_file(path, stream):
    """Parse one CSV log file into a list of events, in file order."""
    if stream not in STREAM_COLUMNS:
        raise ValueError(f"unknown log stream {stream!r}")
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"log file not found: {path}")
    required = STREAM_COLUMNS[stream]
    events = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return events
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise LogParseError(path, 1, f"missing required columns {missing} for {stream}.csv")
        for row in reader:
            line = reader.line_num
            if any(row.get(c) is None for c in required):
                raise LogParseError(path, line, "short row")
            events.append(_row_event(stream, row, path, line))
    return events


def serialize_log_file(events, stream, path):
    """Write events back to CSV with the canonical schema (round-trip aid)."""
    columns = STREAM_COLUMNS[stream]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for ev in events:
            writer.writerow(event_row(ev, stream))


def event_row(ev, stream):
    """Canonical CSV row of an event in its stream's column order."""
    base = [ev.id, format_timestamp(ev.timestamp), ev.user, ev.pc]
    if stream == "logon":
        activity = "Logon" if ev.kind is EventKind.LOGON else "Logoff"
        return base + [activity]
    if stream == "device":
        activity = "Connect" if ev.kind is EventKind.DEVICE_CONNECT else "Disconnect"
        return base + [activity]
    if stream == "file":
        return base + [ev.payload["filename"], ev.payload["content"]]
    if stream == "email":
        p = ev.payload
        return base + [
            ";".join(p["to"]), ";".join(p["cc"]), ";".join(p["bcc"]),
            p["from"], str(p["size"]), str(p["attachments"]), p["content"],
        ]
    return base + [ev.payload["url"], ev.payload["content"]]


def scan_corpus(directory):
    """Parse all five log files and bucket events by (user, calendar date).

    Within a bucket events are ordered by timestamp, with original file order
    as the tiebreak.
    """
    directory = Path(directory)
    buckets = {}
    order = 0
    staged = []
    for stream, filename in STREAM_FILES.items():
        for ev in parse_log_file(directory / filename, stream):
            staged.append((ev.timestamp, order, ev))
            order += 1
    staged.sort(key=lambda item: (item[0], item[1]))
    for _, _, ev in staged:
        buckets.setdefault(ev.day_key, []).append(ev)
    return buckets
