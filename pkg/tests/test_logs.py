from datetime import date, datetime
from pathlib import Path

import pytest

from itgan import corpusgen
from itgan.logs import (
    EventKind,
    LogParseError,
    UserDayKey,
    event_row,
    parse_log_file,
    scan_corpus,
    serialize_log_file,
)

LOGON_TWO_ROWS = (
    "id,date,user,pc,activity\n"
    "{L0},01/03/2011 08:12:00,U0001,PC-0001,Logon\n"
    "{L1},01/03/2011 17:40:11,U0001,PC-0001,Logoff\n"
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_parse_logon_two_rows(tmp_path):
    path = write(tmp_path, "logon.csv", LOGON_TWO_ROWS)
    events = parse_log_file(path, "logon")
    assert [e.kind for e in events] == [EventKind.LOGON, EventKind.LOGOFF]
    assert events[0].timestamp == datetime(2011, 1, 3, 8, 12, 0)
    assert events[0].user == "U0001"


def test_invalid_calendar_date_reports_line(tmp_path):
    path = write(
        tmp_path,
        "logon.csv",
        "id,date,user,pc,activity\n{L0},13/40/2011 09:00:00,U1,PC-1,Logon\n",
    )
    with pytest.raises(LogParseError) as exc:
        parse_log_file(path, "logon")
    assert exc.value.line == 2


def test_missing_column_is_error(tmp_path):
    path = write(tmp_path, "logon.csv", "id,date,user,activity\nx,01/01/2011 00:00:00,U1,Logon\n")
    with pytest.raises(LogParseError, match="missing required columns"):
        parse_log_file(path, "logon")


def test_extra_columns_are_ignored(tmp_path):
    path = write(
        tmp_path,
        "logon.csv",
        "id,date,user,pc,activity,extra\n{L0},01/03/2011 08:00:00,U1,PC-1,Logon,junk\n",
    )
    events = parse_log_file(path, "logon")
    assert len(events) == 1


def test_missing_file_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        parse_log_file(tmp_path / "nope.csv", "logon")


def test_bad_activity_rejected(tmp_path):
    path = write(
        tmp_path, "logon.csv", "id,date,user,pc,activity\nx,01/03/2011 08:00:00,U1,PC-1,Connect\n"
    )
    with pytest.raises(LogParseError, match="bad activity"):
        parse_log_file(path, "logon")


def test_email_payload_fields(tmp_path):
    path = write(
        tmp_path,
        "email.csv",
        "id,date,user,pc,to,cc,bcc,from,size,attachments,content\n"
        "{E0},01/03/2011 10:00:00,U1,PC-1,a@x.com;b@y.com,,c@z.com,U1@dtaa.com,1234,2,hello world\n",
    )
    (ev,) = parse_log_file(path, "email")
    assert ev.payload["to"] == ["a@x.com", "b@y.com"]
    assert ev.payload["cc"] == []
    assert ev.payload["bcc"] == ["c@z.com"]
    assert ev.payload["attachments"] == 2


def test_file_extension_extraction(tmp_path):
    path = write(
        tmp_path,
        "file.csv",
        "id,date,user,pc,filename,content\n{F0},01/03/2011 10:00:00,U1,PC-1,payload.EXE,data\n",
    )
    (ev,) = parse_log_file(path, "file")
    assert ev.payload["extension"] == "exe"


def test_round_trip_preserves_rows(tmp_path):
    src = write(tmp_path, "logon.csv", LOGON_TWO_ROWS)
    events = parse_log_file(src, "logon")
    out = tmp_path / "copy.csv"
    serialize_log_file(events, "logon", out)
    assert out.read_text().rstrip("\n").replace("\r", "") == LOGON_TWO_ROWS.rstrip("\n")


def test_event_row_matches_source(tmp_path):
    src = write(tmp_path, "logon.csv", LOGON_TWO_ROWS)
    events = parse_log_file(src, "logon")
    assert event_row(events[0], "logon") == ["{L0}", "01/03/2011 08:12:00", "U0001", "PC-0001", "Logon"]


class TestScanCorpus:
    @pytest.fixture()
    def corpus_dir(self, tmp_path):
        cfg = corpusgen.CorpusConfig(n_users=8, n_days=10, seed=42)
        result = corpusgen.generate_corpus(cfg, tmp_path)
        return tmp_path, result

    def test_two_dates_two_buckets(self, tmp_path):
        write(
            tmp_path,
            "logon.csv",
            "id,date,user,pc,activity\n"
            "a,01/03/2011 08:00:00,U1,PC-1,Logon\n"
            "b,01/04/2011 08:00:00,U1,PC-1,Logon\n",
        )
        for stream in ("device", "file", "email", "http"):
            header = {
                "device": "id,date,user,pc,activity",
                "file": "id,date,user,pc,filename,content",
                "email": "id,date,user,pc,to,cc,bcc,from,size,attachments,content",
                "http": "id,date,user,pc,url,content",
            }[stream]
            write(tmp_path, f"{stream}.csv", header + "\n")
        buckets = scan_corpus(tmp_path)
        assert set(buckets) == {
            UserDayKey("U1", date(2011, 1, 3)),
            UserDayKey("U1", date(2011, 1, 4)),
        }

    def test_empty_files_empty_map(self, tmp_path):
        headers = {
            "logon": "id,date,user,pc,activity",
            "device": "id,date,user,pc,activity",
            "file": "id,date,user,pc,filename,content",
            "email": "id,date,user,pc,to,cc,bcc,from,size,attachments,content",
            "http": "id,date,user,pc,url,content",
        }
        for stream, header in headers.items():
            write(tmp_path, f"{stream}.csv", header + "\n")
        assert scan_corpus(tmp_path) == {}

    def test_event_conservation(self, corpus_dir):
        corpus, result = corpus_dir
        buckets = scan_corpus(corpus)
        total_rows = sum(result.file_counts.values())
        assert sum(len(evs) for evs in buckets.values()) == total_rows

    def test_buckets_keyed_by_event_date_and_sorted(self, corpus_dir):
        corpus, _ = corpus_dir
        for key, events in scan_corpus(corpus).items():
            for ev in events:
                assert ev.user == key.user
                assert ev.timestamp.date() == key.date
            stamps = [ev.timestamp for ev in events]
            assert stamps == sorted(stamps)

    def test_parse_error_propagates(self, tmp_path):
        write(tmp_path, "logon.csv", "id,date,user,pc,activity\nx,junk,U1,PC-1,Logon\n")
        for stream in ("device", "file", "email", "http"):
            header = {
                "device": "id,date,user,pc,activity",
                "file": "id,date,user,pc,filename,content",
                "email": "id,date,user,pc,to,cc,bcc,from,size,attachments,content",
                "http": "id,date,user,pc,url,content",
            }[stream]
            write(tmp_path, f"{stream}.csv", header + "\n")
        with pytest.raises(LogParseError):
            scan_corpus(tmp_path)
