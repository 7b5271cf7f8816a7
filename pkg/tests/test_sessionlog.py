import pytest
from hypothesis import given
from hypothesis import strategies as st

from rehabsim.sessionlog import (
    HEADER,
    LogRecord,
    MalformedRecord,
    RecordKind,
    SessionLog,
    TimestampRegression,
    replay,
)


def rec(t, kind=RecordKind.GAME, k1=0, k2=0, k3=0, note=""):
    return LogRecord(t, kind, k1, k2, k3, note)


class TestAppend:
    def test_single_record(self):
        log = SessionLog()
        log.append(rec(0))
        assert len(log) == 1

    def test_equal_timestamps_keep_order(self):
        log = SessionLog()
        log.append(rec(5, k1=1))
        log.append(rec(5, k1=2))
        assert [r.k1 for r in log] == [1, 2]

    def test_regression_rejected(self):
        log = SessionLog()
        log.append(rec(10))
        with pytest.raises(TimestampRegression):
            log.append(rec(9))

    def test_records_snapshot_is_immutable(self):
        log = SessionLog()
        log.append(rec(1))
        snap = log.records
        log.append(rec(2))
        assert len(snap) == 1

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            rec(-1)

    def test_multiline_note_rejected(self):
        with pytest.raises(ValueError):
            rec(0, note="two\nlines")


class TestCsvRoundTrip:
    def test_header(self):
        assert SessionLog().to_csv() == HEADER + "\n"

    def test_known_bytes(self):
        log = SessionLog()
        log.append(rec(0, RecordKind.CTL, 0, 0, 0, "start"))
        log.append(LogRecord(3, RecordKind.SERVO, 1.5, 180.0, 0.25, ""))
        expected = (
            "t_ms,kind,k1,k2,k3,note\n"
            "0,Ctl,0,0,0,start\n"
            "3,Servo,1.5,180.0,0.25,\n"
        )
        assert log.to_csv() == expected

    def test_note_with_comma_quoted(self):
        log = SessionLog()
        log.append(rec(0, note='cfg={"a": 1, "b": 2}'))
        back = SessionLog.from_csv(log.to_csv())
        assert back.records[0].note == 'cfg={"a": 1, "b": 2}'

    @given(
        st.lists(
            st.tuples(
                st.integers(0, 10_000),
                st.sampled_from(list(RecordKind)),
                st.one_of(st.integers(-1000, 1000), st.floats(-1e6, 1e6, allow_nan=False)),
                st.text(
                    alphabet=st.characters(
                        blacklist_categories=("Cs", "Cc"), max_codepoint=0x2FF
                    ),
                    max_size=20,
                ),
            ),
            max_size=40,
        )
    )
    def test_round_trip_property(self, rows):
        rows.sort(key=lambda r: r[0])
        log = SessionLog()
        for t, kind, k, note in rows:
            log.append(LogRecord(t, kind, k, k, k, note))
        text = log.to_csv()
        back = SessionLog.from_csv(text)
        assert back.records == log.records
        assert back.to_csv() == text

    def test_file_round_trip(self, tmp_path):
        log = SessionLog()
        log.append(rec(0, RecordKind.EMG, 80, 80.5, 0))
        p = tmp_path / "session.csv"
        log.write_csv(p)
        assert SessionLog.read_csv(p).records == log.records


class TestMalformed:
    def test_bad_header(self):
        with pytest.raises(MalformedRecord) as e:
            SessionLog.from_csv("time,kind\n")
        assert e.value.line_no == 1

    def test_truncated_final_line(self):
        text = HEADER + "\n0,Game,1,2,3,ok\n5,Game,1,2\n"
        with pytest.raises(MalformedRecord) as e:
            SessionLog.from_csv(text)
        assert e.value.line_no == 3

    def test_unknown_kind(self):
        text = HEADER + "\n0,Bogus,1,2,3,\n"
        with pytest.raises(MalformedRecord) as e:
            SessionLog.from_csv(text)
        assert e.value.line_no == 2

    def test_non_numeric_field(self):
        text = HEADER + "\n0,Game,x,2,3,\n"
        with pytest.raises(MalformedRecord):
            SessionLog.from_csv(text)

    def test_time_regression_in_file(self):
        text = HEADER + "\n10,Game,0,0,0,\n5,Game,0,0,0,\n"
        with pytest.raises(MalformedRecord) as e:
            SessionLog.from_csv(text)
        assert e.value.line_no == 3

    def test_empty_text(self):
        with pytest.raises(MalformedRecord):
            SessionLog.from_csv("")


class TestReplayStream:
    def test_empty_log(self):
        assert list(replay(SessionLog())) == []

    def test_order_preserved(self):
        log = SessionLog()
        for i in range(10):
            log.append(rec(i, k1=i))
        assert [r.k1 for r in replay(log)] == list(range(10))
