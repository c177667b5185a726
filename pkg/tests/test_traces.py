import struct

import numpy as np
import pytest

from chipletsca import Trace, TraceFileError, TraceSet, read_trace_file, write_trace_file
from chipletsca.traces import MAGIC


def test_round_trip_is_bit_exact(tmp_path, noisy_channel_set):
    path = tmp_path / "t.ccsc"
    write_trace_file(noisy_channel_set, path)
    back = read_trace_file(path)
    assert back.equals(noisy_channel_set)
    assert back.samples.shape == (256, 1024)
    assert path.stat().st_size == 24 + 256 * (1 + 4 * 1024)


def test_header_layout(tmp_path):
    ts = TraceSet(np.array([[1.5, -2.0]]), [9], 2e-12, unit="volts")
    path = tmp_path / "t.ccsc"
    write_trace_file(ts, path)
    raw = path.read_bytes()
    assert raw[:4] == MAGIC
    assert struct.unpack_from("<HBBIId", raw, 4) == (1, 1, 0, 1, 2, 2e-12)
    assert raw[24] == 9
    assert struct.unpack_from("<2f", raw, 25) == (1.5, -2.0)


def _write(tmp_path, blob):
    path = tmp_path / "bad.ccsc"
    path.write_bytes(blob)
    return path


def _valid_blob(tmp_path):
    path = tmp_path / "ok.ccsc"
    write_trace_file(TraceSet(np.ones((3, 4)), [0, 1, 2], 1e-11), path)
    return path.read_bytes()


def test_wrong_magic_rejected_at_offset_zero(tmp_path):
    blob = b"XXXX" + _valid_blob(tmp_path)[4:]
    with pytest.raises(TraceFileError, match="bad magic") as info:
        read_trace_file(_write(tmp_path, blob))
    assert info.value.offset == 0


def test_truncated_payload_reports_sizes(tmp_path):
    blob = _valid_blob(tmp_path)[:-5]
    with pytest.raises(TraceFileError) as info:
        read_trace_file(_write(tmp_path, blob))
    msg = str(info.value)
    assert f"expected {len(blob) + 5} bytes" in msg and f"{len(blob)} available" in msg


def test_truncated_header(tmp_path):
    with pytest.raises(TraceFileError, match="truncated header"):
        read_trace_file(_write(tmp_path, MAGIC + b"\x01\x00"))


@pytest.mark.parametrize("offset, value, fragment", [
    (4, b"\x02\x00", "version"), (6, b"\x07", "unit"), (7, b"\x01", "reserved"),
])
def test_corrupted_header_fields(tmp_path, offset, value, fragment):
    blob = bytearray(_valid_blob(tmp_path))
    blob[offset:offset + len(value)] = value
    with pytest.raises(TraceFileError, match=fragment) as info:
        read_trace_file(_write(tmp_path, bytes(blob)))
    assert info.value.offset == offset


def test_huge_declared_size_rejected_before_allocation(tmp_path):
    blob = bytearray(_valid_blob(tmp_path))
    blob[8:16] = struct.pack("<II", 2**31, 2**31)
    with pytest.raises(TraceFileError, match="payload length mismatch"):
        read_trace_file(_write(tmp_path, bytes(blob)))


def test_trace_invariants():
    with pytest.raises(ValueError):
        Trace([], 1e-11)
    with pytest.raises(ValueError):
        Trace([1.0, np.nan], 1e-11)
    with pytest.raises(ValueError):
        Trace([1.0], 0.0)
    with pytest.raises(ValueError):
        TraceSet(np.ones((2, 3)), [0], 1e-11)


def test_from_traces_requires_rectangular():
    a, b = Trace(np.ones(3), 1e-11), Trace(np.ones(4), 1e-11)
    with pytest.raises(ValueError):
        TraceSet.from_traces([a, b])
    ts = TraceSet.from_traces([a, a.with_samples(np.zeros(3), plaintext=5)], true_key=3)
    assert list(ts.plaintexts) == [0, 5] and ts.true_key == 3
